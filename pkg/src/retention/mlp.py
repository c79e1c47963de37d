"""Two-layer perceptron for stay/leave classification, built on numpy.

Architecture: input -> sigmoid hidden layer -> 2-unit softmax output. Output
unit 0 is the leave factor, unit 1 the stay factor; the stay probability is
stay / (leave + stay), which softmax normalizes to the stay factor itself.
Training is plain seeded minibatch gradient descent on cross-entropy.

A trained model bundles its weights with the feature codec, standardization
statistics and raw-feature ranges it was fitted against, so a single object
(or its saved file) maps a raw feature vector straight to a probability.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dataset import (EncodedDataset, FeatureCodec, StandardizationStats,
                      read_versioned_document, standardize,
                      write_versioned_document)
from .errors import InputError, NumericError, SchemaError

MODEL_FORMAT_VERSION = 1
_LOG_CLIP = 1e-12


@dataclass
class MlpParams:
    """Weight matrices and bias vectors, all float64."""

    w1: np.ndarray  # (n_in, n_hidden)
    b1: np.ndarray  # (n_hidden,)
    w2: np.ndarray  # (n_hidden, 2)
    b2: np.ndarray  # (2,)

    def __post_init__(self):
        for name in ("w1", "b1", "w2", "b2"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if not np.isfinite(arr).all():
                raise NumericError(f"non-finite entries in {name}")
            setattr(self, name, arr)

    @property
    def n_inputs(self) -> int:
        return self.w1.shape[0]

    def copy(self) -> "MlpParams":
        return MlpParams(self.w1.copy(), self.b1.copy(), self.w2.copy(), self.b2.copy())


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.05
    epochs: int = 200
    batch_size: int = 32
    seed: int = 0
    hidden_units: int = 20
    init_scale: float | None = None  # None -> 1/sqrt(fan_in) per layer

    def __post_init__(self):
        if self.learning_rate < 0:
            raise SchemaError("learning rate must be >= 0")
        if self.epochs < 1 or self.batch_size < 1 or self.hidden_units < 1:
            raise SchemaError("epochs, batch_size and hidden_units must be >= 1")


def init_params(n_inputs: int, n_hidden: int, seed: int,
                init_scale: float | None = None) -> MlpParams:
    """Seeded uniform init in [-s, s] with s = 1/sqrt(fan-in) per layer."""
    rng = np.random.default_rng(seed)
    s1 = init_scale if init_scale is not None else 1.0 / math.sqrt(n_inputs)
    s2 = init_scale if init_scale is not None else 1.0 / math.sqrt(n_hidden)
    return MlpParams(
        w1=rng.uniform(-s1, s1, (n_inputs, n_hidden)),
        b1=rng.uniform(-s1, s1, n_hidden),
        w2=rng.uniform(-s2, s2, (n_hidden, 2)),
        b2=rng.uniform(-s2, s2, 2),
    )


def _sigmoid(x):
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _softmax(logits):
    shifted = logits - logits.max(axis=-1, keepdims=True)
    ex = np.exp(shifted)
    return ex / ex.sum(axis=-1, keepdims=True)


def forward_batch(params: MlpParams, Z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Batch forward pass: returns (probabilities (n,2), hidden activations (n,h))."""
    Z = np.atleast_2d(np.asarray(Z, dtype=float))
    if Z.shape[1] != params.n_inputs:
        raise SchemaError(f"input width {Z.shape[1]} does not match model "
                          f"input width {params.n_inputs}")
    hidden = _sigmoid(Z @ params.w1 + params.b1)
    probs = _softmax(hidden @ params.w2 + params.b2)
    return probs, hidden


def forward(params: MlpParams, z: np.ndarray) -> tuple[float, float, np.ndarray]:
    """Single-vector forward pass: (leave factor, stay factor, hidden activations)."""
    probs, hidden = forward_batch(params, np.asarray(z, dtype=float).reshape(1, -1))
    return float(probs[0, 0]), float(probs[0, 1]), hidden[0]


def cross_entropy(probs: np.ndarray, Y: np.ndarray) -> float:
    """Mean cross-entropy against one-hot labels, clipped away from log(0)."""
    clipped = np.clip(probs, _LOG_CLIP, 1.0)
    return float(-(Y * np.log(clipped)).sum(axis=1).mean())


def loss_and_gradients(params: MlpParams, Z: np.ndarray, Y: np.ndarray
                       ) -> tuple[float, MlpParams]:
    """Loss plus analytic gradients of the mean cross-entropy w.r.t. every
    parameter, packaged in an MlpParams of matching shapes."""
    Z = np.atleast_2d(np.asarray(Z, dtype=float))
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    n = Z.shape[0]
    probs, hidden = forward_batch(params, Z)
    loss = cross_entropy(probs, Y)

    d_logits = (probs - Y) / n
    g_w2 = hidden.T @ d_logits
    g_b2 = d_logits.sum(axis=0)
    d_hidden = (d_logits @ params.w2.T) * hidden * (1.0 - hidden)
    g_w1 = Z.T @ d_hidden
    g_b1 = d_hidden.sum(axis=0)
    return loss, MlpParams(w1=g_w1, b1=g_b1, w2=g_w2, b2=g_b2)


@dataclass
class MlpModel:
    """A trained network plus everything needed to apply it to raw features."""

    params: MlpParams
    stats: StandardizationStats
    codec: FeatureCodec
    feature_min: np.ndarray
    feature_max: np.ndarray
    metadata: dict

    def __post_init__(self):
        if self.stats.n_features != self.params.n_inputs:
            raise SchemaError("standardization stats do not match network input width")
        if self.codec.n_features != self.params.n_inputs:
            raise SchemaError("feature codec does not match network input width")

    @property
    def fingerprint(self) -> str:
        return self.codec.fingerprint()

    def default_bounds(self) -> dict[str, tuple[float, float]]:
        """Training-data min/max per feature, for catalog clamp defaults."""
        return {name: (float(self.feature_min[i]), float(self.feature_max[i]))
                for i, name in enumerate(self.codec.feature_names)}

    def stay_probability(self, raw_features: np.ndarray) -> float:
        return calculate_s(self, raw_features)


def train(train_set: EncodedDataset, config: TrainConfig = TrainConfig()) -> MlpModel:
    """Fit the network on an encoded training set.

    Standardization statistics are computed here, from this set only, and
    stored on the returned model. Deterministic for a fixed config.
    """
    n = train_set.n
    if n < 1:
        raise InputError("empty training set")
    Z, stats = standardize(train_set.X)
    Y = train_set.Y
    rng = np.random.default_rng(config.seed)
    params = init_params(Z.shape[1], config.hidden_units, config.seed, config.init_scale)

    epoch_losses = []
    for epoch in range(config.epochs):
        order = rng.permutation(n)
        batch_losses = []
        for start in range(0, n, config.batch_size):
            idx = order[start:start + config.batch_size]
            loss, grads = loss_and_gradients(params, Z[idx], Y[idx])
            if not math.isfinite(loss):
                raise NumericError(
                    f"training diverged: non-finite loss at epoch {epoch} "
                    f"(learning_rate={config.learning_rate})")
            params.w1 -= config.learning_rate * grads.w1
            params.b1 -= config.learning_rate * grads.b1
            params.w2 -= config.learning_rate * grads.w2
            params.b2 -= config.learning_rate * grads.b2
            batch_losses.append(loss)
        epoch_losses.append(float(np.mean(batch_losses)))

    probs, _ = forward_batch(params, Z)
    train_accuracy = float((probs.argmax(axis=1) == Y.argmax(axis=1)).mean())
    model = MlpModel(
        params=params,
        stats=stats,
        codec=train_set.codec,
        feature_min=train_set.X.min(axis=0),
        feature_max=train_set.X.max(axis=0),
        metadata={
            "seed": config.seed,
            "epochs": config.epochs,
            "learning_rate": config.learning_rate,
            "batch_size": config.batch_size,
            "hidden_units": config.hidden_units,
            "final_loss": epoch_losses[-1],
            "train_accuracy": train_accuracy,
            "epoch_losses": epoch_losses,
        },
    )
    return model


@dataclass(frozen=True)
class EvalResult:
    accuracy: float
    confusion: np.ndarray  # rows actual, cols predicted; index 0 leave, 1 stay

    @property
    def total(self) -> int:
        return int(self.confusion.sum())


def evaluate(model: MlpModel, test_set: EncodedDataset) -> EvalResult:
    """Accuracy and confusion counts of argmax predictions on a labeled set."""
    if test_set.n == 0:
        raise InputError("cannot evaluate on an empty set")
    if test_set.codec.fingerprint() != model.fingerprint:
        raise SchemaError("dataset was encoded with a different schema than the model")
    Z, _ = standardize(test_set.X, model.stats)
    probs, _ = forward_batch(model.params, Z)
    predicted = probs.argmax(axis=1)
    actual = test_set.Y.argmax(axis=1)
    confusion = np.zeros((2, 2), dtype=int)
    for a, p in zip(actual, predicted):
        confusion[a, p] += 1
    return EvalResult(accuracy=float((predicted == actual).mean()), confusion=confusion)


def calculate_s(model: MlpModel, raw_features: np.ndarray) -> float:
    """Raw feature vector -> stay probability in (0, 1).

    Standardizes with the model's training statistics, runs the network, and
    returns stay_factor / (leave_factor + stay_factor).
    """
    raw = np.asarray(raw_features, dtype=float)
    if raw.ndim != 1 or raw.shape[0] != model.params.n_inputs:
        raise SchemaError(f"expected a vector of {model.params.n_inputs} features, "
                          f"got shape {raw.shape}")
    if not np.isfinite(raw).all():
        raise NumericError("non-finite feature value")
    z = (raw - model.stats.mean) / model.stats.std
    leave, stay, _ = forward(model.params, z)
    return stay / (leave + stay)


def save_model(model: MlpModel, path):
    """Write the model as a checksummed, versioned JSON document."""
    payload = {
        "dimensions": {
            "inputs": model.params.n_inputs,
            "hidden": model.params.w1.shape[1],
            "outputs": 2,
        },
        "weights": {
            "w1": model.params.w1.tolist(),
            "b1": model.params.b1.tolist(),
            "w2": model.params.w2.tolist(),
            "b2": model.params.b2.tolist(),
        },
        "stats": model.stats.to_dict(),
        "codec": model.codec.to_dict(),
        "schema_fingerprint": model.codec.fingerprint(),
        "feature_min": model.feature_min.tolist(),
        "feature_max": model.feature_max.tolist(),
        "metadata": model.metadata,
    }
    write_versioned_document(path, "retention-mlp", MODEL_FORMAT_VERSION, payload)


def load_model(path) -> MlpModel:
    """Inverse of save_model; weight arrays round-trip bit-identically."""
    payload = read_versioned_document(path, "retention-mlp", MODEL_FORMAT_VERSION)
    weights = payload["weights"]
    params = MlpParams(
        w1=np.array(weights["w1"], dtype=float),
        b1=np.array(weights["b1"], dtype=float),
        w2=np.array(weights["w2"], dtype=float),
        b2=np.array(weights["b2"], dtype=float),
    )
    codec = FeatureCodec.from_dict(payload["codec"])
    if payload.get("schema_fingerprint") != codec.fingerprint():
        raise SchemaError(f"{path}: stored fingerprint does not match stored codec")
    return MlpModel(
        params=params,
        stats=StandardizationStats.from_dict(payload["stats"]),
        codec=codec,
        feature_min=np.array(payload["feature_min"], dtype=float),
        feature_max=np.array(payload["feature_max"], dtype=float),
        metadata=payload["metadata"],
    )
