"""CSV ingestion, categorical encoding, standardization and seeded splits.

The pipeline is: ``load_csv`` (strings, validated against a schema config)
-> ``encode`` (numeric matrix plus one-hot labels, categorical levels mapped
to integer codes in lexicographic order) -> ``split`` -> ``standardize``
(z-scores with training-set statistics). Encodings and statistics persist
as a versioned JSON document so inference can reproduce training-time
preprocessing exactly.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np
import yaml

from .errors import ChecksumError, InputError, NumericError, SchemaError, VersionError

PREPROCESSING_FORMAT_VERSION = 1


def _require(condition, exc, message):
    if not condition:
        raise exc(message)


@dataclass(frozen=True)
class SchemaConfig:
    """Declares how a CSV maps onto the model's feature space.

    ``feature_columns`` is the ordered feature list; ``dropped_columns`` are
    present in the file but excluded from modeling (identifiers, constants);
    the label column holds exactly two values, ``label_positive`` marking a
    leaver.
    """

    feature_columns: tuple[str, ...]
    categorical_columns: tuple[str, ...]
    dropped_columns: tuple[str, ...]
    label_column: str
    label_positive: str
    label_negative: str

    def __post_init__(self):
        _require(len(self.feature_columns) > 0, SchemaError, "schema lists no feature columns")
        _require(len(set(self.feature_columns)) == len(self.feature_columns),
                 SchemaError, "duplicate feature columns in schema")
        unknown_cats = set(self.categorical_columns) - set(self.feature_columns)
        _require(not unknown_cats, SchemaError,
                 f"categorical columns not among features: {sorted(unknown_cats)}")
        overlap = set(self.feature_columns) & set(self.dropped_columns)
        _require(not overlap, SchemaError,
                 f"columns both kept and dropped: {sorted(overlap)}")
        _require(self.label_column not in self.feature_columns, SchemaError,
                 "label column listed as a feature")
        _require(self.label_positive != self.label_negative, SchemaError,
                 "label values must differ")

    @property
    def all_columns(self) -> frozenset[str]:
        return frozenset(self.feature_columns) | set(self.dropped_columns) | {self.label_column}

    @classmethod
    def from_file(cls, path) -> "SchemaConfig":
        try:
            with open(path) as fh:
                doc = yaml.safe_load(fh)
        except OSError as exc:
            raise InputError(f"cannot read schema config {path}: {exc}") from exc
        except yaml.YAMLError as exc:
            raise SchemaError(f"malformed schema config {path}: {exc}") from exc
        _require(isinstance(doc, dict), SchemaError, f"schema config {path} is not a mapping")
        try:
            return cls(
                feature_columns=tuple(doc["feature_columns"]),
                categorical_columns=tuple(doc.get("categorical_columns", ())),
                dropped_columns=tuple(doc.get("dropped_columns", ())),
                label_column=doc["label_column"],
                label_positive=str(doc["label_positive"]),
                label_negative=str(doc["label_negative"]),
            )
        except KeyError as exc:
            raise SchemaError(f"schema config {path} missing key {exc}") from exc


@dataclass(frozen=True)
class RawRecord:
    """One CSV data row, all values still strings, keyed by column name."""

    values: Mapping[str, str]

    def __getitem__(self, column: str) -> str:
        return self.values[column]


def load_csv(path, schema: SchemaConfig) -> list[RawRecord]:
    """Read a header-first CSV into raw records validated against *schema*.

    Every schema column must appear in the header and the header must not
    contain columns the schema does not know about. Rows with missing fields
    or blank values are rejected (no imputation), with the offending row
    number in the message.
    """
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise InputError(f"{path}: empty file, no header row") from None
            rows = list(reader)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc

    header_set = set(header)
    _require(len(header_set) == len(header), SchemaError, f"{path}: duplicate header columns")
    missing = schema.all_columns - header_set
    _require(not missing, SchemaError, f"{path}: missing columns {sorted(missing)}")
    unexpected = header_set - schema.all_columns
    _require(not unexpected, SchemaError,
             f"{path}: columns absent from schema config {sorted(unexpected)}")

    records = []
    for i, row in enumerate(rows, start=2):  # header is line 1
        if len(row) != len(header):
            raise InputError(f"{path}: row {i} has {len(row)} fields, expected {len(header)}")
        values = dict(zip(header, row))
        blanks = [c for c in schema.all_columns if values[c].strip() == ""]
        if blanks:
            raise InputError(f"{path}: row {i} has blank values in {sorted(blanks)}")
        label = values[schema.label_column]
        if label not in (schema.label_positive, schema.label_negative):
            raise InputError(f"{path}: row {i} has unknown label value {label!r}")
        records.append(RawRecord(values))
    return records


@dataclass(frozen=True)
class FeatureCodec:
    """Persisted encoding: feature order plus categorical level tables.

    Levels are stored in lexicographic order of the distinct values seen at
    build time, so codes are reproducible from the data alone.
    """

    feature_names: tuple[str, ...]
    categorical_levels: Mapping[str, tuple[str, ...]]
    label_column: str
    label_positive: str
    label_negative: str

    @property
    def n_features(self) -> int:
        return len(self.feature_names)

    def encode_value(self, column: str, value) -> float:
        levels = self.categorical_levels.get(column)
        if levels is not None:
            value = str(value)
            if value not in levels:
                raise SchemaError(
                    f"unknown category {value!r} for column {column}; known: {list(levels)}")
            return float(levels.index(value))
        try:
            out = float(value)
        except (TypeError, ValueError):
            raise SchemaError(f"column {column}: cannot parse {value!r} as a number") from None
        if not math.isfinite(out):
            raise SchemaError(f"column {column}: non-finite value {value!r}")
        return out

    def decode_value(self, column: str, code: float) -> str:
        """Inverse of encode_value for categorical columns."""
        levels = self.categorical_levels.get(column)
        _require(levels is not None, SchemaError, f"column {column} is not categorical")
        idx = int(code)
        _require(idx == code and 0 <= idx < len(levels), SchemaError,
                 f"column {column}: code {code} out of range")
        return levels[idx]

    def encode_features(self, named: Mapping[str, object]) -> np.ndarray:
        """Map a {column: raw value} mapping to the ordered feature vector."""
        missing = [c for c in self.feature_names if c not in named]
        _require(not missing, SchemaError, f"missing feature values for {missing}")
        extra = set(named) - set(self.feature_names)
        _require(not extra, SchemaError, f"unknown feature names {sorted(extra)}")
        return np.array([self.encode_value(c, named[c]) for c in self.feature_names])

    def encode_label(self, value: str) -> np.ndarray:
        """One-hot label: leaver -> [1, 0], stayer -> [0, 1]."""
        if value == self.label_positive:
            return np.array([1.0, 0.0])
        if value == self.label_negative:
            return np.array([0.0, 1.0])
        raise SchemaError(f"unknown label value {value!r}")

    def to_dict(self) -> dict:
        return {
            "feature_names": list(self.feature_names),
            "categorical_levels": {c: list(v) for c, v in self.categorical_levels.items()},
            "label_column": self.label_column,
            "label_positive": self.label_positive,
            "label_negative": self.label_negative,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "FeatureCodec":
        return cls(
            feature_names=tuple(doc["feature_names"]),
            categorical_levels={c: tuple(v) for c, v in doc["categorical_levels"].items()},
            label_column=doc["label_column"],
            label_positive=doc["label_positive"],
            label_negative=doc["label_negative"],
        )

    def fingerprint(self) -> str:
        """Stable digest of the full encoding; models refuse mismatched data."""
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()


@dataclass
class EncodedDataset:
    """Numeric design matrix X, one-hot labels Y and the codec that built them."""

    X: np.ndarray
    Y: np.ndarray
    codec: FeatureCodec

    def __post_init__(self):
        _require(self.X.shape[0] == self.Y.shape[0], SchemaError,
                 "X and Y row counts differ")
        _require(self.Y.ndim == 2 and self.Y.shape[1] == 2, SchemaError,
                 "Y must be rows of 2-component one-hot vectors")
        one_hot = np.isin(self.Y, (0.0, 1.0)).all() and (self.Y.sum(axis=1) == 1.0).all()
        _require(bool(one_hot), SchemaError, "Y rows must be exactly [1,0] or [0,1]")
        _require(np.isfinite(self.X).all(), NumericError, "non-finite entries in X")

    @property
    def n(self) -> int:
        return self.X.shape[0]


def build_codec(records: list[RawRecord], schema: SchemaConfig) -> FeatureCodec:
    """Derive the codec from data: distinct categorical values, sorted."""
    _require(len(records) > 0, InputError, "cannot build a codec from zero records")
    levels = {}
    for column in schema.categorical_columns:
        levels[column] = tuple(sorted({r[column] for r in records}))
    return FeatureCodec(
        feature_names=tuple(schema.feature_columns),
        categorical_levels=levels,
        label_column=schema.label_column,
        label_positive=schema.label_positive,
        label_negative=schema.label_negative,
    )


def encode(records: list[RawRecord], schema: SchemaConfig,
           codec: FeatureCodec | None = None) -> EncodedDataset:
    """Encode records to numbers; builds the codec from the data unless given.

    Passing a training-time codec makes unseen categorical values an error
    instead of silently inventing new codes.
    """
    _require(len(records) > 0, InputError, "cannot encode an empty record list")
    if codec is None:
        codec = build_codec(records, schema)
    X = np.empty((len(records), codec.n_features))
    Y = np.empty((len(records), 2))
    for i, record in enumerate(records):
        for j, column in enumerate(codec.feature_names):
            X[i, j] = codec.encode_value(column, record[column])
        Y[i] = codec.encode_label(record[codec.label_column])
    return EncodedDataset(X=X, Y=Y, codec=codec)


@dataclass(frozen=True)
class StandardizationStats:
    """Per-column mean and standard deviation from the training split."""

    mean: np.ndarray
    std: np.ndarray

    def __post_init__(self):
        _require(self.mean.shape == self.std.shape, SchemaError,
                 "mean/std shape mismatch")
        _require((self.std > 0).all(), SchemaError, "non-positive std in stats")

    @property
    def n_features(self) -> int:
        return self.mean.shape[0]

    def to_dict(self) -> dict:
        return {"mean": self.mean.tolist(), "std": self.std.tolist()}

    @classmethod
    def from_dict(cls, doc: dict) -> "StandardizationStats":
        return cls(mean=np.array(doc["mean"], dtype=float),
                   std=np.array(doc["std"], dtype=float))


def standardize(X: np.ndarray,
                stats: StandardizationStats | None = None
                ) -> tuple[np.ndarray, StandardizationStats]:
    """z-score columns of X; computes stats from X when not supplied.

    Constant columns get std 1 so their z-scores are exactly zero.
    """
    X = np.asarray(X, dtype=float)
    _require(np.isfinite(X).all(), SchemaError, "non-finite entries in X")
    if stats is None:
        mean = X.mean(axis=0)
        std = X.std(axis=0)
        std = np.where(std > 0, std, 1.0)
        stats = StandardizationStats(mean=mean, std=std)
    _require(X.shape[1] == stats.n_features, SchemaError,
             f"X has {X.shape[1]} columns, stats expect {stats.n_features}")
    return (X - stats.mean) / stats.std, stats


def destandardize(Z: np.ndarray, stats: StandardizationStats) -> np.ndarray:
    """Inverse of standardize for the given stats."""
    return np.asarray(Z, dtype=float) * stats.std + stats.mean


def split(dataset: EncodedDataset, train_fraction: float, seed: int
          ) -> tuple[EncodedDataset, EncodedDataset]:
    """Seeded shuffle then partition; train gets floor(fraction * n) rows."""
    _require(0.0 < train_fraction < 1.0, SchemaError,
             f"train_fraction must be in (0,1), got {train_fraction}")
    n = dataset.n
    _require(n >= 2, InputError, f"need at least 2 rows to split, got {n}")
    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    n_train = int(math.floor(train_fraction * n))
    train_idx, test_idx = order[:n_train], order[n_train:]
    make = lambda idx: EncodedDataset(X=dataset.X[idx], Y=dataset.Y[idx], codec=dataset.codec)
    return make(train_idx), make(test_idx)


def _canonical_json(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def _checksum(payload: dict) -> str:
    return hashlib.sha256(_canonical_json(payload).encode()).hexdigest()


def write_versioned_document(path, kind: str, version: int, payload: dict):
    """Write the standard self-describing JSON envelope used by all artifacts."""
    doc = {
        "kind": kind,
        "format_version": version,
        "payload": payload,
        "checksum": _checksum(payload),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, indent=1)
        fh.write("\n")


def read_versioned_document(path, kind: str, supported_version: int) -> dict:
    """Read an envelope written by write_versioned_document, verifying
    kind, version and checksum; returns the payload."""
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: truncated or malformed document: {exc}") from exc
    if not isinstance(doc, dict) or "payload" not in doc:
        raise InputError(f"{path}: not a recognized document")
    if doc.get("kind") != kind:
        raise InputError(f"{path}: expected a {kind} document, found {doc.get('kind')!r}")
    version = doc.get("format_version")
    if version != supported_version:
        raise VersionError(
            f"{path}: format version {version} not supported (expected {supported_version})")
    if _checksum(doc["payload"]) != doc.get("checksum"):
        raise ChecksumError(f"{path}: payload checksum mismatch")
    return doc["payload"]


def save_preprocessing(path, codec: FeatureCodec, stats: StandardizationStats):
    """Persist encodings and standardization statistics together."""
    payload = {"codec": codec.to_dict(), "stats": stats.to_dict()}
    write_versioned_document(path, "retention-preprocessing",
                             PREPROCESSING_FORMAT_VERSION, payload)


def load_preprocessing(path) -> tuple[FeatureCodec, StandardizationStats]:
    payload = read_versioned_document(path, "retention-preprocessing",
                                      PREPROCESSING_FORMAT_VERSION)
    return (FeatureCodec.from_dict(payload["codec"]),
            StandardizationStats.from_dict(payload["stats"]))
