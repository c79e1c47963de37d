"""Employee agent model: meta-actions, the action catalog, feature updates.

A meta-action perturbs exactly one raw feature by a fixed signed delta, and
every action in a catalog costs the same flat amount of money per
application, so the cost of a plan is just its length times that meta-cost.
Deltas accumulate additively; optional per-action bounds clamp the target
feature (by default to the range seen in training data, so planned feature
vectors stay inside the envelope the model was fitted on).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import yaml

from .errors import InputError, SchemaError


@dataclass(frozen=True)
class MetaAction:
    """A named single-feature intervention with a fixed per-application delta."""

    name: str
    target_feature: int
    delta: float
    bounds: tuple[float, float] | None = None

    def __post_init__(self):
        if not math.isfinite(self.delta) or self.delta == 0:
            raise SchemaError(f"action {self.name!r}: delta must be finite and nonzero")
        if self.target_feature < 0:
            raise SchemaError(f"action {self.name!r}: negative feature index")
        if self.bounds is not None:
            lo, hi = self.bounds
            if not (math.isfinite(lo) and math.isfinite(hi) and lo <= hi):
                raise SchemaError(f"action {self.name!r}: invalid bounds {self.bounds}")


@dataclass(frozen=True)
class ActionCatalog:
    """A uniform-cost collection of meta-actions.

    Name uniqueness and index validity are checked by validate_catalog,
    which reports every violation at once instead of failing on the first.
    """

    meta_cost: float
    actions: tuple[MetaAction, ...]

    def __post_init__(self):
        if not self.actions:
            raise SchemaError("catalog has no actions")
        if self.meta_cost <= 0:
            raise SchemaError(f"meta_cost must be positive, got {self.meta_cost}")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(a.name for a in self.actions)

    def __len__(self) -> int:
        return len(self.actions)


@dataclass(frozen=True)
class EmployeeAgent:
    """An employee as the planner sees it: raw features, current
    stay probability, and the catalog of interventions available."""

    features: np.ndarray
    state: float
    meta_cost: float
    actions: tuple[MetaAction, ...]

    def __post_init__(self):
        object.__setattr__(self, "features", np.asarray(self.features, dtype=float))
        if not np.isfinite(self.features).all():
            raise SchemaError("agent features contain non-finite values")
        if not 0.0 <= self.state <= 1.0:
            raise SchemaError(f"agent state must be in [0,1], got {self.state}")
        if self.meta_cost <= 0:
            raise SchemaError(f"meta_cost must be positive, got {self.meta_cost}")

    @classmethod
    def from_catalog(cls, features, state: float, catalog: ActionCatalog) -> "EmployeeAgent":
        return cls(features=features, state=state,
                   meta_cost=catalog.meta_cost, actions=catalog.actions)


def apply_action(features: np.ndarray, action: MetaAction) -> np.ndarray:
    """Return a copy of *features* with the action's delta added to its
    target component, clamped into the action's bounds when declared.

    The input vector is never mutated.
    """
    features = np.asarray(features, dtype=float)
    if action.target_feature >= features.shape[0]:
        raise SchemaError(
            f"action {action.name!r} targets feature {action.target_feature}, "
            f"but the vector has {features.shape[0]} components")
    out = features.copy()
    value = out[action.target_feature] + action.delta
    if action.bounds is not None:
        lo, hi = action.bounds
        value = min(max(value, lo), hi)
    out[action.target_feature] = value
    return out


def validate_catalog(catalog: ActionCatalog, n_features: int) -> list[str]:
    """Collect every catalog violation against a feature space of the given
    width; an empty list means the catalog is usable."""
    violations = []
    if catalog.meta_cost <= 0:
        violations.append(f"meta_cost {catalog.meta_cost} is not positive")
    seen = set()
    for action in catalog.actions:
        if action.name in seen:
            violations.append(f"duplicate action name {action.name!r}")
        seen.add(action.name)
        if not (0 <= action.target_feature < n_features):
            violations.append(
                f"action {action.name!r}: feature index {action.target_feature} "
                f"outside [0, {n_features})")
        if not math.isfinite(action.delta) or action.delta == 0:
            violations.append(f"action {action.name!r}: bad delta {action.delta}")
        if action.bounds is not None and action.bounds[0] > action.bounds[1]:
            violations.append(f"action {action.name!r}: inverted bounds {action.bounds}")
    return violations


def load_catalog(path, feature_names: tuple[str, ...],
                 default_bounds: dict[str, tuple[float, float]] | None = None
                 ) -> ActionCatalog:
    """Load a catalog YAML document.

    Expected layout::

        meta_cost: 500
        actions:
          - name: Salary raise
            feature: PercentSalaryHike
            delta: 1.5
            bounds: [11, 25]      # optional

    ``feature`` names are resolved to indices via *feature_names*. Actions
    without explicit bounds fall back to *default_bounds* for their feature
    (typically the training-data min/max), or to no clamping at all.
    """
    try:
        with open(path) as fh:
            doc = yaml.safe_load(fh)
    except OSError as exc:
        raise InputError(f"cannot read catalog {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise SchemaError(f"malformed catalog {path}: {exc}") from exc
    if not isinstance(doc, dict) or "actions" not in doc or "meta_cost" not in doc:
        raise SchemaError(f"catalog {path} must define meta_cost and actions")

    index = {name: i for i, name in enumerate(feature_names)}
    actions = []
    for entry in doc["actions"]:
        try:
            name, feature, delta = entry["name"], entry["feature"], float(entry["delta"])
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"catalog {path}: bad action entry {entry!r}: {exc}") from exc
        if feature not in index:
            raise SchemaError(f"catalog {path}: action {name!r} targets unknown "
                              f"feature {feature!r}")
        if "bounds" in entry:
            lo, hi = entry["bounds"]
            bounds = (float(lo), float(hi))
        elif default_bounds and feature in default_bounds:
            bounds = default_bounds[feature]
        else:
            bounds = None
        actions.append(MetaAction(name=name, target_feature=index[feature],
                                  delta=delta, bounds=bounds))
    return ActionCatalog(meta_cost=float(doc["meta_cost"]), actions=tuple(actions))
