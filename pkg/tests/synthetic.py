"""Hand-computable stand-in environments for planner and oracle tests.

These expose the same ``stay_probability(features)`` surface as a trained
model, but with transitions simple enough to verify by hand.
"""

import numpy as np

from retention import EmployeeAgent, MetaAction


class FirstFeatureStayModel:
    """Stay probability is feature 0, clipped into [0, 1]."""

    def stay_probability(self, features):
        return float(np.clip(features[0], 0.0, 1.0))


class AdditiveStayModel:
    """Stay probability is the sum of all features, clipped into [0, 1]."""

    def stay_probability(self, features):
        return float(np.clip(features.sum(), 0.0, 1.0))


def single_lift_agent(start=0.65, lift=0.06, n_null=2):
    """One action raises the state by exactly `lift`; `n_null` decoy actions
    touch other features the model ignores, so they add exactly 0."""
    actions = [MetaAction(name="lift", target_feature=0, delta=lift)]
    actions += [MetaAction(name=f"null{i}", target_feature=i + 1, delta=1.0)
                for i in range(n_null)]
    features = np.zeros(1 + n_null)
    features[0] = start
    return EmployeeAgent(features=features, state=start, meta_cost=1.0,
                         actions=tuple(actions)), FirstFeatureStayModel()


def monotone_instance(seed):
    """Random instance with <= 4 actions, each adding a fixed positive
    amount to the state (deterministic, monotone)."""
    rng = np.random.default_rng(seed)
    k = int(rng.integers(1, 5))
    deltas = rng.uniform(0.02, 0.10, k)
    start = float(rng.uniform(0.3, 0.6))
    target = min(0.99, start + float(rng.uniform(0.08, 0.25)))
    actions = tuple(MetaAction(name=f"a{i}", target_feature=i, delta=float(d))
                    for i, d in enumerate(deltas))
    features = np.zeros(k)
    features[0] = start
    agent = EmployeeAgent(features=features, state=start, meta_cost=1.0,
                          actions=actions)
    return AdditiveStayModel(), agent, target
