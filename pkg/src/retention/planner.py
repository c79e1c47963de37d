"""Sarsa planner: learns which intervention to apply at each stay-probability
level, then rolls the greedy policy out into a concrete plan.

The state is the employee's stay probability discretized into fixed-width
bins; actions are the catalog's meta-actions; the transition applies an
action to the feature vector and re-scores it with the model; the per-step
reward is the resulting change in probability. Episodes always restart from
the employee's original feature vector. Bins at or beyond the target are
terminal and contribute zero future value.

The model argument everywhere is anything with a
``stay_probability(features) -> float`` method.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .actions import EmployeeAgent, MetaAction, apply_action
from .dataset import read_versioned_document, write_versioned_document
from .errors import NumericError, SchemaError

QTABLE_FORMAT_VERSION = 1


def discretize(state: float, bin_width: float) -> int:
    """Map a probability to its bin index: floor(S / width), with S = 1.0
    clamped into the last bin."""
    if not 0.0 <= state <= 1.0:
        raise NumericError(f"state {state} outside [0, 1]")
    n_bins = math.ceil(1.0 / bin_width)
    return min(int(state / bin_width), n_bins - 1)


@dataclass
class QTable:
    """Discretized-state x action value table.

    Rows with index >= target_bin are terminal: they are never updated and
    read as zero future value.
    """

    values: np.ndarray
    bin_width: float
    action_names: tuple[str, ...]
    target_bin: int

    def __post_init__(self):
        n_bins = math.ceil(1.0 / self.bin_width)
        if self.values.shape != (n_bins, len(self.action_names)):
            raise SchemaError(f"Q-table shape {self.values.shape} does not match "
                              f"{n_bins} bins x {len(self.action_names)} actions")
        if not np.isfinite(self.values).all():
            raise NumericError("non-finite Q values")

    @property
    def n_bins(self) -> int:
        return self.values.shape[0]

    @property
    def n_actions(self) -> int:
        return self.values.shape[1]

    @classmethod
    def zeros(cls, bin_width: float, action_names: tuple[str, ...],
              target_bin: int) -> "QTable":
        n_bins = math.ceil(1.0 / bin_width)
        return cls(values=np.zeros((n_bins, len(action_names))),
                   bin_width=bin_width, action_names=tuple(action_names),
                   target_bin=target_bin)


@dataclass(frozen=True)
class PlannerConfig:
    alpha: float = 0.1
    gamma: float = 0.1
    epsilon: float = 1.0
    epsilon_end: float = 0.01
    episodes: int = 300
    bin_width: float = 0.01
    max_steps_per_episode: int = 200
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise SchemaError(f"alpha must be in (0,1], got {self.alpha}")
        if not 0.0 <= self.gamma <= 1.0:
            raise SchemaError(f"gamma must be in [0,1], got {self.gamma}")
        if not 0.0 <= self.epsilon <= 1.0 or not 0.0 <= self.epsilon_end <= 1.0:
            raise SchemaError("epsilon values must be in [0,1]")
        if self.episodes < 1:
            raise SchemaError(f"episodes must be >= 1, got {self.episodes}")
        if not 0.0 < self.bin_width <= 1.0:
            raise SchemaError(f"bin_width must be in (0,1], got {self.bin_width}")
        if self.max_steps_per_episode < 1:
            raise SchemaError("max_steps_per_episode must be >= 1")

    def epsilon_at(self, episode: int) -> float:
        """Linear decay from epsilon to epsilon_end across the episode range."""
        if self.episodes <= 1:
            return self.epsilon
        frac = episode / (self.episodes - 1)
        return self.epsilon + (self.epsilon_end - self.epsilon) * frac


@dataclass(frozen=True)
class Plan:
    """An ordered action sequence with its per-step state trajectory."""

    actions: tuple[str, ...]
    trajectory: tuple[tuple[float, float], ...]  # (state before, state after)
    total_cost: float
    reached: bool

    def __post_init__(self):
        if len(self.actions) != len(self.trajectory):
            raise SchemaError("trajectory length must equal action count")
        for (_, after), (before, _) in zip(self.trajectory, self.trajectory[1:]):
            if after != before:
                raise SchemaError("trajectory states do not chain")

    def __len__(self) -> int:
        return len(self.actions)


@dataclass(frozen=True)
class EpisodeRecord:
    """One line of the training log."""

    episode: int
    steps: int
    final_state: float


def step(model, features: np.ndarray, action: MetaAction) -> tuple[float, np.ndarray]:
    """Apply one meta-action and re-score: returns (next state, new features)."""
    new_features = apply_action(features, action)
    return model.stay_probability(new_features), new_features


def q_update(q: QTable, s_bin: int, a: int, reward: float, s_next_bin: int,
             a_next: int, alpha: float, gamma: float) -> float:
    """Sarsa update of one cell:
    Q(S,A) += alpha * (R + gamma * Q(S',A') - Q(S,A)).

    Terminal next bins (>= target_bin) contribute zero future value. Returns
    the updated cell value.
    """
    if not (0 <= s_bin < q.n_bins and 0 <= a < q.n_actions):
        raise SchemaError(f"Q index ({s_bin}, {a}) out of range")
    if s_next_bin >= q.target_bin:
        next_value = 0.0
    else:
        if not (0 <= s_next_bin < q.n_bins and 0 <= a_next < q.n_actions):
            raise SchemaError(f"Q index ({s_next_bin}, {a_next}) out of range")
        next_value = q.values[s_next_bin, a_next]
    current = q.values[s_bin, a]
    updated = current + alpha * (reward + gamma * next_value - current)
    if not math.isfinite(updated):
        raise NumericError(f"Q({s_bin},{a}) became non-finite: {updated}")
    q.values[s_bin, a] = updated
    return float(updated)


def choose_action(q: QTable, s_bin: int, epsilon: float,
                  rng: np.random.Generator | None = None) -> int:
    """Epsilon-greedy pick from one Q row; ties go to the lowest index.

    The rng is only consulted (and only required) when epsilon > 0, so a
    pure-greedy call is deterministic without one.
    """
    if not 0 <= s_bin < q.n_bins:
        raise SchemaError(f"bin {s_bin} out of range")
    if epsilon > 0:
        if rng is None:
            raise SchemaError("epsilon > 0 requires an rng")
        if rng.random() < epsilon:
            return int(rng.integers(q.n_actions))
    return int(np.argmax(q.values[s_bin]))


def train_planner(model, agent: EmployeeAgent, s_end: float,
                  config: PlannerConfig = PlannerConfig()
                  ) -> tuple[QTable, list[EpisodeRecord]]:
    """Run Sarsa episodes until the configured count and return the learned
    Q-table plus a per-episode log.

    Each episode restarts from the agent's original feature vector and state.
    Within an episode feature mutations accumulate. An episode ends when the
    state reaches the target bin or after max_steps_per_episode transitions.
    """
    if not agent.actions:
        raise SchemaError("agent has no actions to plan with")
    if not agent.state < s_end <= 1.0:
        raise SchemaError(f"need state < target <= 1, got state={agent.state}, "
                          f"target={s_end}")
    target_bin = discretize(s_end, config.bin_width)
    q = QTable.zeros(config.bin_width, tuple(a.name for a in agent.actions), target_bin)
    rng = np.random.default_rng(config.seed)
    log = []

    for episode in range(config.episodes):
        eps = config.epsilon_at(episode)
        features = agent.features.copy()
        state = agent.state
        s_bin = discretize(state, config.bin_width)
        steps = 0
        if s_bin >= target_bin:
            log.append(EpisodeRecord(episode, 0, state))
            continue
        a = choose_action(q, s_bin, eps, rng)
        while True:
            next_state, features = step(model, features, agent.actions[a])
            reward = next_state - state
            next_bin = discretize(next_state, config.bin_width)
            steps += 1
            if next_bin >= target_bin:
                q_update(q, s_bin, a, reward, next_bin, 0, config.alpha, config.gamma)
                state = next_state
                break
            a_next = choose_action(q, next_bin, eps, rng)
            q_update(q, s_bin, a, reward, next_bin, a_next, config.alpha, config.gamma)
            state, s_bin, a = next_state, next_bin, a_next
            if steps >= config.max_steps_per_episode:
                break
        log.append(EpisodeRecord(episode, steps, state))
    return q, log


def extract_plan(model, agent: EmployeeAgent, s_end: float, q: QTable,
                 max_steps: int = 200) -> Plan:
    """Greedy rollout of the learned policy from the agent's original state.

    Stops as soon as the target bin is reached (reached=True) or after
    max_steps actions (reached=False, the target may be unreachable).
    """
    target_bin = discretize(s_end, q.bin_width)
    features = agent.features.copy()
    state = agent.state
    names: list[str] = []
    trajectory: list[tuple[float, float]] = []
    while discretize(state, q.bin_width) < target_bin and len(names) < max_steps:
        a = choose_action(q, discretize(state, q.bin_width), 0.0)
        next_state, features = step(model, features, agent.actions[a])
        trajectory.append((state, next_state))
        names.append(agent.actions[a].name)
        state = next_state
    return Plan(
        actions=tuple(names),
        trajectory=tuple(trajectory),
        total_cost=agent.meta_cost * len(names),
        reached=discretize(state, q.bin_width) >= target_bin,
    )


def save_qtable(q: QTable, path):
    payload = {
        "bin_width": q.bin_width,
        "target_bin": q.target_bin,
        "action_names": list(q.action_names),
        "values": q.values.tolist(),
    }
    write_versioned_document(path, "retention-qtable", QTABLE_FORMAT_VERSION, payload)


def load_qtable(path) -> QTable:
    payload = read_versioned_document(path, "retention-qtable", QTABLE_FORMAT_VERSION)
    return QTable(
        values=np.array(payload["values"], dtype=float),
        bin_width=payload["bin_width"],
        action_names=tuple(payload["action_names"]),
        target_bin=payload["target_bin"],
    )
