"""Brute-force verification oracle for the Sarsa planner.

Breadth-first search over action sequences under the same deterministic
transition and the same bin-based success test the planner uses, so its
result is the provably shortest plan for small catalogs. Meant for
cross-checking, not production planning: the frontier grows as
catalog_size^depth.
"""

from __future__ import annotations

from collections import deque

import numpy as np

from .actions import EmployeeAgent
from .errors import UsageError
from .planner import Plan, discretize, step

SEARCH_BUDGET = 10_000_000
_QUANTUM = 1e-9


def _key(features: np.ndarray) -> tuple:
    # Transitions are deterministic arithmetic, so equal-after-quantization
    # vectors are intended equalities, not accidental collisions.
    return tuple(np.rint(features / _QUANTUM).astype(np.int64).tolist())


def bfs_shortest_plan(model, agent: EmployeeAgent, s_end: float, max_depth: int,
                      bin_width: float = 0.01, allow_large: bool = False,
                      prune: bool = True) -> Plan | None:
    """Shortest action sequence lifting the agent into the target bin.

    Explores in depth order, expanding actions in catalog order, so the
    first hit is the lexicographically smallest optimal sequence. Returns
    None when the target is unreachable within max_depth. Duplicate feature
    states are pruned (disable with prune=False for cross-checks only).

    Raises UsageError when catalog_size ** max_depth exceeds the search
    budget and allow_large is not set.
    """
    n_actions = len(agent.actions)
    if n_actions ** max_depth > SEARCH_BUDGET and not allow_large:
        raise UsageError(
            f"{n_actions} actions at depth {max_depth} may expand "
            f"{n_actions ** max_depth:.2e} nodes (budget {SEARCH_BUDGET:.0e}); "
            f"reduce max_depth or pass allow_large=True")

    target_bin = discretize(s_end, bin_width)

    def plan_from(path: list[int], states: list[float]) -> Plan:
        return Plan(
            actions=tuple(agent.actions[i].name for i in path),
            trajectory=tuple(zip(states[:-1], states[1:])),
            total_cost=agent.meta_cost * len(path),
            reached=True,
        )

    start = np.asarray(agent.features, dtype=float)
    if discretize(agent.state, bin_width) >= target_bin:
        return plan_from([], [agent.state])

    queue = deque([(start, [agent.state], [])])
    visited = {_key(start)}
    while queue:
        features, states, path = queue.popleft()
        if len(path) >= max_depth:
            continue
        for i in range(n_actions):
            next_state, next_features = step(model, features, agent.actions[i])
            if discretize(next_state, bin_width) >= target_bin:
                return plan_from(path + [i], states + [next_state])
            if prune:
                key = _key(next_features)
                if key in visited:
                    continue
                visited.add(key)
            queue.append((next_features, states + [next_state], path + [i]))
    return None
