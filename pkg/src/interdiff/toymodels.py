"""Individual-learning toy models run over every subset of a small belief set.

Two adoption rules are compared on a population holding each of the ``2**n``
belief combinations exactly once:

* an influence-matrix rule, where each held belief votes for (+1) or against
  (-1) every candidate and a candidate is adopted on a positive majority;
* the triangle rule, where beliefs are the edges of a knowledge graph and an
  edge is adopted when it would close a triangle.

Neither model has social influence or randomness; agents iterate to their own
fixed point.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np


@dataclass(frozen=True)
class ToyResult:
    initial: np.ndarray       # (agents, beliefs) bool
    final: np.ndarray         # (agents, beliefs) bool
    n_groups: int
    new_adoptions: np.ndarray  # per belief
    rounds: int


def all_subsets(n_beliefs: int) -> np.ndarray:
    """One row per subset; row k holds belief i iff bit i of k is set."""
    k = np.arange(2 ** n_beliefs)[:, None]
    return ((k >> np.arange(n_beliefs)) & 1).astype(np.bool_)


def random_logic(n_beliefs: int, rng: np.random.Generator) -> np.ndarray:
    """Random +/-1 influence matrix; entry [candidate, held]. The diagonal is unused and set to 0."""
    logic = rng.choice(np.array([-1, 1]), size=(n_beliefs, n_beliefs))
    np.fill_diagonal(logic, 0)
    return logic


def _summarise(initial: np.ndarray, final: np.ndarray, rounds: int) -> ToyResult:
    n_groups = len({row.tobytes() for row in final})
    new = (final & ~initial).sum(axis=0)
    return ToyResult(initial, final, n_groups, new, rounds)


def influence_matrix_converge(logic: np.ndarray, population: np.ndarray | None = None,
                              tie_adopts: bool = False) -> ToyResult:
    """Iterate the majority-vote rule to its fixed point.

    Each round every agent scores every non-held candidate by summing the
    signs ``logic[candidate, held]`` over its held beliefs (as of the start of
    the round) and adopts candidates with a positive sum. With ``tie_adopts``
    a zero sum also adopts, provided the agent holds at least one belief.
    """
    logic = np.asarray(logic)
    n = logic.shape[0]
    if logic.shape != (n, n):
        raise ValueError("logic must be square")
    off = ~np.eye(n, dtype=np.bool_)
    if not np.isin(logic[off], (-1, 1)).all():
        raise ValueError("off-diagonal logic entries must be +1 or -1")
    signs = np.where(off, logic, 0)
    held = all_subsets(n) if population is None else np.array(population, dtype=np.bool_)
    if held.shape[1] != n:
        raise ValueError("population and logic disagree on the number of beliefs")
    initial = held.copy()
    rounds = 0
    while True:
        votes = held.astype(np.int64) @ signs.T
        if tie_adopts:
            adopt = ~held & (votes >= 0) & held.any(axis=1, keepdims=True)
        else:
            adopt = ~held & (votes > 0)
        if not adopt.any():
            break
        held = held | adopt
        rounds += 1
    return _summarise(initial, held, rounds)


def knowledge_graph_beliefs(n_concepts: int) -> list[tuple[int, int]]:
    return list(combinations(range(n_concepts), 2))


def triangle_rule_converge(n_concepts: int = 4) -> ToyResult:
    """Iterate triangle closure for every subset of the complete graph's edges."""
    beliefs = knowledge_graph_beliefs(n_concepts)
    lo = np.array([b[0] for b in beliefs])
    hi = np.array([b[1] for b in beliefs])
    held = all_subsets(len(beliefs))
    initial = held.copy()
    n_agents = held.shape[0]
    rounds = 0
    while True:
        adj = np.zeros((n_agents, n_concepts, n_concepts), dtype=np.bool_)
        adj[:, lo, hi] = held
        adj[:, hi, lo] = held
        # a non-held edge whose endpoints share a neighbour sits at distance exactly 2
        closes = (adj[:, lo, :] & adj[:, hi, :]).any(axis=2)
        adopt = ~held & closes
        if not adopt.any():
            break
        held = held | adopt
        rounds += 1
    return _summarise(initial, held, rounds)


def format_report(name: str, result: ToyResult, labels: list[str], show_subsets: bool = False) -> str:
    lines = [f"{name}: {result.n_groups} stable groups after {result.rounds} rounds"]
    width = max(len(s) for s in labels)
    top = max(1, int(result.new_adoptions.max()))
    for label, count in zip(labels, result.new_adoptions):
        bar = "#" * int(round(40 * count / top))
        lines.append(f"  {label:>{width}} {int(count):4d} {bar}")
    if show_subsets:
        for k, (a, b) in enumerate(zip(result.initial, result.final)):
            start = "".join(l for l, h in zip(labels, a) if h) or "-"
            end = "".join(l for l, h in zip(labels, b) if h) or "-"
            lines.append(f"  agent {k:2d}: {start} -> {end}")
    return "\n".join(lines)
