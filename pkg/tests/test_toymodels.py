import itertools

import numpy as np
import pytest

from interdiff.toymodels import (
    all_subsets,
    format_report,
    influence_matrix_converge,
    knowledge_graph_beliefs,
    random_logic,
    triangle_rule_converge,
)


def closure_oracle(edges, n_concepts):
    """Triangle closure by union-find: every connected component with an edge becomes a clique."""
    parent = list(range(n_concepts))

    def find(x):
        while parent[x] != x:
            x = parent[x]
        return x

    for a, b in edges:
        parent[find(a)] = find(b)
    touched = {v for e in edges for v in e}
    return {(a, b) for a, b in itertools.combinations(range(n_concepts), 2)
            if a in touched and b in touched and find(a) == find(b)}


def sequential_triangle(edges, n_concepts):
    """One edge at a time, scanning concept triples; independent of the vectorised rounds."""
    held = set(edges)
    changed = True
    while changed:
        changed = False
        for a, b, c in itertools.permutations(range(n_concepts), 3):
            e1, e2, new = tuple(sorted((a, b))), tuple(sorted((b, c))), tuple(sorted((a, c)))
            if e1 in held and e2 in held and new not in held:
                held.add(new)
                changed = True
    return held


def as_sets(rows, labels):
    return [{labels[i] for i in np.flatnonzero(r)} for r in rows]


def test_all_subsets_is_complete():
    subs = all_subsets(6)
    assert subs.shape == (64, 6)
    assert len({r.tobytes() for r in subs}) == 64


def test_random_logic_entries(rng):
    logic = random_logic(6, rng)
    off = ~np.eye(6, dtype=bool)
    assert set(np.unique(logic[off])) <= {-1, 1}
    assert (np.diag(logic) == 0).all()


def test_empty_and_full_agents_are_fixed(rng):
    logic = random_logic(6, rng)
    res = influence_matrix_converge(logic)
    assert not res.final[0].any()
    assert res.final[-1].all()


def test_all_positive_logic_two_groups():
    logic = np.ones((6, 6), dtype=int)
    res = influence_matrix_converge(logic)
    assert res.n_groups == 2
    assert res.final[1:].all()
    # every belief is newly adopted by each non-empty agent that lacked it
    assert res.new_adoptions.tolist() == [31] * 6


def test_logic_validation():
    with pytest.raises(ValueError):
        influence_matrix_converge(np.zeros((3, 3), dtype=int))
    with pytest.raises(ValueError):
        influence_matrix_converge(np.ones((3, 3)), population=np.ones((2, 4), dtype=bool))


def test_tie_rule():
    # belief 0 supports 1, belief 2 opposes it; holding {0, 2} gives a zero vote for belief 1
    logic = np.array([[0, -1, -1], [1, 0, -1], [-1, -1, 0]])
    pop = np.array([[1, 0, 1]], dtype=bool)
    assert not influence_matrix_converge(logic, pop).final[0, 1]
    assert influence_matrix_converge(logic, pop, tie_adopts=True).final[0, 1]
    empty = np.zeros((1, 3), dtype=bool)
    assert not influence_matrix_converge(logic, empty, tie_adopts=True).final.any()


@pytest.mark.parametrize("seed", range(20))
def test_influence_fixed_point_monotone_and_bounded(seed):
    logic = random_logic(6, np.random.default_rng(seed))
    res = influence_matrix_converge(logic)
    assert (res.final >= res.initial).all()
    assert res.rounds <= 6
    again = influence_matrix_converge(logic, res.final)
    assert np.array_equal(again.final, res.final) and again.rounds == 0


@pytest.mark.parametrize("seed", range(10))
def test_influence_equivariance(seed):
    rng = np.random.default_rng(seed)
    logic = random_logic(6, rng)
    perm = rng.permutation(6)
    pop = all_subsets(6)
    base = influence_matrix_converge(logic, pop)
    moved = influence_matrix_converge(logic[np.ix_(perm, perm)], pop[:, perm])
    assert np.array_equal(moved.final, base.final[:, perm])
    assert np.array_equal(moved.new_adoptions, base.new_adoptions[perm])
    assert moved.n_groups == base.n_groups


def test_triangle_closes_the_path():
    labels = knowledge_graph_beliefs(4)
    res = triangle_rule_converge(4)
    start = {labels.index((0, 1)), labels.index((1, 2))}
    k = sum(1 << i for i in start)
    assert as_sets(res.final[k:k + 1], labels)[0] == {(0, 1), (1, 2), (0, 2)}


def test_triangle_matches_independent_enumerators():
    labels = knowledge_graph_beliefs(4)
    res = triangle_rule_converge(4)
    finals = as_sets(res.final, labels)
    for row, got in zip(all_subsets(6), finals):
        start = {labels[i] for i in np.flatnonzero(row)}
        assert got == closure_oracle(start, 4) == sequential_triangle(start, 4)
    groups = {frozenset(closure_oracle({labels[i] for i in np.flatnonzero(r)}, 4)) for r in all_subsets(6)}
    assert res.n_groups == len(groups) == 15


def test_triangle_new_adoptions_uniform():
    res = triangle_rule_converge(4)
    assert res.new_adoptions.tolist() == [16] * 6
    assert res.rounds <= 6


def test_triangle_label_permutation_invariance():
    labels = knowledge_graph_beliefs(4)
    res = triangle_rule_converge(4)
    finals = {frozenset(s) for s in as_sets(res.final, labels)}
    for perm in itertools.permutations(range(4)):
        moved = {frozenset(tuple(sorted((perm[a], perm[b]))) for a, b in s) for s in finals}
        assert moved == finals


def test_format_report_lists_every_belief():
    res = triangle_rule_converge(4)
    text = format_report("tri", res, ["PQ", "PR", "PS", "QR", "QS", "RS"], show_subsets=True)
    lines = text.splitlines()
    assert lines[0].startswith("tri: 15 stable groups")
    assert len(lines) == 1 + 6 + 64
