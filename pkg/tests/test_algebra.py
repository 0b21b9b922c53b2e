import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from czreach.algebra import (
    add_exact,
    affine_cpmz,
    cartesian_exact,
    hadamard_compacted,
    hadamard_exact,
    intersect_cpmz,
    map_linear,
    merge_id,
    mul_cpmz_cpz,
    pow_compacted,
    pow_exact,
    project,
    reduce,
)
from czreach.errors import IndexOutOfRange, ShapeMismatch
from czreach.factors import FactorAssignment, fresh_ids
from czreach.oracle import membership_bruteforce, min_residual_grid
from czreach.sets import (
    MatrixZonotope,
    Zonotope,
    compact,
    constraint_residual,
    eval_matrix,
    eval_point,
    eval_point_many,
    eval_point_values,
    interval_hull,
    lift,
    new_cpmz,
    new_cpz,
    singleton,
)

from conftest import random_unconstrained_cpz


def interval_1d(lo: float, hi: float):
    """Lifted 1-D zonotope [lo, hi] with a fresh factor."""
    return lift(Zonotope([(lo + hi) / 2.0], [[(hi - lo) / 2.0]]))


def sampled_range(S, samples=20001):
    """Dense-sampling oracle for the range of a 1-D unconstrained set."""
    assert S.dim == 1 and S.num_constraints == 0
    grids = np.linspace(-1.0, 1.0, max(3, int(round(samples ** (1.0 / max(1, S.num_factors))))))
    mesh = np.meshgrid(*([grids] * S.num_factors), indexing="ij")
    V = np.stack([m.reshape(-1) for m in mesh]) if S.num_factors else np.zeros((0, 1))
    pts = eval_point_many(S, V)
    return float(pts.min()), float(pts.max())


# ---------------------------------------------------------------------------
# identifier merge


def test_merge_reproduces_worked_pair(instance_a, instance_b):
    pair = merge_id(instance_a, instance_b)
    assert pair.shared_id == (1, 2, 3)
    np.testing.assert_array_equal(pair.first.E, [[4, 1], [0, 2], [0, 0]])
    np.testing.assert_array_equal(pair.first.R, [[4, 2], [0, 2], [0, 0]])
    np.testing.assert_array_equal(pair.second.E, [[3, 2], [0, 0], [3, 0]])
    np.testing.assert_array_equal(pair.second.R, [[2, 0], [0, 0], [2, 3]])


def test_merge_same_ids_is_identity(instance_a):
    pair = merge_id(instance_a, instance_a)
    assert pair.first == instance_a
    assert pair.second == instance_a


def test_merge_disjoint_ids_counts():
    rng = np.random.default_rng(0)
    s1 = random_unconstrained_cpz(rng, 2, 3, p=2)
    s2 = random_unconstrained_cpz(rng, 2, 4, p=3)
    pair = merge_id(s1, s2)
    assert len(pair.shared_id) == 5
    assert pair.first.E.shape == (5, 3)
    assert pair.second.E.shape == (5, 4)
    # rows for foreign factors are zero
    foreign_rows = [pair.shared_id.index(i) for i in s2.ids]
    mask = np.ones(5, dtype=bool)
    mask[foreign_rows] = False
    assert not pair.second.E[mask].any()


@given(st.integers(0, 10_000))
@settings(max_examples=40, deadline=None)
def test_merge_preserves_evaluation(seed):
    rng = np.random.default_rng(seed)
    shared = fresh_ids(2)
    s1 = new_cpz(rng.normal(size=2), rng.normal(size=(2, 3)), rng.integers(0, 3, (3, 3)), ids=shared + fresh_ids(1))
    s2 = new_cpz(rng.normal(size=2), rng.normal(size=(2, 2)), rng.integers(0, 3, (3, 2)), ids=shared + fresh_ids(1))
    pair = merge_id(s1, s2)
    sigma = {fid: rng.uniform(-1, 1) for fid in pair.shared_id}
    for original, merged in ((s1, pair.first), (s2, pair.second)):
        a = eval_point(original, FactorAssignment({f: sigma[f] for f in original.ids}))
        b = eval_point(merged, FactorAssignment(sigma))
        np.testing.assert_allclose(a, b, atol=1e-12)


# ---------------------------------------------------------------------------
# matrix-set times vector-set product


def test_mul_deterministic_matrix_collapses_to_linear_map():
    rng = np.random.default_rng(1)
    M = rng.normal(size=(5, 6))
    Y = lift(MatrixZonotope(M, np.zeros((0, 5, 6))))
    P = random_unconstrained_cpz(rng, 6, 4)
    out = mul_cpmz_cpz(Y, P)
    np.testing.assert_allclose(out.c, M @ P.c)
    np.testing.assert_allclose(out.G, M @ P.G)
    assert out.num_generators == P.num_generators
    assert out.num_constraint_terms == P.num_constraint_terms


def test_mul_scalar_interval_product_blocks_and_range():
    Y = lift(MatrixZonotope(np.array([[2.0]]), np.array([[[1.0]]])))  # [1, 3]
    P = interval_1d(-1.0, 1.0)
    out = mul_cpmz_cpz(Y, P)
    np.testing.assert_allclose(np.sort(out.G.reshape(-1)), [0.0, 1.0, 2.0])
    cols = {tuple(col) for col in out.E.T}
    assert cols == {(1, 0), (0, 1), (1, 1)}
    lo, hi = sampled_range(out, samples=300**2)
    assert lo == pytest.approx(-3.0, abs=1e-2)
    assert hi == pytest.approx(3.0, abs=1e-2)
    # interval oracle: [1,3] * [-1,1] = [-3,3]
    assert min(1 * -1, 1 * 1, 3 * -1, 3 * 1) == -3
    assert max(1 * -1, 1 * 1, 3 * -1, 3 * 1) == 3


def test_mul_pointwise_identity_random():
    rng = np.random.default_rng(2)
    for _ in range(100):
        ids = fresh_ids(2)
        g = int(rng.integers(0, 4))
        Y = new_cpmz(rng.normal(size=(2, 3)), rng.normal(size=(g, 2, 3)), rng.integers(0, 3, (2, g)), ids=ids)
        P = random_unconstrained_cpz(rng, 3, 3)
        out = mul_cpmz_cpz(Y, P)
        sigma = {fid: rng.uniform(-1, 1) for fid in out.ids}
        lhs = eval_point(out, FactorAssignment(sigma))
        rhs = eval_matrix(Y, FactorAssignment({f: sigma[f] for f in Y.ids})) @ eval_point(
            P, FactorAssignment({f: sigma[f] for f in P.ids})
        )
        np.testing.assert_allclose(lhs, rhs, atol=1e-10)


def test_mul_shape_mismatch():
    Y = lift(MatrixZonotope(np.zeros((2, 3)), np.zeros((0, 2, 3))))
    with pytest.raises(ShapeMismatch):
        mul_cpmz_cpz(Y, singleton([1.0, 2.0]))


# ---------------------------------------------------------------------------
# addition


def test_add_zero_singleton_is_identity():
    rng = np.random.default_rng(3)
    P = random_unconstrained_cpz(rng, 3, 4)
    out = add_exact(P, singleton(np.zeros(3)))
    for _ in range(20):
        vals = rng.uniform(-1, 1, 4)
        np.testing.assert_allclose(eval_point_values(out, vals), eval_point_values(P, vals), atol=1e-14)


def test_add_with_shared_negation_cancels():
    rng = np.random.default_rng(4)
    P = random_unconstrained_cpz(rng, 3, 4)
    negated = new_cpz(-P.c, -P.G, P.E, ids=P.ids)
    out = add_exact(P, negated)
    for _ in range(20):
        vals = rng.uniform(-1, 1, 4)
        np.testing.assert_allclose(eval_point_values(out, vals), np.zeros(3), atol=1e-14)


def test_add_independent_intervals():
    out = add_exact(interval_1d(-1, 1), interval_1d(-2, 2))
    assert out.num_generators == 2
    lo, hi = sampled_range(out, samples=301**2)
    assert lo == pytest.approx(-3.0, abs=1e-2)
    assert hi == pytest.approx(3.0, abs=1e-2)


# ---------------------------------------------------------------------------
# Cartesian product


def test_cartesian_independent_unit_square():
    out = cartesian_exact(interval_1d(-1, 1), interval_1d(-1, 1))
    assert out.dim == 2 and out.num_generators == 2
    rng = np.random.default_rng(5)
    V = rng.uniform(-1, 1, (2, 400))
    pts = eval_point_many(out, V)
    assert np.abs(pts).max() <= 1.0 + 1e-12
    assert pts[0].max() > 0.9 and pts[1].min() < -0.9


def test_cartesian_shared_ids_is_diagonal():
    rng = np.random.default_rng(6)
    P = random_unconstrained_cpz(rng, 1, 3)
    out = cartesian_exact(P, P)
    for _ in range(20):
        vals = rng.uniform(-1, 1, 3)
        v = eval_point_values(out, vals)
        assert v[0] == pytest.approx(v[1], abs=1e-14)


def test_cartesian_stacks_fresh_input_set():
    rng = np.random.default_rng(7)
    R = random_unconstrained_cpz(rng, 5, 5)
    U = lift(Zonotope([10.0], [[0.25]]))
    out = cartesian_exact(R, U)
    assert out.dim == 6
    assert out.num_generators == 6
    assert len(out.ids) == 6


# ---------------------------------------------------------------------------
# elementwise product and powers


def test_hadamard_with_ones_is_identity():
    rng = np.random.default_rng(8)
    P = random_unconstrained_cpz(rng, 3, 4)
    out = hadamard_exact(singleton(np.ones(3)), P)
    for _ in range(20):
        vals = rng.uniform(-1, 1, 4)
        np.testing.assert_allclose(eval_point_values(out, vals), eval_point_values(P, vals), atol=1e-14)


def test_hadamard_shared_square_is_nonnegative():
    P = interval_1d(-1, 1)
    out = hadamard_exact(P, P)
    lo, hi = sampled_range(out, samples=4001)
    assert lo == pytest.approx(0.0, abs=1e-6)
    assert hi == pytest.approx(1.0, abs=1e-3)


def test_hadamard_disjoint_product_range():
    out = hadamard_exact(interval_1d(-1, 1), interval_1d(-1, 1))
    lo, hi = sampled_range(out, samples=301**2)
    assert lo == pytest.approx(-1.0, abs=1e-2)
    assert hi == pytest.approx(1.0, abs=1e-2)


def test_pow_zero_gives_ones():
    rng = np.random.default_rng(9)
    P = random_unconstrained_cpz(rng, 3, 4)
    out = pow_exact(P, 0)
    np.testing.assert_allclose(out.c, np.ones(3))
    assert out.num_generators == 0


def test_pow_one_is_pointwise_identity():
    rng = np.random.default_rng(10)
    P = random_unconstrained_cpz(rng, 2, 3)
    out = pow_exact(P, 1)
    vals = rng.uniform(-1, 1, 3)
    np.testing.assert_allclose(eval_point_values(out, vals), eval_point_values(P, vals))


def test_pow_square_and_cube_ranges():
    P = interval_1d(-1, 1)
    sq = pow_exact(P, 2)
    lo, hi = sampled_range(sq, samples=4001)
    assert lo == pytest.approx(0.0, abs=1e-6) and hi == pytest.approx(1.0, abs=1e-3)
    cube = pow_exact(P, 3)
    vals = np.array([0.5])
    assert eval_point_values(cube, vals) == pytest.approx([0.125])
    lo, hi = sampled_range(cube, samples=4001)
    assert lo == pytest.approx(-1.0, abs=1e-3) and hi == pytest.approx(1.0, abs=1e-3)


# ---------------------------------------------------------------------------
# projection and linear maps


def test_project_full_selection_is_identity(instance_a):
    out = project(instance_a, [0, 1, 2])
    assert out == instance_a


def test_project_row_slice(instance_a):
    out = project(instance_a, [1])
    np.testing.assert_allclose(out.c, [2.0])
    np.testing.assert_allclose(out.G, [[3.0, 2.0]])
    np.testing.assert_array_equal(out.E, instance_a.E)
    np.testing.assert_array_equal(out.R, instance_a.R)
    assert out.ids == instance_a.ids


def test_project_inverts_stacking():
    rng = np.random.default_rng(11)
    P = random_unconstrained_cpz(rng, 2, 3)
    Q = random_unconstrained_cpz(rng, 3, 2)
    stacked = cartesian_exact(P, Q)
    front = project(stacked, [0, 1])
    vals = {fid: rng.uniform(-1, 1) for fid in stacked.ids}
    a = eval_point(front, FactorAssignment(vals))
    b = eval_point(P, FactorAssignment({f: vals[f] for f in P.ids}))
    np.testing.assert_allclose(a, b, atol=1e-14)


def test_project_index_out_of_range(instance_a):
    with pytest.raises(IndexOutOfRange):
        project(instance_a, [3])
    with pytest.raises(IndexOutOfRange):
        project(instance_a, [0, 0])


def test_map_linear_identity_and_zero():
    rng = np.random.default_rng(12)
    P = random_unconstrained_cpz(rng, 3, 4)
    assert map_linear(np.eye(3), P) == P
    out = map_linear(np.zeros((2, 3)), P)
    V = rng.uniform(-1, 1, (4, 50))
    np.testing.assert_allclose(eval_point_many(out, V), 0.0, atol=1e-15)


def test_map_linear_sum_of_square_coordinates():
    square = cartesian_exact(interval_1d(-1, 1), interval_1d(-1, 1))
    out = map_linear(np.array([[1.0, 1.0]]), square)
    lo, hi = sampled_range(out, samples=301**2)
    assert lo == pytest.approx(-2.0, abs=1e-2)
    assert hi == pytest.approx(2.0, abs=1e-2)


# ---------------------------------------------------------------------------
# affine matrix-set map


def test_affine_cpmz_singleton_collapse():
    Y = new_cpmz(np.zeros((2, 3)))
    K = np.arange(6, dtype=float).reshape(2, 3)
    L = np.arange(12, dtype=float).reshape(3, 4)
    out = affine_cpmz(K, Y, L)
    np.testing.assert_allclose(out.C, K @ L)
    assert out.num_generators == 0


def test_affine_cpmz_negation():
    rng = np.random.default_rng(13)
    ids = fresh_ids(2)
    Y = new_cpmz(rng.normal(size=(2, 2)), rng.normal(size=(2, 2, 2)), np.eye(2, dtype=int), ids=ids)
    out = affine_cpmz(np.zeros((2, 2)), Y, np.eye(2))
    sig = FactorAssignment(dict(zip(ids, [0.3, -0.7])))
    np.testing.assert_allclose(eval_matrix(out, sig), -eval_matrix(Y, sig), atol=1e-14)


# ---------------------------------------------------------------------------
# intersection


def make_scalar_interval_mz(center, radius):
    return lift(MatrixZonotope(np.array([[float(center)]]), np.array([[[float(radius)]]])))


def test_intersect_interval_case():
    inter = intersect_cpmz(make_scalar_interval_mz(1, 1), make_scalar_interval_mz(2, 1))
    assert membership_bruteforce(inter, [1.0], tol=1e-6, resolution=201)
    assert membership_bruteforce(inter, [2.0], tol=1e-6, resolution=201)
    assert not membership_bruteforce(inter, [0.5], tol=1e-6, resolution=201)


def test_intersect_self_keeps_all_points():
    rng = np.random.default_rng(14)
    Y = lift(MatrixZonotope(rng.normal(size=(2, 2)), rng.normal(size=(2, 2, 2))))
    copy = lift(MatrixZonotope(Y.C, np.array(Y.G)))
    inter = intersect_cpmz(Y, copy)
    for _ in range(10):
        s1 = rng.uniform(-1, 1, 2)
        sig = FactorAssignment(dict(zip(inter.ids, np.concatenate([s1, s1]))))
        assert constraint_residual(inter, sig) <= 1e-9
        np.testing.assert_allclose(
            eval_matrix(inter, sig), eval_matrix(Y, FactorAssignment(dict(zip(Y.ids, s1)))), atol=1e-12
        )


def test_intersect_disjoint_intervals_infeasible():
    inter = intersect_cpmz(make_scalar_interval_mz(0.5, 0.5), make_scalar_interval_mz(2.5, 0.5))
    assert min_residual_grid(inter, resolution=201) > 0.1


def test_intersect_relabels_collisions():
    ids = fresh_ids(1)
    Y1 = new_cpmz(np.zeros((1, 1)), np.ones((1, 1, 1)), [[1]], ids=ids)
    Y2 = new_cpmz(np.ones((1, 1)), np.ones((1, 1, 1)), [[1]], ids=ids)
    inter = intersect_cpmz(Y1, Y2)
    assert len(inter.ids) == 2


# ---------------------------------------------------------------------------
# order reduction (the only over-approximation)


def test_reduce_noop_when_under_budget():
    rng = np.random.default_rng(15)
    P = random_unconstrained_cpz(rng, 2, 3)
    assert reduce(P, 3) == P


def test_reduce_scalar_example():
    z = lift(Zonotope([0.0], [[2.0, 0.1, 0.1]]))
    out = reduce(z, 2)
    assert out.num_generators == 2
    lo, hi = interval_hull(out)
    assert lo == pytest.approx([-2.2]) and hi == pytest.approx([2.2])


def test_reduce_requires_dimension_budget():
    z = lift(Zonotope([0.0, 0.0], [[1.0, 0.5], [0.0, 0.5]]))
    with pytest.raises(ValueError):
        reduce(z, 1)


def test_reduce_containment_by_sampling():
    rng = np.random.default_rng(16)
    P = random_unconstrained_cpz(rng, 3, 12)
    out = reduce(P, 6)
    assert out.num_generators <= 6
    lo, hi = interval_hull(out)
    V = rng.uniform(-1, 1, (P.num_factors, 10_000))
    pts = eval_point_many(P, V)
    assert (pts >= lo[:, None] - 1e-9).all() and (pts <= hi[:, None] + 1e-9).all()


def test_reduce_drops_constraints_of_removed_factors():
    # one factor appears only in small generators and in a constraint row;
    # reduction must relax that row away, never tighten
    ids = fresh_ids(3)
    P = new_cpz(
        np.zeros(1),
        [[5.0, 0.01, 4.0]],
        [[1, 0, 0], [0, 1, 0], [0, 0, 1]],
        [[1.0]],
        [0.5],
        [[0], [1], [0]],
        ids=ids,
    )
    out = reduce(P, 2)
    assert out.num_constraints == 0
    lo, hi = interval_hull(out)
    rng = np.random.default_rng(17)
    V = rng.uniform(-1, 1, (3, 2000))
    keep = np.abs(1.0 * V[1] - 0.5) <= 1e-9  # original constraint
    pts = eval_point_many(P, V)
    assert (pts[:, keep] >= lo[:, None] - 1e-9).all() and (pts[:, keep] <= hi[:, None] + 1e-9).all()


# ---------------------------------------------------------------------------
# compacted fast paths agree with literal operation + compaction


def test_hadamard_compacted_matches_literal():
    rng = np.random.default_rng(18)
    for _ in range(20):
        shared = fresh_ids(2)
        P1 = new_cpz(rng.normal(size=2), rng.normal(size=(2, 4)), rng.integers(0, 3, (3, 4)), ids=shared + fresh_ids(1))
        P2 = new_cpz(rng.normal(size=2), rng.normal(size=(2, 3)), rng.integers(0, 3, (3, 3)), ids=shared + fresh_ids(1))
        fast = hadamard_compacted(P1, P2, chunk_cols=5)  # force the chunked path
        literal = compact(hadamard_exact(P1, P2))
        assert fast == literal


def test_square_compacted_matches_literal():
    rng = np.random.default_rng(19)
    for _ in range(20):
        P = random_unconstrained_cpz(rng, 2, 5)
        fast = pow_compacted(P, 2, chunk_cols=7)
        literal = compact(pow_exact(P, 2))
        assert fast == literal


def test_pow_compacted_cube_matches_literal():
    rng = np.random.default_rng(20)
    P = random_unconstrained_cpz(rng, 1, 4)
    fast = pow_compacted(P, 3, chunk_cols=11)
    literal = compact(pow_exact(P, 3))
    vals = rng.uniform(-1, 1, (4, 100))
    np.testing.assert_allclose(eval_point_many(fast, vals), eval_point_many(literal, vals), atol=1e-12)


def test_intersect_random_interval_soundness():
    rng = np.random.default_rng(21)
    checked = 0
    while checked < 10:
        c1, r1 = rng.uniform(-2, 2), rng.uniform(0.3, 2.0)
        c2, r2 = c1 + rng.uniform(-r1, r1), rng.uniform(0.3, 2.0)
        lo = max(c1 - r1, c2 - r2)
        hi = min(c1 + r1, c2 + r2)
        if hi - lo < 0.05:
            continue
        checked += 1
        inter = intersect_cpmz(make_scalar_interval_mz(c1, r1), make_scalar_interval_mz(c2, r2))
        for v in np.linspace(lo, hi, 7):
            witness = np.clip([(v - c1) / r1, (v - c2) / r2], -1.0, 1.0)
            sig = FactorAssignment(dict(zip(inter.ids, witness)))
            assert constraint_residual(inter, sig) <= 1e-9
            np.testing.assert_allclose(eval_matrix(inter, sig), [[v]], atol=1e-12)
        for v in (lo - 0.02, hi + 0.02):
            assert not membership_bruteforce(inter, [v], tol=1e-6, resolution=201)
