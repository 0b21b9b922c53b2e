import numpy as np
import pytest

from czreach import experiments as ex
from czreach.errors import DuplicateMonomial, RankDeficient, ShapeMismatch, TooShort
from czreach.factors import FactorAssignment
from czreach.learning import (
    DataBatch,
    Trajectory,
    build_batch,
    concat_noise,
    load_noise_sidecar_csv,
    load_trajectories_csv,
    model_set_lti,
    model_set_poly,
    monomial_basis,
    monomial_basis_custom,
    numerical_rank,
    refine,
    regressor_matrix,
    save_noise_sidecar_csv,
    save_trajectories_csv,
)
from czreach.oracle import membership_bruteforce
from czreach.sets import (
    MatrixZonotope,
    Zonotope,
    constraint_residual,
    eval_matrix,
    lift,
    singleton,
)


# ---------------------------------------------------------------------------
# batches


def test_build_batch_slices_one_trajectory():
    states = np.array([[0.0, 1.0, 2.0]])
    inputs = np.array([[5.0, 6.0]])
    batch = build_batch(Trajectory(states, inputs))
    assert batch.size == 2
    np.testing.assert_array_equal(batch.Xplus, [[1.0, 2.0]])
    np.testing.assert_array_equal(batch.Xminus, [[0.0, 1.0]])
    np.testing.assert_array_equal(batch.Uminus, [[5.0, 6.0]])


def test_build_batch_too_short():
    with pytest.raises(ShapeMismatch):
        Trajectory(np.array([[1.0]]), np.array([[1.0]]))
    with pytest.raises(TooShort):
        build_batch(Trajectory(np.array([[1.0]]), np.zeros((1, 0))))


def test_build_batch_concatenates_trajectories():
    rng = np.random.default_rng(0)
    trajs = [Trajectory(rng.normal(size=(2, 7)), rng.normal(size=(1, 6))) for _ in range(20)]
    batch = build_batch(trajs)
    assert batch.size == 120  # each length-7 state sequence contributes 6 transitions
    trajs8 = [Trajectory(rng.normal(size=(2, 8)), rng.normal(size=(1, 7))) for _ in range(20)]
    assert build_batch(trajs8).size == 140


# ---------------------------------------------------------------------------
# noise concatenation


def test_concat_noise_scalar_two_columns():
    Zw = lift(Zonotope([0.0], [[0.005]]))
    Mw = concat_noise(Zw, 2)
    assert Mw.shape == (1, 2)
    assert Mw.num_generators == 2
    mats = sorted(Mw.G.reshape(2, 2).tolist())
    assert mats == [[0.0, 0.005], [0.005, 0.0]]
    # independent columns: evaluations fill the square of radius 0.005
    corners = set()
    for a in (-1.0, 1.0):
        for b in (-1.0, 1.0):
            sig = FactorAssignment(dict(zip(Mw.ids, [a, b])))
            corners.add(tuple(np.round(eval_matrix(Mw, sig).reshape(-1) / 0.005)))
    assert corners == {(-1, -1), (-1, 1), (1, -1), (1, 1)}


def test_concat_noise_singleton_matrix():
    Mw = concat_noise(singleton([0.0, 0.0]), 4)
    assert Mw.num_generators == 0
    np.testing.assert_array_equal(Mw.C, np.zeros((2, 4)))


def test_concat_noise_generator_count_five_by_hundred():
    Zw = lift(Zonotope(np.zeros(5), 0.005 * np.eye(5)))
    Mw = concat_noise(Zw, 100)
    assert Mw.num_generators == 500
    assert Mw.num_factors == 500
    np.testing.assert_array_equal(Mw.C, np.zeros((5, 100)))


def test_concat_noise_carries_constraints_per_column():
    from czreach.sets import ConstrainedZonotope

    cz = lift(ConstrainedZonotope(np.zeros(1), np.array([[1.0, 1.0]]), np.array([[1.0, -1.0]]), np.array([0.5])))
    Mw = concat_noise(cz, 2)
    assert Mw.num_constraint_terms == 4
    assert Mw.constraint_shape == (1, 2)
    # per-column feasibility: a1 - a2 = 0.5 in each column independently
    vals = np.array([0.75, 0.25, -0.25, -0.75])
    sig = FactorAssignment(dict(zip(Mw.ids, vals)))
    assert constraint_residual(Mw, sig) == pytest.approx(0.0, abs=1e-12)


# ---------------------------------------------------------------------------
# linear model sets


def test_model_set_lti_noise_free_recovery():
    rng = np.random.default_rng(1)
    U = ex.lti_input_set()
    zero = singleton(np.zeros(5))
    data = ex.generate_lti_data(ex.PHI_5D, ex.GAMMA_5D, U, zero, transitions=8, rng=rng)
    model = model_set_lti(data.batch, concat_noise(zero, 8))
    truth = np.hstack([ex.PHI_5D, ex.GAMMA_5D])
    assert model.set.num_generators == 0
    np.testing.assert_allclose(model.set.C, truth, atol=1e-8)


def test_model_set_lti_noise_witness():
    rng = np.random.default_rng(2)
    U = ex.lti_input_set()
    Zw = ex.lti_noise_set(correlated=False)
    data = ex.generate_lti_data(ex.PHI_5D, ex.GAMMA_5D, U, Zw, transitions=20, rng=rng)
    model = model_set_lti(data.batch, concat_noise(Zw, 20))
    witness = ex.model_witness_assignment(model, {"batch0": data.noise_values})
    truth = np.hstack([ex.PHI_5D, ex.GAMMA_5D])
    np.testing.assert_allclose(eval_matrix(model.set, witness), truth, atol=1e-8)


def test_model_set_lti_rank_deficient():
    batch = DataBatch(np.zeros((5, 4)), np.zeros((5, 4)), np.zeros((1, 4)))
    with pytest.raises(RankDeficient):
        model_set_lti(batch, concat_noise(singleton(np.zeros(5)), 4))


def test_rank_invariant_to_column_permutation():
    rng = np.random.default_rng(3)
    D = rng.normal(size=(4, 9))
    perm = rng.permutation(9)
    assert numerical_rank(D) == numerical_rank(D[:, perm])


# ---------------------------------------------------------------------------
# monomial bases and regressors


def test_monomial_basis_graded_lex_order():
    basis = monomial_basis(2, 2)
    expected = [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]
    assert [tuple(v) for v in basis.exponents] == expected
    assert basis.size == 6


def test_monomial_basis_degree_zero():
    basis = monomial_basis(3, 0)
    assert basis.size == 1
    assert not basis.exponents.any()


def test_monomial_basis_custom_duplicate():
    with pytest.raises(DuplicateMonomial):
        monomial_basis_custom([[1, 0], [1, 0]])


def test_regressor_constant_basis():
    batch = DataBatch(np.ones((1, 3)), np.arange(3, dtype=float)[None, :], np.zeros((0, 3)))
    omega = regressor_matrix(batch, monomial_basis_custom([[0]]))
    np.testing.assert_array_equal(omega, [[1.0, 1.0, 1.0]])


def test_regressor_identity_monomial():
    states = np.array([[1.0, 2.0, 3.0]])
    batch = build_batch(Trajectory(states, np.zeros((0, 2))))
    omega = regressor_matrix(batch, monomial_basis_custom([[1]]))
    np.testing.assert_array_equal(omega, [[1.0, 2.0]])


def test_regressor_monomial_column():
    batch = DataBatch(np.ones((1, 1)), np.array([[2.0]]), np.zeros((0, 1)))
    omega = regressor_matrix(batch, monomial_basis_custom([[0], [1], [2]]))
    np.testing.assert_array_equal(omega[:, 0], [1.0, 2.0, 4.0])


def test_regressor_matches_scalar_evaluator():
    rng = np.random.default_rng(4)
    basis = monomial_basis(3, 2)
    batch = DataBatch(rng.normal(size=(2, 6)), rng.normal(size=(2, 6)), rng.normal(size=(1, 6)))
    omega = regressor_matrix(batch, basis)
    Z = np.vstack([batch.Xminus, batch.Uminus])
    for t in range(6):
        for j, exps in enumerate(basis.exponents):
            expected = 1.0
            for var, e in enumerate(exps):
                expected *= Z[var, t] ** e
            assert omega[j, t] == pytest.approx(expected, rel=1e-12)


# ---------------------------------------------------------------------------
# polynomial model sets


def test_model_set_poly_noise_free_recovers_coefficients():
    rng = np.random.default_rng(5)
    basis = ex.poly_basis()
    zero = singleton(np.zeros(2))
    data = ex.generate_poly_data(ex.THETA_2D, basis, ex.poly_input_set(), zero, transitions=40, rng=rng)
    model = model_set_poly(data.batch, basis, concat_noise(zero, 40))
    np.testing.assert_allclose(model.set.C, ex.THETA_2D, atol=1e-8)


def test_model_set_poly_rank_deficient_when_basis_exceeds_data():
    rng = np.random.default_rng(6)
    basis = ex.poly_basis()
    zero = singleton(np.zeros(2))
    data = ex.generate_poly_data(ex.THETA_2D, basis, ex.poly_input_set(), zero, transitions=3, rng=rng, trajectory_length=3)
    with pytest.raises(RankDeficient):
        model_set_poly(data.batch, basis, concat_noise(zero, 3))


# ---------------------------------------------------------------------------
# refinement


def _interval_model(center, radius, batch_id):
    from czreach.learning import ModelSet

    cpmz = lift(MatrixZonotope(np.array([[float(center)]]), np.array([[[float(radius)]]])))
    return ModelSet(cpmz, (batch_id,), {batch_id: []})


def test_refine_interval_instance():
    refined = refine(_interval_model(1.0, 1.0, "a"), _interval_model(2.0, 1.0, "b"))
    assert membership_bruteforce(refined.set, [1.0], tol=1e-6, resolution=201)
    assert membership_bruteforce(refined.set, [2.0], tol=1e-6, resolution=201)
    assert not membership_bruteforce(refined.set, [0.5], tol=1e-6, resolution=201)
    assert refined.provenance == ("b", "a")


def test_refine_requires_disjoint_factor_spaces():
    m = _interval_model(0.0, 1.0, "a")
    with pytest.raises(ShapeMismatch):
        refine(m, m)


def test_refine_keeps_true_model_member():
    rng = np.random.default_rng(7)
    U, Zw = ex.lti_input_set(), ex.lti_noise_set(correlated=True)
    truth = np.hstack([ex.PHI_5D, ex.GAMMA_5D])
    d0 = ex.generate_lti_data(ex.PHI_5D, ex.GAMMA_5D, U, Zw, transitions=6, rng=rng)
    d1 = ex.generate_lti_data(ex.PHI_5D, ex.GAMMA_5D, U, Zw, transitions=6, rng=rng)
    m0 = model_set_lti(d0.batch, concat_noise(Zw, 6), "b0")
    m1 = model_set_lti(d1.batch, concat_noise(Zw, 6), "b1")
    refined = refine(m0, m1)
    witness = ex.model_witness_assignment(refined, {"b0": d0.noise_values, "b1": d1.noise_values})
    assert constraint_residual(refined.set, witness) <= 1e-9
    np.testing.assert_allclose(eval_matrix(refined.set, witness), truth, atol=1e-8)


# ---------------------------------------------------------------------------
# trajectory files


def test_trajectory_csv_round_trip(tmp_path):
    rng = np.random.default_rng(8)
    trajs = [Trajectory(rng.normal(size=(2, 4)), rng.normal(size=(1, 3))) for _ in range(3)]
    path = tmp_path / "trajectories.csv"
    save_trajectories_csv(path, trajs)
    loaded = load_trajectories_csv(path)
    assert len(loaded) == 3
    for a, b in zip(trajs, loaded):
        np.testing.assert_array_equal(a.states, b.states)
        np.testing.assert_array_equal(a.inputs, b.inputs)


def test_noise_sidecar_round_trip(tmp_path):
    rng = np.random.default_rng(9)
    values = [[rng.uniform(-1, 1, 3) for _ in range(4)] for _ in range(2)]
    path = tmp_path / "noise.csv"
    save_noise_sidecar_csv(path, values)
    loaded = load_noise_sidecar_csv(path)
    for a_traj, b_traj in zip(values, loaded):
        for a, b in zip(a_traj, b_traj):
            np.testing.assert_array_equal(a, b)
