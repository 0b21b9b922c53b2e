"""Bundled benchmark systems, set builders and data generation.

Two demo plants are provided: a five-dimensional stable linear system and a
two-dimensional quadratic system.  The helpers here generate witness-
recording trajectories, assemble data batches, and assemble the factor
assignments that reproduce a simulated rollout inside the computed
reachable sets.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .factors import FactorAssignment, fresh_ids, merge_assignments
from .learning import (
    DataBatch,
    ModelSet,
    MonomialBasis,
    Trajectory,
    build_batch,
    monomial_basis_custom,
)
from .oracle import WitnessTrace, simulate_lti, simulate_poly
from .reach import ReachResult, Transition
from .sets import CPZ, Zonotope, lift, new_cpz

# ---------------------------------------------------------------------------
# demo system A: five-dimensional linear plant


PHI_5D = np.array(
    [
        [0.9323, -0.1890, 0.0, 0.0, 0.0],
        [0.1890, 0.9323, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.8596, 0.0430, 0.0],
        [0.0, 0.0, -0.0430, 0.8596, 0.0],
        [0.0, 0.0, 0.0, 0.0, 0.9048],
    ]
)

GAMMA_5D = np.array([[0.0436], [0.0533], [0.0475], [0.0453], [0.0476]])

E0_NONCONVEX_5D = np.array(
    [
        [2, 1, 0, 0, 0],
        [1, 2, 0, 0, 0],
        [0, 0, 2, 1, 0],
        [0, 0, 1, 2, 1],
        [0, 0, 0, 1, 2],
    ]
)


def lti_initial_nonconvex() -> CPZ:
    """Nonconvex 5-D initial set: unit offset, 0.1 I generators, coupled exponents."""
    return new_cpz(np.ones(5), 0.1 * np.eye(5), E0_NONCONVEX_5D, ids=fresh_ids(5))


def lti_initial_convex() -> CPZ:
    return lift(Zonotope(np.ones(5), 0.1 * np.eye(5)))


def lti_input_set() -> CPZ:
    return lift(Zonotope([10.0], [[0.25]]))


def lti_noise_set(correlated: bool = True, radius: float = 0.005) -> CPZ:
    """Noise bound of per-coordinate radius ``radius``.

    ``correlated=True`` is the single-generator column form (one factor per
    sample); False gives the diagonal five-generator form with independent
    coordinates.  Both have the same per-coordinate radius.
    """
    if correlated:
        return lift(Zonotope(np.zeros(5), radius * np.ones((5, 1))))
    return lift(Zonotope(np.zeros(5), radius * np.eye(5)))


# ---------------------------------------------------------------------------
# demo system B: two-dimensional quadratic plant


THETA_2D = np.array(
    [
        [0.7, 1.0, 0.32, 0.0, 0.0],
        [0.09, 0.0, 0.0, 0.4, 0.32],
    ]
)


def poly_basis() -> MonomialBasis:
    """Support basis {x1, u1, x1^2, x2^2, u2 x1} over z = [x1 x2 u1 u2]."""
    return monomial_basis_custom(
        [
            [1, 0, 0, 0],
            [0, 0, 1, 0],
            [2, 0, 0, 0],
            [0, 2, 0, 0],
            [1, 0, 0, 1],
        ]
    )


def poly_initial_convex() -> CPZ:
    return lift(Zonotope([1.0, 1.6], 2.0 * np.diag([0.05, 0.1])))


def poly_initial_nonconvex() -> CPZ:
    from .factors import fresh_ids

    return new_cpz([1.0, 2.2], 0.1 * np.eye(2), [[2, 1], [1, 2]], ids=fresh_ids(2))


def poly_input_set() -> CPZ:
    return lift(Zonotope([0.2, 0.3], np.diag([0.01, 0.02])))


def poly_noise_set(radius: float, correlated: bool = True) -> CPZ:
    if correlated:
        return lift(Zonotope(np.zeros(2), radius * np.ones((2, 1))))
    return lift(Zonotope(np.zeros(2), radius * np.eye(2)))


# ---------------------------------------------------------------------------
# witness-recording data generation


@dataclass
class RecordedData:
    """A batch plus per-column noise factor values (column order = batch order)."""

    batch: DataBatch
    noise_values: list[np.ndarray]
    trajectories: list[Trajectory]
    traces: list[WitnessTrace]

    @property
    def transitions(self) -> list[Transition]:
        cols = []
        for t in range(self.batch.size):
            cols.append(
                (
                    self.batch.Xminus[:, t].copy(),
                    self.batch.Uminus[:, t].copy(),
                    self.batch.Xplus[:, t].copy(),
                )
            )
        return cols


def _input_point(input_set: CPZ, values) -> np.ndarray:
    from .sets import eval_point_values

    return eval_point_values(input_set, values)


def _record_lti(Phi, Gamma, x0_box, input_set, noise_set, lengths, rng) -> RecordedData:
    trajs, traces, noise_vals = [], [], []
    for length in lengths:
        x0 = x0_box[0] + rng.uniform(0.0, 1.0, x0_box[0].shape[0]) * (x0_box[1] - x0_box[0])
        trace = simulate_lti(Phi, Gamma, x0, [input_set] * length, noise_set, rng)
        states = np.array(trace.states).T
        inputs = np.array([_input_point(input_set, trace.input_values[k]) for k in range(length)]).T
        trajs.append(Trajectory(states, inputs))
        traces.append(trace)
        noise_vals.extend(trace.noise_values)
    return RecordedData(build_batch(trajs), noise_vals, trajs, traces)


def generate_lti_data(
    Phi,
    Gamma,
    input_set: CPZ,
    noise_set: CPZ,
    transitions: int,
    rng: np.random.Generator,
    trajectory_length: int | None = None,
    x0_low=None,
    x0_high=None,
) -> RecordedData:
    """Simulate rollouts of the linear plant and stack them into a batch."""
    n_x = np.asarray(Phi).shape[0]
    lo = np.asarray(x0_low, float) if x0_low is not None else 0.9 * np.ones(n_x)
    hi = np.asarray(x0_high, float) if x0_high is not None else 1.1 * np.ones(n_x)
    length = trajectory_length or transitions
    lengths = [length] * (transitions // length)
    if transitions % length:
        lengths.append(transitions % length)
    return _record_lti(np.asarray(Phi, float), np.asarray(Gamma, float), (lo, hi), input_set, noise_set, lengths, rng)


def generate_poly_data(
    Theta,
    basis: MonomialBasis,
    input_set: CPZ,
    noise_set: CPZ,
    transitions: int,
    rng: np.random.Generator,
    trajectory_length: int = 7,
    x0_low=(0.9, 1.4),
    x0_high=(1.1, 1.8),
) -> RecordedData:
    """Simulate rollouts of the quadratic plant and stack them into a batch."""
    Theta = np.asarray(Theta, float)
    lo = np.asarray(x0_low, float)
    hi = np.asarray(x0_high, float)
    lengths = [trajectory_length] * (transitions // trajectory_length)
    if transitions % trajectory_length:
        lengths.append(transitions % trajectory_length)
    trajs, traces, noise_vals = [], [], []
    for length in lengths:
        x0 = lo + rng.uniform(0.0, 1.0, lo.shape[0]) * (hi - lo)
        trace = simulate_poly(Theta, basis, x0, [input_set] * length, noise_set, rng)
        states = np.array(trace.states).T
        inputs = np.array([_input_point(input_set, trace.input_values[k]) for k in range(length)]).T
        trajs.append(Trajectory(states, inputs))
        traces.append(trace)
        noise_vals.extend(trace.noise_values)
    return RecordedData(build_batch(trajs), noise_vals, trajs, traces)


# ---------------------------------------------------------------------------
# witness assembly


def model_witness_assignment(model: ModelSet, noise_values_by_batch: dict[str, list[np.ndarray]]) -> FactorAssignment:
    """Assignment under which the model set evaluates to the true matrix.

    For each contributing batch, column j of the concatenated noise set gets
    the recorded factor values of the j-th transition in that batch.
    """
    entries: dict[int, float] = {}
    for batch_id, blocks in model.noise_blocks.items():
        recorded = noise_values_by_batch[batch_id]
        if len(recorded) != len(blocks):
            raise ValueError(f"batch {batch_id}: {len(recorded)} recorded columns for {len(blocks)} blocks")
        for block, vals in zip(blocks, recorded):
            for fid, v in zip(block, vals):
                entries[fid] = float(v)
    return FactorAssignment(entries)


def propagation_witness(
    result: ReachResult,
    trace: WitnessTrace,
    model_assignment: FactorAssignment | None,
    step: int,
) -> FactorAssignment:
    """Assignment reproducing ``trace.states[step]`` inside ``result.sets[step]``.

    Combines the initial-set factors, per-step input and noise factors for
    all steps before ``step``, and the model witness (if data-driven).
    """
    frags = []
    initial = result.sets[0]
    if trace.initial_values is None:
        raise ValueError("trace was not started from the initial set")
    frags.append(dict(zip(initial.ids, trace.initial_values)))
    for k in range(step):
        uk = result.inputs_used[k]
        if trace.input_values[k] is not None:
            frags.append(dict(zip(uk.ids, trace.input_values[k])))
        zk = result.noise_used[k]
        frags.append(dict(zip(zk.ids, trace.noise_values[k])))
    if model_assignment is not None:
        frags.append(model_assignment)
    return merge_assignments(frags)
