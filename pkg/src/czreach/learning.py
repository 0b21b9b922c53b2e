"""Data-driven model-set learning.

Builds stacked data matrices from trajectories, concatenates a per-sample
noise set into a matrix-valued set covering the whole noise sequence,
computes the set of all system matrices consistent with the data via a
pseudo-inverse, and refines model sets by intersection as new batches
arrive.  Works for linear dynamics (regressors ``[x; u]``) and polynomial
dynamics (monomial regressors).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from itertools import combinations_with_replacement
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .algebra import affine_cpmz, intersect_cpmz
from .errors import DuplicateMonomial, RankDeficient, ShapeMismatch, TooShort
from .factors import FactorId, fresh_ids
from .sets import CPZ, CPMZ, new_cpmz

# ---------------------------------------------------------------------------
# trajectories and data batches


@dataclass(frozen=True)
class Trajectory:
    """One rollout: states (n_x, length) and inputs (n_u, length - 1)."""

    states: np.ndarray
    inputs: np.ndarray

    def __post_init__(self):
        states = np.atleast_2d(np.asarray(self.states, dtype=float))
        inputs = np.atleast_2d(np.asarray(self.inputs, dtype=float))
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "inputs", inputs)
        if states.shape[1] != inputs.shape[1] + 1:
            raise ShapeMismatch(
                f"{states.shape[1]} states need {states.shape[1] - 1} inputs, got {inputs.shape[1]}"
            )

    @property
    def transitions(self) -> int:
        return self.states.shape[1] - 1


@dataclass(frozen=True)
class DataBatch:
    """Stacked transition data: columns of (x_next, x_prev, u_prev)."""

    Xplus: np.ndarray
    Xminus: np.ndarray
    Uminus: np.ndarray

    def __post_init__(self):
        for name in ("Xplus", "Xminus", "Uminus"):
            object.__setattr__(self, name, np.atleast_2d(np.asarray(getattr(self, name), dtype=float)))
        T = self.Xplus.shape[1]
        if T < 1:
            raise TooShort("a data batch needs at least one transition")
        if self.Xminus.shape != self.Xplus.shape:
            raise ShapeMismatch("Xplus and Xminus must have equal shape")
        if self.Uminus.shape[1] != T:
            raise ShapeMismatch("Uminus must have one column per transition")

    @property
    def size(self) -> int:
        return self.Xplus.shape[1]

    @property
    def n_x(self) -> int:
        return self.Xplus.shape[0]

    @property
    def n_u(self) -> int:
        return self.Uminus.shape[0]


def build_batch(trajectories: Iterable[Trajectory] | Trajectory) -> DataBatch:
    """Slice trajectories into a batch; each length-l rollout contributes l-1 columns."""
    if isinstance(trajectories, Trajectory):
        trajectories = [trajectories]
    xplus, xminus, uminus = [], [], []
    for traj in trajectories:
        if traj.states.shape[1] < 2:
            raise TooShort("trajectory has fewer than 2 states")
        xplus.append(traj.states[:, 1:])
        xminus.append(traj.states[:, :-1])
        uminus.append(traj.inputs)
    if not xplus:
        raise TooShort("no trajectories given")
    return DataBatch(np.hstack(xplus), np.hstack(xminus), np.hstack(uminus))


# ---------------------------------------------------------------------------
# noise concatenation


def concat_noise(Zw: CPZ, T: int) -> CPMZ:
    """Matrix-valued set of all noise sequences [w_1 ... w_T] with w_j in Zw.

    Each time column gets its own fresh factors, so columns are mutually
    independent.  Generator j + (i-1)T places the i-th generator of Zw in
    column j; constraint terms are placed the same way with the per-sample
    right-hand side replicated across columns.
    """
    if T < 1:
        raise ShapeMismatch("T must be at least 1")
    n = Zw.dim
    gw = Zw.num_generators
    pw = Zw.num_factors
    qw = Zw.num_constraint_terms
    ncw = Zw.num_constraints

    C = np.repeat(Zw.c[:, None], T, axis=1)
    G = np.zeros((gw * T, n, T))
    E = np.zeros((pw * T, gw * T), dtype=Zw.E.dtype if Zw.E.size else np.int8)
    for i in range(gw):
        for j in range(T):
            k = i * T + j
            G[k, :, j] = Zw.G[:, i]
            E[j * pw : (j + 1) * pw, k] = Zw.E[:, i]

    A = np.zeros((qw * T, ncw, T))
    B = np.repeat(Zw.b[:, None], T, axis=1) if ncw else np.zeros((0, T))
    R = np.zeros((pw * T, qw * T), dtype=Zw.R.dtype if Zw.R.size else np.int8)
    for i in range(qw):
        for j in range(T):
            k = i * T + j
            A[k, :, j] = Zw.A[:, i]
            R[j * pw : (j + 1) * pw, k] = Zw.R[:, i]
    if ncw == 0:
        A = np.zeros((qw * T, 0, 0))
        B = np.zeros((0, 0))

    ids = fresh_ids(pw * T)
    return new_cpmz(C, G, E, A, B, R, ids)


def noise_column_blocks(Mw_ids: Sequence[FactorId], T: int) -> list[tuple[FactorId, ...]]:
    """Per-column factor-id blocks of a concatenated noise set.

    Fresh ids are allocated in column-major order, so after canonical
    sorting block j is simply the j-th consecutive chunk.
    """
    p = len(Mw_ids)
    if T == 0 or p % T:
        raise ShapeMismatch(f"{p} ids do not split into {T} equal blocks")
    width = p // T
    ordered = sorted(Mw_ids)
    return [tuple(ordered[j * width : (j + 1) * width]) for j in range(T)]


# ---------------------------------------------------------------------------
# numerical rank and pseudo-inverse (shared thresholds)


def numerical_rank(M: np.ndarray) -> int:
    if M.size == 0:
        return 0
    return int(np.linalg.matrix_rank(M))


def pinv(M: np.ndarray) -> np.ndarray:
    rcond = max(M.shape) * np.finfo(float).eps
    return np.linalg.pinv(M, rcond=rcond)


# ---------------------------------------------------------------------------
# monomial bases


@dataclass(frozen=True)
class MonomialBasis:
    """Ordered exponent vectors defining the regressor map h(z)."""

    exponents: np.ndarray  # (m_a, n_z) nonnegative integers
    degree_bound: int

    def __post_init__(self):
        exps = np.atleast_2d(np.asarray(self.exponents, dtype=np.int64))
        object.__setattr__(self, "exponents", exps)
        rows = [tuple(int(v) for v in row) for row in exps]
        if len(set(rows)) != len(rows):
            raise DuplicateMonomial("basis contains a repeated exponent vector")
        if exps.size and exps.min() < 0:
            raise DuplicateMonomial("exponents must be nonnegative")

    @property
    def size(self) -> int:
        return self.exponents.shape[0]

    @property
    def variables(self) -> int:
        return self.exponents.shape[1]

    def evaluate(self, z: np.ndarray) -> np.ndarray:
        """h(z) for a single point z of length n_z."""
        z = np.asarray(z, dtype=float).reshape(-1)
        return np.prod(np.power(z[None, :], self.exponents), axis=1)

    def evaluate_stack(self, Z: np.ndarray) -> np.ndarray:
        """h applied columnwise: Z is (n_z, T), result (m_a, T)."""
        Z = np.atleast_2d(np.asarray(Z, dtype=float))
        return np.prod(np.power(Z[None, :, :], self.exponents[:, :, None]), axis=1)


def monomial_basis(n_z: int, d: int) -> MonomialBasis:
    """All exponent vectors of total degree <= d in graded-lexicographic order."""
    if d < 0 or n_z < 1:
        raise DuplicateMonomial("need n_z >= 1 and d >= 0")
    rows = []
    for deg in range(d + 1):
        for combo in combinations_with_replacement(range(n_z), deg):
            vec = np.zeros(n_z, dtype=np.int64)
            for var in combo:
                vec[var] += 1
            rows.append(vec)
    return MonomialBasis(np.array(rows, dtype=np.int64), d)


def monomial_basis_custom(exponent_vectors) -> MonomialBasis:
    """User-ordered basis from explicit exponent vectors (order preserved)."""
    exps = np.atleast_2d(np.asarray(exponent_vectors, dtype=np.int64))
    degree = int(exps.sum(axis=1).max()) if exps.size else 0
    return MonomialBasis(exps, degree)


def regressor_matrix(batch: DataBatch, basis: MonomialBasis) -> np.ndarray:
    """Columns h(z_t) with z_t = [x(t); u(t)] taken from the batch."""
    Z = np.vstack([batch.Xminus, batch.Uminus])
    if Z.shape[0] != basis.variables:
        raise ShapeMismatch(f"basis over {basis.variables} variables, data gives {Z.shape[0]}")
    return basis.evaluate_stack(Z)


# ---------------------------------------------------------------------------
# model sets


@dataclass(frozen=True)
class ModelSet:
    """A matrix set guaranteed to contain every data-consistent model.

    ``noise_blocks`` maps each contributing batch id to its per-column
    factor-id blocks inside the concatenated noise set, which is what lets a
    recorded noise sequence be replayed as a membership witness.
    """

    set: CPMZ
    provenance: tuple[str, ...]
    noise_blocks: dict[str, list[tuple[FactorId, ...]]] = field(default_factory=dict)

    @property
    def shape(self) -> tuple[int, int]:
        return self.set.shape


def model_set_lti(batch: DataBatch, Mw: CPMZ, batch_id: str = "batch0") -> ModelSet:
    """All matrices [Phi Gamma] consistent with the batch under the noise bound.

    Requires [Xminus; Uminus] to have full row rank; the result is the exact
    image (Xplus - Mw) pinv([Xminus; Uminus]).
    """
    D = np.vstack([batch.Xminus, batch.Uminus])
    wanted = batch.n_x + batch.n_u
    if numerical_rank(D) < wanted:
        raise RankDeficient(f"data matrix rank {numerical_rank(D)} < {wanted}")
    if Mw.shape != batch.Xplus.shape:
        raise ShapeMismatch(f"noise set shape {Mw.shape} vs data shape {batch.Xplus.shape}")
    cpmz = affine_cpmz(batch.Xplus, Mw, pinv(D))
    blocks = noise_column_blocks(Mw.ids, batch.size) if Mw.num_factors else []
    return ModelSet(cpmz, (batch_id,), {batch_id: blocks})


def model_set_poly(batch: DataBatch, basis: MonomialBasis, Mw: CPMZ, batch_id: str = "batch0") -> ModelSet:
    """All coefficient matrices consistent with the batch under the noise bound."""
    omega = regressor_matrix(batch, basis)
    if numerical_rank(omega) < basis.size:
        raise RankDeficient(f"regressor rank {numerical_rank(omega)} < {basis.size}")
    if Mw.shape != batch.Xplus.shape:
        raise ShapeMismatch(f"noise set shape {Mw.shape} vs data shape {batch.Xplus.shape}")
    cpmz = affine_cpmz(batch.Xplus, Mw, pinv(omega))
    blocks = noise_column_blocks(Mw.ids, batch.size) if Mw.num_factors else []
    return ModelSet(cpmz, (batch_id,), {batch_id: blocks})


def refine(current: ModelSet, incoming: ModelSet) -> ModelSet:
    """Intersect the incoming model set with the current one.

    The true model stays a member: it belongs to both operands, and its
    witnesses concatenate.  Factor spaces must be disjoint, which holds by
    construction since every batch gets a fresh concatenated noise set.
    """
    if current.shape != incoming.shape:
        raise ShapeMismatch(f"model shapes {current.shape} vs {incoming.shape}")
    if set(current.set.ids) & set(incoming.set.ids):
        raise ShapeMismatch("model sets must live in disjoint factor spaces; relabel first")
    merged = intersect_cpmz(incoming.set, current.set)
    blocks = dict(incoming.noise_blocks)
    blocks.update(current.noise_blocks)
    return ModelSet(merged, incoming.provenance + current.provenance, blocks)


# ---------------------------------------------------------------------------
# trajectory files


def save_trajectories_csv(path, trajectories: Sequence[Trajectory]) -> None:
    """Write `traj,k,x1..xn,u1..um` rows; the last state of each rollout has empty inputs."""
    path = Path(path)
    n_x = trajectories[0].states.shape[0]
    n_u = trajectories[0].inputs.shape[0]
    header = ["traj", "k"] + [f"x{i + 1}" for i in range(n_x)] + [f"u{i + 1}" for i in range(n_u)]
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for t, traj in enumerate(trajectories):
            length = traj.states.shape[1]
            for k in range(length):
                row = [t, k] + [repr(float(v)) for v in traj.states[:, k]]
                if k < length - 1:
                    row += [repr(float(v)) for v in traj.inputs[:, k]]
                else:
                    row += [""] * n_u
                writer.writerow(row)


def load_trajectories_csv(path) -> list[Trajectory]:
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        n_x = sum(1 for name in header if name.startswith("x"))
        n_u = sum(1 for name in header if name.startswith("u"))
        rows = sorted((int(r[0]), int(r[1]), r[2:]) for r in reader if r)
    out: list[Trajectory] = []
    by_traj: dict[int, list[tuple[int, list[str]]]] = {}
    for traj, k, rest in rows:
        by_traj.setdefault(traj, []).append((k, rest))
    for traj in sorted(by_traj):
        samples = sorted(by_traj[traj])
        states = np.array([[float(v) for v in rest[:n_x]] for _, rest in samples]).T
        inputs = np.array(
            [[float(v) for v in rest[n_x : n_x + n_u]] for _, rest in samples[:-1]]
        ).T
        if inputs.size == 0:
            inputs = np.zeros((n_u, states.shape[1] - 1))
        out.append(Trajectory(states, inputs))
    return out


def save_noise_sidecar_csv(path, noise_values: Sequence[Sequence[np.ndarray]]) -> None:
    """Write recorded per-transition noise factors as `traj,k,sigma1..sigmap`."""
    path = Path(path)
    width = len(noise_values[0][0])
    header = ["traj", "k"] + [f"sigma{i + 1}" for i in range(width)]
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for t, per_traj in enumerate(noise_values):
            for k, vals in enumerate(per_traj):
                writer.writerow([t, k] + [repr(float(v)) for v in vals])


def load_noise_sidecar_csv(path) -> list[list[np.ndarray]]:
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        rows = sorted((int(r[0]), int(r[1]), [float(v) for v in r[2:]]) for r in reader if r)
    out: dict[int, list[tuple[int, list[float]]]] = {}
    for traj, k, vals in rows:
        out.setdefault(traj, []).append((k, vals))
    return [[np.array(v) for _, v in sorted(items)] for _, items in sorted(out.items())]
