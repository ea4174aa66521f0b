"""Truncated Fock-space oracle for the local master equation.

Superoperators act on column-stacked density matrices, so that
``vec(A rho B) = (B^T kron A) vec(rho)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce
from typing import Sequence

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import DegenerateKernel, DimensionBudget, DomainError
from .model import ChainSpec

DEFAULT_STATE_BUDGET = 4096
# dense eigen-decomposition of the superoperator up to this Hilbert-space size
DENSE_MAX_STATES = 32
TOP_LEVEL_THRESHOLD = 1e-6


def lowering(d: int) -> sp.csr_matrix:
    return sp.diags(np.sqrt(np.arange(1, d)), 1, shape=(d, d), format="csr", dtype=complex)


def embed(op: sp.spmatrix, site: int, dims: Sequence[int]) -> sp.csr_matrix:
    """Place a single-mode operator on ``site`` of a tensor product."""
    factors = [sp.identity(d, format="csr", dtype=complex) for d in dims]
    factors[site] = sp.csr_matrix(op, dtype=complex)
    return reduce(lambda a, b: sp.kron(a, b, format="csr"), factors)


def mode_operators(n_modes: int, d: int) -> list[sp.csr_matrix]:
    dims = [d] * n_modes
    a = lowering(d)
    return [embed(a, i, dims) for i in range(n_modes)]


def chain_hamiltonian(spec: ChainSpec, modes: Sequence[sp.spmatrix]):
    """Return ``(local terms, interaction)`` for the chain on the given mode operators."""
    local = [w * (a.getH() @ a) for w, a in zip(spec.frequencies, modes)]
    h_int = sp.csr_matrix(local[0].shape, dtype=complex)
    for left, right in zip(modes[:-1], modes[1:]):
        hop = left.getH() @ right
        pair = left.getH() @ right.getH()
        h_int = h_int + spec.epsilon * (hop + hop.getH()) + spec.eta * (pair + pair.getH())
    return local, sp.csr_matrix(h_int)


@dataclass(frozen=True)
class JumpChannel:
    """Jump operator ``L`` with Bohr frequency ``bohr_frequency``.

    The dissipator is ``rate_down * L[L] + rate_up * L[L^dag]``.
    """

    site: int
    operator: sp.csr_matrix
    bohr_frequency: float
    rate_down: float
    rate_up: float

    def __post_init__(self):
        if self.rate_down < 0 or self.rate_up < 0:
            raise DomainError("jump rates must be nonnegative")


@dataclass(frozen=True)
class LindbladModel:
    dim_per_mode: int
    n_modes: int
    hamiltonian: sp.csr_matrix
    jumps: tuple[JumpChannel, ...]
    local_hamiltonians: tuple[sp.csr_matrix, ...] = field(repr=False)
    interaction: sp.csr_matrix = field(repr=False)
    modes: tuple[sp.csr_matrix, ...] = field(repr=False)
    eta: float = 0.0

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]

    @property
    def number_conserving(self) -> bool:
        return self.eta == 0


def build_model(spec: ChainSpec, d: int, budget: int = DEFAULT_STATE_BUDGET) -> LindbladModel:
    if d < 2:
        raise DomainError("need at least two Fock levels per mode")
    if d ** spec.n_sites > budget:
        raise DimensionBudget(f"{d}^{spec.n_sites} = {d ** spec.n_sites} states exceeds budget {budget}")
    modes = mode_operators(spec.n_sites, d)
    local, h_int = chain_hamiltonian(spec, modes)
    ham = sp.csr_matrix(reduce(lambda a, b: a + b, local) + h_int)
    occ = spec.occupations
    jumps = tuple(
        JumpChannel(site, modes[site], spec.frequencies[site], spec.gamma * (nbar + 1), spec.gamma * nbar)
        for site, nbar in zip(spec.bath_sites, (occ.n_cold, occ.n_hot))
    )
    return LindbladModel(d, spec.n_sites, ham, jumps, tuple(local), h_int, tuple(modes), spec.eta)


def _dissipator(op: sp.spmatrix, eye: sp.spmatrix) -> sp.csr_matrix:
    ldl = op.getH() @ op
    return sp.kron(op.conj(), op) - 0.5 * sp.kron(eye, ldl) - 0.5 * sp.kron(ldl.T, eye)


def liouvillian(model: LindbladModel) -> sp.csr_matrix:
    """Sparse generator of ``-i[H, rho] + sum_k dissipators`` in column-stacked form."""
    eye = sp.identity(model.dim, format="csr", dtype=complex)
    h = model.hamiltonian
    gen = -1j * (sp.kron(eye, h) - sp.kron(h.T, eye))
    for ch in model.jumps:
        if ch.rate_down:
            gen = gen + ch.rate_down * _dissipator(ch.operator, eye)
        if ch.rate_up:
            gen = gen + ch.rate_up * _dissipator(ch.operator.getH().tocsr(), eye)
    return sp.csr_matrix(gen)


def vec(rho: np.ndarray) -> np.ndarray:
    return np.asarray(rho).reshape(-1, order="F")


def unvec(v: np.ndarray) -> np.ndarray:
    dim = int(round(np.sqrt(v.size)))
    return v.reshape(dim, dim, order="F")


def apply_liouvillian(gen: sp.spmatrix, rho: np.ndarray) -> np.ndarray:
    return unvec(gen @ vec(rho))


def _normalise(rho: np.ndarray) -> np.ndarray:
    rho = (rho + rho.conj().T) / 2
    return rho / np.trace(rho).real


def steady_sector(model: LindbladModel) -> np.ndarray:
    """Column-stacked indices of the block of operator space holding the steady state.

    The generator conserves ``N(row) - N(col)`` for total excitation number
    ``N`` when ``eta = 0`` and conserves it modulo 2 otherwise. The steady
    state shares the identity's block, ``N(row) - N(col) = 0``.
    """
    d, n = model.dim_per_mode, model.n_modes
    levels = np.indices([d] * n).reshape(n, -1).sum(axis=0)
    dim = model.dim
    k = np.arange(dim * dim)
    diff = levels[k % dim] - levels[k // dim]
    if model.number_conserving:
        return np.flatnonzero(diff == 0)
    return np.flatnonzero(diff % 2 == 0)


def steady_state(gen: sp.spmatrix, sector: np.ndarray | None = None) -> np.ndarray:
    """Unique fixed point of the generator, normalised to unit trace.

    Small spaces use a dense eigen-decomposition and check that the kernel
    is one-dimensional. Larger ones replace one equation by the trace
    condition and LU-factorise the sparse system, restricted to ``sector``
    (an invariant block from :func:`steady_sector`) when given.
    """
    n2 = gen.shape[0]
    dim = int(round(np.sqrt(n2)))
    if dim <= DENSE_MAX_STATES:
        vals, vecs = sla.eig(gen.toarray())
        order = np.argsort(np.abs(vals))
        if np.abs(vals[order[1]]) < 1e-8:
            raise DegenerateKernel("Liouvillian has more than one zero eigenvalue")
        return _normalise(unvec(vecs[:, order[0]]))
    if sector is None:
        sector = np.arange(n2)
    gen = sp.csr_matrix(gen)
    block = gen[sector][:, sector]
    diagonal = np.arange(dim) * (dim + 1)
    pos = np.searchsorted(sector, diagonal)
    if not np.array_equal(sector[np.clip(pos, 0, len(sector) - 1)], diagonal):
        raise ValueError("sector must contain every diagonal element")
    system = sp.lil_matrix(block, dtype=complex)
    trace_row = np.zeros(len(sector), dtype=complex)
    trace_row[pos] = 1.0
    system[0, :] = trace_row
    rhs = np.zeros(len(sector), dtype=complex)
    rhs[0] = 1.0
    try:
        sol = spla.splu(sp.csc_matrix(system)).solve(rhs)
    except RuntimeError as exc:  # exactly singular factor
        raise DegenerateKernel(str(exc)) from exc
    if not np.all(np.isfinite(sol)):
        raise DegenerateKernel("steady-state system is singular")
    full = np.zeros(n2, dtype=complex)
    full[sector] = sol
    rho = _normalise(unvec(full))
    resid = np.max(np.abs(gen @ vec(rho)))
    if resid > 1e-8 * max(abs(gen).max(), 1.0):
        raise DegenerateKernel(f"steady-state residual {resid:.3e}; kernel is not one-dimensional")
    return rho


def solve_model(model: LindbladModel) -> np.ndarray:
    """Steady state of ``model`` using its symmetry sector."""
    return steady_state(liouvillian(model), steady_sector(model))


def expectation(rho: np.ndarray, obs) -> complex:
    obs = obs.toarray() if sp.issparse(obs) else np.asarray(obs)
    if obs.shape != rho.shape:
        raise DomainError(f"shape mismatch: rho {rho.shape} vs observable {obs.shape}")
    # tr(rho O) = sum_ij rho_ij O_ji
    return complex(np.sum(rho * obs.T))


def evolve(gen: sp.spmatrix, rho0: np.ndarray, t: float) -> np.ndarray:
    return unvec(spla.expm_multiply(gen * t, vec(rho0)))


def top_level_populations(rho: np.ndarray, n_modes: int, d: int) -> np.ndarray:
    """Population of the highest retained Fock level of each mode."""
    probs = np.real(np.diag(rho)).reshape([d] * n_modes)
    out = np.empty(n_modes)
    for i in range(n_modes):
        out[i] = np.take(probs, d - 1, axis=i).sum()
    return out


def thermal_state(omega: float, temperature: float, d: int) -> np.ndarray:
    levels = np.arange(d)
    weights = np.exp(-omega * levels / temperature)
    return np.diag(weights / weights.sum()).astype(complex)


def product_state(states: Sequence[np.ndarray]) -> np.ndarray:
    return reduce(np.kron, states)


@dataclass(frozen=True)
class FockMoments:
    number: np.ndarray
    anomalous: np.ndarray
    top_population: np.ndarray
    low_confidence: bool


def fock_moments(rho: np.ndarray, model: LindbladModel) -> FockMoments:
    """``<a_i^dag a_j>`` and ``<a_i a_j>`` together with the truncation diagnostic."""
    n = model.n_modes
    number = np.empty((n, n), dtype=complex)
    anomalous = np.empty((n, n), dtype=complex)
    for i, ai in enumerate(model.modes):
        for j, aj in enumerate(model.modes):
            number[i, j] = expectation(rho, ai.getH() @ aj)
            anomalous[i, j] = expectation(rho, ai @ aj)
    top = top_level_populations(rho, n, model.dim_per_mode)
    return FockMoments(number, anomalous, top, bool(np.any(top > TOP_LEVEL_THRESHOLD)))
