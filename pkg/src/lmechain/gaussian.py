"""Gaussian (covariance-matrix) description of the chain steady state.

Quadratures are ordered ``(x_1, p_1, x_2, p_2, ...)`` and the mode operators
are ``a_i = (omega_i x_i + i p_i) / sqrt(2 omega_i)``. The covariance matrix is
``V_kl = <{Y_k, Y_l}>/2`` and obeys ``dV/dt = K V + V K^T + D``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg as sla

from .errors import NonHurwitz, SolverSingular, Unphysical, WrongShape
from .model import ChainSpec

# Kronecker-vectorised solve up to this matrix size, Bartels-Stewart above.
KRONECKER_MAX_DIM = 16


def symplectic_form(n_modes: int) -> np.ndarray:
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


@dataclass(frozen=True)
class CovarianceState:
    """Symmetric ``2N x 2N`` covariance matrix.

    ``deviation`` optionally holds ``matrix - reference`` computed without
    rounding through the full matrix; steady states solved relative to the
    local thermal reference carry it so that tiny heat currents keep their
    relative precision.
    """

    matrix: np.ndarray
    deviation: Optional[np.ndarray] = None
    reference: Optional[np.ndarray] = None

    @property
    def n_modes(self) -> int:
        return self.matrix.shape[0] // 2

    def symplectic_eigenvalues(self) -> np.ndarray:
        return symplectic_eigenvalues(self.matrix)

    def is_physical(self, tol: float = 1e-9) -> bool:
        return bool(np.all(self.symplectic_eigenvalues() >= 0.5 - tol))


@dataclass(frozen=True)
class DriftDiffusion:
    drift: np.ndarray
    diffusion: np.ndarray

    def is_hurwitz(self) -> bool:
        scale = np.linalg.norm(self.drift, 2)
        return bool(np.max(np.linalg.eigvals(self.drift).real) < -1e-10 * scale)


@dataclass(frozen=True)
class ModeMoments:
    """Second moments ``<a_i^dag a_j>`` (``number``) and ``<a_i a_j>`` (``anomalous``).

    ``excess`` is ``<a_i^dag a_j>`` minus its value in the local thermal
    reference (bath sites thermal, interior sites in vacuum) when known
    to full relative precision.
    """

    number: np.ndarray
    anomalous: np.ndarray
    excess: Optional[np.ndarray] = None

    def occupation(self, i: int) -> float:
        return float(self.number[i, i].real)


def quadrature_hamiltonian(spec: ChainSpec) -> np.ndarray:
    """Symmetric ``H`` with ``H_S = Y^T H Y / 2`` (up to a constant)."""
    w = spec.omega
    n = spec.n_sites
    h = np.zeros((2 * n, 2 * n))
    for i in range(n):
        h[2 * i, 2 * i] = w[i] ** 2
        h[2 * i + 1, 2 * i + 1] = 1.0
    for i in range(n - 1):
        root = np.sqrt(w[i] * w[i + 1])
        xx = (spec.epsilon + spec.eta) * root
        pp = (spec.epsilon - spec.eta) / root
        h[2 * i, 2 * (i + 1)] = h[2 * (i + 1), 2 * i] = xx
        h[2 * i + 1, 2 * i + 3] = h[2 * i + 3, 2 * i + 1] = pp
    return h


def build_drift_diffusion(spec: ChainSpec) -> DriftDiffusion:
    n = spec.n_sites
    w = spec.omega
    drift = symplectic_form(n) @ quadrature_hamiltonian(spec)
    diffusion = np.zeros((2 * n, 2 * n))
    occ = spec.occupations
    for site, nbar in zip(spec.bath_sites, (occ.n_cold, occ.n_hot)):
        x, p = 2 * site, 2 * site + 1
        drift[x, x] -= spec.gamma / 2
        drift[p, p] -= spec.gamma / 2
        diffusion[x, x] = spec.gamma * (2 * nbar + 1) / (2 * w[site])
        diffusion[p, p] = spec.gamma * w[site] * (2 * nbar + 1) / 2
    return DriftDiffusion(drift, diffusion)


def thermal_reference(spec: ChainSpec) -> np.ndarray:
    """Bath sites thermal at their own bath, interior sites in their ground state."""
    n = spec.n_sites
    w = spec.omega
    nbar = np.zeros(n)
    occ = spec.occupations
    nbar[spec.bath_sites[0]] = occ.n_cold
    nbar[spec.bath_sites[1]] = occ.n_hot
    diag = np.empty(2 * n)
    diag[0::2] = (2 * nbar + 1) / (2 * w)
    diag[1::2] = (2 * nbar + 1) * w / 2
    return np.diag(diag)


def _solve_lyapunov(drift: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve ``K X + X K^T = rhs``."""
    dim = drift.shape[0]
    if dim <= KRONECKER_MAX_DIM:
        eye = np.eye(dim)
        op = np.kron(eye, drift) + np.kron(drift, eye)
        with warnings.catch_warnings():
            warnings.simplefilter("error", sla.LinAlgWarning)
            try:
                vec = sla.solve(op, rhs.reshape(-1, order="F"))
            except (sla.LinAlgError, sla.LinAlgWarning) as exc:
                raise SolverSingular(str(exc)) from exc
        return vec.reshape(dim, dim, order="F")
    try:
        return sla.solve_continuous_lyapunov(drift, rhs)
    except (sla.LinAlgError, ValueError) as exc:
        raise SolverSingular(str(exc)) from exc


def solve_steady(dd: DriftDiffusion, reference: Optional[np.ndarray] = None,
                 residual: Optional[np.ndarray] = None) -> CovarianceState:
    """Stationary covariance from ``K V + V K^T + D = 0``.

    With ``reference`` the solve is done for ``V - reference``, which keeps
    full relative precision in the deviation. ``residual`` may supply
    ``K ref + ref K^T + D`` when it is known without cancellation error.
    """
    k, d = dd.drift, dd.diffusion
    if not dd.is_hurwitz():
        worst = np.max(np.linalg.eigvals(k).real)
        raise NonHurwitz(f"drift matrix not Hurwitz (max Re eig = {worst:.3e})")
    if reference is None:
        v = _solve_lyapunov(k, -d)
        deviation = None
    else:
        if residual is None:
            residual = k @ reference + reference @ k.T + d
        deviation = _solve_lyapunov(k, -residual)
        deviation = (deviation + deviation.T) / 2
        v = reference + deviation
    v = (v + v.T) / 2
    resid = np.max(np.abs(k @ v + v @ k.T + d))
    scale = max(np.max(np.abs(d)), np.finfo(float).tiny)
    if resid > 1e-10 * scale:
        raise SolverSingular(f"Lyapunov residual {resid:.3e} exceeds tolerance")
    return CovarianceState(v, deviation, reference)


def steady_state(spec: ChainSpec) -> CovarianceState:
    """Build drift/diffusion for ``spec`` and solve relative to the thermal reference.

    Local oscillation, damping and diffusion cancel exactly on the reference,
    so its residual is built from the couplings alone.
    """
    ref = thermal_reference(spec)
    h_int = quadrature_hamiltonian(spec)
    h_int[np.diag_indices_from(h_int)] = 0.0
    k_int = symplectic_form(spec.n_sites) @ h_int
    residual = k_int @ ref + ref @ k_int.T
    return solve_steady(build_drift_diffusion(spec), ref, residual)


def evolve_covariance(dd: DriftDiffusion, v0: CovarianceState, t: float) -> CovarianceState:
    """Exact ``V(t) = e^{Kt} V0 e^{K^T t} + int_0^t e^{Ks} D e^{K^T s} ds``.

    Propagator and noise integral come from Van Loan's block exponential on a
    short step, then repeated doubling ``Q(2h) = Q(h) + Phi(h) Q(h) Phi(h)^T``.
    The short step keeps ``e^{-Kh}`` bounded, and no Hurwitz assumption is
    needed.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    if t == 0:
        return v0
    k, d = dd.drift, dd.diffusion
    dim = k.shape[0]
    norm = np.linalg.norm(k, 1)
    doublings = max(0, int(np.ceil(np.log2(norm * t))) if norm * t > 1 else 0)
    h = t / 2**doublings
    block = np.zeros((2 * dim, 2 * dim))
    block[:dim, :dim] = -k
    block[:dim, dim:] = d
    block[dim:, dim:] = k.T
    big = sla.expm(block * h)
    prop = big[dim:, dim:].T  # e^{K h}
    noise = prop @ big[:dim, dim:]
    for _ in range(doublings):
        noise = noise + prop @ noise @ prop.T
        prop = prop @ prop
    v = prop @ v0.matrix @ prop.T + noise
    return CovarianceState((v + v.T) / 2)


def _mode_vectors(omega: np.ndarray) -> np.ndarray:
    """Columns ``c_j`` with ``a_j = c_j . Y``."""
    n = len(omega)
    c = np.zeros((2 * n, n), dtype=complex)
    for j, w in enumerate(omega):
        c[2 * j, j] = w / np.sqrt(2 * w)
        c[2 * j + 1, j] = 1j / np.sqrt(2 * w)
    return c


def mode_moments(v: CovarianceState, spec: ChainSpec) -> ModeMoments:
    if v.matrix.shape != (2 * spec.n_sites, 2 * spec.n_sites):
        raise WrongShape("covariance dimension does not match the chain")
    c = _mode_vectors(spec.omega)
    # <Y_k Y_l> = V_kl + (i/2) J_kl
    second = v.matrix + 0.5j * symplectic_form(spec.n_sites)
    number = c.conj().T @ second @ c
    anomalous = c.T @ second @ c
    excess = None
    if v.deviation is not None:
        excess = c.conj().T @ v.deviation @ c
    return ModeMoments(number, anomalous, excess)


def closed_form_covariance(spec: ChainSpec) -> np.ndarray:
    """Analytic steady covariance of two oscillators with excitation-conserving coupling."""
    _require_two_rotating(spec)
    w1, w2 = spec.frequencies
    eps, gam = spec.epsilon, spec.gamma
    occ = spec.occupations
    n1, n2 = occ.n_cold, occ.n_hot
    delta2 = gam**2 + 4 * eps**2 + (w1 - w2) ** 2
    root = np.sqrt(w1 * w2)
    v = np.zeros((4, 4))
    shift = 4 * eps**2 * (n2 - n1) / delta2
    v[0, 0] = (shift + 2 * n1 + 1) / (2 * w1)
    v[1, 1] = w1 * (shift + 2 * n1 + 1) / 2
    v[2, 2] = (-shift + 2 * n2 + 1) / (2 * w2)
    v[3, 3] = w2 * (-shift + 2 * n2 + 1) / 2
    v[0, 2] = eps * (n1 - n2) * (w1 - w2) / (root * delta2)
    v[0, 3] = gam * w2 * eps * (n2 - n1) / (root * delta2)
    v[1, 2] = gam * w1 * eps * (n1 - n2) / (root * delta2)
    v[1, 3] = eps * (n1 - n2) * (w1 - w2) * root / delta2
    return v + np.triu(v, 1).T


@dataclass(frozen=True)
class TwoOscillatorMoments:
    moments: ModeMoments
    energy_1: float
    energy_2: float
    delta2: float


def closed_form_two_osc(spec: ChainSpec) -> TwoOscillatorMoments:
    """Analytic occupations, coherence and local energies for two oscillators."""
    _require_two_rotating(spec)
    w1, w2 = spec.frequencies
    eps, gam = spec.epsilon, spec.gamma
    occ = spec.occupations
    n1, n2 = occ.n_cold, occ.n_hot
    delta2 = gam**2 + 4 * eps**2 + (w1 - w2) ** 2
    shift = 2 * eps**2 / delta2 * (n2 - n1)
    coherence = eps / delta2 * (w1 - w2 + 1j * gam) * (n1 - n2)  # <a_2^dag a_1>
    number = np.array([[n1 + shift, np.conj(coherence)], [coherence, n2 - shift]], dtype=complex)
    excess = np.array([[shift, np.conj(coherence)], [coherence, -shift]], dtype=complex)
    moments = ModeMoments(number, np.zeros((2, 2), dtype=complex), excess)
    energy_1 = w1 * (n1 + 0.5) + 2 * w1 * eps**2 / delta2 * (n2 - n1)
    energy_2 = w2 * (n2 + 0.5) + 2 * w2 * eps**2 / delta2 * (n1 - n2)
    return TwoOscillatorMoments(moments, energy_1, energy_2, delta2)


def _require_two_rotating(spec: ChainSpec) -> None:
    if spec.n_sites != 2 or spec.eta != 0:
        raise WrongShape("closed forms cover N=2 with eta=0 only")


def symplectic_eigenvalues(v: np.ndarray) -> np.ndarray:
    n = v.shape[0] // 2
    eig = np.linalg.eigvals(1j * symplectic_form(n) @ v).real
    # spectrum is {+nu_k, -nu_k}; keep one member of each pair
    return np.sort(np.abs(eig))[::2]


def gaussian_entropy(v: CovarianceState) -> float:
    """Von Neumann entropy from the symplectic spectrum (vacuum has nu = 1/2)."""
    nu = v.symplectic_eigenvalues()
    if np.any(nu < 0.5 - 1e-9):
        raise Unphysical(f"symplectic eigenvalue {nu.min():.6g} below 1/2")
    hi = nu + 0.5
    lo = np.clip(nu - 0.5, 0.0, None)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = hi * np.log(hi) - np.where(lo > 0, lo * np.log(lo), 0.0)
    return float(max(terms.sum(), 0.0))
