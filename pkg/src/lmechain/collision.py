"""Repeated-interaction (collision model) simulator.

Each stroke couples the chain ends to fresh thermal ancillas for a time
``tau`` with interaction ``g (a_i^dag b_i + b_i^dag a_i) / sqrt(tau)``, evolves
system plus ancillas exactly, and traces the ancillas out. As ``tau -> 0``
the reduced dynamics reproduces the local master equation with
``gamma = g**2``.

The joint propagator is built from exact eigen-decompositions. When the
chain has no pair-creation term the total excitation number is conserved and
the joint space splits into number sectors that are diagonalised one by one.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import DimensionBudget, DomainError, InsufficientSamples
from .fock import (
    TOP_LEVEL_THRESHOLD,
    build_model,
    chain_hamiltonian,
    embed,
    lowering,
    solve_model,
    thermal_state,
)
from .model import ChainSpec
from .thermo import FockExpectation, Rates, gaussian_rates, heat_rate_general, work_rate_general
from .gaussian import mode_moments, steady_state as gaussian_steady_state

# joint dimension allowed without a conserved-number block structure
DENSE_JOINT_MAX = 4096
# entries of joint density-matrix blocks held at once
BLOCK_ENTRY_BUDGET = 60_000_000


@dataclass(frozen=True)
class StrokeRecord:
    """Energy and entropy ledger of one stroke (positive = into the system)."""

    heat: tuple[float, ...]
    work: float
    dE_system: float
    entropy_production: float
    mutual_information: float
    relative_entropy: float
    entropy_change: float
    env_correlation: float
    low_confidence: bool

    @property
    def first_law_residual(self) -> float:
        return self.dE_system - sum(self.heat) - self.work


def thermal_ancilla(omega: float, temperature: float, d: int) -> np.ndarray:
    """Gibbs state of a ``d``-level truncated oscillator."""
    if d < 2:
        raise DomainError("ancilla needs at least two levels")
    return thermal_state(omega, temperature, d)


def von_neumann(rho: np.ndarray) -> float:
    p = np.linalg.eigvalsh((rho + rho.conj().T) / 2)
    p = p[p > 1e-300]
    return float(-np.sum(p * np.log(p)))


def _single_mode_marginal(rho: np.ndarray, site: int, n_modes: int, d: int) -> np.ndarray:
    t = rho.reshape([d] * (2 * n_modes))
    letters = "abcdefghijklmnopqrstuvwxyz"
    rows = list(letters[:n_modes])
    cols = list(letters[n_modes:2 * n_modes])
    for j in range(n_modes):
        if j != site:
            cols[j] = rows[j]
    spec = "".join(rows) + "".join(cols) + "->" + rows[site] + cols[site]
    return np.einsum(spec, t)


class CollisionStroke:
    """Cached joint propagator for one ``(spec, tau, g, d)`` combination."""

    def __init__(self, spec: ChainSpec, tau: float, g: float, d: int):
        if not tau > 0:
            raise DomainError("tau must be positive")
        if g < 0:
            raise DomainError("g must be nonnegative")
        if d < 2:
            raise DomainError("need at least two Fock levels per mode")
        self.spec, self.tau, self.g, self.d = spec, tau, g, d
        n = spec.n_sites
        self.n_sys = n
        self.n_anc = len(spec.bath_sites)
        self.dim_s = d ** n
        self.dim_e = d ** self.n_anc
        self.dim = self.dim_s * self.dim_e
        self.number_conserving = spec.eta == 0

        dims = [d] * (n + self.n_anc)
        a = lowering(d)
        sys_modes = [embed(a, i, dims) for i in range(n)]
        anc_modes = [embed(a, n + k, dims) for k in range(self.n_anc)]
        local, h_int = chain_hamiltonian(spec, sys_modes)
        self.h_system_joint = sp.csr_matrix(sum(local) + h_int)
        bath_w = spec.bath_frequencies
        self.h_env_joint = [w * (b.getH() @ b) for w, b in zip(bath_w, anc_modes)]
        self.couplings = [
            g * (sys_modes[site].getH() @ b + b.getH() @ sys_modes[site])
            for site, b in zip(spec.bath_sites, anc_modes)
        ]
        coupling = sp.csr_matrix(sum(self.couplings))
        self.coupling = coupling
        h_tot = self.h_system_joint + sum(self.h_env_joint) + coupling / np.sqrt(tau)
        self.h_tot = sp.csr_matrix(h_tot)

        # system-space operators for energy bookkeeping
        sdims = [d] * n
        s_modes = [embed(a, i, sdims) for i in range(n)]
        s_local, s_int = chain_hamiltonian(spec, s_modes)
        self.h_system = (sum(s_local) + s_int).toarray()

        levels = np.indices(dims).reshape(len(dims), -1)
        self.anc_index = np.arange(self.dim) % self.dim_e
        self.sys_index = np.arange(self.dim) // self.dim_e
        if self.number_conserving:
            total = levels.sum(axis=0)
            self.sectors = [np.flatnonzero(total == k) for k in range(total.max() + 1)]
        else:
            if self.dim > DENSE_JOINT_MAX:
                raise DimensionBudget(
                    f"joint dimension {self.dim} exceeds {DENSE_JOINT_MAX} without number conservation")
            self.sectors = [np.arange(self.dim)]
        self._propagators: Optional[list[np.ndarray]] = None

        self.anc_states = [thermal_ancilla(w, t, d) for w, t in zip(bath_w, spec.temperatures)]
        anc_diag = np.ones(1)
        for st in self.anc_states:
            anc_diag = np.kron(anc_diag, np.real(np.diag(st)))
        self.anc_diag = anc_diag
        self.anc_levels = np.indices([d] * self.n_anc).reshape(self.n_anc, -1)

    @property
    def propagators(self) -> list[np.ndarray]:
        if self._propagators is None:
            props = []
            for idx in self.sectors:
                block = self.h_tot[idx][:, idx].toarray()
                energies, vecs = np.linalg.eigh(block.real if np.allclose(block.imag, 0) else block)
                props.append((vecs * np.exp(-1j * self.tau * energies)) @ vecs.conj().T)
            self._propagators = props
        return self._propagators

    def _active_blocks(self, rho_s: np.ndarray) -> list[tuple[int, int]]:
        if len(self.sectors) == 1:
            return [(0, 0)]
        n_s = np.indices([self.d] * self.n_sys).reshape(self.n_sys, -1).sum(axis=0)
        pairs = set()
        max_anc = self.n_anc * (self.d - 1)
        mags = np.abs(rho_s)
        nz_rows, nz_cols = np.nonzero(mags > 1e-15 * mags.max())
        shifts = set(zip(n_s[nz_rows], n_s[nz_cols]))
        top = len(self.sectors) - 1
        for p, q in shifts:
            for m in range(max_anc + 1):
                if p + m <= top and q + m <= top:
                    pairs.add((p + m, q + m))
        pairs = sorted(pairs)
        entries = sum(len(self.sectors[k]) * len(self.sectors[l]) for k, l in pairs)
        if entries > BLOCK_ENTRY_BUDGET:
            raise DimensionBudget(f"joint state needs {entries} block entries")
        return pairs

    def apply(self, rho_s: np.ndarray) -> tuple[np.ndarray, StrokeRecord]:
        rho_s = (rho_s + rho_s.conj().T) / 2
        dim_s, dim_e = self.dim_s, self.dim_e
        props = self.propagators
        new_s = np.zeros((dim_s, dim_s), dtype=complex)
        new_e = np.zeros((dim_e, dim_e), dtype=complex)
        v_before = v_after = 0.0
        for k, l in self._active_blocks(rho_s):
            rows, cols = self.sectors[k], self.sectors[l]
            s_r, e_r = self.sys_index[rows], self.anc_index[rows]
            s_c, e_c = self.sys_index[cols], self.anc_index[cols]
            same_e = e_r[:, None] == e_c[None, :]
            block = rho_s[np.ix_(s_r, s_c)] * same_e * self.anc_diag[e_r][:, None]
            if not np.any(block):
                continue
            evolved = props[k] @ block @ props[l].conj().T
            if k == l:
                v_kk = self.coupling[rows][:, cols]
                v_before += np.real(v_kk.multiply(block.T).sum())
                v_after += np.real(v_kk.multiply(evolved.T).sum())
            ri, ci = np.nonzero(same_e)
            np.add.at(new_s, (s_r[ri], s_c[ci]), evolved[ri, ci])
            ri, ci = np.nonzero(s_r[:, None] == s_c[None, :])
            np.add.at(new_e, (e_r[ri], e_c[ci]), evolved[ri, ci])
        new_s = (new_s + new_s.conj().T) / 2
        new_e = (new_e + new_e.conj().T) / 2
        return new_s, self._ledger(rho_s, new_s, new_e, v_before, v_after)

    def _ledger(self, rho_s, new_s, new_e, v_before, v_after) -> StrokeRecord:
        spec, d = self.spec, self.d
        e_levels = self.anc_levels
        probs_after = np.real(np.diag(new_e))
        heat = []
        for k, (w, state) in enumerate(zip(spec.bath_frequencies, self.anc_states)):
            before = w * np.sum(np.arange(d) * np.real(np.diag(state)))
            after = w * np.sum(e_levels[k] * probs_after)
            heat.append(float(before - after))
        d_sys = float(np.real(np.trace(self.h_system @ (new_s - rho_s))))
        work = float((v_before - v_after) / np.sqrt(self.tau))

        s_before = von_neumann(rho_s)
        s_after = von_neumann(new_s)
        env_before = sum(von_neumann(st) for st in self.anc_states)
        env_after = von_neumann(new_e)
        marg_after = sum(von_neumann(_single_mode_marginal(new_e, k, self.n_anc, d)) for k in range(self.n_anc))
        log_thermal = np.zeros(self.dim_e)
        for k, (w, t) in enumerate(zip(spec.bath_frequencies, spec.temperatures)):
            log_z = np.log(np.sum(np.exp(-w * np.arange(d) / t)))
            log_thermal += -w * e_levels[k] / t - log_z
        relative = float(-env_after - np.sum(probs_after * log_thermal))
        mutual = s_after + env_after - s_before - env_before

        top = [np.real(np.diag(_single_mode_marginal(new_s, i, self.n_sys, d)))[-1] for i in range(self.n_sys)]
        top += [np.real(np.diag(_single_mode_marginal(new_e, k, self.n_anc, d)))[-1] for k in range(self.n_anc)]
        return StrokeRecord(
            heat=tuple(heat),
            work=work,
            dE_system=d_sys,
            entropy_production=mutual + relative,
            mutual_information=mutual,
            relative_entropy=relative,
            entropy_change=s_after - s_before,
            env_correlation=marg_after - env_after,
            low_confidence=bool(max(top) > TOP_LEVEL_THRESHOLD),
        )


def stroke(rho_s: np.ndarray, spec: ChainSpec, tau: float, g: float, d: int) -> tuple[np.ndarray, StrokeRecord]:
    """One collision: evolve with fresh thermal ancillas and trace them out."""
    return CollisionStroke(spec, tau, g, d).apply(rho_s)


def run_strokes(rho0: np.ndarray, spec: ChainSpec, tau: float, g: float, d: int,
                count: int) -> tuple[np.ndarray, list[StrokeRecord]]:
    if count < 1:
        raise DomainError("count must be at least 1")
    engine = CollisionStroke(spec, tau, g, d)
    rho, records = rho0, []
    for _ in range(count):
        rho, rec = engine.apply(rho)
        records.append(rec)
    return rho, records


@dataclass(frozen=True)
class ConvergenceReport:
    taus: np.ndarray
    heat_rates: np.ndarray  # shape (len(taus), n_baths)
    work_rates: np.ndarray
    entropy_production: np.ndarray
    first_law_residuals: np.ndarray
    heat_intercepts: np.ndarray
    heat_slopes: np.ndarray
    work_intercept: float
    work_slope: float
    lme_rates: Rates
    closed_form: Optional[Rates]
    low_confidence: bool

    def relative_errors(self, reference: Optional[Rates] = None) -> dict:
        ref = reference or self.closed_form or self.lme_rates
        out = {}
        for name, got, want in (("q_cold", self.heat_intercepts[0], ref.q_cold),
                                ("q_hot", self.heat_intercepts[1], ref.q_hot),
                                ("w_dot", self.work_intercept, ref.w_dot)):
            out[name] = abs(got - want) / abs(want) if want != 0 else abs(got)
        return out


def rate_extrapolation(spec: ChainSpec, g: Optional[float], d: int, taus: Sequence[float],
                       strokes: int = 1) -> ConvergenceReport:
    """Per-stroke rates at the local-master-equation steady state, extrapolated to ``tau -> 0``.

    The held state is the truncated-Fock steady state of ``spec``. With
    ``g = sqrt(gamma)`` (the default) the intercepts should reproduce the
    steady-state rates; ``lme_rates`` gives the master-equation rates with
    ``gamma = g**2`` evaluated at the held state for any ``g``.
    """
    taus = np.asarray(sorted(taus, reverse=True), dtype=float)
    if len(taus) < 3:
        raise InsufficientSamples("need at least three interaction times")
    if np.any(taus <= 0):
        raise DomainError("interaction times must be positive")
    if g is None:
        g = float(np.sqrt(spec.gamma))
    model = build_model(spec, d)
    rho_ss = solve_model(model)

    if g > 0:
        eff = build_model(spec.with_(gamma=g**2), d)
        expect = FockExpectation(rho_ss)
        heats = heat_rate_general(eff.jumps, expect)
        lme = Rates(float(heats[0]), float(heats[1]), work_rate_general(eff.jumps, eff.interaction, expect))
    else:
        lme = Rates(0.0, 0.0, 0.0)
    closed = None
    if g > 0 and np.isclose(g**2, spec.gamma, rtol=1e-12, atol=0):
        closed = gaussian_rates(spec, mode_moments(gaussian_steady_state(spec), spec))

    heat_rates, work_rates, sigmas, residuals = [], [], [], []
    flagged = False
    for tau in taus:
        _, recs = run_strokes(rho_ss, spec, tau, g, d, strokes)
        heat_rates.append(np.mean([r.heat for r in recs], axis=0) / tau)
        work_rates.append(np.mean([r.work for r in recs]) / tau)
        sigmas.append(min(r.entropy_production for r in recs))
        residuals.append(max(abs(r.first_law_residual) for r in recs))
        flagged |= any(r.low_confidence for r in recs)
    heat_rates = np.array(heat_rates)
    work_rates = np.array(work_rates)
    heat_fit = np.polyfit(taus, heat_rates, 1)
    work_fit = np.polyfit(taus, work_rates, 1)
    return ConvergenceReport(
        taus=taus,
        heat_rates=heat_rates,
        work_rates=work_rates,
        entropy_production=np.array(sigmas),
        first_law_residuals=np.array(residuals),
        heat_intercepts=heat_fit[1],
        heat_slopes=heat_fit[0],
        work_intercept=float(work_fit[1]),
        work_slope=float(work_fit[0]),
        lme_rates=lme,
        closed_form=closed,
        low_confidence=flagged,
    )


@dataclass(frozen=True)
class DetailedBalance:
    """Commutator norms behind the work cost of local dissipation.

    ``local`` holds ``||[H_S_i + H_E_i, V_i]||`` per bath (zero for resonant
    exchange coupling); ``interaction`` is ``||[H_I, V]||``, nonzero whenever
    the chain is coupled.
    """

    local: tuple[float, ...]
    interaction: float


def detailed_balance_diagnostics(spec: ChainSpec, d: int, g: float = 1.0) -> DetailedBalance:
    """Spectral norms of the commutators on the truncated joint space."""
    n = spec.n_sites
    dims = [d] * (n + 2)
    a = lowering(d)
    sys_modes = [embed(a, i, dims) for i in range(n)]
    anc_modes = [embed(a, n + k, dims) for k in range(2)]
    local_h, h_int = chain_hamiltonian(spec, sys_modes)
    local = []
    v_total = sp.csr_matrix(h_int.shape, dtype=complex)
    for k, (site, b) in enumerate(zip(spec.bath_sites, anc_modes)):
        v = g * (sys_modes[site].getH() @ b + b.getH() @ sys_modes[site])
        v_total = v_total + v
        bare = local_h[site] + spec.bath_frequencies[k] * (b.getH() @ b)
        local.append(_norm(bare @ v - v @ bare))
    return DetailedBalance(tuple(local), _norm(h_int @ v_total - v_total @ h_int))


def _norm(op: sp.spmatrix) -> float:
    dense = op.toarray()
    if not np.any(dense):
        return 0.0
    return float(np.linalg.norm(dense, 2))
