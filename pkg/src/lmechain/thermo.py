"""Steady-state heat currents, work rate, entropy production and operating regime.

Sign convention throughout: a positive heat or work rate is energy entering
the system.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import InconsistentSigns, WrongShape
from .fock import JumpChannel, expectation
from .gaussian import CovarianceState, ModeMoments, mode_moments, steady_state
from .model import ChainSpec


class Regime(str, enum.Enum):
    REFRIGERATOR = "refrigerator"
    ENGINE = "engine"
    ACCELERATOR = "accelerator"
    HEATER = "heater"
    CARNOT_POINT = "carnot_point"
    EQUAL_FREQUENCY = "equal_frequency"
    DEGENERATE = "degenerate"
    UNSTABLE = "unstable"


@dataclass(frozen=True)
class ThermoReport:
    q_dot: tuple[float, float]
    w_dot: float
    entropy_rate: float
    regime: Regime
    figure_of_merit: Optional[float] = None
    internal_current: Optional[float] = None

    @property
    def first_law_residual(self) -> float:
        return self.q_dot[0] + self.q_dot[1] + self.w_dot


# -- operators linear in the mode amplitudes -------------------------------

@dataclass(frozen=True)
class LinearOp:
    """``sum_j u_j a_j + v_j a_j^dag``."""

    u: np.ndarray
    v: np.ndarray

    @classmethod
    def lowering(cls, site: int, n_modes: int) -> LinearOp:
        u = np.zeros(n_modes, dtype=complex)
        u[site] = 1.0
        return cls(u, np.zeros(n_modes, dtype=complex))

    def dag(self) -> LinearOp:
        return LinearOp(self.v.conj(), self.u.conj())


@dataclass(frozen=True)
class QuadraticInteraction:
    """``sum A_jk a_j^dag a_k + (1/2) sum (B_jk a_j^dag a_k^dag + h.c.)``."""

    hopping: np.ndarray
    pairing: np.ndarray

    @classmethod
    def chain(cls, spec: ChainSpec) -> QuadraticInteraction:
        n = spec.n_sites
        off = np.eye(n, k=1) + np.eye(n, k=-1)
        return cls(spec.epsilon * off, spec.eta * off)


class FockExpectation:
    """Expectation values in a truncated-Fock density matrix."""

    def __init__(self, rho: np.ndarray):
        self.rho = rho

    def pair(self, left, right) -> complex:
        return expectation(self.rho, left @ right)

    @staticmethod
    def dag(op):
        return op.getH() if sp.issparse(op) else op.conj().T

    @staticmethod
    def commutator(h, op):
        return h @ op - op @ h


class GaussianExpectation:
    """Expectation values of products of linear operators from second moments."""

    def __init__(self, moments: ModeMoments):
        self.number = moments.number
        self.anomalous = moments.anomalous

    def pair(self, left: LinearOp, right: LinearOp) -> complex:
        n, m = self.number, self.anomalous
        eye = np.eye(len(n))
        # <a_i a_j> = M_ij, <a_i a_j^dag> = N_ji + delta_ij, <a_i^dag a_j> = N_ij, <a_i^dag a_j^dag> = M_ij^*
        return complex(
            left.u @ m @ right.u
            + left.u @ (n.T + eye) @ right.v
            + left.v @ n @ right.u
            + left.v @ m.conj() @ right.v
        )

    @staticmethod
    def dag(op: LinearOp) -> LinearOp:
        return op.dag()

    @staticmethod
    def commutator(h: QuadraticInteraction, op: LinearOp) -> LinearOp:
        a, b = h.hopping, h.pairing
        return LinearOp(-a.T @ op.u + b.conj().T @ op.v, -b.T @ op.u + a.conj().T @ op.v)


def gaussian_jumps(spec: ChainSpec) -> list[JumpChannel]:
    """Bath channels with the lowering operators in linear-operator form."""
    occ = spec.occupations
    return [
        JumpChannel(site, LinearOp.lowering(site, spec.n_sites), spec.frequencies[site],
                    spec.gamma * (nbar + 1), spec.gamma * nbar)
        for site, nbar in zip(spec.bath_sites, (occ.n_cold, occ.n_hot))
    ]


# -- general eigenoperator formulas ------------------------------------------

def heat_rate_general(jumps: Sequence[JumpChannel], moments) -> np.ndarray:
    """Heat entering through each bath, ``sum_k w_k (g+ <L L^dag> - g- <L^dag L>)``.

    Channels are grouped by ``site`` in order of first appearance.
    """
    sites: list[int] = []
    totals: list[float] = []
    for ch in jumps:
        op, op_dag = ch.operator, moments.dag(ch.operator)
        rate = ch.bohr_frequency * (ch.rate_up * moments.pair(op, op_dag) - ch.rate_down * moments.pair(op_dag, op))
        if ch.site not in sites:
            sites.append(ch.site)
            totals.append(0.0)
        totals[sites.index(ch.site)] += rate.real
    return np.array(totals)


def work_rate_general(jumps: Sequence[JumpChannel], h_int, moments) -> float:
    """Work rate ``Re sum (g- <L^dag F> - g+ <F L^dag>)`` with ``F = [H_I, L]``."""
    total = 0.0
    for ch in jumps:
        op_dag = moments.dag(ch.operator)
        f = moments.commutator(h_int, ch.operator)
        total += (ch.rate_down * moments.pair(op_dag, f) - ch.rate_up * moments.pair(f, op_dag)).real
    return float(total)


# -- Gaussian specialisations -------------------------------------------------

@dataclass(frozen=True)
class Rates:
    q_cold: float
    q_hot: float
    w_dot: float

    def as_tuple(self) -> tuple[float, float, float]:
        return self.q_cold, self.q_hot, self.w_dot


def gaussian_rates(spec: ChainSpec, moments: ModeMoments) -> Rates:
    """Bath heat currents ``gamma w_i (n_i - <a_i^dag a_i>)`` and the work rate.

    The occupation deficit is taken from ``moments.excess`` when available so
    that currents far below the thermal occupations keep full precision.
    """
    occ = spec.occupations
    heats = []
    for site, nbar in zip(spec.bath_sites, (occ.n_cold, occ.n_hot)):
        if moments.excess is not None:
            deficit = -moments.excess[site, site].real
        else:
            deficit = nbar - moments.number[site, site].real
        heats.append(float(spec.gamma * spec.frequencies[site] * deficit))
    w = work_rate_general(gaussian_jumps(spec), QuadraticInteraction.chain(spec), GaussianExpectation(moments))
    return Rates(heats[0], heats[1], w)


def internal_current(spec: ChainSpec, moments: ModeMoments) -> float:
    """Energy flowing into oscillator 1 from oscillator 2 through the coupling.

    Equals ``i <[H_S, H_1]> = 2 w_1 eps Im<a_1^dag a_2>``; at steady state it
    balances the bath current, ``-Q_1``.
    """
    if spec.n_sites != 2 or spec.eta != 0:
        raise WrongShape("internal current is defined for N=2, eta=0")
    return float(2 * spec.frequencies[0] * spec.epsilon * moments.number[0, 1].imag)


def large_gamma_rates(spec: ChainSpec) -> Rates:
    """Leading ``1/gamma`` behaviour of the two-oscillator rates.

    Pair creation (``eta``) heats both oscillators, so it drains heat into
    both baths and costs work; the ``eta = 0`` limit matches the exact
    result with ``Delta ~ gamma``.
    """
    if spec.n_sites != 2:
        raise WrongShape("large-gamma asymptotics cover N=2 only")
    w1, w2 = spec.frequencies
    occ = spec.occupations
    n1, n2 = occ.n_cold, occ.n_hot
    hop = spec.epsilon**2 * (n1 - n2)
    pair = spec.eta**2 * (n1 + n2 + 1)
    g = spec.gamma
    q1 = 2 * w1 / g * (hop - pair)
    q2 = -2 * w2 / g * (hop + pair)
    w = -2 / g * (hop * (w1 - w2) - pair * (w1 + w2))
    return Rates(q1, q2, w)


def closed_form_rates(spec: ChainSpec) -> Rates:
    """Exact two-oscillator rates for excitation-conserving coupling."""
    if spec.n_sites != 2 or spec.eta != 0:
        raise WrongShape("closed-form rates cover N=2, eta=0")
    w1, w2 = spec.frequencies
    occ = spec.occupations
    n1, n2 = occ.n_cold, occ.n_hot
    delta2 = spec.gamma**2 + 4 * spec.epsilon**2 + (w1 - w2) ** 2
    pre = 2 * spec.gamma * spec.epsilon**2 / delta2 * (n1 - n2)
    return Rates(pre * w1, -pre * w2, -pre * (w1 - w2))


def entropy_production_rate(q_cold: float, q_hot: float, spec: ChainSpec) -> float:
    """Steady-state ``Pi = -beta_1 Q_1 - beta_N Q_N`` (the system entropy is stationary)."""
    b1, bn = spec.betas
    return float(-b1 * q_cold - bn * q_hot)


def classify(q_cold: float, q_hot: float, w: float, spec: ChainSpec) -> tuple[Regime, Optional[float]]:
    """Operating regime and its figure of merit (COP or efficiency).

    Rates below ``1e-12 * max(|Q_1|, |Q_N|, |W|, gamma w_N)`` count as zero.
    The colder bath plays the role of the cold reservoir.
    """
    scale = max(abs(q_cold), abs(q_hot), abs(w), spec.gamma * spec.frequencies[-1])
    tol = 1e-12 * scale
    qc, qh = (q_cold, q_hot) if spec.t_cold <= spec.t_hot else (q_hot, q_cold)
    zc, zh, zw = abs(qc) < tol, abs(qh) < tol, abs(w) < tol
    if zc and zh and zw:
        if (spec.epsilon == 0 and spec.eta == 0) or spec.t_cold == spec.t_hot:
            return Regime.DEGENERATE, None
        t_lo, t_hi = sorted(spec.temperatures)
        return Regime.CARNOT_POINT, 1 - t_lo / t_hi
    if zw:
        return Regime.EQUAL_FREQUENCY, None
    if qc > 0 and qh < 0 and w > 0:
        return Regime.REFRIGERATOR, qc / w
    if qc < 0 and qh > 0 and w < 0:
        return Regime.ENGINE, abs(w) / qh
    if qc < 0 and qh > 0 and w > 0:
        return Regime.ACCELERATOR, None
    if (qc < 0 or zc) and (qh < 0 or zh) and w > 0:
        return Regime.HEATER, None
    raise InconsistentSigns(f"no regime for Q_c={qc:.3e}, Q_h={qh:.3e}, W={w:.3e}")


def steady_report(spec: ChainSpec) -> tuple[ThermoReport, CovarianceState]:
    """Solve the Gaussian steady state and assemble every rate and the regime."""
    cov = steady_state(spec)
    moments = mode_moments(cov, spec)
    rates = gaussian_rates(spec, moments)
    regime, fom = classify(*rates.as_tuple(), spec)
    current = internal_current(spec, moments) if spec.n_sites == 2 and spec.eta == 0 else None
    report = ThermoReport(
        q_dot=(rates.q_cold, rates.q_hot),
        w_dot=rates.w_dot,
        entropy_rate=entropy_production_rate(rates.q_cold, rates.q_hot, spec),
        regime=regime,
        figure_of_merit=fom,
        internal_current=current,
    )
    return report, cov
