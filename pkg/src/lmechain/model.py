"""Physical description of a boundary-driven oscillator chain.

Units: hbar = k_B = 1, unit masses. Baths always sit on the first and last site.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace


import numpy as np

from .errors import DomainError


def bose_einstein(omega: float, temperature: float) -> float:
    """Mean occupation ``1/(exp(omega/T) - 1)`` of a thermal bosonic mode."""
    if not omega > 0:
        raise DomainError(f"omega must be positive, got {omega!r}")
    if not temperature > 0:
        raise DomainError(f"temperature must be positive, got {temperature!r}")
    # expm1 keeps precision when omega/T is small; overflow to inf gives 0.
    with np.errstate(over="ignore"):
        return float(1.0 / np.expm1(omega / temperature))


def linear_profile(omega_first: float, omega_last: float, n_sites: int) -> np.ndarray:
    """Frequencies interpolating linearly between the two chain ends."""
    if n_sites < 2:
        raise DomainError(f"n_sites must be at least 2, got {n_sites}")
    i = np.arange(1, n_sites + 1)
    profile = ((n_sites - i) * omega_first + (i - 1) * omega_last) / (n_sites - 1)
    # pin the endpoints so they are bit-identical to the inputs
    profile[0], profile[-1] = omega_first, omega_last
    return profile


@dataclass(frozen=True)
class BathOccupations:
    n_cold: float
    n_hot: float

    def __post_init__(self):
        if self.n_cold < 0 or self.n_hot < 0:
            raise DomainError("bath occupations must be nonnegative")


@dataclass(frozen=True)
class ChainSpec:
    """Chain of ``n_sites`` oscillators with nearest-neighbour couplings.

    ``epsilon`` multiplies the excitation-conserving hopping terms and ``eta``
    the pair-creation (counter-rotating) terms. Site 1 couples to a bath at
    ``t_cold`` and site N to a bath at ``t_hot``, both with rate ``gamma``.
    """

    n_sites: int
    frequencies: tuple[float, ...]
    epsilon: float
    eta: float
    gamma: float
    t_cold: float
    t_hot: float
    bath_sites: tuple[int, ...] = field(default=None)

    def __post_init__(self):
        freqs = tuple(float(w) for w in np.atleast_1d(np.asarray(self.frequencies, dtype=float)))
        object.__setattr__(self, "frequencies", freqs)
        if int(self.n_sites) != self.n_sites or self.n_sites < 2:
            raise DomainError(f"n_sites must be an integer >= 2, got {self.n_sites!r}")
        if len(freqs) != self.n_sites:
            raise DomainError(f"expected {self.n_sites} frequencies, got {len(freqs)}")
        if not all(np.isfinite(w) and w > 0 for w in freqs):
            raise DomainError("all frequencies must be positive and finite")
        if not (self.epsilon >= 0 and self.eta >= 0):
            raise DomainError("epsilon and eta must be nonnegative")
        for name in ("gamma", "t_cold", "t_hot"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise DomainError(f"{name} must be positive, got {value!r}")
        ends = (0, self.n_sites - 1)
        if self.bath_sites is None:
            object.__setattr__(self, "bath_sites", ends)
        elif tuple(self.bath_sites) != ends:
            raise DomainError("baths attach only to the first and last site")

    @classmethod
    def linear(cls, n_sites: int, omega_first: float, omega_last: float, **kwargs) -> ChainSpec:
        return cls(n_sites=n_sites, frequencies=tuple(linear_profile(omega_first, omega_last, n_sites)), **kwargs)

    @classmethod
    def two_site(cls, omega1: float, omega2: float, *, epsilon: float, gamma: float,
                 t_cold: float, t_hot: float, eta: float = 0.0) -> ChainSpec:
        return cls(n_sites=2, frequencies=(omega1, omega2), epsilon=epsilon, eta=eta,
                   gamma=gamma, t_cold=t_cold, t_hot=t_hot)

    @property
    def omega(self) -> np.ndarray:
        return np.asarray(self.frequencies)

    @property
    def temperatures(self) -> tuple[float, float]:
        return self.t_cold, self.t_hot

    @property
    def betas(self) -> tuple[float, float]:
        return 1.0 / self.t_cold, 1.0 / self.t_hot

    @property
    def occupations(self) -> BathOccupations:
        w = self.frequencies
        return BathOccupations(bose_einstein(w[0], self.t_cold), bose_einstein(w[-1], self.t_hot))

    @property
    def bath_frequencies(self) -> tuple[float, float]:
        return self.frequencies[0], self.frequencies[-1]

    def with_(self, **changes) -> ChainSpec:
        """Copy with some fields replaced (validation reruns)."""
        changes.setdefault("bath_sites", None)
        return replace(self, **changes)
