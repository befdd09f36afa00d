"""Spectral theory of the 2x2 Hermitian mode blocks.

In the mode basis the Hessian at the rotating wave splits into blocks

    B_k = -alpha_k I + gamma_k (iJ) + 2 mu^2 h'(mu^2) diag(1, 0),

with ``alpha_k = 4 cos(zeta) sin^2(k zeta / 2)`` and
``gamma_k = 2 sin(k zeta) sin(zeta)``; the linearization block at frequency
nu is ``m_k(nu) = -nu (iJ) + B_k``.  Everything downstream (Morse indices,
index jumps, critical frequencies, degenerate amplitudes, linear stability)
is closed form in these coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.optimize import brentq

from .model import RingSystem, block_symplectic, hessian_V, standing_wave

__all__ = [
    "SingularBlock",
    "SearchRangeExhausted",
    "BlockCoefficients",
    "SpectralSummary",
    "CriticalFrequencies",
    "StabilityVerdict",
    "coefficients",
    "block_B",
    "block_m",
    "det_trace",
    "spectral_summary",
    "morse_index",
    "critical_frequencies",
    "sigma",
    "eta",
    "mu_h_prime",
    "degenerate_amplitudes",
    "kernel_vector",
    "full_spectrum_oracle",
    "spectrum_max_real",
    "linear_stability",
]

_ZERO_SNAP = 1e-12      # coefficients below this are structural zeros
_SINGULAR_TOL = 1e-12   # |det| below this counts as a singular block
_DEGENERATE_TOL = 1e-12  # radicand below this counts as a double root

# Hermitian realization of the rotation generator
IJ = np.array([[0.0, -1.0j], [1.0j, 0.0]])


class SingularBlock(ArithmeticError):
    """Raised when a Morse index is requested at a singular block."""


class SearchRangeExhausted(RuntimeError):
    """Root search for a custom potential hit the end of its bracket range."""


@dataclass(frozen=True)
class BlockCoefficients:
    """Closed-form coefficients of mode k; ``delta`` is None when alpha_k = 0."""

    k: int
    alpha: float
    gamma: float
    delta: float | None


def coefficients(n: int, k: int) -> BlockCoefficients:
    """Coefficients alpha_k, gamma_k and delta_k = (alpha^2-gamma^2)/(2 alpha).

    Values within 1e-12 of zero are snapped to exact zeros so that the
    structural cases (k = n for every n, all k for n = 4) are handled
    exactly; delta is absent at those.
    """
    if not 1 <= k <= n:
        raise ValueError(f"k must be in 1..{n}, got {k}")
    zeta = 2.0 * np.pi / n
    alpha = float(4.0 * np.cos(zeta) * np.sin(k * zeta / 2.0) ** 2)
    gamma = float(2.0 * np.sin(k * zeta) * np.sin(zeta))
    if abs(alpha) < _ZERO_SNAP:
        alpha = 0.0
    if abs(gamma) < _ZERO_SNAP:
        gamma = 0.0
    if alpha == 0.0:
        delta = None
    else:
        delta = (alpha ** 2 - gamma ** 2) / (2.0 * alpha)
        # |alpha| = |gamma| at k in {2, n-2}; keep that delta an exact zero
        if abs(delta) < _ZERO_SNAP:
            delta = 0.0
    return BlockCoefficients(k=k, alpha=alpha, gamma=gamma, delta=delta)


def mu_h_prime(ring: RingSystem) -> float:
    """The combination mu^2 h'(mu^2) that all regime conditions compare."""
    return ring.mu ** 2 * float(ring.potential.h_prime(ring.mu ** 2))


def block_B(ring: RingSystem, k: int) -> np.ndarray:
    """Time-independent Hermitian block of the Hessian on mode k."""
    c = coefficients(ring.n, k)
    B = -c.alpha * np.eye(2, dtype=complex) + c.gamma * IJ
    B[0, 0] += 2.0 * mu_h_prime(ring)
    return B


def block_m(ring: RingSystem, k: int, nu: float) -> np.ndarray:
    """Linearization block m_k(nu) = -nu (iJ) + B_k."""
    return -nu * IJ + block_B(ring, k)


def det_trace(ring: RingSystem, k: int, nu: float) -> tuple[float, float]:
    """Closed-form determinant and trace of m_k(nu):

    d = -2 alpha_k mu^2 h' + alpha_k^2 - (gamma_k - nu)^2,
    T = 2 mu^2 h' - 2 alpha_k.
    """
    c = coefficients(ring.n, k)
    x = mu_h_prime(ring)
    d = -2.0 * c.alpha * x + c.alpha ** 2 - (c.gamma - nu) ** 2
    return d, 2.0 * x - 2.0 * c.alpha


@dataclass(frozen=True)
class SpectralSummary:
    det: float
    trace: float
    eigenvalues: tuple[float, float]
    morse_index: int


def spectral_summary(m: np.ndarray) -> SpectralSummary:
    """Determinant, trace, real eigenvalues and Morse index of a Hermitian 2x2."""
    ev = np.linalg.eigvalsh(m)
    return SpectralSummary(
        det=float(ev[0] * ev[1]),
        trace=float(ev.sum()),
        eigenvalues=(float(ev[0]), float(ev[1])),
        morse_index=int((ev < 0).sum()),
    )


def morse_index(ring: RingSystem, k: int, nu: float) -> int:
    """Number of negative eigenvalues of m_k(nu).

    Raises
    ------
    SingularBlock
        When |det m_k(nu)| <= 1e-12; step off the critical value first.
    """
    d, T = det_trace(ring, k, nu)
    if abs(d) <= _SINGULAR_TOL:
        raise SingularBlock(f"m_{k}({nu}) is singular (det = {d:.3e})")
    if d < 0:
        return 1
    return 2 if T < 0 else 0


class CriticalFrequencies(NamedTuple):
    nus: tuple[float, ...]
    degenerate: bool


def critical_frequencies(ring: RingSystem, k: int) -> CriticalFrequencies:
    """Real roots of det m_k(nu) = 0, i.e. nu = gamma_k +- sqrt(radicand)
    with radicand = alpha_k (alpha_k - 2 mu^2 h').

    Empty when the radicand is negative; a double root (radicand within
    1e-12 of zero) is reported as a single degenerate value.  Mode k = n is
    rejected: its only root is nu = 0 and carries no bifurcation.
    """
    if not 1 <= k <= ring.n - 1:
        raise ValueError(f"k must be in 1..{ring.n - 1}; mode k = n is handled separately")
    c = coefficients(ring.n, k)
    rad = c.alpha * (c.alpha - 2.0 * mu_h_prime(ring))
    if rad < -_DEGENERATE_TOL:
        return CriticalFrequencies((), False)
    if rad <= _DEGENERATE_TOL:
        return CriticalFrequencies((c.gamma,), True)
    root = np.sqrt(rad)
    return CriticalFrequencies((c.gamma - root, c.gamma + root), False)


def sigma(ring: RingSystem) -> int:
    """Orientation sign sgn(h'(mu^2)) carried by the fully symmetric block."""
    return int(np.sign(ring.potential.h_prime(ring.mu ** 2)))


def eta(ring: RingSystem, k: int, nu0: float) -> int:
    """Signed Morse-index jump sigma * (n_k(nu0 - rho) - n_k(nu0 + rho)).

    The probe distance rho is min(1e-4 * max(1, |nu0|), |nu_+ - nu_-| / 10)
    so it never straddles both critical values.  Degenerate double roots
    jump by zero.
    """
    cf = critical_frequencies(ring, k)
    if cf.degenerate or not cf.nus:
        return 0
    gap = cf.nus[-1] - cf.nus[0]
    rho = min(1e-4 * max(1.0, abs(nu0)), gap / 10.0)
    s = sigma(ring)
    return s * (morse_index(ring, k, nu0 - rho) - morse_index(ring, k, nu0 + rho))


def degenerate_amplitudes(n: int, k: int, potential,
                          s_range: tuple[float, float] = (0.0, 100.0),
                          samples: int = 4096) -> tuple[float, ...]:
    """Amplitudes mu > 0 at which B_k is singular, i.e. mu^2 h'(mu^2) = delta_k.

    Cubic and saturable potentials are solved in closed form; other
    potentials are handled by a sign-change scan of s -> s h'(s) - delta_k
    over ``s_range`` followed by bracketed root refinement to 1e-12.

    Raises
    ------
    SearchRangeExhausted
        For custom potentials, when no root was bracketed but the scan is
        still approaching zero at the right end of the range (the answer
        may lie beyond it).  An empty result means no root in the range
        with the function bounded away from zero.
    """
    c = coefficients(n, k)
    if c.delta is None:
        raise ValueError(f"delta_{k} is undefined (alpha_{k} = 0); no degenerate amplitude")
    delta = c.delta
    kind = getattr(potential, "kind", "custom")
    if kind == "cubic":
        return (float(np.sqrt(delta)),) if delta > 0 else ()
    if kind == "saturable":
        # s/(1+s)^2 = -delta  <=>  delta s^2 + (2 delta + 1) s + delta = 0
        if delta >= 0 or delta < -0.25:
            return ()
        if delta == -0.25:
            return (1.0,)
        disc = np.sqrt(4.0 * delta + 1.0)
        s_lo = (-(2.0 * delta + 1.0) + disc) / (2.0 * delta)
        s_hi = (-(2.0 * delta + 1.0) - disc) / (2.0 * delta)
        return tuple(sorted(float(np.sqrt(s)) for s in (s_lo, s_hi)))

    def f(s):
        return float(s * potential.h_prime(s) - delta)

    lo, hi = s_range
    grid = np.linspace(max(lo, 0.0), hi, samples)
    vals = np.array([f(s) for s in grid])
    roots = []
    for i in range(len(grid) - 1):
        if vals[i] == 0.0 and grid[i] > 0:
            roots.append(grid[i])
        elif vals[i] * vals[i + 1] < 0:
            roots.append(brentq(f, grid[i], grid[i + 1], xtol=1e-12, rtol=8.9e-16))
    if not roots:
        closest = int(np.argmin(np.abs(vals)))
        if closest == len(grid) - 1:
            raise SearchRangeExhausted(
                f"no root of s*h'(s) = delta_{k} bracketed in {s_range}; "
                "|s*h'(s) - delta| is still shrinking at the range end")
        return ()
    return tuple(sorted(float(np.sqrt(s)) for s in roots if s > 0))


def kernel_vector(ring: RingSystem, k: int, nu: float) -> np.ndarray:
    """Unit eigenvector of m_k(nu) for its smallest-magnitude eigenvalue."""
    m = block_m(ring, k, nu)
    ev, vec = np.linalg.eigh(m)
    i = int(np.argmin(np.abs(ev)))
    return vec[:, i]


def full_spectrum_oracle(ring: RingSystem) -> np.ndarray:
    """Eigenvalues (with multiplicity) of the 2n x 2n linearization -JJ D2V(a).

    Independent cross-check for the block analysis: the spectrum should be
    the multiset {i nu : det m_k(nu) = 0, k = 1..n}.
    """
    a_bar, _ = standing_wave(ring)
    A = -block_symplectic(ring.n) @ hessian_V(ring, a_bar)
    return np.linalg.eigvals(A)


def spectrum_max_real(eigenvalues: np.ndarray, cluster_radius: float = 1e-6) -> float:
    """Largest |real part| of the spectrum, measured on cluster means.

    Defective double eigenvalues (the rotation zero; every root when n = 4)
    split by O(sqrt(eps)) under rounding, so raw real parts of a stable
    spectrum can reach ~1e-7.  Averages of eigenvalue clusters perturb
    linearly, so comparing cluster means against a 1e-8 threshold is
    numerically sound.
    """
    ev = np.asarray(eigenvalues, dtype=complex)
    remaining = list(range(len(ev)))
    worst = 0.0
    while remaining:
        i = remaining.pop(0)
        cluster = [ev[i]]
        rest = []
        for j in remaining:
            if abs(ev[j] - ev[i]) < cluster_radius:
                cluster.append(ev[j])
            else:
                rest.append(j)
        remaining = rest
        worst = max(worst, abs(np.mean(cluster).real))
    return float(worst)


@dataclass(frozen=True)
class StabilityVerdict:
    stable: bool
    margin: float
    method: str


def linear_stability(ring: RingSystem) -> StabilityVerdict:
    """Closed-form linear stability of the rotating wave.

    n >= 5: stable iff mu^2 h'(mu^2) < alpha_1 / 2;
    n  = 3: stable iff alpha_1 / 2 < mu^2 h'(mu^2);
    n  = 4: every block determinant is -(gamma_k - nu)^2 with real double
            roots, so the spectrum is purely imaginary for every amplitude.
    The margin is the distance of mu^2 h'(mu^2) to the threshold.
    """
    x = mu_h_prime(ring)
    if ring.n == 4:
        return StabilityVerdict(stable=True, margin=np.inf, method="real-roots-n4")
    half_alpha1 = coefficients(ring.n, 1).alpha / 2.0
    if ring.n == 3:
        return StabilityVerdict(stable=bool(x > half_alpha1),
                                margin=float(x - half_alpha1), method="threshold-n3")
    return StabilityVerdict(stable=bool(x < half_alpha1),
                            margin=float(half_alpha1 - x), method="threshold")
