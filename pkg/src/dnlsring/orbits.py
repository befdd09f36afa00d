"""Numerical verification of the predicted bifurcations.

Periodic orbits of ``JJ du/dt = grad_V(u)`` with frequency nu are zeros of
the 2*pi-periodic residual ``F(x) = -nu JJ dx/dt + grad_V(x)``, represented
here by a truncated Fourier series with modes |l| <= p.  The module provides

* a conservative implicit-midpoint time integrator,
* the collocation residual and its exact linearization,
* a gauged Newton solver for periodic orbits,
* pseudo-arclength continuation of branches away from a bifurcation point,
  restricted to the isotropy subspace of the bifurcating mode.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import blocks
from .model import (J2, RingSystem, _gradient_sites, _hessian_apply_sites,
                    block_symplectic, hessian_V, vector_field)
from .symmetry import t_k_matrix

__all__ = [
    "NoConvergence",
    "SingularJacobian",
    "FourierOrbit",
    "BranchPoint",
    "ContinuationBranch",
    "integrate",
    "residual",
    "linearized_residual",
    "orbit_residual_norm",
    "orthogonality_check",
    "newton_orbit",
    "continue_branch",
    "extrapolate_nu_to_zero",
]

_REALITY_TOL = 1e-14
_TAIL_TOL = 1e-12


class NoConvergence(RuntimeError):
    """A Newton iteration failed to reach its tolerance."""


class SingularJacobian(RuntimeError):
    """The gauged Jacobian is rank deficient, as happens exactly at a
    bifurcation point.  ``direction`` holds the near-null direction."""

    def __init__(self, message: str, direction: np.ndarray | None = None):
        super().__init__(message)
        self.direction = direction


@dataclass
class FourierOrbit:
    """Truncated Fourier representation of a 2*pi-periodic orbit.

    ``coeffs`` has shape (2p+1, 2n) holding the modes l = -p..p of the real
    signal, so ``coeffs[p+l]`` is mode l and ``coeffs[p-l] = conj(coeffs[p+l])``.
    """

    nu: float
    coeffs: np.ndarray
    residual_norm: float | None = None
    newton_iterations: int | None = field(default=None, compare=False)

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=complex)
        if self.coeffs.ndim != 2 or self.coeffs.shape[0] % 2 != 1:
            raise ValueError("coeffs must have shape (2p+1, 2n)")
        if self.coeffs.shape[1] % 2 != 0:
            raise ValueError("coeffs must have an even number of columns")
        if not np.all(np.isfinite(self.coeffs.real)) \
                or not np.all(np.isfinite(self.coeffs.imag)):
            raise ValueError("coeffs contain non-finite entries")
        mismatch = np.abs(self.coeffs[::-1].conj() - self.coeffs).max()
        if mismatch > _REALITY_TOL:
            raise ValueError(
                f"reality condition x_-l = conj(x_l) violated by {mismatch:.3e}")

    @property
    def p(self) -> int:
        return (self.coeffs.shape[0] - 1) // 2

    @property
    def n(self) -> int:
        return self.coeffs.shape[1] // 2

    @property
    def amplitude(self) -> float:
        """l2 norm of all oscillating (l != 0) modes; group invariant."""
        mask = np.ones(self.coeffs.shape[0], dtype=bool)
        mask[self.p] = False
        return float(np.sqrt((np.abs(self.coeffs[mask]) ** 2).sum()))

    def mode(self, l: int) -> np.ndarray:
        return self.coeffs[self.p + l]

    def sample(self, num: int | None = None) -> np.ndarray:
        """Real samples on a uniform grid of [0, 2*pi)."""
        num = num or _default_samples(self.p)
        return _modes_to_samples(self.coeffs, num)

    def transformed(self, shift: int, theta: float, phi: float) -> "FourierOrbit":
        """Orbit moved by the group action (cyclic shift, rotation, time shift)."""
        from .symmetry import group_action
        moved = group_action(self.n, shift, theta, phi, self.coeffs, fourier=True)
        return replace(self, coeffs=moved)

    @classmethod
    def from_state(cls, state, nu: float, p: int) -> "FourierOrbit":
        """Constant-in-time orbit at the given state."""
        state = np.asarray(state, dtype=float)
        coeffs = np.zeros((2 * p + 1, state.size), dtype=complex)
        coeffs[p] = state
        return cls(nu=nu, coeffs=coeffs)

    @classmethod
    def from_samples(cls, samples, nu: float, p: int) -> "FourierOrbit":
        samples = np.asarray(samples, dtype=float)
        return cls(nu=nu, coeffs=_samples_to_modes(samples, p))


def _default_samples(p: int) -> int:
    # >= 4p+1 keeps the retained gradient modes alias-free for a cubic h
    return max(4 * p + 1, 128)


def _modes_to_samples(coeffs: np.ndarray, num: int) -> np.ndarray:
    p = (coeffs.shape[0] - 1) // 2
    if num < 2 * p + 1:
        raise ValueError("need at least 2p+1 samples")
    ls = np.arange(-p, p + 1)
    spread = np.zeros((num, coeffs.shape[1]), dtype=complex)
    spread[ls % num] = coeffs
    return (num * np.fft.ifft(spread, axis=0)).real


def _samples_to_modes(samples: np.ndarray, p: int) -> np.ndarray:
    num = samples.shape[0]
    F = np.fft.fft(samples, axis=0) / num
    ls = np.arange(-p, p + 1)
    return F[ls % num]


def _apply_iJJ(coeffs: np.ndarray) -> np.ndarray:
    """(i JJ) applied to every mode vector of shape (..., 2n)."""
    m = coeffs.shape[-1] // 2
    stacked = coeffs.reshape(coeffs.shape[:-1] + (m, 2))
    return 1j * (stacked @ J2.T).reshape(coeffs.shape)


def _residual_modes(ring: RingSystem, coeffs: np.ndarray, nu: float,
                    num: int) -> np.ndarray:
    p = (coeffs.shape[0] - 1) // 2
    X = _modes_to_samples(coeffs, num).reshape(num, ring.n, 2)
    G = _gradient_sites(ring, X).reshape(num, 2 * ring.n)
    g = _samples_to_modes(G, p)
    ls = np.arange(-p, p + 1)
    return -nu * ls[:, None] * _apply_iJJ(coeffs) + g


def residual(ring: RingSystem, orbit: FourierOrbit,
             num_samples: int | None = None) -> np.ndarray:
    """Per-mode residual F_l = -l nu (i JJ) x_l + g_l for |l| <= p.

    ``g_l`` are the Fourier modes of grad_V along the orbit, computed by a
    dealiased discrete transform of the time-sampled gradient (at least
    4p+1 samples).
    """
    num = num_samples or _default_samples(orbit.p)
    return _residual_modes(ring, orbit.coeffs, orbit.nu, num)


def linearized_residual(ring: RingSystem, orbit: FourierOrbit,
                        dcoeffs: np.ndarray, dnu: float = 0.0,
                        num_samples: int | None = None) -> np.ndarray:
    """Exact directional derivative of the residual along (dcoeffs, dnu).

    ``dcoeffs`` must describe a real perturbation, i.e. satisfy the same
    reality condition as orbit coefficients.
    """
    if np.abs(dcoeffs[::-1].conj() - dcoeffs).max() > 1e-12 * (1 + np.abs(dcoeffs).max()):
        raise ValueError("dcoeffs must satisfy the reality condition")
    num = num_samples or _default_samples(orbit.p)
    p = orbit.p
    X = _modes_to_samples(orbit.coeffs, num).reshape(num, ring.n, 2)
    dX = _modes_to_samples(dcoeffs, num).reshape(num, ring.n, 2)
    dG = _hessian_apply_sites(ring, X, dX).reshape(num, 2 * ring.n)
    dg = _samples_to_modes(dG, p)
    ls = np.arange(-p, p + 1)[:, None]
    return (-orbit.nu * ls * _apply_iJJ(dcoeffs)
            - dnu * ls * _apply_iJJ(orbit.coeffs) + dg)


def orbit_residual_norm(F: np.ndarray) -> float:
    """l2 norm over all retained modes of a residual array."""
    return float(np.sqrt((np.abs(F) ** 2).sum()))


def orthogonality_check(ring: RingSystem, orbit: FourierOrbit) -> tuple[float, float]:
    """Time integrals of <F(x), dx/dt> and <F(x), -JJ x> over one period.

    Both vanish for every 2*pi-periodic trial orbit, solution or not: the
    first because grad_V is a gradient, the second because V is rotation
    invariant.  Sampling is oversized so the quadrature error stays below
    the 1e-10 check level even for non-polynomial potentials.
    """
    num = max(8 * orbit.p + 1, 257)
    F = _residual_modes(ring, orbit.coeffs, orbit.nu, num)
    ls = np.arange(-orbit.p, orbit.p + 1)[:, None]
    xdot = 1j * ls * orbit.coeffs
    rot = -_apply_iJJ(orbit.coeffs) / 1j  # -JJ x per mode
    c1 = 2.0 * np.pi * np.sum(F * xdot.conj()).real
    c2 = 2.0 * np.pi * np.sum(F * rot.conj()).real
    return float(c1), float(c2)


# ---------------------------------------------------------------------------
# packing of real unknowns


def _pack(coeffs: np.ndarray) -> np.ndarray:
    """[x_0, Re x_1, Im x_1, ..., Re x_p, Im x_p] as one real vector."""
    p = (coeffs.shape[0] - 1) // 2
    parts = [coeffs[p].real]
    for l in range(1, p + 1):
        parts.append(coeffs[p + l].real)
        parts.append(coeffs[p + l].imag)
    return np.concatenate(parts)


def _unpack(z: np.ndarray, p: int, width: int) -> np.ndarray:
    coeffs = np.zeros((2 * p + 1, width), dtype=complex)
    coeffs[p] = z[:width]
    for l in range(1, p + 1):
        re = z[(2 * l - 1) * width:(2 * l) * width]
        im = z[(2 * l) * width:(2 * l + 1) * width]
        coeffs[p + l] = re + 1j * im
        coeffs[p - l] = re - 1j * im
    return coeffs


def _l2_row(coeffs: np.ndarray) -> np.ndarray:
    """Packed row so that row . packed(dx) = Re sum_l <dx_l, t_l>."""
    p = (coeffs.shape[0] - 1) // 2
    parts = [coeffs[p].real]
    for l in range(1, p + 1):
        parts.append(2.0 * coeffs[p + l].real)
        parts.append(2.0 * coeffs[p + l].imag)
    return np.concatenate(parts)


def _stack_residual(F: np.ndarray) -> np.ndarray:
    p = (F.shape[0] - 1) // 2
    parts = [F[p].real]
    for l in range(1, p + 1):
        parts.append(F[p + l].real)
        parts.append(F[p + l].imag)
    return np.concatenate(parts)


def _tangent_time(coeffs: np.ndarray) -> np.ndarray:
    p = (coeffs.shape[0] - 1) // 2
    return 1j * np.arange(-p, p + 1)[:, None] * coeffs


def _tangent_rotation(coeffs: np.ndarray) -> np.ndarray:
    return -_apply_iJJ(coeffs) / 1j


# ---------------------------------------------------------------------------
# gauged Newton solver in the full coefficient space


def newton_orbit(ring: RingSystem, initial: FourierOrbit, *,
                 fix_nu: bool = True, amplitude: float | None = None,
                 tol: float = 1e-10, max_iter: int = 50,
                 adapt_p: bool = True, p_max: int = 256,
                 num_samples: int | None = None) -> FourierOrbit:
    """Solve the truncated periodic-orbit system F = 0 by gauged Newton.

    Two scalar gauge conditions remove the time-translation and rotation
    degeneracies: every update is orthogonal (in the L2 pairing) to the
    group tangents dx/dt and -JJ x at the current iterate.  With
    ``fix_nu=True`` the frequency stays at ``initial.nu``; passing
    ``amplitude`` instead frees nu and pins the oscillating-mode amplitude,
    which selects a nontrivial orbit near a bifurcation.

    Raises
    ------
    SingularJacobian
        When the gauged Jacobian is rank deficient, as happens exactly at a
        critical frequency of the trivial solution.
    NoConvergence
        After ``max_iter`` iterations above ``tol``, or when the Fourier
        tail still exceeds 1e-12 at ``p_max``.
    """
    if amplitude is not None and fix_nu:
        raise ValueError("an amplitude constraint requires a free frequency")
    if amplitude is None and not fix_nu:
        raise ValueError("a free frequency requires an amplitude constraint")
    p = initial.p
    coeffs = initial.coeffs.copy()
    nu = float(initial.nu)
    total_iters = 0
    while True:
        coeffs, nu, iters = _newton_full(ring, coeffs, nu, fix_nu, amplitude,
                                         tol, max_iter, num_samples)
        total_iters += iters
        tail = 0.0 if p == 0 else np.abs(coeffs[[0, -1]]).max()
        if not adapt_p or tail <= _TAIL_TOL:
            break
        if 2 * p > p_max:
            raise NoConvergence(
                f"Fourier tail {tail:.2e} still above {_TAIL_TOL} at p = {p}")
        p = 2 * p
        grown = np.zeros((2 * p + 1, coeffs.shape[1]), dtype=complex)
        grown[p - (coeffs.shape[0] - 1) // 2: p + (coeffs.shape[0] - 1) // 2 + 1] = coeffs
        coeffs = grown
    F = _residual_modes(ring, coeffs, nu, num_samples or _default_samples(p))
    return FourierOrbit(nu=nu, coeffs=coeffs,
                        residual_norm=orbit_residual_norm(F),
                        newton_iterations=total_iters)


def _newton_full(ring, coeffs, nu, fix_nu, amplitude, tol, max_iter, num_samples):
    width = coeffs.shape[1]
    p = (coeffs.shape[0] - 1) // 2
    num = num_samples or _default_samples(p)
    n_unknowns = width * (2 * p + 1) + (0 if fix_nu else 1)
    for iteration in range(max_iter + 1):
        F = _residual_modes(ring, coeffs, nu, num)
        res = _stack_residual(F)
        rows = [_l2_row(_tangent_time(coeffs)), _l2_row(_tangent_rotation(coeffs))]
        rhs_rows = [0.0, 0.0]
        if not fix_nu:
            rows = [np.append(r, 0.0) for r in rows]
        if amplitude is not None:
            amp = np.sqrt(2.0 * (np.abs(coeffs[p + 1:]) ** 2).sum())
            grad = np.zeros_like(coeffs)
            if amp > 0:
                grad[p + 1:] = coeffs[p + 1:] / amp
            row = np.append(_l2_row(grad), 0.0)
            rows.append(row)
            rhs_rows.append(amp - amplitude)
        A = np.zeros((res.size + len(rows), n_unknowns))
        for col in range(width * (2 * p + 1)):
            e = np.zeros(width * (2 * p + 1))
            e[col] = 1.0
            dF = linearized_residual(ring, FourierOrbit(nu=nu, coeffs=coeffs),
                                     _unpack(e, p, width), 0.0, num)
            A[:res.size, col] = _stack_residual(dF)
        if not fix_nu:
            dF = linearized_residual(ring, FourierOrbit(nu=nu, coeffs=coeffs),
                                     np.zeros_like(coeffs), 1.0, num)
            A[:res.size, -1] = _stack_residual(dF)
        for i, row in enumerate(rows):
            A[res.size + i] = row
        svals = np.linalg.svd(A, compute_uv=False)
        if svals[-1] < 1e-10 * max(svals[0], 1.0):
            _, _, Vt = np.linalg.svd(A)
            raise SingularJacobian(
                f"gauged Jacobian is singular (smallest singular value "
                f"{svals[-1]:.2e}); expected exactly at a bifurcation point",
                direction=Vt[-1])
        if np.linalg.norm(res) <= tol and max(abs(v) for v in rhs_rows) <= tol:
            return coeffs, nu, iteration
        b = np.concatenate([res, np.asarray(rhs_rows)])
        step = np.linalg.lstsq(A, -b, rcond=None)[0]
        dz = step[:width * (2 * p + 1)]
        coeffs = coeffs + _unpack(dz, p, width)
        if not fix_nu:
            nu += step[-1]
    raise NoConvergence(f"no convergence after {max_iter} Newton iterations; "
                        f"residual {np.linalg.norm(res):.3e}")


# ---------------------------------------------------------------------------
# continuation in the isotropy subspace of mode k


class _ReducedSpace:
    """Coordinates on the Z~_n(k) fixed-point subspace of the loop space.

    Fourier mode l of a fixed orbit lies in the mode space W_{(l k) mod n},
    so the orbit is described by one complex 2-vector per mode l = 0..p
    (real at l = 0) plus the frequency: (4p + 3) real unknowns in place of
    2n(2p+1) + 1.
    """

    def __init__(self, n: int, k: int, p: int):
        self.n, self.k, self.p = n, k, p
        self.maps = [t_k_matrix(n, ((l * k - 1) % n) + 1) for l in range(p + 1)]

    @property
    def dim(self) -> int:
        return 4 * self.p + 3  # includes nu

    def expand(self, V: np.ndarray) -> np.ndarray:
        """Reduced modes (p+1, 2) -> full coefficients (2p+1, 2n)."""
        p = self.p
        coeffs = np.zeros((2 * p + 1, 2 * self.n), dtype=complex)
        coeffs[p] = (self.maps[0] @ V[0]).real
        for l in range(1, p + 1):
            coeffs[p + l] = self.maps[l] @ V[l]
            coeffs[p - l] = coeffs[p + l].conj()
        return coeffs

    def project(self, F: np.ndarray) -> np.ndarray:
        p = self.p
        out = np.empty((p + 1, 2), dtype=complex)
        for l in range(p + 1):
            out[l] = self.maps[l].conj().T @ F[p + l]
        return out

    def pack(self, V: np.ndarray, nu: float) -> np.ndarray:
        parts = [V[0].real]
        for l in range(1, self.p + 1):
            parts.extend([V[l].real, V[l].imag])
        parts.append([nu])
        return np.concatenate(parts)

    def unpack(self, z: np.ndarray) -> tuple[np.ndarray, float]:
        V = np.zeros((self.p + 1, 2), dtype=complex)
        V[0] = z[0:2]
        for l in range(1, self.p + 1):
            V[l] = z[4 * l - 2:4 * l] + 1j * z[4 * l:4 * l + 2]
        return V, float(z[-1])

    def residual(self, ring: RingSystem, z: np.ndarray, num: int) -> np.ndarray:
        V, nu = self.unpack(z)
        F = _residual_modes(ring, self.expand(V), nu, num)
        return self._stack(self.project(F))

    def _stack(self, VF: np.ndarray) -> np.ndarray:
        parts = [VF[0].real]
        for l in range(1, self.p + 1):
            parts.extend([VF[l].real, VF[l].imag])
        return np.concatenate(parts)

    def jacobian(self, ring: RingSystem, z: np.ndarray, num: int) -> np.ndarray:
        V, nu = self.unpack(z)
        coeffs = self.expand(V)
        orbit = FourierOrbit(nu=nu, coeffs=coeffs)
        A = np.zeros((4 * self.p + 2, self.dim))
        for col in range(self.dim):
            e = np.zeros(self.dim)
            e[col] = 1.0
            dV, dnu = self.unpack(e)
            dcoeffs = self.expand(dV)
            dF = linearized_residual(ring, orbit, dcoeffs, dnu, num)
            A[:, col] = self._stack(self.project(dF))
        return A

    def gauge_rows(self, z: np.ndarray) -> list[np.ndarray]:
        """L2 phase-condition rows (time shift, rotation) at the point z."""
        V, _ = self.unpack(z)
        time_t = 1j * np.arange(self.p + 1)[:, None] * V
        rot_t = -(V @ J2.T)
        rows = []
        for t in (time_t, rot_t):
            parts = [t[0].real]
            for l in range(1, self.p + 1):
                parts.extend([2.0 * t[l].real, 2.0 * t[l].imag])
            parts.append([0.0])
            rows.append(np.concatenate(parts))
        return rows

    def amplitude(self, z: np.ndarray) -> float:
        V, _ = self.unpack(z)
        return float(np.sqrt(2.0 * (np.abs(V[1:]) ** 2).sum()))


def _grow_packed(z: np.ndarray, old_p: int, new_p: int) -> np.ndarray:
    """Pad a packed reduced vector with zero modes up to new_p."""
    out = np.zeros(4 * new_p + 3)
    out[:4 * old_p + 2] = z[:-1]
    out[-1] = z[-1]
    return out


@dataclass(frozen=True)
class BranchPoint:
    orbit: FourierOrbit
    amplitude: float
    nu: float


@dataclass
class ContinuationBranch:
    origin: object                    # the BifurcationPoint this started from
    points: list[BranchPoint]
    termination: str = ""
    steps_taken: int = 0


def _corrector(ring, space, z, z_prev, tangent, ds, tol, num, max_iter=25):
    """Newton corrector for the bordered (gauged + arclength) system."""
    for _ in range(max_iter):
        res = space.residual(ring, z, num)
        rows = space.gauge_rows(z_prev)
        rhs = [float(r @ (z - z_prev)) for r in rows]
        arc = float(tangent @ (z - z_prev) - ds)
        b = np.concatenate([res, rhs, [arc]])
        if np.linalg.norm(res) <= tol and max(abs(v) for v in rhs + [arc]) <= 10 * tol:
            return z
        A = np.vstack([space.jacobian(ring, z, num)] + rows + [tangent])
        step = np.linalg.lstsq(A, -b, rcond=None)[0]
        z = z + step
    raise NoConvergence(f"corrector stalled at residual {np.linalg.norm(res):.3e}")


def continue_branch(ring: RingSystem, bif, steps: int, ds: float, *,
                    p: int = 8, p_max: int = 256, amplitude_max: float = 10.0,
                    tol: float = 1e-10) -> ContinuationBranch:
    """Pseudo-arclength continuation of the periodic branch born at ``bif``.

    The first predictor leaves the trivial solution along the kernel vector
    of the singular block m_k(nu); correction and all subsequent steps run
    inside the Z~_n(k) fixed-point subspace with secant tangents, and every
    accepted point is re-checked against the full-space residual.  The
    branch stops on the step count, on five consecutive step halvings, or
    when the amplitude bound is hit.

    Raises
    ------
    NoConvergence
        Only when not a single point could be corrected.
    """
    n, k = ring.n, bif.k
    space = _ReducedSpace(n, k, p)
    V0 = np.zeros((p + 1, 2), dtype=complex)
    V0[0] = np.sqrt(n) * np.array([1.0, 0.0])
    z_triv = space.pack(V0, bif.nu)
    w = blocks.kernel_vector(ring, k, bif.nu)
    dV = np.zeros((p + 1, 2), dtype=complex)
    dV[1] = w
    tangent = space.pack(dV, 0.0)
    tangent /= np.linalg.norm(tangent)

    branch = ContinuationBranch(origin=bif, points=[])
    z_prev = z_triv
    ds_target = ds
    halvings = 0
    while len(branch.points) < steps:
        num = _default_samples(space.p)
        z_pred = z_prev + ds * tangent
        try:
            z_new = _corrector(ring, space, z_pred, z_prev, tangent, ds, tol, num)
        except NoConvergence:
            halvings += 1
            if halvings > 5:
                if not branch.points:
                    raise
                branch.termination = "step-failure"
                return branch
            ds *= 0.5
            continue
        halvings = 0
        # spectral-tail control: refine p and redo the step if needed
        V, nu = space.unpack(z_new)
        coeffs = space.expand(V)
        tail = np.abs(coeffs[[0, -1]]).max()
        if tail > _TAIL_TOL:
            if 2 * space.p > p_max:
                branch.termination = "step-failure"
                if not branch.points:
                    raise NoConvergence(f"tail {tail:.2e} above {_TAIL_TOL} at p_max")
                return branch
            old_p = space.p
            space = _ReducedSpace(n, k, 2 * old_p)
            z_prev = _grow_packed(z_prev, old_p, space.p)
            tangent = _grow_packed(tangent, old_p, space.p)
            continue
        F = _residual_modes(ring, coeffs, nu, num)
        full_res = orbit_residual_norm(F)
        if full_res > 10 * tol:
            raise NoConvergence(
                f"full-space residual {full_res:.2e} leaves the symmetry subspace")
        orbit = FourierOrbit(nu=nu, coeffs=coeffs, residual_norm=full_res)
        branch.points.append(BranchPoint(orbit=orbit, amplitude=space.amplitude(z_new),
                                         nu=nu))
        branch.steps_taken += 1
        new_tangent = z_new - z_prev
        norm = np.linalg.norm(new_tangent)
        if norm > 0:
            tangent = new_tangent / norm
        z_prev = z_new
        ds = min(ds * 1.3, ds_target)
        if branch.points[-1].amplitude > amplitude_max:
            branch.termination = "amplitude-bound"
            return branch
    branch.termination = "steps"
    return branch


def extrapolate_nu_to_zero(branch: ContinuationBranch, max_points: int = 12) -> float:
    """Frequency of the branch extrapolated to zero amplitude.

    Fits nu = c0 + c2 a^2 (+ c4 a^4 with enough points) through the
    smallest-amplitude points; near a bifurcation the family is an even
    function of the amplitude, so c0 estimates the critical frequency.
    """
    if not branch.points:
        raise ValueError("empty branch")
    pts = sorted(branch.points, key=lambda q: q.amplitude)[:max_points]
    a = np.array([q.amplitude for q in pts])
    nu = np.array([q.nu for q in pts])
    cols = [np.ones_like(a), a ** 2]
    if len(pts) >= 5:
        cols.append(a ** 4)
    c = np.linalg.lstsq(np.column_stack(cols), nu, rcond=None)[0]
    return float(c[0])


# ---------------------------------------------------------------------------
# conservative time integration


def integrate(ring: RingSystem, x0, T: float, dt: float, *,
              newton_tol: float = 1e-12,
              max_newton: int = 25) -> tuple[np.ndarray, np.ndarray]:
    """Advance du/dt = -JJ grad_V(u) with the implicit midpoint rule.

    The scheme is second order and time symmetric; quadratic invariants
    (in particular the total power sum |u_j|^2) are conserved up to the
    inner solve tolerance per step.  Each step is polished by one extra
    Newton iteration after reaching ``newton_tol``.

    Returns (times, states) with states of shape (steps+1, 2n).

    Raises
    ------
    NoConvergence
        When the inner Newton solve stalls; the message names the failing
        step and suggests a smaller dt.
    """
    if dt <= 0 or T <= 0:
        raise ValueError("T and dt must be positive")
    x0 = np.asarray(x0, dtype=float)
    steps = int(round(T / dt))
    JJ = block_symplectic(ring.n)
    eye = np.eye(2 * ring.n)
    out = np.empty((steps + 1, x0.size))
    out[0] = x0
    u = x0.copy()
    for step in range(steps):
        unew = u + dt * vector_field(ring, u)
        for _ in range(max_newton):
            mid = 0.5 * (u + unew)
            G = unew - u - dt * vector_field(ring, mid)
            Df = -JJ @ hessian_V(ring, mid)
            unew = unew - np.linalg.solve(eye - 0.5 * dt * Df, G)
            # the update after the tolerance is met polishes the step to
            # machine precision, keeping quadratic invariants tight
            if np.linalg.norm(G) <= newton_tol:
                break
        else:
            raise NoConvergence(
                f"implicit midpoint solve did not converge at step {step} "
                f"(t = {step * dt:.3f}); try a smaller dt")
        u = unew
        out[step + 1] = u
    return dt * np.arange(steps + 1), out
