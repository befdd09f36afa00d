import numpy as np
import pytest

from dnlsring.blocks import block_m, full_spectrum_oracle, kernel_vector
from dnlsring.classify import enumerate_bifurcations
from dnlsring.model import (RingSystem, cubic_potential, potential_V,
                            saturable_potential, standing_wave)
from dnlsring.orbits import (ContinuationBranch, FourierOrbit, NoConvergence,
                             SingularJacobian, continue_branch,
                             extrapolate_nu_to_zero, integrate,
                             linearized_residual, newton_orbit,
                             orbit_residual_norm, orthogonality_check, residual)
from dnlsring.symmetry import symmetry_residual, t_k_matrix, traveling_wave_residual

SAT = saturable_potential()


def random_trig_orbit(rng, n, p, nu=0.9, scale=0.3):
    coeffs = scale * (rng.normal(size=(2 * p + 1, 2 * n))
                      + 1j * rng.normal(size=(2 * p + 1, 2 * n)))
    for l in range(1, p + 1):
        coeffs[p - l] = np.conj(coeffs[p + l])
    coeffs[p] = coeffs[p].real
    return FourierOrbit(nu=nu, coeffs=coeffs)


def mode_perturbed_orbit(ring, k, eps, nu, w=None, p=8):
    a, _ = standing_wave(ring)
    if w is None:
        w = kernel_vector(ring, k, nu)
    coeffs = np.zeros((2 * p + 1, 2 * ring.n), dtype=complex)
    coeffs[p] = a
    coeffs[p + 1] = eps / 2 * (t_k_matrix(ring.n, k) @ w)
    coeffs[p - 1] = np.conj(coeffs[p + 1])
    return FourierOrbit(nu=nu, coeffs=coeffs)


# --- FourierOrbit ------------------------------------------------------------

def test_orbit_reality_validation():
    bad = np.zeros((5, 6), dtype=complex)
    bad[3, 0] = 1.0   # no conjugate partner
    with pytest.raises(ValueError):
        FourierOrbit(nu=1.0, coeffs=bad)


def test_orbit_sample_roundtrip():
    rng = np.random.default_rng(0)
    orbit = random_trig_orbit(rng, n=4, p=5)
    samples = orbit.sample(64)
    back = FourierOrbit.from_samples(samples, nu=orbit.nu, p=5)
    assert np.abs(back.coeffs - orbit.coeffs).max() < 1e-12


def test_orbit_amplitude_excludes_mean():
    a, _ = standing_wave(RingSystem(n=5, mu=1.0))
    orbit = FourierOrbit.from_state(a, nu=1.0, p=3)
    assert orbit.amplitude == 0.0


# --- residual ----------------------------------------------------------------

def test_residual_zero_at_equilibrium():
    ring = RingSystem(n=6, mu=0.5)
    a, _ = standing_wave(ring)
    orbit = FourierOrbit.from_state(a, nu=1.3, p=6)
    F = residual(ring, orbit)
    assert np.abs(F).max() <= 1e-12


def test_residual_linearization_anchors_block():
    # the l=1 residual mode of a_bar + eps Re(e^{it} t_k(w)) is
    # (eps/2) t_k(m_k(nu) w) + O(eps^2)
    ring = RingSystem(n=6, mu=0.5)
    k, nu, eps = 3, 0.7, 1e-6
    rng = np.random.default_rng(1)
    w = rng.normal(size=2) + 1j * rng.normal(size=2)
    w /= np.linalg.norm(w)
    orbit = mode_perturbed_orbit(ring, k, eps, nu, w=w)
    F = residual(ring, orbit)
    predicted = eps / 2 * (t_k_matrix(6, k) @ (block_m(ring, k, nu) @ w))
    rel = np.abs(F[orbit.p + 1] - predicted).max() / np.abs(predicted).max()
    assert rel < 1e-4


def test_mode_block_correspondence():
    # per Fourier mode l, the Jacobian at a_bar in the mode basis is
    # blockdiag over k of m_k(l nu)
    ring = RingSystem(n=6, mu=0.5, potential=SAT)
    nu, p = 0.8, 3
    a, _ = standing_wave(ring)
    base = FourierOrbit.from_state(a, nu=nu, p=p)

    def apply_jacobian(l, vec):
        if l == 0:
            # mode 0 of a real signal is real: complexify by linearity
            parts = []
            for comp in (vec.real, vec.imag):
                d = np.zeros((2 * p + 1, 12), dtype=complex)
                d[p] = comp
                parts.append(linearized_residual(ring, base, d))
            return parts[0] + 1j * parts[1]
        d = np.zeros((2 * p + 1, 12), dtype=complex)
        d[p + l] = vec
        d[p - l] = np.conj(vec)
        return linearized_residual(ring, base, d)

    for l in (0, 1, 2):
        for k in (1, 3, 6):
            T = t_k_matrix(6, k)
            for col in range(2):
                dF = apply_jacobian(l, T[:, col])
                expected = T @ block_m(ring, k, l * nu)[:, col]
                assert np.abs(dF[p + l] - expected).max() <= 1e-10


@pytest.mark.parametrize("pot", [cubic_potential(), SAT])
def test_orthogonality_integrals_vanish(pot):
    ring = RingSystem(n=5, mu=1.0, potential=pot)
    rng = np.random.default_rng(2)
    for _ in range(5):
        orbit = random_trig_orbit(rng, n=5, p=4)
        c1, c2 = orthogonality_check(ring, orbit)
        assert abs(c1) <= 1e-10
        assert abs(c2) <= 1e-10


def test_orthogonality_at_equilibrium():
    ring = RingSystem(n=6, mu=0.5)
    a, _ = standing_wave(ring)
    c1, c2 = orthogonality_check(ring, FourierOrbit.from_state(a, nu=1.0, p=4))
    assert abs(c1) <= 1e-14 and abs(c2) <= 1e-14


# --- newton_orbit ------------------------------------------------------------

def test_newton_trivial_solution_immediate():
    ring = RingSystem(n=6, mu=0.5)
    a, _ = standing_wave(ring)
    sol = newton_orbit(ring, FourierOrbit.from_state(a, nu=1.0, p=6))
    assert sol.newton_iterations <= 2
    assert sol.residual_norm <= 1e-12
    assert np.abs(sol.coeffs[sol.p] - a).max() < 1e-12


def test_newton_singular_at_critical_frequency():
    ring = RingSystem(n=6, mu=0.5)
    a, _ = standing_wave(ring)
    for nu in (np.sqrt(3.0), 1.5 + np.sqrt(1.5)):
        with pytest.raises(SingularJacobian) as err:
            newton_orbit(ring, FourierOrbit.from_state(a, nu=nu, p=6))
        assert err.value.direction is not None


def test_newton_gauge_config_validation():
    ring = RingSystem(n=6, mu=0.5)
    a, _ = standing_wave(ring)
    orbit = FourierOrbit.from_state(a, nu=1.0, p=4)
    with pytest.raises(ValueError):
        newton_orbit(ring, orbit, fix_nu=True, amplitude=0.1)
    with pytest.raises(ValueError):
        newton_orbit(ring, orbit, fix_nu=False)


def test_newton_amplitude_pinned_lyapunov_scaling():
    # frequency shift along the family is quadratic in the amplitude
    ring = RingSystem(n=6, mu=0.5)
    nu0 = np.sqrt(3.0)
    shifts = []
    for eps in (2e-2, 1e-2):
        initial = mode_perturbed_orbit(ring, 3, eps, nu0)
        sol = newton_orbit(ring, initial, fix_nu=False, amplitude=initial.amplitude)
        assert sol.residual_norm <= 1e-10
        assert sol.amplitude > 1e-3   # nontrivial orbit
        shifts.append(abs(sol.nu - nu0))
    ratio = shifts[0] / shifts[1]
    assert 2.5 < ratio < 6.0


def test_newton_tail_adaptation():
    # a large-amplitude start at p = 2 forces mode growth
    ring = RingSystem(n=6, mu=0.5)
    initial = mode_perturbed_orbit(ring, 3, 0.5, np.sqrt(3.0), p=2)
    sol = newton_orbit(ring, initial, fix_nu=False, amplitude=initial.amplitude)
    assert sol.p > 2
    assert np.abs(sol.coeffs[[0, -1]]).max() <= 1e-12
    assert sol.residual_norm <= 1e-10


def test_gauge_invariance_of_residual():
    ring = RingSystem(n=6, mu=0.5)
    initial = mode_perturbed_orbit(ring, 3, 0.05, np.sqrt(3.0))
    sol = newton_orbit(ring, initial, fix_nu=False, amplitude=initial.amplitude)
    moved = sol.transformed(shift=2, theta=0.7, phi=1.1)
    F0 = residual(ring, sol)
    F1 = residual(ring, moved)
    assert abs(orbit_residual_norm(F0) - orbit_residual_norm(F1)) <= 1e-12


# --- continuation ------------------------------------------------------------

def branch_point(ring, k, root):
    pts = enumerate_bifurcations(ring)
    return next(p for p in pts if p.k == k and p.root == root)


def test_continue_branch_n6_k3():
    ring = RingSystem(n=6, mu=0.5)
    bif = branch_point(ring, 3, "plus")
    branch = continue_branch(ring, bif, steps=12, ds=0.04)
    assert branch.termination == "steps"
    assert len(branch.points) == 12
    for bp in branch.points:
        assert bp.orbit.residual_norm <= 1e-10
        sym = symmetry_residual(bp.orbit, 3)
        assert max(sym) <= 1e-8
    amps = [bp.amplitude for bp in branch.points]
    assert all(a2 > a1 for a1, a2 in zip(amps, amps[1:]))
    assert abs(extrapolate_nu_to_zero(branch) - np.sqrt(3.0)) <= 1e-4


def test_continue_branch_traveling_wave_pattern():
    # k = 3 divides n = 6: three equal traveling waves of two oscillators
    ring = RingSystem(n=6, mu=0.5)
    bif = branch_point(ring, 3, "plus")
    branch = continue_branch(ring, bif, steps=6, ds=0.05)
    for bp in branch.points:
        assert traveling_wave_residual(bp.orbit, 3) <= 1e-8


def test_continue_branch_amplitude_bound():
    ring = RingSystem(n=6, mu=0.5)
    bif = branch_point(ring, 3, "plus")
    branch = continue_branch(ring, bif, steps=40, ds=0.05, amplitude_max=0.3)
    assert branch.termination == "amplitude-bound"
    assert branch.points[-1].amplitude > 0.3


def test_extrapolate_empty_branch_raises():
    with pytest.raises(ValueError):
        extrapolate_nu_to_zero(ContinuationBranch(origin=None, points=[]))


# --- integration -------------------------------------------------------------

def test_integrate_equilibrium_constant():
    ring = RingSystem(n=6, mu=0.5)
    a, _ = standing_wave(ring)
    _, X = integrate(ring, a, T=10.0, dt=0.05)
    assert np.abs(X - a).max() <= 1e-10


def test_integrate_validates_arguments():
    ring = RingSystem(n=4, mu=1.0)
    a, _ = standing_wave(ring)
    with pytest.raises(ValueError):
        integrate(ring, a, T=1.0, dt=0.0)
    with pytest.raises(ValueError):
        integrate(ring, a, T=-1.0, dt=0.1)


@pytest.mark.parametrize("pot", [cubic_potential(), SAT])
def test_integrate_conserves_power_and_energy(pot):
    ring = RingSystem(n=6, mu=0.5, potential=pot)
    a, _ = standing_wave(ring)
    rng = np.random.default_rng(3)
    x0 = a + 0.05 * rng.normal(size=12)
    _, X = integrate(ring, x0, T=20.0, dt=0.01)
    power = (X ** 2).sum(axis=1)
    assert np.abs(power - power[0]).max() <= 1e-10
    V = np.array([potential_V(ring, x) for x in X[::50]])
    assert np.abs(V - V[0]).max() <= 1e-6


def test_integrate_stable_orbit_stays_close():
    ring = RingSystem(n=6, mu=0.3)   # stable: mu < 0.5
    a, _ = standing_wave(ring)
    rng = np.random.default_rng(4)
    x0 = a + 1e-4 * rng.normal(size=12)
    _, X = integrate(ring, x0, T=200.0, dt=0.05)
    assert np.abs(X - a).max() <= 1e-2


def test_integrate_unstable_orbit_departs():
    ring = RingSystem(n=6, mu=0.8)   # unstable block range
    assert np.abs(full_spectrum_oracle(ring).real).max() > 0.1
    a, _ = standing_wave(ring)
    rng = np.random.default_rng(5)
    x0 = a + 1e-4 * rng.normal(size=12)
    _, X = integrate(ring, x0, T=200.0, dt=0.05)
    assert np.abs(X - a).max() > 1e-2
