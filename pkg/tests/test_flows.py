"""Flow integration, closed orbits, monodromy, averages, control checks."""

import numpy as np
import pytest
import scipy.integrate
import scipy.optimize

import loxokit as lx
from loxokit import flows

TWO_PI = 2 * np.pi


@pytest.fixture(scope="module")
def cosh_surface():
    return flows.surface_of_revolution(profile="cosh")


@pytest.fixture(scope="module")
def neck_orbit(cosh_surface):
    guess = flows.surface_state(cosh_surface, 0.0, 0.0, np.pi / 2)
    return flows.find_closed_orbit(cosh_surface, guess, 6.4)


def dilation_system(lam=0.6):
    """p = lam x xi, the flow is (x, xi) -> (x e^{lam t}, xi e^{-lam t})."""
    return flows.HamiltonianSystem(
        n=1,
        p=lambda z: lam * z[0] * z[1],
        gradient=lambda z: np.array([lam * z[1], lam * z[0]]))


# ---------------------------------------------------------------------------
# gradients and integration
# ---------------------------------------------------------------------------

def test_builtin_gradients_match_finite_differences():
    rng = np.random.Generator(np.random.Philox(2))
    systems = [flows.surface_of_revolution(),
               flows.double_bump(),
               flows.harmonic_oscillator()]
    for sys in systems:
        for _ in range(5):
            z = rng.uniform(-1.0, 1.0, size=2 * sys.n)
            z[0] += 0.3        # keep clear of coordinate degeneracies
            assert flows.gradient_check(sys, z) <= 1e-5


def test_harmonic_flow_full_turn():
    sys = flows.harmonic_oscillator()
    res = flows.flow(sys, np.array([1.0, 0.0]), (0.0, TWO_PI), tol=1e-12)
    assert np.allclose(res.states[-1], [1.0, 0.0], atol=1e-10)
    assert res.energy_drift <= 1e-11


def test_dilation_flow_is_exponential():
    lam, t = 0.6, 0.8
    res = flows.flow(dilation_system(lam), np.array([2.0, 0.5]), (0.0, t),
                     tol=1e-12)
    want = [2.0 * np.exp(lam * t), 0.5 * np.exp(-lam * t)]
    assert np.allclose(res.states[-1], want, rtol=1e-9)


def test_neck_geodesic_stays_on_neck(cosh_surface):
    z0 = flows.surface_state(cosh_surface, 0.0, 0.0, np.pi / 2)
    res = flows.flow(cosh_surface, z0, (0.0, TWO_PI), tol=1e-12,
                     t_eval=np.linspace(0.0, TWO_PI, 200))
    assert np.max(np.abs(res.states[:, 0])) <= 1e-9
    # theta advances by a full turn over one period
    assert res.states[-1, 1] == pytest.approx(TWO_PI, abs=1e-9)


def test_flow_reversal_returns_to_start():
    sys = flows.double_bump()
    z0 = np.array([0.3, 0.2, 0.5, -0.1])
    fwd = flows.flow(sys, z0, (0.0, 3.0), tol=1e-11)
    back = flows.flow(sys, fwd.states[-1], (0.0, -3.0), tol=1e-11)
    assert np.allclose(back.states[-1], z0, atol=1e-9)


def test_energy_conservation_long_run(cosh_surface):
    z0 = flows.surface_state(cosh_surface, 0.4, 0.0, 0.9)
    tol = 1e-10
    res = flows.flow(cosh_surface, z0, (0.0, 100.0), tol=tol)
    assert res.energy_drift <= 10 * tol * 100.0


# ---------------------------------------------------------------------------
# closed orbits
# ---------------------------------------------------------------------------

def test_neck_orbit_from_exact_guess(neck_orbit):
    assert neck_orbit.period == pytest.approx(TWO_PI, abs=1e-8)
    assert neck_orbit.residual <= 1e-8
    assert abs(neck_orbit.point[0]) <= 1e-9


def test_neck_orbit_from_offset_guess(cosh_surface):
    # a guess displaced up the funnel escapes before its first section
    # return; the finder must still pull it onto the length-2pi geodesic
    guess = flows.surface_state(cosh_surface, 0.05, 0.0, np.pi / 2)
    orbit = flows.find_closed_orbit(cosh_surface, guess, 6.4)
    assert orbit.period == pytest.approx(TWO_PI, abs=1e-6)
    assert abs(orbit.point[0]) <= 1e-6


def test_far_guess_raises(cosh_surface):
    guess = flows.surface_state(cosh_surface, 2.5, 0.0, 0.3)
    with pytest.raises(flows.MaxIterations):
        flows.find_closed_orbit(cosh_surface, guess, 6.4)


def axis_period_oracle(sys, energy):
    """Quadrature oracle for the bump model's axis-bouncing orbit.

    On the symmetry axis the motion is one-dimensional with potential
    V(x, 0), so the period is 2 int dx / sqrt(2 (E - V)) between turning
    points, evaluated with an endpoint-regularizing substitution.
    """
    V = lambda x: sys.p(np.array([x, 0.0, 0.0, 0.0]))
    x_turn = scipy.optimize.brentq(lambda x: V(x) - energy, 0.0,
                                   sys.params["separation"])

    def integrand(u):
        x = x_turn * np.sin(u)
        return 2.0 * x_turn * np.cos(u) / np.sqrt(2.0 * (energy - V(x)))

    val, err = scipy.integrate.quad(integrand, -np.pi / 2, np.pi / 2,
                                    limit=200)
    assert err < 1e-9
    return val


def test_bump_axis_orbit_period_matches_quadrature():
    sys = flows.double_bump()
    orbit = flows.find_closed_orbit(sys, np.array([0.0, 0.0, 0.9, 0.0]), 6.0)
    assert abs(orbit.point[1]) <= 1e-8      # stays on the axis
    want = axis_period_oracle(sys, orbit.energy)
    assert orbit.period == pytest.approx(want, rel=1e-7)


# ---------------------------------------------------------------------------
# monodromy
# ---------------------------------------------------------------------------

def test_neck_monodromy_against_jacobi_oracle(cosh_surface, neck_orbit):
    # curvature -1 on the neck: the transverse Jacobi equation J'' = J has
    # fundamental solution [[cosh t, sinh t], [sinh t, cosh t]], so the
    # period map has eigenvalues exp(+-2 pi)
    mono = flows.linearized_poincare_map(cosh_surface, neck_orbit)
    eigs = np.sort(np.linalg.eigvals(mono.reduced_map).real)
    assert eigs[0] == pytest.approx(np.exp(-TWO_PI), rel=1e-3)
    assert eigs[1] == pytest.approx(np.exp(TWO_PI), rel=1e-3)
    assert mono.symplectic_defect <= 1e-6
    assert np.linalg.det(mono.reduced_map) == pytest.approx(1.0, abs=1e-6)
    c = mono.classification
    assert c.is_loxodromic and not c.has_negative_real
    assert isinstance(c.groups[0], lx.RealHyperbolicPair)
    assert c.groups[0].lam == pytest.approx(TWO_PI, rel=1e-3)


def test_flat_cylinder_is_not_loxodromic():
    sys = flows.surface_of_revolution(profile="flat")
    guess = flows.surface_state(sys, 0.0, 0.0, np.pi / 2)
    orbit = flows.find_closed_orbit(sys, guess, 6.4)
    assert orbit.period == pytest.approx(TWO_PI, abs=1e-8)
    mono = flows.linearized_poincare_map(sys, orbit)
    eigs = np.linalg.eigvals(mono.reduced_map)
    assert np.allclose(np.abs(eigs), 1.0, atol=1e-6)
    assert not mono.classification.is_loxodromic


def test_bump_monodromy_hyperbolic_and_step_consistent():
    sys = flows.double_bump()
    orbit = flows.find_closed_orbit(sys, np.array([0.0, 0.0, 0.9, 0.0]), 6.0)
    mono = flows.linearized_poincare_map(sys, orbit)
    eigs = np.sort(np.linalg.eigvals(mono.reduced_map).real)
    assert eigs[1] > 1.0 and 0.0 < eigs[0] < 1.0
    assert eigs[0] * eigs[1] == pytest.approx(1.0, abs=1e-6)
    # cross-check at a coarser integrator tolerance
    mono2 = flows.linearized_poincare_map(sys, orbit, tol=1e-9)
    eigs2 = np.sort(np.linalg.eigvals(mono2.reduced_map).real)
    assert eigs2[1] == pytest.approx(eigs[1], rel=1e-4)


# ---------------------------------------------------------------------------
# averages along the flow
# ---------------------------------------------------------------------------

def test_average_of_sin_squared(cosh_surface):
    z0 = flows.surface_state(cosh_surface, 0.0, 0.0, np.pi / 2)
    avg = flows.trajectory_average(cosh_surface, z0, TWO_PI,
                                   lambda z: np.sin(z[1]) ** 2)
    assert avg == pytest.approx(0.5, abs=1e-10)


def test_average_of_constant(cosh_surface):
    z0 = flows.surface_state(cosh_surface, 0.2, 0.0, 0.7)
    avg = flows.trajectory_average(cosh_surface, z0, 5.0, lambda z: 1.7)
    assert avg == pytest.approx(1.7, abs=1e-12)


def test_meridian_geodesic_sees_damping(cosh_surface):
    a = flows.meridian_damping(0.5, 1.0)
    z0 = flows.surface_state(cosh_surface, 0.0, 0.0, 0.0)   # pure meridian
    avg = flows.trajectory_average(cosh_surface, z0, 10.0,
                                   lambda z: a(z[0]))
    assert avg > 0.5


# ---------------------------------------------------------------------------
# geometric control
# ---------------------------------------------------------------------------

def test_control_with_global_damping(cosh_surface):
    rep = flows.check_geometric_control(
        cosh_surface, lambda r: 1.0 + 0.0 * np.asarray(r),
        flows.neck_exclusion(), T=5.0, n_samples=40, seed=1)
    assert rep.controlled_fraction == 1.0
    assert rep.min_average == pytest.approx(1.0, abs=1e-9)


def test_control_without_damping(cosh_surface):
    rep = flows.check_geometric_control(
        cosh_surface, lambda r: 0.0 * np.asarray(r),
        flows.neck_exclusion(), T=5.0, n_samples=40, seed=1)
    assert rep.controlled_fraction == 0.0


def test_control_on_neck_model(cosh_surface):
    rep = flows.check_geometric_control(
        cosh_surface, flows.meridian_damping(0.5, 1.0),
        flows.neck_exclusion(), T=50.0, n_samples=80, seed=3)
    assert rep.controlled_fraction == 1.0
    assert rep.min_average > 0.0
    assert len(rep.witnesses) == 80


def test_control_is_seed_deterministic(cosh_surface):
    kw = dict(T=20.0, n_samples=25, seed=11)
    a = flows.meridian_damping(0.5, 1.0)
    rep1 = flows.check_geometric_control(cosh_surface, a,
                                         flows.neck_exclusion(), **kw)
    rep2 = flows.check_geometric_control(cosh_surface, a,
                                         flows.neck_exclusion(), **kw)
    assert rep1.min_average == rep2.min_average
    assert rep1.witnesses == rep2.witnesses


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

def test_system_from_config_roundtrip():
    sys = flows.system_from_config(
        {"model": "surface_of_revolution", "profile": "cosh", "R": 3.0})
    assert sys.model_tag == "surface_of_revolution"
    assert sys.params["profile"] == "cosh"


def test_system_from_config_rejects_unknown_model():
    with pytest.raises(ValueError):
        flows.system_from_config({"model": "pendulum"})


def test_system_from_config_rejects_bad_params():
    with pytest.raises(ValueError):
        flows.system_from_config({"model": "harmonic", "bogus": 1.0})
