"""Damped wave on a warped period: pencil assembly, eigenfrequency
structure, exact-propagator energy traces."""

import math

import numpy as np
import pytest

from loxokit import dampedwave as dw


def flat(r):
    return np.ones_like(np.asarray(r, dtype=float))


def zero(r):
    return np.zeros_like(np.asarray(r, dtype=float))


def const(c):
    return lambda r: c * np.ones_like(np.asarray(r, dtype=float))


@pytest.fixture(scope="module")
def default_problem():
    return dw.DampedWaveProblem()


# ---------------------------------------------------------------------------
# assembly
# ---------------------------------------------------------------------------

def test_problem_validation():
    with pytest.raises(dw.GridTooCoarse):
        dw.DampedWaveProblem(n_grid=16)
    with pytest.raises(ValueError):
        dw.DampedWaveProblem(epsilon=-0.1)
    with pytest.raises(ValueError):
        # constant damping violates the declared dead zone
        dw.DampedWaveProblem(damping=const(0.2))
    dw.DampedWaveProblem(damping=const(0.2), dead_zone_radius=None)


def test_pencil_requires_listed_mode(default_problem):
    with pytest.raises(ValueError):
        dw.assemble_pencil(default_problem, 99)


def test_mode_operator_weighted_symmetric(default_problem):
    # the physical-frame operator is similar to a symmetric matrix, so it
    # is symmetric for the f-weighted pairing: diag(f) D = S L S
    D = dw.assemble_pencil(default_problem, 5).delta_matrix()
    FD = default_problem.f[:, None] * D
    assert np.abs(FD - FD.T).max() <= 1e-12 * np.abs(FD).max()


def test_pencil_coefficients(default_problem):
    pencil = dw.assemble_pencil(default_problem, 3)
    second, first, zeroth = pencil
    assert np.array_equal(second, -np.eye(default_problem.n_grid))
    assert np.allclose(first, 2j * np.diag(default_problem.a))
    assert np.abs(zeroth - zeroth.T).max() <= 1e-10


# ---------------------------------------------------------------------------
# eigenfrequencies
# ---------------------------------------------------------------------------

def test_flat_undamped_spectrum_is_real_sqrt_ladder():
    prob = dw.DampedWaveProblem(profile=flat, damping=zero, modes=(3,))
    pencil = dw.assemble_pencil(prob, 3)
    lam = dw.mode_frame(pencil).lam
    es = dw.eigenfrequencies(pencil)
    taus = es.frequencies
    assert taus.size == 2 * prob.n_grid
    assert np.abs(taus.imag).max() <= 1e-8
    # every root squares to a discrete Laplacian-plus-k^2 eigenvalue
    worst = max(np.min(np.abs(t ** 2 - lam)) for t in taus)
    assert worst <= 1e-10 * lam.max()
    # low frequencies agree with the continuum sqrt((pi m / 3)^2 + k^2)
    pos = np.sort(taus.real[taus.real > 0.1])
    for m, idx in ((0, 0), (1, 1), (2, 3), (3, 5)):
        want = math.sqrt((math.pi * m / 3.0) ** 2 + 9.0)
        assert pos[idx] == pytest.approx(want, rel=1e-3)


def test_constant_damping_scalar_quadratic_oracle():
    # a == c shifts every undamped pair to i c +- sqrt(mu^2 - c^2)
    c = 0.15
    prob = dw.DampedWaveProblem(profile=flat, damping=const(c),
                                dead_zone_radius=None, modes=(2,))
    pencil = dw.assemble_pencil(prob, 2)
    lam = dw.mode_frame(pencil).lam
    got = dw.eigenfrequencies(pencil).frequencies
    want = np.concatenate([1j * c + np.sqrt(lam - c ** 2 + 0j),
                           1j * c - np.sqrt(lam - c ** 2 + 0j)])
    key = lambda z: (round(z.real, 9), round(z.imag, 9))
    diff = np.abs(np.array(sorted(got, key=key))
                  - np.array(sorted(want, key=key)))
    assert diff.max() <= 1e-8


def test_strip_and_mirror_diagnostics(default_problem):
    for k in (1, 7):
        es = dw.eigenfrequencies(dw.assemble_pencil(default_problem, k))
        assert es.max_damping == 1.0
        assert es.strip_margin <= 1e-8
        assert es.symmetry_defect <= 1e-8
        assert es.frequencies.imag.min() >= -1e-8
        assert es.frequencies.imag.max() <= 2.0 + 1e-8


def gap_profile(n_grid):
    """min over modes and |Re tau| >= 1 of Im tau * log<Re tau>."""
    prob = dw.DampedWaveProblem(n_grid=n_grid, modes=tuple(range(0, 41, 4)))
    best = np.inf
    for k in prob.modes:
        t = dw.eigenfrequencies(dw.assemble_pencil(prob, k)).frequencies
        sel = np.abs(t.real) >= 1.0
        vals = t.imag[sel] * np.log(np.hypot(1.0, t.real[sel]))
        best = min(best, float(vals.min()))
    return best


def test_log_weighted_gap_positive_and_grid_stable():
    # the least-damped mode hugs the undamped neck, so the raw gap decays
    # fast in k; the log-weighted minimum over the scanned band must stay
    # positive and reproduce under refinement to count as converged
    g_coarse = gap_profile(192)
    g_fine = gap_profile(288)
    assert g_coarse > 0
    assert g_fine > 0
    assert abs(g_coarse - g_fine) <= 0.10 * g_fine


# ---------------------------------------------------------------------------
# time-domain energy
# ---------------------------------------------------------------------------

def test_single_constant_damped_mode_decays_at_2c():
    c = 0.05
    prob = dw.DampedWaveProblem(profile=flat, damping=const(c),
                                dead_zone_radius=None, modes=(1,))
    frame = dw.mode_frame(dw.assemble_pencil(prob, 1))
    v0 = frame.basis[:, 4] / np.sqrt(prob.f) / math.sqrt(prob.spacing)
    trace = dw.evolve(prob, 1, initial=(np.zeros(prob.n_grid), v0),
                      t_max=40.0, dt=0.004)
    assert trace.rate == pytest.approx(2 * c, rel=0.02)
    assert trace.r_squared >= 0.99


def test_energy_monotone_and_dissipation_accounted(default_problem):
    trace = dw.evolve(default_problem, 6, t_max=8.0, dt=0.002)
    assert np.diff(trace.e0).max() <= 1e-8 * trace.e0[0]
    assert trace.dissipation_residual <= 1e-6
    # the weighted energy dominates the flat one for epsilon > 0
    assert np.all(trace.eeps >= trace.e0 * (1 - 1e-12))


def test_undamped_energy_conserved():
    prob = dw.DampedWaveProblem(damping=zero, modes=(2,))
    trace = dw.evolve(prob, 2, t_max=30.0, dt=0.004)
    drift = np.abs(trace.e0 - trace.e0[0]).max() / trace.e0[0]
    assert drift <= 1e-8
    assert trace.rate == 0.0


def test_step_size_guard(default_problem):
    with pytest.raises(dw.StepFailure):
        dw.evolve(default_problem, 0, t_max=1.0, dt=0.05)


def test_decay_report_epsilon_tradeoff(default_problem):
    reps = [dw.decay_report(default_problem, modes=(0, 2, 5), t_max=20.0,
                            epsilon=e) for e in (0.1, 0.3)]
    lo, hi = reps
    # the fitted rate comes from the same flat-energy traces
    assert hi.rate == lo.rate
    assert lo.rate > 0
    assert min(lo.r_squared, hi.r_squared) >= 0.95
    # a stronger data norm can only shrink the envelope constant
    assert hi.hnorm_sq > lo.hnorm_sq
    assert hi.envelope_constant < lo.envelope_constant
    for rep in reps:
        bound = rep.envelope_constant * rep.hnorm_sq * np.exp(
            -rep.rate * rep.times)
        assert np.all(rep.total_e0 <= bound * (1 + 1e-9))


def test_decay_report_rejects_zero_epsilon(default_problem):
    with pytest.raises(ValueError):
        dw.decay_report(default_problem, modes=(0,), epsilon=0.0)


def test_interpolation_inequality_holds(default_problem):
    frame = dw.mode_frame(dw.assemble_pencil(default_problem, 0))
    rng = np.random.Generator(np.random.Philox(3))
    assert dw.interpolation_defect(frame, rng, n_samples=60) <= 1e-6
