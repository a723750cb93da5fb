"""Damped wave equation on a warped-product surface with a hyperbolic neck.

The surface is ds^2 = dr^2 + f(r)^2 dtheta^2 with r on a circle of
circumference `period` and a warp f that equals cosh r near the neck
r = 0 and flattens to 1 before the period boundary, so the closed
geodesic at r = 0 is hyperbolic and the manifold is smooth and compact.
Damping a(r) >= 0 vanishes on a neighborhood of the neck.

Separating u = v(r) e^{i k theta} turns (d_t^2 - Lap + 2 a d_t) u = 0
into, per angular mode k,

    v_tt + L_k v + 2 a v_t = 0,
    L_k = -(1/f) (f v')' + k^2 / f^2,

with periodic boundary. L_k is symmetric in the f-weighted inner
product; conjugating by sqrt(f) makes it a plain symmetric matrix, which
is the frame used internally. Stationary solutions e^{i tau t} give the
quadratic pencil P(tau) = -tau^2 + L_k + 2 i a tau whose roots are the
mode's eigenfrequencies; decaying modes sit in the upper half plane.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la
from scipy.integrate import simpson

from .cutoffs import plateau_bump, plateau_step


class DampedWaveError(RuntimeError):
    pass


class GridTooCoarse(DampedWaveError):
    pass


class LinearizationIllConditioned(DampedWaveError):
    pass


class StepFailure(DampedWaveError):
    pass


def periodic_warp(r):
    """Warp with f = cosh r for |r| <= 1, f = 1 for |r| >= 2.

    Smooth on the period-6 circle: the constant tail makes all
    derivatives match where the fundamental domain [-3, 3) wraps.
    """
    r = np.asarray(r, dtype=float)
    return 1.0 + (np.cosh(r) - 1.0) * plateau_bump(r, 1.0, 2.0)


def neck_damping(inner=0.5, outer=1.0):
    """Damping profile: 0 for |r| <= inner, 1 for |r| >= outer."""
    def a(r):
        return plateau_step(r, inner, outer)
    return a


@dataclass
class DampedWaveProblem:
    """Separable damped wave setup on one warped period.

    profile and damping are callables of r on the fundamental domain
    [-period/2, period/2). dead_zone_radius declares where damping must
    vanish (None skips that check, for constant-damping oracles).
    """

    profile: object = None
    damping: object = None
    n_grid: int = 192
    modes: tuple = tuple(range(41))
    epsilon: float = 0.1
    period: float = 6.0
    dead_zone_radius: float = 0.5
    r: np.ndarray = field(init=False, repr=False)
    spacing: float = field(init=False)
    f: np.ndarray = field(init=False, repr=False)
    f_half: np.ndarray = field(init=False, repr=False)
    a: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.n_grid < 32:
            raise GridTooCoarse("need at least 32 grid points per period")
        if self.epsilon < 0:
            raise ValueError("epsilon must be nonnegative")
        if self.profile is None:
            self.profile = periodic_warp
        if self.damping is None:
            self.damping = neck_damping()
        n = self.n_grid
        self.spacing = self.period / n
        self.r = -0.5 * self.period + self.spacing * np.arange(n)
        self.f = np.asarray(self.profile(self.r), dtype=float)
        # midpoint warp values feed the flux stencil; the last midpoint
        # wraps around the period
        half = self.r + 0.5 * self.spacing
        self.f_half = np.asarray(self.profile(half), dtype=float)
        self.a = np.asarray(self.damping(self.r), dtype=float)
        if np.any(self.f <= 0):
            raise ValueError("warp profile must be positive")
        if np.any(self.a < -1e-15):
            raise ValueError("damping must be nonnegative")
        self.a = np.maximum(self.a, 0.0)
        if self.dead_zone_radius is not None:
            dead = np.abs(self.r) <= self.dead_zone_radius
            if np.any(self.a[dead] > 1e-15):
                raise ValueError(
                    "damping must vanish for |r| <= dead_zone_radius")


@dataclass
class ModePencil:
    """Quadratic pencil P(tau) = second*tau^2 + first*tau + zeroth for one
    angular mode, assembled in the sqrt(f)-symmetrized frame."""

    k: int
    second: np.ndarray
    first: np.ndarray
    zeroth: np.ndarray
    problem: DampedWaveProblem

    def __iter__(self):
        return iter((self.second, self.first, self.zeroth))

    def delta_matrix(self):
        """The mode operator back in the physical frame (f-weighted)."""
        scale = np.sqrt(self.problem.f)
        return (self.zeroth / scale[:, None]) * scale[None, :]


def assemble_pencil(problem, k):
    """Symmetrized mode operator and pencil coefficient triple.

    zeroth is the real symmetric matrix similar to L_k, first is
    2i diag(a), second is -I.
    """
    if k not in problem.modes:
        raise ValueError(f"mode {k} not in the problem's mode list")
    n = problem.n_grid
    dr = problem.spacing
    f = problem.f
    fh = problem.f_half  # fh[j] sits between j and j+1, fh[-1] wraps
    L = np.zeros((n, n))
    idx = np.arange(n)
    nxt = (idx + 1) % n
    w = fh / dr**2
    np.add.at(L, (idx, idx), w)
    np.add.at(L, (nxt, nxt), w)
    np.add.at(L, (idx, nxt), -w)
    np.add.at(L, (nxt, idx), -w)
    scale = 1.0 / np.sqrt(f)
    L = L * scale[:, None] * scale[None, :]
    L[idx, idx] += k**2 / f**2
    return ModePencil(k=int(k), second=-np.eye(n),
                      first=2j * np.diag(problem.a), zeroth=L,
                      problem=problem)


@dataclass
class ModeFrame:
    """Eigenbasis of one mode's symmetrized operator, with spectral norms.

    Coefficients carry the sqrt(spacing) quadrature weight so that
    norm_sq(w, 0) equals the f-weighted L^2 norm of the physical state.
    """

    k: int
    lam: np.ndarray
    basis: np.ndarray
    spacing: float

    def coeffs(self, w):
        return (self.basis.T @ w) * math.sqrt(self.spacing)

    def synthesize(self, c):
        return (self.basis @ c) / math.sqrt(self.spacing)

    def norm_sq(self, w, s):
        c = self.coeffs(w)
        return float(np.sum((1.0 + self.lam) ** s * np.abs(c) ** 2))


def mode_frame(pencil):
    lam, basis = la.eigh(pencil.zeroth)
    # the k = 0 operator annihilates sqrt(f); tiny negative roundoff
    # eigenvalues would poison sqrt and fractional powers
    lam = np.maximum(lam, 0.0)
    return ModeFrame(k=pencil.k, lam=lam, basis=basis,
                     spacing=pencil.problem.spacing)


@dataclass
class EigenfrequencySet:
    """Pencil roots for one angular mode, with the strip and mirror
    diagnostics that every damped wave spectrum must satisfy."""

    k: int
    frequencies: np.ndarray
    max_damping: float
    strip_margin: float
    symmetry_defect: float


def eigenfrequencies(pencil, residual_tol=1e-6):
    """All roots of the mode pencil via companion linearization.

    Postconditions enforced here: residuals of every eigenpair below
    residual_tol (else LinearizationIllConditioned), containment in the
    strip 0 <= Im tau <= 2 max a, and tau -> -conj(tau) mirror symmetry,
    both within 1e-8.
    """
    n = pencil.problem.n_grid
    a = pencil.problem.a
    L = pencil.zeroth
    comp = np.zeros((2 * n, 2 * n), dtype=complex)
    comp[:n, n:] = np.eye(n)
    comp[n:, :n] = L
    comp[n:, n:] = 2j * np.diag(a)
    taus, vecs = la.eig(comp)
    w = vecs[:n]
    norms = la.norm(w, axis=0)
    ok = norms > 1e-12
    resid = la.norm(
        -taus[ok] ** 2 * w[:, ok] + L @ w[:, ok]
        + 2j * taus[ok] * (a[:, None] * w[:, ok]), axis=0) / norms[ok]
    scale = la.norm(L, 1) + 2 * a.max() * np.abs(taus).max() + 1.0
    worst = float(resid.max() / scale)
    if worst > residual_tol or not np.all(ok):
        raise LinearizationIllConditioned(
            f"companion eigenpair residual {worst:.2e} exceeds "
            f"{residual_tol:.0e} for mode {pencil.k}")
    amax = float(a.max())
    im = taus.imag
    margin = float(max(-im.min(), im.max() - 2 * amax))
    if margin > 1e-8:
        raise DampedWaveError(
            f"eigenfrequency strip violated by {margin:.2e} at mode "
            f"{pencil.k}: either the assembly is inconsistent or a "
            "multiple root split under roundoff")
    mirrored = -np.conj(taus)
    defect = float(max(np.abs(taus - mirrored[:, None]).min(axis=0).max(),
                       0.0))
    if defect > 1e-8:
        raise DampedWaveError(
            f"spectrum not mirror symmetric (defect {defect:.2e}) at mode "
            f"{pencil.k}")
    order = np.lexsort((taus.imag, taus.real))
    return EigenfrequencySet(k=pencil.k, frequencies=taus[order],
                             max_damping=amax, strip_margin=margin,
                             symmetry_defect=defect)


def default_initial(problem, frame, n_low=24, mode_seed=0):
    """Band-limited start: u = 0, velocity spread over the lowest modes.

    Coefficients decay like 1/(1+j) with deterministic alternating signs,
    so every retained eigenmode is excited and runs are reproducible.
    """
    n_low = min(n_low, frame.lam.size)
    j = np.arange(n_low)
    c = (-1.0) ** (j + mode_seed) / (1.0 + j)
    w = frame.synthesize(np.concatenate(
        [c, np.zeros(frame.lam.size - n_low)]))
    # synthesize works in the sqrt(f)-symmetrized frame; hand back
    # physical data so evolve's conversion lands on exactly these modes
    return np.zeros(problem.n_grid), w / np.sqrt(problem.f)


@dataclass
class EnergyTrace:
    """Sampled energies of one evolved mode plus the decay-fit summary."""

    k: int
    epsilon: float
    times: np.ndarray
    e0: np.ndarray
    eeps: np.ndarray
    rate: float
    intercept: float
    r_squared: float
    dissipation_residual: float

    def rows(self):
        return list(zip(self.times, self.e0, self.eeps))


def _fit_decay(times, energy, lo_frac=0.25):
    """Least-squares line through log energy on [t_max/4, t_max]."""
    sel = times >= lo_frac * times[-1]
    t = times[sel]
    y = np.log(np.maximum(energy[sel], 1e-300))
    if np.ptp(y) < 1e-12:
        return 0.0, float(y.mean()), 0.0
    slope, intercept = np.polyfit(t, y, 1)
    fitted = slope * t + intercept
    ss_res = float(np.sum((y - fitted) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    return -float(slope), float(intercept), 1.0 - ss_res / ss_tot


def evolve(problem, k, initial=None, t_max=60.0, dt=0.004, frame=None):
    """March one mode with the exact one-step propagator and record E^0,
    E^eps, and the damping quadrature.

    initial is (u0, v0) in the physical frame; None takes the default
    band-limited data. dt must resolve the fastest excited frequency
    (dt <= 0.1 / max |tau| over retained content), checked here.
    """
    pencil = assemble_pencil(problem, k)
    frame = frame if frame is not None else mode_frame(pencil)
    scale = np.sqrt(problem.f)
    if initial is None:
        u0, v0 = default_initial(problem, frame)
    else:
        u0, v0 = (np.asarray(x, dtype=float) for x in initial)
    w0, wd0 = scale * u0, scale * v0
    c0, cd0 = frame.coeffs(w0), frame.coeffs(wd0)
    weight = np.abs(c0) ** 2 + np.abs(cd0) ** 2
    if weight.max() <= 0:
        raise ValueError("initial data is identically zero")
    excited = weight > 1e-24 * weight.max()
    tau_max = math.sqrt(max(frame.lam[excited].max(), 1.0))
    if dt > 0.1 / tau_max:
        raise StepFailure(
            f"dt = {dt} too coarse for content up to |tau| = {tau_max:.1f};"
            f" need dt <= {0.1 / tau_max:.2e}")
    n = problem.n_grid
    A = np.zeros((2 * n, 2 * n))
    A[:n, n:] = np.eye(n)
    A[n:, :n] = -pencil.zeroth
    A[n:, n:] = -2.0 * np.diag(problem.a)
    step = la.expm(A * dt)
    n_steps = int(round(t_max / dt))
    times = dt * np.arange(n_steps + 1)
    hist = np.empty((2 * n, n_steps + 1))
    hist[:, 0] = np.concatenate([w0, wd0])
    for i in range(n_steps):
        hist[:, i + 1] = step @ hist[:, i]
    c = frame.coeffs(hist[:n])
    cd = frame.coeffs(hist[n:])
    eps = problem.epsilon
    dr = problem.spacing
    modal = cd**2 + frame.lam[:, None] * c**2
    e0 = 0.5 * modal.sum(axis=0)
    eeps = 0.5 * ((1 + frame.lam[:, None]) ** eps * modal).sum(axis=0)
    diss = 2.0 * dr * (problem.a[:, None] * hist[n:] ** 2).sum(axis=0)
    rises = np.diff(e0)
    if rises.size and rises.max() > 1e-8 * max(e0[0], 1e-300):
        raise StepFailure(
            f"energy rose by {rises.max():.2e} (E(0) = {e0[0]:.2e}) in "
            f"mode {k}; the damped propagator cannot do that")
    drop = e0[0] - e0[-1]
    resid = abs(drop - simpson(diss, dx=dt)) / max(e0[0], 1e-300)
    rate, intercept, r2 = _fit_decay(times, e0)
    return EnergyTrace(k=int(k), epsilon=eps, times=times, e0=e0, eeps=eeps,
                       rate=rate, intercept=intercept, r_squared=r2,
                       dissipation_residual=float(resid))


@dataclass
class DecayReport:
    """Superposed-mode energy decay against the H^eps size of the data."""

    epsilon: float
    modes: tuple
    rate: float
    intercept: float
    r_squared: float
    envelope_constant: float
    hnorm_sq: float
    times: np.ndarray
    total_e0: np.ndarray
    per_mode: dict


def decay_report(problem, modes=None, t_max=60.0, dt=None, epsilon=None,
                 n_low=24):
    """Evolve every requested mode, superpose energies, fit the decay.

    Angular modes are L^2-orthogonal, so the total energy is the sum of
    per-mode traces and the squared H^eps size of the initial data is
    the sum of per-mode sizes. All modes share one time grid; dt = None
    picks the largest step resolving the fastest excited frequency. The
    envelope constant is the smallest C with
    E(t) <= C exp(-rate t) ||data||^2_{H^eps} along the whole trace.
    """
    eps = problem.epsilon if epsilon is None else float(epsilon)
    if eps <= 0:
        raise ValueError("decay reports need epsilon > 0")
    modes = tuple(problem.modes if modes is None else modes)
    if not modes:
        raise ValueError("need at least one mode")
    scale = np.sqrt(problem.f)
    prepared = []
    tau_max = 1.0
    for k in modes:
        frame = mode_frame(assemble_pencil(problem, k))
        u0, v0 = default_initial(problem, frame, n_low=n_low, mode_seed=k)
        prepared.append((k, frame, u0, v0))
        n_exc = min(n_low, frame.lam.size)
        tau_max = max(tau_max, math.sqrt(frame.lam[n_exc - 1]))
    if dt is None:
        dt = min(0.004, 0.09 / tau_max)
    total = None
    hnorm_sq = 0.0
    per_mode = {}
    times = None
    for k, frame, u0, v0 in prepared:
        trace = evolve(problem, k, initial=(u0, v0), t_max=t_max, dt=dt,
                       frame=frame)
        hnorm_sq += frame.norm_sq(scale * v0, eps)
        total = trace.e0 if total is None else total + trace.e0
        times = trace.times
        per_mode[k] = trace
    rate, intercept, r2 = _fit_decay(times, total)
    envelope = float(np.max(total * np.exp(rate * times)) / hnorm_sq)
    return DecayReport(epsilon=eps, modes=modes, rate=rate,
                       intercept=intercept, r_squared=r2,
                       envelope_constant=envelope, hnorm_sq=hnorm_sq,
                       times=times, total_e0=total, per_mode=per_mode)


def interpolation_defect(frame, rng, n_samples=100, epsilon=0.1):
    """Largest violation of the spectral interpolation inequality

        ||f||^2_{H^{1-eps}} <= ||f||^{1-eps}_{H^2} ||f||^{1+eps}_{L^2}

    over random band-limited grid functions. Returns max ratio - 1;
    anything above roundoff means the discrete norms are inconsistent.
    """
    worst = -np.inf
    n = frame.lam.size
    keep = max(2, n // 2)
    for _ in range(n_samples):
        c = np.zeros(n)
        c[:keep] = rng.standard_normal(keep)
        w = frame.synthesize(c)
        lhs = frame.norm_sq(w, 1.0 - epsilon)
        rhs = (frame.norm_sq(w, 2.0) ** ((1.0 - epsilon) / 2)
               * frame.norm_sq(w, 0.0) ** ((1.0 + epsilon) / 2))
        worst = max(worst, lhs / rhs - 1.0)
    return float(worst)
