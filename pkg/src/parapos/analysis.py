"""A priori bounds and post-processing of computed trajectories.

This module holds the quantitative conclusions that the solvers are tested
against: the exponential sup-norm barrier, per-component carrying-capacity
bounds, the integrated-growth extinction bound, monotonicity detection on
trajectories, steady-state extraction, and weak residuals of steady states
against the limiting elliptic system.

Weak residuals use compactly supported quartic bumps as test functions.  In
one dimension the quadrature partition is augmented with the exact support
endpoints, because the bump's second derivative jumps there and plain
node-aligned trapezoid sums would pay a first-order penalty for it.  In two
dimensions a plain trapezoid sum over the grid is used; it converges more
slowly near the support circle, which is acceptable because no quantitative
gate binds it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.integrate import simpson

from .errors import DivisionDomainError, IntegrabilityError, SpecError

RESIDUAL_FLOOR = 1e-12


def _sup_of(data):
    """Sup of |data| for a Field, an array, or a plain number."""
    values = getattr(data, "values", data)
    return float(np.abs(np.asarray(values, dtype=float)).max())


# ----------------------------------------------------------- test functions

@dataclass(frozen=True)
class TestFunction:
    """Quartic bump (1 - |x - center|^2 / r^2)^2, zero outside the ball.

    Once continuously differentiable across the support sphere, with an
    explicit Laplacian whose value jumps to zero there; integration routines
    must treat the sphere as a panel boundary to keep their order.
    """

    center: tuple
    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise SpecError("test function radius must be positive")
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))

    @property
    def dimension(self):
        return len(self.center)

    def _q(self, x):
        arr = np.asarray(x, dtype=float)
        if arr.ndim == 0:
            arr = arr.reshape(1)
        diff = arr - np.asarray(self.center)
        return (diff * diff).sum(axis=-1), diff

    def __call__(self, x):
        q, _ = self._q(x)
        r2 = self.radius**2
        inside = q <= r2
        out = np.zeros_like(q)
        out[inside] = (1.0 - q[inside] / r2) ** 2
        return out

    def gradient(self, x):
        q, diff = self._q(x)
        r2 = self.radius**2
        inside = q <= r2
        factor = np.zeros_like(q)
        factor[inside] = -4.0 / r2 * (1.0 - q[inside] / r2)
        return factor[..., None] * diff

    def laplacian(self, x):
        """Pointwise Laplacian, using the inside limit on the support sphere."""
        q, _ = self._q(x)
        n = self.dimension
        r2 = self.radius**2
        inside = q <= r2 * (1.0 + 1e-14)
        out = np.zeros_like(q)
        qi = np.minimum(q[inside], r2)
        out[inside] = (-4.0 / r2) * (n - (n + 2.0) * qi / r2)
        return out

    def support_bounds(self):
        return tuple((c - self.radius, c + self.radius) for c in self.center)


def bump_battery(centers, radius):
    """A list of quartic bumps sharing one radius."""
    out = []
    for c in centers:
        center = (c,) if np.ndim(c) == 0 else tuple(c)
        out.append(TestFunction(center=center, radius=radius))
    return out


def default_battery(domain):
    """Five bumps on an interior lattice, radius a fifth of the domain width."""
    lows = np.asarray([b[0] for b in domain.bounds])
    widths = np.asarray([b[1] - b[0] for b in domain.bounds])
    radius = 0.2 * float(widths.min())
    n = domain.dimension
    if n == 1:
        fractions = [(f,) for f in np.linspace(0.3, 0.7, 5)]
    else:
        mid = (0.5,) * n
        fractions = [mid]
        for axis in range(n):
            for f in (0.35, 0.65):
                c = list(mid)
                c[axis] = f
                fractions.append(tuple(c))
        fractions = fractions[:5]
    centers = [tuple(lows + widths * np.asarray(f)) for f in fractions]
    return bump_battery(centers, radius)


# ------------------------------------------------------------------ bounds

def max_principle_bound(d1, d2, horizon, initial):
    """Exponential sup-norm barrier max(e^{(d2+1) T} sup|initial|, sqrt(d1))."""
    if horizon <= 0:
        raise SpecError("horizon must be positive")
    if d1 < 0 or d2 < 0:
        raise SpecError("the dissipativity constants must be non-negative")
    return max(math.exp((d2 + 1.0) * horizon) * _sup_of(initial), math.sqrt(d1))


def component_bound_mk(trajectory, beta, gamma_kk, t_split, component=None,
                       doublings=20, space_samples=33):
    """Carrying bound: max of the early trajectory sup and sup(beta/gamma) later.

    The trajectory's component ``k`` is bounded on [0, t_split] by its
    computed sup; past the split the bound is the sampled sup of the ratio
    of growth to self-limitation, taken at doubling times and, when both
    coefficients expose a limit profile, at the limit itself.
    """
    vals = trajectory.values
    m = vals.shape[1]
    if component is None:
        if m != 1:
            raise SpecError("component must be named when the system has several")
        component = 0
    if not 0 <= component < m:
        raise SpecError(f"component {component} out of range for {m} components")
    if not 0 < t_split <= trajectory.times[-1] + 1e-12:
        raise SpecError("the split time must lie inside the computed horizon")

    early = trajectory.times <= t_split + 1e-12
    traj_sup = float(vals[early, component].max())

    grid = trajectory.grid
    axes = [np.linspace(lo, hi, min(space_samples, nn))
            for (lo, hi), nn in zip(grid.domain.bounds, grid.nodes_per_axis)]
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)

    def ratio_sup(bvals, gvals):
        gmin = float(np.min(gvals))
        if gmin <= 0.0:
            raise DivisionDomainError(
                "self-limitation is not positive on the sampled tail; the "
                "carrying bound divides by it")
        return float(np.max(np.asarray(bvals) / np.asarray(gvals)))

    tail_sup = -np.inf
    for j in range(doublings + 1):
        t = float(t_split * 2.0**j)
        b = np.broadcast_to(np.asarray(beta(t, mesh), dtype=float), mesh.shape[:-1])
        g = np.broadcast_to(np.asarray(gamma_kk(t, mesh), dtype=float), mesh.shape[:-1])
        tail_sup = max(tail_sup, ratio_sup(b, g))
    b_lim = getattr(beta, "limit_profile", None)
    g_lim = getattr(gamma_kk, "limit_profile", None)
    if b_lim is not None and g_lim is not None:
        b = np.broadcast_to(np.asarray(b_lim(mesh), dtype=float), mesh.shape[:-1])
        g = np.broadcast_to(np.asarray(g_lim(mesh), dtype=float), mesh.shape[:-1])
        tail_sup = max(tail_sup, ratio_sup(b, g))
    return max(traj_sup, tail_sup)


def integrated_growth(coefficient, domain, tail_tol=1e-10, max_doublings=60,
                      space_samples=65, window_nodes=257):
    """Integral over [0, infinity) of the spatial sup of a growth coefficient.

    Integrates window by window over [0,1], [1,2], [2,4], ... with Simpson's
    rule and stops when a window contributes less than ``tail_tol`` while the
    contributions are shrinking.  If the contributions refuse to die out the
    integral is declared non-integrable.
    """
    axes = [np.linspace(lo, hi, space_samples) for lo, hi in domain.bounds]
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)

    def sup_at(t):
        return float(np.max(coefficient(float(t), mesh)))

    total = 0.0
    lo, hi = 0.0, 1.0
    previous = np.inf
    for _ in range(max_doublings):
        ts = np.linspace(lo, hi, window_nodes)
        vals = np.asarray([sup_at(t) for t in ts])
        piece = float(simpson(vals, x=ts))
        total += piece
        if abs(piece) < tail_tol and abs(piece) <= previous:
            return total
        previous = abs(piece)
        lo, hi = hi, 2.0 * hi
    raise IntegrabilityError(
        f"growth integral tail is still {previous:g} after {max_doublings} "
        f"window doublings; the extinction bound needs an integrable sup")


def gronwall_extinction_bound(initial, coefficient, domain=None, **kwargs):
    """Sup-norm barrier sup|initial| * exp(integral of the growth sup).

    ``initial`` is the component's initial data (Field, array, or its sup as
    a number); the domain is read off a Field and must be passed explicitly
    otherwise.
    """
    if domain is None:
        grid = getattr(initial, "grid", None)
        if grid is None:
            raise SpecError("a domain is needed when the initial sup is a bare number")
        domain = grid.domain
    return _sup_of(initial) * math.exp(integrated_growth(coefficient, domain, **kwargs))


# ----------------------------------------------------------- trajectories

class MonotoneVerdict(NamedTuple):
    passed: bool
    worst_margin: float
    witness: dict


def _parse_sign(expected_sign):
    if expected_sign in (1, +1, "+", "+1", "up"):
        return 1.0
    if expected_sign in (-1, "-", "-1", "down"):
        return -1.0
    raise SpecError(f"expected_sign must be + or -, got {expected_sign!r}")


def detect_monotone(trajectory, component, expected_sign, tol_factor=1e-8):
    """Check one component's stored snapshots move only in the expected direction.

    The margin at a node is the discrete time difference quotient times the
    expected sign; the verdict passes when the worst margin stays above
    -tol_mono with tol_mono = tol_factor * (1 + sup|u|).  The witness points
    at the worst node and snapshot pair.
    """
    sign = _parse_sign(expected_sign)
    vals = trajectory.values
    times = trajectory.times
    if vals.shape[0] < 3:
        raise SpecError("monotonicity detection needs at least three snapshots")
    m = vals.shape[1]
    if not 0 <= component < m:
        raise SpecError(f"component {component} out of range for {m} components")
    series = vals[:, component]
    dt = np.diff(times)
    shaper = (slice(None),) + (None,) * (series.ndim - 1)
    rates = sign * np.diff(series, axis=0) / dt[shaper]
    flat = int(rates.argmin())
    where = np.unravel_index(flat, rates.shape)
    worst = float(rates[where])
    sup = float(np.abs(series).max())
    tol = tol_factor * (1.0 + sup)
    witness = {
        "t_from": float(times[where[0]]),
        "t_to": float(times[where[0] + 1]),
        "node": tuple(int(i) for i in where[1:]),
        "rate": worst if sign > 0 else -worst,
    }
    return MonotoneVerdict(passed=bool(worst >= -tol), worst_margin=worst,
                           witness=witness)


@dataclass
class SteadyStateReport:
    """Late-time state of a run plus the evidence that it stopped moving.

    The residual and monotonicity slots start empty; the steady-state
    pipeline fills them in after evaluating the weak-form battery, and the
    invariant (two equations per test function) is enforced at that point.
    """

    reached: bool
    tail_slope: float
    window: float
    steady_tol: float
    values: np.ndarray
    drift: np.ndarray
    residuals: np.ndarray | None = None
    monotone_margins: dict = field(default_factory=dict)

    def attach_residuals(self, residuals):
        residuals = np.asarray(residuals, dtype=float)
        if residuals.ndim != 2 or residuals.shape[1] != 2:
            raise SpecError("residuals must form (test function, equation) pairs")
        self.residuals = residuals

    def to_json(self):
        out = {
            "reached": bool(self.reached),
            "tail_slope": float(self.tail_slope),
            "window": float(self.window),
            "steady_tol": float(self.steady_tol),
            "components": int(self.values.shape[0]),
            "shape": [int(s) for s in self.values.shape[1:]],
            "component_sup": [float(np.abs(v).max()) for v in self.values],
            "max_drift": float(np.abs(self.drift).max()),
            "monotone_margins": {k: float(v) for k, v in self.monotone_margins.items()},
        }
        out["residuals"] = (None if self.residuals is None
                            else [[float(r) for r in row] for row in self.residuals])
        return out


def extract_steady_state(trajectory, window_fraction=0.1, steady_tol=1e-8):
    """Measure the drift over the final window and extract the late state.

    The tail slope is sup|u(t_final) - u(t_final - w)| / w with w the given
    fraction of the horizon, snapped to the nearest stored snapshot.  A slope
    at or under ``steady_tol`` marks the state as reached; otherwise the
    report simply says so (no error).
    """
    if not 0 < window_fraction <= 1:
        raise SpecError("window_fraction must lie in (0, 1]")
    vals = trajectory.values
    times = trajectory.times
    if len(times) < 2:
        raise SpecError("steady-state extraction needs at least two snapshots")
    horizon = float(times[-1])
    target = horizon - window_fraction * horizon
    anchor = int(np.searchsorted(times, target + 1e-12, side="right") - 1)
    anchor = min(max(anchor, 0), len(times) - 2)
    window = horizon - float(times[anchor])
    drift = np.abs(vals[-1] - vals[anchor]) / window
    tail_slope = float(drift.max())
    return SteadyStateReport(
        reached=bool(tail_slope <= steady_tol),
        tail_slope=tail_slope,
        window=window,
        steady_tol=steady_tol,
        values=vals[-1].copy(),
        drift=drift,
    )


class ExtinctionVerdict(NamedTuple):
    extinct: bool
    final_sup: float
    peak_sup: float
    tail_decreasing: bool


def sup_norm_series(trajectory, component):
    """Times and sup norms of one component across the stored snapshots."""
    series = np.abs(trajectory.values[:, component]).max(
        axis=tuple(range(1, trajectory.values.ndim - 1)))
    return trajectory.times, series


def extinction_check(trajectory, component, tol_ext=1e-3, window_fraction=0.1):
    """Decide whether a species died out by the end of the run.

    Extinct means the final sup norm is at or under ``tol_ext`` while the
    sup-norm series is non-increasing over the final window (so the smallness
    is an arrival, not a transit).
    """
    times, series = sup_norm_series(trajectory, component)
    final_sup = float(series[-1])
    peak = float(series.max())
    horizon = float(times[-1])
    tail = series[np.asarray(times) >= horizon * (1.0 - window_fraction) - 1e-12]
    slack = 1e-12 * (1.0 + peak)
    decreasing = bool(len(tail) >= 2 and np.all(np.diff(tail) <= slack))
    return ExtinctionVerdict(
        extinct=bool(final_sup <= tol_ext and decreasing),
        final_sup=final_sup,
        peak_sup=peak,
        tail_decreasing=decreasing,
    )


# -------------------------------------------------------- weak residuals

def _merged_partition_1d(axis, a, b):
    """Grid nodes inside (a, b) together with the exact endpoints."""
    interior = axis[(axis > a + 1e-15) & (axis < b - 1e-15)]
    xs = np.concatenate(([a], interior, [b]))
    return xs


def _values_of(coefficient, pts, like):
    """Coefficient values at points; numbers broadcast, callables evaluate."""
    if callable(coefficient):
        return np.broadcast_to(np.asarray(coefficient(pts), dtype=float), like.shape)
    return np.full_like(like, float(coefficient))


def _check_support(test, domain):
    for (sa, sb), (lo, hi) in zip(test.support_bounds(), domain.bounds):
        if not (sa > lo + 1e-15 and sb < hi - 1e-15):
            raise SpecError(
                f"test function support [{sa:g}, {sb:g}] is not strictly "
                f"inside the domain [{lo:g}, {hi:g}]")


def _weak_residual_1d(grid, u_nodes, diffusion, source_nodes, test):
    axis = np.asarray(grid.axes[0])
    (a, b), = test.support_bounds()
    xs = _merged_partition_1d(axis, a, b)
    u_at = np.interp(xs, axis, u_nodes)
    c_at = np.interp(xs, axis, source_nodes)
    pts = xs[:, None]
    integrand = diffusion * u_at * test.laplacian(pts) + c_at * test(pts)
    return float(np.trapezoid(integrand, xs))


def _weak_residual_nd(grid, u_nodes, diffusion, source_nodes, test):
    eta = test(grid.points)
    lap = test.laplacian(grid.points)
    integrand = diffusion * u_nodes * lap + source_nodes * eta
    for axis in reversed(range(grid.dimension)):
        integrand = np.trapezoid(integrand, np.asarray(grid.axes[axis]), axis=axis)
    return float(integrand)


def weak_residual(grid, u_values, diffusion, source_values, test):
    """Weak residual of one elliptic equation d*lap(u) + c = 0 against one bump.

    Evaluates the integral of d * u * lap(eta) + c * eta; the Laplacian falls
    on the test function analytically, so no discrete derivatives of the data
    are taken.  A vanished steady component gives a residual at roundoff,
    which callers should compare against RESIDUAL_FLOOR rather than zero.
    """
    if test.dimension != grid.dimension:
        raise SpecError("test function dimension does not match the grid")
    _check_support(test, grid.domain)
    u_nodes = np.asarray(u_values, dtype=float)
    c_nodes = np.asarray(source_values, dtype=float)
    if grid.dimension == 1:
        return _weak_residual_1d(grid, u_nodes, float(diffusion), c_nodes, test)
    return _weak_residual_nd(grid, u_nodes, float(diffusion), c_nodes, test)


def elliptic_weak_residual(u_bar, v_bar, limits, tests, diffusions, grid=None):
    """Weak residuals of the limiting two-species elliptic system.

    ``limits`` is the six-tuple of limit coefficients (growth and the two
    interaction rows), each a number or a callable of the space points.  For
    every test function the two equation residuals are returned, so the
    result has shape (len(tests), 2).
    """
    if grid is None:
        grid = getattr(u_bar, "grid", None)
        if grid is None:
            raise SpecError("a grid is needed when the states are bare arrays")
    u = np.asarray(getattr(u_bar, "values", u_bar), dtype=float)
    v = np.asarray(getattr(v_bar, "values", v_bar), dtype=float)
    u = u[0] if u.ndim == grid.dimension + 1 else u
    v = v[0] if v.ndim == grid.dimension + 1 else v
    if u.shape != grid.shape or v.shape != grid.shape:
        raise SpecError("steady states must live on the grid nodes")
    if len(limits) != 6:
        raise SpecError("the limiting system needs its six coefficients")
    d1, d2 = (float(d) for d in diffusions)
    beta, gamma, delta, rho, sigma, theta = (
        _values_of(c, grid.points, u) for c in limits)
    source_u = u * (beta - gamma * u - delta * v)
    source_v = v * (rho - sigma * u - theta * v)
    tests = [tests] if isinstance(tests, TestFunction) else list(tests)
    out = np.empty((len(tests), 2))
    for j, test in enumerate(tests):
        out[j, 0] = weak_residual(grid, u, d1, source_u, test)
        out[j, 1] = weak_residual(grid, v, d2, source_v, test)
    return out


def lv_limit_coefficients(lv):
    """The six late-time coefficient callables of a two-species system.

    Coefficients exposing ``limit_profile`` are evaluated there; anything
    else is evaluated at a late time as a fallback.
    """
    if lv.species != 2:
        raise SpecError("the limiting system is defined for two species")
    late = 1e9

    def limit_callable(coef):
        profile = getattr(coef, "limit_profile", None)
        if profile is not None:
            return profile
        return lambda pts, _c=coef: _c(late, pts)

    return tuple(limit_callable(c) for c in
                 (lv.beta, lv.gamma, lv.delta, lv.rho, lv.sigma, lv.theta))
