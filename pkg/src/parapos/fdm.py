"""Finite-difference solvers for the parabolic system on a box.

Spatial discretization is the standard second-order stencil set: central
differences for gradients, 3/5-point second differences per axis, and the
four-point cross stencil for mixed second derivatives.  Zero Dirichlet data
is enforced by construction: only interior nodes are unknowns and boundary
nodes are pinned to zero.

Three time steppers are provided:

* ``imex_be``   backward Euler in the axis-aligned diffusion part, forward
                Euler in drift, source, and mixed-derivative terms; the
                diffusion coefficient is frozen at the step start state
* ``imex_cn``   Crank-Nicolson in the axis-aligned diffusion part (again
                frozen at the step start), forward Euler elsewhere; the
                explicit source keeps the overall temporal order at one
* ``erk2``      explicit Heun, fully explicit right-hand side, guarded by a
                diffusion stability bound sampled before stepping begins

The ``imex_be`` map has a useful structure: it is the composition of
``w -> w + dt * f(w)`` with the inverse of an M-matrix, so it preserves
componentwise order whenever the explicit part does.  It also preserves
exact zeros bitwise (a zero state with a zero source stays identically
zero), which the degeneracy tests rely on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
import scipy.sparse as sp
from scipy.interpolate import RegularGridInterpolator
from scipy.linalg import solve_banded
from scipy.sparse.linalg import LinearOperator, bicgstab, cg

from .errors import DegenerateRefinement, NonConvergence, SolverError, SpecError
from .model import Field, Grid, SpatialDomain, build_cutoff

SCHEMES = ("imex_be", "imex_cn", "erk2")
POSITIVITY_MODES = ("monitor_only", "clip_and_flag")


@dataclass(frozen=True)
class SchemeConfig:
    scheme: str = "imex_be"
    dt: float = 1e-2
    positivity: str = "monitor_only"
    store_every: int = 10
    linear_rtol: float = 1e-10
    linear_maxiter: int = 5000
    check_stability: bool = True

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise SpecError(f"unknown scheme {self.scheme!r}; pick one of {SCHEMES}")
        if self.positivity not in POSITIVITY_MODES:
            raise SpecError(
                f"unknown positivity mode {self.positivity!r}; pick one of {POSITIVITY_MODES}")
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise SpecError("dt must be positive and finite")
        if self.store_every < 1:
            raise SpecError("store_every must be at least 1")


@dataclass
class StepReport:
    step: int
    t: float
    min_value: float
    sup_norm: float
    negpart_norm: float
    dudt_min: float
    dvdt_max: float
    clipped: int = 0
    solve_iterations: int = 0
    source_evaluations: int = 0


@dataclass
class Trajectory:
    grid: Grid
    scheme: str
    dt: float
    times: np.ndarray
    values: np.ndarray          # (stored, m, *grid.shape)
    reports: list
    positivity_dt_bound: float
    positivity_dt_ok: bool
    clipped_total: int = 0
    dt_adjusted: bool = False

    @property
    def components(self):
        return self.values.shape[1]

    @property
    def final_values(self):
        return self.values[-1]

    def final_field(self):
        return Field(self.grid, self.final_values.copy())

    @property
    def min_value(self):
        return min((r.min_value for r in self.reports), default=float(self.values.min()))

    @property
    def negativity_detected(self):
        return self.min_value < 0.0


# --------------------------------------------------------------- difference

def _gradient(values, grid):
    """Gradients of every component, shape (*grid.shape, m, n)."""
    grads = [np.gradient(values, grid.spacing[ax], axis=1 + ax)
             for ax in range(grid.dimension)]
    return np.moveaxis(np.stack(grads, axis=-1), 0, -2)


def _second_difference(values, grid, axis):
    """Per-axis second difference, zero on the two faces of that axis."""
    h = grid.spacing[axis]
    out = np.zeros_like(values)
    inner = [slice(None)] * values.ndim
    inner[1 + axis] = slice(1, -1)
    hi = list(inner)
    hi[1 + axis] = slice(2, None)
    lo = list(inner)
    lo[1 + axis] = slice(None, -2)
    out[tuple(inner)] = (
        values[tuple(hi)] - 2.0 * values[tuple(inner)] + values[tuple(lo)]
    ) / h**2
    return out


def _mixed_difference(values, grid, i, j):
    """Cross second difference on doubly interior nodes, zero elsewhere."""
    hi_, hj = grid.spacing[i], grid.spacing[j]
    out = np.zeros_like(values)
    inner = [slice(None)] * values.ndim
    inner[1 + i] = slice(1, -1)
    inner[1 + j] = slice(1, -1)

    def shifted(di, dj):
        sl = list(inner)
        sl[1 + i] = slice(1 + di, values.shape[1 + i] - 1 + di)
        sl[1 + j] = slice(1 + dj, values.shape[1 + j] - 1 + dj)
        return values[tuple(sl)]

    out[tuple(inner)] = (
        shifted(1, 1) - shifted(1, -1) - shifted(-1, 1) + shifted(-1, -1)
    ) / (4.0 * hi_ * hj)
    return out


def _frozen_diffusion(spec, t, grid, values):
    """Diffusion matrices at every node, shape (*grid.shape, m, n, n)."""
    u = np.moveaxis(values, 0, -1)
    return spec.coefficients.diffusion_matrices(t, grid.points, u, spec.components)


def _diag_coefficient(a, k, axis):
    """a_axis,axis for component k as an array shaped like the grid."""
    return a[..., k, axis, axis]


def _explicit_diffusion(a, values, grid, diagonal=True, mixed=True):
    out = np.zeros_like(values)
    n = grid.dimension
    if diagonal:
        for ax in range(n):
            d2 = _second_difference(values, grid, ax)
            out += np.moveaxis(a[..., :, ax, ax], -1, 0) * d2
    if mixed and n > 1:
        for i in range(n):
            for j in range(i + 1, n):
                if not np.any(a[..., :, i, j]):
                    continue
                dij = _mixed_difference(values, grid, i, j)
                out += 2.0 * np.moveaxis(a[..., :, i, j], -1, 0) * dij
    return out


def _reaction_drift(spec, t, values, grid):
    """Drift plus source terms, shape (m, *grid.shape)."""
    pts = grid.points
    u = np.moveaxis(values, 0, -1)
    p = _gradient(values, grid)
    b = np.broadcast_to(
        np.asarray(spec.coefficients.drift(t, pts, u, p), dtype=float), pts.shape
    )
    c = np.broadcast_to(
        np.asarray(spec.coefficients.source(t, pts, u, p), dtype=float), u.shape
    )
    total = c + np.einsum("...i,...ki->...k", b, p)
    return np.moveaxis(total, -1, 0)


def _full_rhs(spec, t, values, grid):
    a = _frozen_diffusion(spec, t, grid, values)
    out = _explicit_diffusion(a, values, grid) + _reaction_drift(spec, t, values, grid)
    out[(slice(None),) + np.nonzero(~grid.interior_mask)] = 0.0
    return out


# ----------------------------------------------------------- implicit solve

def _solve_1d_banded(a_node, h, lam, rhs_int):
    r = lam / h**2
    m = rhs_int.shape[0]
    ab = np.zeros((3, m))
    ab[1] = 1.0 + 2.0 * r * a_node
    ab[0, 1:] = -r * a_node[:-1]
    ab[2, :-1] = -r * a_node[1:]
    return solve_banded((1, 1), ab, rhs_int)


def _assemble_2d(axx, ayy, hx, hy, lam):
    mx, my = axx.shape
    size = mx * my
    rx = lam / hx**2
    ry = lam / hy**2
    cxx = (rx * axx).ravel()
    cyy = (ry * ayy).ravel()
    diag = 1.0 + 2.0 * cxx + 2.0 * cyy
    east = -cyy[:-1].copy()
    east[my - 1::my] = 0.0  # no wrap across x-rows
    west = -cyy[1:].copy()
    west[my - 1::my] = 0.0
    north = -cxx[: size - my]
    south = -cxx[my:]
    mat = sp.diags(
        [diag, east, west, north, south],
        [0, 1, -1, my, -my],
        format="csr",
    )
    return mat, diag


def _solve_2d_iterative(mat, diag, rhs, x0, config, symmetric, counter):
    if not np.any(rhs):
        return np.zeros_like(rhs)
    precond = LinearOperator(mat.shape, matvec=lambda v: v / diag)

    def count(_xk):
        counter[0] += 1

    solver = cg if symmetric else bicgstab
    x, info = solver(mat, rhs, x0=x0, rtol=config.linear_rtol, atol=0.0,
                     maxiter=config.linear_maxiter, M=precond, callback=count)
    if info != 0:
        raise SolverError(f"linear solve failed to converge (info={info})")
    return x


def _implicit_diffusion_solve(spec, grid, a, lam, rhs, previous, config, counter):
    """Solve (I - lam * sum_i a_ii d_ii) w = rhs componentwise on the interior."""
    n = grid.dimension
    m = spec.components
    out = np.zeros_like(rhs)
    interior = grid.interior_slices
    for k in range(m):
        rhs_int = rhs[(k,) + interior]
        if n == 1:
            a_node = _diag_coefficient(a, k, 0)[interior]
            sol = _solve_1d_banded(a_node, grid.spacing[0], lam, rhs_int)
        elif n == 2:
            axx = _diag_coefficient(a, k, 0)[interior]
            ayy = _diag_coefficient(a, k, 1)[interior]
            symmetric = (np.ptp(axx) <= 1e-13 * (1.0 + abs(float(axx.flat[0])))
                         and np.ptp(ayy) <= 1e-13 * (1.0 + abs(float(ayy.flat[0]))))
            mat, diag = _assemble_2d(axx, ayy, grid.spacing[0], grid.spacing[1], lam)
            x0 = previous[(k,) + interior].ravel()
            sol = _solve_2d_iterative(mat, diag, rhs_int.ravel(), x0, config,
                                      symmetric, counter).reshape(rhs_int.shape)
        else:
            raise SpecError("implicit diffusion solves support one or two dimensions")
        out[(k,) + interior] = sol
    return out


# ------------------------------------------------------------------- stepping

def _advance(spec, grid, values, t, dt, config, counter=None):
    counter = counter if counter is not None else [0]
    if config.scheme == "erk2":
        f1 = _full_rhs(spec, t, values, grid)
        stage = values + dt * f1
        f2 = _full_rhs(spec, t + dt, stage, grid)
        return values + 0.5 * dt * (f1 + f2)

    # both imex modes freeze the diffusion coefficient at the step start
    a = _frozen_diffusion(spec, t, grid, values)
    react = _reaction_drift(spec, t, values, grid)
    if config.scheme == "imex_be":
        explicit = react + _explicit_diffusion(a, values, grid,
                                               diagonal=False, mixed=True)
        rhs = values + dt * explicit
        rhs[(slice(None),) + np.nonzero(~grid.interior_mask)] = 0.0
        return _implicit_diffusion_solve(spec, grid, a, dt, rhs, values, config, counter)

    # imex_cn
    half = _explicit_diffusion(a, values, grid, diagonal=True, mixed=False)
    explicit = react + _explicit_diffusion(a, values, grid, diagonal=False, mixed=True)
    rhs = values + 0.5 * dt * half + dt * explicit
    rhs[(slice(None),) + np.nonzero(~grid.interior_mask)] = 0.0
    return _implicit_diffusion_solve(spec, grid, a, 0.5 * dt, rhs, values, config, counter)


def step(state, t, dt, spec, config):
    """Advance one step of length ``dt`` from ``state``; returns (Field, report)."""
    if not (dt > 0 and math.isfinite(dt)):
        raise SpecError("dt must be positive and finite")
    grid = state.grid
    counter = [0]
    old = np.asarray(state.values, dtype=float)
    new = _advance(spec, grid, old, t, dt, config, counter)
    report = _make_report(0, t + dt, old, new, dt, clipped=0,
                          iterations=counter[0],
                          source_evals=2 if config.scheme == "erk2" else 1)
    return Field(grid, new), report


def _make_report(index, t, old, new, dt, clipped, iterations=0, source_evals=1):
    m = new.shape[0]
    negnorm = float(max(0.0, -float(new.min())))
    rate = (new - old) / dt
    dudt_min = float(rate[0].min()) if m >= 1 else float("nan")
    dvdt_max = float(rate[1].max()) if m >= 2 else float("nan")
    sup = float(np.sqrt((new * new).sum(axis=0)).max())
    return StepReport(
        step=index,
        t=float(t),
        min_value=float(new.min()),
        sup_norm=sup,
        negpart_norm=negnorm,
        dudt_min=dudt_min,
        dvdt_max=dvdt_max,
        clipped=clipped,
        solve_iterations=iterations,
        source_evaluations=source_evals,
    )


def positivity_step_bound(spec, reference=None, samples=64, delta=1e-6):
    """Largest dt for which the explicit source map cannot cross zero.

    Samples the diagonal source slopes d c_k / d u_k over states up to twice
    the reference amplitude and returns 1 / (2 max(0, -min slope)).  Infinite
    when no sampled slope is negative.
    """
    grid = spec.initial.grid
    m = spec.components
    amp = 1.0
    if reference is not None:
        amp = max(amp, float(np.abs(reference).max()))
    from .checker import halton_block  # local import to avoid a cycle at import time

    raw = halton_block(samples, 1 + grid.dimension + m, seed=7)
    ts = raw[:, 0] * spec.horizon
    xs = np.empty((samples, grid.dimension))
    for axis, (lo, hi) in enumerate(spec.domain.bounds):
        xs[:, axis] = lo + raw[:, 1 + axis] * (hi - lo)
    us = 2.0 * amp * raw[:, 1 + grid.dimension:]
    worst = 0.0
    p0 = np.zeros((m, grid.dimension))
    src = spec.coefficients.source
    for i in range(samples):
        for k in range(m):
            up = us[i].copy()
            um = us[i].copy()
            up[k] += delta
            um[k] = max(um[k] - delta, 0.0)
            c_hi = np.asarray(src(float(ts[i]), xs[i], up, p0), dtype=float)[k]
            c_lo = np.asarray(src(float(ts[i]), xs[i], um, p0), dtype=float)[k]
            slope = (c_hi - c_lo) / (up[k] - um[k])
            worst = max(worst, -float(slope))
    if worst <= 0.0:
        return float("inf")
    return 1.0 / (2.0 * worst)


def _stability_bound(spec, grid, values):
    """Largest stable explicit dt, 1 / (2 max-eig(A) sum_i h_i^-2), sampled in t."""
    worst = 0.0
    for t in np.linspace(0.0, spec.horizon, 5):
        a = _frozen_diffusion(spec, float(t), grid, values)
        lam = np.linalg.eigvalsh(a)[..., -1].max()
        worst = max(worst, float(lam))
    if worst <= 0.0:
        return float("inf")
    return 1.0 / (2.0 * worst * sum(1.0 / h**2 for h in grid.spacing))


def solve(spec, config, grid=None):
    """Integrate the system to its horizon and collect the trajectory."""
    if grid is not None:
        same = (grid.nodes_per_axis == spec.initial.grid.nodes_per_axis
                and grid.domain.bounds == spec.initial.grid.domain.bounds)
        if not same:
            raise SpecError("the supplied grid must match the grid of the initial data")
    grid = spec.initial.grid
    spec.initial.validate()
    steps = max(1, int(round(spec.horizon / config.dt)))
    dt = spec.horizon / steps
    adjusted = abs(dt - config.dt) > 1e-9 * max(1.0, config.dt)

    w = spec.initial.values.copy()
    if config.scheme == "erk2" and config.check_stability:
        bound = _stability_bound(spec, grid, w)
        if dt > bound * (1.0 + 1e-9):
            raise SolverError(
                f"explicit scheme unstable: dt={dt:g} exceeds the sampled "
                f"diffusion bound {bound:g}")

    pos_bound = positivity_step_bound(spec, reference=w)
    pos_ok = dt <= pos_bound

    source_evals = 2 if config.scheme == "erk2" else 1
    stored = [w.copy()]
    stored_t = [0.0]
    reports = []
    clipped_total = 0
    t = 0.0
    for i in range(steps):
        counter = [0]
        new = _advance(spec, grid, w, t, dt, config, counter)
        if not np.all(np.isfinite(new)):
            raise SolverError(f"solution lost finiteness at step {i + 1} (t={t + dt:g})")
        clipped = 0
        pre_clip = new
        if config.positivity == "clip_and_flag" and new.min() < 0.0:
            clipped = int((new < 0.0).sum())
            new = np.maximum(new, 0.0)
        report = _make_report(i + 1, t + dt, w, pre_clip, dt, clipped,
                              iterations=counter[0], source_evals=source_evals)
        reports.append(report)
        clipped_total += clipped
        w = new
        t += dt
        if (i + 1) % config.store_every == 0 or i + 1 == steps:
            stored.append(w.copy())
            stored_t.append(t)
    return Trajectory(
        grid=grid,
        scheme=config.scheme,
        dt=dt,
        times=np.asarray(stored_t),
        values=np.asarray(stored),
        reports=reports,
        positivity_dt_bound=pos_bound,
        positivity_dt_ok=pos_ok,
        clipped_total=clipped_total,
        dt_adjusted=adjusted,
    )


# ------------------------------------------------------------- refinement

@dataclass
class OrderEstimate:
    nodes: tuple
    diffs: tuple
    orders: tuple

    @property
    def order(self):
        return self.orders[-1]


def _restrict(values, factor):
    sl = (slice(None),) + tuple(
        slice(None, None, factor) for _ in range(values.ndim - 1))
    return values[sl]


def _interp_initial(field, grid):
    """Re-discretize initial data onto ``grid`` by piecewise-linear interpolation."""
    src = field.grid
    if (src.nodes_per_axis == grid.nodes_per_axis
            and src.domain.bounds == grid.domain.bounds):
        return Field.from_arrays(grid, field.values.copy())
    out = np.empty((field.components,) + grid.shape)
    if grid.dimension == 1:
        for k in range(field.components):
            out[k] = np.interp(grid.axes[0], src.axes[0], field.values[k])
    else:
        pts = grid.points.reshape(-1, grid.dimension)
        for k in range(field.components):
            itp = RegularGridInterpolator(src.axes, field.values[k],
                                          method="linear", bounds_error=False,
                                          fill_value=None)
            out[k] = itp(pts).reshape(grid.shape)
    return Field.from_arrays(grid, out)


def estimate_order(spec, config, grids, rebuild_initial=None):
    """Observed convergence order from a ladder of node-doubling grids.

    ``grids`` must contain at least three grids over the problem's domain,
    each refining the previous one exactly (2N - 1 nodes per axis), so that
    coarse nodes are a subset of fine nodes.  ``rebuild_initial(grid)``
    re-discretizes the initial data on each level; without it the base
    initial data is interpolated piecewise-linearly, which caps the
    observable order for smooth problems.  Each halving of h divides dt by
    four so that first-order-in-time schemes expose their spatial order too.
    Differences between consecutive finals are measured in the sup norm on
    the coarsest grid's nodes.
    """
    grids = list(grids)
    if len(grids) < 3:
        raise SpecError("order estimation needs at least three grids")
    for g in grids:
        if g.domain.bounds != spec.domain.bounds:
            raise SpecError("refinement grids must cover the problem domain")
    for lvl in range(len(grids) - 1):
        want = tuple(2 * n - 1 for n in grids[lvl].nodes_per_axis)
        if grids[lvl + 1].nodes_per_axis != want:
            raise SpecError(
                f"grid {lvl + 1} must refine grid {lvl} exactly "
                f"(expected {want} nodes per axis)")

    finals = []
    dt = config.dt
    for g in grids:
        init = rebuild_initial(g) if rebuild_initial else _interp_initial(spec.initial, g)
        level_spec = replace(spec, initial=init)
        traj = solve(level_spec, replace(config, dt=dt))
        finals.append(traj.final_values)
        dt /= 4.0
    diffs = []
    for lvl in range(len(grids) - 1):
        coarse = _restrict(finals[lvl], 2 ** lvl)
        fine = _restrict(finals[lvl + 1], 2 ** (lvl + 1))
        diffs.append(float(np.abs(coarse - fine).max()))
    if any(d < 1e-13 for d in diffs):
        raise DegenerateRefinement(
            f"refinement differences {diffs} are at roundoff; no order is observable")
    orders = tuple(
        float(np.log2(diffs[i] / diffs[i + 1])) for i in range(len(diffs) - 1))
    return OrderEstimate(nodes=tuple(g.nodes_per_axis[0] for g in grids),
                         diffs=tuple(diffs), orders=orders)


# --------------------------------------------------- whole-space surrogate

@dataclass
class NestedConvergenceReport:
    radii: tuple
    diffs: tuple
    comparison_radius: float
    tol: float
    trajectories: list

    @property
    def converged(self):
        return self.diffs[-1] <= self.tol


def solve_cauchy_nested(spec, radii, config, cutoff_width=1.0,
                        tol_nested=1e-6, compare_radius=None):
    """Whole-space surrogate: solve on nested centered boxes, compare cores.

    The problem must be posed on the centered box of the largest radius, with
    initial data that decays toward its boundary.  For each smaller radius r
    the box is cut out of the base grid (radii must be node-aligned so node
    sets coincide exactly), and both the initial data and the source term are
    multiplied by a radial cutoff that vanishes at radius r.  Successive
    final states are compared in the sup norm on the core region (default:
    half the smallest radius).  Differences that fail to decrease between
    consecutive radius pairs while still sitting above ``tol_nested`` raise
    NonConvergence; otherwise the trajectory on the largest box is returned
    together with the comparison report.
    """
    radii = tuple(sorted(float(r) for r in radii))
    if len(radii) < 3:
        raise SpecError("nested comparison needs at least three radii")
    if cutoff_width <= 0 or cutoff_width > radii[0]:
        raise SpecError("cutoff width must lie in (0, smallest radius]")
    grid = spec.initial.grid
    n = grid.dimension
    r_max = radii[-1]
    for axis, (lo, hi) in enumerate(spec.domain.bounds):
        if abs(lo + r_max) > 1e-9 or abs(hi - r_max) > 1e-9:
            raise SpecError(
                "the base problem must live on the centered box of the largest radius")

    core = compare_radius if compare_radius is not None else radii[0] / 2.0
    if not 0 < core <= radii[0]:
        raise SpecError("comparison radius must lie inside the smallest box")

    trajs = []
    offsets = []
    for r in radii:
        offs = []
        for axis in range(n):
            shift = (r_max - r) / grid.spacing[axis]
            off = int(round(shift))
            if abs(shift - off) > 1e-9:
                raise SpecError("box radii must be node-aligned with the base grid")
            offs.append(off)
        offsets.append(tuple(offs))
        trajs.append(solve(_boxed_subproblem(spec, r, offs, cutoff_width), config))

    diffs = []
    for lvl in range(len(radii) - 1):
        diffs.append(_core_difference(trajs[lvl], trajs[lvl + 1],
                                      offsets[lvl], offsets[lvl + 1], grid, core))
    for lvl in range(len(diffs) - 1):
        if diffs[lvl + 1] >= diffs[lvl] and diffs[lvl + 1] > tol_nested:
            raise NonConvergence(
                f"nested-box differences {diffs} do not decrease; the "
                "whole-space limit is not visible at these radii")
    report = NestedConvergenceReport(
        radii=radii, diffs=tuple(diffs), comparison_radius=core,
        tol=tol_nested, trajectories=trajs,
    )
    return trajs[-1], report


def _boxed_subproblem(spec, radius, offsets, cutoff_width):
    """Cut the centered box of the given radius out of the base problem."""
    grid = spec.initial.grid
    sub_bounds = tuple((-radius, radius) for _ in range(grid.dimension))
    sub_domain = SpatialDomain(bounds=sub_bounds,
                               boundary_kind=spec.domain.boundary_kind)
    sub_shape = tuple(nn - 2 * o for nn, o in zip(grid.nodes_per_axis, offsets))
    sub_grid = Grid(sub_domain, sub_shape)
    sel = tuple(slice(o, nn - o) for nn, o in zip(grid.nodes_per_axis, offsets))
    zeta = build_cutoff(radius, cutoff_width)
    weights = zeta(sub_grid.points)
    vals = spec.initial.values[(slice(None),) + sel] * weights[None]
    sub_init = Field.from_arrays(sub_grid, vals)

    base_source = spec.coefficients.source

    def cut_source(t, x, u, p, _z=zeta, _src=base_source):
        c = np.asarray(_src(t, x, u, p), dtype=float)
        u_arr = np.asarray(u, dtype=float)
        z = np.asarray(_z(x), dtype=float)
        return z[..., None] * np.broadcast_to(c, u_arr.shape)

    sub_coeffs = replace(spec.coefficients, source=cut_source)
    return replace(spec, domain=sub_domain, coefficients=sub_coeffs,
                   initial=sub_init)


def _core_difference(small, big, offs_small, offs_big, base_grid, core):
    sel_small = []
    sel_big = []
    for axis in range(base_grid.dimension):
        ax = base_grid.axes[axis]
        idx = np.nonzero(np.abs(ax) <= core + 1e-12)[0]
        sel_small.append(slice(idx[0] - offs_small[axis], idx[-1] + 1 - offs_small[axis]))
        sel_big.append(slice(idx[0] - offs_big[axis], idx[-1] + 1 - offs_big[axis]))
    a = small.final_values[(slice(None),) + tuple(sel_small)]
    b = big.final_values[(slice(None),) + tuple(sel_big)]
    return float(np.abs(a - b).max())
