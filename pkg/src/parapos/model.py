"""Domains, grids, fields, and coefficient containers for reaction-diffusion systems.

The systems handled here have the form

    du^k/dt = sum_ij a_ij(t,x,u) d2u^k/dx_i dx_j
            + sum_i  b_i(t,x,u,p) du^k/dx_i + c^k(t,x,u,p),    k = 1..m,

on a box in 1 or 2 space dimensions, with homogeneous Dirichlet data or a
nested-box approximation of the whole-space problem.  Competition systems
(per-species diffusion d_k, source u^k(beta_k - sum_i gamma_ki u^i)) are the
specialized case carried by :class:`LVCoefficients`.

Evaluator convention: coefficient callables are vectorized over a leading
batch shape.  With ``t`` a scalar, ``x`` has shape ``(..., n)``, ``u`` has
``(..., m)``, and the gradient ``p`` has ``(..., m, n)``.  Diffusion returns
``(..., n, n)`` (shared across components) or ``(..., m, n, n)``
(per component); drift returns ``(..., n)``; the source returns ``(..., m)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import CoefficientError, DomainError, SpecError

BOUNDARY_KINDS = ("dirichlet_zero", "cauchy_nested")

#: relative asymmetry beyond which a diffusion matrix is rejected outright
ASYMMETRY_TOL = 1e-12


@dataclass(frozen=True)
class SpatialDomain:
    """Axis-aligned box with a boundary treatment tag."""

    bounds: tuple
    boundary_kind: str = "dirichlet_zero"

    def __post_init__(self):
        bounds = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
        object.__setattr__(self, "bounds", bounds)
        if not 1 <= len(bounds) <= 2:
            raise SpecError(f"dimension must be 1 or 2, got {len(bounds)}")
        for lo, hi in bounds:
            if not (math.isfinite(lo) and math.isfinite(hi) and hi > lo):
                raise SpecError(f"degenerate interval [{lo}, {hi}]")
        if self.boundary_kind not in BOUNDARY_KINDS:
            raise SpecError(f"unknown boundary kind {self.boundary_kind!r}")

    @property
    def dimension(self):
        return len(self.bounds)

    @property
    def lengths(self):
        return tuple(hi - lo for lo, hi in self.bounds)

    def contains(self, x, slack=0.0):
        x = np.asarray(x, dtype=float)
        ok = np.ones(x.shape[:-1], dtype=bool)
        for axis, (lo, hi) in enumerate(self.bounds):
            ok &= (x[..., axis] >= lo - slack) & (x[..., axis] <= hi + slack)
        return ok


@dataclass(frozen=True)
class Grid:
    """Uniform tensor grid including boundary nodes."""

    domain: SpatialDomain
    nodes_per_axis: tuple

    def __post_init__(self):
        nodes = tuple(int(n) for n in self.nodes_per_axis)
        object.__setattr__(self, "nodes_per_axis", nodes)
        if len(nodes) != self.domain.dimension:
            raise SpecError("nodes_per_axis does not match domain dimension")
        if any(n < 3 for n in nodes):
            raise SpecError("need at least 3 nodes per axis")

    @property
    def dimension(self):
        return self.domain.dimension

    @property
    def shape(self):
        return self.nodes_per_axis

    @cached_property
    def axes(self):
        return tuple(
            np.linspace(lo, hi, n)
            for (lo, hi), n in zip(self.domain.bounds, self.nodes_per_axis)
        )

    @cached_property
    def spacing(self):
        return tuple(
            (hi - lo) / (n - 1)
            for (lo, hi), n in zip(self.domain.bounds, self.nodes_per_axis)
        )

    @cached_property
    def points(self):
        """Node coordinates, shape ``(*shape, dimension)``."""
        mesh = np.meshgrid(*self.axes, indexing="ij")
        return np.stack(mesh, axis=-1)

    @cached_property
    def interior_mask(self):
        mask = np.ones(self.shape, dtype=bool)
        for axis in range(self.dimension):
            idx = [slice(None)] * self.dimension
            idx[axis] = 0
            mask[tuple(idx)] = False
            idx[axis] = -1
            mask[tuple(idx)] = False
        return mask

    @property
    def interior_slices(self):
        return tuple(slice(1, -1) for _ in range(self.dimension))

    @property
    def n_nodes(self):
        return int(np.prod(self.shape))


def _zero_boundary(values, grid):
    dim = grid.dimension
    for axis in range(dim):
        idx = [slice(None)] * (1 + dim)
        idx[1 + axis] = 0
        values[tuple(idx)] = 0.0
        idx[1 + axis] = -1
        values[tuple(idx)] = 0.0


@dataclass
class Field:
    """Componentwise state on a grid: ``values`` has shape ``(m, *grid.shape)``.

    Constructors zero the boundary layer exactly when the domain carries
    Dirichlet data; solver steps maintain that invariant.
    """

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 1 + self.grid.dimension:
            raise SpecError("field values must have shape (m, *grid.shape)")
        if self.values.shape[1:] != self.grid.shape:
            raise SpecError(
                f"field extent {self.values.shape[1:]} does not match grid {self.grid.shape}"
            )

    @classmethod
    def zeros(cls, grid, components):
        return cls(grid, np.zeros((components,) + grid.shape))

    @classmethod
    def from_arrays(cls, grid, arrays):
        values = np.array(arrays, dtype=float)
        if values.ndim == grid.dimension:
            values = values[None]
        fld = cls(grid, values)
        if grid.domain.boundary_kind == "dirichlet_zero":
            _zero_boundary(fld.values, grid)
        return fld

    @classmethod
    def from_functions(cls, grid, funcs):
        pts = grid.points
        values = np.stack([np.broadcast_to(f(pts), grid.shape).astype(float) for f in funcs])
        return cls.from_arrays(grid, values)

    @property
    def components(self):
        return self.values.shape[0]

    def component(self, k):
        return self.values[k]

    def copy(self):
        return Field(self.grid, self.values.copy())

    def sup_norm(self):
        """Largest pointwise Euclidean norm over components."""
        return float(np.sqrt((self.values**2).sum(axis=0)).max())

    def max_abs(self):
        return float(np.abs(self.values).max())

    def boundary_max_abs(self):
        mask = ~self.grid.interior_mask
        return float(np.abs(self.values[:, mask]).max()) if mask.any() else 0.0

    def validate(self):
        if not np.isfinite(self.values).all():
            raise SpecError("field contains non-finite values")
        if self.grid.domain.boundary_kind == "dirichlet_zero":
            worst = self.boundary_max_abs()
            if worst != 0.0:
                raise SpecError(f"boundary values must be exactly 0, found {worst}")
        return self


def _symmetrize(a_raw, n):
    a_t = np.swapaxes(a_raw, -1, -2)
    scale = max(float(np.abs(a_raw).max(initial=0.0)), 1.0)
    asym = float(np.abs(a_raw - a_t).max(initial=0.0)) / scale
    if asym > ASYMMETRY_TOL:
        raise CoefficientError(f"diffusion matrix asymmetric beyond tolerance ({asym:.3e})")
    return 0.5 * (a_raw + a_t)


@dataclass
class CoefficientSet:
    """Evaluators for the second-order, drift, and source coefficients.

    ``diffusion(t, x, u)`` may return a shared ``(..., n, n)`` matrix or a
    per-component ``(..., m, n, n)`` stack, selected by
    ``per_component_diffusion``.  Evaluators must be pure: same inputs, same
    bits.  When ``depends_on_gradient`` is False the source and drift ignore
    ``p`` by contract and callers may pass zeros.
    """

    diffusion: object
    drift: object
    source: object
    depends_on_gradient: bool = False
    per_component_diffusion: bool = False

    def diffusion_matrices(self, t, x, u, components):
        """Evaluate and normalize diffusion to shape ``(..., m, n, n)``."""
        x = np.asarray(x, dtype=float)
        n = x.shape[-1]
        batch = x.shape[:-1]
        a_raw = np.asarray(self.diffusion(t, x, u), dtype=float)
        if not np.isfinite(a_raw).all():
            raise CoefficientError("diffusion evaluator returned non-finite entries")
        if self.per_component_diffusion:
            want = batch + (components, n, n)
        else:
            want = batch + (n, n)
        try:
            a_raw = np.broadcast_to(a_raw, want)
        except ValueError as exc:
            raise CoefficientError(f"diffusion shape {a_raw.shape} not broadcastable to {want}") from exc
        a_sym = _symmetrize(a_raw, n)
        if not self.per_component_diffusion:
            a_sym = np.broadcast_to(a_sym[..., None, :, :], batch + (components, n, n))
        return a_sym


@dataclass
class LVCoefficients:
    """Competition-system coefficients: per-species diffusion, growth, interaction.

    ``growth[k]`` and ``interaction[k][i]`` are callables ``(t, x) -> array``
    broadcasting over the batch shape of ``x[..., :n]``.  The source is

        c^k(t, x, u) = u^k * (growth_k(t,x) - sum_i interaction_ki(t,x) u^i).

    For two species the classical symbols map onto the arrays as
    beta, gamma, delta, rho, sigma, theta =
    growth[0], interaction[0][0], interaction[0][1],
    growth[1], interaction[1][0], interaction[1][1].
    """

    diffusion: np.ndarray
    growth: tuple
    interaction: tuple

    def __post_init__(self):
        self.diffusion = np.asarray(self.diffusion, dtype=float)
        m = self.diffusion.shape[0]
        if np.any(self.diffusion <= 0.0):
            raise SpecError("diffusion constants must be positive")
        if len(self.growth) != m:
            raise SpecError("growth list length must equal species count")
        if len(self.interaction) != m or any(len(row) != m for row in self.interaction):
            raise SpecError("interaction must be an m-by-m table")
        self.growth = tuple(self.growth)
        self.interaction = tuple(tuple(row) for row in self.interaction)

    @property
    def species(self):
        return self.diffusion.shape[0]

    @classmethod
    def two_species(cls, d1, d2, beta, gamma, delta, rho, sigma, theta):
        """Build the 2-species system from the classical symbol set."""
        return cls(
            diffusion=np.array([d1, d2], dtype=float),
            growth=(beta, rho),
            interaction=((gamma, delta), (sigma, theta)),
        )

    # classical-symbol views for the two-species case
    def _alias(self, row, col=None):
        if self.species != 2:
            raise SpecError("classical symbols are defined for two species only")
        return self.growth[row] if col is None else self.interaction[row][col]

    @property
    def beta(self):
        return self._alias(0)

    @property
    def gamma(self):
        return self._alias(0, 0)

    @property
    def delta(self):
        return self._alias(0, 1)

    @property
    def rho(self):
        return self._alias(1)

    @property
    def sigma(self):
        return self._alias(1, 0)

    @property
    def theta(self):
        return self._alias(1, 1)

    def growth_values(self, t, x):
        batch = np.asarray(x).shape[:-1]
        cols = [np.broadcast_to(np.asarray(g(t, x), dtype=float), batch) for g in self.growth]
        return np.stack(cols, axis=-1)

    def interaction_values(self, t, x):
        batch = np.asarray(x).shape[:-1]
        m = self.species
        out = np.empty(batch + (m, m))
        for k in range(m):
            for i in range(m):
                out[..., k, i] = np.broadcast_to(
                    np.asarray(self.interaction[k][i](t, x), dtype=float), batch
                )
        return out

    def source(self, t, x, u):
        u = np.asarray(u, dtype=float)
        beta = self.growth_values(t, x)
        gam = self.interaction_values(t, x)
        return u * (beta - np.einsum("...ki,...i->...k", gam, u))


@dataclass
class Majorants:
    """User-supplied envelopes and constants used by the sampled assumption checks.

    All function-valued entries take the state magnitude ``s = |u|`` (and the
    gradient magnitude ``q = |p|`` for ``theta2``).  Only the pieces a given
    check needs have to be present.
    """

    kappa: float | None = None
    mu: object | None = None
    mu_hat: object | None = None
    theta1: object | None = None
    theta2: object | None = None
    d1: float | None = None
    d2: float | None = None
    c1: float | None = None
    c2: float | None = None

    def __post_init__(self):
        if self.kappa is not None and not self.kappa > 0:
            raise SpecError("kappa must be positive")
        for name in ("d1", "d2"):
            val = getattr(self, name)
            if val is not None and val < 0:
                raise SpecError(f"{name} must be non-negative")
        for name in ("c1", "c2"):
            val = getattr(self, name)
            if val is not None and not val > 0:
                raise SpecError(f"{name} must be positive when given")
        # sampled shape constraints: mu non-decreasing, mu_hat non-increasing
        s = np.linspace(0.0, 10.0, 41)
        if self.mu is not None:
            vals = np.asarray([self.mu(v) for v in s], dtype=float)
            if np.any(np.diff(vals) < -1e-12):
                raise SpecError("mu must be non-decreasing on sampled arguments")
        if self.mu_hat is not None:
            vals = np.asarray([self.mu_hat(v) for v in s], dtype=float)
            if np.any(np.diff(vals) > 1e-12):
                raise SpecError("mu_hat must be non-increasing on sampled arguments")


@dataclass
class ProblemSpec:
    """A complete initial-boundary value problem."""

    domain: SpatialDomain
    coefficients: CoefficientSet
    initial: Field
    horizon: float
    lv: LVCoefficients | None = None

    def __post_init__(self):
        if self.horizon <= 0 or not math.isfinite(self.horizon):
            raise SpecError("horizon must be positive and finite")
        if self.initial.grid.domain.bounds != self.domain.bounds:
            raise SpecError("initial data lives on a different domain")
        self.initial.validate()
        if self.lv is not None and self.lv.species != self.components:
            raise SpecError("species count does not match initial data components")

    @property
    def components(self):
        return self.initial.components

    @property
    def dimension(self):
        return self.domain.dimension


def evaluate_coefficients(spec, t, x, u, p):
    """Evaluate ``(A, b, c)`` at one point, with shape and symmetry checks.

    Returns the per-component diffusion stack ``A`` of shape ``(m, n, n)``
    (a shared matrix is broadcast), the drift ``b`` of shape ``(n,)`` and the
    source ``c`` of shape ``(m,)``.
    """
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    p = np.asarray(p, dtype=float)
    n = spec.dimension
    m = spec.components
    if x.shape != (n,):
        raise SpecError(f"x must have shape ({n},)")
    if u.shape != (m,):
        raise SpecError(f"u must have shape ({m},)")
    if p.shape != (m, n):
        raise SpecError(f"p must have shape ({m}, {n})")
    if not spec.domain.contains(x, slack=1e-12):
        raise DomainError(f"point {x.tolist()} outside domain")

    coeffs = spec.coefficients
    a = coeffs.diffusion_matrices(t, x, u, m)
    b = np.asarray(coeffs.drift(t, x, u, p), dtype=float)
    c = np.asarray(coeffs.source(t, x, u, p), dtype=float)
    b = np.broadcast_to(b, (n,)).astype(float)
    c = np.broadcast_to(c, (m,)).astype(float)
    for name, arr in (("drift", b), ("source", c)):
        if not np.isfinite(arr).all():
            raise CoefficientError(f"{name} evaluator returned non-finite entries")
    return a, b, c


def build_lv_problem(lv, domain, initial, horizon):
    """Wrap competition coefficients as a full problem spec.

    The drift vanishes, diffusion is the per-species diagonal, and the source
    never reads the gradient.
    """
    if initial.components != lv.species:
        raise SpecError(
            f"initial data has {initial.components} components for {lv.species} species"
        )
    n = domain.dimension
    m = lv.species
    diag = np.zeros((m, n, n))
    for k in range(m):
        diag[k, np.arange(n), np.arange(n)] = lv.diffusion[k]

    def diffusion(t, x, u, _diag=diag):
        batch = np.asarray(x).shape[:-1]
        return np.broadcast_to(_diag, batch + (m, n, n))

    def drift(t, x, u, p):
        return np.zeros(np.asarray(x).shape[:-1] + (n,))

    def source(t, x, u, p, _lv=lv):
        return _lv.source(t, x, u)

    coeffs = CoefficientSet(
        diffusion=diffusion,
        drift=drift,
        source=source,
        depends_on_gradient=False,
        per_component_diffusion=True,
    )
    return ProblemSpec(domain=domain, coefficients=coeffs, initial=initial, horizon=horizon, lv=lv)


@dataclass(frozen=True)
class CutoffFunction:
    """Radial C^2 plateau: 1 inside radius - width, 0 outside radius.

    The shoulder is the quintic smoothstep, so first and second derivatives
    vanish at both ends of the transition.
    """

    radius: float
    width: float

    def radial(self, rho):
        rho = np.asarray(rho, dtype=float)
        s = np.clip((self.radius - rho) / self.width, 0.0, 1.0)
        return s * s * s * (s * (6.0 * s - 15.0) + 10.0)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if x.ndim == 0:
            return self.radial(np.abs(x))
        rho = np.sqrt((x * x).sum(axis=-1))
        return self.radial(rho)


def build_cutoff(radius, transition_width=1.0):
    if radius <= 0:
        raise SpecError("cutoff radius must be positive")
    if not 0 < transition_width <= radius:
        raise SpecError("transition width must lie in (0, radius]")
    return CutoffFunction(radius=float(radius), width=float(transition_width))
