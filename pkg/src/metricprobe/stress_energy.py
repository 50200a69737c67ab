"""Stress-energy fields: Maxwell tensors, tabulated grids, and checks.

The probe is treated at the mean-field level: fields entering these
tensors are classical expectation values, with quantum fluctuations
handled separately by the probe module.  Components are contravariant
T^munu in the chart named by the field, units with G = c = 1 and
Gaussian electromagnetic units (energy density (E^2 + B^2) / 8 pi).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .geometry import MetricFamily, metric_parameter_derivative

_COMPONENT_ORDER = [(0, 0), (0, 1), (0, 2), (0, 3), (1, 1), (1, 2), (1, 3), (2, 2), (2, 3), (3, 3)]
_COMPONENT_NAMES = [f"T{i}{j}" for i, j in _COMPONENT_ORDER]


# ---------------------------------------------------------------------------
# Maxwell stress tensor
# ---------------------------------------------------------------------------

def em_stress_tensor(E: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Maxwell stress-energy from field 3-vectors of shape (..., 3).

    T^00 = (E^2 + B^2) / 8 pi, T^0i = (E x B)_i / 4 pi,
    T^ij = [ delta_ij (E^2 + B^2) / 2 - E_i E_j - B_i B_j ] / 4 pi.

    Traceless against the Minkowski background by construction.
    """
    E = np.asarray(E, dtype=float)
    B = np.asarray(B, dtype=float)
    if E.shape != B.shape or E.shape[-1] != 3:
        raise ValueError("E and B must both have shape (..., 3)")
    u = np.sum(E * E, axis=-1) + np.sum(B * B, axis=-1)
    T = np.zeros(E.shape[:-1] + (4, 4))
    T[..., 0, 0] = u / (8.0 * math.pi)
    S = np.cross(E, B) / (4.0 * math.pi)
    for i in range(3):
        T[..., 0, i + 1] = S[..., i]
        T[..., i + 1, 0] = S[..., i]
    for i in range(3):
        for j in range(i, 3):
            val = -(E[..., i] * E[..., j] + B[..., i] * B[..., j]) / (4.0 * math.pi)
            if i == j:
                val = val + u / (8.0 * math.pi)
            T[..., i + 1, j + 1] = val
            T[..., j + 1, i + 1] = val
    return T


@dataclass(frozen=True)
class EMFieldConfig:
    """Classical electromagnetic field configuration: callables mapping
    points (..., 4) to E and B 3-vectors (..., 3)."""

    E: Callable[[np.ndarray], np.ndarray]
    B: Callable[[np.ndarray], np.ndarray]
    label: str = "em"


def em_plane_wave(amplitude: float, omega: float, phase: float = 0.0,
                  envelope: Optional[Callable[[np.ndarray], np.ndarray]] = None) -> EMFieldConfig:
    """Plane wave along +x, linearly polarized along y (E_y = B_z), the
    probe-beam geometry used against a z-propagating gravitational wave.
    An optional envelope multiplies the field amplitude."""

    def field_scalar(x):
        t = x[..., 0]
        xx = x[..., 1]
        f = amplitude * np.cos(omega * (xx - t) + phase)
        if envelope is not None:
            f = f * np.asarray(envelope(x), dtype=float)
        return f

    def Efun(x):
        out = np.zeros(x.shape[:-1] + (3,))
        out[..., 1] = field_scalar(x)
        return out

    def Bfun(x):
        out = np.zeros(x.shape[:-1] + (3,))
        out[..., 2] = field_scalar(x)
        return out

    return EMFieldConfig(E=Efun, B=Bfun, label="em_plane_wave")


def em_uniform(E_vec, B_vec) -> EMFieldConfig:
    """Spatially uniform static field vectors (mostly for tests)."""
    E0 = np.asarray(E_vec, dtype=float)
    B0 = np.asarray(B_vec, dtype=float)
    if E0.shape != (3,) or B0.shape != (3,):
        raise ValueError("E_vec and B_vec must be 3-vectors")

    def Efun(x):
        return np.broadcast_to(E0, x.shape[:-1] + (3,)).copy()

    def Bfun(x):
        return np.broadcast_to(B0, x.shape[:-1] + (3,)).copy()

    return EMFieldConfig(E=Efun, B=Bfun, label="em_uniform")


def dust_tensor(density: float) -> "StressEnergyField":
    """Comoving pressureless dust: T^00 = rho, all other components 0."""
    rho = float(density)

    def fn(x):
        T = np.zeros(x.shape[:-1] + (4, 4))
        T[..., 0, 0] = rho
        return T

    return StressEnergyField(analytic=fn, chart="cartesian", label="dust")


# ---------------------------------------------------------------------------
# tabulated grids
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TensorGrid:
    """Uniform 4D grid of symmetric rank-2 components.

    values has shape (n0, n1, n2, n3, 4, 4); origin and spacing are
    per-axis.  The text format is self-describing: a commented header
    with chart, axes, origin, spacing, shape, units and component order,
    then one row per node with the 4 node coordinates followed by the
    10 independent components in row-major node order.
    """

    values: np.ndarray
    origin: np.ndarray
    spacing: np.ndarray
    chart: str = "cartesian"
    units: str = "geometric (G=c=1)"

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 6 or v.shape[-2:] != (4, 4):
            raise ValueError("values must have shape (n0, n1, n2, n3, 4, 4)")
        if not np.allclose(v, np.swapaxes(v, -1, -2), rtol=0, atol=0):
            raise ValueError("grid components must be symmetric")
        o = np.asarray(self.origin, dtype=float).reshape(4)
        s = np.asarray(self.spacing, dtype=float).reshape(4)
        if np.any(s <= 0):
            raise ValueError("grid spacing must be positive")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "origin", o)
        object.__setattr__(self, "spacing", s)

    @property
    def shape(self):
        return self.values.shape[:4]

    def axes(self):
        return [self.origin[i] + self.spacing[i] * np.arange(self.shape[i]) for i in range(4)]

    def interpolate(self, x: np.ndarray) -> np.ndarray:
        interp = _grid_interpolator(self)
        x = np.asarray(x, dtype=float)
        flat = x.reshape(-1, 4)
        vals = interp(flat)
        return vals.reshape(x.shape[:-1] + (4, 4))


_INTERP_CACHE: dict = {}


def _grid_interpolator(grid: TensorGrid):
    key = id(grid)
    hit = _INTERP_CACHE.get(key)
    if hit is None:
        hit = RegularGridInterpolator(tuple(grid.axes()), grid.values,
                                      method="linear", bounds_error=True)
        _INTERP_CACHE[key] = hit
    return hit


def save_grid(path, grid: TensorGrid) -> None:
    axes = grid.axes()
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 4)
    comps = np.stack([grid.values[..., i, j].reshape(-1) for i, j in _COMPONENT_ORDER], axis=-1)
    header = [
        "stress-energy grid v1",
        f"chart: {grid.chart}",
        "axes: x0 x1 x2 x3",
        "origin: " + " ".join(repr(float(v)) for v in grid.origin),
        "spacing: " + " ".join(repr(float(v)) for v in grid.spacing),
        "shape: " + " ".join(str(n) for n in grid.shape),
        f"units: {grid.units}",
        "columns: x0 x1 x2 x3 " + " ".join(_COMPONENT_NAMES),
    ]
    np.savetxt(path, np.hstack([mesh, comps]), header="\n".join(header))


def load_grid(path) -> TensorGrid:
    meta = {}
    with open(path, "r") as fh:
        for line in fh:
            if not line.startswith("#"):
                break
            text = line[1:].strip()
            if ":" in text:
                k, v = text.split(":", 1)
                meta[k.strip()] = v.strip()
    for req in ("chart", "origin", "spacing", "shape"):
        if req not in meta:
            raise ValueError(f"grid file missing header field {req!r}")
    origin = np.array([float(v) for v in meta["origin"].split()])
    spacing = np.array([float(v) for v in meta["spacing"].split()])
    shape = tuple(int(v) for v in meta["shape"].split())
    data = np.loadtxt(path)
    n_nodes = int(np.prod(shape))
    if data.shape != (n_nodes, 14):
        raise ValueError(f"grid file has shape {data.shape}, expected ({n_nodes}, 14)")
    values = np.zeros(shape + (4, 4))
    for col, (i, j) in enumerate(_COMPONENT_ORDER):
        comp = data[:, 4 + col].reshape(shape)
        values[..., i, j] = comp
        values[..., j, i] = comp
    grid = TensorGrid(values=values, origin=origin, spacing=spacing,
                      chart=meta["chart"], units=meta.get("units", "geometric (G=c=1)"))
    # coordinate columns must match the declared lattice
    mesh = np.stack(np.meshgrid(*grid.axes(), indexing="ij"), axis=-1).reshape(-1, 4)
    if not np.allclose(mesh, data[:, :4], rtol=0, atol=1e-10 * np.max(np.abs(mesh) + 1)):
        raise ValueError("grid file coordinates disagree with its declared origin/spacing/shape")
    return grid


# ---------------------------------------------------------------------------
# field objects
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StressEnergyField:
    """A queryable T^munu(x).  Exactly one source must be given:

    * em: EMFieldConfig evaluated pointwise (flat-chart components); with
      frame_metric set, the E/B components are read in the local
      orthonormal frame of that (diagonal) metric and converted to chart
      components through the tetrad, which preserves tracelessness
      against the curved metric exactly.
    * grid: TensorGrid with multilinear interpolation between nodes.
    * analytic: a callable (..., 4) -> (..., 4, 4).
    """

    em: Optional[EMFieldConfig] = None
    grid: Optional[TensorGrid] = None
    analytic: Optional[Callable[[np.ndarray], np.ndarray]] = None
    chart: str = "cartesian"
    frame_metric: Optional[MetricFamily] = None
    label: str = ""

    def __post_init__(self):
        n = sum(s is not None for s in (self.em, self.grid, self.analytic))
        if n != 1:
            raise ValueError("exactly one of em, grid, analytic must be set")
        if self.grid is not None and self.grid.chart != self.chart:
            raise ValueError("grid chart label disagrees with field chart")

    def tensor(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != 4:
            raise ValueError("points must have shape (..., 4)")
        if self.em is not None:
            T = em_stress_tensor(self.em.E(x), self.em.B(x))
            if self.frame_metric is not None:
                T = _frame_to_chart(T, self.frame_metric, x)
            return T
        if self.grid is not None:
            return self.grid.interpolate(x)
        return np.asarray(self.analytic(x), dtype=float)


def _frame_to_chart(T_frame: np.ndarray, family: MetricFamily, x: np.ndarray) -> np.ndarray:
    """Convert frame components T^ab to chart components via the diagonal
    tetrad e^mu_a = delta^mu_a / sqrt(|g_mumu|): T^munu = e^mu_a e^nu_b T^ab."""
    g = family.eval(family.theta0, x)
    diag = np.stack([g[..., k, k] for k in range(4)], axis=-1)
    off = g - _diag_embed(diag)
    if np.max(np.abs(off)) > 1e-12 * max(1.0, float(np.max(np.abs(g)))):
        raise ValueError("orthonormal-frame conversion requires a diagonal metric")
    e = 1.0 / np.sqrt(np.abs(diag))
    return T_frame * e[..., :, None] * e[..., None, :]


def _diag_embed(d: np.ndarray) -> np.ndarray:
    out = np.zeros(d.shape + (4,))
    for k in range(4):
        out[..., k, k] = d[..., k]
    return out


def trace(T: np.ndarray, g: np.ndarray) -> np.ndarray:
    """g_munu T^munu with both in the same chart at the same points."""
    return np.einsum("...ij,...ij->...", np.asarray(g, dtype=float), np.asarray(T, dtype=float))


# ---------------------------------------------------------------------------
# covariant divergence (finite differences)
# ---------------------------------------------------------------------------

def _partials(fn, x: np.ndarray, h, order: int):
    """Central finite-difference partial derivatives of a (..., 4) -> (...)+tail
    map, stacked along a leading axis of length 4."""
    h = np.broadcast_to(np.asarray(h, dtype=float), (4,))
    outs = []
    for ax in range(4):
        e = np.zeros(4)
        e[ax] = 1.0
        if order == 2:
            d = (fn(x + h[ax] * e) - fn(x - h[ax] * e)) / (2.0 * h[ax])
        elif order == 4:
            d = (8.0 * (fn(x + h[ax] * e) - fn(x - h[ax] * e))
                 - (fn(x + 2.0 * h[ax] * e) - fn(x - 2.0 * h[ax] * e))) / (12.0 * h[ax])
        else:
            raise ValueError("stencil order must be 2 or 4")
        outs.append(d)
    return np.stack(outs, axis=0)


def christoffel(metric_eval: Callable[[np.ndarray], np.ndarray], x: np.ndarray,
                h=1e-3, order: int = 2) -> np.ndarray:
    """Christoffel symbols Gamma^lam_munu from finite differences of the
    metric: 0.5 g^lamrho (d_mu g_rhonu + d_nu g_rhomu - d_rho g_munu).
    Returns shape (..., 4, 4, 4) indexed [lam, mu, nu]."""
    x = np.asarray(x, dtype=float)
    g = metric_eval(x)
    ginv = np.linalg.inv(g)
    dg = np.moveaxis(_partials(metric_eval, x, h, order), 0, -3)
    # dg[..., rho, mu, nu] = d_rho g_munu
    lower = 0.5 * (np.einsum("...mrn->...rmn", dg)      # d_mu g_rhonu
                   + np.einsum("...nrm->...rmn", dg)    # d_nu g_rhomu
                   - dg)                                # d_rho g_munu
    return np.einsum("...lr,...rmn->...lmn", ginv, lower)


def covariant_divergence(field: StressEnergyField, metric_eval: Callable[[np.ndarray], np.ndarray],
                         x: np.ndarray, h=1e-3, order: int = 2) -> np.ndarray:
    """nabla_mu T^munu at x via central differences, returning (..., 4).

    metric_eval maps points to metric components in the field's chart.
    For grid-backed fields the stencil step should stay at or above the
    grid spacing (interpolation is only piecewise linear); analytic
    sources converge at the stencil order as h shrinks.
    """
    x = np.asarray(x, dtype=float)
    dT = _partials(field.tensor, x, h, order)          # (rho, ..., mu, nu) with rho = deriv axis
    div = np.einsum("m...mn->...n", dT)
    gam = christoffel(metric_eval, x, h=h, order=order)
    gam_trace = np.einsum("...mml->...l", gam)         # Gamma^mu_mulam
    T = field.tensor(x)
    div = div + np.einsum("...l,...ln->...n", gam_trace, T)
    div = div + np.einsum("...nml,...ml->...n", gam, T)
    return div


def divergence_residual(field: StressEnergyField, metric_eval, x: np.ndarray,
                        h=1e-3, order: int = 2) -> float:
    """Max |nabla_mu T^munu| over the sample points, normalized by the
    local component scale max|T| / L with L the smallest coordinate range
    spanned by the samples (or 1 for a single point)."""
    x = np.asarray(x, dtype=float)
    div = covariant_divergence(field, metric_eval, x, h=h, order=order)
    T = field.tensor(x)
    scale = float(np.max(np.abs(T)))
    if scale == 0.0:
        return 0.0
    pts = x.reshape(-1, 4)
    spans = pts.max(axis=0) - pts.min(axis=0)
    spans = spans[spans > 0]
    L = float(spans.min()) if spans.size else 1.0
    return float(np.max(np.abs(div)) / (scale / L))


# ---------------------------------------------------------------------------
# support detection
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SupportBox:
    """Grid-aligned bounding box of significant samples."""

    box: Optional[np.ndarray]   # (4, 2) or None when empty
    empty: bool
    threshold: float

    def contains_box(self, other: np.ndarray) -> bool:
        if self.empty:
            return True
        o = np.asarray(other, dtype=float)
        return bool(np.all(self.box[:, 0] >= o[:, 0]) and np.all(self.box[:, 1] <= o[:, 1]))


def support_region(field: StressEnergyField, tol: float) -> SupportBox:
    """Smallest grid-aligned box containing every sample with
    max-norm component magnitude above tol * (global max).  Only defined
    for grid-backed fields; an identically small field is flagged empty."""
    if field.grid is None:
        raise ValueError("support_region requires a grid-backed field")
    if not (0.0 < tol < 1.0):
        raise ValueError("tol must be in (0, 1)")
    mag = np.max(np.abs(field.grid.values), axis=(-1, -2))
    peak = float(mag.max())
    if peak == 0.0:
        return SupportBox(box=None, empty=True, threshold=0.0)
    mask = mag > tol * peak
    if not mask.any():
        return SupportBox(box=None, empty=True, threshold=tol * peak)
    axes = field.grid.axes()
    box = np.zeros((4, 2))
    for ax in range(4):
        proj = mask.any(axis=tuple(a for a in range(4) if a != ax))
        idx = np.nonzero(proj)[0]
        box[ax, 0] = axes[ax][idx[0]]
        box[ax, 1] = axes[ax][idx[-1]]
    return SupportBox(box=box, empty=False, threshold=tol * peak)


def tabulate(field: StressEnergyField, box, shape, chart: Optional[str] = None) -> StressEnergyField:
    """Sample any field onto a uniform grid, returning a grid-backed field."""
    box = np.asarray(box, dtype=float)
    shape = tuple(int(n) for n in shape)
    if box.shape != (4, 2) or len(shape) != 4:
        raise ValueError("box must be (4, 2) and shape length 4")
    if any(n < 2 for n in shape):
        raise ValueError("each axis needs at least 2 samples")
    axes = [np.linspace(box[i, 0], box[i, 1], shape[i]) for i in range(4)]
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    vals = field.tensor(mesh)
    spacing = [(box[i, 1] - box[i, 0]) / (shape[i] - 1) for i in range(4)]
    grid = TensorGrid(values=vals, origin=box[:, 0], spacing=np.asarray(spacing),
                      chart=chart or field.chart)
    return StressEnergyField(grid=grid, chart=grid.chart, label=field.label + "+grid")
