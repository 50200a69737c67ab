"""Metric families, parameter derivatives, and bump-function localization.

Conventions
-----------
* signature (-, +, +, +), geometric units G = c = 1
* points are arrays of shape (..., 4) in the family's chart
* metric components are arrays of shape (..., 4, 4), index order matching
  the chart's coordinate order
* a family is a one-parameter set of metrics theta -> g_munu(theta, x)
  with a declared fiducial value theta0

A localized family replaces the global parameter dependence by
theta0 + (theta - theta0) * chi(x) with chi a smooth bump that equals 1
on a plateau box and 0 outside a support box, so that the perturbation
is confined to a compact region while the fiducial geometry is untouched.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

MINKOWSKI = np.diag([-1.0, 1.0, 1.0, 1.0])

# Default step for finite-difference parameter derivatives.  Central stencil
# with one Richardson pass; the floor keeps the step sane at theta0 = 0.
def _fd_step(theta0: float) -> float:
    return max(1e-6 * abs(theta0), 1e-8)


class ChartDomainError(ValueError):
    """A point lies outside the declared chart domain."""


@dataclass(frozen=True)
class ChartDomain:
    """Validity region of a coordinate chart.

    :param box: per-axis (lo, hi) bounds; infinite ends allowed.  Finite
        ends are treated as open unless listed in ``closed_axes``.
    :param excluded: optional predicate returning True where the chart is
        additionally invalid (for example near a horizon).
    :param note: human-readable description used in error messages.
    """

    box: tuple = (((-math.inf, math.inf),) * 4)
    excluded: Optional[Callable[[np.ndarray], np.ndarray]] = None
    closed_axes: tuple = ()
    note: str = ""

    def contains(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        ok = np.ones(x.shape[:-1], dtype=bool)
        for ax, (lo, hi) in enumerate(self.box):
            c = x[..., ax]
            if ax in self.closed_axes:
                ok &= (c >= lo) & (c <= hi)
            else:
                if np.isfinite(lo):
                    ok &= c > lo
                if np.isfinite(hi):
                    ok &= c < hi
        if self.excluded is not None:
            ok &= ~np.asarray(self.excluded(x), dtype=bool)
        return ok

    def require(self, x: np.ndarray) -> None:
        ok = self.contains(x)
        if not np.all(ok):
            bad = np.asarray(x, dtype=float).reshape(-1, 4)[~ok.reshape(-1)][0]
            msg = f"point {bad.tolist()} outside chart domain"
            if self.note:
                msg += f" ({self.note})"
            raise ChartDomainError(msg)


@dataclass(frozen=True)
class MetricFamily:
    """One-parameter family of metrics on a fixed chart.

    ``eval_fn(theta, x)`` must accept points of shape (..., 4) and return
    (..., 4, 4) symmetric components.  ``deriv_fn``, when present, returns
    the analytic d g_munu / d theta at theta0.  ``sample_box`` is a finite
    box well inside the chart domain, used by validation sweeps.
    """

    label: str
    chart_name: str
    theta0: float
    eval_fn: Callable[[float, np.ndarray], np.ndarray]
    deriv_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None
    domain: ChartDomain = field(default_factory=ChartDomain)
    sample_box: Optional[np.ndarray] = None

    def eval(self, theta, x: np.ndarray) -> np.ndarray:
        """theta may be a scalar or an array of shape x.shape[:-1] (a
        pointwise parameter value, as produced by bump localization)."""
        t = np.asarray(theta, dtype=float)
        return self.eval_fn(float(t) if t.ndim == 0 else t, np.asarray(x, dtype=float))

    def deriv(self, x: np.ndarray) -> Optional[np.ndarray]:
        if self.deriv_fn is None:
            return None
        return self.deriv_fn(np.asarray(x, dtype=float))


def evaluate_metric(family, theta: float, x: np.ndarray, check: bool = True) -> np.ndarray:
    """Evaluate a family at (theta, x) with chart and sanity checks.

    Raises ChartDomainError outside the chart, ValueError on non-finite
    components (a singular point) or a non-Lorentzian signature.
    """
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != 4:
        raise ValueError("points must have shape (..., 4)")
    if check:
        family.domain.require(x)
    g = family.eval(theta, x)
    if check:
        if not np.all(np.isfinite(g)):
            raise ValueError("non-finite metric component (singular point?)")
        _require_lorentzian(g)
    return g


def _require_lorentzian(g: np.ndarray) -> None:
    # Degenerate points (for example poles of a spherical chart, where
    # det g = 0) are tolerated; any point with det g > 0 or the wrong
    # eigenvalue signs is rejected.
    w = np.linalg.eigvalsh(np.asarray(g))
    neg = np.sum(w < 0.0, axis=-1)
    pos = np.sum(w > 0.0, axis=-1)
    ok = (neg == 1) & (pos == 3)
    degenerate = (neg + pos) < 4
    if not np.all(ok | degenerate):
        raise ValueError("metric is not Lorentzian at a requested point")


def metric_parameter_derivative(family, x: np.ndarray, fd_step: Optional[float] = None) -> np.ndarray:
    """d g_munu / d theta at theta0: analytic when declared, else central
    finite differences with one Richardson extrapolation pass."""
    x = np.asarray(x, dtype=float)
    d = family.deriv(x)
    if d is not None:
        return d
    h = _fd_step(family.theta0) if fd_step is None else float(fd_step)
    return _fd_theta_derivative(family, x, h)


def _fd_theta_derivative(family, x: np.ndarray, h: float) -> np.ndarray:
    t0 = family.theta0

    def central(step):
        return (family.eval(t0 + step, x) - family.eval(t0 - step, x)) / (2.0 * step)

    d1 = central(h)
    d2 = central(0.5 * h)
    return (4.0 * d2 - d1) / 3.0


# ---------------------------------------------------------------------------
# built-in families
# ---------------------------------------------------------------------------

def _sym_zeros(x: np.ndarray) -> np.ndarray:
    return np.zeros(x.shape[:-1] + (4, 4))


def _broadcast_eta(x: np.ndarray) -> np.ndarray:
    return np.broadcast_to(MINKOWSKI, x.shape[:-1] + (4, 4)).copy()


def gw_plane_wave(theta0: float = 0.0,
                  envelope: Optional[Callable[[np.ndarray], np.ndarray]] = None) -> MetricFamily:
    """Linearly polarized plane gravitational wave on a Cartesian chart
    (t, x, y, z), propagating along z in the broadband approximation:
    g = eta + A * f * (dx^2 - dy^2) with f an optional profile of the
    point (default 1, the constant-amplitude limit)."""

    def profile(x):
        if envelope is None:
            return np.ones(x.shape[:-1])
        return np.asarray(envelope(x), dtype=float)

    def ev(theta, x):
        g = _broadcast_eta(x)
        f = theta * profile(x)
        g[..., 1, 1] += f
        g[..., 2, 2] -= f
        return g

    def dv(x):
        d = _sym_zeros(x)
        f = profile(x)
        d[..., 1, 1] = f
        d[..., 2, 2] = -f
        return d

    return MetricFamily(
        label="gw_plane_wave", chart_name="cartesian", theta0=float(theta0),
        eval_fn=ev, deriv_fn=dv,
        sample_box=np.array([[-2.0, 2.0]] * 4),
    )


def minkowski_component(mu0: int, nu0: int, theta0: float = 0.0) -> MetricFamily:
    """Constant perturbation of a single Minkowski component on a Cartesian
    chart: g = eta + theta * e, where e has 1 in the (mu0, nu0) slot (and
    its symmetric partner when mu0 != nu0)."""
    if not (0 <= mu0 <= 3 and 0 <= nu0 <= 3):
        raise ValueError("component indices must be in 0..3")

    def ev(theta, x):
        g = _broadcast_eta(x)
        g[..., mu0, nu0] += theta
        if mu0 != nu0:
            g[..., nu0, mu0] += theta
        return g

    def dv(x):
        d = _sym_zeros(x)
        d[..., mu0, nu0] = 1.0
        if mu0 != nu0:
            d[..., nu0, mu0] = 1.0
        return d

    return MetricFamily(
        label=f"minkowski_component_{mu0}{nu0}", chart_name="cartesian",
        theta0=float(theta0), eval_fn=ev, deriv_fn=dv,
        sample_box=np.array([[-2.0, 2.0]] * 4),
    )


def g00_profile_perturbation(profile: Callable[[np.ndarray], np.ndarray],
                             theta0: float = 0.0) -> MetricFamily:
    """Perturbation of g_00 alone by a given spacetime profile a(x):
    g_00 = -1 + theta * a(x).  With a constant profile this is the
    uniform lapse perturbation behind the proper-time reduction."""

    def ev(theta, x):
        g = _broadcast_eta(x)
        g[..., 0, 0] += theta * np.asarray(profile(x), dtype=float)
        return g

    def dv(x):
        d = _sym_zeros(x)
        d[..., 0, 0] = np.asarray(profile(x), dtype=float)
        return d

    return MetricFamily(
        label="g00_profile_perturbation", chart_name="cartesian",
        theta0=float(theta0), eval_fn=ev, deriv_fn=dv,
        sample_box=np.array([[-2.0, 2.0]] * 4),
    )


def schwarzschild(theta0: float = 0.0) -> MetricFamily:
    """Schwarzschild exterior on the chart (t, r, theta, phi), mass as the
    family parameter.  The domain excludes r <= 2.5 m to stay clear of the
    horizon; at m = 0 the chart is flat spherical coordinates."""
    m0 = float(theta0)

    def ev(theta, x):
        r = x[..., 1]
        th = x[..., 2]
        f = 1.0 - 2.0 * theta / r
        g = _sym_zeros(x)
        g[..., 0, 0] = -f
        g[..., 1, 1] = 1.0 / f
        g[..., 2, 2] = r ** 2
        g[..., 3, 3] = (r * np.sin(th)) ** 2
        return g

    def dv(x):
        r = x[..., 1]
        f = 1.0 - 2.0 * m0 / r
        d = _sym_zeros(x)
        d[..., 0, 0] = 2.0 / r
        d[..., 1, 1] = 2.0 / (r * f ** 2)
        return d

    def excluded(x):
        return x[..., 1] <= 2.5 * m0

    dom = ChartDomain(
        box=((-math.inf, math.inf), (0.0, math.inf), (0.0, math.pi), (-math.inf, math.inf)),
        excluded=excluded if m0 > 0 else None,
        closed_axes=(2,),
        note="Schwarzschild chart: r > max(0, 2.5 m)",
    )
    rmin = max(0.5, 3.0 * m0)
    return MetricFamily(
        label="schwarzschild", chart_name="schwarzschild", theta0=m0,
        eval_fn=ev, deriv_fn=dv, domain=dom,
        sample_box=np.array([[-1.0, 1.0], [rmin, rmin + 6.0], [0.4, math.pi - 0.4], [0.0, 2.0 * math.pi]]),
    )


def isotropic(theta0: float = 0.0) -> MetricFamily:
    """Schwarzschild exterior in isotropic coordinates (t, rho, theta, phi),
    mass as the family parameter.  At m = 0 it coincides exactly with the
    flat spherical chart of ``schwarzschild``."""
    m0 = float(theta0)

    def ev(theta, x):
        rho = x[..., 1]
        th = x[..., 2]
        u = theta / (2.0 * rho)
        psi4 = (1.0 + u) ** 4
        g = _sym_zeros(x)
        g[..., 0, 0] = -((1.0 - u) / (1.0 + u)) ** 2
        g[..., 1, 1] = psi4
        g[..., 2, 2] = psi4 * rho ** 2
        g[..., 3, 3] = psi4 * (rho * np.sin(th)) ** 2
        return g

    def dv(x):
        rho = x[..., 1]
        th = x[..., 2]
        u = m0 / (2.0 * rho)
        d = _sym_zeros(x)
        # d/dm [-((1-u)/(1+u))^2] = (2/rho) (1-u)/(1+u)^3
        d[..., 0, 0] = (2.0 / rho) * (1.0 - u) / (1.0 + u) ** 3
        dpsi4 = (2.0 / rho) * (1.0 + u) ** 3
        d[..., 1, 1] = dpsi4
        d[..., 2, 2] = dpsi4 * rho ** 2
        d[..., 3, 3] = dpsi4 * (rho * np.sin(th)) ** 2
        return d

    def excluded(x):
        return x[..., 1] <= 1.25 * m0

    dom = ChartDomain(
        box=((-math.inf, math.inf), (0.0, math.inf), (0.0, math.pi), (-math.inf, math.inf)),
        excluded=excluded if m0 > 0 else None,
        closed_axes=(2,),
        note="isotropic chart: rho > max(0, 1.25 m)",
    )
    rmin = max(0.5, 2.0 * m0)
    return MetricFamily(
        label="isotropic", chart_name="isotropic", theta0=m0,
        eval_fn=ev, deriv_fn=dv, domain=dom,
        sample_box=np.array([[-1.0, 1.0], [rmin, rmin + 6.0], [0.4, math.pi - 0.4], [0.0, 2.0 * math.pi]]),
    )


def flrw_closed(theta0: float = 1.0) -> MetricFamily:
    """Closed matter-dominated FLRW universe in conformal coordinates
    (eta, chi, theta, phi) with the maximal scale factor a_max as the
    family parameter:

        ds^2 = (a_max^2/4) (1 - cos eta)^2 [-deta^2 + dchi^2
               + sin^2 chi (dtheta^2 + sin^2 theta dphi^2)]

    Every component scales as a_max^2, so dg/da_max = (2/a_max) g.
    """
    a0 = float(theta0)
    if a0 <= 0:
        raise ValueError("a_max must be positive")

    def shape(x):
        eta = x[..., 0]
        chi = x[..., 1]
        th = x[..., 2]
        g = _sym_zeros(x)
        pref = 0.25 * (1.0 - np.cos(eta)) ** 2
        g[..., 0, 0] = -pref
        g[..., 1, 1] = pref
        g[..., 2, 2] = pref * np.sin(chi) ** 2
        g[..., 3, 3] = pref * (np.sin(chi) * np.sin(th)) ** 2
        return g

    def ev(theta, x):
        t = np.asarray(theta, dtype=float)
        pref = t ** 2 if t.ndim == 0 else (t ** 2)[..., None, None]
        return pref * shape(x)

    def dv(x):
        return 2.0 * a0 * shape(x)

    dom = ChartDomain(
        box=((0.0, 2.0 * math.pi), (0.0, math.pi), (0.0, math.pi), (-math.inf, math.inf)),
        closed_axes=(1, 2),
        note="conformal FLRW chart: 0 < eta < 2 pi",
    )
    return MetricFamily(
        label="flrw_closed", chart_name="conformal-flrw", theta0=a0,
        eval_fn=ev, deriv_fn=dv, domain=dom,
        sample_box=np.array([[0.6, 2.6], [0.3, 1.3], [0.5, math.pi - 0.5], [0.0, 2.0]]),
    )


def de_sitter(theta0: float = 1.0) -> MetricFamily:
    """de Sitter spacetime in closed conformal coordinates
    (eta, chi, theta, phi) with the cosmological constant Lambda as the
    family parameter:

        ds^2 = (3/Lambda) sec^2 eta [-deta^2 + dchi^2
               + sin^2 chi (dtheta^2 + sin^2 theta dphi^2)]

    Components scale as 1/Lambda, so dg/dLambda = -(1/Lambda) g.
    """
    lam0 = float(theta0)
    if lam0 <= 0:
        raise ValueError("Lambda must be positive")

    def shape(x):
        eta = x[..., 0]
        chi = x[..., 1]
        th = x[..., 2]
        g = _sym_zeros(x)
        pref = 1.0 / np.cos(eta) ** 2
        g[..., 0, 0] = -pref
        g[..., 1, 1] = pref
        g[..., 2, 2] = pref * np.sin(chi) ** 2
        g[..., 3, 3] = pref * (np.sin(chi) * np.sin(th)) ** 2
        return g

    def ev(theta, x):
        t = np.asarray(theta, dtype=float)
        pref = 3.0 / t if t.ndim == 0 else (3.0 / t)[..., None, None]
        return pref * shape(x)

    def dv(x):
        return (-3.0 / lam0 ** 2) * shape(x)

    dom = ChartDomain(
        box=((-0.5 * math.pi, 0.5 * math.pi), (0.0, math.pi), (0.0, math.pi), (-math.inf, math.inf)),
        closed_axes=(1, 2),
        note="conformal de Sitter chart: |eta| < pi/2",
    )
    return MetricFamily(
        label="de_sitter", chart_name="conformal-desitter", theta0=lam0,
        eval_fn=ev, deriv_fn=dv, domain=dom,
        sample_box=np.array([[-1.0, 1.0], [0.3, 1.3], [0.5, math.pi - 0.5], [0.0, 2.0]]),
    )


BUILTIN_FAMILIES = {
    "gw_plane_wave": gw_plane_wave,
    "minkowski_component": minkowski_component,
    "g00_profile_perturbation": g00_profile_perturbation,
    "schwarzschild": schwarzschild,
    "isotropic": isotropic,
    "flrw_closed": flrw_closed,
    "de_sitter": de_sitter,
}


# ---------------------------------------------------------------------------
# bump profiles and localization
# ---------------------------------------------------------------------------

def _smoothstep_coeffs(order: int) -> np.ndarray:
    """Coefficients (ascending powers) of the order-k polynomial smoothstep
    S_k on [0, 1]: the unique degree 2k+1 polynomial with S(0)=0, S(1)=1
    and k vanishing derivatives at both ends."""
    k = int(order)
    coeffs = np.zeros(2 * k + 2)
    for n in range(k + 1):
        c = math.comb(k + n, n) * math.comb(2 * k + 1, k - n) * (-1.0) ** n
        coeffs[k + 1 + n] = c
    return coeffs


def _smoothstep(u: np.ndarray, order: int) -> np.ndarray:
    coeffs = _smoothstep_coeffs(order)
    u = np.clip(u, 0.0, 1.0)
    out = np.zeros_like(u)
    for c in coeffs[::-1]:
        out = out * u + c
    return out


_MOLLIFIER_NODES = 64
_moll_x, _moll_w = np.polynomial.legendre.leggauss(_MOLLIFIER_NODES)


def _mollifier_kernel(v: np.ndarray) -> np.ndarray:
    out = np.zeros_like(v)
    inside = np.abs(v) < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - v[inside] ** 2))
    return out


_MOLLIFIER_NORM = float(np.sum(_moll_w * _mollifier_kernel(_moll_x)))


def _mollifier_step(u: np.ndarray) -> np.ndarray:
    """C-infinity transition on [0, 1]: normalized antiderivative of the
    exp(-1/(1-v^2)) mollifier, exactly 0 / 1 outside and 1/2 at u = 1/2."""
    u = np.clip(np.asarray(u, dtype=float), 0.0, 1.0)
    w = 2.0 * u - 1.0
    # integral of the kernel from -1 to w, Gauss-Legendre nodes mapped
    # per element: v = -1 + half * (node + 1), half = (w + 1) / 2
    half = 0.5 * (w + 1.0)
    v = -1.0 + half[..., None] * (_moll_x + 1.0)
    vals = _mollifier_kernel(v)
    integ = half * np.sum(_moll_w * vals, axis=-1)
    return integ / _MOLLIFIER_NORM


@dataclass(frozen=True)
class BumpProfile:
    """Separable bump chi(x) = prod_i chi_i(x_i), equal to 1 on the plateau
    box, 0 outside the support box, with a smooth transition in between.

    kind 'smoothstep' gives C^order seams (polynomial); kind 'mollifier'
    gives C-infinity seams.  The per-axis margins (support minus plateau)
    are the transition widths; sensitivity to them shows up in the shell
    contribution reported by the generator quadrature.
    """

    plateau: np.ndarray
    support: np.ndarray
    kind: str = "smoothstep"
    order: int = 3

    def __post_init__(self):
        p = np.atleast_2d(np.asarray(self.plateau, dtype=float))
        s = np.atleast_2d(np.asarray(self.support, dtype=float))
        if p.shape != (4, 2) or s.shape != (4, 2):
            raise ValueError("plateau and support must be (4, 2) boxes")
        if np.any(p[:, 1] <= p[:, 0]) or np.any(s[:, 1] <= s[:, 0]):
            raise ValueError("boxes must have positive extent on every axis")
        if np.any(p[:, 0] <= s[:, 0]) or np.any(p[:, 1] >= s[:, 1]):
            raise ValueError("plateau must lie strictly inside support on every axis")
        if self.kind not in ("smoothstep", "mollifier"):
            raise ValueError(f"unknown bump kind {self.kind!r}")
        if self.kind == "smoothstep" and self.order < 1:
            raise ValueError("smoothstep order must be >= 1")
        object.__setattr__(self, "plateau", p)
        object.__setattr__(self, "support", s)

    def _step(self, u: np.ndarray) -> np.ndarray:
        if self.kind == "smoothstep":
            return _smoothstep(u, self.order)
        return _mollifier_step(u)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.ones(x.shape[:-1])
        for ax in range(4):
            s0, s1 = self.support[ax]
            p0, p1 = self.plateau[ax]
            c = x[..., ax]
            lo = self._step((c - s0) / (p0 - s0))
            hi = self._step((s1 - c) / (s1 - p1))
            prof = np.where(c < p0, lo, np.where(c > p1, hi, 1.0))
            prof = np.where((c <= s0) | (c >= s1), 0.0, prof)
            out = out * prof
        return out


@dataclass(frozen=True)
class LocalizedFamily:
    """Family with the parameter change confined by a bump: the metric is
    base.eval(theta0 + (theta - theta0) * chi(x), x), so theta = theta0
    reproduces the fiducial geometry everywhere and the derivative is
    chi(x) times the base derivative."""

    base: MetricFamily
    bump: BumpProfile

    @property
    def label(self) -> str:
        return self.base.label + "+bump"

    @property
    def chart_name(self) -> str:
        return self.base.chart_name

    @property
    def theta0(self) -> float:
        return self.base.theta0

    @property
    def domain(self) -> ChartDomain:
        return self.base.domain

    def eval(self, theta: float, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        chi = self.bump(x)
        t0 = self.base.theta0
        theta_loc = t0 + (float(theta) - t0) * chi
        return self.base.eval(theta_loc, x)

    def deriv(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        chi = self.bump(x)
        base_d = metric_parameter_derivative(self.base, x)
        return chi[..., None, None] * base_d


def localize(family: MetricFamily, bump: BumpProfile) -> LocalizedFamily:
    """Attach a bump to a family.  The bump support must lie inside the
    chart domain (corners and interior samples are checked)."""
    s = bump.support
    axes = [np.linspace(s[ax, 0], s[ax, 1], 5) for ax in range(4)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    if not np.all(family.domain.contains(grid)):
        raise ChartDomainError("bump support extends outside the chart domain")
    return LocalizedFamily(base=family, bump=bump)


# ---------------------------------------------------------------------------
# tabulated families (grid import)
# ---------------------------------------------------------------------------

def tabulated_family(grid0, grid_deriv, theta0: float = 0.0,
                     chart_name: str = "cartesian", label: str = "tabulated") -> MetricFamily:
    """Family linear in theta built from two tabulated component grids:
    g(theta, x) = g0(x) + (theta - theta0) * dg(x), both interpolated
    multilinearly.  ``grid0`` and ``grid_deriv`` are TensorGrid objects
    from the stress_energy module (10 independent components each)."""
    from .stress_energy import TensorGrid  # local import to avoid a cycle

    if not isinstance(grid0, TensorGrid) or not isinstance(grid_deriv, TensorGrid):
        raise TypeError("tabulated_family expects TensorGrid inputs")
    if grid0.chart != chart_name or grid_deriv.chart != chart_name:
        raise ValueError("grid chart labels must match the declared chart")

    t0 = float(theta0)

    def ev(theta, x):
        t = np.asarray(theta, dtype=float)
        dt = float(t) - t0 if t.ndim == 0 else (t - t0)[..., None, None]
        return grid0.interpolate(x) + dt * grid_deriv.interpolate(x)

    def dv(x):
        return grid_deriv.interpolate(x)

    box = tuple((grid0.origin[i], grid0.origin[i] + grid0.spacing[i] * (grid0.shape[i] - 1))
                for i in range(4))
    dom = ChartDomain(box=box, closed_axes=(0, 1, 2, 3), note="tabulated grid extent")
    return MetricFamily(label=label, chart_name=chart_name, theta0=t0,
                        eval_fn=ev, deriv_fn=dv, domain=dom,
                        sample_box=np.array(box))
