"""Scenario configs: parse, validate, build pipeline objects, run.

A scenario is one YAML document describing a complete estimation setup:
metric family, optional bump localization, stress-energy source, region,
probe state, and simulation parameters.  The bundled library covers one
scenario per headline result; `run_bound` and `run_simulate` turn a
scenario into a plain report dict (rendering lives in reports.py).
"""
from __future__ import annotations

import importlib.resources
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import yaml

from . import geometry as geo
from . import stress_energy as se
from .generator import (GeneratorResult, coordinate_independence_check,
                        bundled_coordinate_bump, conserved_test_tensor,
                        integrate_generator, nonconserved_test_tensor,
                        spherical_test_box, trace_null_residual)
from .probe import (GaussianProbeState, ModeSpectrum, crlb_amplitude,
                    effective_constant_C, flat_band_spectrum,
                    gaussian_band_spectrum, hamiltonian_variance,
                    load_spectrum_table, monochromatic_spectrum)
from .quadrature import RegionSpec, integrate
from .simulate import (crb_saturation_check, histogram_fisher, linear_estimator,
                       model_from_state, classical_fisher, simulate_readout)

KINDS = ("generator-crlb", "coordinate-check", "unruh-product", "proper-time")


class ScenarioError(ValueError):
    """Config validation failure, naming the offending key."""

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"scenario key '{key}': {message}")


@dataclass(frozen=True)
class Scenario:
    """Parsed scenario document.  Sections stay as plain dicts; the
    build_* functions construct pipeline objects on demand."""

    name: str
    kind: str
    description: str
    raw: dict

    def section(self, key: str, required: bool = True) -> Optional[dict]:
        val = self.raw.get(key)
        if val is None:
            if required:
                raise ScenarioError(key, "section is required for kind "
                                    f"'{self.kind}'")
            return None
        if not isinstance(val, dict):
            raise ScenarioError(key, "must be a mapping")
        return val


def _need(d: dict, key: str, path: str):
    if key not in d:
        raise ScenarioError(f"{path}.{key}", "missing")
    return d[key]


def _num(d: dict, key: str, path: str, default=None):
    if key not in d:
        if default is None:
            raise ScenarioError(f"{path}.{key}", "missing")
        return default
    v = d[key]
    if not isinstance(v, (int, float)) or isinstance(v, bool):
        raise ScenarioError(f"{path}.{key}", f"expected a number, got {v!r}")
    return float(v)


def load_scenario(path) -> Scenario:
    with open(path, "r") as fh:
        doc = yaml.safe_load(fh)
    return parse_scenario(doc)


def parse_scenario(doc) -> Scenario:
    if not isinstance(doc, dict):
        raise ScenarioError("<root>", "document must be a mapping")
    name = doc.get("name")
    if not isinstance(name, str) or not name:
        raise ScenarioError("name", "must be a nonempty string")
    kind = doc.get("kind")
    if kind not in KINDS:
        raise ScenarioError("kind", f"must be one of {', '.join(KINDS)}; got {kind!r}")
    desc = doc.get("description", "")
    known = {"name", "kind", "description", "family", "bump", "stress_energy",
             "region", "probe", "simulation"}
    for key in doc:
        if key not in known:
            raise ScenarioError(key, "unknown section")
    return Scenario(name=name, kind=kind, description=str(desc), raw=doc)


# ---------------------------------------------------------------------------
# builders
# ---------------------------------------------------------------------------

def _build_profile(spec: dict, path: str):
    kind = _need(spec, "kind", path)
    if kind == "constant":
        value = _num(spec, "value", path, default=1.0)
        return lambda x: np.full(np.asarray(x).shape[:-1], value)
    if kind == "bump":
        return _build_bump(spec, path)
    raise ScenarioError(f"{path}.kind", f"unknown profile kind {kind!r}")


def _build_bump(spec: dict, path: str) -> geo.BumpProfile:
    plateau = np.asarray(_need(spec, "plateau", path), dtype=float)
    support = np.asarray(_need(spec, "support", path), dtype=float)
    try:
        return geo.BumpProfile(plateau=plateau, support=support,
                               kind=spec.get("kind_name", "smoothstep"),
                               order=int(spec.get("order", 3)))
    except ValueError as exc:
        raise ScenarioError(path, str(exc)) from exc


def build_family(sc: Scenario):
    spec = sc.section("family")
    name = _need(spec, "name", "family")
    params = dict(spec.get("parameters") or {})
    if name not in geo.BUILTIN_FAMILIES:
        raise ScenarioError("family.name",
                            f"unknown family {name!r}; built-ins: "
                            + ", ".join(sorted(geo.BUILTIN_FAMILIES)))
    if name == "g00_profile_perturbation":
        prof_spec = params.pop("profile", None)
        if not isinstance(prof_spec, dict):
            raise ScenarioError("family.parameters.profile",
                                "g00_profile_perturbation needs a profile mapping")
        params["profile"] = _build_profile(prof_spec, "family.parameters.profile")
    try:
        fam = geo.BUILTIN_FAMILIES[name](**params)
    except TypeError as exc:
        raise ScenarioError("family.parameters", str(exc)) from exc
    bump_spec = sc.raw.get("bump")
    if bump_spec is not None:
        bump = _build_bump(bump_spec, "bump")
        fam = geo.localize(fam, bump)
    return fam


def build_field(sc: Scenario, family=None) -> se.StressEnergyField:
    spec = sc.section("stress_energy")
    em_spec = spec.get("em")
    grid_spec = spec.get("grid")
    if (em_spec is None) == (grid_spec is None):
        raise ScenarioError("stress_energy",
                            "exactly one of 'em' or 'grid' must be given")
    frame = spec.get("frame", "chart")
    if frame not in ("chart", "orthonormal"):
        raise ScenarioError("stress_energy.frame",
                            f"must be 'chart' or 'orthonormal', got {frame!r}")
    if grid_spec is not None:
        path = _need(grid_spec, "path", "stress_energy.grid")
        grid = se.load_grid(path)
        return se.StressEnergyField(grid=grid, chart=grid.chart, label=sc.name)
    kind = _need(em_spec, "kind", "stress_energy.em")
    if kind == "plane-wave":
        cfg = se.em_plane_wave(
            amplitude=_num(em_spec, "amplitude", "stress_energy.em"),
            omega=_num(em_spec, "omega", "stress_energy.em"),
            phase=_num(em_spec, "phase", "stress_energy.em", default=0.0))
    elif kind == "uniform":
        cfg = se.em_uniform(_need(em_spec, "E", "stress_energy.em"),
                            _need(em_spec, "B", "stress_energy.em"))
    else:
        raise ScenarioError("stress_energy.em.kind",
                            f"unknown EM configuration {kind!r}")
    frame_metric = None
    chart = "cartesian"
    if frame == "orthonormal":
        if family is None:
            raise ScenarioError("stress_energy.frame",
                                "orthonormal frame needs the scenario family")
        base = family.base if isinstance(family, geo.LocalizedFamily) else family
        frame_metric = base
        chart = base.chart_name
    return se.StressEnergyField(em=cfg, frame_metric=frame_metric,
                                chart=chart, label=sc.name)


def build_region(sc: Scenario, resolution_mult: float = 1.0) -> RegionSpec:
    spec = sc.section("region")
    box = np.asarray(_need(spec, "box", "region"), dtype=float)
    res = _need(spec, "resolution", "region")
    rule = spec.get("rule", "trapezoid")
    try:
        region = RegionSpec(box=box, resolution=tuple(np.atleast_1d(res)),
                            rule=rule)
    except ValueError as exc:
        raise ScenarioError("region", str(exc)) from exc
    if resolution_mult != 1.0:
        region = region.scaled(resolution_mult)
    return region


def build_state(sc: Scenario, required: bool = True) -> Optional[GaussianProbeState]:
    spec = sc.section("probe", required=required)
    if spec is None:
        return None
    sp = spec.get("spectrum")
    if not isinstance(sp, dict):
        raise ScenarioError("probe.spectrum", "must be a mapping")
    fam = _need(sp, "family", "probe.spectrum")
    tau = _num(sp, "tau", "probe.spectrum")
    cutoff = _num(sp, "dc_cutoff_mult", "probe.spectrum", default=1.0)
    if fam == "monochromatic":
        spectrum = monochromatic_spectrum(
            omega=_num(sp, "omega", "probe.spectrum"),
            n_photons=_num(sp, "n_photons", "probe.spectrum"),
            tau=tau, dc_cutoff_mult=cutoff)
    elif fam == "gaussian-band":
        spectrum = gaussian_band_spectrum(
            omega0=_num(sp, "omega", "probe.spectrum"),
            fractional_width=_num(sp, "fractional_width", "probe.spectrum"),
            n_photons=_num(sp, "n_photons", "probe.spectrum"), tau=tau,
            n_modes=int(_num(sp, "n_modes", "probe.spectrum", default=101)),
            dc_cutoff_mult=cutoff)
    elif fam == "flat-band":
        spectrum = flat_band_spectrum(
            omega_lo=_num(sp, "omega_lo", "probe.spectrum"),
            omega_hi=_num(sp, "omega_hi", "probe.spectrum"),
            n_photons=_num(sp, "n_photons", "probe.spectrum"), tau=tau,
            n_modes=int(_num(sp, "n_modes", "probe.spectrum", default=101)),
            dc_cutoff_mult=cutoff)
    elif fam == "table":
        spectrum = load_spectrum_table(_need(sp, "path", "probe.spectrum"),
                                       tau=tau, dc_cutoff_mult=cutoff)
    else:
        raise ScenarioError("probe.spectrum.family",
                            f"unknown spectrum family {fam!r}")
    try:
        return GaussianProbeState(
            spectrum=spectrum,
            squeeze_r=_num(spec, "squeeze_r", "probe", default=0.0),
            reference_kind=spec.get("reference", "vacuum-coherent"),
            hbar=_num(spec, "hbar", "probe", default=1.0))
    except ValueError as exc:
        raise ScenarioError("probe", str(exc)) from exc


def build_sim_params(sc: Scenario) -> dict:
    spec = sc.section("simulation", required=False) or {}
    n = spec.get("n_samples", 10 ** 6)
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ScenarioError("simulation.n_samples", f"must be a positive integer, got {n!r}")
    seed = spec.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise ScenarioError("simulation.seed", f"must be an integer, got {seed!r}")
    return {"n_samples": n, "seed": seed,
            "a_true": _num(spec, "a_true", "simulation", default=0.0)}


# ---------------------------------------------------------------------------
# runners (plain dict reports; serialization lives in reports.py)
# ---------------------------------------------------------------------------

def _q(value, units: str) -> dict:
    return {"value": value, "units": units}


def _generator_block(res: GeneratorResult) -> dict:
    return {
        "P_total": _q(res.P_total, "geometric (G=c=1)"),
        "P_plateau": _q(res.P_plateau, "geometric (G=c=1)"),
        "P_shell": _q(res.P_shell, "geometric (G=c=1)"),
        "error_estimate": _q(res.error_estimate, "geometric (G=c=1)"),
        "warnings": list(res.warnings),
    }


def _crlb_block(rep) -> dict:
    return {
        "C": _q(rep.C, "hbar/amplitude^2"),
        "var_X1": _q(rep.var_X1, "hbar^2/amplitude^2"),
        "var_X2": _q(rep.var_X2, "hbar^2/amplitude^2"),
        "crlb": _q(rep.crlb, "amplitude^2"),
        "shot_noise": _q(rep.shot_noise, "amplitude^2"),
        "remainder_ratio": _q(rep.remainder_ratio, "dimensionless"),
        "n_dc_excluded": _q(rep.n_dc_excluded, "count"),
        "commutator_residual": _q(rep.commutator_residual, "dimensionless"),
        "counter_rotating_scale": _q(rep.counter_rotating_scale, "dimensionless"),
        "flags": list(rep.flags),
    }


def run_bound(sc: Scenario, resolution_mult: float = 1.0) -> dict:
    """Metric -> stress-energy -> generator -> probe chain for one
    scenario; returns the report body."""
    from . import __version__
    report = {"scenario": dict(sc.raw), "name": sc.name, "kind": sc.kind,
              "version": __version__}
    if sc.kind == "coordinate-check":
        report["coordinate_check"] = _run_coordinate_check(sc, resolution_mult)
        return report

    fam = build_family(sc)
    field = build_field(sc, family=fam)
    region = build_region(sc, resolution_mult)
    res = integrate_generator(field, fam, region)
    report["generator"] = _generator_block(res)

    base = fam.base if isinstance(fam, geo.LocalizedFamily) else fam
    if base.label in ("flrw_closed", "de_sitter"):
        resid = trace_null_residual(field, fam, region)
        report["trace_null"] = {
            "residual": _q(resid, "dimensionless"),
            "traceless_coupling": bool(resid <= 1e-12),
        }

    state = build_state(sc, required=False)
    if state is not None:
        rep = crlb_amplitude(state)
        report["crlb"] = _crlb_block(rep)
    elif "trace_null" in report:
        # conformally coupled probe: no mean-field information at all
        report["crlb"] = {
            "crlb": _q(math.inf, "amplitude^2"),
            "flags": ["traceless probe: generator vanishes pointwise; "
                      "the scale parameter is invisible at this order"],
        }

    if sc.kind == "unruh-product":
        report["unruh"] = _run_unruh(sc, state, res)
    elif sc.kind == "proper-time":
        report["proper_time"] = _run_proper_time(sc, state, field, region, res)
    return report


def _run_coordinate_check(sc: Scenario, resolution_mult: float) -> dict:
    spec = sc.section("region", required=False)
    if spec is not None:
        region = build_region(sc, resolution_mult)
    else:
        res = 33 if resolution_mult == 1.0 else max(
            3, int(round(32 * resolution_mult)) + 1)
        region = RegionSpec(box=spherical_test_box(), resolution=(res,) * 4)
    bump = bundled_coordinate_bump()
    out = {}
    for label, tensor in (("conserved", conserved_test_tensor()),
                          ("nonconserved", nonconserved_test_tensor())):
        rep = coordinate_independence_check(tensor, region, bump=bump)
        dP = rep.P_isotropic - rep.P_schwarzschild
        out[label] = {
            "P_schwarzschild": _q(rep.P_schwarzschild, "geometric (G=c=1)"),
            "P_isotropic": _q(rep.P_isotropic, "geometric (G=c=1)"),
            "difference": _q(dP, "geometric (G=c=1)"),
            "angular_integral": _q(rep.angular_integral, "geometric (G=c=1)"),
            "flux_minus_divergence": _q(rep.flux_minus_divergence,
                                        "geometric (G=c=1)"),
            "error_estimate": _q(rep.error_estimate, "geometric (G=c=1)"),
            "divergence_residual": _q(rep.divergence_residual, "dimensionless"),
            "conserved": rep.conserved,
            "consistent": bool(abs(dP - rep.angular_integral) <= rep.error_estimate
                               and abs(dP - rep.flux_minus_divergence)
                               <= rep.error_estimate),
        }
    return out


def _run_unruh(sc: Scenario, state: Optional[GaussianProbeState],
               res: GeneratorResult) -> dict:
    """Product of the component-estimation bound with the variance of
    the windowed component integral; 2 P_total is the mean of that
    integral, and for the bundled null probe the integral itself is
    tau times the field Hamiltonian."""
    if state is None:
        raise ScenarioError("probe", "unruh-product needs a probe section")
    rep = crlb_amplitude(state)
    tau = state.spectrum.tau
    var_int_T = tau ** 2 * hamiltonian_variance(state)
    product = rep.crlb * var_int_T
    rhs = state.hbar ** 2
    return {
        "mean_int_T": _q(2.0 * res.P_total, "geometric (G=c=1)"),
        "var_int_T": _q(var_int_T, "hbar^2"),
        "product": _q(product, "hbar^2"),
        "rhs": _q(rhs, "hbar^2"),
        "product_residual": _q(abs(product - rhs) / rhs, "dimensionless"),
    }


def _run_proper_time(sc: Scenario, state: Optional[GaussianProbeState],
                     field: se.StressEnergyField, region: RegionSpec,
                     res: GeneratorResult) -> dict:
    """Time-energy reduction for a uniform lapse perturbation.

    Classical side: the generator integral must equal half the window
    length times the (constant) field energy; the energy route samples
    thin spatial slabs, independent of the 4D quadrature.  Quantum
    side: the amplitude bound pulled back to proper time through
    d tau / d theta = -tau_w / 2 must land on hbar^2 / (4 var H).
    """
    if state is None:
        raise ScenarioError("probe", "proper-time needs a probe section")
    box = region.box
    tau_window = box[0, 1] - box[0, 0]
    slab_box = box.copy()
    energies = []
    for t in np.linspace(box[0, 0], box[0, 1], 5):
        width = 1e-3 * tau_window
        slab_box[0] = (t - width, t + width) if t > box[0, 0] else (t, t + 2 * width)
        # 3D energy at fixed time via a thin normalized slab
        slab = RegionSpec(box=slab_box, resolution=(2,) + region.resolution[1:])

        def t00(pts, tt=t):
            p = pts.copy()
            p[..., 0] = tt
            return field.tensor(p)[..., 0, 0]

        energies.append(integrate(t00, slab) / (slab_box[0, 1] - slab_box[0, 0]))
    energies = np.asarray(energies)
    H_bar = float(np.mean(energies))
    H_spread = float(np.ptp(energies))
    kappa = res.P_total / H_bar
    mean_ratio = kappa / (0.5 * tau_window)

    rep = crlb_amplitude(state)
    crlb_tau = (0.5 * tau_window) ** 2 * rep.crlb
    var_H = hamiltonian_variance(state)
    hbar = state.hbar
    rhs = hbar ** 2 / (4.0 * var_H)
    return {
        "H_bar": _q(H_bar, "geometric (G=c=1)"),
        "H_spread": _q(H_spread, "geometric (G=c=1)"),
        "tau_window": _q(tau_window, "length"),
        "kappa": _q(kappa, "length"),
        "kappa_over_half_window": _q(mean_ratio, "dimensionless"),
        "mean_residual": _q(abs(mean_ratio - 1.0), "dimensionless"),
        "var_H": _q(var_H, "hbar^2/length^2"),
        "crlb_proper_time": _q(crlb_tau, "length^2"),
        "time_energy_rhs": _q(rhs, "length^2"),
        "reduction_residual": _q(abs(crlb_tau - rhs) / rhs, "dimensionless"),
    }


def run_simulate(sc: Scenario, seed: Optional[int] = None,
                 resolution_mult: float = 1.0) -> dict:
    """Monte Carlo readout run with CRB comparison embedded."""
    report = run_bound(sc, resolution_mult=resolution_mult)
    state = build_state(sc, required=True)
    C = effective_constant_C(state.spectrum, state.hbar)
    if C <= 0.0:
        raise ScenarioError("probe", "simulation needs a responding probe (C > 0)")
    params = build_sim_params(sc)
    if seed is not None:
        params["seed"] = int(seed)
    model = model_from_state(state, a_true=params["a_true"])
    samples = simulate_readout(model, params["n_samples"], params["seed"])
    run = linear_estimator(samples, model, seed=params["seed"],
                           crlb=crlb_amplitude(state).crlb)
    fisher = classical_fisher(model)
    fisher_hist = histogram_fisher(samples, model)
    sat = crb_saturation_check(state)
    report["simulation"] = {
        "n_samples": _q(run.n_samples, "count"),
        "seed": _q(run.seed, "count"),
        "mean_estimate": _q(run.mean_estimate, "amplitude"),
        "a_true": _q(params["a_true"], "amplitude"),
        "empirical_variance": _q(run.empirical_variance, "amplitude^2"),
        "analytic_variance": _q(run.analytic_variance, "amplitude^2"),
        "crlb": _q(run.crlb, "amplitude^2"),
        "variance_relative_error": _q(run.variance_relative_error, "dimensionless"),
        "sampling_rel_std": _q(run.sampling_rel_std, "dimensionless"),
        "classical_fisher": _q(fisher, "amplitude^-2"),
        "histogram_fisher": _q(fisher_hist, "amplitude^-2"),
        "saturation": {
            "quantum_bound": _q(sat["quantum_bound"], "amplitude^2"),
            "classical_fisher_inverse": _q(sat["classical_fisher_inverse"],
                                           "amplitude^2"),
            "relative_gap": _q(sat["relative_gap"], "dimensionless"),
            "saturated": sat["saturated"],
        },
    }
    return report


# ---------------------------------------------------------------------------
# bundled library
# ---------------------------------------------------------------------------

def bundled_scenario_names() -> list:
    root = importlib.resources.files("metricprobe") / "data" / "scenarios"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".yaml"))


def load_bundled(name: str) -> Scenario:
    root = importlib.resources.files("metricprobe") / "data" / "scenarios"
    path = root / f"{name}.yaml"
    if not path.is_file():
        raise ScenarioError("name", f"no bundled scenario {name!r}; available: "
                            + ", ".join(bundled_scenario_names()))
    with path.open("r") as fh:
        return parse_scenario(yaml.safe_load(fh))


def resolve_scenario(ref: str) -> Scenario:
    """Accept either a filesystem path or a bundled scenario name."""
    import os
    if os.path.exists(ref):
        return load_scenario(ref)
    return load_bundled(ref)
