import copy
import json
import math

import numpy as np
import pytest
import yaml

from metricprobe.cli import main
from metricprobe.reports import dumps_report, render_summary, write_report
from metricprobe.scenarios import (KINDS, Scenario, ScenarioError,
                                   build_family, build_field, build_region,
                                   build_sim_params, build_state,
                                   bundled_scenario_names, load_bundled,
                                   parse_scenario, resolve_scenario, run_bound,
                                   run_simulate)

EXPECTED_SCENARIOS = [
    "desitter-em-probe",
    "flrw-em-probe",
    "gw-broadband-coherent",
    "gw-monochromatic-coherent",
    "gw-squeezed-r1",
    "proper-time-reduction",
    "schwarzschild-coordinate-check",
    "unruh-component",
]

MONO_CRLB = 2.5330295910584447e-08
MONO_P_TOTAL = 0.0012433979929054322  # V4 / 16 pi on the alias-free grid


def _tiny_doc():
    return {
        "name": "tiny",
        "kind": "generator-crlb",
        "description": "minimal in-memory scenario for tests",
        "family": {"name": "gw_plane_wave", "parameters": {"theta0": 0.0}},
        "stress_energy": {"em": {"kind": "plane-wave", "amplitude": 1.0,
                                 "omega": 62.83185307179586}},
        "region": {"box": [[0.0, 1.0], [0.0, 1.0], [0.0, 0.25], [0.0, 0.25]],
                   "resolution": [5, 5, 3, 3]},
        "probe": {"spectrum": {"family": "monochromatic",
                               "omega": 62.83185307179586,
                               "n_photons": 1.0e4, "tau": 1.0}},
        "simulation": {"n_samples": 20000, "seed": 7, "a_true": 3.0e-4},
    }


# ---------------------------------------------------------------------------
# parsing and validation
# ---------------------------------------------------------------------------

def test_parse_rejects_non_mapping():
    with pytest.raises(ScenarioError) as exc:
        parse_scenario([1, 2, 3])
    assert exc.value.key == "<root>"


def test_parse_requires_name_and_kind():
    with pytest.raises(ScenarioError) as exc:
        parse_scenario({"kind": "generator-crlb"})
    assert exc.value.key == "name"
    with pytest.raises(ScenarioError) as exc:
        parse_scenario({"name": "x", "kind": "frobnicate"})
    assert exc.value.key == "kind"
    assert "generator-crlb" in str(exc.value)


def test_parse_rejects_unknown_section():
    doc = _tiny_doc()
    doc["extras"] = {}
    with pytest.raises(ScenarioError) as exc:
        parse_scenario(doc)
    assert exc.value.key == "extras"


def test_parse_accepts_all_kinds():
    for kind in KINDS:
        sc = parse_scenario({"name": "x", "kind": kind})
        assert isinstance(sc, Scenario)
        assert sc.kind == kind


def test_missing_section_names_the_key():
    sc = parse_scenario({"name": "x", "kind": "generator-crlb"})
    with pytest.raises(ScenarioError) as exc:
        build_family(sc)
    assert exc.value.key == "family"


def test_section_must_be_mapping():
    doc = _tiny_doc()
    doc["region"] = 5
    sc = parse_scenario(doc)
    with pytest.raises(ScenarioError) as exc:
        build_region(sc)
    assert exc.value.key == "region"


def test_unknown_family_lists_builtins():
    doc = _tiny_doc()
    doc["family"]["name"] = "kerr"
    with pytest.raises(ScenarioError) as exc:
        build_family(parse_scenario(doc))
    assert exc.value.key == "family.name"
    assert "gw_plane_wave" in str(exc.value)


def test_bad_family_parameters():
    doc = _tiny_doc()
    doc["family"]["parameters"] = {"theta0": 0.0, "bogus": 1}
    with pytest.raises(ScenarioError) as exc:
        build_family(parse_scenario(doc))
    assert exc.value.key == "family.parameters"


def test_field_requires_exactly_one_source():
    doc = _tiny_doc()
    del doc["stress_energy"]["em"]
    with pytest.raises(ScenarioError) as exc:
        build_field(parse_scenario(doc))
    assert exc.value.key == "stress_energy"


def test_field_frame_validation():
    doc = _tiny_doc()
    doc["stress_energy"]["frame"] = "comoving"
    with pytest.raises(ScenarioError) as exc:
        build_field(parse_scenario(doc))
    assert exc.value.key == "stress_energy.frame"
    doc["stress_energy"]["frame"] = "orthonormal"
    with pytest.raises(ScenarioError):
        build_field(parse_scenario(doc), family=None)


def test_field_unknown_em_kind():
    doc = _tiny_doc()
    doc["stress_energy"]["em"]["kind"] = "dipole"
    with pytest.raises(ScenarioError) as exc:
        build_field(parse_scenario(doc))
    assert exc.value.key == "stress_energy.em.kind"


def test_probe_rejects_string_numbers():
    # YAML 1.1 parses '1.0e4' (no signed exponent) as a string; the
    # builder must flag it instead of crashing downstream
    doc = _tiny_doc()
    doc["probe"]["spectrum"]["n_photons"] = "1.0e4"
    with pytest.raises(ScenarioError) as exc:
        build_state(parse_scenario(doc))
    assert exc.value.key == "probe.spectrum.n_photons"


def test_probe_unknown_spectrum_family():
    doc = _tiny_doc()
    doc["probe"]["spectrum"]["family"] = "comb"
    with pytest.raises(ScenarioError) as exc:
        build_state(parse_scenario(doc))
    assert exc.value.key == "probe.spectrum.family"


def test_probe_reference_mismatch_is_scenario_error():
    doc = _tiny_doc()
    doc["probe"]["squeeze_r"] = 1.0  # vacuum-coherent reference
    with pytest.raises(ScenarioError) as exc:
        build_state(parse_scenario(doc))
    assert exc.value.key == "probe"


def test_sim_params_validation_and_defaults():
    doc = _tiny_doc()
    doc["simulation"]["n_samples"] = True
    with pytest.raises(ScenarioError) as exc:
        build_sim_params(parse_scenario(doc))
    assert exc.value.key == "simulation.n_samples"
    doc["simulation"] = {"n_samples": 0}
    with pytest.raises(ScenarioError):
        build_sim_params(parse_scenario(doc))
    doc["simulation"] = {"seed": True}
    with pytest.raises(ScenarioError) as exc:
        build_sim_params(parse_scenario(doc))
    assert exc.value.key == "simulation.seed"
    del doc["simulation"]
    params = build_sim_params(parse_scenario(doc))
    assert params == {"n_samples": 10 ** 6, "seed": 0, "a_true": 0.0}


def test_resolution_multiplier_scales_region():
    sc = load_bundled("gw-monochromatic-coherent")
    assert tuple(build_region(sc).resolution) == (17, 17, 9, 9)
    assert tuple(build_region(sc, 2.0).resolution) == (33, 33, 17, 17)


# ---------------------------------------------------------------------------
# bundled library
# ---------------------------------------------------------------------------

def test_bundled_names():
    assert bundled_scenario_names() == EXPECTED_SCENARIOS


def test_all_bundled_parse_with_descriptions():
    for name in EXPECTED_SCENARIOS:
        sc = load_bundled(name)
        assert sc.name == name
        assert sc.kind in KINDS
        assert sc.description.strip()


def test_load_bundled_unknown_name():
    with pytest.raises(ScenarioError) as exc:
        load_bundled("no-such-thing")
    assert "gw-monochromatic-coherent" in str(exc.value)


def test_resolve_scenario_path_and_name(tmp_path):
    path = tmp_path / "tiny.yaml"
    path.write_text(yaml.safe_dump(_tiny_doc()))
    sc = resolve_scenario(str(path))
    assert sc.name == "tiny"
    assert resolve_scenario("gw-squeezed-r1").name == "gw-squeezed-r1"


# ---------------------------------------------------------------------------
# runs
# ---------------------------------------------------------------------------

def test_bound_report_frozen_values_and_determinism():
    sc = load_bundled("gw-monochromatic-coherent")
    rep1 = run_bound(sc)
    rep2 = run_bound(sc)
    assert dumps_report(rep1) == dumps_report(rep2)
    assert rep1["generator"]["P_total"]["value"] == pytest.approx(
        MONO_P_TOTAL, rel=1e-13)
    assert rep1["crlb"]["crlb"]["value"] == pytest.approx(MONO_CRLB, rel=1e-13)
    assert rep1["crlb"]["crlb"]["value"] == rep1["crlb"]["shot_noise"]["value"]
    assert rep1["scenario"] == sc.raw


def test_bound_squeezed_gain_over_shot_noise():
    rep = run_bound(load_bundled("gw-squeezed-r1"))
    crlb = rep["crlb"]["crlb"]["value"]
    shot = rep["crlb"]["shot_noise"]["value"]
    assert math.isclose(crlb, shot * math.exp(-2.0), rel_tol=1e-12)


def test_bound_traceless_scenarios():
    for name in ("flrw-em-probe", "desitter-em-probe"):
        rep = run_bound(load_bundled(name))
        assert rep["trace_null"]["residual"]["value"] == 0.0
        assert rep["trace_null"]["traceless_coupling"] is True
        assert rep["crlb"]["crlb"]["value"] == math.inf
        assert any("invisible" in f for f in rep["crlb"]["flags"])


def test_bound_unruh_product():
    rep = run_bound(load_bundled("unruh-component"))
    block = rep["unruh"]
    assert block["product"]["value"] == block["rhs"]["value"] == 1.0
    assert block["product_residual"]["value"] == 0.0
    assert block["mean_int_T"]["value"] == pytest.approx(
        2.0 * rep["generator"]["P_total"]["value"], rel=1e-15)


def test_bound_proper_time_reduction():
    rep = run_bound(load_bundled("proper-time-reduction"))
    block = rep["proper_time"]
    assert block["mean_residual"]["value"] <= 1e-12
    assert block["reduction_residual"]["value"] <= 1e-12
    assert block["kappa"]["value"] == pytest.approx(0.5, rel=1e-12)
    assert block["H_spread"]["value"] <= 1e-12 * block["H_bar"]["value"]


def test_bound_smoke_all_non_coordinate_scenarios():
    for name in EXPECTED_SCENARIOS:
        if name == "schwarzschild-coordinate-check":
            continue
        rep = run_bound(load_bundled(name))
        assert rep["name"] == name
        assert "generator" in rep


def test_coordinate_check_scenario_structure():
    # shrunk resolution: the full-resolution run belongs to the
    # acceptance suite
    rep = run_bound(load_bundled("schwarzschild-coordinate-check"),
                    resolution_mult=0.25)
    assert rep["coordinate_check"]["conserved"]["conserved"] is True
    assert rep["coordinate_check"]["nonconserved"]["conserved"] is False
    diff = rep["coordinate_check"]["conserved"]["difference"]["value"]
    est = rep["coordinate_check"]["conserved"]["error_estimate"]["value"]
    assert abs(diff) <= est


def test_simulate_run_seeded(tmp_path):
    sc = parse_scenario(_tiny_doc())
    rep = run_simulate(sc)
    sim = rep["simulation"]
    assert sim["n_samples"]["value"] == 20000
    assert sim["seed"]["value"] == 7
    assert sim["saturation"]["saturated"] is True
    se = math.sqrt(sim["analytic_variance"]["value"] / 20000)
    assert abs(sim["mean_estimate"]["value"] - 3.0e-4) < 5.0 * se
    assert abs(sim["variance_relative_error"]["value"]) \
        < 3.0 * sim["sampling_rel_std"]["value"]
    # deterministic at fixed seed, perturbed by an override
    assert dumps_report(run_simulate(sc)) == dumps_report(rep)
    other = run_simulate(sc, seed=99)
    assert other["simulation"]["seed"]["value"] == 99
    assert other["simulation"]["mean_estimate"]["value"] \
        != sim["mean_estimate"]["value"]


def test_simulate_requires_probe():
    with pytest.raises(ScenarioError) as exc:
        run_simulate(load_bundled("flrw-em-probe"))
    assert exc.value.key == "probe"


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------

def test_report_json_round_trips_exactly(tmp_path):
    rep = run_bound(load_bundled("gw-monochromatic-coherent"))
    text = dumps_report(rep)
    parsed = json.loads(text)
    assert parsed["crlb"]["crlb"]["value"] == rep["crlb"]["crlb"]["value"]
    assert parsed["generator"]["P_total"]["value"] \
        == rep["generator"]["P_total"]["value"]
    path = tmp_path / "rep.json"
    write_report(rep, path)
    assert json.loads(path.read_text()) == parsed


def test_report_serializes_infinity_and_nan():
    text = dumps_report({"a": math.inf, "b": -math.inf, "c": math.nan,
                         "d": None, "e": [True, False], "f": ()})
    parsed = json.loads(text)
    assert parsed["a"] == math.inf
    assert parsed["b"] == -math.inf
    assert math.isnan(parsed["c"])
    assert parsed["d"] is None
    assert parsed["e"] == [True, False]
    assert parsed["f"] == []


def test_report_rejects_foreign_types():
    with pytest.raises(TypeError):
        dumps_report({"a": {1, 2}})
    with pytest.raises(TypeError):
        dumps_report({"a": np.int64(3)})


def test_render_summary_shape():
    rep = run_bound(load_bundled("flrw-em-probe"))
    text = render_summary(rep)
    assert "scenario." not in text
    assert "trace_null.traceless_coupling" in text
    assert "yes" in text
    assert "Infinity" in text
    # unit tags shown for dimensionful leaves, suppressed for counts
    assert "Infinity  [amplitude^2]" in text
    assert "[dimensionless]" not in text
    assert "geometric (G=c=1)" in text


# ---------------------------------------------------------------------------
# command line
# ---------------------------------------------------------------------------

def test_cli_list_scenarios(capsys):
    assert main(["list-scenarios"]) == 0
    out = capsys.readouterr().out
    for name in EXPECTED_SCENARIOS:
        assert name in out


def test_cli_bound_writes_report(tmp_path, capsys):
    out_path = tmp_path / "bound.json"
    rc = main(["bound", "--config", "gw-monochromatic-coherent",
               "--out", str(out_path)])
    assert rc == 0
    console = capsys.readouterr().out
    assert "crlb.crlb" in console
    parsed = json.loads(out_path.read_text())
    assert parsed["crlb"]["crlb"]["value"] == pytest.approx(MONO_CRLB, rel=1e-13)


def test_cli_bound_accepts_path_and_resolution(tmp_path, capsys):
    path = tmp_path / "tiny.yaml"
    path.write_text(yaml.safe_dump(_tiny_doc()))
    assert main(["bound", "--config", str(path), "--resolution", "2.0"]) == 0
    assert "generator.P_total" in capsys.readouterr().out


def test_cli_simulate_seed_override(tmp_path, capsys):
    path = tmp_path / "tiny.yaml"
    path.write_text(yaml.safe_dump(_tiny_doc()))
    out_path = tmp_path / "sim.json"
    rc = main(["simulate", "--config", str(path), "--seed", "99",
               "--out", str(out_path)])
    assert rc == 0
    capsys.readouterr()
    parsed = json.loads(out_path.read_text())
    assert parsed["simulation"]["seed"]["value"] == 99


def test_cli_unknown_scenario_exits_2(capsys):
    assert main(["bound", "--config", "no-such-scenario"]) == 2
    err = capsys.readouterr().err
    assert "error:" in err


def test_cli_bad_config_exits_2(tmp_path, capsys):
    doc = _tiny_doc()
    doc["kind"] = "bogus"
    path = tmp_path / "bad.yaml"
    path.write_text(yaml.safe_dump(doc))
    assert main(["bound", "--config", str(path)]) == 2
    assert "kind" in capsys.readouterr().err


def test_cli_verify_unknown_suite_exits_2(capsys):
    assert main(["verify", "--suite", "nope"]) == 2
    assert "nope" in capsys.readouterr().err


def test_cli_verify_unmatched_tolerance_exits_2(capsys):
    assert main(["verify", "--suite", "identities", "--tolerance",
                 "bogus-check=1"]) == 2
    capsys.readouterr()


def test_cli_verify_bad_tolerance_syntax_exits_2(capsys):
    assert main(["verify", "--tolerance", "oops"]) == 2
    assert main(["verify", "--tolerance", "a=b"]) == 2
    capsys.readouterr()


def test_cli_verify_forced_failure_exits_1(capsys):
    rc = main(["verify", "--suite", "identities", "--tolerance",
               "correlator-equal-time=1e-9"])
    out = capsys.readouterr().out
    assert rc == 1
    assert "FAIL" in out
    assert "CHECKS FAILED" in out


def test_cli_verify_single_suite_passes(capsys):
    rc = main(["verify", "--suite", "reductions"])
    out = capsys.readouterr().out
    assert rc == 0
    assert "suite reductions" in out
    assert "all checks passed" in out
    assert "FAIL" not in out
