import math
import os

import numpy as np
import pytest

import fusion_track as ft

EX_DIR = os.environ.get("FUSION_TRACK_EX_DIR", os.path.join(os.path.dirname(__file__), "..", "..", "ex"))
SHORT = {"track_length_m": 1000, "seed": 5}


def test_validate_and_defaults():
    assert ft.validate(os.path.join(EX_DIR, "fig5.json")) == (51, 2769)
    cfg = ft.config({"speed_kmh": 72})
    assert cfg["speed_mps"] == pytest.approx(20.0)
    assert cfg["noise"]["sigma_aoa_deg"] == pytest.approx(1.0)


def test_bad_config_names_field():
    with pytest.raises(ValueError, match="isd_m"):
        ft.validate({"isd_m": -1})
    with pytest.raises(ft.ConfigError, match="noise.foo"):
        ft.run({"noise": {"foo": 1}})


def test_run_arrays_and_determinism():
    a = ft.run(SHORT)
    b = ft.run(SHORT)
    n = len(a["epoch"])
    assert n == 276
    assert a["truth"].shape == (n, 2)
    assert a["estimate"].shape == (n, 2)
    np.testing.assert_array_equal(a["estimate"], b["estimate"])
    np.testing.assert_allclose(a["error_m"], np.linalg.norm(a["estimate"] - a["truth"], axis=1))
    assert a["report"].percentile(90) < 0.5


def test_error_report_percentile():
    r = ft.ErrorReport([0.1 * k for k in range(1, 11)])
    assert r.percentile(90) == pytest.approx(0.91)
    assert len(r) == 10
    assert r.max() == pytest.approx(1.0)
    np.testing.assert_allclose(r.sorted_errors, np.linspace(0.1, 1.0, 10))
    with pytest.raises(ValueError):
        ft.ErrorReport([]).percentile(50)


def test_profiles_and_requirements():
    rows = ft.profiles()
    assert len(rows) == 13
    hd = next(p for p in rows if p["name"] == "High-definition sensor sharing")
    assert (hd["accuracy_m"], hd["sigma_level"], hd["percentile"]) == (0.1, "3sigma", 99.7)
    check = ft.check_requirement(ft.ErrorReport([0.08] * 20), "High-definition sensor sharing")
    assert check["pass"] and check["margin_m"] == pytest.approx(0.02)
    assert len(ft.profile_lines()) == 13


def test_geometry():
    assert ft.true_range((40, 0), (0, 30)) == pytest.approx(50.0)
    assert ft.true_azimuth((0, 0), (0, 30)) == pytest.approx(-math.pi / 2)
    with pytest.raises(ft.GeometryError):
        ft.true_azimuth((0, 30), (0, 30))
    assert ft.nearest_bs((250, 0), 3) == [1, 2, 0]
    assert ft.base_stations({"isd_m": 100}).shape == (101, 2)


def test_sweep_cells_in_canonical_order():
    cells = ft.sweep(
        {"track_length_m": 600}, isd_m=[100, 200], n_fused_bs=[1, 2], modes=["5g_only", "fused"], seeds=2
    )
    keys = [(c["isd_m"], c["n_bs"], c["mode"]) for c in cells]
    assert keys == [(i, n, m) for i in (100, 200) for n in (1, 2) for m in ("5g_only", "fused")]
    again = ft.sweep(
        {"track_length_m": 600}, isd_m=[100, 200], n_fused_bs=[1, 2], modes=["5g_only", "fused"], seeds=2, jobs=2
    )
    for x, y in zip(cells, again):
        np.testing.assert_array_equal(x["report"].sorted_errors, y["report"].sorted_errors)


def test_fog_session():
    cfg = {"track_length_m": 10000, "fog": {"n_instances": 2}}
    fog = ft.simulate_session(cfg, "fog")
    legacy = ft.simulate_session(cfg, "legacy")
    assert fog["transfers"] == 1 and legacy["transfers"] == 0
    assert {e["hops"] for e in fog["events"] if e["kind"] == "MeasReportI1"} == {2}
    assert {e["hops"] for e in legacy["events"] if e["kind"] == "LegacyHop"} == {3}
    assert fog["latency"].percentile(50) < legacy["latency"].percentile(50)
