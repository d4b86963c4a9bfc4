import json
import math
import struct

import pytest
from hypothesis import given, settings, strategies as st

from aircov import cli
from aircov import config as cfgmod
from aircov.channel import ENVIRONMENTS, SHADOWING_TABLE
from aircov.errors import DomainError
from aircov.packing import PACKING_TABLE


def _bits(x):
    return struct.pack("<d", float(x))


def _run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


# ------------------------------------------------------------------ config


def test_tables_round_trip_bit_exact():
    doc = cfgmod.tables_document()
    back = json.loads(cfgmod.dumps_json(doc))
    assert back == doc
    for name, e in ENVIRONMENTS.items():
        for k in "jklmn":
            assert _bits(back["environments"][name][k]) == _bits(getattr(e, k))
    for f, s in SHADOWING_TABLE.items():
        for k, v in back["shadowing"][repr(f)].items():
            assert _bits(v) == _bits(getattr(s, k))
    for e in PACKING_TABLE:
        row = back["packing"][str(e.n)]
        assert _bits(row["r_ratio_hex"]) == _bits(e.r_ratio_hex)
        assert _bits(row["c_circle"]) == _bits(e.c_circle)


def test_self_check_passes():
    cfgmod.self_check()


floats = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False, allow_infinity=False)


@settings(max_examples=60, deadline=None)
@given(h=floats, t=floats, tilt=floats, pm=floats)
def test_run_config_round_trip(h, t, tilt, pm):
    rc = cfgmod.apply_overrides(cfgmod.RunConfig(), {
        "h_m": h, "t_dbm": t, "antenna.tilt_deg": tilt, "channel.p_mu": pm,
    })
    doc = rc.to_dict()
    via_json = cfgmod.RunConfig.from_dict(json.loads(cfgmod.dumps_json(doc)))
    via_kv = cfgmod.apply_overrides(cfgmod.RunConfig(), cfgmod.loads(cfgmod.dumps_kv(doc)))
    for got in (via_json, via_kv):
        assert got == rc
        assert _bits(got.deployment.h_m) == _bits(h)
        assert _bits(got.channel.p_mu) == _bits(pm)


def test_bare_and_dotted_keys():
    assert cfgmod.resolve_key("tilt_deg") == ("antenna", "tilt_deg")
    assert cfgmod.resolve_key("deployment.h_m") == ("deployment", "h_m")
    with pytest.raises(DomainError):
        cfgmod.resolve_key("nope")
    with pytest.raises(DomainError):
        cfgmod.resolve_key("antenna.h_m")


def test_kv_parsing_and_type_errors():
    flat = cfgmod.loads("# comment\nh_m = 2500  # trailing\nenvironment = highrise_urban\n")
    rc = cfgmod.apply_overrides(cfgmod.RunConfig(), flat)
    assert rc.deployment.h_m == 2500.0 and rc.deployment.environment == "highrise_urban"
    with pytest.raises(DomainError):
        cfgmod.loads("h_m 2500")
    with pytest.raises(DomainError):
        cfgmod.apply_overrides(cfgmod.RunConfig(), {"h_m": "high"})
    with pytest.raises(DomainError):
        cfgmod.apply_overrides(cfgmod.RunConfig(), {"h_m": float("nan")})
    with pytest.raises(DomainError):
        cfgmod.apply_overrides(cfgmod.RunConfig(), {"seed": "x"})


def test_channel_overrides_reach_deployment():
    rc = cfgmod.apply_overrides(cfgmod.RunConfig(), {"t_sigma": 0.05, "env_j": 90.0})
    dep = rc.build_deployment()
    assert dep.shadow.t_sigma == 0.05 and dep.env.j == 90.0
    assert dep.shadow.p_mu == SHADOWING_TABLE[2.0].p_mu


def test_validate_rejects_bad_values():
    for over in ({"epsilon": 1.5}, {"environment": "moon"}, {"mode": "x"}, {"format": "xml"}):
        with pytest.raises((DomainError, ValueError)):
            cfgmod.apply_overrides(cfgmod.RunConfig(), over).validate()


# --------------------------------------------------------------------- cli


def test_exit_ok_json(capsys):
    code, out, _ = _run(capsys, "radius", "--h", "7000", "--b", "55")
    assert code == 0
    doc = json.loads(out)
    assert doc["result"]["r_m"] > 4000
    prov = doc["provenance"]
    assert prov["command"] == ["radius"]
    assert prov["deployment"]["sigma_l_db"] == 3.0 and prov["deployment"]["sigma_n_db"] == 8.0
    assert prov["tables"] == cfgmod.tables_fingerprint()


def test_exit_codes(capsys, tmp_path):
    assert _run(capsys, "bogus")[0] == 64
    assert _run(capsys)[0] == 64
    assert _run(capsys, "sweep", "bogus")[0] == 64
    assert _run(capsys, "radius", "--env", "moon")[0] == 2
    assert _run(capsys, "radius", "--epsilon", "1.5")[0] == 2
    assert _run(capsys, "radius", "--h", "abc")[0] == 2
    assert _run(capsys, "radius", "--config", str(tmp_path / "missing.json"))[0] == 2
    assert _run(capsys, "pack", "beamwidth", "--uavs", "11", "--rt", "5000")[0] == 2
    code, out, _ = _run(capsys, "beamwidths", "--h", "1000", "--r-target", "60000")
    assert code == 3
    body = json.loads(out)
    assert body["infeasible"]["feasible"] is False
    code, out, _ = _run(capsys, "pack", "min-uavs", "--rt", "40000")
    assert code == 3 and json.loads(out)["infeasible"]["n"] is None
    # pole in the shadowing std
    code, _, err = _run(capsys, "coverage", "--f-ghz", "5.5", "--r", "5000", "--h", "5000", "--t-sigma", "0.9")
    assert code == 4, err
    assert _run(capsys, "--version")[0] == 0


def test_flags_shadow_config_file(capsys, tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"deployment": {"h_m": 3000.0, "t_dbm": 43.0}}))
    code, out, _ = _run(capsys, "radius", "--config", str(p), "--h", "5000")
    assert code == 0
    conf = json.loads(out)["provenance"]["config"]
    assert conf["deployment"]["h_m"] == 5000.0 and conf["deployment"]["t_dbm"] == 43.0
    kv = tmp_path / "c.cfg"
    kv.write_text("h_m = 2000\nb_phi_deg = 30\nb_theta_deg = 30\n")
    code, out, _ = _run(capsys, "radius", "--config", str(kv))
    res = json.loads(out)["result"]
    assert res["h_m"] == 2000.0 and res["b_deg"] == 30.0


def test_csv_artifact_layout(capsys, tmp_path):
    out = tmp_path / "m.csv"
    code, _, _ = _run(capsys, "map", "--h", "2000", "--half-side", "1000", "--step", "500", "--out", str(out))
    assert code == 0
    raw = out.read_bytes()
    assert b"\r" not in raw
    text = raw.decode("utf-8")
    lines = text.split("\n")
    assert lines[0].startswith(cfgmod.CONFIG_PREFIX) and lines[1].startswith(cfgmod.RUN_PREFIX)
    assert lines[2] == "x_m,y_m,p_cov"
    rows = [ln.split(",") for ln in lines[3:] if ln]
    assert len(rows) == 25
    assert all(0.0 <= float(r[2]) <= 1.0 for r in rows)
    # the artifact is itself a valid config
    rc = cfgmod.apply_overrides(cfgmod.RunConfig(), cfgmod.load_file(str(out)))
    assert rc.deployment.h_m == 2000.0


def test_record_csv_and_nan_cells(capsys):
    code, out, _ = _run(capsys, "pack", "min-uavs", "--rt", "5000", "--format", "csv")
    assert code == 0
    head, vals = out.splitlines()[2:4]
    cols = dict(zip(head.split(","), vals.split(",")))
    assert cols["feasible"] == "true" and int(cols["n"]) >= 1
    assert "per_uav.b_deg" in cols
    code, out, _ = _run(capsys, "sweep", "beamwidth-height", "--radii", "4000",
                        "--h-min", "1000", "--h-max", "2000", "--h-step", "1000")
    body = out.splitlines()[3:]
    assert any(",," in ln or ln.startswith(",") for ln in body)


def test_constants_command(capsys):
    code, out, _ = _run(capsys, "constants")
    doc = json.loads(out)["result"]
    assert doc["fingerprint"] == cfgmod.tables_fingerprint()
    fp = doc.pop("fingerprint")
    assert doc == cfgmod.tables_document() and len(fp) == 16


def test_sweep_manifest_and_replay(capsys, tmp_path):
    out = tmp_path / "s.csv"
    argv = ["sweep", "radius-beamwidth", "--heights", "1000,3000", "--b-min", "10", "--b-max", "60",
            "--b-step", "2", "--out", str(out)]
    assert _run(capsys, *argv)[0] == 0
    man = json.loads((tmp_path / "s.manifest.json").read_text())
    assert man["family"] == "radius-beamwidth" and len(man["curves"]) == 2
    again = tmp_path / "again.csv"
    assert _run(capsys, "replay", str(out), "--out", str(again))[0] == 0
    assert again.read_bytes() == out.read_bytes()


def test_replay_json_artifact(capsys, tmp_path):
    out = tmp_path / "r.json"
    assert _run(capsys, "coverage", "--h", "2000", "--r", "1500", "--out", str(out))[0] == 0
    again = tmp_path / "r2.json"
    assert _run(capsys, "replay", str(out), "--out", str(again))[0] == 0
    assert again.read_bytes() == out.read_bytes()
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b\n1,2\n")
    assert _run(capsys, "replay", str(bad))[0] == 2


@pytest.mark.parametrize("sub", [["coverage", "--r", "3000"], ["pdf", "--r", "3000", "--mode", "weighted_sum"]])
def test_mc_deterministic_across_threads(capsys, tmp_path, sub):
    paths = []
    for threads in (1, 8, 8):
        p = tmp_path / f"mc{len(paths)}.csv"
        argv = ["mc", *sub, "--h", "2000", "--b", "50", "--seed", "5", "--n", "200000",
                "--threads", str(threads), "--out", str(p)]
        assert _run(capsys, *argv)[0] == 0
        paths.append(p)
    data = [p.read_bytes() for p in paths]
    assert data[0] == data[1] == data[2]
    assert b"threads" not in data[0]


def test_threads_env_var(monkeypatch, capsys):
    monkeypatch.setenv("AIRCOV_THREADS", "3")
    from aircov.montecarlo import default_threads
    assert default_threads() == 3
    assert _run(capsys, "mc", "coverage", "--r", "2000", "--n", "1000", "--threads", "0")[0] == 2


def test_gain_and_coverage_commands(capsys):
    code, out, _ = _run(capsys, "gain", "--b", "50", "--h", "1000", "--r", "0")
    g = json.loads(out)["result"]["gain_db"]
    assert math.isclose(g, 10 * math.log10(29000 / 2500), rel_tol=0, abs_tol=1e-12)
    code, out, _ = _run(capsys, "coverage", "--h", "1000", "--x", "300", "--y", "400")
    xy = json.loads(out)["result"]["p_cov"]
    code, out, _ = _run(capsys, "coverage", "--h", "1000", "--r", "500")
    assert math.isclose(xy, json.loads(out)["result"]["p_cov"], rel_tol=1e-12)
    assert _run(capsys, "gain")[0] == 2
