import json

import jsonschema
import numpy as np
import pytest

from vm_landau import cli


@pytest.fixture()
def cfg(tmp_path):
    p = tmp_path / "maxwellian.json"
    p.write_text(json.dumps({"kind": "maxwellian", "n0": 1.0}))
    return str(p)


def test_dispersion_smoke(cfg, tmp_path):
    out = tmp_path / "curves.csv"
    assert cli.run(["dispersion", "--equilibrium", cfg, "--kmax", "2", "--n", "40", "--out", str(out)]) == 0
    data = np.genfromtxt(out, delimiter=",", names=True)
    tau = data["tau_star"][np.isfinite(data["tau_star"])]
    assert np.all(np.diff(tau) > 0)
    assert set(data.dtype.names) == {"k", "tau_star", "nu_star", "re_lambda", "im_lambda",
                                     "re_a", "im_a", "re_b", "im_b"}
    side = json.loads((tmp_path / "curves.csv.json").read_text())
    jsonschema.validate(side, cli._schema("output.schema.json"))
    assert {"kappa0", "tau0_sq", "tau1_sq", "delta"} <= set(side["result"])


def test_csv_is_deterministic(cfg, tmp_path):
    bodies = []
    for i in range(2):
        out = tmp_path / f"g{i}.csv"
        assert cli.run(["green", "--equilibrium", cfg, "--k", "0.5", "--tmax", "2", "--dt", "1e-3",
                        "--out", str(out)]) == 0
        bodies.append(out.read_bytes())
    assert bodies[0] == bodies[1]
    first = bodies[0].decode().splitlines()[:2]
    assert first[0] == "t,re_G,re_G_osc,re_G_reg,re_H,re_H_osc,re_H_reg,re_dH"


def test_invalid_config_exit_code(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps({"kind": "powerlaw", "n0": 1.0, "M": 2}))
    assert cli.run(["dispersion", "--equilibrium", str(p), "--kmax", "2"]) == 2
    assert "M > 3" in capsys.readouterr().err
    p.write_text(json.dumps({"kind": "maxwellian", "temperature": 2}))
    assert cli.run(["kernels", "--equilibrium", str(p)]) == 2


def test_unknown_command_and_bad_dt(cfg):
    assert cli.run(["bogus"]) == 2
    assert cli.run(["green", "--equilibrium", cfg, "--k", "0.5", "--tmax", "5", "--dt", "1.0"]) == 2


def test_kernels_dump_and_table_config(tmp_path):
    s = np.linspace(1.0, 12.0, 3000)
    tab = tmp_path / "phi.csv"
    np.savetxt(tab, np.column_stack([s, np.exp(-0.5 * s * s)]), delimiter=",", header="s,phi", comments="")
    cfg = tmp_path / "tab.json"
    cfg.write_text(json.dumps({"kind": "tabulated", "n0": 1.0, "table_path": "phi.csv"}))
    dump = tmp_path / "k.csv"
    js = tmp_path / "k.json"
    assert cli.run(["kernels", "--equilibrium", str(cfg), "--dump", str(dump), "--json", str(js), "--n", "21"]) == 0
    data = np.genfromtxt(dump, delimiter=",", names=True)
    assert data.dtype.names == ("u", "kappa", "q") and len(data) == 21
    res = json.loads(js.read_text())["result"]
    assert res["tau0_sq"] == pytest.approx(0.4515102688271051, rel=1e-5)


def test_simulate_columns(cfg, tmp_path):
    out = tmp_path / "mode.csv"
    js = tmp_path / "mode.json"
    assert cli.run(["simulate", "--equilibrium", cfg, "--k", "0.5", "--profile", "kappa", "--tmax", "5",
                    "--dt", "5e-3", "--out", str(out), "--json", str(js)]) == 0
    head = out.read_text().splitlines()[0].split(",")
    assert head[:8] == ["t", "re_S", "re_rho", "re_rho_oracle", "abs_discrepancy", "re_A", "re_A_oracle",
                        "abs_discrepancy_A"]
    jsonschema.validate(json.loads(js.read_text()), cli._schema("output.schema.json"))


def test_report_subset(cfg, tmp_path):
    out = tmp_path / "report.json"
    assert cli.run(["report", "--equilibrium", cfg, "--criteria", "1,2", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert [c["id"] for c in doc["result"]["criteria"]] == [1, 2]
    assert cli.run(["report", "--criteria", "1,99"]) == 2
