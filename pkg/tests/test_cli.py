import io
import json
import subprocess
import sys
from pathlib import Path

import jsonschema
import pytest

import hormander
from hormander.cli import COMMAND_TABLE, build_parser, run

SCHEMAS = Path(__file__).resolve().parents[1] / "schemas"


def call(*argv):
    buf = io.StringIO()
    code = run(list(argv), stdout=buf)
    return code, buf.getvalue()


def call_json(*argv):
    code, out = call(*argv)
    assert code == 0, out
    return json.loads(out)


def test_fredholm_m2():
    rep = call_json("bvp", "fredholm", "--m", "2")
    assert {k: rep[k] for k in ("kernel_dim", "cokernel_dim", "index")} == {
        "kernel_dim": 3,
        "cokernel_dim": 3,
        "index": 0,
    }
    assert rep["version"] == hormander.__version__


def test_ro_index_oscillating_runs():
    rep = call_json("ro", "index", "--kind", "oscillating", "--theta", "1", "--delta", "0.5", "--r", "1", "--tmax", "1e8")
    est = rep["estimated"]
    assert est["sigma0"] <= est["sigma1"] and not est["certified"]
    assert rep["meta"]["t_max"] == 1e8


def test_ro_embed_boundary_case():
    assert call_json("ro", "embed", "--kind", "power", "--s", "1", "--p", "0", "--n", "2")["status"] == "diverges"


def test_ro_check_and_values():
    rep = call_json("ro", "check", "--kind", "power", "--s", "2", "--t", "3")
    assert rep["membership"]["ok"] and rep["values"] == [[3.0, 9.0]]


def test_ro_classical():
    rep = call_json("ro", "classical", "--phi1", '{"kind":"power","s":4.6}', "--phi2", '{"kind":"power","s":4.6}')
    assert rep["classical"] is True


def test_norm_from_csv(tmp_path):
    p = tmp_path / "h.csv"
    p.write_text("k,re,im\n2,1.0,0.0\n")
    rep = call_json("norm", "--kind", "power", "--s", "0", "--input", str(p))
    assert rep["hnorm"] == pytest.approx((2 * 3.141592653589793) ** 0.5)


def test_norm_from_samples_with_extras(tmp_path):
    p = tmp_path / "h.json"
    p.write_text(json.dumps({"samples": [1, 1, 1, 1, 1], "K": 2}))
    rep = call_json("norm", "--kind", "power", "--s", "1", "--input", str(p),
                    "--eta", '{"kind":"power","s":2}', "--derivative", "1")
    assert rep["hnorm"] == pytest.approx((2 * 3.141592653589793) ** 0.5)
    assert rep["embedding_ratio"]["sup_ratio"] == pytest.approx(1.0)
    assert rep["derivative_multiplier_bound"] < 1


def test_interp_commands():
    rep = call_json("interp", "verify", "--kind", "oscillating", "--theta", "3", "--delta", "0.1",
                    "--s0", "2.5", "--s1", "3.5", "--trials", "10")
    assert rep["max_relative_gap"] <= 1e-12 and rep["direct_sum_relative_residual"] <= 1e-12
    rep = call_json("interp", "psi", "--kind", "power", "--s", "0", "--s0", "-1", "--s1", "1")
    assert rep["pseudoconcavity"]["ok_on_sample"]


def test_bvp_solve(tmp_path):
    p = tmp_path / "prob.json"
    problem = {"m": 2, "K": 3, "R": 8, "f": {"modes": []}, "g": {"coeffs": [[2, 1.0, 0.0]]}}
    jsonschema.validate(problem, json.loads((SCHEMAS / "problem.schema.json").read_text()),
                        registry=_registry())
    p.write_text(json.dumps(problem))
    rep = call_json("bvp", "solve", "--input", str(p), "--norm", "L2")
    assert rep["operator_residual"] <= 1e-10 and rep["index"] == 0
    assert rep["meta"]["K"] == 3 and rep["meta"]["R"] == 8


def test_bvp_probes_and_green():
    rep = call_json("bvp", "apriori", "--trials", "3", "--K", "8")
    assert rep["max_ratio"] > 0
    rep = call_json("bvp", "regularity", "--K", "16", "--ladder", "7", "8")
    assert "j=0|power(s=7)" in rep["trace_norm_table"]
    rep = call_json("green", "verify", "--K", "8", "--quadrature", "32")
    assert max(rep["green_residual"].values()) <= 1e-8


def test_csv_output():
    code, out = call("bvp", "fredholm", "--m", "3", "--format", "csv")
    assert code == 0
    rows = dict(line.split(",", 1) for line in out.strip().splitlines()[1:])
    assert rows["kernel_dim"] == "5" and rows["index"] == "0"
    assert out.startswith("key,value\n")


def test_output_file(tmp_path):
    p = tmp_path / "out.json"
    code, out = call("bvp", "fredholm", "--output", str(p))
    assert code == 0 and out == "" and json.loads(p.read_text())["kernel_dim"] == 3


def test_exit_codes():
    assert call("bvp", "frobnicate")[0] == 64
    assert call("bvp", "fredholm", "--bogus")[0] == 64
    assert call("ro", "index", "--kind", "power")[0] == 2
    assert call("bvp", "fredholm", "--m", "1")[0] == 2
    assert call("interp", "psi", "--kind", "power", "--s", "1", "--s0", "1", "--s1", "2")[0] == 2
    assert call("ro", "embed", "--weight", "{not json")[0] == 2


def test_numeric_failure_exit_code():
    # a weight so large that the ratio overflows to a non-finite value
    code, _ = call("ro", "check", "--weight", '{"kind":"power","s":1e308}', "--tmax", "1e6")
    assert code == 3


def test_determinism():
    args = ("bvp", "apriori", "--trials", "4", "--K", "8", "--seed", "11")
    assert call(*args)[1] == call(*args)[1]
    assert call(*args)[1] != call("bvp", "apriori", "--trials", "4", "--K", "8", "--seed", "12")[1]


def test_config_env(tmp_path, monkeypatch):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"bvp fredholm": {"m": 3}}))
    monkeypatch.setenv("HORMANDER_CONFIG", str(cfg))
    assert call_json("bvp", "fredholm")["kernel_dim"] == 5
    assert call_json("bvp", "fredholm", "--m", "2")["kernel_dim"] == 3


def test_command_table_coverage():
    parser = build_parser()
    groups = parser._subparsers._group_actions[0].choices
    commands = set()
    for gname, gp in groups.items():
        subs = [a for a in gp._actions if a.__class__.__name__ == "_SubParsersAction"]
        if subs:
            commands |= {f"{gname} {c}" for c in subs[0].choices}
        else:
            commands.add(gname)
    expected = {"ro index", "ro check", "ro embed", "ro classical", "norm", "interp verify", "interp psi",
                "bvp solve", "bvp fredholm", "bvp apriori", "bvp regularity", "green verify"}
    assert commands == expected
    assert set(COMMAND_TABLE.values()) == expected
    # each table key is a public library operation, listed once
    for op in COMMAND_TABLE:
        assert callable(getattr(hormander, op)), op


def test_console_script_entry_point():
    out = subprocess.run([sys.executable, "-m", "hormander.cli", "bvp", "fredholm"], capture_output=True, text=True)
    assert out.returncode == 0 and json.loads(out.stdout)["index"] == 0


def _registry():
    from referencing import Registry, Resource

    reg = Registry()
    for f in SCHEMAS.glob("*.json"):
        reg = reg.with_resource(f.name, Resource.from_contents(json.loads(f.read_text())))
    return reg


@pytest.mark.parametrize(
    "schema,instance",
    [
        ("weight.schema.json", {"kind": "powerlog", "s": 1, "r": [1, 2]}),
        ("weight.schema.json", {"kind": "product", "factors": [{"kind": "power", "s": 1},
                                                                {"kind": "oscillating", "theta": 0, "delta": 1}]}),
        ("setup.schema.json", {"s0": 0, "s1": 2, "alpha": {"kind": "power", "s": 1}}),
        ("spectrum.schema.json", {"K": 1, "coeffs": [[0, 1, 0], [1, 0.5, -0.5]]}),
    ],
)
def test_schemas_accept_serialized_objects(schema, instance):
    jsonschema.validate(instance, json.loads((SCHEMAS / schema).read_text()), registry=_registry())


def test_schema_rejects_bad_weight():
    with pytest.raises(jsonschema.ValidationError):
        jsonschema.validate({"kind": "oscillating", "theta": 0, "delta": -1},
                            json.loads((SCHEMAS / "weight.schema.json").read_text()))


def test_library_objects_validate():
    from hormander import Oscillating, PowerLog, build_psi

    setup = build_psi(Oscillating(3, 0.1, 1), 2.5, 3.5)
    jsonschema.validate(setup.to_dict(), json.loads((SCHEMAS / "setup.schema.json").read_text()),
                        registry=_registry())
    jsonschema.validate(PowerLog(1, (1,)).to_dict(), json.loads((SCHEMAS / "weight.schema.json").read_text()))
