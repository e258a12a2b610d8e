import csv
import io
import json

import numpy as np
import pytest

from cmpkit.cli import main
from cmpkit.config import RunConfig, load_config, parse_key_values


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_no_args_is_usage(capsys):
    code, _, err = run(capsys)
    assert code == 2 and "usage" in err


def test_unknown_subcommand_and_flag(capsys):
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == 2
    with pytest.raises(SystemExit) as info:
        main(["fmr", "--bogus"])
    assert info.value.code == 2


def test_demag_json(capsys):
    code, out, _ = run(capsys, "demag")
    data = json.loads(out)
    assert code == 0 and data["N_xx"] == pytest.approx(0.88097, abs=1e-5)
    assert data["trace"] == pytest.approx(1.0)


def test_fmr_csv(capsys):
    code, out, _ = run(capsys, "fmr", "--field-sweep", "100,200,3")
    r = rows(out)
    assert code == 0 and [float(x["field_T"]) for x in r] == [0.1, 0.15, 0.2]
    assert float(r[1]["fmr_GHz"]) == pytest.approx(5.6608, abs=1e-3)


def test_dispersion_uncoupled(capsys):
    code, out, _ = run(capsys, "dispersion", "--model", "dicke", "--f-bm", "5", "--g", "0",
                       "--fmr-sweep")
    r = rows(out)
    assert code == 0 and len(r) > 10
    for x in r:
        assert float(x["lower_GHz"]) == pytest.approx(float(x["fmr_GHz"]), rel=1e-8)
        assert float(x["upper_GHz"]) == pytest.approx(5.0)


def test_superradiant_phase_error_exit_1(capsys):
    code, _, err = run(capsys, "dispersion", "--model", "superradiant", "--f-bm", "5",
                       "--g", "1", "--sweep", "100,200,3")
    assert code == 1
    assert json.loads(err.strip().splitlines()[-1])["error"] == "PhaseValidityError"


def test_domain_error_exit_1(capsys):
    code, _, err = run(capsys, "demag", "--point-mm", "1", "0", "0")
    assert code == 1 and "DomainError" in err


def test_coupling_and_gap(capsys):
    code, out, _ = run(capsys, "coupling", "--eta", "1")
    assert code == 0 and json.loads(out)["dsc_threshold_GHz"] == pytest.approx(1.72, rel=0.02)
    code, out, _ = run(capsys, "gap", "--f-bm", "9.79", "--g", "2.72", "--delta-m", "1.63")
    assert json.loads(out)["gap_GHz"] == pytest.approx(0.243, abs=1e-3)
    code, out, _ = run(capsys, "gap", "--sweep", "0,0.5,6")
    assert code == 0 and len(rows(out)) == 6


def test_eta_files(tmp_path, capsys):
    from cmpkit import FieldMap
    h = np.tile([1.0, 0.0, 0.0], (4, 1))
    FieldMap((1e-3,) * 3, h, [True, True, False, False]).to_json(tmp_path / "a.json")
    FieldMap((1e-3,) * 3, h, [True] * 4).to_json(tmp_path / "b.json")
    code, out, _ = run(capsys, "eta", str(tmp_path / "a.json"), "--f-bm", "5")
    data = json.loads(out)
    assert code == 0 and data["eta"] == pytest.approx(2 ** -0.5) and data["regime"] == "USC"
    code, out, _ = run(capsys, "eta", str(tmp_path / "a.json"), str(tmp_path / "b.json"))
    ranking = json.loads(out)["ranking"]
    assert ranking[0]["file"].endswith("b.json")


def test_simulate_extract_fit(tmp_path, capsys):
    spectrum, br = tmp_path / "s.csv", tmp_path / "b.csv"
    common = ["--f-bm", "4.46", "--g", "2.03", "--delta-m", "2.39"]
    assert main(["simulate", *common, "--f-dm", "1.38", "--snr-db", "40", "--seed", "3",
                 "-o", str(spectrum)]) == 0
    assert main(["extract", str(spectrum), "-o", str(br)]) == 0
    capsys.readouterr()
    code, out, _ = run(capsys, "fit", str(br))
    res = json.loads(out)
    assert code == 0 and res["converged"]
    assert res["params"]["g"] == pytest.approx(2.03, rel=0.03)
    code, out, _ = run(capsys, "fit", str(br), "--fix", "delta_m=2.39", "--guess", "g=1.5")
    assert code == 0 and "delta_m" not in json.loads(out)["free"]


def test_simulate_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["--f-bm", "5", "--g", "1", "--f-dm", "2", "--snr-db", "30", "--seed", "7",
            "--fields=-100,100,11", "--freqs=1,10,50"]
    main(["simulate", *args, "-o", str(a)])
    main(["simulate", *args, "-o", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_fit_non_convergence_exit_1(tmp_path, capsys):
    path = tmp_path / "b.csv"
    path.write_text("field_mT,freq_GHz,label\n" + "".join(
        f"{h},{f},{lab}\n" for h in (100, 200, 300, 400)
        for f, lab in ((3.0, "lower"), (6.0, "upper"))))
    (tmp_path / "cfg").write_text("max_iter = 1\n")
    code, out, _ = run(capsys, "fit", str(path), "--model", "dicke", "--config",
                       str(tmp_path / "cfg"))
    assert code == 1 and json.loads(out)["converged"] is False


def test_analyze_and_reproduce(tmp_path, capsys):
    code, out, _ = run(capsys, "analyze", "--plots", str(tmp_path / "p"))
    assert code == 0 and json.loads(out)["consistency"]["all_consistent"]
    assert len(list((tmp_path / "p").glob("*.svg"))) == 3
    code, out, _ = run(capsys, "reproduce", "--out-dir", str(tmp_path / "r"))
    assert code == 0 and "14/14" in out
    json.loads((tmp_path / "r" / "report.json").read_text())


def test_config_precedence(tmp_path):
    cfg = tmp_path / "c.txt"
    cfg.write_text("# constants\ngamma = 30\nmu0_ms=0.2\n")
    env = {"CMPKIT_GAMMA": "29", "CMPKIT_MAX_ITER": "50", "CMPKIT_NUMBA": "0"}
    c = load_config(cfg, {"mu0_ms": 0.18, "gamma": None}, environ=env)
    assert (c.gamma, c.mu0_ms, c.max_iter) == (30.0, 0.18, 50)
    assert load_config(environ={}) == RunConfig()
    with pytest.raises(ValueError):
        parse_key_values("nonsense = 1")
    with pytest.raises(ValueError):
        parse_key_values("gamma")


def test_constant_override_changes_output(capsys):
    _, base, _ = run(capsys, "fmr", "--field-sweep", "300,300,1")
    _, alt, _ = run(capsys, "fmr", "--field-sweep", "300,300,1", "--gamma", "14")
    assert float(rows(alt)[0]["fmr_GHz"]) == pytest.approx(float(rows(base)[0]["fmr_GHz"]) / 2)
