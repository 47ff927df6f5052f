import json
import math

import pytest

from klmfid import spectral
from klmfid.cli import main
from klmfid.fidelity import fidelity_report
from klmfid.report import fmt, reports_from_csv, reports_to_csv


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_theta_n1(capsys):
    code, out, _ = run(capsys, "theta", "--n", "1", "--format", "json")
    d = json.loads(out)
    assert code == 0
    assert d["theta"] == pytest.approx(2 * math.pi / 3, abs=1e-14)
    assert d["mu"] == pytest.approx(0.5)


def test_theta_n2_human(capsys):
    code, out, _ = run(capsys, "theta", "--n", "2")
    assert code == 0
    assert "1.19606189408615" in out and "0.788675134594812" in out


def test_theta_n0_usage(capsys):
    code, _, err = run(capsys, "theta", "--n", "0")
    assert code == 2 and "positive" in err


def test_missing_command_usage(capsys):
    assert main([]) == 2


def test_table_rows(capsys):
    code, out, _ = run(capsys, "table", "--n-min", "1", "--n-max", "3", "--format", "csv")
    assert code == 0
    rows = reports_from_csv(out)
    assert rows[0].f_uniform == pytest.approx(0.5) and rows[0].f_v == pytest.approx(0.5)
    assert rows[0].f_opt == pytest.approx(0.5)
    assert rows[1].f_uniform == pytest.approx(0.6667, abs=1e-4)
    assert rows[1].f_v == pytest.approx(0.7778, abs=1e-4)
    assert rows[1].f_opt == pytest.approx(0.7887, abs=1e-4)
    for r in rows:
        assert r.lower_bound <= r.f_opt + 1e-15 <= r.upper_bound + 2e-15


def test_table_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["table", "--n-max", "30", "--format", "csv", "-o", str(a)]) == 0
    assert main(["table", "--n-max", "30", "--format", "csv", "-o", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_table_bad_range(capsys):
    assert run(capsys, "table", "--n-min", "5", "--n-max", "2")[0] == 2


def test_table_unwritable(capsys, tmp_path):
    code, _, err = run(capsys, "table", "--n-max", "2", "-o", str(tmp_path / "missing" / "x.csv"))
    assert code == 3 and "cannot write" in err


def test_csv_roundtrip_16_digits():
    reports = [fidelity_report(n) for n in range(1, 25)]
    text = reports_to_csv(reports)
    back = reports_from_csv(text)
    for r, s in zip(reports, back):
        for x, y in zip(r.as_row(), s.as_row()):
            assert fmt(x) == fmt(y)
            assert y == pytest.approx(x, rel=1e-15, abs=0)
    assert reports_to_csv(back) == text


def test_fmt_rules():
    assert fmt(0.5) == "0.5"
    assert fmt(2.5e-5) == "2.5e-05"
    assert fmt(1 / 3) == "0.3333333333333333"
    assert fmt(7) == "7"


def test_simulate_ok(capsys):
    code, out, _ = run(capsys, "simulate", "--n", "2", "--state", "vstate", "--psi", "+")
    assert code == 0 and "(ok)" in out


def test_simulate_zero(capsys):
    code, out, _ = run(capsys, "simulate", "--n", "3", "--state", "uniform", "--psi", "0", "--format", "json")
    d = json.loads(out)
    assert code == 0 and d["ok"]
    assert d["k_probability"][-1] == 0


def test_simulate_cap(capsys):
    code, _, err = run(capsys, "simulate", "--n", "9")
    assert code == 2 and "cap" in err


def test_simulate_failure_exit(monkeypatch, capsys):
    from klmfid import focksim

    monkeypatch.setattr(focksim, "extract_phases", lambda c: {})
    code, out, _ = run(capsys, "simulate", "--n", "2", "--state", "vstate", "--psi", "+")
    assert code == 1 and "FAIL" in out


def test_simulate_custom_and_explicit_psi(tmp_path, capsys):
    path = tmp_path / "c.txt"
    path.write_text("# custom ancilla\n1\n3\n1\n")
    code, out, _ = run(capsys, "simulate", "--n", "2", "--state", f"custom:{path}", "--psi", "0.6,0,0,0.8")
    assert code == 0
    code, _, err = run(capsys, "simulate", "--n", "3", "--state", f"custom:{path}")
    assert code == 2
    code, _, err = run(capsys, "simulate", "--n", "2", "--psi", "garbage")
    assert code == 2
    code, _, _ = run(capsys, "simulate", "--n", "2", "--state", f"custom:{tmp_path / 'nope'}")
    assert code == 3


def test_fidelity_command(capsys):
    code, out, _ = run(capsys, "fidelity", "--n", "2", "--state", "vstate", "--bloch", f"{math.pi / 2},0", "--format", "json")
    d = json.loads(out)
    assert code == 0
    assert d["channel_fidelity"] == pytest.approx(7 / 9)
    assert d["success_probability"] == pytest.approx(0.75)


def test_fidelity_coefficients_csv(capsys):
    code, out, _ = run(capsys, "fidelity", "--n", "2", "--state", "vstate", "--show-coefficients", "--format", "csv")
    assert code == 0
    assert [float(x) for x in out.split()] == pytest.approx([6**-0.5, 2 * 6**-0.5, 6**-0.5])


def test_asymptotics_command(capsys):
    code, out, _ = run(capsys, "asymptotics", "--n", "100", "--format", "json")
    d = json.loads(out)
    assert code == 0
    assert d["franson"] == pytest.approx(0.9998)
    assert d["f_opt"] > d["franson"]


def test_prep_command(capsys):
    code, out, _ = run(capsys, "prep", "--n", "2", "--format", "json")
    d = json.loads(out)
    assert code == 0 and d["transmissions"] == [0.5] and d["fock_ok"] is True
    assert d["success_probability"] == pytest.approx(0.5)
    code, _, err = run(capsys, "prep", "--n", "2", "--state", "custom:/dev/null")
    assert code == 2


def test_prep_rejects_unphysical(tmp_path, capsys):
    path = tmp_path / "c.txt"
    path.write_text("2\n1\n2\n")
    code, _, err = run(capsys, "prep", "--n", "2", "--state", f"custom:{path}")
    assert code == 2 and "exceeds 1" in err


def test_verify_all_small(capsys):
    code, out, _ = run(capsys, "verify-all", "--max-n", "4")
    assert code == 0
    assert "focksim.oracle_agreement" in out
    assert out.strip().endswith("checks passed")


def test_verify_all_fault_injection(monkeypatch, capsys):
    good = spectral.build_a_tilde

    def tampered(n):
        m = good(n)
        return spectral.SymTridiagonal(m.diag, [0.2] * n)

    monkeypatch.setattr(spectral, "build_a_tilde", tampered)
    code, out, _ = run(capsys, "verify-all", "--max-n", "4")
    assert code == 1 and "FAIL" in out


def test_env_cap_default(monkeypatch):
    import importlib

    from klmfid import focksim

    monkeypatch.setenv("KLMFID_SIM_CAP", "3")
    try:
        importlib.reload(focksim)
        assert focksim.DEFAULT_CAP == 3
    finally:
        monkeypatch.delenv("KLMFID_SIM_CAP")
        importlib.reload(focksim)
