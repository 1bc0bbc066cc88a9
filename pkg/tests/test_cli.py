"""Command-line interface: spec parsing, exit codes, CSV contract."""

from __future__ import annotations

import math
import re

import pytest

from tubekernels.cli import CSV_HEADER, main, parse_domain


def run(capsys, *argv):
    rc = main(list(argv))
    captured = capsys.readouterr()
    return rc, captured.out, captured.err


def test_csv_header_contract():
    assert CSV_HEADER == "kind,m,tau,rho,x,y,log_value,value,err_estimate,evaluations,status"


def test_parse_domain_variants(tmp_path):
    f = parse_domain("model:m=2,g0=2")
    assert f.m == 2 and f.g0 == 2.0
    assert parse_domain("rational:m=3").m == 3
    fb = parse_domain("blended-linear:m=2,slope=0.8")
    assert math.isclose(float(fb.fprime(50.0)), 0.8, rel_tol=1e-3)

    fm = parse_domain("model:m=2|mollify:delta=0.1|damp:radius=0.5")
    assert fm.m == 2
    base = parse_domain("model:m=2")
    assert float(fm.f(0.05)) == float(base.f(0.05))

    tbl = tmp_path / "profile.csv"
    src = parse_domain("rational:m=2")
    lines = ["x,g,gprime"]
    xs = [i * 0.01 - 2.0 for i in range(401)]
    for x in xs:
        lines.append(f"{x!r},{float(src.g(x))!r},{float(src.gprime(x))!r}")
    tbl.write_text("\n".join(lines) + "\n")
    ft = parse_domain(f"table:path={tbl},m=2")
    assert ft.m == 2
    assert math.isclose(float(ft.f(0.3)), float(src.f(0.3)), rel_tol=1e-6)


@pytest.mark.parametrize(
    "spec",
    [
        "egg:m=2",
        "model:g0=1",          # m missing
        "model:m=2,zeta=1",    # unknown parameter
        "model:m",             # not key=value
        "model:m=2|polish:eps=1",
        "model:m=2|mollify:",  # delta missing
        "model:m=2|damp:radius=0.5,x=1",
    ],
)
def test_parse_domain_rejects(spec):
    from tubekernels import DomainError

    with pytest.raises(DomainError):
        parse_domain(spec)


def test_eval_prints_parabola_value(capsys):
    rc, out, _ = run(
        capsys, "eval", "--domain", "model:m=1", "--x", "0", "--y", "0.5",
        "--rel-tol", "1e-6",
    )
    assert rc == 0
    assert "kind=bergman" in out and "m=1" in out
    value = float(re.search(r" value=([^ ]+)", out).group(1))
    assert math.isclose(value, 1.0 / (4 * math.pi**2 * 0.125), rel_tol=1e-5)


def test_eval_exterior_point_exits_2(capsys):
    rc, _, err = run(capsys, "eval", "--domain", "model:m=1", "--x", "2", "--y", "1")
    assert rc == 2
    assert "domain error" in err


def test_bad_domain_exits_2(capsys):
    rc, _, err = run(capsys, "eval", "--domain", "egg:m=2", "--dry-run")
    assert rc == 2 and "domain error" in err


def test_unknown_flag_exits_2():
    with pytest.raises(SystemExit) as exc:
        main(["sweep", "--frobnicate"])
    assert exc.value.code == 2


def test_dry_run_writes_nothing(capsys, tmp_path):
    csv_path = tmp_path / "sweep.csv"
    rc, out, _ = run(
        capsys, "sweep", "--domain", "model:m=2", "--csv", str(csv_path), "--dry-run",
    )
    assert rc == 0
    assert out.startswith("plan: command=sweep")
    assert not csv_path.exists()


def test_config_file_precedence(capsys, tmp_path):
    ini = tmp_path / "run.ini"
    ini.write_text(
        "[domain]\nspec = model:m=1\n\n[experiment]\ntau = 0.7\n\n"
        "[quadrature]\nrel_tol = 1e-6\n"
    )
    rc, out, _ = run(capsys, "sweep", "--config", str(ini), "--dry-run")
    assert rc == 0
    assert "domain=model(m=1,g0=1)" in out
    assert "tau=0.7" in out and "rel_tol=1e-06" in out
    # a flag beats the file
    rc, out, _ = run(capsys, "sweep", "--config", str(ini), "--tau", "0.9", "--dry-run")
    assert rc == 0
    assert "tau=0.9" in out and "rel_tol=1e-06" in out


def test_config_file_rejects_unknown_keys(capsys, tmp_path):
    bad_key = tmp_path / "k.ini"
    bad_key.write_text("[experiment]\ntaus = 1\n")
    rc, _, err = run(capsys, "sweep", "--config", str(bad_key), "--dry-run")
    assert rc == 2 and "taus" in err

    bad_section = tmp_path / "s.ini"
    bad_section.write_text("[grid]\nn_points = 5\n")
    rc, _, err = run(capsys, "sweep", "--config", str(bad_section), "--dry-run")
    assert rc == 2 and "grid" in err


def test_plot_script_requires_csv(capsys):
    rc, _, err = run(capsys, "eval", "--domain", "model:m=1", "--plot-script", "p.py")
    assert rc == 2
    assert "--csv" in err


def test_eval_csv_and_plot_script(capsys, tmp_path):
    csv_path = tmp_path / "point.csv"
    plot_path = tmp_path / "plot.py"
    rc, _, _ = run(
        capsys, "eval", "--domain", "model:m=1", "--y", "0.5", "--rel-tol", "1e-6",
        "--csv", str(csv_path), "--plot-script", str(plot_path),
    )
    assert rc == 0
    lines = csv_path.read_text().splitlines()
    assert lines[0] == CSV_HEADER
    assert len(lines) == 2
    assert lines[1].startswith("bergman,1,")
    src = plot_path.read_text()
    compile(src, str(plot_path), "exec")  # the script must at least parse
    assert str(csv_path) in src


def test_sweep_csv_deterministic_and_worker_independent(capsys, tmp_path):
    paths = [tmp_path / f"s{i}.csv" for i in range(3)]
    base = [
        "sweep", "--domain", "model:m=1", "--rel-tol", "1e-6",
        "--n-points", "6",
    ]
    rc, out, _ = run(capsys, *base, "--csv", str(paths[0]))
    assert rc == 0
    assert "sweep: 6/6 points converged" in out
    rc, _, _ = run(capsys, *base, "--csv", str(paths[1]))
    assert rc == 0
    rc, _, _ = run(capsys, *base, "--csv", str(paths[2]), "--workers", "2")
    assert rc == 0
    b0, b1, b2 = (p.read_bytes() for p in paths)
    assert b0 == b1  # rerun is byte-identical
    assert b0 == b2  # worker count cannot change the bytes

    lines = b0.decode().splitlines()
    assert lines[0] == CSV_HEADER
    assert len(lines) == 7
    first = lines[1].split(",")
    assert first[0] == "bergman" and first[-1] == "ok"
    rho, value = float(first[3]), float(first[7])
    assert math.isclose(value, 1.0 / (4 * math.pi**2 * rho**3), rel_tol=1e-5)


def test_fit_parabola_passes(capsys):
    rc, out, _ = run(
        capsys, "fit", "--domain", "model:m=1", "--rel-tol", "1e-6",
        "--n-points", "8", "--window", "6",
    )
    assert rc == 0
    assert "expected=-3" in out and "PASS" in out


def test_predict_line_format(capsys):
    rc, out, _ = run(
        capsys, "predict", "--domain", "model:m=3", "--kind", "szego", "--tau", "1.0",
    )
    assert rc == 0
    first = out.splitlines()[0]
    assert first.startswith("exponent=4/3, c0=")
    assert float(first.split("c0=")[1]) > 0


def test_localize_and_hormander_dry_runs(capsys):
    rc, out, _ = run(
        capsys, "localize", "--domain", "model:m=2", "--delta", "0.5", "--dry-run",
    )
    assert rc == 0 and out.startswith("plan: command=localize")
    rc, out, _ = run(
        capsys, "hormander", "--domain", "model:m=2", "--x0", "1.0", "--dry-run",
    )
    assert rc == 0 and out.startswith("plan: command=hormander")
