import math
import os
import shutil
import subprocess

import numpy as np
import pytest

from spdeplots import PlotJob, SchemaError, render_scaling, render_surface
from spdeplots.cli import main as plot_main


def _fields_csv(path, lam=0.5, nt=6, nx=21):
    ts = np.linspace(0.0, 0.1, nt)
    xs = np.linspace(0.0, 1.0, nx)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# spdelab pam\n")
        fh.write("# seed = 7 (source: config)\n")
        fh.write(f"# lambda = {lam:.17g}\n")
        fh.write("t,x,value\n")
        for t in ts:
            for x in xs:
                v = (1 + lam) * math.sin(math.pi * x) * math.exp(-math.pi**2 * t / 2)
                fh.write(f"{t:.17g},{x:.17g},{v:.17g}\n")
    return str(path)


def _energy_csv(path, lams, energies):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# spdelab heat_neumann\n")
        fh.write("t,lambda,energy,stderr,method,replicates\n")
        for lam, e in zip(lams, energies):
            fh.write(f"0.5,{lam:.17g},{e:.17g},0,oracle,0\n")
    return str(path)


def test_surface_reports_lambda_and_max(tmp_path):
    csv = _fields_csv(tmp_path / "fields.csv", lam=0.0)
    out = tmp_path / "surf.png"
    res = render_surface(PlotJob(csv, "surface", str(out)))
    assert os.path.exists(out)
    assert res.lam == 0.0
    assert res.max_value == pytest.approx(1.0, abs=0.01)


def test_surface_max_ordering_across_lambdas(tmp_path):
    r1 = render_surface(PlotJob(_fields_csv(tmp_path / "a.csv", lam=0.1), "surface",
                                str(tmp_path / "a.png")))
    r2 = render_surface(PlotJob(_fields_csv(tmp_path / "b.csv", lam=2.0), "surface",
                                str(tmp_path / "b.png")))
    assert r2.max_value > r1.max_value


def test_surface_empty_csv_clean_error(tmp_path):
    bad = tmp_path / "empty.csv"
    bad.write_text("")
    out = tmp_path / "nope.png"
    with pytest.raises(SchemaError):
        render_surface(PlotJob(str(bad), "surface", str(out)))
    assert not out.exists()  # no partial file


def test_surface_schema_mismatch_exit_code(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b\n1,2\n")
    rc = plot_main(["surface", "--in", str(bad), "--out", str(tmp_path / "x.png")])
    assert rc == 1
    assert not (tmp_path / "x.png").exists()


def test_scaling_synthetic_slope_exact_two_decimals(tmp_path):
    lams = np.array([2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0])
    csv = _energy_csv(tmp_path / "energy.csv", lams, np.exp(0.3 * lams**4))
    res = render_scaling(PlotJob(csv, "scaling", str(tmp_path / "s.png")))
    assert f"{res.slope:.2f}" == "4.00"
    assert abs(res.slope - 4.0) < 1e-9
    assert os.path.exists(tmp_path / "s.png")


def test_scaling_guide_line_overlay(tmp_path):
    lams = np.array([2.0, 3.0, 4.0, 5.0])
    csv = _energy_csv(tmp_path / "energy.csv", lams, np.exp(0.05 * lams**4))
    job = PlotJob(csv, "scaling", str(tmp_path / "g.png"),
                  overlay="heat_neumann", t=0.5, ell=1.0, lip=1.0)
    res = render_scaling(job)
    assert os.path.exists(tmp_path / "g.png")
    assert res.n_points == 4


def test_scaling_too_few_points(tmp_path):
    csv = _energy_csv(tmp_path / "energy.csv", [1.0, 2.0], [0.5, 1.8])
    with pytest.raises(SchemaError):
        render_scaling(PlotJob(csv, "scaling", str(tmp_path / "x.png")))


def test_rerun_idempotent(tmp_path):
    csv = _fields_csv(tmp_path / "fields.csv", lam=1.0)
    out1, out2 = tmp_path / "r1.png", tmp_path / "r2.png"
    a = render_surface(PlotJob(csv, "surface", str(out1)))
    b = render_surface(PlotJob(csv, "surface", str(out2)))
    assert a.max_value == b.max_value
    assert out1.read_bytes() == out2.read_bytes()


@pytest.mark.skipif(shutil.which("spdelab") is None,
                    reason="primary CLI not installed")
def test_renders_primary_cli_outputs(tmp_path):
    # drive the primary through its external interface and render its CSVs
    cfg = tmp_path / "pam.cfg"
    cfg.write_text(
        "equation = pam\ngrid.T = 0.1\ngrid.nx = 50\ngrid.nt = 1000\n"
        "lambda_list = 0\nt_list = 0, 0.05, 0.1\nreplicates = 1\nseed = 7\nmethod = em\n"
    )
    sim = subprocess.run(["spdelab", "simulate", "--config", str(cfg),
                          "--out", str(tmp_path / "sim")], capture_output=True, text=True)
    assert sim.returncode == 0, sim.stderr
    res = render_surface(PlotJob(str(tmp_path / "sim" / "fields.csv"), "surface",
                                 str(tmp_path / "sim.png")))
    assert res.max_value == pytest.approx(1.0, abs=0.01)

    cfg2 = tmp_path / "wave.cfg"
    cfg2.write_text(
        "equation = wave\ngrid.X = 2\ngrid.T = 1\ngrid.nx = 200\n"
        "sigma.kind = linear\nsigma.c = 1\nv0.kind = indicator\nv0.radius = 1\n"
        "lambda_list = 20, 40, 80, 160\nt_list = 1.0\nmethod = oracle\nseed = 3\n"
    )
    sw = subprocess.run(["spdelab", "sweep", "--config", str(cfg2),
                         "--out", str(tmp_path / "sweep")], capture_output=True, text=True)
    assert sw.returncode == 0, sw.stderr
    res2 = render_scaling(PlotJob(str(tmp_path / "sweep" / "energy.csv"), "scaling",
                                  str(tmp_path / "scal.png"), overlay="wave",
                                  t=1.0, ell=1.0, lip=1.0))
    assert 0.7 <= res2.slope <= 1.3
