"""Configuration-driven experiment runner.

Subcommands:
    simulate   run solution paths, write fields.csv (t,x,value) snapshots
    sweep      energy estimates over a lambda grid, write energy.csv plus a
               fit / bound-sandwich summary
    verify     kernel and lemma check suite, write verify.txt
    bounds     print the closed-form bound tables for the configured sigma

Configs are flat UTF-8 ``key = value`` lines with dotted keys ('#' comments
and blank lines allowed); unknown keys are errors. The environment variable
SPDE_SEED overrides the configured seed; --seed overrides the config but
not the environment. Exit codes: 0 success, 1 validation error, 2 check
failure, 3 I/O error.
"""

import argparse
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import analysis, kernels, solvers
from .errors import ConfigurationError, DomainError, FitError, UnsupportedError
from .kernels import DIRICHLET, NEUMANN, KernelParams
from .noise import GridSpec

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_CHECK = 2
EXIT_IO = 3

_KNOWN_KEYS = {
    "equation", "diffusion", "method", "replicates", "seed", "workers",
    "grid.L", "grid.X", "grid.T", "grid.nx", "grid.nt",
    "sigma.kind", "sigma.c", "sigma.points", "sigma.left_slope", "sigma.right_slope",
    "u0.kind", "u0.value", "u0.values",
    "v0.kind", "v0.radius", "v0.values",
    "lambda_list", "t_list",
    "picard.k_max", "oracle.n_steps", "oracle.ny",
    "delta", "eps_lemma", "moment.m",
}

_EQUATIONS = ("heat_dirichlet", "heat_neumann", "wave", "pam")


def _fmt(v):
    """17 significant digits, the CSV serialization for all numerics."""
    return f"{float(v):.17g}"


def parse_config(path):
    """Flat key = value lines; '#' starts a comment; unknown keys are errors."""
    cfg = {}
    with open(path, encoding="utf-8") as fh:
        for ln, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigurationError(f"{path}:{ln}: expected 'key = value', got {raw!r}")
            key, val = (part.strip() for part in line.split("=", 1))
            if key not in _KNOWN_KEYS:
                raise ConfigurationError(f"{path}:{ln}: unknown key {key!r}")
            if key in cfg:
                raise ConfigurationError(f"{path}:{ln}: duplicate key {key!r}")
            cfg[key] = val
    return cfg


def _floats(s):
    return [float(v) for v in s.split(",") if v.strip() != ""]


@dataclass(frozen=True)
class ResultRow:
    """One sweep result. The CSV schema serializes the middle fields in this
    exact order (t, lambda, energy, stderr, method, replicates); experiment
    id and wall time stay in memory so reruns are byte-identical."""

    experiment: str
    t: float
    lam: float
    energy: float
    stderr: float
    method: str
    replicates: int
    wall_time: float

    def csv_fields(self):
        return (f"{_fmt(self.t)},{_fmt(self.lam)},{_fmt(self.energy)},"
                f"{_fmt(self.stderr)},{self.method},{self.replicates}")


@dataclass
class ExperimentConfig:
    equation: str
    spec: GridSpec
    boundary: str | None
    diffusion: float
    sigma: solvers.SigmaSpec
    u0: solvers.InitialData | None
    wave: solvers.WaveConfig | None
    lambdas: list
    t_list: list
    replicates: int
    seed: int
    seed_source: str
    method: str
    workers: int
    picard_k_max: int = 6
    oracle_n_steps: int | None = None
    oracle_ny: int = 160
    delta: float = 0.5
    eps_lemma: float = 1.0
    moment_m: float = 2.0
    extras: dict = field(default_factory=dict)


def build_experiment(cfg, seed_flag=None, workers_flag=None) -> ExperimentConfig:
    eq = cfg.get("equation")
    if eq not in _EQUATIONS:
        raise ConfigurationError(f"equation must be one of {_EQUATIONS}, got {eq!r}")
    T = float(cfg.get("grid.T", 1.0))
    nx = int(cfg.get("grid.nx", 200))
    nt = int(cfg.get("grid.nt", 0)) or None

    diffusion = float(cfg.get("diffusion", 0.5 if eq == "pam" else 1.0))
    if eq == "pam":
        if abs(diffusion - 0.5) > 1e-15:
            raise ConfigurationError("pam preset forces diffusion = 0.5")
        if cfg.get("u0.kind", "sine") != "sine":
            raise ConfigurationError("pam preset forces u0 = sine")
        if abs(float(cfg.get("grid.L", 1.0)) - 1.0) > 1e-15:
            raise ConfigurationError("pam preset forces L = 1")

    kind = cfg.get("sigma.kind", "linear")
    if kind == "linear":
        sigma = solvers.SigmaSpec.linear(float(cfg.get("sigma.c", 1.0)))
    elif kind == "piecewise_linear":
        pts = []
        for chunk in cfg.get("sigma.points", "").split(","):
            chunk = chunk.strip()
            if not chunk:
                continue
            z, v = chunk.split(":")
            pts.append((float(z), float(v)))
        ls = cfg.get("sigma.left_slope")
        rs = cfg.get("sigma.right_slope")
        sigma = solvers.SigmaSpec.piecewise(
            pts, None if ls is None else float(ls), None if rs is None else float(rs)
        )
    else:
        raise ConfigurationError(f"sigma.kind must be linear or piecewise_linear, got {kind!r}")

    if eq == "wave":
        X = float(cfg.get("grid.X", 2.0))
        if nt is None:
            nt = nx  # dt = dx, the exact-propagation Courant number
        spec = GridSpec(L=2 * X, T=T, nx=nx, nt=nt)
        v0kind = cfg.get("v0.kind", "indicator")
        if v0kind == "indicator":
            wave = solvers.WaveConfig.indicator(X, nx, float(cfg.get("v0.radius", 1.0)))
        elif v0kind == "table":
            wave = solvers.WaveConfig.from_table(X, _floats(cfg["v0.values"]))
        else:
            raise ConfigurationError(f"v0.kind must be indicator or table, got {v0kind!r}")
        boundary, u0 = None, None
    else:
        L = float(cfg.get("grid.L", 1.0))
        if nt is None:
            raise ConfigurationError("grid.nt is required for heat runs")
        spec = GridSpec(L=L, T=T, nx=nx, nt=nt)
        boundary = DIRICHLET if eq in ("pam", "heat_dirichlet") else NEUMANN
        u0kind = cfg.get("u0.kind", "sine" if eq == "pam" else "constant")
        if u0kind == "sine":
            u0 = solvers.InitialData.sine(spec)
        elif u0kind == "constant":
            u0 = solvers.InitialData.constant(spec, float(cfg.get("u0.value", 1.0)))
        elif u0kind == "table":
            u0 = solvers.InitialData.from_table(spec, _floats(cfg["u0.values"]))
        else:
            raise ConfigurationError(f"u0.kind must be sine, constant or table, got {u0kind!r}")
        wave = None

    seed = int(cfg.get("seed", 0))
    source = "config"
    if seed_flag is not None:
        seed, source = int(seed_flag), "flag"
    env = os.environ.get("SPDE_SEED")
    if env is not None:
        seed, source = int(env), "env"

    workers = int(cfg.get("workers", 1))
    if workers_flag is not None:
        workers = int(workers_flag)

    method = cfg.get("method", "em")
    if method not in ("em", "picard", "oracle"):
        raise ConfigurationError(f"method must be em, picard or oracle, got {method!r}")
    if method == "oracle" and sigma.kind != "linear":
        raise UnsupportedError("oracle method requires linear sigma")

    n_steps = cfg.get("oracle.n_steps")
    return ExperimentConfig(
        equation=eq, spec=spec, boundary=boundary, diffusion=diffusion, sigma=sigma,
        u0=u0, wave=wave,
        lambdas=_floats(cfg.get("lambda_list", "1")),
        t_list=_floats(cfg.get("t_list", str(T))),
        replicates=int(cfg.get("replicates", 1)),
        seed=seed, seed_source=source, method=method, workers=max(1, workers),
        picard_k_max=int(cfg.get("picard.k_max", 6)),
        oracle_n_steps=None if n_steps is None else int(n_steps),
        oracle_ny=int(cfg.get("oracle.ny", 160)),
        delta=float(cfg.get("delta", 0.5)),
        eps_lemma=float(cfg.get("eps_lemma", 1.0)),
        moment_m=float(cfg.get("moment.m", 2.0)),
    )


def _header_lines(exp, lam=None):
    lines = [f"# spdelab {exp.equation}",
             f"# seed = {exp.seed} (source: {exp.seed_source})"]
    if lam is not None:
        lines.append(f"# lambda = {_fmt(lam)}")
    return lines


# ----------------------------------------------------------------------
# simulate
# ----------------------------------------------------------------------

def run_simulate(exp: ExperimentConfig, outdir):
    if len(exp.lambdas) != 1:
        raise ConfigurationError("simulate expects exactly one lambda in lambda_list")
    lam = exp.lambdas[0]
    os.makedirs(outdir, exist_ok=True)
    snaps = sorted(set(exp.t_list))
    if exp.equation == "wave":
        fields = solvers.wave_em_reduce(exp.spec, exp.sigma, exp.wave, lam, exp.seed,
                                        max(1, exp.replicates), snaps, collect="fields")
        xs = exp.wave.x_nodes()
    else:
        fields = solvers.heat_em_reduce(exp.spec, exp.boundary, exp.sigma, exp.u0, lam,
                                        exp.diffusion, exp.seed, max(1, exp.replicates),
                                        snaps, collect="fields")
        xs = exp.spec.x_nodes()
    path = os.path.join(outdir, "fields.csv")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(_header_lines(exp, lam)) + "\n")
        fh.write("t,x,value\n")
        for j, t in enumerate(snaps):
            for i, x in enumerate(xs):
                fh.write(f"{_fmt(t)},{_fmt(x)},{_fmt(fields[0, j, i])}\n")
    if exp.replicates > 1:
        if exp.equation == "wave":
            maxima = solvers.wave_em_reduce(exp.spec, exp.sigma, exp.wave, lam, exp.seed,
                                            exp.replicates, [exp.spec.T], collect="max")
        else:
            maxima = solvers.heat_em_reduce(exp.spec, exp.boundary, exp.sigma, exp.u0, lam,
                                            exp.diffusion, exp.seed, exp.replicates,
                                            [exp.spec.T], collect="max")
        mpath = os.path.join(outdir, "maxima.csv")
        with open(mpath, "w", encoding="utf-8") as fh:
            fh.write("\n".join(_header_lines(exp, lam)) + "\n")
            fh.write("replicate,max_value\n")
            for r, v in enumerate(maxima):
                fh.write(f"{r},{_fmt(v)}\n")
    return EXIT_OK


# ----------------------------------------------------------------------
# sweep
# ----------------------------------------------------------------------

def _energy_curve(exp, lam, k2_cache):
    if exp.equation == "wave":
        run = analysis.WaveRun(exp.spec, exp.sigma, exp.wave)
    else:
        run = analysis.HeatRun(exp.spec, exp.boundary, exp.sigma, exp.u0, exp.diffusion)
    if exp.method == "oracle":
        if exp.equation not in ("heat_dirichlet", "heat_neumann", "wave"):
            raise UnsupportedError("oracle sweeps cover heat_dirichlet, heat_neumann, wave")
        return analysis.estimate_energy_oracle(run, exp.t_list, lam,
                                               n_steps=exp.oracle_n_steps,
                                               ny=exp.oracle_ny, k2_cache=k2_cache)
    return analysis.estimate_energy_mc(run, exp.t_list, lam, exp.replicates, exp.seed,
                                       workers=exp.workers)


def _sandwich_rows(exp, curve):
    """Per-(t, lambda) bound sandwich: explicit lower / upper on the energy."""
    rows = []
    ell, lip = exp.sigma.ell, exp.sigma.lip
    delta, epsl = exp.delta, exp.eps_lemma
    for t in exp.t_list:
        for p in curve.at_t(t):
            e2 = p.energy**2
            status, lo, hi = "n/a", -math.inf, math.inf
            if exp.equation == "heat_neumann" and exp.u0 is not None and exp.u0.inf_value > 0:
                lo = exp.u0.inf_value**2 * exp.spec.L * math.expm1((p.lam * ell) ** 4 * t / (4 * math.pi * math.e))
                u0sup = float(np.max(exp.u0.values))
                log_hi = math.log(exp.spec.L * u0sup**2 / delta) + (3 + epsl) ** 2 * (p.lam * lip) ** 4 * t / (8 * (1 - delta) ** 2)
                ok = (e2 >= lo * 0.95) and (2.0 * math.log(max(p.energy, 1e-300)) <= log_hi)
                status, hi = ("pass" if ok else "fail"), log_hi
                rows.append((t, p.lam, status, lo, e2, hi, "log_e2_upper"))
                continue
            if exp.equation == "heat_dirichlet":
                params = KernelParams(exp.spec.L, DIRICHLET)
                mu1, phi1 = kernels.eigenpair(params, 1)
                w = kernels.simpson_weights(exp.spec.nx + 1, exp.spec.dx)
                c1 = float(np.sum(w * exp.u0.values * phi1(exp.spec.x_nodes())))
                lo = c1 * c1 * math.exp((p.lam**2 * ell**2 - 2 * mu1 * exp.diffusion) * t)
                u0sup = float(np.max(exp.u0.values))
                hi = exp.spec.L * analysis.bound_moment_apriori(t, p.lam, lip, 2, delta, u0sup)
                ok = (e2 >= lo * 0.95) and (e2 <= hi) if exp.diffusion == 1.0 else None
                status = "n/a" if ok is None else ("pass" if ok else "fail")
                rows.append((t, p.lam, status, lo, e2, hi, "e2_upper"))
                continue
            if exp.equation == "wave":
                grid = [tt for tt in exp.t_list if tt > 0]
                a1 = min(analysis.convolution_bound(exp.wave, tt).A1_empirical for tt in grid)
                rb = analysis.renewal_series_wave(t, p.lam, ell, a1, exp.wave.norm_l2_sq, J=60)
                bw = analysis.bound_wave(t, p.lam, ell, lip,
                                         v0_norm_l2_sq=exp.wave.norm_l2_sq,
                                         a2=analysis.convolution_bound(exp.wave, t).A2,
                                         delta=delta)
                hi = bw.extras.get("energy_sq_upper", math.inf)
                if rb.asserted:
                    lo = rb.closed
                    ok = (e2 >= lo * 0.95) and (e2 <= hi)
                    status = "pass" if ok else "fail"
                else:
                    lo = -math.inf
                    status = "n/a" if e2 <= hi else "fail"
                rows.append((t, p.lam, status, lo, e2, hi, "e2_upper"))
                continue
            rows.append((t, p.lam, status, lo, e2, hi, "none"))
    return rows


def run_sweep(exp: ExperimentConfig, outdir):
    import time as _time

    if len(exp.lambdas) < 4:
        raise ConfigurationError("sweep needs >= 4 lambda values for the index fit")
    os.makedirs(outdir, exist_ok=True)
    k2_cache = {}
    curve = analysis.EnergyCurve()
    walls = {}
    for lam in exp.lambdas:
        t0 = _time.perf_counter()
        c = _energy_curve(exp, lam, k2_cache)
        walls[lam] = _time.perf_counter() - t0
        curve.entries.extend(c.entries)
    rows = [ResultRow(experiment=exp.equation, t=float(t), lam=p.lam, energy=p.energy,
                      stderr=p.stderr, method=p.method, replicates=p.replicates,
                      wall_time=walls[p.lam])
            for t in exp.t_list for p in curve.at_t(t)]
    path = os.path.join(outdir, "energy.csv")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(_header_lines(exp)) + "\n")
        fh.write("t,lambda,energy,stderr,method,replicates\n")
        for row in rows:
            fh.write(row.csv_fields() + "\n")
    failures = 0
    lines = []
    for t in exp.t_list:
        try:
            fit = analysis.fit_excitation_index(curve, t=t)
            lines.append(f"t={_fmt(t)} slope={fit.slope:.6f} r2={fit.r2:.6f} "
                         f"n_used={fit.n_used} dropped={list(fit.dropped)}")
        except FitError as e:
            lines.append(f"t={_fmt(t)} fit FAILED: {e}")
            failures += 1
    rows = _sandwich_rows(exp, curve)
    for (t, lam, status, lo, e2, hi, hikind) in rows:
        lines.append(f"sandwich t={_fmt(t)} lambda={_fmt(lam)} status={status} "
                     f"lower={_fmt(lo) if math.isfinite(lo) else '-inf'} energy_sq={_fmt(e2)} "
                     f"upper({hikind})={_fmt(hi) if math.isfinite(hi) else 'inf'}")
        if status == "fail":
            failures += 1
    with open(os.path.join(outdir, "summary.txt"), "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    for ln in lines:
        print(ln)
    return EXIT_CHECK if failures else EXIT_OK


# ----------------------------------------------------------------------
# verify
# ----------------------------------------------------------------------

def _verify_checks(L=1.0, eps_lemma=1.0):
    """The kernel / lemma suite; yields (name, measured, bound, margin, ok)."""
    from scipy import integrate

    pD = KernelParams(L, DIRICHLET)
    pN = KernelParams(L, NEUMANN)

    worst = 0.0
    for t in (1e-3, 1e-2, 0.1, 1.0):
        for x in (0.0, 0.25 * L, 0.5 * L):
            worst = max(worst, abs(kernels.kernel_mass(pN, t, x) - 1.0))
    yield ("neumann_mass_deviation", worst, 1e-10, 1e-10 - worst, worst <= 1e-10)

    # strict at times where the boundary deficit exceeds float resolution
    # (at t = 1e-3, x = L/2 the deficit is ~1e-29 and rounds away)
    mx = max(kernels.kernel_mass(pD, t, x)
             for t in (1e-2, 0.1, 1.0) for x in (0.25 * L, 0.5 * L))
    yield ("dirichlet_mass_below_one", mx, 1.0, 1.0 - mx, mx < 1.0)

    worst = 0.0
    for params in (pD, pN):
        for (s, r) in ((0.01, 0.01), (0.05, 0.2), (0.5, 0.5)):
            x, z = 0.3 * L, 0.7 * L
            val, _ = integrate.quad(
                lambda y: kernels.kernel_matrix(params, s, x, y)[0]
                * kernels.kernel_matrix(params, r, y, z)[0], 0, L, limit=200, epsabs=1e-12)
            direct, _ = kernels.kernel_matrix(params, s + r, np.float64(x), np.float64(z))
            worst = max(worst, abs(val - float(direct)))
    yield ("semigroup_composition_error", worst, 1e-8, 1e-8 - worst, worst <= 1e-8)

    worst = 0.0
    for s in (0.01, 0.05, 0.2):
        y = 0.3 * L
        val, _ = integrate.quad(lambda z: kernels.kernel_matrix(pN, s, y, z)[0] ** 2,
                                0, L, limit=200, epsabs=1e-12)
        worst = max(worst, abs(val - kernels.diagonal_double_time(pN, s, y)))
    yield ("diagonal_double_time_error", worst, 1e-8, 1e-8 - worst, worst <= 1e-8)

    for beta in (10.0, 100.0, 1000.0):
        r = kernels.resolvent_check(pD, beta, 1.0)
        yield (f"dirichlet_resolvent_beta_{beta:g}", r.lhs, r.bound, r.margin, r.lhs <= r.bound)
        ref = kernels.dirichlet_resolvent_reference(pD, beta)
        yield (f"dirichlet_resolvent_series_ref_beta_{beta:g}", r.lhs, ref, ref - r.lhs, r.lhs <= ref)

    for beta in (10.0, 100.0, 1000.0):
        r = kernels.resolvent_check(pN, beta, 5.0, eps=eps_lemma)
        ok = (r.lhs <= r.bound) if r.asserted else True
        name = f"neumann_laplace_beta_{beta:g}" + ("" if r.asserted else "_not_asserted")
        yield (name, r.lhs, r.bound, r.margin, ok)

    for tau in (0.01, 0.1, 1.0):
        phi = kernels.phi_integral(pN, tau)
        lb = L * math.sqrt(tau / (2 * math.pi))
        yield (f"phi_lower_bound_tau_{tau:g}", phi, lb, phi - lb, phi >= lb)

    for params in (pD, pN):
        v, _ = kernels.kernel_matrix(params, 1e-4, np.float64(L / 2), np.float64(L / 2))
        g = kernels.gamma(1e-4, 0.0)
        rel = abs(float(v) - g) / g
        yield (f"{params.boundary}_free_space_small_t", rel, 1e-6, 1e-6 - rel, rel <= 1e-6)

    worst = 0.0
    for n in range(1, 11):
        _, phin = kernels.eigenpair(pD, n)
        for m in range(n, 11):
            _, phim = kernels.eigenpair(pD, m)
            val, _ = integrate.quad(lambda x: phin(x) * phim(x), 0, L, limit=200, epsabs=1e-13)
            worst = max(worst, abs(val - (1.0 if n == m else 0.0)))
    yield ("eigen_orthonormality_error", worst, 1e-10, 1e-10 - worst, worst <= 1e-10)

    xs = np.linspace(0.05 * L, 0.95 * L, 19)
    pos = min(float(np.min(kernels.kernel_matrix(p, t, xs[:, None], xs[None, :])[0]))
              for p in (pD, pN) for t in (1e-3, 0.1, 1.0))
    yield ("kernel_positivity_min", pos, 0.0, pos, pos > 0.0)


def run_verify(exp: ExperimentConfig | None, outdir):
    L = exp.spec.L if (exp is not None and exp.equation != "wave") else 1.0
    epsl = exp.eps_lemma if exp is not None else 1.0
    os.makedirs(outdir, exist_ok=True)
    lines, all_ok = [], True
    for (name, measured, bound, margin, ok) in _verify_checks(L=L, eps_lemma=epsl):
        all_ok &= ok
        lines.append(f"{'PASS' if ok else 'FAIL'} {name}: measured={measured:.6e} "
                     f"bound={bound:.6e} margin={margin:.6e}")
    lines.append("PASS" if all_ok else "FAIL")
    with open(os.path.join(outdir, "verify.txt"), "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    for ln in lines:
        print(ln)
    return EXIT_OK if all_ok else EXIT_CHECK


# ----------------------------------------------------------------------
# bounds
# ----------------------------------------------------------------------

def run_bounds(exp: ExperimentConfig, out=None):
    out = out or sys.stdout
    ell, lip = exp.sigma.ell, exp.sigma.lip
    print(f"sigma: kind={exp.sigma.kind} ell={_fmt(ell)} lip={_fmt(lip)}", file=out)
    for t in exp.t_list:
        for lam in exp.lambdas:
            if exp.equation == "wave":
                a2 = analysis.convolution_bound(exp.wave, t).A2 if t > 0 else None
                b = analysis.bound_wave(t, lam, ell, lip, v0_norm_l2_sq=exp.wave.norm_l2_sq,
                                        a2=a2, delta=exp.delta)
                extra = b.extras.get("energy_sq_upper")
                print(f"wave t={_fmt(t)} lambda={_fmt(lam)} rate_lower={_fmt(b.lower)} "
                      f"rate_upper={_fmt(b.upper)}"
                      + (f" energy_sq_upper={_fmt(extra)}" if extra is not None else ""), file=out)
            elif exp.equation == "heat_neumann":
                eps = exp.u0.inf_value if exp.u0 is not None else None
                b = analysis.bound_heat_neumann(t, lam, ell, lip, eps=eps or None, L=exp.spec.L)
                extra = b.extras.get("energy_sq_lower")
                print(f"heat_neumann t={_fmt(t)} lambda={_fmt(lam)} rate_lower={_fmt(b.lower)} "
                      f"rate_upper={_fmt(b.upper)}"
                      + (f" energy_sq_lower={_fmt(extra)}" if extra is not None else ""), file=out)
            else:
                b = analysis.bound_heat_dirichlet(t, lam, ell, lip)
                u0sup = float(np.max(exp.u0.values)) if exp.u0 is not None else 1.0
                mb = analysis.bound_moment_apriori(t, lam, lip, exp.moment_m, exp.delta, u0sup)
                print(f"{exp.equation} t={_fmt(t)} lambda={_fmt(lam)} "
                      f"rate_lower_l2={_fmt(b.lower)} rate_upper_l4={_fmt(b.upper)} "
                      f"moment_{exp.moment_m:g}_apriori={_fmt(mb)}", file=out)
    return EXIT_OK


# ----------------------------------------------------------------------
# entry point
# ----------------------------------------------------------------------

def main(argv=None):
    parser = argparse.ArgumentParser(prog="spdelab", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("command", choices=["simulate", "sweep", "verify", "bounds"])
    parser.add_argument("--config", required=False, help="path to the flat key=value config")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    parser.add_argument("--workers", type=int, default=None, help="replicate-level parallelism")
    try:
        args = parser.parse_args(argv)
    except SystemExit:
        return EXIT_VALIDATION
    try:
        exp = None
        if args.config is not None:
            cfg = parse_config(args.config)
            exp = build_experiment(cfg, seed_flag=args.seed, workers_flag=args.workers)
        elif args.command != "verify":
            print("error: --config is required", file=sys.stderr)
            return EXIT_VALIDATION
        if args.command == "simulate":
            return run_simulate(exp, args.out)
        if args.command == "sweep":
            return run_sweep(exp, args.out)
        if args.command == "verify":
            return run_verify(exp, args.out)
        return run_bounds(exp)
    except (ConfigurationError, DomainError, UnsupportedError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as e:
        print(f"i/o error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
