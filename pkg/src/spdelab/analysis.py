"""Energy estimation, excitation-index fits, and closed-form bound evaluation.

The energy of a solution at time t and noise level lam is

    E_t(lam) = sqrt( E ||u_t||_{L2}^2 ),

estimated either by Monte Carlo over independent replicates (Simpson
quadrature per path, delta-method standard errors) or exactly from the
second-moment Volterra oracles when sigma is linear.

The excitation index is measured operationally as the least-squares slope
of log log E against log lam over a finite lam grid; the theory pins it
between matching powers (lam^4 for the Neumann heat problem, lam^1 for the
wave problem), so acceptance brackets the fitted slope instead of asserting
a limit.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from . import solvers
from .errors import ConfigurationError, DomainError, FitError
from .noise import GridSpec
from .solvers import (
    InitialData,
    SigmaSpec,
    WaveConfig,
    heat_em_reduce,
    solve_heat_moment_volterra,
    solve_wave_energy_volterra,
    wave_em_reduce,
)

__all__ = [
    "EnergyPoint",
    "EnergyCurve",
    "HeatRun",
    "WaveRun",
    "BoundSet",
    "ConvolutionBoundResult",
    "FitResult",
    "HeatRenewalBound",
    "WaveRenewalBound",
    "estimate_energy_mc",
    "estimate_energy_oracle",
    "fit_excitation_index",
    "bound_heat_dirichlet",
    "bound_heat_neumann",
    "bound_wave",
    "bound_moment_apriori",
    "h_function",
    "convolution_bound",
    "renewal_series_heat",
    "renewal_series_wave",
]


# ----------------------------------------------------------------------
# run descriptions and energy curves
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class HeatRun:
    """Everything but the noise level needed to launch heat-equation replicates."""

    spec: GridSpec
    boundary: str
    sigma: SigmaSpec
    u0: InitialData
    diffusion: float = 1.0


@dataclass(frozen=True)
class WaveRun:
    spec: GridSpec
    sigma: SigmaSpec
    wave: WaveConfig


@dataclass(frozen=True)
class EnergyPoint:
    t: float
    lam: float
    energy: float
    stderr: float
    method: str  # "mc" | "oracle"
    replicates: int

    def __post_init__(self):
        if self.energy < 0:
            raise ConfigurationError("energy must be nonnegative")
        if self.method == "oracle" and self.stderr != 0.0:
            raise ConfigurationError("oracle energies carry no sampling error")


@dataclass
class EnergyCurve:
    entries: list[EnergyPoint] = field(default_factory=list)

    def add(self, *args, **kw):
        self.entries.append(EnergyPoint(*args, **kw))

    def at_t(self, t, tol=1e-12):
        pts = [p for p in self.entries if abs(p.t - t) <= tol * max(1.0, abs(t)) + 1e-15]
        return sorted(pts, key=lambda p: p.lam)

    def lambdas(self):
        return sorted({p.lam for p in self.entries})

    def times(self):
        return sorted({p.t for p in self.entries})


def _mc_worker(args):
    kind, run, t_list, lam, seed, rep_start, n_reps = args
    if kind == "heat":
        return heat_em_reduce(run.spec, run.boundary, run.sigma, run.u0, lam,
                              run.diffusion, seed, n_reps, t_list,
                              collect="energy_sq", rep_start=rep_start)
    return wave_em_reduce(run.spec, run.sigma, run.wave, lam, seed, n_reps,
                          t_list, collect="energy_sq", rep_start=rep_start)


def estimate_energy_mc(run, t_list, lam, replicates, seed, workers=1) -> EnergyCurve:
    """Monte-Carlo energy curve at one noise level over the listed times.

    energy = sqrt(mean ||u_t||^2) over replicates; stderr by the delta
    method from the sample variance of ||u_t||^2. Replicates are keyed
    streams, farmed to workers in contiguous blocks and reduced in fixed
    replicate order, so the result is independent of the worker count.
    """
    if replicates < 2:
        raise ConfigurationError("need at least 2 replicates")
    kind = "heat" if isinstance(run, HeatRun) else "wave"
    t_list = list(t_list)
    if workers <= 1:
        samples = _mc_worker((kind, run, t_list, lam, seed, 0, replicates))
    else:
        block = (replicates + workers - 1) // workers
        jobs = []
        for w in range(workers):
            lo = w * block
            hi = min(lo + block, replicates)
            if lo < hi:
                jobs.append((kind, run, t_list, lam, seed, lo, hi - lo))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_mc_worker, jobs))
        samples = np.concatenate(parts, axis=0)
    curve = EnergyCurve()
    for j, t in enumerate(t_list):
        y = samples[:, j]
        m = float(np.mean(y))
        sd = float(np.std(y, ddof=1))
        energy = math.sqrt(max(m, 0.0))
        stderr = (sd / math.sqrt(replicates)) / (2.0 * energy) if energy > 0 else 0.0
        curve.add(t=float(t), lam=float(lam), energy=energy, stderr=stderr,
                  method="mc", replicates=replicates)
    return curve


def estimate_energy_oracle(run, t_list, lam, n_steps=None, ny=160, k2_cache=None) -> EnergyCurve:
    """Exact (deterministic) energies from the linear-sigma Volterra oracles."""
    t_list = list(t_list)
    curve = EnergyCurve()
    if isinstance(run, HeatRun):
        orc = solve_heat_moment_volterra(run.spec, run.boundary, run.sigma, run.u0,
                                         lam, t_list, ny=ny, n_steps=n_steps,
                                         k2_cache=k2_cache)
        for t in t_list:
            curve.add(t=float(t), lam=float(lam), energy=float(orc.energy(t)),
                      stderr=0.0, method="oracle", replicates=0)
        return curve
    orc = solve_wave_energy_volterra(run.wave, run.sigma, lam, t_list)
    for t in t_list:
        curve.add(t=float(t), lam=float(lam), energy=float(orc.energy(t)),
                  stderr=0.0, method="oracle", replicates=0)
    return curve


# ----------------------------------------------------------------------
# excitation-index fit
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    r2: float
    n_used: int
    dropped: tuple


def fit_excitation_index(curve, t=None) -> FitResult:
    """Least-squares slope of log log E(lam) against log lam at fixed t.

    Points with energy <= 1 (log log undefined) are dropped and reported;
    fewer than 4 surviving points is a fit error.
    """
    if isinstance(curve, EnergyCurve):
        ts = curve.times()
        if t is None:
            if len(ts) != 1:
                raise FitError("curve holds several times; pass t explicitly")
            t = ts[0]
        pts = curve.at_t(t)
        lams = np.array([p.lam for p in pts])
        energies = np.array([p.energy for p in pts])
    else:
        lams, energies = (np.asarray(v, dtype=float) for v in curve)
    keep = energies > 1.0
    dropped = tuple(float(l) for l in lams[~keep])
    lams, energies = lams[keep], energies[keep]
    if np.any(lams <= 0):
        raise FitError("lambda values must be positive for a log-log fit")
    if len(lams) < 4:
        raise FitError(f"need >= 4 usable points with energy > 1, have {len(lams)} "
                       f"(dropped {len(dropped)})")
    xv = np.log(lams)
    yv = np.log(np.log(energies))
    slope, intercept = np.polyfit(xv, yv, 1)
    resid = yv - (slope * xv + intercept)
    ss_tot = float(np.sum((yv - yv.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return FitResult(slope=float(slope), intercept=float(intercept), r2=r2,
                     n_used=int(len(lams)), dropped=dropped)


# ----------------------------------------------------------------------
# closed-form bounds
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class BoundSet:
    """Evaluated bounds for one theorem at given parameters.

    lower / upper are log-energy growth rates unless stated otherwise in
    extras; the lam powers they multiply are recorded in params.
    """

    theorem: str
    params: dict
    lower: float
    upper: float
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        if math.isfinite(self.lower) and math.isfinite(self.upper) and self.lower > self.upper:
            raise ConfigurationError("bound set with lower > upper")


def bound_heat_dirichlet(t, lam, ell, lip) -> BoundSet:
    """Heat/Dirichlet rates: log E >= (ell^2 t/2) lam^2 + o(lam^2) from below,
    log E <= (8 lip^4 t) lam^4 from above (mismatched powers; the true
    Dirichlet exponent is pinned only between 2 and 4)."""
    if t <= 0:
        raise DomainError("t must be positive")
    lower = ell * ell * t / 2.0
    upper = 8.0 * lip**4 * t
    return BoundSet(
        theorem="heat_dirichlet",
        params={"t": t, "lam": lam, "ell": ell, "lip": lip, "lower_power": 2, "upper_power": 4},
        lower=lower, upper=upper,
    )


def bound_heat_neumann(t, lam, ell, lip, eps=None, L=None) -> BoundSet:
    """Heat/Neumann rates on lam^4: ell^4 t / (8 pi e) below, 9 lip^4 t / 16
    above (log-energy). With eps = inf u0 and the length L supplied, the
    explicit renewal lower bound eps^2 L (exp((lam ell)^4 t / 4 pi e) - 1)
    on the squared energy is attached."""
    if t <= 0:
        raise DomainError("t must be positive")
    lower = ell**4 * t / (8.0 * math.pi * math.e)
    upper = 9.0 * lip**4 * t / 16.0
    extras = {}
    if eps is not None and L is not None:
        if eps <= 0:
            raise DomainError("the Neumann lower bound needs inf u0 > 0")
        x = (lam * ell) ** 4 * t / (4.0 * math.pi * math.e)
        extras["energy_sq_lower"] = eps * eps * L * math.expm1(x)
    return BoundSet(
        theorem="heat_neumann",
        params={"t": t, "lam": lam, "ell": ell, "lip": lip, "eps": eps, "L": L,
                "lower_power": 4, "upper_power": 4},
        lower=lower, upper=upper, extras=extras,
    )


def bound_wave(t, lam, ell, lip, v0_norm_l2_sq=None, a2=None, delta=0.5) -> BoundSet:
    """Wave rates on lam: ell t / (4 sqrt 8) below, lip t / sqrt 8 above
    (log-energy). With the v0 norms supplied, the fully prefactored upper
    bound on the squared energy,

        (8 A2 ||v0||^2 / (delta (e lam lip)^2)) exp(lam lip t / sqrt(2(1-delta))),

    is attached in extras."""
    if t <= 0:
        raise DomainError("t must be positive")
    if not (0.0 < delta < 1.0):
        raise DomainError("delta must lie in (0, 1)")
    lower = t * ell / (4.0 * math.sqrt(8.0))
    upper = t * lip / math.sqrt(8.0)
    extras = {}
    if v0_norm_l2_sq is not None and a2 is not None and lam > 0 and lip > 0:
        pref = 8.0 * a2 * v0_norm_l2_sq / (delta * (math.e * lam * lip) ** 2)
        extras["energy_sq_upper"] = pref * math.exp(lam * lip * t / math.sqrt(2.0 * (1.0 - delta)))
    return BoundSet(
        theorem="wave",
        params={"t": t, "lam": lam, "ell": ell, "lip": lip, "delta": delta,
                "lower_power": 1, "upper_power": 1},
        lower=lower, upper=upper, extras=extras,
    )


def bound_moment_apriori(t, lam, lip, m, delta, u0_sup):
    """A-priori m-th moment bound for the Dirichlet problem:

        E|u_t(x)|^m <= delta^{-m/2} ||u0||_inf^m exp(2 t m^3 (lam lip / (1-delta))^4).
    """
    if m < 2:
        raise DomainError("the moment bound needs m >= 2")
    if not (0.0 < delta < 1.0):
        raise DomainError("delta must lie in (0, 1)")
    if t < 0:
        raise DomainError("t must be nonnegative")
    return delta ** (-m / 2.0) * u0_sup**m * math.exp(2.0 * t * m**3 * (lam * lip / (1.0 - delta)) ** 4)


def h_function(r):
    """H(r) = min(r/2, r^2/4), the time-size function of the wave energy driver."""
    if r <= 0:
        raise DomainError("H is defined for r > 0")
    return min(r / 2.0, r * r / 4.0)


# ----------------------------------------------------------------------
# convolution bound (wave driver size)
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class ConvolutionBoundResult:
    t: float
    integral: float  # int_{-t}^t int_{-t}^t (v0 * v0~)(y - z) dy dz
    H: float
    A1_empirical: float
    A2: float


def convolution_bound(wave: WaveConfig, t) -> ConvolutionBoundResult:
    """Size of the wave energy driver ||W_t||^2 against A2 H(t).

    The autocorrelation h = v0 * v0~ is formed on the sample grid and the
    double integral collapses to int h(w) (2t - |w|)_+ dw. A2 is the
    explicit constant 16 (||v0||_L2^2 ^ ||v0||_L1^2); A1_empirical is
    integral / H(t).
    """
    if t <= 0:
        raise DomainError("t must be positive")
    v = wave.values
    x = wave.x_nodes()
    dx = x[1] - x[0]
    h = np.correlate(v, v, mode="full") * dx  # lags -(n-1) .. n-1
    wlags = dx * np.arange(-(len(v) - 1), len(v))
    # the weight (2t - |w|)_+ can be narrower than the lag spacing; integrate
    # on a fine resampling of the piecewise-linear autocorrelation instead
    wmax = min(2.0 * t, float(wlags[-1]))
    fine = np.linspace(-wmax, wmax, 4001)
    hf = np.interp(fine, wlags, h)
    weight = np.maximum(2.0 * t - np.abs(fine), 0.0)
    integral = float(np.trapezoid(hf * weight, fine))
    H = h_function(t)
    a2 = 16.0 * min(wave.norm_l2_sq, wave.norm_l1**2)
    if integral > a2 * H * (1.0 + 1e-9):
        raise ConfigurationError(
            f"convolution integral {integral} exceeds A2 H(t) = {a2 * H}"
        )
    return ConvolutionBoundResult(t=float(t), integral=integral, H=H,
                                  A1_empirical=integral / H, A2=a2)


# ----------------------------------------------------------------------
# renewal series lower bounds
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class HeatRenewalBound:
    x: float  # (lam ell)^4 t / (4 pi e)
    partial: float
    closed: float


def renewal_series_heat(t, lam, ell, eps, L, J) -> HeatRenewalBound:
    """eps^2 L sum_{j=1..J} x^j / j! with x = (lam ell)^4 t / (4 pi e);
    the full sum is eps^2 L (e^x - 1)."""
    if J < 1:
        raise DomainError("J must be >= 1")
    x = (lam * ell) ** 4 * t / (4.0 * math.pi * math.e)
    js = np.arange(1, J + 1, dtype=float)
    terms = np.exp(js * math.log(x) - gammaln(js + 1.0)) if x > 0 else np.zeros_like(js)
    partial = eps * eps * L * float(np.sum(terms))
    closed = eps * eps * L * math.expm1(x)
    return HeatRenewalBound(x=x, partial=partial, closed=closed)


@dataclass(frozen=True)
class WaveRenewalBound:
    x: float  # lam ell t / (2 sqrt 8)
    partial: float
    closed: float
    asserted: bool
    lam_threshold: float


def renewal_series_wave(t, lam, ell, a1, v0_norm_l2_sq, J) -> WaveRenewalBound:
    """(1/2) A1 ||v0||^2 H(t) sum_{j=2..J} x^j / j!, x = lam ell t /(2 sqrt 8).

    The odd/even comparison behind the series requires
    lam >= 2 sqrt(8) / (t ell); below that the bound is not asserted.
    """
    if J < 2:
        raise DomainError("J must be >= 2")
    if t <= 0 or ell < 0:
        raise DomainError("need t > 0 and ell >= 0")
    thresh = math.inf if ell == 0 else 2.0 * math.sqrt(8.0) / (t * ell)
    x = lam * ell * t / (2.0 * math.sqrt(8.0))
    pref = 0.5 * a1 * v0_norm_l2_sq * h_function(t)
    js = np.arange(2, J + 1, dtype=float)
    terms = np.exp(js * math.log(x) - gammaln(js + 1.0)) if x > 0 else np.zeros_like(js)
    partial = pref * float(np.sum(terms))
    closed = pref * (math.expm1(x) - x)
    return WaveRenewalBound(x=x, partial=partial, closed=closed,
                            asserted=bool(lam >= thresh), lam_threshold=thresh)
