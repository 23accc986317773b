"""Path solvers for the stochastic heat and wave equations, and the
deterministic second-moment Volterra oracles that are exact for linear
noise coefficients.

Heat (Dirichlet / Neumann on [0, L]):

    du = D u_xx dt + lam * sigma(u) dW,   explicit Euler on nodes,
    u[i] += dt*D*(u[i+1]-2u[i]+u[i-1])/dx^2 + lam*sigma(u[i])*W[n,i]/dx,

with W[n, i] the Normal(0, dt*dx) cell increment: each node samples the
piecewise-constant noise field of the cell whose left edge it is (the last
Neumann node reuses the last cell, an O(dx) boundary artifact).

Wave (whole line, truncated to [-X, X] exactly by finite propagation speed):

    w_tt = w_xx + lam * sigma(w) xi,  leapfrog with noise kicks
    w_next = 2w - w_prev + r^2 d2(w) + dt*lam*sigma(w[i])*W[n,i]/dx,  r = dt/dx.

For sigma(z) = c z the second moment f_t(x) = E|u_t(x)|^2 solves, exactly,

    f_t(x) = |(P_t u0)(x)|^2
             + (lam c)^2 int_0^t ds int_0^L dy [p_{t-s}(x,y)]^2 f_s(y),

which is marched here with product integration: the (t-s)^{-1/2} diagonal
singularity on the newest subinterval is replaced by the exact identity
int [p_u(x,y)]^2 dy = p_{2u}(x,x) whose time integral has an erf closed
form.  The wave energy analogue is the scalar equation

    |E_t|^2 = (1/4)||W_t||^2 + (1/2)(lam c)^2 int_0^t (t-s)|E_s|^2 ds.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import ConfigurationError, DomainError, UnsupportedError
from .kernels import DIRICHLET, NEUMANN, KernelParams
from .noise import GridSpec, NoiseGrid, _keyed_generator

__all__ = [
    "SigmaSpec",
    "InitialData",
    "WaveConfig",
    "Field",
    "sigma_constants",
    "solve_heat_em",
    "solve_wave_em",
    "solve_heat_picard",
    "solve_heat_moment_volterra",
    "solve_wave_energy_volterra",
    "HeatMomentOracle",
    "WaveEnergyOracle",
    "heat_em_reduce",
    "wave_em_reduce",
]


# ----------------------------------------------------------------------
# noise coefficient sigma
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class SigmaSpec:
    """The noise coefficient sigma with its effective-linearity constants.

    ell = inf_{z != 0} |sigma(z)/z| and lip = sup of the same ratio. Only
    sigma(0) = 0 shapes are supported: linear, or piecewise linear through
    the origin (which keeps both constants exactly computable, since the
    signed ratio is monotone between breakpoints).
    """

    kind: str
    c: float = 0.0
    z: np.ndarray | None = field(default=None, repr=False)
    v: np.ndarray | None = field(default=None, repr=False)
    left_slope: float = 0.0
    right_slope: float = 0.0
    ell: float = 0.0
    lip: float = 0.0

    @staticmethod
    def linear(c):
        c = float(c)
        return SigmaSpec(kind="linear", c=c, ell=abs(c), lip=abs(c))

    @staticmethod
    def piecewise(points, left_slope=None, right_slope=None):
        """Piecewise-linear sigma through the listed (z, sigma(z)) breakpoints.

        Outside the outermost breakpoints the function continues with
        left_slope / right_slope (defaulting to the end segments' slopes).
        """
        pts = sorted((float(z), float(v)) for z, v in points)
        if len(pts) < 2:
            raise ConfigurationError("need at least two breakpoints")
        z = np.array([p[0] for p in pts])
        v = np.array([p[1] for p in pts])
        if np.any(np.diff(z) <= 0):
            raise ConfigurationError("breakpoints must be strictly increasing")
        seg = np.diff(v) / np.diff(z)
        ls = float(seg[0] if left_slope is None else left_slope)
        rs = float(seg[-1] if right_slope is None else right_slope)
        s = SigmaSpec(kind="piecewise_linear", z=z, v=v, left_slope=ls, right_slope=rs)
        if abs(s(0.0)) > 1e-14:
            raise UnsupportedError("piecewise sigma must satisfy sigma(0) = 0")
        ell, lip = _piecewise_constants(z, v, ls, rs)
        object.__setattr__(s, "ell", ell)
        object.__setattr__(s, "lip", lip)
        return s

    def __call__(self, u):
        if self.kind == "linear":
            return self.c * u
        u = np.asarray(u, dtype=float)
        out = np.interp(u, self.z, self.v)
        out = np.where(u < self.z[0], self.v[0] + self.left_slope * (u - self.z[0]), out)
        out = np.where(u > self.z[-1], self.v[-1] + self.right_slope * (u - self.z[-1]), out)
        return float(out) if out.ndim == 0 else out


def _piecewise_constants(z, v, ls, rs):
    cands = [abs(vi / zi) for zi, vi in zip(z, v) if zi != 0.0]
    cands += [abs(ls), abs(rs)]
    # a sign change of sigma strictly inside a segment drives |sigma/z| to 0
    for (v0, v1) in zip(v[:-1], v[1:]):
        if v0 * v1 < 0:
            cands.append(0.0)
    # zero slope on an unbounded segment sends the ratio to 0 at infinity
    if ls == 0.0 or rs == 0.0:
        cands.append(0.0)
    # crossings on the unbounded tails: sigma(z) ~ rs*z as z -> +inf, so the
    # right tail crosses iff v[-1] and rs disagree in sign; the left tail has
    # sigma(z) ~ ls*z -> -sign(ls)*inf, so it crosses iff v[0] and ls agree
    if v[-1] * rs < 0 or v[0] * ls > 0:
        cands.append(0.0)
    return float(min(cands)), float(max(cands))


def sigma_constants(s: SigmaSpec):
    """(ell, lip): infimum and supremum of |sigma(z)/z| over z != 0."""
    return s.ell, s.lip


# ----------------------------------------------------------------------
# initial data
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class InitialData:
    """Non-random initial profile u0 >= 0 sampled on the solver nodes."""

    kind: str
    values: np.ndarray = field(repr=False)
    inf_value: float = 0.0

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if not np.all(np.isfinite(vals)):
            raise ConfigurationError("u0 must be finite")
        if np.any(vals < 0):
            raise ConfigurationError("u0 must be nonnegative")
        if not np.any(vals > 0) and self.kind != "zero":
            raise ConfigurationError("u0 must be positive on a set of positive measure")
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "inf_value", float(np.min(vals)))

    @staticmethod
    def sine(spec: GridSpec):
        x = spec.x_nodes()
        return InitialData(kind="sine", values=np.sin(math.pi * x / spec.L))

    @staticmethod
    def constant(spec: GridSpec, value):
        if value < 0:
            raise ConfigurationError("constant initial data must be nonnegative")
        return InitialData(kind="constant", values=np.full(spec.nx + 1, float(value)))

    @staticmethod
    def from_table(spec: GridSpec, values):
        values = np.asarray(values, dtype=float)
        if len(values) != spec.nx + 1:
            raise ConfigurationError(f"table must have nx+1 = {spec.nx + 1} values")
        return InitialData(kind="table", values=values)

    @staticmethod
    def zero(spec: GridSpec):
        d = InitialData.__new__(InitialData)
        object.__setattr__(d, "kind", "zero")
        object.__setattr__(d, "values", np.zeros(spec.nx + 1))
        object.__setattr__(d, "inf_value", 0.0)
        return d

    def resample(self, L, x):
        """Evaluate the profile on another grid over [0, L]."""
        if self.kind == "sine":
            return np.sin(math.pi * np.asarray(x) / L)
        if self.kind == "constant":
            return np.full(len(x), self.values[0])
        src = np.linspace(0.0, L, len(self.values))
        return np.interp(x, src, self.values)


@dataclass(frozen=True)
class WaveConfig:
    """Initial velocity v0 >= 0 for the wave problem, sampled on [-X, X].

    The truncation is exact when X >= support radius + horizon (finite
    propagation speed 1); solvers check that against their GridSpec.
    """

    X: float
    values: np.ndarray = field(repr=False)
    norm_l1: float = 0.0
    norm_l2_sq: float = 0.0
    support_radius: float = 0.0

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if self.X <= 0:
            raise ConfigurationError("X must be positive")
        if np.any(vals < 0) or not np.all(np.isfinite(vals)):
            raise ConfigurationError("v0 must be nonnegative and finite")
        x = self.x_nodes()
        dx = x[1] - x[0]
        w = kernels.simpson_weights(len(x), dx) if len(x) % 2 == 1 else np.full(len(x), dx)
        l1 = float(np.sum(w * vals))
        l2sq = float(np.sum(w * vals * vals))
        if l2sq <= 0:
            raise DomainError("v0 must have positive L2 norm")
        support = float(np.max(np.abs(x[vals > 0])))
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "norm_l1", l1)
        object.__setattr__(self, "norm_l2_sq", l2sq)
        object.__setattr__(self, "support_radius", support)

    def x_nodes(self):
        return np.linspace(-self.X, self.X, len(self.values))

    @staticmethod
    def indicator(X, nx, a=1.0):
        x = np.linspace(-X, X, nx + 1)
        return WaveConfig(X=float(X), values=np.where(np.abs(x) <= a, 1.0, 0.0))

    @staticmethod
    def from_table(X, values):
        return WaveConfig(X=float(X), values=np.asarray(values, dtype=float))


@dataclass(frozen=True)
class Field:
    """A solution snapshot on the nx+1 spatial nodes."""

    spec: GridSpec
    t: float
    values: np.ndarray = field(repr=False)


# ----------------------------------------------------------------------
# explicit Euler for the heat equations
# ----------------------------------------------------------------------

def _snap_steps(spec, t_snapshots):
    steps = []
    for t in t_snapshots:
        k = int(round(t / spec.dt))
        if not (0 <= k <= spec.nt) or abs(k * spec.dt - t) > 1e-9 * max(1.0, spec.T):
            raise ConfigurationError(f"snapshot time {t} is not on the time grid (dt={spec.dt})")
        steps.append(k)
    return steps


def _check_heat_stability(spec, diffusion):
    if diffusion <= 0:
        raise ConfigurationError("diffusion must be positive")
    limit = spec.dx**2 / (2.0 * diffusion)
    if spec.dt > limit * (1 + 1e-12):
        raise ConfigurationError(
            f"explicit Euler unstable: dt={spec.dt} exceeds dx^2/(2 D)={limit}; refusing to run"
        )


def _heat_step_batch(U, boundary, sigma, lam, spec, diffusion, W, out=None, buf=None):
    """One Euler step for a batch U of shape (R, nx+1); W is (R, nx) or None."""
    dx = spec.dx
    r = diffusion * spec.dt / dx**2
    if out is None:
        out = np.empty_like(U)
    # out <- U + r * lap(U), assembled without temporaries
    np.multiply(U[:, 1:-1], 1.0 - 2.0 * r, out=out[:, 1:-1])
    tmp = buf if buf is not None else np.empty_like(U)
    np.add(U[:, 2:], U[:, :-2], out=tmp[:, 1:-1])
    out[:, 1:-1] += r * tmp[:, 1:-1]
    if boundary == NEUMANN:
        out[:, 0] = U[:, 0] + 2.0 * r * (U[:, 1] - U[:, 0])
        out[:, -1] = U[:, -1] + 2.0 * r * (U[:, -2] - U[:, -1])
    else:
        out[:, 0] = 0.0
        out[:, -1] = 0.0
    if W is not None and lam != 0.0:
        # tmp <- (lam/dx) sigma(U); columns 0..nx-1 then pick up their cell noise,
        # the last Neumann node reuses the last cell's increment
        if sigma.kind == "linear":
            np.multiply(U, lam * sigma.c / dx, out=tmp)
        else:
            np.multiply(sigma(U), lam / dx, out=tmp)
        last = tmp[:, -1] * W[:, -1]
        tmp[:, :-1] *= W
        if boundary == NEUMANN:
            out[:, :-1] += tmp[:, :-1]
            out[:, -1] += last
        else:
            out[:, 1:-1] += tmp[:, 1:-1]
    if boundary == DIRICHLET:
        out[:, 0] = 0.0
        out[:, -1] = 0.0
    return out


def solve_heat_em(spec, boundary, sigma, u0, lam, diffusion, noise, t_snapshots=None):
    """Explicit finite-difference Euler path of the stochastic heat equation.

    Returns a Field per requested snapshot time (default: the horizon T).
    Refuses to run when dt > dx^2 / (2 diffusion).
    """
    if boundary not in (DIRICHLET, NEUMANN):
        raise ConfigurationError(f"unknown boundary {boundary!r}")
    _check_heat_stability(spec, diffusion)
    if lam < 0:
        raise ConfigurationError("lambda must be nonnegative")
    if noise is not None and noise.spec != spec:
        raise ConfigurationError("noise grid does not match the solver grid")
    t_snapshots = [spec.T] if t_snapshots is None else list(t_snapshots)
    snaps = _snap_steps(spec, t_snapshots)
    U = u0.values[None, :].copy()
    if boundary == DIRICHLET:
        U[:, 0] = 0.0
        U[:, -1] = 0.0
    W = noise.increments if (noise is not None and lam != 0.0) else None
    out = {}
    if 0 in snaps:
        out[0] = U[0].copy()
    for n in range(spec.nt):
        Wn = W[n][None, :] if W is not None else None
        U = _heat_step_batch(U, boundary, sigma, lam, spec, diffusion, Wn)
        if (n + 1) in snaps:
            out[n + 1] = U[0].copy()
    return [Field(spec=spec, t=k * spec.dt, values=out[k]) for k in snaps]


def heat_em_reduce(spec, boundary, sigma, u0, lam, diffusion, seed, replicates,
                   t_snapshots, collect="energy_sq", rep_start=0, chunk=None,
                   time_block=256):
    """Run many replicates of the Euler scheme, keeping only a reduction.

    collect: 'energy_sq' -> (R, n_snap) array of ||u_t||_{L2}^2 (Simpson);
             'max'       -> (R,) running maxima over the whole path;
             'fields'    -> (R, n_snap, nx+1) snapshot values.

    Noise for replicate r is the keyed stream of sample_noise(spec, seed, r),
    drawn in time blocks (bit-identical to a whole-grid draw), so results do
    not depend on chunking or worker count.
    """
    _check_heat_stability(spec, diffusion)
    snaps = _snap_steps(spec, t_snapshots)
    snap_set = {s: i for i, s in enumerate(snaps)}
    nx1 = spec.nx + 1
    if collect == "energy_sq" and spec.nx % 2 != 0:
        raise ConfigurationError("energy reduction needs an even cell count for Simpson")
    wq = kernels.simpson_weights(nx1, spec.dx) if spec.nx % 2 == 0 else None
    std = math.sqrt(spec.dt * spec.dx)
    time_block = min(time_block, spec.nt)
    if chunk is None:
        # keep a chunk's noise block near ~120 MB
        chunk = max(1, min(replicates, int(120e6 / (8 * time_block * spec.nx)) or 1))
    if collect == "energy_sq":
        result = np.empty((replicates, len(snaps)))
    elif collect == "max":
        result = np.empty(replicates)
    elif collect == "fields":
        result = np.empty((replicates, len(snaps), nx1))
    else:
        raise ConfigurationError(f"unknown reduction {collect!r}")

    def _store(U, step, rows):
        if collect == "max":
            np.maximum(result[rows], U.max(axis=1), out=result[rows])
        elif step in snap_set:
            j = snap_set[step]
            if collect == "energy_sq":
                result[rows, j] = (U * U) @ wq
            else:
                result[rows, j, :] = U

    for lo in range(0, replicates, chunk):
        hi = min(lo + chunk, replicates)
        rows = slice(lo, hi)
        rngs = [_keyed_generator(seed, rep_start + r) for r in range(lo, hi)]
        U = np.repeat(u0.values[None, :], hi - lo, axis=0)
        if boundary == DIRICHLET:
            U[:, 0] = 0.0
            U[:, -1] = 0.0
        out_buf, tmp_buf = np.empty_like(U), np.empty_like(U)
        Wb = np.empty((hi - lo, time_block, spec.nx)) if lam != 0.0 else None
        if collect == "max":
            result[rows] = U.max(axis=1)
        _store(U, 0, rows)
        step = 0
        while step < spec.nt:
            nb = min(time_block, spec.nt - step)
            if lam != 0.0:
                for i, g in enumerate(rngs):
                    g.standard_normal(out=Wb[i, :nb])
                Wb[:, :nb] *= std
            for j in range(nb):
                Wn = Wb[:, j, :] if Wb is not None else None
                Unew = _heat_step_batch(U, boundary, sigma, lam, spec, diffusion, Wn,
                                        out=out_buf, buf=tmp_buf)
                U, out_buf = Unew, U
                step += 1
                _store(U, step, rows)
        bad = np.nonzero(~np.isfinite(U).all(axis=1))[0]
        if bad.size:
            raise ConfigurationError(
                f"solver failure (non-finite state) at replicate {rep_start + lo + int(bad[0])}"
            )
    return result


# ----------------------------------------------------------------------
# stochastic leapfrog for the wave equation
# ----------------------------------------------------------------------

def _check_wave_config(spec, wave):
    if spec.dt > spec.dx * (1 + 1e-12):
        raise ConfigurationError(f"CFL violated: dt={spec.dt} > dx={spec.dx}; refusing to run")
    X = spec.L / 2.0
    if abs(X - wave.X) > 1e-9 * max(1.0, X):
        raise ConfigurationError("grid half-width does not match the wave configuration")
    if wave.X < wave.support_radius + spec.T - 1e-12:
        raise ConfigurationError(
            f"truncation not exact: need X >= support + T = {wave.support_radius + spec.T}, got {wave.X}"
        )


def _wave_start(v0, dt, r):
    """Second-order start for w0 = 0: w^1 = dt * smoothed v0.

    At Courant number r = 1 the (1/4, 1/2, 1/4) smoothing makes the scheme
    reproduce the trapezoid discretization of (1/2) int_{x-t}^{x+t} v0
    exactly at every later step.
    """
    w1 = (1.0 - r * r / 2.0) * v0.copy()
    w1[1:-1] += (r * r / 4.0) * (v0[2:] + v0[:-2])
    return dt * w1


def _wave_step_batch(Wc, Wp, sigma, lam, spec, Wn):
    r2 = (spec.dt / spec.dx) ** 2
    lap = np.zeros_like(Wc)
    lap[:, 1:-1] = Wc[:, 2:] - 2.0 * Wc[:, 1:-1] + Wc[:, :-2]
    out = 2.0 * Wc - Wp + r2 * lap
    if Wn is not None and lam != 0.0:
        # velocity impulse lam*sigma(w)*W/(dx dt) integrated over dt, injected
        # through the same (r^2/4, 1-r^2/2, r^2/4) stencil as the initial
        # velocity: at Courant 1 a bare nodal kick excites a parity comb whose
        # square carries twice the continuum variance; the stencil restores
        # the uniform half-height plateau response
        kick = np.zeros_like(Wc)
        f = (spec.dt * lam / spec.dx) * sigma(Wc)
        kick[:, :-1] = f[:, :-1] * Wn
        kick[:, -1] = f[:, -1] * Wn[:, -1]
        out += (1.0 - r2 / 2.0) * kick
        out[:, 1:-1] += (r2 / 4.0) * (kick[:, 2:] + kick[:, :-2])
    out[:, 0] = 0.0
    out[:, -1] = 0.0
    return out


def solve_wave_em(spec, sigma, wave, lam, noise, t_snapshots=None):
    """Stochastic leapfrog path of the wave equation on [-X, X] (X = L/2).

    Zero initial displacement, initial velocity wave.values. Noise kicks
    enter the velocity update as lam*sigma(w)*W/(dx dt) integrated over dt.
    """
    _check_wave_config(spec, wave)
    if noise is not None and noise.spec != spec:
        raise ConfigurationError("noise grid does not match the solver grid")
    t_snapshots = [spec.T] if t_snapshots is None else list(t_snapshots)
    snaps = _snap_steps(spec, t_snapshots)
    W = noise.increments if (noise is not None and lam != 0.0) else None
    r = spec.dt / spec.dx
    Wp = np.zeros((1, spec.nx + 1))
    Wc = _wave_start(wave.values, spec.dt, r)[None, :]
    out = {}
    if 0 in snaps:
        out[0] = Wp[0].copy()
    if 1 in snaps:
        out[1] = Wc[0].copy()
    for n in range(1, spec.nt):
        Wn = W[n][None, :] if W is not None else None
        Wc, Wp = _wave_step_batch(Wc, Wp, sigma, lam, spec, Wn), Wc
        if (n + 1) in snaps:
            out[n + 1] = Wc[0].copy()
    return [Field(spec=spec, t=k * spec.dt, values=out[k]) for k in snaps]


def wave_em_reduce(spec, sigma, wave, lam, seed, replicates, t_snapshots,
                   collect="energy_sq", rep_start=0, chunk=None, time_block=4096):
    """Replicate-parallel wave runs reduced to energies / maxima / fields."""
    _check_wave_config(spec, wave)
    snaps = _snap_steps(spec, t_snapshots)
    snap_set = {s: i for i, s in enumerate(snaps)}
    nx1 = spec.nx + 1
    wq = kernels.simpson_weights(nx1, spec.dx) if spec.nx % 2 == 0 else None
    if collect == "energy_sq" and wq is None:
        raise ConfigurationError("energy reduction needs an even cell count for Simpson")
    std = math.sqrt(spec.dt * spec.dx)
    if chunk is None:
        chunk = max(1, min(replicates, int(120e6 / (8 * min(time_block, spec.nt) * spec.nx)) or 1))
    if collect == "energy_sq":
        result = np.empty((replicates, len(snaps)))
    elif collect == "max":
        result = np.empty(replicates)
    elif collect == "fields":
        result = np.empty((replicates, len(snaps), nx1))
    else:
        raise ConfigurationError(f"unknown reduction {collect!r}")

    def _store(U, step, rows):
        if collect == "max":
            np.maximum(result[rows], U.max(axis=1), out=result[rows])
        elif step in snap_set:
            j = snap_set[step]
            if collect == "energy_sq":
                result[rows, j] = (U * U) @ wq
            else:
                result[rows, j, :] = U

    r = spec.dt / spec.dx
    w1 = _wave_start(wave.values, spec.dt, r)
    for lo in range(0, replicates, chunk):
        hi = min(lo + chunk, replicates)
        rows = slice(lo, hi)
        rngs = [_keyed_generator(seed, rep_start + rr) for rr in range(lo, hi)]
        Wp = np.zeros((hi - lo, nx1))
        Wc = np.repeat(w1[None, :], hi - lo, axis=0)
        if collect == "max":
            result[rows] = np.maximum(Wp.max(axis=1), Wc.max(axis=1))
        _store(Wp, 0, rows)
        _store(Wc, 1, rows)
        # replicate streams must match sample_noise: draw row 0 even though
        # the first kick multiplies sigma(0) = 0
        step = 0
        while step < spec.nt:
            nb = min(time_block, spec.nt - step)
            if lam != 0.0:
                Wb = np.stack([g.normal(0.0, std, size=(nb, spec.nx)) for g in rngs])
            else:
                Wb = None
            for j in range(nb):
                n = step + j
                if n == 0:
                    continue  # w^1 already formed; sigma(w^0) = 0 kills the first kick
                Wn = Wb[:, j, :] if Wb is not None else None
                Wc, Wp = _wave_step_batch(Wc, Wp, sigma, lam, spec, Wn), Wc
                _store(Wc, n + 1, rows)
            step += nb
        bad = np.nonzero(~np.isfinite(Wc).all(axis=1))[0]
        if bad.size:
            raise ConfigurationError(
                f"solver failure (non-finite state) at replicate {rep_start + lo + int(bad[0])}"
            )
    return result


# ----------------------------------------------------------------------
# Picard iteration of the discretized mild form
# ----------------------------------------------------------------------

def solve_heat_picard(spec, boundary, sigma, u0, lam, noise, k_max, t_snapshots=None,
                      diffusion=1.0):
    """Fixed-noise Picard iteration of the mild form.

    u^{k+1}_t = P_t u0 + lam * sum_{s<t} sum_cells pbar_{t-s}(x, cell)
                * sigma(u^k_s(y_cell)) * W[s, cell],

    with pbar the cell-averaged kernel (mass-exact erf integrals); a
    diffusion coefficient D rescales the kernel lag, p^D_t = p_{D t}.
    Returns (fields at the requested snapshots of the final iterate,
    successive sup-in-time L2 differences). Warns when the differences stop
    decreasing over the last three iterates.
    """
    if k_max < 1:
        raise ConfigurationError("k_max must be >= 1")
    if noise.spec != spec:
        raise ConfigurationError("noise grid does not match the solver grid")
    if diffusion <= 0:
        raise ConfigurationError("diffusion must be positive")
    params = KernelParams(spec.L, boundary)
    x = spec.x_nodes()
    nt, nx1 = spec.nt, spec.nx + 1
    dt = spec.dt
    # cell-averaged kernels for every lag, times the cell increments' node
    kbar = np.empty((nt + 1, nx1, spec.nx))
    for m in range(1, nt + 1):
        kbar[m] = kernels.kernel_cell_averages(params, diffusion * m * dt, x, x)
    wq = kernels.simpson_weights(nx1, spec.dx) if spec.nx % 2 == 0 else None
    # deterministic part P_{t_m} u0 via the same cell averages (mass-exact)
    g = np.empty((nt + 1, nx1))
    g[0] = u0.values
    for m in range(1, nt + 1):
        g[m] = kbar[m] @ (u0.values[:-1] * spec.dx)
    W = noise.increments
    U = np.repeat(u0.values[None, :], nt + 1, axis=0)  # k = 0 iterate
    diffs = []
    for _ in range(k_max):
        S = sigma(U[:-1, :-1]) * W  # (nt, nx) forcing integrands per slab
        Unew = g.copy()
        if lam != 0.0:
            for m in range(1, nt + 1):
                acc = np.zeros(nx1)
                for mp in range(m):
                    acc += kbar[m - mp] @ S[mp]
                Unew[m] += lam * acc
        if boundary == DIRICHLET:
            Unew[:, 0] = 0.0
            Unew[:, -1] = 0.0
        d = np.sqrt(np.max(((Unew - U) ** 2) @ (wq if wq is not None else np.full(nx1, spec.dx))))
        diffs.append(float(d))
        U = Unew
        if lam == 0.0:
            break
    if len(diffs) >= 4 and not (diffs[-1] < diffs[-2] < diffs[-3]):
        if not (diffs[-1] == 0.0):
            warnings.warn("Picard differences not decreasing over the last 3 iterates", RuntimeWarning)
    t_snapshots = [spec.T] if t_snapshots is None else list(t_snapshots)
    snaps = _snap_steps(spec, t_snapshots)
    fields = [Field(spec=spec, t=k * dt, values=U[k].copy()) for k in snaps]
    return fields, diffs


# ----------------------------------------------------------------------
# second-moment Volterra oracle (heat, linear sigma)
# ----------------------------------------------------------------------

@dataclass
class HeatMomentOracle:
    """E|u_t(x)|^2 on an internal Simpson grid, with energy accessors."""

    boundary: str
    L: float
    lam: float
    c: float
    x: np.ndarray
    t_internal: np.ndarray
    f_internal: np.ndarray  # (len(t_internal), len(x))
    t_grid: np.ndarray
    f: np.ndarray  # (len(t_grid), len(x))

    def second_moment(self, t):
        i = int(np.argmin(np.abs(self.t_grid - t)))
        if abs(self.t_grid[i] - t) > 1e-9 * max(1.0, float(self.t_grid[-1])):
            raise DomainError(f"t={t} not in the requested time grid")
        return self.f[i]

    def energy_sq(self, t=None):
        w = kernels.simpson_weights(len(self.x), self.x[1] - self.x[0])
        if t is None:
            return self.f @ w
        return float(self.second_moment(t) @ w)

    def energy(self, t=None):
        return np.sqrt(self.energy_sq(t))


def _mean_evolution(params, u0, x, t_arr, n_modes=64):
    """(P_t u0)(x) for every t in t_arr, by eigen expansion (exact in time)."""
    L = params.L
    vals = u0.resample(L, x)
    t_arr = np.asarray(t_arr, dtype=float)
    if params.boundary == NEUMANN and u0.kind == "constant":
        return np.repeat(vals[None, :], len(t_arr), axis=0)
    w = kernels.simpson_weights(len(x), x[1] - x[0])
    n = np.arange(1, n_modes + 1, dtype=float)[:, None]
    mu = ((n * math.pi / L) ** 2)[:, 0]
    if params.boundary == DIRICHLET:
        modes = math.sqrt(2.0 / L) * np.sin(n * math.pi * x[None, :] / L)
        base = 0.0
    else:
        modes = math.sqrt(2.0 / L) * np.cos(n * math.pi * x[None, :] / L)
        base = float(np.sum(w * vals)) / L
    coeff = modes @ (w * vals)
    decay = np.exp(-np.outer(t_arr, mu))  # (nt, n_modes)
    return base + (decay * coeff[None, :]) @ modes


def kernel_matrix_sq(params, t, x):
    """[p_t(x_i, y_j)]^2 on the grid, with the adaptive image/eigen switch.

    Internal fast path: retains only as many terms as the tail tolerance
    needs at this lag, ignoring the public truncation floor.
    """
    if t < params.t_cross:
        n = kernels._n_images_needed(t, params.L)
    else:
        n = kernels._n_eigen_needed(t, params.L)
    vals, tail = kernels.kernel_matrix(params, t, x[:, None], x[None, :], n_override=n)
    return vals * vals, tail


def solve_heat_moment_volterra(spec, boundary, c, u0, lam, t_grid,
                               ny=160, n_steps=None, k2_cache=None):
    """Deterministic second moment f_t(x) = E|u_t(x)|^2 for sigma(z) = c z.

    Forward march of the renewal equation: trapezoid quadrature over the
    history lags [h, t], and the newest subinterval [0, h] handled by
    product integration -- the spatial integral collapses to the exact
    identity int [p_u(x,y)]^2 dy = p_{2u}(x,x), whose u^{-1/2} time weight
    integrates in closed form; that block is implicit in f^m and solved
    pointwise.
    """
    if isinstance(c, SigmaSpec):
        if c.kind != "linear":
            raise UnsupportedError("the moment identity closes only for linear sigma")
        c = c.c
    c = float(c)
    params = KernelParams(spec.L, boundary)
    t_grid = np.atleast_1d(np.asarray(t_grid, dtype=float))
    if np.any(t_grid < 0):
        raise DomainError("times must be nonnegative")
    t_max = float(np.max(t_grid))
    a2 = (lam * c) ** 2
    x = np.linspace(0.0, spec.L, ny + 1)
    if t_max == 0.0:
        f0 = u0.resample(spec.L, x) ** 2
        return HeatMomentOracle(boundary, spec.L, lam, c, x, np.array([0.0]),
                                f0[None, :], t_grid, f0[None, :])
    if n_steps is None:
        # small enough to resolve the exp growth (rate ~ a2^2/8) and keep the
        # implicit singular block contractive: a2 * Psi(h) ~ a2 sqrt(h) < 0.7
        by_growth = t_max * a2 * a2 / 2.0
        by_contraction = t_max / (0.75 / max(a2, 1e-12)) ** 2 if a2 > 0 else 0.0
        n_steps = int(min(3000, max(200, math.ceil(by_growth), math.ceil(by_contraction))))
    h = t_max / n_steps
    psi = kernels.diagonal_time_integral(params, h, x)
    denom = 1.0 - a2 * psi
    if np.any(denom <= 0.05):
        raise ConfigurationError(
            "Volterra step too coarse for this lambda: the singular block is not contractive"
        )
    key = (boundary, round(spec.L, 12), ny, n_steps, round(h, 15))
    K2w = None if k2_cache is None else k2_cache.get(key)
    if K2w is None:
        w = kernels.simpson_weights(ny + 1, x[1] - x[0])
        K2w = np.empty((n_steps + 1, ny + 1, ny + 1))
        for k in range(1, n_steps + 1):
            vals, _ = kernel_matrix_sq(params, k * h, x)
            K2w[k] = vals * w[None, :]
        if k2_cache is not None:
            k2_cache[key] = K2w
    t_int = np.arange(n_steps + 1) * h
    g = _mean_evolution(params, u0, x, t_int) ** 2
    wsimp = kernels.simpson_weights(ny + 1, x[1] - x[0])
    F = np.empty((n_steps + 1, ny + 1))
    F[0] = u0.resample(spec.L, x) ** 2
    e_hist = [float(F[0] @ wsimp)]
    rate = 0.0
    for m in range(1, n_steps + 1):
        if m == 1:
            hist = 0.0
        else:
            acc = 0.5 * (K2w[1] @ F[m - 1]) + 0.5 * (K2w[m] @ F[0])
            for k in range(2, m):
                acc += K2w[k] @ F[m - k]
            hist = h * acc
        # newest block [0, h]: fold the (lagged) exponential growth rate of the
        # energy into the exact singular weight, so fast growth stays resolved
        if m >= 3 and e_hist[-2] > 0 and e_hist[-1] > e_hist[-2]:
            rate = math.log(e_hist[-1] / e_hist[-2]) / h
        if rate > 0:
            B = kernels.diagonal_growth_weight(params, h, x, rate)
            dnm = 1.0 - a2 * B
            if np.any(dnm <= 0.05):
                raise ConfigurationError(
                    "Volterra step too coarse for this lambda: the singular block is not contractive"
                )
            F[m] = (g[m] + a2 * hist) / dnm
        else:
            F[m] = (g[m] + a2 * hist) / denom
        e_hist.append(float(F[m] @ wsimp))
    # requested times by linear interpolation on the internal march
    f_req = np.empty((len(t_grid), ny + 1))
    for i, t in enumerate(t_grid):
        pos = t / h
        k0 = min(int(math.floor(pos)), n_steps - 1)
        frac = pos - k0
        f_req[i] = (1.0 - frac) * F[k0] + frac * F[k0 + 1]
    return HeatMomentOracle(boundary, spec.L, lam, c, x, t_int, F, t_grid, f_req)


# ----------------------------------------------------------------------
# wave energy Volterra oracle (linear sigma)
# ----------------------------------------------------------------------

@dataclass
class WaveEnergyOracle:
    """|E_t|^2 along an internal grid with accessors at requested times."""

    lam: float
    c: float
    t_internal: np.ndarray
    energy_sq_internal: np.ndarray
    t_grid: np.ndarray
    energy_sq_values: np.ndarray
    w_norm_sq: np.ndarray  # (1/4)||W_t||^2 driver at t_grid

    def energy_sq(self, t=None):
        if t is None:
            return self.energy_sq_values
        i = int(np.argmin(np.abs(self.t_grid - t)))
        if abs(self.t_grid[i] - t) > 1e-9 * max(1.0, float(self.t_grid[-1])):
            raise DomainError(f"t={t} not in the requested time grid")
        return float(self.energy_sq_values[i])

    def energy(self, t=None):
        return np.sqrt(self.energy_sq(t))


def w_convolution_norm_sq(wave: WaveConfig, t):
    """||W_t||_{L2}^2 with W_t(x) = int_{-t}^{t} v0(x - y) dy.

    Exact antiderivative of the piecewise-linear v0 (cumulative trapezoid),
    then Simpson on the node grid; W_t vanishes outside the support fattened
    by t, so the finite window is exact when X covers it.
    """
    x = wave.x_nodes()
    dx = x[1] - x[0]
    V = np.concatenate([[0.0], np.cumsum(0.5 * (wave.values[1:] + wave.values[:-1]) * dx)])

    def V_at(pts):
        return np.interp(pts, x, V, left=0.0, right=V[-1])

    Wt = V_at(x + t) - V_at(x - t)
    w = kernels.simpson_weights(len(x), dx) if len(x) % 2 == 1 else np.full(len(x), dx)
    return float(np.sum(w * Wt * Wt))


def solve_wave_energy_volterra(wave: WaveConfig, c, lam, t_grid, n_steps=4096):
    """Scalar Volterra march of the wave energy identity for sigma(z) = c z:

        |E_t|^2 = (1/4)||W_t||^2 + (1/2)(lam c)^2 int_0^t (t - s)|E_s|^2 ds.

    The (t - s) kernel vanishes at s = t, so trapezoid marching is explicit.
    """
    if isinstance(c, SigmaSpec):
        if c.kind != "linear":
            raise UnsupportedError("the energy identity closes only for linear sigma")
        c = c.c
    c = float(c)
    t_grid = np.atleast_1d(np.asarray(t_grid, dtype=float))
    t_max = float(np.max(t_grid))
    rate = abs(lam * c) / math.sqrt(2.0)
    n_steps = int(max(n_steps, math.ceil(30.0 * rate * t_max))) if t_max > 0 else 1
    h = t_max / n_steps if t_max > 0 else 0.0
    ts = np.arange(n_steps + 1) * h
    drive = np.array([0.25 * w_convolution_norm_sq(wave, t) for t in ts])
    F = np.empty(n_steps + 1)
    F[0] = drive[0]
    a = 0.5 * (lam * c) ** 2
    for m in range(1, n_steps + 1):
        tm = ts[m]
        # trapezoid of (tm - s) F(s): endpoint s = tm has zero weight
        hist = h * (0.5 * tm * F[0] + np.dot(tm - ts[1:m], F[1:m]))
        F[m] = drive[m] + a * hist
    vals = np.interp(t_grid, ts, F)
    wsq = np.interp(t_grid, ts, drive)
    return WaveEnergyOracle(lam=lam, c=c, t_internal=ts, energy_sq_internal=F,
                            t_grid=t_grid, energy_sq_values=vals, w_norm_sq=wsq)
