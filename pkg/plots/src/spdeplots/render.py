"""Surface and scaling renderers for the experiment CSVs.

Output is a fixed 1200x900 PNG. render_surface draws the (t, x, value)
solution sheet with the noise level and max height in the title;
render_scaling plots log log E against log lambda with the fitted slope
annotated and optional theorem guide lines overlaid.
"""

import math
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .io import SchemaError, read_energy, read_fields  # noqa: E402

FIG_KW = dict(figsize=(12.0, 9.0), dpi=100)  # 1200 x 900 px

# log-energy growth rates (per lambda^power) of the two pinned theorems
GUIDE_RATES = {
    "heat_neumann": dict(power=4, lower=lambda t, ell, lip: ell**4 * t / (8 * math.pi * math.e),
                         upper=lambda t, ell, lip: 9 * lip**4 * t / 16),
    "wave": dict(power=1, lower=lambda t, ell, lip: ell * t / (4 * math.sqrt(8)),
                 upper=lambda t, ell, lip: lip * t / math.sqrt(8)),
}


@dataclass(frozen=True)
class PlotJob:
    input_csv: str
    kind: str  # "surface" | "scaling"
    output_png: str
    overlay: str | None = None  # "heat_neumann" | "wave"
    t: float | None = None
    ell: float | None = None
    lip: float | None = None


@dataclass(frozen=True)
class SurfaceResult:
    output_png: str
    lam: float | None
    max_value: float


@dataclass(frozen=True)
class ScalingResult:
    output_png: str
    slope: float
    n_points: int


def render_surface(job: PlotJob) -> SurfaceResult:
    meta, data = read_fields(job.input_csv)
    ts = np.unique(data["t"])
    xs = np.unique(data["x"])
    grid = np.full((len(ts), len(xs)), np.nan)
    ti = {v: i for i, v in enumerate(ts)}
    xi = {v: i for i, v in enumerate(xs)}
    for t, x, v in zip(data["t"], data["x"], data["value"]):
        grid[ti[t], xi[x]] = v
    if np.any(np.isnan(grid)):
        raise SchemaError(f"{job.input_csv}: (t, x) grid is not complete")
    lam = float(meta["lambda"]) if "lambda" in meta else None
    vmax = float(np.max(grid))
    fig = plt.figure(**FIG_KW)
    ax = fig.add_subplot(projection="3d")
    T, X = np.meshgrid(ts, xs, indexing="ij")
    ax.plot_surface(T, X, grid, cmap="viridis", rstride=1,
                    cstride=max(1, len(xs) // 200), linewidth=0)
    ax.set_xlabel("t")
    ax.set_ylabel("x")
    ax.set_zlabel("u")
    title = f"max height = {vmax:.2f}"
    if lam is not None:
        title = f"lambda = {lam:g}, " + title
    ax.set_title(title)
    fig.savefig(job.output_png)
    plt.close(fig)
    return SurfaceResult(output_png=job.output_png, lam=lam, max_value=vmax)


def render_scaling(job: PlotJob) -> ScalingResult:
    meta, data = read_energy(job.input_csv)
    lam = data["lambda"]
    energy = data["energy"]
    keep = (energy > 1.0) & (lam > 0)
    if int(np.sum(keep)) < 2:
        raise SchemaError(f"{job.input_csv}: need >= 2 points with energy > 1, "
                          f"have {int(np.sum(keep))}")
    xv = np.log(lam[keep])
    yv = np.log(np.log(energy[keep]))
    slope, intercept = np.polyfit(xv, yv, 1)
    fig, ax = plt.subplots(**FIG_KW)
    ax.plot(xv, yv, "o", label="data")
    xs = np.linspace(xv.min(), xv.max(), 100)
    ax.plot(xs, slope * xs + intercept, "--", label=f"fit: slope = {slope:.2f}")
    if job.overlay is not None:
        if job.overlay not in GUIDE_RATES or job.t is None or job.ell is None or job.lip is None:
            raise SchemaError("overlay needs a known theorem plus --t --ell --lip")
        g = GUIDE_RATES[job.overlay]
        for name, rate_fn in (("lower", g["lower"]), ("upper", g["upper"])):
            rate = rate_fn(job.t, job.ell, job.lip)
            if rate > 0:
                ax.plot(xs, np.log(rate) + g["power"] * xs, ":",
                        label=f"{job.overlay} {name} rate {rate:.4g} (power {g['power']})")
    ax.set_xlabel("log lambda")
    ax.set_ylabel("log log energy")
    ax.set_title(f"excitation scaling, fitted slope = {slope:.2f}")
    ax.legend()
    fig.savefig(job.output_png)
    plt.close(fig)
    return ScalingResult(output_png=job.output_png, slope=float(slope),
                         n_points=int(np.sum(keep)))
