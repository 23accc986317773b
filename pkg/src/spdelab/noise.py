"""Reproducible discretized space-time white noise.

The driving noise is modelled on a rectangular grid over [0,L] x [0,T]:
the increment of cell (n, i) is the integral of the white noise over
[t_n, t_{n+1}) x [x_i, x_{i+1}) and is therefore Normal(0, dt*dx), with
disjoint cells independent.

Streams are keyed on (seed, replicate) through the counter-based Philox
generator, so any replicate can be produced on any worker, in any order,
and the result is bit-identical.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError

__all__ = ["GridSpec", "NoiseGrid", "sample_noise", "noise_mass"]

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class GridSpec:
    """Uniform space-time grid over [0, L] x [0, T].

    nx is the number of spatial cells (nx + 1 node points), nt the number
    of time steps. dx and dt are derived, never stored, so nx*dx == L and
    nt*dt == T hold exactly in the representation.
    """

    L: float
    T: float
    nx: int
    nt: int

    def __post_init__(self):
        if not (self.L > 0 and self.T > 0):
            raise ConfigurationError(f"domain lengths must be positive, got L={self.L}, T={self.T}")
        if int(self.nx) != self.nx or self.nx < 2:
            raise ConfigurationError(f"nx must be an integer >= 2, got {self.nx}")
        if int(self.nt) != self.nt or self.nt < 1:
            raise ConfigurationError(f"nt must be an integer >= 1, got {self.nt}")

    @property
    def dx(self):
        return self.L / self.nx

    @property
    def dt(self):
        return self.T / self.nt

    def x_nodes(self):
        """The nx+1 node positions 0, dx, ..., L."""
        return np.linspace(0.0, self.L, self.nx + 1)

    def t_nodes(self):
        return np.linspace(0.0, self.T, self.nt + 1)


@dataclass(frozen=True)
class NoiseGrid:
    """One realization of the cell increments for a given (seed, replicate).

    increments[n, i] ~ Normal(0, dt*dx), independent across cells. The array
    is marked read-only; a NoiseGrid is safe to share between workers.
    """

    spec: GridSpec
    seed: int
    replicate: int
    increments: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.increments.setflags(write=False)


def _keyed_generator(seed, replicate):
    # Philox key = (seed, replicate): distinct keys give statistically
    # independent counter-based streams, independent of generation order.
    key = np.array([int(seed) & _MASK64, int(replicate) & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def sample_noise(spec: GridSpec, seed: int, replicate: int = 0) -> NoiseGrid:
    """Draw the nt x nx array of cell increments for one replicate.

    Deterministic in (seed, replicate); regenerating gives bit-identical
    arrays, and distinct replicates are independent streams.
    """
    if not isinstance(spec, GridSpec):
        raise ConfigurationError("spec must be a GridSpec")
    rng = _keyed_generator(seed, replicate)
    std = np.sqrt(spec.dt * spec.dx)
    inc = rng.normal(0.0, std, size=(spec.nt, spec.nx))
    return NoiseGrid(spec=spec, seed=int(seed), replicate=int(replicate), increments=inc)


def noise_mass(g: NoiseGrid) -> float:
    """Total integral of the noise over the grid; distributed Normal(0, L*T)."""
    return float(np.sum(g.increments))
