"""Synthetic ring-of-Gaussians data, noise source, and seeded RNG streams.

Randomness policy (fixed so runs reproduce across platforms): every
stream is a numpy `Generator` over the counter-based Philox bit
generator. A run's 64-bit seed feeds `np.random.SeedSequence(seed)`,
and the run's independent streams are its spawned children, by role
index: 0 = data sampling, 1 = generator noise, 2 = metric evaluation,
3 = weight init. Normal variates use numpy's ziggurat
(`Generator.standard_normal`).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

STREAM_ROLES = {"data": 0, "noise": 1, "metrics": 2, "init": 3}


@dataclass(frozen=True)
class RingSpec:
    """Mixture of `n_modes` isotropic Gaussians on a circle."""

    n_modes: int = 8
    radius: float = 2.0
    covariance_scale: float = 0.02

    def __post_init__(self):
        if self.n_modes < 1:
            raise ValueError("n_modes must be >= 1")
        if self.radius <= 0.0 or self.covariance_scale <= 0.0:
            raise ValueError("radius and covariance_scale must be positive")


def mode_centers(spec: RingSpec) -> np.ndarray:
    """[n_modes x 2] centers, evenly spaced starting at angle 0."""
    angles = 2.0 * np.pi * np.arange(spec.n_modes) / spec.n_modes
    return spec.radius * np.stack([np.cos(angles), np.sin(angles)], axis=1)


def make_stream(seed: int, role: str) -> np.random.Generator:
    """Independent Philox stream for one role of a seeded run."""
    children = np.random.SeedSequence(int(seed)).spawn(len(STREAM_ROLES))
    return np.random.Generator(np.random.Philox(children[STREAM_ROLES[role]]))


def run_streams(seed: int) -> "dict[str, np.random.Generator]":
    return {role: make_stream(seed, role) for role in STREAM_ROLES}


def sample_ring(spec: RingSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    """n draws from the ring mixture as an [n x 2] matrix."""
    if n < 0:
        raise ValueError("n must be >= 0")
    centers = mode_centers(spec)
    modes = rng.integers(0, spec.n_modes, size=n)
    noise = np.sqrt(spec.covariance_scale) * rng.standard_normal((n, 2))
    return centers[modes] + noise


def ring_log_density(spec: RingSpec, x: np.ndarray) -> np.ndarray:
    """Log density of the mixture at points x ([n x 2] or a single pair),
    via logsumexp over components so far-away points stay finite."""
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    centers = mode_centers(spec)
    s2 = spec.covariance_scale
    d2 = np.sum((x[:, None, :] - centers[None, :, :]) ** 2, axis=2)
    comp = -d2 / (2.0 * s2) - np.log(2.0 * np.pi * s2)
    m = comp.max(axis=1, keepdims=True)
    return (m[:, 0] + np.log(np.mean(np.exp(comp - m), axis=1)))


def ring_density(spec: RingSpec, x) -> "np.ndarray | float":
    """Density of the mixture; scalar for a single 2-vector."""
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    out = np.exp(ring_log_density(spec, x))
    return float(out[0]) if single else out


def sample_noise(n: int, dim: int, rng: np.random.Generator) -> np.ndarray:
    """[n x dim] i.i.d. standard normal generator inputs."""
    if n < 1 or dim < 1:
        raise ValueError("n and dim must be >= 1")
    return rng.standard_normal((n, dim))


def write_samples_csv(path, samples: np.ndarray) -> None:
    """Dump [n x 2] samples with an `x,y` header; floats use repr so the
    file round-trips to full precision."""
    samples = np.asarray(samples, dtype=np.float64)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "y"])
        for row in samples:
            writer.writerow([repr(float(row[0])), repr(float(row[1]))])


def read_samples_csv(path) -> np.ndarray:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != ["x", "y"]:
            raise ValueError(f"unexpected sample header {header!r}")
        return np.array([[float(a), float(b)] for a, b in reader], dtype=np.float64)
