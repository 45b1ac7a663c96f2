"""Exact and Markov-chain samplers for the body families, with reproducible
counter-based substreams.

Reproducibility contract: draws are generated in fixed blocks of ``BLOCK``
rows; block b of a run with master seed s comes from an independent Philox
substream keyed by (s, b).  The result is bit-identical for any worker count
and any chunked consumption order.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .bodies import BodySpec, axis_section, contains_rows

RNG_ID = "philox4x64-128(key=(seed,stream))"
BLOCK = 1 << 14  # rows per substream block; part of the determinism contract
_MASK64 = (1 << 64) - 1

MAGIC = b"THSL"
HEADER_VERSION = 1
_HEADER = struct.Struct("<4sHIQQ6x")  # magic, version u16, n u32, N u64, seed u64, pad to 32
assert _HEADER.size == 32


def substream(seed: int, stream: int) -> np.random.Generator:
    """Independent generator for (seed, stream); streams never overlap."""
    key = np.array([seed & _MASK64, stream & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True)
class SampleMatrix:
    """N x n draws plus the provenance needed to reproduce them exactly."""

    data: np.ndarray
    body: BodySpec
    seed: int
    method: str = "exact"
    burnin: int | None = None
    thinning: int | None = None

    def __post_init__(self):
        if self.data.ndim != 2 or self.data.shape[0] < 1:
            raise ValueError("data must be an N x n array with N >= 1")
        if self.data.shape[1] != self.body.dim:
            raise ValueError("column count must equal body dim")
        self.data.setflags(write=False)

    @property
    def count(self) -> int:
        return self.data.shape[0]

    @property
    def dim(self) -> int:
        return self.data.shape[1]


def _draw_exact_block(body: BodySpec, m: int, rng: np.random.Generator) -> np.ndarray:
    n = body.dim
    scale = body.scale_array
    if body.kind == "cube":
        return rng.uniform(-1.0, 1.0, size=(m, n)) * scale
    if body.kind == "product_of_intervals":
        return rng.uniform(-1.0, 1.0, size=(m, n)) * (scale * np.asarray(body.half_widths))
    if body.kind == "euclidean_ball":
        g = rng.standard_normal(size=(m, n))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        r = rng.uniform(size=(m, 1)) ** (1.0 / n)
        return g * r * scale
    if body.kind == "lp_ball":
        p = body.p
        # |g_i|^p ~ Gamma(1/p); signed generalized Gaussian coordinates,
        # normalized by (sum |g_j|^p + E)^(1/p) with E standard exponential
        gp = rng.gamma(1.0 / p, size=(m, n))
        g = gp ** (1.0 / p) * rng.choice(np.array([-1.0, 1.0]), size=(m, n))
        e = rng.standard_exponential(size=(m, 1))
        w = (gp.sum(axis=1, keepdims=True) + e) ** (1.0 / p)
        return g / w * scale
    raise ValueError(f"unsupported kind for exact sampling: {body.kind!r}")


def exact_blocks(body: BodySpec, count: int, seed: int) -> Iterator[np.ndarray]:
    """Yield the exact-sampler rows in their canonical BLOCK-sized chunks."""
    if count < 1:
        raise ValueError("count must be >= 1")
    done = 0
    stream = 0
    while done < count:
        m = min(BLOCK, count - done)
        yield _draw_exact_block(body, m, substream(seed, stream))
        done += m
        stream += 1


def sample_exact(body: BodySpec, count: int, seed: int) -> SampleMatrix:
    """N independent uniform draws from a convex body kind."""
    rows = np.concatenate(list(exact_blocks(body, count, seed)), axis=0)
    return SampleMatrix(rows, body, seed, method="exact")


def sample_counterexample(n: int, count: int, seed: int) -> SampleMatrix:
    """Draws U * e_T with T uniform on axes and U uniform on [-sqrt(3n), sqrt(3n)].

    Each coordinate has E X_i^2 = 1 by construction; at most one coordinate of
    every row is nonzero.
    """
    if n < 1 or count < 1:
        raise ValueError("n and count must be >= 1")
    body = BodySpec.counterexample_cross(n)
    half = math.sqrt(3.0 * n)
    rows = np.zeros((count, n))
    done = 0
    stream = 0
    while done < count:
        m = min(BLOCK, count - done)
        rng = substream(seed, stream)
        t = rng.integers(0, n, size=m)
        u = rng.uniform(-half, half, size=m)
        rows[np.arange(done, done + m), t] = u
        done += m
        stream += 1
    return SampleMatrix(rows, body, seed, method="counterexample")


def counterexample_marginal(n: int, count: int, theta: np.ndarray, seed: int) -> np.ndarray:
    """Marginal sum(theta_i X_i) of the counterexample, sampled without the n columns."""
    theta = np.asarray(theta, dtype=float)
    half = math.sqrt(3.0 * n)
    out = np.empty(count)
    done = 0
    stream = 0
    while done < count:
        m = min(BLOCK, count - done)
        rng = substream(seed, stream)
        t = rng.integers(0, n, size=m)
        u = rng.uniform(-half, half, size=m)
        out[done:done + m] = u * theta[t]
        done += m
        stream += 1
    return out


def sample_hit_and_run(body: BodySpec, count: int, burnin: int = 1000,
                       thinning: int | None = None, seed: int = 0,
                       start: np.ndarray | None = None) -> SampleMatrix:
    """Coordinate hit-and-run chain: uniform axis, uniform resample on the section.

    ``burnin`` counts sweeps (dim single-coordinate moves each); ``thinning``
    counts single moves between recorded rows and defaults to dim.  The first
    row is recorded right after burnin, so count=1 with burnin=0 returns the
    start point (the center by default).
    """
    if not body.is_convex:
        raise ValueError("hit-and-run requires a convex body kind")
    if burnin < 0 or count < 1:
        raise ValueError("burnin >= 0 and count >= 1 required")
    n = body.dim
    if thinning is None:
        thinning = n
    if thinning < 1:
        raise ValueError("thinning must be >= 1")
    rng = substream(seed, 0)
    x = np.zeros(n) if start is None else np.asarray(start, dtype=float).copy()
    rows = np.empty((count, n))

    def move():
        i = int(rng.integers(0, n))
        sec = axis_section(body, x, i)
        x[i] = rng.uniform(sec.lo, sec.hi)

    for _ in range(burnin * n):
        move()
    rows[0] = x
    for k in range(1, count):
        for _ in range(thinning):
            move()
        rows[k] = x
    return SampleMatrix(rows, body, seed, method="hit_and_run",
                        burnin=burnin, thinning=thinning)


def estimate_second_moments(body: BodySpec, count: int = 10 ** 6, seed: int = 0) -> np.ndarray:
    """Monte Carlo per-axis E X_j^2 for kinds without closed-form moments."""
    acc = np.zeros(body.dim)
    total = 0
    for block in exact_blocks(body, count, seed):
        acc += np.einsum("ij,ij->j", block, block)
        total += block.shape[0]
    return acc / total


def membership_violations(samples: SampleMatrix, atol: float = 1e-12) -> int:
    """Number of rows failing the (closed) membership test; 0 for exact samplers."""
    if not samples.body.is_convex:
        raise ValueError("membership check applies to convex kinds")
    return int(np.sum(~contains_rows(samples.body, samples.data, atol=atol)))


# -- binary dump format -------------------------------------------------------

def dump_samples(samples: SampleMatrix, path) -> None:
    """Write little-endian float64 rows behind a 32-byte THSL header."""
    n, count = samples.dim, samples.count
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, HEADER_VERSION, n, count, samples.seed & _MASK64))
        fh.write(np.ascontiguousarray(samples.data, dtype="<f8").tobytes())


def load_samples(path, body: BodySpec | None = None) -> SampleMatrix:
    with open(path, "rb") as fh:
        magic, version, n, count, seed = _HEADER.unpack(fh.read(_HEADER.size))
        if magic != MAGIC:
            raise ValueError(f"bad magic {magic!r}; not a THSL sample file")
        if version != HEADER_VERSION:
            raise ValueError(f"unsupported THSL version {version}")
        data = np.frombuffer(fh.read(8 * n * count), dtype="<f8").reshape(count, n).copy()
    if body is None:
        body = BodySpec.cube(n, half_width=float(np.max(np.abs(data)) or 1.0))
    return SampleMatrix(data, body, seed, method="loaded")
