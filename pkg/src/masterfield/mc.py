"""Finite-dimension random-matrix oracle for the exact field values.

Draws Brownian-motion samples on U(N) (or O(N)), one independent matrix
per lasso with time equal to the face area, and estimates Wilson-type
observables: the normalized trace of the matrix word for scalar
observables, or a normalized block trace for entry words over a block
partition.  Includes the square/rectangular block extraction and the
conditional expectation onto the span of the block projectors.

Reproducibility: every sample owns a counter-based RNG stream spawned
from the seed, so estimates are independent of the worker count, and a
fixed (seed, config) pair reproduces values bit-for-bit under a fixed
kernel choice.
"""

import math
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from ._kernels import evolve_unitaries, kernel_choice

__all__ = [
    "MatrixSamplerConfig",
    "BlockPartition",
    "WilsonEstimate",
    "sample_ubm",
    "sample_ubm_batch",
    "extract_blocks",
    "conditional_expectation_rect",
    "estimate_wilson",
    "estimate_wilson_many",
]

_UNITARITY_TOL = 1e-8


def default_workers():
    raw = os.environ.get("MASTERFIELD_WORKERS", "1")
    try:
        w = int(raw)
    except ValueError:
        raise ValueError(f"MASTERFIELD_WORKERS must be an integer, got {raw!r}")
    return max(1, w)


class MatrixSamplerConfig:
    """Sampling parameters: matrix size, scalars, step density, seed, count.

    ``step_count`` is the number of SDE steps per unit of time; at least
    50 per unit time are required for the retraction error to stay well
    under the statistical resolution.
    """

    def __init__(
        self,
        N=64,
        samples=400,
        seed=0,
        step_count=200,
        field_scalars="complex",
        workers=None,
    ):
        if N < 2:
            raise ValueError(f"matrix size must be at least 2, got {N}")
        if samples < 1:
            raise ValueError(f"sample count must be positive, got {samples}")
        if step_count < 50:
            raise ValueError(
                "step_count too small: need at least 50 steps per unit time, "
                f"got {step_count} (unitarity/discretization drift exceeds tolerance)"
            )
        if field_scalars not in ("complex", "real"):
            raise ValueError(
                f"field_scalars must be 'complex' or 'real', got {field_scalars!r}"
            )
        self.N = N
        self.samples = samples
        self.seed = seed
        self.step_count = step_count
        self.field_scalars = field_scalars
        self.workers = default_workers() if workers is None else max(1, int(workers))

    def __repr__(self):
        return (
            f"MatrixSamplerConfig(N={self.N}, samples={self.samples}, "
            f"seed={self.seed}, step_count={self.step_count}, "
            f"field_scalars={self.field_scalars!r}, workers={self.workers})"
        )


class BlockPartition:
    """A partition N = d_1 + ... + d_n defining diagonal blocks and projectors."""

    def __init__(self, d):
        d = tuple(int(x) for x in d)
        if not d or any(x <= 0 for x in d):
            raise ValueError(f"block sizes must be positive, got {d}")
        self.d = d
        self.N = sum(d)
        offs = [0]
        for x in d:
            offs.append(offs[-1] + x)
        self.offsets = tuple(offs)

    @classmethod
    def square(cls, n, d):
        """n equal blocks of size d (so N = n*d)."""
        return cls((d,) * n)

    def __len__(self):
        return len(self.d)

    def slice_of(self, i):
        return slice(self.offsets[i], self.offsets[i + 1])

    def projector(self, i):
        p = np.zeros((self.N, self.N))
        sl = self.slice_of(i)
        p[sl, sl] = np.eye(self.d[i])
        return p

    def __repr__(self):
        return f"BlockPartition(d={self.d})"


class WilsonEstimate:
    """Monte Carlo estimate: sample mean, stderr = sample std / sqrt(samples)."""

    def __init__(self, mean, stderr, samples):
        self.mean = complex(mean)
        self.stderr = float(stderr)
        self.samples = int(samples)

    def __repr__(self):
        return (
            f"WilsonEstimate(mean={self.mean:.6g}, stderr={self.stderr:.3g}, "
            f"samples={self.samples})"
        )


def _streams(seed, samples):
    root = np.random.SeedSequence(seed)
    return [np.random.Generator(np.random.Philox(child)) for child in root.spawn(samples)]


def _check_unitary(U, scalars):
    ident = np.eye(U.shape[-1])
    drift = max(
        float(np.abs(u.conj().T @ u - ident).max()) for u in U.reshape(-1, *U.shape[-2:])
    )
    if drift > _UNITARITY_TOL:
        raise RuntimeError(
            f"unitarity drift {drift:.3e} exceeds tolerance {_UNITARITY_TOL}"
        )


def sample_ubm(cfg, t):
    """One Brownian-motion sample at time t (the first stream of the seed)."""
    U = evolve_unitaries(_streams(cfg.seed, 1), cfg.N, t, cfg.step_count, cfg.field_scalars)
    _check_unitary(U, cfg.field_scalars)
    return U[0]


def sample_ubm_batch(cfg, t):
    """All cfg.samples Brownian-motion samples at time t, shape (samples, N, N)."""
    gens = _streams(cfg.seed, cfg.samples)
    U = _evolve_parallel(gens, cfg, [t])[0]
    _check_unitary(U, cfg.field_scalars)
    return U


def _evolve_parallel(gens, cfg, times):
    """Evolve each stream through all times in order; list of (S, N, N) arrays.

    Work is split across workers by sample index; since every sample owns
    its stream, the partition does not affect the values.
    """
    S = len(gens)
    outs = [np.empty((S, cfg.N, cfg.N), _dtype(cfg.field_scalars)) for _ in times]

    def work(lo, hi):
        chunk = gens[lo:hi]
        for out, t in zip(outs, times):
            out[lo:hi] = evolve_unitaries(
                chunk, cfg.N, t, cfg.step_count, cfg.field_scalars
            )

    w = min(cfg.workers, S)
    if w <= 1:
        work(0, S)
    else:
        bounds = [round(S * i / w) for i in range(w + 1)]
        with ThreadPoolExecutor(max_workers=w) as pool:
            futs = [
                pool.submit(work, bounds[i], bounds[i + 1])
                for i in range(w)
                if bounds[i] < bounds[i + 1]
            ]
            for f in futs:
                f.result()
    return outs


def _dtype(scalars):
    return np.complex128 if scalars == "complex" else np.float64


def _dagger(U):
    return U.conj().transpose(0, 2, 1)


def _scalar_values(mats, word, N):
    S = mats[0].shape[0] if mats else 0
    prod = None
    for idx, expo in word:
        m = mats[idx] if expo == 1 else _dagger(mats[idx])
        prod = m if prod is None else prod @ m
    if prod is None:
        return np.ones(S, dtype=complex)
    return np.einsum("sii->s", prod) / N


def _entry_values(mats, word, partition):
    prod = None
    row0 = None
    prev_col = None
    for idx, i, j, star in word:
        if not (0 <= i < len(partition) and 0 <= j < len(partition)):
            raise ValueError(f"block index ({i},{j}) outside partition {partition.d}")
        blk = mats[idx][:, partition.slice_of(i), partition.slice_of(j)]
        if star:
            blk = _dagger(blk)
            i, j = j, i
        if prod is None:
            prod, row0 = blk, i
        else:
            if prev_col != i:
                raise ValueError(
                    f"entry word does not conform: block row {i} follows column {prev_col}"
                )
            prod = prod @ blk
        prev_col = j
    if prod is None:
        S = mats[0].shape[0] if mats else 0
        return np.ones(S, dtype=complex)
    if prev_col != row0:
        raise ValueError(
            f"entry word is not closed: starts at row {row0}, ends at column {prev_col}"
        )
    return np.einsum("sii->s", prod) / partition.d[row0]


def estimate_wilson_many(lassos, words, cfg, partition=None):
    """Estimate several observables over one lasso family with shared samples.

    ``lassos`` is a list of (face area, orientation) pairs; orientation -1
    means the lasso is traversed against its bulk.  Scalar observables are
    words of (lasso index, exponent) pairs; entry observables are words of
    (lasso index, block row, block column, star) and require ``partition``.
    """
    areas = []
    for area, orient in lassos:
        if area < 0:
            raise ValueError(f"face area must be >= 0, got {area}")
        if orient not in (1, -1):
            raise ValueError(f"orientation must be +1 or -1, got {orient}")
        areas.append(area)
    if partition is not None and partition.N != cfg.N:
        raise ValueError(f"partition covers {partition.N} but N = {cfg.N}")
    for word in words:
        for letter in word:
            idx = letter[0]
            if not (0 <= idx < len(lassos)):
                raise ValueError(f"word references lasso {idx} of {len(lassos)}")
            if partition is None and letter[1] not in (1, -1):
                raise ValueError(f"exponent must be +1 or -1, got {letter[1]}")

    gens = _streams(cfg.seed, cfg.samples)
    mats = _evolve_parallel(gens, cfg, areas)
    for k, (_, orient) in enumerate(lassos):
        if orient == -1:
            mats[k] = _dagger(mats[k])
    for m in mats:
        _check_unitary(m, cfg.field_scalars)

    out = []
    for word in words:
        if len(word) == 0:
            out.append(WilsonEstimate(1.0, 0.0, cfg.samples))
            continue
        if partition is None:
            values = _scalar_values(mats, word, cfg.N)
        else:
            values = _entry_values(mats, word, partition)
        mean = values.mean()
        stderr = float(values.std()) / math.sqrt(cfg.samples)
        out.append(WilsonEstimate(mean, stderr, cfg.samples))
    return out


def estimate_wilson(lassos, word, cfg, partition=None):
    """Single-observable form of estimate_wilson_many."""
    return estimate_wilson_many(lassos, [word], cfg, partition=partition)[0]


def extract_blocks(U, partition):
    """The indexed family of blocks of U under the partition.

    Returns a dict {(i, j): block}; blocks are views.  The projectors of
    the partition are available from the partition object itself.
    """
    if U.shape != (partition.N, partition.N):
        raise ValueError(
            f"matrix shape {U.shape} does not conform to partition of {partition.N}"
        )
    out = {}
    for i in range(len(partition)):
        for j in range(len(partition)):
            out[(i, j)] = U[partition.slice_of(i), partition.slice_of(j)]
    return out


def conditional_expectation_rect(A, partition):
    """Project A onto span{p_i}: sum_i (Tr(p_i A p_i)/d_i) p_i."""
    if A.shape != (partition.N, partition.N):
        raise ValueError(
            f"matrix shape {A.shape} does not conform to partition of {partition.N}"
        )
    out = np.zeros_like(A)
    for i in range(len(partition)):
        sl = partition.slice_of(i)
        coeff = np.trace(A[sl, sl]) / partition.d[i]
        out[sl, sl] = coeff * np.eye(partition.d[i])
    return out
