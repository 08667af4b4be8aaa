"""Compressive measurement model: center-burst-weighted random subsampling
and the matrix-free partial Fourier operator with its exact adjoint."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .spectral import SpectralGrid, onesided_to_time, time_to_onesided


class PmfKind(Enum):
    SLOPED = "sloped"
    UNIFORM = "uniform"


@dataclass(frozen=True, eq=False)
class SlopedPmf:
    """Sampling probabilities proportional to min(1, 1 / |l - N/2|)."""

    weights: np.ndarray
    normalization: float

    kind = PmfKind.SLOPED

    @property
    def n_temporal(self) -> int:
        return self.weights.shape[0]


@dataclass(frozen=True)
class UniformPmf:
    n_temporal: int

    kind = PmfKind.UNIFORM

    @property
    def weights(self) -> np.ndarray:
        return np.full(self.n_temporal, 1.0 / self.n_temporal)


def build_sloped_pmf(n_temporal: int) -> SlopedPmf:
    """Sampling PMF peaked at the center-burst position N/2.

    At |l - N/2| <= 1 the min evaluates to 1 (the 1/0 at the exact center is
    absorbed by the min); elsewhere the weight decays as 1/distance.
    """
    if n_temporal < 2:
        raise ValueError(f"n_temporal must be >= 2, got {n_temporal}")
    distance = np.abs(np.arange(n_temporal) - n_temporal / 2.0)
    with np.errstate(divide="ignore"):
        raw = np.minimum(1.0, 1.0 / distance)
    normalization = 1.0 / raw.sum()
    weights = raw * normalization
    weights.flags.writeable = False
    return SlopedPmf(weights=weights, normalization=normalization)


@dataclass(frozen=True, eq=False)
class SampleSet:
    """Sorted distinct temporal indices Omega with their generating PMF and seed."""

    indices: np.ndarray
    pmf_kind: PmfKind
    seed: int
    n_temporal: int

    def __post_init__(self):
        idx = self.indices
        if idx.ndim != 1 or idx.size == 0:
            raise ValueError("sample set must be a non-empty 1-d index array")
        # m == n_temporal is allowed only for the explicit full-sampling
        # (R = identity) limit; drawn sets are strictly compressive.
        if idx.size > self.n_temporal:
            raise ValueError(
                f"sample count {idx.size} exceeds n_temporal {self.n_temporal}"
            )
        if idx[0] < 0 or idx[-1] >= self.n_temporal:
            raise ValueError("sample indices out of range")
        if np.any(np.diff(idx) <= 0):
            raise ValueError("sample indices must be strictly increasing")

    @property
    def m(self) -> int:
        return int(self.indices.size)

    @property
    def compression_rate(self) -> float:
        return self.n_temporal / self.m


def draw_sample_set(pmf: SlopedPmf | UniformPmf, m: int, seed: int) -> SampleSet:
    """Draw m distinct indices without replacement, weighted by the PMF.

    Uses the weighted-reservoir keys ``Exp(1) / weight`` (equivalent in
    distribution to successive weighted draws with renormalization);
    deterministic for a fixed seed, indices returned sorted.
    """
    n = pmf.n_temporal
    if not 0 < m < n:
        raise ValueError(f"m must satisfy 0 < m < {n}, got {m}")
    rng = np.random.default_rng(seed)
    keys = rng.exponential(size=n) / pmf.weights
    chosen = np.argpartition(keys, m - 1)[:m]
    chosen.sort()
    return SampleSet(
        indices=chosen.astype(np.int64),
        pmf_kind=pmf.kind,
        seed=seed,
        n_temporal=n,
    )


@dataclass(frozen=True)
class Measurement:
    """Subsampled interferogram values and the residual bound for the solve."""

    y: np.ndarray
    epsilon: float

    def __post_init__(self):
        if self.epsilon < 0:
            raise ValueError(f"epsilon must be >= 0, got {self.epsilon}")


@dataclass(frozen=True, eq=False)
class SensingOperator:
    """Matrix-free A = R Phi: one-sided complex spectrum -> sampled real
    interferogram values.  Phi is the unitary spectrum-to-time map of
    :mod:`combsense.spectral`; R restricts to the sample set.  Immutable and
    safe to share across threads."""

    grid: SpectralGrid
    sample_set: SampleSet

    def __post_init__(self):
        if self.sample_set.n_temporal != self.grid.n_temporal:
            raise ValueError(
                f"sample set length {self.sample_set.n_temporal} does not "
                f"match grid n_temporal {self.grid.n_temporal}"
            )

    @property
    def n_spectral(self) -> int:
        return self.grid.n_spectral

    @property
    def m(self) -> int:
        return self.sample_set.m

    def forward(self, x: np.ndarray) -> np.ndarray:
        """(A x)_j = (Phi x)_{omega_j}, via one fast transform."""
        x = np.asarray(x)
        if x.shape != (self.n_spectral,):
            raise ValueError(f"expected spectrum of length {self.n_spectral}, got {x.shape}")
        return onesided_to_time(x)[self.sample_set.indices]

    def adjoint(self, v: np.ndarray) -> np.ndarray:
        """Exact transpose of :meth:`forward` under the real inner product
        (real and imaginary parts treated as independent coordinates)."""
        v = np.asarray(v, dtype=np.float64)
        if v.shape != (self.m,):
            raise ValueError(f"expected measurement of length {self.m}, got {v.shape}")
        buf = np.zeros(self.grid.n_temporal)
        buf[self.sample_set.indices] = v
        return time_to_onesided(buf)


def apply_forward(op: SensingOperator, x: np.ndarray) -> np.ndarray:
    return op.forward(x)


def apply_adjoint(op: SensingOperator, v: np.ndarray) -> np.ndarray:
    return op.adjoint(v)


def full_sample_set(n_temporal: int) -> SampleSet:
    """The R = identity limit: every temporal index retained."""
    return SampleSet(
        indices=np.arange(n_temporal, dtype=np.int64),
        pmf_kind=PmfKind.UNIFORM,
        seed=0,
        n_temporal=n_temporal,
    )


def operator_norm_estimate(op: SensingOperator, iterations: int = 50, seed: int = 0) -> float:
    """Power-iteration estimate of ||A|| (is <= 1 for the unitary Phi)."""
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(op.n_spectral) + 1j * rng.standard_normal(op.n_spectral)
    norm = 0.0
    for _ in range(iterations):
        x = op.adjoint(op.forward(x))
        norm = np.linalg.norm(x)
        if norm == 0.0:
            return 0.0
        x = x / norm
    return float(np.sqrt(norm))
