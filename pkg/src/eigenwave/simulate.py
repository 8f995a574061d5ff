"""Synthesis of the observation model Y = P X + Z.

X is a latent r-variate self-similar Gaussian process with one Hurst
exponent per coordinate, generated as stationary increments by circulant
matrix embedding and then integrated; P is a p x r mixing matrix with
unit-norm columns; Z is componentwise noise (i.i.d. Gaussian, ARMA, or
absent).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .series import MultivariateSeries

PSD_TOL = 1e-10
UNIT_COLUMN_TOL = 1e-12
CLIP_ENERGY_TOL = 1e-6


@dataclass(frozen=True)
class OfBmSpec:
    """Latent process specification: Hurst exponents and point covariance.

    hurst must be nondecreasing with every entry in (0, 1); point_cov is
    the r x r covariance of the process at unit time, symmetric positive
    semidefinite.
    """

    hurst: tuple
    point_cov: np.ndarray

    def __post_init__(self):
        hurst = tuple(float(h) for h in self.hurst)
        if not hurst:
            raise ValueError("need at least one Hurst exponent")
        if any(not 0.0 < h < 1.0 for h in hurst):
            raise ValueError(f"Hurst exponents must lie in (0, 1), got {hurst}")
        if any(a > b for a, b in zip(hurst, hurst[1:])):
            raise ValueError(f"Hurst exponents must be nondecreasing, got {hurst}")
        cov = np.asarray(self.point_cov, dtype=np.float64)
        r = len(hurst)
        if cov.shape != (r, r):
            raise ValueError(f"point_cov shape {cov.shape} does not match r={r}")
        scale = max(np.abs(cov).max(), 1.0)
        if np.abs(cov - cov.T).max() > PSD_TOL * scale:
            raise ValueError("point_cov is not symmetric")
        if np.any(np.diag(cov) <= 0.0):
            raise ValueError("point_cov must have positive diagonal")
        if np.linalg.eigvalsh(cov).min() < -PSD_TOL * scale:
            raise ValueError("point_cov is not positive semidefinite")
        object.__setattr__(self, "hurst", hurst)
        object.__setattr__(self, "point_cov", cov)

    @property
    def r(self) -> int:
        return len(self.hurst)


@dataclass(frozen=True)
class MixingSpec:
    """Recipe for the p x r coordinates matrix.

    kind is one of "canonical" (first r canonical basis vectors),
    "random_unit_columns" (i.i.d. standard normal entries, columns then
    normalized to unit length), or "explicit" (matrix supplied, unit-norm
    columns required).
    """

    kind: str
    p: int
    r: int
    matrix: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in ("canonical", "random_unit_columns", "explicit"):
            raise ValueError(f"unknown mixing kind {self.kind!r}")
        if self.r < 1 or self.p < self.r:
            raise ValueError(f"need p >= r >= 1, got p={self.p}, r={self.r}")
        if self.kind == "explicit":
            if self.matrix is None:
                raise ValueError("explicit mixing requires a matrix")
            m = np.asarray(self.matrix, dtype=np.float64)
            if m.shape != (self.p, self.r):
                raise ValueError(f"mixing matrix shape {m.shape}, expected {(self.p, self.r)}")
            norms = np.linalg.norm(m, axis=0)
            if np.abs(norms - 1.0).max() > UNIT_COLUMN_TOL:
                raise ValueError(f"mixing columns must have unit norm, got {norms}")
            object.__setattr__(self, "matrix", m)
        elif self.matrix is not None:
            raise ValueError(f"matrix only valid for kind='explicit', not {self.kind!r}")


@dataclass(frozen=True)
class NoiseSpec:
    """Componentwise noise model: "iid_gaussian", "arma" or "none"."""

    kind: str
    variance: float = 1.0
    ar: tuple = ()
    ma: tuple = ()

    def __post_init__(self):
        if self.kind not in ("iid_gaussian", "arma", "none"):
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if self.kind != "none" and self.variance <= 0.0:
            raise ValueError(f"innovation variance must be positive, got {self.variance}")
        object.__setattr__(self, "ar", tuple(float(a) for a in self.ar))
        object.__setattr__(self, "ma", tuple(float(m) for m in self.ma))
        if self.kind != "arma" and (self.ar or self.ma):
            raise ValueError("ar/ma coefficients only valid for kind='arma'")
        if self.ar:
            # phi(z) = 1 - a_1 z - ... - a_p z^p must have all roots outside
            # the unit circle for stationarity.
            roots = np.roots([-a for a in self.ar[::-1]] + [1.0])
            if np.abs(roots).min() <= 1.0:
                raise ValueError(
                    f"nonstationary AR polynomial: root magnitudes {np.abs(roots)}"
                )


@dataclass(frozen=True)
class SynthesisDiagnostics:
    """Embedding quality report for one circulant-embedding synthesis."""

    clipped_energy: float
    exact: bool
    warning: str | None = None


def fgn_cross_covariance(h_a: float, h_b: float, sigma_ab: float, lag) -> float:
    """Cross-covariance at the given lag between two fractional Gaussian
    noise coordinates with exponents h_a, h_b and point covariance sigma_ab.

    Accepts a scalar or an array of lags.
    """
    if not (0.0 < h_a < 1.0 and 0.0 < h_b < 1.0):
        raise ValueError(f"Hurst exponents must lie in (0, 1), got {h_a}, {h_b}")
    k = np.abs(np.asarray(lag, dtype=np.float64))
    e = h_a + h_b
    out = 0.5 * sigma_ab * (np.abs(k - 1.0) ** e - 2.0 * k ** e + (k + 1.0) ** e)
    if np.isscalar(lag) or np.ndim(lag) == 0:
        return float(out)
    return out


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _circulant_spectrum(spec: OfBmSpec, n: int):
    """Spectral r x r matrices of the length-2n circulant embedding."""
    r = spec.r
    lags = np.arange(n + 1)
    cov = np.empty((n + 1, r, r))
    for a in range(r):
        for b in range(a, r):
            g = fgn_cross_covariance(spec.hurst[a], spec.hurst[b],
                                     spec.point_cov[a, b], lags)
            cov[:, a, b] = g
            cov[:, b, a] = g
    # Even periodic extension to length 2n; its DFT is real and symmetric
    # in frequency, so only the first n+1 matrices are decomposed.
    seq = np.concatenate([cov, cov[1:-1][::-1]], axis=0)
    spectra = np.fft.rfft(seq, axis=0).real
    return spectra


def synthesize_ofbm_increments(spec: OfBmSpec, n: int, seed):
    """Draw n steps of the stationary increment process by circulant
    matrix embedding.

    Returns (series, diagnostics). The draw is exact whenever every
    spectral matrix of the embedding is positive semidefinite; otherwise
    negative spectral eigenvalues are clipped to zero and the discarded
    relative energy is reported, with a warning beyond CLIP_ENERGY_TOL.
    n must be a power of two.
    """
    if n < 2 or n & (n - 1):
        raise ValueError(f"n must be a power of two, got {n}")
    rng = _rng(seed)
    r = spec.r
    m = 2 * n
    spectra = _circulant_spectrum(spec, n)  # (n+1, r, r)
    lam, vec = np.linalg.eigh(spectra)
    clipped = np.maximum(-lam, 0.0).sum()
    total = np.abs(lam).sum()
    clip_energy = float(clipped / total) if total > 0 else 0.0
    lam = np.maximum(lam, 0.0)
    half = vec * np.sqrt(lam)[:, None, :]  # (n+1, r, r), rows f = 0..n
    roots = np.empty((m, r, r))
    roots[: n + 1] = half
    roots[n + 1:] = half[1:-1][::-1]  # spectrum is even in frequency
    noise_re = rng.standard_normal((m, r)) / np.sqrt(2.0)
    noise_im = rng.standard_normal((m, r)) / np.sqrt(2.0)
    shaped = (np.matmul(roots, noise_re[..., None])[..., 0]
              + 1j * np.matmul(roots, noise_im[..., None])[..., 0])
    increments = np.sqrt(2.0 * m) * np.fft.ifft(shaped, axis=0)[:n].real
    exact = clipped == 0.0
    warning = None
    if clip_energy > CLIP_ENERGY_TOL:
        warning = (
            f"circulant embedding clipped {clip_energy:.3e} relative spectral "
            f"energy; output covariance is approximate"
        )
    diagnostics = SynthesisDiagnostics(clip_energy, exact, warning)
    meta = {"clipped_energy": clip_energy, "exact": exact}
    if warning:
        meta["warning"] = warning
    return MultivariateSeries(increments.T, meta=meta), diagnostics


def cumulative_path(increments: MultivariateSeries) -> MultivariateSeries:
    """Integrate an increment series into the self-similar path it spans."""
    return MultivariateSeries(np.cumsum(increments.values, axis=1),
                              meta=dict(increments.meta))


def make_mixing_matrix(spec: MixingSpec, seed=None) -> np.ndarray:
    """Realize the p x r coordinates matrix for a mixing recipe."""
    if spec.kind == "canonical":
        return np.eye(spec.p, spec.r)
    if spec.kind == "explicit":
        return spec.matrix.copy()
    rng = _rng(seed)
    m = rng.standard_normal((spec.p, spec.r))
    return m / np.linalg.norm(m, axis=0)


def _arma_burn_in(spec: NoiseSpec) -> int:
    decay = 0.0
    if spec.ar:
        roots = np.roots([-a for a in spec.ar[::-1]] + [1.0])
        decay = 1.0 / (1.0 - 1.0 / np.abs(roots).min())
    return max(512, int(np.ceil(10.0 * (len(spec.ar) + len(spec.ma) + decay))))


def synthesize_noise(spec: NoiseSpec, p: int, n: int, seed) -> MultivariateSeries:
    """Draw p independent noise rows of length n."""
    if p < 1 or n < 1:
        raise ValueError(f"need p >= 1 and n >= 1, got p={p}, n={n}")
    if spec.kind == "none":
        return MultivariateSeries(np.zeros((p, n)))
    rng = _rng(seed)
    sd = np.sqrt(spec.variance)
    if spec.kind == "iid_gaussian":
        return MultivariateSeries(sd * rng.standard_normal((p, n)))
    burn = _arma_burn_in(spec)
    total = n + burn
    eps = sd * rng.standard_normal((p, total))
    x = np.zeros((p, total))
    na, nm = len(spec.ar), len(spec.ma)
    for t in range(total):
        acc = eps[:, t].copy()
        for i, a in enumerate(spec.ar, start=1):
            if t - i >= 0:
                acc += a * x[:, t - i]
        for i, b in enumerate(spec.ma, start=1):
            if t - i >= 0:
                acc += b * eps[:, t - i]
        x[:, t] = acc
    return MultivariateSeries(x[:, burn:])


def assemble_observations(mixing: np.ndarray, latent: MultivariateSeries,
                          noise: MultivariateSeries) -> MultivariateSeries:
    """Combine latent signal and noise: Y = P X + Z."""
    mixing = np.asarray(mixing, dtype=np.float64)
    p, r = mixing.shape
    if latent.p != r:
        raise ValueError(f"mixing expects {r} latent rows, series has {latent.p}")
    if noise.p != p or noise.n != latent.n:
        raise ValueError(
            f"noise shape {(noise.p, noise.n)} does not match "
            f"output shape {(p, latent.n)}"
        )
    return MultivariateSeries(mixing @ latent.values + noise.values)
