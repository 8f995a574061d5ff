"""Per-octave covariance matrices of detail coefficients and their spectra.

The covariance at octave j is the p x p second-moment matrix of the
detail coefficient vectors at that octave. Its ordered eigenvalues are
the raw material of the multiscale regression; eigenvalues below a small
floor (rank deficiency when p exceeds the coefficient count) are flagged
and excluded from log-domain statistics.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .wavelets import DetailPyramid

SYMMETRY_TOL = 1e-8
DEFAULT_EIGEN_FLOOR = 1e-10


@dataclass(frozen=True)
class WaveletCovariance:
    """Symmetric p x p covariance of detail vectors at one octave."""

    j: int
    n_j: int
    matrix: np.ndarray


def wavelet_covariance(j: int, details: np.ndarray) -> WaveletCovariance:
    """Average outer product of the detail vectors at octave j.

    details is a p x n_j matrix of coefficients; exact symmetry of the
    result is enforced by averaging with the transpose.
    """
    details = np.asarray(details, dtype=np.float64)
    if details.ndim != 2 or details.shape[1] < 1:
        raise ValueError(f"details must be a p x n_j matrix with n_j >= 1, got {details.shape}")
    n_j = details.shape[1]
    m = details @ details.T / n_j
    m = (m + m.T) / 2.0
    return WaveletCovariance(j=j, n_j=n_j, matrix=m)


def sym_eigen(matrix: np.ndarray):
    """Eigenvalues (ascending) and orthonormal eigenvectors of a symmetric
    matrix. Rejects input whose asymmetry exceeds SYMMETRY_TOL relative to
    its magnitude."""
    m = np.asarray(matrix, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    scale = np.abs(m).max()
    if scale > 0 and np.abs(m - m.T).max() > SYMMETRY_TOL * scale:
        raise ValueError("matrix is not symmetric within tolerance")
    return np.linalg.eigh(m)


def jacobi_eigen(matrix: np.ndarray, tol: float = 1e-14, max_sweeps: int = 100):
    """Cyclic Jacobi eigendecomposition, the small-matrix cross-check for
    sym_eigen. Independent of LAPACK; intended for p <= ~16."""
    a = np.array(matrix, dtype=np.float64)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    v = np.eye(n)
    scale = max(np.abs(a).max(), 1e-300)
    for _ in range(max_sweeps):
        off = np.sqrt(2.0 * (np.triu(a, 1) ** 2).sum())
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if theta == 0.0:
                    t = 1.0
                elif abs(theta) > 1e150:  # theta^2 would overflow
                    t = 0.5 / theta
                else:
                    t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                rot = np.eye(n)
                rot[p, p] = rot[q, q] = c
                rot[p, q] = s
                rot[q, p] = -s
                a = rot.T @ a @ rot
                v = v @ rot
    lam = np.diag(a).copy()
    order = np.argsort(lam, kind="stable")
    return lam[order], v[:, order]


@dataclass(frozen=True)
class LogEigenSpectrum:
    """Sorted eigenvalues per octave with their base-2 logarithms.

    eigenvalues, log2_eigenvalues and zero_flags all have shape
    (octave count, p); log2 entries are NaN exactly where flagged.
    """

    j1: int
    j2: int
    counts: tuple
    eigenvalues: np.ndarray
    log2_eigenvalues: np.ndarray
    zero_flags: np.ndarray
    floor: float

    @property
    def octaves(self) -> range:
        return range(self.j1, self.j2 + 1)

    @property
    def p(self) -> int:
        return self.eigenvalues.shape[1]


def log_eigen_spectrum(covariances, floor: float = DEFAULT_EIGEN_FLOOR) -> LogEigenSpectrum:
    """Eigen-decompose per-octave covariances and floor tiny eigenvalues.

    covariances is a sequence of WaveletCovariance over consecutive
    octaves. Eigenvalues below the floor are flagged as zero and carry no
    logarithm; this suppresses spuriously large log-domain slopes from
    rank-deficient matrices.
    """
    if floor <= 0.0:
        raise ValueError(f"floor must be positive, got {floor}")
    covs = list(covariances)
    if not covs:
        raise ValueError("need at least one covariance")
    js = [c.j for c in covs]
    if js != list(range(js[0], js[0] + len(js))):
        raise ValueError(f"octaves must be consecutive, got {js}")
    p = covs[0].matrix.shape[0]
    lam = np.empty((len(covs), p))
    for i, cov in enumerate(covs):
        lam[i], _ = sym_eigen(cov.matrix)
    flags = lam < floor
    with np.errstate(divide="ignore", invalid="ignore"):
        log2lam = np.where(flags, np.nan, np.log2(np.where(flags, 1.0, lam)))
    return LogEigenSpectrum(
        j1=js[0], j2=js[-1], counts=tuple(c.n_j for c in covs),
        eigenvalues=lam, log2_eigenvalues=log2lam, zero_flags=flags, floor=floor,
    )


def spectrum_from_pyramid(pyramid: DetailPyramid, j1: int, j2: int,
                          floor: float = DEFAULT_EIGEN_FLOOR) -> LogEigenSpectrum:
    """Covariances and eigenvalues for the octave range j1..j2 of a pyramid."""
    if j1 < 1 or j1 > j2:
        raise ValueError(f"need 1 <= j1 <= j2, got ({j1}, {j2})")
    covs = [wavelet_covariance(j, pyramid.detail(j)) for j in range(j1, j2 + 1)]
    return log_eigen_spectrum(covs, floor=floor)


def write_spectrum_csv(spectrum: LogEigenSpectrum, path) -> None:
    """CSV export with columns j, i, lambda, log2_lambda, zero_flag."""
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("j,i,lambda,log2_lambda,zero_flag\n")
        for row, j in enumerate(spectrum.octaves):
            for i in range(spectrum.p):
                lam = repr(float(spectrum.eigenvalues[row, i]))
                flagged = bool(spectrum.zero_flags[row, i])
                log2 = "" if flagged else repr(float(spectrum.log2_eigenvalues[row, i]))
                fh.write(f"{j},{i + 1},{lam},{log2},{int(flagged)}\n")
