"""Discrete wavelet multiresolution analysis via the pyramid algorithm.

The transform is applied row-wise to a multivariate series with
orthonormal compactly supported filters (Haar and the Daubechies family
up to 10 vanishing moments). Convolution is valid-only: a coefficient is
retained at octave j only if its filter window covers observed samples
exclusively, so retained coefficients are free of border effects. The
alignment convention is fixed once and for all: output index k at each
level corresponds to the filter window starting at sample 2k of the
previous level.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .series import MultivariateSeries

# Extremal-phase Daubechies scaling filters, generated by spectral
# factorization at 60-digit precision and rounded to float64. Index is the
# number of vanishing moments; filter length is twice that. N=1 is Haar.
_DAUBECHIES_LOWPASS = {
    1: (0.70710678118654752, 0.70710678118654752),
    2: (0.48296291314453414, 0.83651630373780791, 0.22414386804201338,
        -0.12940952255126038),
    3: (0.33267055295008262, 0.80689150931109258, 0.45987750211849157,
        -0.13501102001025459, -0.085441273882026662, 0.035226291885709537),
    4: (0.23037781330889650, 0.71484657055291565, 0.63088076792985891,
        -0.027983769416859854, -0.18703481171909308, 0.030841381835560764,
        0.032883011666885200, -0.010597401785069032),
    5: (0.16010239797419291, 0.60382926979718967, 0.72430852843777293,
        0.13842814590132073, -0.24229488706638203, -0.032244869584638375,
        0.077571493840045714, -0.0062414902127982743, -0.012580751999081999,
        0.0033357252854737713),
    6: (0.11154074335010946, 0.49462389039845309, 0.75113390802109535,
        0.31525035170919763, -0.22626469396543982, -0.12976686756726194,
        0.097501605587323049, 0.027522865530305729, -0.031582039317486030,
        0.00055384220116149614, 0.0047772575109455106, -0.0010773010853084796),
    7: (0.077852054085009179, 0.39653931948191731, 0.72913209084623512,
        0.46978228740519312, -0.14390600392856498, -0.22403618499387498,
        0.071309219266830265, 0.080612609151083072, -0.038029936935014414,
        -0.016574541630666881, 0.012550998556099841, 0.00042957797292136652,
        -0.0018016407040474909, 0.00035371379997452025),
    8: (0.054415842243104010, 0.31287159091429997, 0.67563073629728981,
        0.58535468365420671, -0.015829105256349306, -0.28401554296154693,
        0.00047248457391328277, 0.12874742662047846, -0.017369301001807546,
        -0.044088253930794752, 0.013981027917398282, 0.0087460940474057767,
        -0.0048703529934515743, -0.00039174037337694705, 0.00067544940645056937,
        -0.00011747678412476953),
    9: (0.038077947363878347, 0.24383467461259035, 0.60482312369011111,
        0.65728807805130054, 0.13319738582500758, -0.29327378327917491,
        -0.096840783222976461, 0.14854074933810638, 0.030725681479333379,
        -0.067632829061329974, 0.00025094711483145196, 0.022361662123679097,
        -0.0047232047577513973, -0.0042815036824634298, 0.0018476468830562265,
        0.00023038576352319597, -0.00025196318894271014, 3.9347320316271599e-05),
    10: (0.026670057900555554, 0.18817680007769149, 0.52720118893172559,
         0.68845903945360357, 0.28117234366057746, -0.24984642432731538,
         -0.19594627437737704, 0.12736934033579326, 0.093057364603572351,
         -0.071394147166397087, -0.029457536821875813, 0.033212674059341002,
         0.0036065535669561697, -0.010733175483330575, 0.0013953517470529012,
         0.0019924052951850561, -0.00068585669495971163, -0.00011646685512928545,
         9.3588670320069591e-05, -1.3264202894521245e-05),
}

SUPPORTED_MOMENTS = range(1, 11)

DC_GAIN_TOL = 1e-12
ORTHONORMALITY_TOL = 1e-12
MOMENT_TOL = 1e-10


@dataclass(frozen=True)
class FilterPair:
    """Low/high-pass analysis filter pair for one wavelet family member."""

    family: str  # "haar" or "daubechies"
    n_vanishing: int
    low_pass: np.ndarray
    high_pass: np.ndarray

    @property
    def length(self) -> int:
        return self.low_pass.size

    def validate(self) -> None:
        """Check DC gain, shift orthonormality and discrete vanishing moments.

        The moment sums are evaluated on the filter support rescaled to
        [-1, 1]; the raw monomial sums span too many orders of magnitude for
        a meaningful float64 test at high moment counts, and annihilation of
        polynomials is invariant under the affine change of variable.
        """
        u, v, L = self.low_pass, self.high_pass, self.length
        if L != 2 * self.n_vanishing:
            raise ValueError(f"filter length {L} != 2 x {self.n_vanishing} vanishing moments")
        if abs(u.sum() - np.sqrt(2.0)) > DC_GAIN_TOL:
            raise ValueError(f"low-pass DC gain {u.sum()!r} differs from sqrt(2)")
        for m in range(L // 2):
            target = 1.0 if m == 0 else 0.0
            got = np.dot(u[: L - 2 * m], u[2 * m:])
            if abs(got - target) > ORTHONORMALITY_TOL:
                raise ValueError(f"orthonormality fails at shift {2 * m}: {got!r}")
        center = (L - 1) / 2.0
        scale = max(center, 1.0)
        x = (np.arange(L) - center) / scale
        for moment in range(self.n_vanishing):
            got = np.dot(v, x ** moment)
            if abs(got) > MOMENT_TOL:
                raise ValueError(f"vanishing moment {moment} fails: {got!r}")


def make_filter_bank(family: str, n_vanishing: int = 1) -> FilterPair:
    """Build the analysis filter pair for a wavelet family.

    family is "haar" (one vanishing moment) or "daubechies" with
    n_vanishing in 1..10. Haar coincides with Daubechies at one vanishing
    moment. The returned pair is validated against the filter invariants.
    """
    family = family.lower()
    if family == "haar":
        n_vanishing = 1
    elif family != "daubechies":
        raise ValueError(f"unknown wavelet family {family!r}; use 'haar' or 'daubechies'")
    if n_vanishing not in SUPPORTED_MOMENTS:
        raise ValueError(
            f"n_vanishing={n_vanishing} unsupported; Daubechies filters are "
            f"available for 1..10 vanishing moments"
        )
    u = np.array(_DAUBECHIES_LOWPASS[n_vanishing], dtype=np.float64)
    L = u.size
    # Quadrature mirror: v_k = (-1)^k u_{L-1-k}
    v = u[::-1].copy()
    v[1::2] *= -1.0
    pair = FilterPair(family=family, n_vanishing=n_vanishing, low_pass=u, high_pass=v)
    pair.validate()
    return pair


def _validate_table() -> None:
    for n in SUPPORTED_MOMENTS:
        make_filter_bank("daubechies", n)


_validate_table()  # fail fast on any transcription error in the constants


def valid_count(n: int, j: int, filter_length: int) -> int:
    """Number of border-free detail coefficients at octave j.

    Follows the recursion n_{j+1} = floor((n_j - L)/2) + 1 started at
    n_0 = n; returns 0 as soon as no full filter window fits.
    """
    if n < 1 or j < 1:
        raise ValueError(f"need n >= 1 and j >= 1, got n={n}, j={j}")
    count = n
    for _ in range(j):
        count = (count - filter_length) // 2 + 1
        if count <= 0:
            return 0
    return count


@dataclass(frozen=True)
class DetailPyramid:
    """Border-free detail coefficients per octave.

    octaves maps j to a p x n_j coefficient matrix for every feasible
    octave up to the requested depth; truncated is set when the requested
    depth was not reachable.
    """

    octaves: dict[int, np.ndarray]
    counts: dict[int, int]
    truncated: bool

    @property
    def max_octave(self) -> int:
        return max(self.octaves)

    def detail(self, j: int) -> np.ndarray:
        if j not in self.octaves:
            raise KeyError(f"octave {j} not present (octaves 1..{self.max_octave})")
        return self.octaves[j]


def _analysis_step(a: np.ndarray, low: np.ndarray, high: np.ndarray):
    length = low.size
    count = (a.shape[1] - length) // 2 + 1
    if count <= 0:
        return None
    approx = np.zeros((a.shape[0], count))
    detail = np.zeros((a.shape[0], count))
    for i in range(length):
        window = a[:, i : i + 2 * count - 1 : 2]
        approx += low[i] * window
        detail += high[i] * window
    return approx, detail


def pyramid_transform(series: MultivariateSeries, filter_pair: FilterPair,
                      j_max: int) -> DetailPyramid:
    """Run the pyramid analysis down to octave j_max, row-wise.

    The approximation sequence at octave 0 is the series itself. Each
    coarser level keeps only coefficients whose filter window lies fully
    inside the previous level, so no sample padding of any kind occurs.
    If some octave <= j_max admits no valid coefficient the pyramid stops
    there and is marked truncated.
    """
    if j_max < 1:
        raise ValueError(f"j_max must be >= 1, got {j_max}")
    L = filter_pair.length
    if series.n < 2 * L:
        raise ValueError(
            f"series length {series.n} too short for filter length {L}; need at least {2 * L}"
        )
    octaves: dict[int, np.ndarray] = {}
    counts: dict[int, int] = {}
    approx = series.values
    truncated = False
    for j in range(1, j_max + 1):
        step = _analysis_step(approx, filter_pair.low_pass, filter_pair.high_pass)
        if step is None:
            truncated = True
            break
        approx, detail = step
        octaves[j] = detail
        counts[j] = detail.shape[1]
    return DetailPyramid(octaves=octaves, counts=counts, truncated=truncated)
