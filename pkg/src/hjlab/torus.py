"""Periodic fields on the flat torus [0, L)^2 and their spectral calculus.

Samples live at the nodes (i L/N, j L/N); axis 0 is x and axis 1 is y.
Derivatives are spectral (multiplication by 2 pi i k / L).  Odd derivative
multipliers drop the Nyquist mode so real fields stay real.  Integrals use
the rectangle rule, which is exact for trigonometric polynomials of degree
below N and spectrally accurate for smooth periodic integrands.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

__all__ = [
    "Field2D",
    "SpectralField",
    "NormReport",
    "SpectralOps",
    "ops_for",
    "transform",
    "inverse",
    "gradient",
    "laplacian",
    "hessian",
    "dealias",
    "dealiased_product",
    "lp_norm",
    "mean",
    "integral",
    "holder_quotient",
    "norm_report",
    "resample",
    "random_bandlimited",
]


def _check_resolution(n: int) -> None:
    if n < 8 or n & (n - 1):
        raise ValueError(f"grid resolution must be a power of two >= 8, got {n}")


@dataclass(frozen=True, eq=False)
class Field2D:
    """Real scalar field sampled on an N x N periodic grid of period L."""

    values: np.ndarray
    period: float = 1.0

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise ValueError(f"expected a square 2D array, got shape {values.shape}")
        _check_resolution(values.shape[0])
        if not np.all(np.isfinite(values)):
            raise ValueError("field samples must be finite")
        if not self.period > 0:
            raise ValueError("period must be positive")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "period", float(self.period))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def spacing(self) -> float:
        return self.period / self.n

    @classmethod
    def from_function(cls, fn: Callable, n: int, period: float = 1.0) -> "Field2D":
        x, y = grid_coordinates(n, period)
        return cls(np.broadcast_to(fn(x, y), (n, n)), period)

    @classmethod
    def constant(cls, c: float, n: int, period: float = 1.0) -> "Field2D":
        return cls(np.full((n, n), float(c)), period)

    @classmethod
    def zeros(cls, n: int, period: float = 1.0) -> "Field2D":
        return cls.constant(0.0, n, period)

    def compatible(self, other: "Field2D") -> bool:
        return self.n == other.n and self.period == other.period

    def _coerce(self, other):
        if isinstance(other, Field2D):
            if not self.compatible(other):
                raise ValueError("fields live on different grids")
            return other.values
        return other

    def __add__(self, other):
        return Field2D(self.values + self._coerce(other), self.period)

    __radd__ = __add__

    def __sub__(self, other):
        return Field2D(self.values - self._coerce(other), self.period)

    def __rsub__(self, other):
        return Field2D(self._coerce(other) - self.values, self.period)

    def __mul__(self, other):
        return Field2D(self.values * self._coerce(other), self.period)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return Field2D(self.values / self._coerce(other), self.period)

    def __neg__(self):
        return Field2D(-self.values, self.period)

    def __pow__(self, p):
        return Field2D(self.values**p, self.period)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))

    def __repr__(self):
        return f"Field2D(n={self.n}, period={self.period:g}, max|.|={self.max_abs():.3g})"


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Unnormalized 2D DFT coefficients; index (i, j) holds wavenumber fftfreq(i), fftfreq(j)."""

    coefficients: np.ndarray
    period: float = 1.0

    @property
    def n(self) -> int:
        return self.coefficients.shape[0]

    def wavenumbers(self):
        k = np.fft.fftfreq(self.n, 1.0 / self.n)
        return k[:, None], k[None, :]


@dataclass
class NormReport:
    lp: dict = field(default_factory=dict)
    w22: float = 0.0
    holder: dict = field(default_factory=dict)


def grid_coordinates(n: int, period: float = 1.0):
    s = np.arange(n) * (period / n)
    return s[:, None], s[None, :]


class SpectralOps:
    """Wavenumber tables and array-level spectral operators for one (n, period)."""

    def __init__(self, n: int, period: float = 1.0):
        _check_resolution(n)
        self.n = n
        self.period = float(period)
        scale = 2.0 * np.pi / self.period
        kx = np.fft.fftfreq(n, 1.0 / n)
        ky = np.fft.rfftfreq(n, 1.0 / n)
        self.kx_int = kx[:, None]
        self.ky_int = ky[None, :]
        kx_odd = kx.copy()
        kx_odd[n // 2] = 0.0
        ky_odd = ky.copy()
        ky_odd[-1] = 0.0
        self.ikx = 1j * scale * kx_odd[:, None]
        self.iky = 1j * scale * ky_odd[None, :]
        self.kx2 = (scale * kx[:, None]) ** 2
        self.ky2 = (scale * ky[None, :]) ** 2
        self.k2 = self.kx2 + self.ky2
        self.kmax_int = np.maximum(np.abs(self.kx_int), np.abs(self.ky_int))
        self.cell = (self.period / n) ** 2
        self.area = self.period**2

    def fft(self, a):
        return np.fft.rfft2(a)

    def ifft(self, ah):
        return np.fft.irfft2(ah, s=(self.n, self.n))

    def grad(self, a, ah=None):
        if ah is None:
            ah = self.fft(a)
        return self.ifft(self.ikx * ah), self.ifft(self.iky * ah)

    def lap(self, a, ah=None):
        if ah is None:
            ah = self.fft(a)
        return self.ifft(-self.k2 * ah)

    def hess(self, a, ah=None):
        if ah is None:
            ah = self.fft(a)
        return (
            self.ifft(-self.kx2 * ah),
            self.ifft(self.ikx * self.iky * ah),
            self.ifft(-self.ky2 * ah),
        )

    def div(self, ax, ay):
        return self.ifft(self.ikx * self.fft(ax) + self.iky * self.fft(ay))

    def helmholtz_inv(self, a, tau=1.0, shift=1.0):
        """Apply (shift - tau * Laplacian)^(-1)."""
        return self.ifft(self.fft(a) / (shift + tau * self.k2))

    def truncate(self, a, keep=None):
        if keep is None:
            keep = (self.n - 1) // 3
        ah = self.fft(a)
        ah[self.kmax_int > keep] = 0.0
        return self.ifft(ah)

    def integral(self, a) -> float:
        return float(np.sum(a) * self.cell)

    def mean(self, a) -> float:
        return float(np.mean(a))


@functools.lru_cache(maxsize=32)
def ops_for(n: int, period: float = 1.0) -> SpectralOps:
    return SpectralOps(n, float(period))


def _ops(f: Field2D) -> SpectralOps:
    return ops_for(f.n, f.period)


def transform(f: Field2D) -> SpectralField:
    return SpectralField(np.fft.fft2(f.values), f.period)


def inverse(spec: SpectralField) -> Field2D:
    _check_resolution(spec.n)
    return Field2D(np.fft.ifft2(spec.coefficients).real, spec.period)


def gradient(f: Field2D) -> tuple[Field2D, Field2D]:
    gx, gy = _ops(f).grad(f.values)
    return Field2D(gx, f.period), Field2D(gy, f.period)


def laplacian(f: Field2D) -> Field2D:
    return Field2D(_ops(f).lap(f.values), f.period)


def hessian(f: Field2D) -> tuple[Field2D, Field2D, Field2D]:
    """Return (u_xx, u_xy, u_yy)."""
    return tuple(Field2D(h, f.period) for h in _ops(f).hess(f.values))


def dealias(f: Field2D) -> Field2D:
    """2/3-rule truncation: keep modes with max(|kx|, |ky|) <= (N - 1) // 3."""
    return Field2D(_ops(f).truncate(f.values), f.period)


def dealiased_product(a: Field2D, b: Field2D) -> Field2D:
    """Pointwise product of the 2/3-truncated inputs.

    Any cubic expression in truncated fields has degree below N, so its
    rectangle-rule integral is exact.
    """
    if not a.compatible(b):
        raise ValueError("fields live on different grids")
    ops = _ops(a)
    return Field2D(ops.truncate(a.values) * ops.truncate(b.values), a.period)


def integral(f: Field2D) -> float:
    return _ops(f).integral(f.values)


def mean(f: Field2D) -> float:
    """Normalized (0, 0) spectral coefficient."""
    return float(np.fft.rfft2(f.values)[0, 0].real / f.n**2)


def lp_norm(f: Field2D, p: float) -> float:
    if p == np.inf:
        return f.max_abs()
    if p < 1:
        raise ValueError(f"L^p norms need p >= 1, got {p}")
    cell = f.spacing**2
    return float((np.sum(np.abs(f.values) ** p) * cell) ** (1.0 / p))


def _sample_pairs(n: int, pairs: int, seed: int):
    # Pairs are drawn in continuous coordinates and snapped to nodes, so the
    # same seed selects nearly the same geometric pairs at every resolution.
    rng = np.random.default_rng(seed)
    pts = rng.random((pairs, 4))
    idx = np.floor(pts * n).astype(np.int64) % n
    return idx[:, 0], idx[:, 1], idx[:, 2], idx[:, 3]


def _periodic_distance(i1, j1, i2, j2, n, period):
    di = np.abs(i1 - i2)
    dj = np.abs(j1 - j2)
    di = np.minimum(di, n - di)
    dj = np.minimum(dj, n - dj)
    return np.hypot(di, dj) * (period / n)


def holder_quotient(f: Field2D, beta: float, pairs: int = 100_000, seed: int = 0) -> float:
    """Max of |g(x) - g(y)| / d(x, y)^beta over seeded random node pairs."""
    if not 0 < beta <= 1:
        raise ValueError(f"Hölder exponent must lie in (0, 1], got {beta}")
    i1, j1, i2, j2 = _sample_pairs(f.n, pairs, seed)
    d = _periodic_distance(i1, j1, i2, j2, f.n, f.period)
    keep = d > 0
    if not np.any(keep):
        return 0.0
    g = f.values
    diff = np.abs(g[i1[keep], j1[keep]] - g[i2[keep], j2[keep]])
    return float(np.max(diff / d[keep] ** beta))


def norm_report(
    f: Field2D,
    exponents: Iterable[float] = (1, 2, 4),
    betas: Iterable[float] = (0.25, 0.5, 0.75),
    pairs: int = 100_000,
    seed: int = 0,
) -> NormReport:
    lp = {p: lp_norm(f, p) for p in sorted(set(exponents) | {1, 2, 4})}
    hxx, hxy, hyy = _ops(f).hess(f.values)
    w22 = float(np.sqrt(np.sum(hxx**2 + 2 * hxy**2 + hyy**2) * f.spacing**2))
    holder = {b: holder_quotient(f, b, pairs, seed) for b in betas}
    return NormReport(lp=lp, w22=w22, holder=holder)


def resample(f: Field2D, n: int) -> Field2D:
    """Trigonometric interpolation onto an n x n grid (exact for band-limited fields)."""
    _check_resolution(n)
    m = f.n
    if n == m:
        return f
    src = np.fft.fft2(f.values) / m**2
    k_src = np.fft.fftfreq(m, 1.0 / m).astype(int)
    dst = np.zeros((n, n), dtype=complex)
    half = min(m, n) // 2
    keep = np.abs(k_src) < half
    ks = k_src[keep]
    sub = src[np.ix_(keep, keep)]
    dst[np.ix_(ks % n, ks % n)] = sub
    return Field2D(np.fft.ifft2(dst).real * n**2, f.period)


def random_bandlimited(
    n: int,
    kmax: float,
    seed: int,
    period: float = 1.0,
    zero_mean: bool = True,
    decay: float = 0.0,
) -> Field2D:
    """Random real field with modes |k| <= kmax (Euclidean, integer wavenumbers).

    Coefficients are standard complex normals scaled by (1 + |k|)^(-decay).
    The result is not normalized.
    """
    rng = np.random.default_rng(seed)
    k = np.fft.fftfreq(n, 1.0 / n)
    kk = np.hypot(k[:, None], k[None, :])
    coef = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    coef *= (kk <= kmax) * (1.0 + kk) ** (-decay)
    if zero_mean:
        coef[0, 0] = 0.0
    values = np.fft.ifft2(coef).real * n**2 / n
    return Field2D(values, period)
