"""Periodic grid, transforms, norms, and dealiased products.

Conventions (used consistently by every module):

* Domain is the torus [0, 2pi)^n sampled at x_i = 2*pi*i/N per axis.
* Frequencies are the integer lattice in numpy FFT layout,
  xi_axis in {0, 1, ..., N/2-1, -N/2, ..., -1}.
* Coefficients are true Fourier coefficients, c_xi = fftn(f) / N^n, so that
  f(x) = sum_xi c_xi exp(i x.xi).
* L^p norms are taken with respect to the normalized (probability) measure on
  the torus: ||f||_p = (mean |f|^p)^(1/p).  With this pairing Parseval is
  exact: ||f||_2 equals the plain l^2 norm of the coefficients.
* Fields may be vector valued; arrays carry a leading component axis.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from . import rng

_FILE_MAGIC = b"LPWFIELD"
_FILE_VERSION = 1


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic grid on [0, 2pi)^dim with N points per axis.

    N must be a power of two, N >= 16.  dim up to 4 is accepted; 4 exists only
    for the full-dimension flow probe and is slow.
    """

    dim: int
    points_per_axis: int

    def __post_init__(self):
        n, N = self.dim, self.points_per_axis
        if n not in (1, 2, 3, 4):
            raise ValueError(f"dim must be in 1..4, got {n}")
        if N < 16 or (N & (N - 1)) != 0:
            raise ValueError(f"points_per_axis must be a power of two >= 16, got {N}")

    @property
    def shape(self) -> tuple:
        return (self.points_per_axis,) * self.dim

    @property
    def npoints(self) -> int:
        return self.points_per_axis**self.dim

    @property
    def jmax(self) -> int:
        """Largest dyadic shell index: largest j with 2^j <= N/2."""
        return int(math.log2(self.points_per_axis)) - 1

    @cached_property
    def xi_axes(self) -> tuple:
        """Integer frequency values along each axis, broadcastable to shape."""
        N = self.points_per_axis
        base = np.fft.fftfreq(N, d=1.0 / N)  # 0..N/2-1, -N/2..-1 as floats
        axes = []
        for ax in range(self.dim):
            sh = [1] * self.dim
            sh[ax] = N
            axes.append(base.reshape(sh))
        return tuple(axes)

    @cached_property
    def xi_abs2(self) -> np.ndarray:
        out = np.zeros(self.shape)
        for a in self.xi_axes:
            out = out + a * a
        return out

    @cached_property
    def xi_abs(self) -> np.ndarray:
        return np.sqrt(self.xi_abs2)

    @cached_property
    def nyquist_mask(self) -> np.ndarray:
        """True at lattice points having any axis frequency equal to -N/2."""
        ny = -(self.points_per_axis // 2)
        mask = np.zeros(self.shape, dtype=bool)
        for a in self.xi_axes:
            mask |= a == ny
        return mask

    @cached_property
    def x_axes(self) -> tuple:
        """Physical coordinates along each axis, broadcastable to shape."""
        N = self.points_per_axis
        base = 2.0 * np.pi * np.arange(N) / N
        axes = []
        for ax in range(self.dim):
            sh = [1] * self.dim
            sh[ax] = N
            axes.append(base.reshape(sh))
        return tuple(axes)

    @cached_property
    def center_distance(self) -> np.ndarray:
        """Geodesic distance to the cell center pi*(1,..,1).

        Spatial bumps are centered there so their supports never wrap.
        """
        out = np.zeros(self.shape)
        for x in self.x_axes:
            d = np.mod(x - np.pi + np.pi, 2.0 * np.pi) - np.pi
            out = out + d * d
        return np.sqrt(out)


class SpectralField:
    """Complex field on a GridSpec with lazily synced dual representations.

    Arrays have shape (ncomp, *grid.shape).  Fields are immutable by
    convention: operations return fresh instances and never write into the
    arrays of their inputs.  Representation sync is cached on first use.
    """

    __slots__ = ("grid", "ncomp", "_phys", "_freq")

    def __init__(self, grid: GridSpec, phys=None, freq=None):
        if phys is None and freq is None:
            raise ValueError("need at least one representation")
        self.grid = grid
        self._phys = None if phys is None else self._check(grid, phys)
        self._freq = None if freq is None else self._check(grid, freq)
        self.ncomp = (self._phys if self._phys is not None else self._freq).shape[0]
        if self._phys is not None and self._freq is not None:
            if self._phys.shape != self._freq.shape:
                raise ValueError("representation shapes disagree")

    @staticmethod
    def _check(grid, arr) -> np.ndarray:
        arr = np.asarray(arr, dtype=np.complex128)
        if arr.shape == grid.shape:
            arr = arr[np.newaxis, ...]
        if arr.shape[1:] != grid.shape or arr.ndim != grid.dim + 1:
            raise ValueError(f"array shape {arr.shape} does not match grid {grid.shape}")
        return arr

    @classmethod
    def from_physical(cls, grid: GridSpec, values) -> "SpectralField":
        return cls(grid, phys=values)

    @classmethod
    def from_coefficients(cls, grid: GridSpec, coeffs) -> "SpectralField":
        return cls(grid, freq=coeffs)

    @classmethod
    def zeros(cls, grid: GridSpec, ncomp: int = 1) -> "SpectralField":
        return cls(grid, freq=np.zeros((ncomp,) + grid.shape, dtype=np.complex128))

    @property
    def spatial_axes(self) -> tuple:
        return tuple(range(1, self.grid.dim + 1))

    @property
    def physical(self) -> np.ndarray:
        if self._phys is None:
            self._phys = np.fft.ifftn(self._freq, axes=self.spatial_axes) * self.grid.npoints
        return self._phys

    @property
    def coefficients(self) -> np.ndarray:
        if self._freq is None:
            self._freq = np.fft.fftn(self._phys, axes=self.spatial_axes) / self.grid.npoints
        return self._freq

    @property
    def has_physical(self) -> bool:
        return self._phys is not None

    @property
    def has_coefficients(self) -> bool:
        return self._freq is not None

    def component(self, c: int) -> "SpectralField":
        return SpectralField(
            self.grid,
            phys=None if self._phys is None else self._phys[c : c + 1],
            freq=None if self._freq is None else self._freq[c : c + 1],
        )

    def modulus(self) -> np.ndarray:
        """Pointwise Euclidean modulus over components (real array)."""
        p = self.physical
        if self.ncomp == 1:
            return np.abs(p[0])
        return np.sqrt(np.sum(np.abs(p) ** 2, axis=0))

    def mean(self) -> np.ndarray:
        return self.coefficients[(slice(None),) + (0,) * self.grid.dim].copy()

    def without_mean(self) -> "SpectralField":
        c = self.coefficients.copy()
        c[(slice(None),) + (0,) * self.grid.dim] = 0.0
        return SpectralField(self.grid, freq=c)

    def without_nyquist(self) -> "SpectralField":
        c = self.coefficients.copy()
        c[:, self.grid.nyquist_mask] = 0.0
        return SpectralField(self.grid, freq=c)

    # -- arithmetic -----------------------------------------------------

    def _binary(self, other, op):
        if not isinstance(other, SpectralField):
            return NotImplemented
        if other.grid != self.grid:
            raise ValueError("grid mismatch")
        if self.ncomp != other.ncomp:
            raise ValueError("component mismatch")
        if self._freq is not None and other._freq is not None:
            return SpectralField(self.grid, freq=op(self._freq, other._freq))
        if self._phys is not None and other._phys is not None:
            return SpectralField(self.grid, phys=op(self._phys, other._phys))
        return SpectralField(self.grid, freq=op(self.coefficients, other.coefficients))

    def __add__(self, other):
        return self._binary(other, np.add)

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __mul__(self, scalar):
        if isinstance(scalar, SpectralField):
            raise TypeError("use pointwise_product / grid_product for field products")
        if self._freq is not None:
            return SpectralField(self.grid, freq=self._freq * scalar)
        return SpectralField(self.grid, phys=self._phys * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return self * (-1.0)

    def representation_error(self) -> float:
        """Relative disagreement between the two representations, if both exist."""
        if self._phys is None or self._freq is None:
            return 0.0
        back = np.fft.fftn(self._phys, axes=self.spatial_axes) / self.grid.npoints
        num = np.linalg.norm((back - self._freq).ravel())
        den = np.linalg.norm(self._freq.ravel())
        return float(num / den) if den > 0 else float(num)


# -- transforms ---------------------------------------------------------


def forward_transform(f: SpectralField) -> SpectralField:
    """Return a field carrying the frequency representation of `f`.

    Parseval-exact: the l^2 norm of the coefficients equals lp_norm(f, 2).
    """
    return SpectralField(f.grid, phys=f._phys, freq=f.coefficients)


def inverse_transform(f: SpectralField) -> SpectralField:
    """Return a field carrying the physical representation of `f`."""
    return SpectralField(f.grid, phys=f.physical, freq=f._freq)


# -- norms --------------------------------------------------------------


def lp_norm(f: SpectralField, p) -> float:
    """L^p norm with normalized measure; p = inf gives the max modulus.

    p < 1 is rejected.
    """
    if p != math.inf and p < 1:
        raise ValueError(f"p must be >= 1 or inf, got {p}")
    mod = f.modulus()
    if p == math.inf:
        return float(np.max(mod))
    if p == 2:
        return float(np.sqrt(np.mean(mod * mod)))
    return float(np.mean(mod**p) ** (1.0 / p))


# -- products -----------------------------------------------------------


def _pad_factor(degree: int) -> float:
    # 3/2 zero padding is exact for quadratic products on the retained
    # lattice; degree-3 products need padding to 2N.
    if degree == 2:
        return 1.5
    if degree == 3:
        return 2.0
    raise ValueError(f"degree must be 2 or 3, got {degree}")


def _embed(coeffs: np.ndarray, N: int, M: int, dim: int) -> np.ndarray:
    spatial = tuple(range(1, dim + 1))
    shifted = np.fft.fftshift(coeffs, axes=spatial)
    out = np.zeros((coeffs.shape[0],) + (M,) * dim, dtype=np.complex128)
    lo, hi = M // 2 - N // 2, M // 2 + N // 2
    out[(slice(None),) + (slice(lo, hi),) * dim] = shifted
    return np.fft.ifftshift(out, axes=spatial)


def _extract(coeffs: np.ndarray, N: int, M: int, dim: int) -> np.ndarray:
    spatial = tuple(range(1, dim + 1))
    shifted = np.fft.fftshift(coeffs, axes=spatial)
    lo, hi = M // 2 - N // 2, M // 2 + N // 2
    inner = shifted[(slice(None),) + (slice(lo, hi),) * dim]
    return np.fft.ifftshift(inner, axes=spatial)


def padded_physical(f: SpectralField, degree: int = 2) -> np.ndarray:
    """Physical samples of `f` on the dealiasing fine grid (M points/axis)."""
    N = f.grid.points_per_axis
    M = int(N * _pad_factor(degree))
    spatial = tuple(range(1, f.grid.dim + 1))
    big = _embed(f.coefficients, N, M, f.grid.dim)
    return np.fft.ifftn(big, axes=spatial) * (M**f.grid.dim)


def field_from_padded(grid: GridSpec, fine: np.ndarray, degree: int = 2) -> SpectralField:
    """Truncate fine-grid physical samples back to coefficients on `grid`."""
    N = grid.points_per_axis
    M = int(N * _pad_factor(degree))
    spatial = tuple(range(1, grid.dim + 1))
    ch = np.fft.fftn(fine, axes=spatial) / (M**grid.dim)
    return SpectralField(grid, freq=_extract(ch, N, M, grid.dim))


def _broadcast_pair(f: SpectralField, g: SpectralField):
    if f.grid != g.grid:
        raise ValueError("grid mismatch")
    if f.ncomp == g.ncomp:
        return f, g
    if f.ncomp == 1:
        return f, g
    if g.ncomp == 1:
        return f, g
    raise ValueError(f"cannot combine {f.ncomp} and {g.ncomp} components")


def pointwise_product(f: SpectralField, g: SpectralField, degree: int = 2) -> SpectralField:
    """Dealiased pointwise product (componentwise, scalars broadcast).

    `degree` is the total polynomial degree of the expression the product
    participates in: 2 selects 3/2-padding (exact quadratics), 3 selects
    2x padding (exact cubics).  Every retained coefficient equals the true
    convolution of the inputs, so the frequency support is contained in the
    Minkowski sum of the input supports within the resolvable band.
    """
    f, g = _broadcast_pair(f, g)
    pf = padded_physical(f, degree)
    pg = padded_physical(g, degree)
    return field_from_padded(f.grid, pf * pg, degree)


def dot_product(f: SpectralField, g: SpectralField, degree: int = 2) -> SpectralField:
    """Dealiased pointwise dot product sum_c f_c * g_c (scalar output)."""
    if f.grid != g.grid:
        raise ValueError("grid mismatch")
    if f.ncomp != g.ncomp:
        raise ValueError("component mismatch for dot product")
    pf = padded_physical(f, degree)
    pg = padded_physical(g, degree)
    fine = np.sum(pf * pg, axis=0, keepdims=True)
    return field_from_padded(f.grid, fine, degree)


def grid_product(f: SpectralField, g: SpectralField) -> SpectralField:
    """Raw (non-dealiased) grid product: the multiplication *operator*.

    This is the exact action of multiplication by g on grid samples;
    localization cutoffs use it so that supports stay pointwise exact.
    """
    f, g = _broadcast_pair(f, g)
    return SpectralField(f.grid, phys=f.physical * g.physical)


# -- random fields ------------------------------------------------------


def random_field(
    grid: GridSpec,
    seed: int,
    ncomp: int = 1,
    band: float | None = None,
    radial_profile=None,
    mean_zero: bool = True,
) -> SpectralField:
    """Seeded random field, reproducible irrespective of chunking.

    Coefficients are drawn by the counter-based generator in `lpw.rng` in
    row-major lattice order (component-major), optionally multiplied by a
    radial profile(|xi|) and restricted to |xi| <= band.  Nyquist modes are
    always cleared.
    """
    M = grid.npoints
    c = rng.complex_samples(seed, ncomp * M).reshape((ncomp,) + grid.shape)
    if radial_profile is not None:
        c = c * radial_profile(grid.xi_abs)
    if band is not None:
        c = np.where(grid.xi_abs <= band, c, 0.0)
    c[:, grid.nyquist_mask] = 0.0
    fld = SpectralField(grid, freq=c)
    if mean_zero:
        fld = fld.without_mean()
    return fld


# -- binary field files -------------------------------------------------


def write_field(path, f: SpectralField) -> None:
    """Write the binary field file plus its JSON sidecar.

    Layout: 16-byte header (8-byte magic, u32 version, 4 pad bytes), then
    little-endian u32 dim, u32 N, u32 components, then float64 (re, im)
    pairs in row-major physical order, component-major.
    """
    path = Path(path)
    g = f.grid
    header = _FILE_MAGIC + struct.pack("<I", _FILE_VERSION) + b"\x00" * 4
    meta = struct.pack("<III", g.dim, g.points_per_axis, f.ncomp)
    data = np.ascontiguousarray(f.physical, dtype=np.complex128)
    pairs = data.view(np.float64)
    if pairs.dtype.byteorder not in ("<", "="):  # pragma: no cover
        pairs = pairs.astype("<f8")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(meta)
        fh.write(pairs.tobytes())
    sidecar = {
        "dim": g.dim,
        "points_per_axis": g.points_per_axis,
        "components": f.ncomp,
        "domain": "torus [0,2pi)^n",
        "layout": "row-major physical order, little-endian float64 re/im pairs",
        "version": _FILE_VERSION,
    }
    Path(str(path) + ".json").write_text(json.dumps(sidecar, sort_keys=True) + "\n")


def read_field(path) -> SpectralField:
    raw = Path(path).read_bytes()
    if raw[:8] != _FILE_MAGIC:
        raise ValueError("not a field file (bad magic)")
    (version,) = struct.unpack("<I", raw[8:12])
    if version != _FILE_VERSION:
        raise ValueError(f"unsupported field file version {version}")
    dim, N, ncomp = struct.unpack("<III", raw[16:28])
    grid = GridSpec(dim, N)
    count = ncomp * grid.npoints
    flat = np.frombuffer(raw, dtype="<f8", offset=28, count=2 * count)
    vals = flat[0::2] + 1j * flat[1::2]
    return SpectralField(grid, phys=vals.reshape((ncomp,) + grid.shape))
