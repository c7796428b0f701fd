"""Symbols a(x, xi) and their quantization on the periodic lattice.

A symbol acts on a field through

    (A f)(x) = sum_xi a(x, xi) fhat(xi) exp(i x.xi).

Pure frequency multipliers and pure multiplication operators get exact fast
paths; separable symbols sum_t b_t(x) c_t(xi) cost one transform per term;
arbitrary symbols fall back to the direct quantization sum, which is kept as
the correctness oracle at small N.  Nyquist modes of the input are cleared on
every application (the asymmetric mode breaks reality symmetry under
differentiation).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import GridSpec, SpectralField
from .smooth import ramp_down

_LOG_DOUBLE_MAX = 700.0  # ln(1.8e308), overflow guard for |xi|^m


@dataclass(frozen=True)
class Symbol:
    """Symbol of declared order with one of several evaluation forms.

    kind:
      multiplier        a = c(xi),   xi_func(*xi_components)
      multiplication    a = b(x),    x_func(*x_components)
      separable         a = sum_t b_t(x) c_t(xi), terms = ((b, c), ...)
      matrix_multiplier matrix-valued c(xi), matrix_func(grid) -> (out, in, *shape)
      general           arbitrary a(x, xi), eval via eval_func(xs, xis)
    """

    order: float
    kind: str
    name: str = ""
    xi_func: object = None
    x_func: object = None
    terms: tuple = ()
    matrix_func: object = None
    eval_func: object = None

    def eval_xy(self, xs: tuple, xis: tuple) -> np.ndarray:
        """Evaluate a(x, xi) on mutually broadcastable coordinate arrays."""
        if self.kind == "multiplier":
            return np.asarray(self.xi_func(*xis)) + np.zeros(np.broadcast_shapes(
                *(np.shape(a) for a in xs + xis)))
        if self.kind == "multiplication":
            return np.asarray(self.x_func(*xs)) + np.zeros(np.broadcast_shapes(
                *(np.shape(a) for a in xs + xis)))
        if self.kind == "separable":
            out = None
            for bx, cxi in self.terms:
                term = np.asarray(bx(*xs)) * np.asarray(cxi(*xis))
                out = term if out is None else out + term
            return out
        if self.kind == "general":
            return np.asarray(self.eval_func(xs, xis))
        raise ValueError(f"eval_xy unsupported for kind {self.kind!r}")

    @property
    def is_multiplier(self) -> bool:
        return self.kind in ("multiplier", "matrix_multiplier")


def multiplier(order: float, xi_func, name: str = "") -> Symbol:
    return Symbol(order=order, kind="multiplier", name=name, xi_func=xi_func)


def multiplication(x_func, name: str = "") -> Symbol:
    return Symbol(order=0.0, kind="multiplication", name=name, x_func=x_func)


def multiplication_by_field(b: SpectralField, name: str = "") -> Symbol:
    if b.ncomp != 1:
        raise ValueError("multiplication symbol needs a scalar field")
    samples = b.physical[0]

    def x_func(*xs):
        if xs and np.shape(xs[0]) == samples.shape:
            return samples
        raise ValueError("field-backed multiplication only evaluates on its own grid")

    return Symbol(order=0.0, kind="multiplication", name=name, x_func=x_func)


def separable(order: float, terms, name: str = "") -> Symbol:
    terms = tuple(terms)
    if not 1 <= len(terms) <= 8:
        raise ValueError("separable symbols carry 1..8 terms")
    return Symbol(order=order, kind="separable", name=name, terms=terms)


def matrix_multiplier(order: float, matrix_func, name: str = "") -> Symbol:
    return Symbol(order=order, kind="matrix_multiplier", name=name, matrix_func=matrix_func)


def general(order: float, eval_func, name: str = "") -> Symbol:
    return Symbol(order=order, kind="general", name=name, eval_func=eval_func)


def zero_symbol(order: float = 0.0, name: str = "zero") -> Symbol:
    return multiplier(order, lambda *xis: np.zeros(np.broadcast_shapes(*(np.shape(a) for a in xis))), name)


def _check_finite(vals: np.ndarray, name: str) -> np.ndarray:
    if not np.all(np.isfinite(vals)):
        raise ValueError(f"symbol {name!r} overflows double range on this lattice")
    return vals


def _overflow_guard(sym: Symbol, grid: GridSpec) -> None:
    ximax = float(grid.xi_abs.max())
    if abs(sym.order) * math.log(1.0 + ximax) > _LOG_DOUBLE_MAX:
        raise ValueError(
            f"symbol order {sym.order} overflows double range at |xi|={ximax:.0f}"
        )


def apply(sym: Symbol, f: SpectralField) -> SpectralField:
    """Apply the operator with symbol `sym` to `f` (pure; Nyquist cleared)."""
    grid = f.grid
    _overflow_guard(sym, grid)
    f = f.without_nyquist()

    if sym.kind == "multiplier":
        vals = _check_finite(np.asarray(sym.xi_func(*grid.xi_axes)), sym.name)
        vals = np.broadcast_to(vals, grid.shape)
        return SpectralField(grid, freq=f.coefficients * vals)

    if sym.kind == "multiplication":
        b = np.broadcast_to(np.asarray(sym.x_func(*grid.x_axes)), grid.shape)
        return SpectralField(grid, phys=f.physical * b)

    if sym.kind == "separable":
        c = f.coefficients
        spatial = tuple(range(1, grid.dim + 1))
        out = np.zeros_like(c)
        for bx, cxi in sym.terms:
            cv = _check_finite(np.asarray(cxi(*grid.xi_axes)), sym.name)
            part = np.fft.ifftn(c * cv, axes=spatial) * grid.npoints
            bv = np.broadcast_to(np.asarray(bx(*grid.x_axes)), grid.shape)
            out += part * bv
        return SpectralField(grid, phys=out)

    if sym.kind == "matrix_multiplier":
        mat = _check_finite(np.asarray(sym.matrix_func(grid)), sym.name)
        n_out, n_in = mat.shape[0], mat.shape[1]
        if f.ncomp != n_in:
            raise ValueError(f"symbol {sym.name!r} expects {n_in} components, got {f.ncomp}")
        c = f.coefficients
        out = np.einsum("oi...,i...->o...", mat, c)
        return SpectralField(grid, freq=out)

    if sym.kind == "general":
        return quantize_direct(sym, f)

    raise ValueError(f"unknown symbol kind {sym.kind!r}")


def quantize_direct(sym: Symbol, f: SpectralField, target_bytes: int = 1 << 27) -> SpectralField:
    """Direct quantization sum over the lattice: the O(N^2n) oracle path.

    Produces the same result as any fast path (same math, different
    association), so it can certify multiplier / separable applications.
    """
    grid = f.grid
    _overflow_guard(sym, grid)
    f = f.without_nyquist()
    M = grid.npoints
    dim = grid.dim

    xi_flat = [np.broadcast_to(a, grid.shape).ravel() for a in grid.xi_axes]
    x_flat = [np.broadcast_to(a, grid.shape).ravel() for a in grid.x_axes]
    chat = f.coefficients.reshape(f.ncomp, M)

    chunk = max(1, min(M, target_bytes // (16 * M)))
    out = np.zeros((f.ncomp, M), dtype=np.complex128)
    xs = tuple(x[:, None] for x in x_flat)
    for start in range(0, M, chunk):
        sl = slice(start, start + chunk)
        xis = tuple(x[None, sl] for x in xi_flat)
        phase = np.zeros((M, len(range(*sl.indices(M)))), dtype=np.float64)
        for xc, kc in zip(xs, xis):
            phase = phase + xc * kc
        kernel = sym.eval_xy(xs, xis) * np.exp(1j * phase)
        _check_finite(kernel, sym.name)
        out += np.einsum("xk,ck->cx", kernel, chat[:, sl])
    return SpectralField(grid, phys=out.reshape((f.ncomp,) + grid.shape))


# -- built-in symbols -----------------------------------------------------


def _abs_xi(*xis):
    out = None
    for a in xis:
        out = a * a if out is None else out + a * a
    return np.sqrt(out)


def laplacian_symbol() -> Symbol:
    return multiplier(2.0, lambda *xis: -(_abs_xi(*xis) ** 2), "laplacian")


def bilaplacian_symbol() -> Symbol:
    return multiplier(4.0, lambda *xis: _abs_xi(*xis) ** 4, "bilaplacian")


def fractional_laplacian_symbol(s: float) -> Symbol:
    return multiplier(2.0 * s, lambda *xis: _abs_xi(*xis) ** (2.0 * s), f"fractional_laplacian:{s}")


def grad_symbol(axis: int) -> Symbol:
    return multiplier(1.0, lambda *xis: 1j * xis[axis], f"grad:{axis}")


def divergence_symbol() -> Symbol:
    def matrix_func(grid: GridSpec):
        rows = [np.broadcast_to(1j * a, grid.shape) for a in grid.xi_axes]
        return np.stack(rows)[np.newaxis, ...]  # (1, n, *shape)

    return matrix_multiplier(1.0, matrix_func, "div")


def leray_projector(grid: GridSpec = None) -> Symbol:
    """Order-0 matrix multiplier projecting onto divergence-free fields.

    I - xi xi^T / |xi|^2 away from the origin, identity at xi = 0 (the mean
    flow is already divergence free).  Needs dim >= 2.
    """

    def matrix_func(g: GridSpec):
        if g.dim < 2:
            raise ValueError("divergence-free projection needs dim >= 2")
        n = g.dim
        denom = np.where(g.xi_abs2 > 0, g.xi_abs2, 1.0)
        mat = np.zeros((n, n) + g.shape)
        for c in range(n):
            for d in range(n):
                mat[c, d] = (1.0 if c == d else 0.0) - np.broadcast_to(
                    g.xi_axes[c] * g.xi_axes[d], g.shape
                ) / denom
        return mat

    return matrix_multiplier(0.0, matrix_func, "leray")


# -- registry -------------------------------------------------------------

_SEP_X = {
    "one": lambda _arg: (lambda *xs: np.ones(np.broadcast_shapes(*(np.shape(a) for a in xs)))),
    "cos": lambda arg: (lambda *xs: np.cos(xs[int(arg)])),
    "sin": lambda arg: (lambda *xs: np.sin(xs[int(arg)])),
    "twoplussin": lambda arg: (lambda *xs: 2.0 + np.sin(xs[int(arg)])),
    "bump": lambda arg: (lambda *xs: _center_bump(float(arg), *xs)),
}


def _center_bump(radius, *xs):
    d2 = None
    for x in xs:
        w = np.mod(np.asarray(x) - np.pi + np.pi, 2.0 * np.pi) - np.pi
        d2 = w * w if d2 is None else d2 + w * w
    return ramp_down(np.sqrt(d2), radius, 2.0 * radius)


def _sep_xi(spec: str):
    if spec == "one":
        return 0.0, lambda *xis: np.ones(np.broadcast_shapes(*(np.shape(a) for a in xis)))
    head, _, arg = spec.partition(":")
    if head == "pow":
        m = float(arg)
        return m, lambda *xis: (1.0 + _abs_xi(*xis) ** 2) ** (m / 2.0)
    if head == "abspow":
        m = float(arg)
        return m, lambda *xis: _abs_xi(*xis) ** m
    if head == "ixi":
        return 1.0, lambda *xis, _a=int(arg): 1j * xis[_a]
    raise ValueError(f"unknown frequency part {spec!r} in separable symbol")


def _parse_separable(body: str) -> Symbol:
    """Grammar: term(+term)*, term = <xpart>*<xipart>.

    xpart:  one | cos:<axis> | sin:<axis> | twoplussin:<axis> | bump:<radius>
    xipart: one | pow:<m> | abspow:<m> | ixi:<axis>
    Example: "sep:twoplussin:0*pow:2" is (2+sin x_0)(1+|xi|^2).
    """
    terms = []
    order = 0.0
    for raw in body.split("+"):
        xpart, _, xipart = raw.partition("*")
        if not xipart:
            raise ValueError(f"separable term {raw!r} needs <xpart>*<xipart>")
        xhead, _, xarg = xpart.partition(":")
        if xhead not in _SEP_X:
            raise ValueError(f"unknown spatial part {xpart!r} in separable symbol")
        bx = _SEP_X[xhead](xarg)
        m, cxi = _sep_xi(xipart)
        order = max(order, m)
        terms.append((bx, cxi))
    return separable(order, terms, name=f"sep:{body}")


def resolve_symbol(name: str) -> Symbol:
    """Look up a registry symbol by CLI name."""
    if name == "laplacian":
        return laplacian_symbol()
    if name == "bilaplacian":
        return bilaplacian_symbol()
    if name == "div":
        return divergence_symbol()
    if name == "leray":
        return leray_projector()
    head, _, arg = name.partition(":")
    if head == "fractional_laplacian":
        return fractional_laplacian_symbol(float(arg))
    if head == "grad":
        return grad_symbol(int(arg))
    if head == "sep":
        return _parse_separable(arg)
    raise KeyError(f"unknown symbol name {name!r}")
