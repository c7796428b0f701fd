import numpy as np
import pytest

from lpw.grid import GridSpec, SpectralField, lp_norm, random_field
from lpw.symbols import (apply, divergence_symbol, grad_symbol, leray_projector,
                         multiplication, multiplier, quantize_direct, resolve_symbol,
                         separable)

from test_grid import mode


class TestApplyPaths:
    def test_multiplier_on_pure_mode(self, grid2):
        neg_lap = multiplier(2.0, lambda *xis: sum(np.asarray(a) ** 2 for a in xis))
        f = mode(grid2, (3, -4))
        out = apply(neg_lap, f)
        assert lp_norm(out - 25.0 * f, 2) <= 1e-12 * 25.0

    def test_multiplication_is_pointwise(self, grid2):
        b = multiplication(lambda *xs: np.cos(xs[0]) + 2.0)
        f = random_field(grid2, 3, band=20)
        out = apply(b, f)
        expect = f.physical * (np.cos(np.broadcast_to(grid2.x_axes[0], grid2.shape)) + 2.0)
        assert np.abs(out.physical - expect).max() <= 1e-13

    def test_separable_matches_direct(self):
        g = GridSpec(1, 64)
        sep = resolve_symbol("sep:cos:0*abspow:1")  # cos(x)|xi|
        f = random_field(g, 5, band=24)
        fast = apply(sep, f)
        direct = quantize_direct(sep, f)
        assert lp_norm(fast - direct, 2) <= 1e-12 * lp_norm(f, 2)

    def test_multiplier_matches_direct(self):
        g = GridSpec(1, 32)
        A = resolve_symbol("fractional_laplacian:0.75")
        f = random_field(g, 6)
        assert lp_norm(apply(A, f) - quantize_direct(A, f), 2) <= 1e-12 * lp_norm(f, 2)

    def test_linearity(self, grid2):
        A = resolve_symbol("sep:twoplussin:0*pow:1")
        f = random_field(grid2, 7, band=16)
        g = random_field(grid2, 8, band=16)
        lhs = apply(A, f + 2.0 * g)
        rhs = apply(A, f) + 2.0 * apply(A, g)
        assert lp_norm(lhs - rhs, 2) <= 1e-12 * lp_norm(lhs, 2)

    def test_nyquist_cleared(self):
        g = GridSpec(1, 32)
        c = np.zeros(g.shape, dtype=complex)
        c[16] = 1.0  # the -N/2 mode
        f = SpectralField(g, freq=c)
        out = apply(multiplier(0.0, lambda *xis: np.ones_like(xis[0])), f)
        assert lp_norm(out, 2) == 0.0

    def test_order_overflow(self):
        g = GridSpec(1, 64)
        A = multiplier(250.0, lambda *xis: np.abs(xis[0]) ** 250.0)
        with pytest.raises(ValueError):
            apply(A, random_field(g, 1))

    def test_declared_order_bound(self, grid1):
        # sampled |a| / (1+|xi|)^m stays bounded for the registry symbols
        for name in ("laplacian", "bilaplacian", "fractional_laplacian:0.75",
                     "grad:0", "sep:twoplussin:0*pow:2"):
            A = resolve_symbol(name)
            if A.kind == "multiplier":
                vals = np.abs(np.asarray(A.xi_func(*grid1.xi_axes)))
            else:
                vals = np.abs(A.eval_xy((grid1.x_axes[0],), grid1.xi_axes))
            ratio = vals / (1.0 + grid1.xi_abs) ** A.order
            assert ratio.max() <= 4.0


class TestMatrixSymbols:
    def test_divergence_of_gradient_is_laplacian(self, grid2):
        f = random_field(grid2, 9, band=16)
        grad = np.stack([apply(grad_symbol(c), f).coefficients[0] for c in range(2)])
        gf = SpectralField(grid2, freq=grad)
        div = apply(divergence_symbol(), gf)
        lap = apply(multiplier(2.0, lambda *xis: -sum(np.asarray(a) ** 2 for a in xis)), f)
        assert lp_norm(div - lap, 2) <= 1e-12 * lp_norm(lap, 2)

    def test_component_mismatch(self, grid2):
        with pytest.raises(ValueError):
            apply(divergence_symbol(), random_field(grid2, 1, ncomp=3))


class TestLeray:
    def test_kills_gradients(self, grid2):
        g = random_field(grid2, 10)  # mean zero
        gradf = SpectralField(grid2, freq=np.stack(
            [apply(grad_symbol(c), g).coefficients[0] for c in range(2)]))
        out = apply(leray_projector(), gradf)
        assert lp_norm(out, 2) <= 1e-12 * lp_norm(gradf, 2)

    def test_fixes_divergence_free(self, grid2):
        u = random_field(grid2, 11, ncomp=2)
        P = leray_projector()
        df = apply(P, u)
        again = apply(P, df)
        assert lp_norm(again - df, 2) <= 1e-12 * lp_norm(df, 2)
        div = apply(divergence_symbol(), df)
        assert lp_norm(div, 2) <= 1e-11 * lp_norm(df, 2)

    def test_symmetry(self, grid2):
        mat = leray_projector().matrix_func(grid2)
        assert np.abs(mat - np.swapaxes(mat, 0, 1)).max() <= 1e-14

    def test_needs_two_dims(self):
        g = GridSpec(1, 32)
        with pytest.raises(ValueError):
            apply(leray_projector(), random_field(g, 1))


class TestRegistry:
    def test_known_names(self):
        for name in ("laplacian", "bilaplacian", "div", "leray",
                     "fractional_laplacian:1.5", "grad:1",
                     "sep:one*pow:1", "sep:cos:0*abspow:1+sin:0*one"):
            assert resolve_symbol(name) is not None

    def test_orders(self):
        assert resolve_symbol("laplacian").order == 2.0
        assert resolve_symbol("bilaplacian").order == 4.0
        assert resolve_symbol("fractional_laplacian:1.5").order == 3.0
        assert resolve_symbol("sep:one*pow:2+one*abspow:1").order == 2.0

    def test_unknown_rejected(self):
        with pytest.raises(KeyError):
            resolve_symbol("heat_kernel")
        with pytest.raises(ValueError):
            resolve_symbol("sep:cos:0")  # missing frequency part
        with pytest.raises(ValueError):
            resolve_symbol("sep:tan:0*pow:1")

    def test_separable_term_budget(self):
        terms = [(lambda *xs: np.ones(np.shape(xs[0])),
                  lambda *xis: np.ones(np.shape(xis[0])))] * 9
        with pytest.raises(ValueError):
            separable(0.0, terms)
