"""End-to-end regularity probe.

Manufactures a small-data solution of a model equation L u + P(V(u) Q u) = f
on the torus, localizes it with a smooth cutoff, pushes it through the
parametrix pipeline, measures the dyadic decay sequence a_k = 2^(sigma k)
||P_k u||_r, and compares the fitted decay gain against the closed-form
theoretical gain.

Manufactured solutions are smooth, so their measured gain exceeds any finite
theoretical gain; the probe checks the machinery end to end, not the sharp
rough-data statement (no rough exact solutions exist at desk scale).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .exponents import GainReport, RegularityParams, check_params, compute_gains
from .grid import (GridSpec, SpectralField, dot_product, grid_product, lp_norm,
                   pointwise_product, random_field)
from .iteration import (DecaySequence, IterationParams, convolution_majorant,
                        decay_bound, delta_cap, hypothesis_holds)
from .lp import LPPartition, build_partition, dyadic_norm_sequence, sobolev_norm
from .paraproduct import zone_estimate_report
from .psido import fit_log2_slope, parametrix, split_elliptic
from .smooth import ramp_down
from . import symbols as sym
from .symbols import Symbol, apply


# -- equations ---------------------------------------------------------------


def _grad_vector(n: int) -> Symbol:
    def matrix_func(grid: GridSpec):
        cols = [np.broadcast_to(1j * a, grid.shape) for a in grid.xi_axes]
        return np.stack(cols)[:, np.newaxis, ...]  # (n, 1, *shape)

    return sym.matrix_multiplier(1.0, matrix_func, "grad_vector")


@dataclass
class EquationSpec:
    """A model equation with its exponent data and nonlinearity structure.

    `nonlinearity(V, u)` evaluates P(V Q u); `coefficient(u)` produces the
    field V(u) occupying the rough-coefficient slot.  `zone_cases` lists the
    (V, scalar u, Q) triples the paraproduct analysis runs on.
    """

    kind: str
    params: RegularityParams
    ncomp: int
    amplitude: float
    L: Symbol
    P: Symbol
    Q: Symbol
    coefficient: object
    nonlinearity: object
    zone_cases: object
    forcing_projector: object = None


def _ns_spec(n: int, s: float, p: float, amplitude: float) -> EquationSpec:
    L = sym.multiplier(2.0, lambda *xis: sum(np.asarray(a) ** 2 for a in xis),
                       "neg_laplacian")
    P = sym.leray_projector()
    gradv = _grad_vector(n)

    def nonlinearity(V: SpectralField, u: SpectralField) -> SpectralField:
        comps = [dot_product(V, apply(gradv, u.component(c))).coefficients[0]
                 for c in range(u.ncomp)]
        adv = SpectralField(u.grid, freq=np.stack(comps))
        return apply(P, adv)

    def zone_cases(V: SpectralField, u: SpectralField):
        return [("advection:0", V, u.component(0), gradv)]

    return EquationSpec(
        kind="stationary-navier-stokes",
        params=RegularityParams(n=n, alpha=2.0, beta=0.0, gamma=1.0, s=s, p=p),
        ncomp=n, amplitude=amplitude, L=L, P=P, Q=gradv,
        coefficient=lambda u: u,
        nonlinearity=nonlinearity,
        zone_cases=zone_cases,
        forcing_projector=lambda f: apply(P, f),
    )


def _biharmonic_spec(n: int, s: float, p: float, amplitude: float) -> EquationSpec:
    L = sym.bilaplacian_symbol()
    P = sym.multiplier(2.0, lambda *xis: (1j * xis[0]) ** 2, "d11")
    Q = sym.grad_symbol(0)

    def nonlinearity(V: SpectralField, u: SpectralField) -> SpectralField:
        return apply(P, pointwise_product(V, apply(Q, u)))

    def zone_cases(V: SpectralField, u: SpectralField):
        return [("gradient-square", V, u, Q)]

    return EquationSpec(
        kind="biharmonic4d-toy",
        params=RegularityParams(n=n, alpha=4.0, beta=2.0, gamma=1.0, s=s, p=p),
        ncomp=1, amplitude=amplitude, L=L, P=P, Q=Q,
        coefficient=lambda u: apply(Q, u),
        nonlinearity=nonlinearity,
        zone_cases=zone_cases,
    )


def _gjms_spec(n: int, s: float, p: float, amplitude: float) -> EquationSpec:
    # leading part |xi|^n; conformal-power coefficient reduced to the first
    # integer power when (n-2)/3 is fractional
    L = sym.multiplier(float(n), lambda *xis: sum(np.asarray(a) ** 2 for a in xis) ** (n / 2.0),
                       "halfpower_laplacian")
    P = sym.divergence_symbol()
    gradv = _grad_vector(n)
    lam3 = sym.fractional_laplacian_symbol(1.5)

    def nonlinearity(V: SpectralField, u: SpectralField) -> SpectralField:
        return apply(P, pointwise_product(V, apply(gradv, u)))

    def zone_cases(V: SpectralField, u: SpectralField):
        return [("conformal", V, u, gradv)]

    return EquationSpec(
        kind="gjms-toy",
        params=RegularityParams(n=n, alpha=float(n), beta=1.0, gamma=1.0, s=s, p=p),
        ncomp=1, amplitude=amplitude, L=L, P=P, Q=gradv,
        coefficient=lambda u: apply(lam3, u),
        nonlinearity=nonlinearity,
        zone_cases=zone_cases,
    )


_DEFAULT_DATA = {
    # kind -> {n: (s, p)}
    "stationary-navier-stokes": {2: (1.0, 4.0), 4: (1.0, 2.0)},
    "biharmonic4d-toy": {2: (2.0, 1.5), 4: (2.0, 2.0)},
    "gjms-toy": {3: (1.5, 2.0)},
}


def equation_spec(kind: str, n: int | None = None, s: float | None = None,
                  p: float | None = None, amplitude: float = 1e-2) -> EquationSpec:
    """Build a model equation; defaults re-derive passing data per dimension."""
    aliases = {"ns": "stationary-navier-stokes", "stationary-navier-stokes":
               "stationary-navier-stokes", "biharmonic": "biharmonic4d-toy",
               "biharmonic4d-toy": "biharmonic4d-toy", "gjms": "gjms-toy",
               "gjms-toy": "gjms-toy"}
    if kind not in aliases:
        raise KeyError(f"unknown equation kind {kind!r}")
    kind = aliases[kind]
    table = _DEFAULT_DATA[kind]
    if n is None:
        n = min(table)
    if n not in table and (s is None or p is None):
        raise ValueError(f"{kind} has no default data for n={n}; pass s and p")
    s0, p0 = table.get(n, (None, None))
    s = s0 if s is None else s
    p = p0 if p is None else p
    if kind == "stationary-navier-stokes":
        eq = _ns_spec(n, s, p, amplitude)
    elif kind == "biharmonic4d-toy":
        eq = _biharmonic_spec(n, s, p, amplitude)
    else:
        eq = _gjms_spec(n, s, p, amplitude)
    rep = check_params(eq.params)
    if not rep.ok:
        raise ValueError(f"{kind} data (n={n}, s={s}, p={p}) violates: "
                         + ", ".join(rep.violations))
    return eq


def custom_equation(n: int, L_name: str, P_name: str, Q_name: str,
                    alpha: float, beta: float, gamma: float,
                    s: float, p: float, amplitude: float = 1e-2) -> EquationSpec:
    """Custom scalar equation from registry symbols, with V(u) = u."""
    L = sym.resolve_symbol(L_name)
    P = sym.resolve_symbol(P_name)
    Q = sym.resolve_symbol(Q_name)

    def nonlinearity(V: SpectralField, u: SpectralField) -> SpectralField:
        return apply(P, pointwise_product(V, apply(Q, u)))

    def zone_cases(V: SpectralField, u: SpectralField):
        return [("custom", V, u, Q)]

    eq = EquationSpec(
        kind="custom",
        params=RegularityParams(n=n, alpha=alpha, beta=beta, gamma=gamma, s=s, p=p),
        ncomp=1, amplitude=amplitude, L=L, P=P, Q=Q,
        coefficient=lambda u: u, nonlinearity=nonlinearity, zone_cases=zone_cases,
    )
    rep = check_params(eq.params)
    if not rep.ok:
        raise ValueError("custom equation violates: " + ", ".join(rep.violations))
    return eq


# -- manufactured solutions ----------------------------------------------------


_TARGET_SLOPE = 0.6  # intended decay of 2^(sigma k)||P_k u||_r per shell


def smooth_forcing(eq: EquationSpec, grid: GridSpec, seed: int) -> SpectralField:
    """Mean-zero band-limited forcing with ||f||_2 = amplitude.

    The radial profile is the power law (1+|xi|)^-g with g chosen so the
    linearized solution's weighted shell sequence 2^(sigma k)||P_k u||
    decays at a uniform target rate: steep enough to clear the theoretical
    gain, shallow enough to stay above the localization smear floor.  A
    smoother forcing would make the probe measure the cutoff instead of the
    solution.
    """
    gains = compute_gains(eq.params)
    g_pow = gains.params.sigma + grid.dim / 2.0 - eq.params.alpha + _TARGET_SLOPE
    f = random_field(grid, seed, ncomp=eq.ncomp, band=grid.points_per_axis / 4,
                     radial_profile=lambda r: (1.0 + r) ** (-g_pow))
    if eq.forcing_projector is not None:
        f = eq.forcing_projector(f)
    nrm = lp_norm(f, 2)
    if nrm == 0:
        raise ValueError("degenerate forcing draw")
    return f * (eq.amplitude / nrm)


def _inverse_multiplier(L: Symbol) -> Symbol:
    if L.kind != "multiplier":
        raise ValueError("manufacture needs a pure-multiplier leading operator")

    def inv(*xis, _f=L.xi_func):
        vals = np.asarray(_f(*xis))
        safe = np.where(vals == 0, 1.0, vals)
        return np.where(vals == 0, 0.0, 1.0 / safe)

    return sym.multiplier(-L.order, inv, name=f"{L.name}:inverse")


@dataclass
class ManufacturedSolution:
    u: SpectralField
    forcing: SpectralField
    residual: float
    iterations: int
    update_norms: tuple


def equation_residual(eq: EquationSpec, u: SpectralField,
                      forcing: SpectralField) -> float:
    """Fresh relative residual ||L u + P(V(u) Q u) - f||_2 / ||f||_2.

    Absolute for an identically-zero forcing.
    """
    V = eq.coefficient(u)
    lhs = apply(eq.L, u) + eq.nonlinearity(V, u) - forcing
    den = lp_norm(forcing, 2)
    return lp_norm(lhs, 2) / (den if den > 0 else 1.0)


def manufactured_solution(eq: EquationSpec, grid: GridSpec, seed: int = 7,
                          tol: float = 1e-11, max_iter: int = 300,
                          forcing: SpectralField | None = None) -> ManufacturedSolution:
    """Small-data fixed-point solve of L u + P(V(u) Q u) = f.

    Plain iteration u <- L^{-1}(f - P(V(u) Q u)) on mean-zero fields; raises
    if the residual grows over five successive iterates (non-contraction).
    """
    if forcing is None:
        forcing = smooth_forcing(eq, grid, seed)
    Linv = _inverse_multiplier(eq.L)
    u = apply(Linv, forcing)
    updates = []
    res_prev = math.inf
    growth = 0
    for it in range(1, max_iter + 1):
        V = eq.coefficient(u)
        rhs = forcing - eq.nonlinearity(V, u)
        u_next = apply(Linv, rhs)
        if eq.forcing_projector is not None:
            u_next = eq.forcing_projector(u_next)
        updates.append(lp_norm(u_next - u, 2))
        u = u_next
        res = equation_residual(eq, u, forcing)
        if res <= tol:
            return ManufacturedSolution(u, forcing, res, it, tuple(updates))
        growth = growth + 1 if res > res_prev else 0
        if growth >= 5:
            raise RuntimeError(
                f"fixed-point iteration diverging (residual {res:.3e} after {it} its); "
                "reduce the amplitude")
        res_prev = res
    raise RuntimeError(f"no contraction to {tol} within {max_iter} iterations "
                       f"(residual {res:.3e})")


# -- localization ----------------------------------------------------------------


def cutoff_field(grid: GridSpec, rho: float) -> SpectralField:
    """Smooth radial plateau cutoff: 1 inside B_rho, 0 outside B_2rho.

    Centered at the cell midpoint so the support never wraps.
    """
    if not 0.0 < rho < math.pi / 4.0:
        raise ValueError(f"rho must lie in (0, pi/4), got {rho}")
    return SpectralField(grid, phys=ramp_down(grid.center_distance, rho, 2.0 * rho))


def localize(u: SpectralField, rho: float) -> SpectralField:
    """Multiply by the plateau cutoff (raw grid product: supports stay exact)."""
    return grid_product(cutoff_field(u.grid, rho), u)


# -- decay measurement -------------------------------------------------------------


@dataclass
class DecayReport:
    """Fitted decay of a_k = 2^(sigma k) ||P_k u||_r over a shell window."""

    sigma: float
    r: float
    window: tuple
    a_k: tuple
    fit_ks: tuple
    epsilon_measured: float
    epsilon_theory: float
    tolerance: float
    fit_residual: float
    dropped: tuple
    passed: bool

    def as_dict(self) -> dict:
        return {
            "sigma": self.sigma, "r": self.r, "window": list(self.window),
            "a_k": [float(v) for v in self.a_k], "fit_ks": list(self.fit_ks),
            "epsilon_measured": self.epsilon_measured,
            "epsilon_theory": self.epsilon_theory,
            "tolerance": self.tolerance, "fit_residual": self.fit_residual,
            "dropped": list(self.dropped), "passed": self.passed,
        }


def dyadic_decay_report(u: SpectralField, sigma: float, r, window: tuple,
                        part: LPPartition, epsilon_theory: float,
                        tolerance: float = 0.1) -> DecayReport:
    lo, hi = window
    if not (2 <= lo and hi <= part.jmax - 2):
        raise ValueError(f"window {window} must sit inside [2, {part.jmax - 2}]")
    if hi - lo + 1 < 4:
        raise ValueError(f"window {window} shorter than 4 shells")
    seq = dyadic_norm_sequence(part, u, r).values
    ks = np.arange(part.jmax + 1, dtype=float)
    a = (2.0 ** (sigma * ks)) * seq
    fit = fit_log2_slope(range(lo, hi + 1), a[lo:hi + 1], floor=1e-14)
    eps_meas = -fit.slope
    return DecayReport(
        sigma=sigma, r=r, window=(lo, hi), a_k=tuple(float(v) for v in a),
        fit_ks=fit.ks, epsilon_measured=eps_meas, epsilon_theory=epsilon_theory,
        tolerance=tolerance, fit_residual=fit.max_residual, dropped=fit.dropped,
        passed=bool(eps_meas >= epsilon_theory - tolerance),
    )


# -- full pipeline --------------------------------------------------------------


@dataclass
class ProbeReport:
    kind: str
    grid: tuple
    rho: float
    gains: GainReport
    residual: float
    delta: float
    decay: DecayReport
    zone_reports: tuple
    mainline: dict
    majorant: dict
    iteration: dict
    bootstrap_recheck: DecayReport | None
    passed: bool

    def as_dict(self) -> dict:
        return {
            "kind": self.kind,
            "grid": {"dim": self.grid[0], "points_per_axis": self.grid[1]},
            "rho": self.rho,
            "params": self.gains.as_dict(),
            "gains": {"epsilon": self.gains.epsilon, "theta": self.gains.theta,
                      "q": self.gains.q},
            "residual": self.residual,
            "delta": self.delta,
            "a_k": list(self.decay.a_k),
            "fit": self.decay.as_dict(),
            "zone_reports": [z.as_dict() for z in self.zone_reports],
            "mainline": self.mainline,
            "majorant": self.majorant,
            "iteration": self.iteration,
            "bootstrap_recheck": None if self.bootstrap_recheck is None
            else self.bootstrap_recheck.as_dict(),
            "pass": self.passed,
        }

    def write_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.as_dict(), sort_keys=True, indent=1)
                              + "\n")


def _sequence_of(fld: SpectralField, part: LPPartition, r) -> list:
    return [float(v) for v in dyadic_norm_sequence(part, fld, r).values]


def run_probe(eq: EquationSpec, grid: GridSpec, rho: float = 0.75,
              seed: int = 7, tolerance: float = 0.1,
              fit_window: tuple | None = None,
              with_bootstrap_recheck: bool = True) -> ProbeReport:
    """Execute the full probe and assemble the report.

    Raises ValueError (named violations) if the equation data fails the
    structural hypotheses before any field work starts.  The default
    cutoff uses the widest admissible transition: at desk resolutions a
    narrow transition under-resolves and the decay fit then measures the
    cutoff's spectral tail instead of the solution (narrow cutoffs need
    finer grids: the same probe passes at rho = pi/8 once N >= 1024).
    """
    if grid.dim != eq.params.n:
        raise ValueError(f"grid dim {grid.dim} != equation dimension {eq.params.n}")
    gains = compute_gains(eq.params)
    part = build_partition(grid)
    sigma, r, theta = gains.params.sigma, gains.params.r, gains.theta

    sol = manufactured_solution(eq, grid, seed)
    u_loc = localize(sol.u, rho)
    V_full = eq.coefficient(sol.u)
    # the coefficient is cut with the doubled-plateau window, clamped to the
    # admissible parameter range when 2*rho exceeds it
    eta2 = cutoff_field(grid, min(2.0 * rho, math.pi / 4.0 * 0.999))
    V_loc = grid_product(eta2, V_full)
    delta = lp_norm(V_loc, gains.q)

    es = split_elliptic(eq.L, grid, C2=4.0)
    B = parametrix(es.E, grid, C2=4.0)

    # pieces of the inverted localized equation:
    # u_loc = B(F_loc) - B P(V_loc Q u_loc) - B M u_loc + (I - B E) u_loc
    F_loc = apply(eq.L, u_loc) + eq.nonlinearity(V_loc, u_loc)
    main_term = apply(B, eq.nonlinearity(V_loc, u_loc))
    bf = apply(B, F_loc)
    bm = apply(B, apply(es.M, u_loc))
    defect = u_loc.without_nyquist() - apply(B, apply(es.E, u_loc))
    recon = bf - main_term - bm + defect
    identity_err = lp_norm(recon - u_loc.without_nyquist(), 2) / lp_norm(u_loc, 2)
    mainline = {
        "u_loc": _sequence_of(u_loc, part, r),
        "main_term": _sequence_of(main_term, part, r),
        "forcing_side": _sequence_of(bf, part, r),
        "ball_remainder": _sequence_of(bm, part, r),
        "parametrix_defect": _sequence_of(defect, part, r),
        "identity_error": identity_err,
    }

    zone_ks = list(range(max(5, part.jmax - 4), part.jmax))[:4]
    c_rho = None
    zone_reports = []
    for _label, Vz, uz, Qz in eq.zone_cases(V_loc, u_loc):
        if c_rho is None:
            c_rho = sobolev_norm(part, uz, sigma, r)
        for k in zone_ks:
            zr = zone_estimate_report(Vz, uz, Qz, k, gains.params, part, c_rho=c_rho)
            zone_reports.append(zr)

    window = (2, part.jmax - 2) if fit_window is None else tuple(fit_window)
    decay = dyadic_decay_report(u_loc, sigma, r, window, part, gains.epsilon,
                                tolerance)
    a = DecaySequence(np.asarray(decay.a_k))

    consts = [z.as_dict()["zone"][zn]["constant"]
              for z in zone_reports for zn in ("I+II", "III", "IV")]
    consts = [c for c in consts if c is not None and math.isfinite(c)]
    C0delta = delta * (max(consts) if consts else 1.0)
    ks = np.arange(len(a), dtype=float)
    kernel = 2.0 ** (-theta * np.abs(ks[:, None] - ks[None, :]))
    conv0 = kernel @ a.values
    tail = 2.0 ** (-theta * ks)
    lo, hi = window
    crho_fit = float(np.max((a.values - C0delta * conv0)[lo:hi + 1] / tail[lo:hi + 1]))
    crho_fit = max(crho_fit, 1e-300)
    maj = convolution_majorant(a, theta, C0delta, crho_fit)
    maj_ok = bool(np.all(a.values[lo:hi + 1] <= maj.values[lo:hi + 1] * (1 + 1e-12)))
    majorant = {"theta": theta, "C0delta": C0delta, "Crho": crho_fit,
                "holds_on_window": maj_ok}

    eps_it = theta / 2.0
    cap = delta_cap(eps_it)
    iteration: dict = {"eps": eps_it, "delta": C0delta, "delta_cap": cap,
                       "admissible": bool(0.0 < C0delta < cap)}
    if iteration["admissible"]:
        scaled = DecaySequence(a.values / crho_fit)
        ip = IterationParams(eps=eps_it, delta=C0delta, S=lo)
        holds, first_bad = hypothesis_holds(scaled, ip)
        iteration["holds"] = bool(holds)
        iteration["first_violation"] = first_bad
        if holds:
            iteration["M"] = decay_bound(scaled, ip)

    recheck = None
    if with_bootstrap_recheck:
        better = RegularityParams(
            n=eq.params.n, alpha=eq.params.alpha, beta=eq.params.beta,
            gamma=eq.params.gamma, s=gains.params.s,
            p=gains.params.p + gains.epsilon)
        rep2 = check_params(better)
        if rep2.ok:
            g2 = compute_gains(better)
            recheck = dyadic_decay_report(u_loc, g2.params.sigma, g2.params.r,
                                          window, part, g2.epsilon, tolerance)

    passed = bool(decay.passed and sol.residual <= 1e-10)
    return ProbeReport(
        kind=eq.kind, grid=(grid.dim, grid.points_per_axis), rho=rho,
        gains=gains, residual=sol.residual, delta=delta, decay=decay,
        zone_reports=tuple(zone_reports), mainline=mainline, majorant=majorant,
        iteration=iteration, bootstrap_recheck=recheck, passed=passed,
    )
