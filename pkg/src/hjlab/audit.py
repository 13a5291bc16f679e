"""Audit of the W^{2,2} estimate for  -Δu + |∇u|² = f  on the 2D torus.

The audited inequality is

    ||D²u||²_{L²} + || |∇u|² ||²_{L²}  <=  3 ||f||²_{L²},

applied with the effective source f - λ of the ergodic problem.  The
integration-by-parts identities behind it are checked separately on
2/3-truncated fields, where every cubic integrand is integrated exactly.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .errors import DegenerateSource, SolverError
from .hj import HamiltonianSpec, HJProblem, solve_hj
from .torus import Field2D, ops_for, random_bandlimited

logger = logging.getLogger(__name__)

__all__ = [
    "BOUND",
    "EstimateReport",
    "audit",
    "audit_focusing",
    "check_identities",
    "young_decomposition",
    "solve_and_audit",
    "audit_corpus",
    "SearchResult",
    "adversarial_ratio_search",
]

BOUND = 3.0
DEGENERATE_RHS = 1e-14


@dataclass
class EstimateReport:
    lhs_hessian: float
    lhs_grad4: float
    rhs_f2: float
    ratio: float
    identity_residuals: dict = field(default_factory=dict)
    degenerate: bool = False

    def to_dict(self) -> dict:
        return asdict(self)


def audit(u: Field2D, f_eff: Field2D, raise_on_degenerate: bool = False) -> EstimateReport:
    """Energies of u against ||f_eff||² (no pass/fail judgement here)."""
    if not u.compatible(f_eff):
        raise ValueError("u and f_eff live on different grids")
    ops = ops_for(u.n, u.period)
    uh = ops.fft(u.values)
    ux, uy = ops.grad(None, uh)
    uxx, uxy, uyy = ops.hess(None, uh)
    lhs_hessian = ops.integral(uxx**2 + 2 * uxy**2 + uyy**2)
    lhs_grad4 = ops.integral((ux**2 + uy**2) ** 2)
    rhs = ops.integral(f_eff.values**2)
    degenerate = rhs < DEGENERATE_RHS
    if degenerate and raise_on_degenerate:
        raise DegenerateSource(f"||f_eff||^2 = {rhs:.3e} is below {DEGENERATE_RHS:g}")
    ratio = float("nan") if degenerate else (lhs_hessian + lhs_grad4) / rhs
    return EstimateReport(
        lhs_hessian=lhs_hessian,
        lhs_grad4=lhs_grad4,
        rhs_f2=rhs,
        ratio=ratio,
        identity_residuals=check_identities(u),
        degenerate=degenerate,
    )


def audit_focusing(u: Field2D, f_eff: Field2D, **kw) -> EstimateReport:
    """Audit a solution of  -Δu - |∇u|² = f  through u -> -u, f -> -f."""
    return audit(-u, -f_eff, **kw)


def _truncated_derivatives(u: Field2D):
    ops = ops_for(u.n, u.period)
    uh = ops.fft(ops.truncate(u.values))
    ux, uy = ops.grad(None, uh)
    uxx, uxy, uyy = ops.hess(None, uh)
    return ops, ux, uy, uxx, uxy, uyy


def _rel(a: float, b: float) -> float:
    return abs(a - b) / (1.0 + abs(a) + abs(b))


def check_identities(u: Field2D) -> dict:
    """Normalized residuals |lhs - rhs| / (1 + |lhs| + |rhs|) of the proof identities."""
    ops, ux, uy, uxx, uxy, uyy = _truncated_derivatives(u)
    I = ops.integral
    grad4 = I((ux**2 + uy**2) ** 2)
    return {
        "uxx_ux2": _rel(I(uxx * ux**2), 0.0),
        "uyy_uy2": _rel(I(uyy * uy**2), 0.0),
        "hessian_laplacian": _rel(I(uxx**2 + uyy**2 + 2 * uxy**2), I((uxx + uyy) ** 2)),
        "cross_term": _rel(-2 * I(uxx * uy**2) - 2 * I(uyy * ux**2), 8 * I(ux * uy * uxy)),
        "grad4_expansion": _rel(grad4, I(ux**4 + uy**4 + 2 * ux**2 * uy**2)),
    }


def young_decomposition(u: Field2D, c_f: float = BOUND) -> tuple[float, float]:
    """Return (∫[(u_xx - u_y²)² + (u_yy - u_x²)²],
    ∫[2 u_x u_y u_xy + (c_f - 1)/2 (u_xy² + u_x² u_y²)])."""
    if not c_f > 1:
        raise ValueError("c_f must exceed 1")
    ops, ux, uy, uxx, uxy, uyy = _truncated_derivatives(u)
    squares = ops.integral((uxx - uy**2) ** 2 + (uyy - ux**2) ** 2)
    half = 0.5 * (c_f - 1.0)
    young = ops.integral(2 * ux * uy * uxy + half * (uxy**2 + ux**2 * uy**2))
    return squares, young


def quadratic_problem(f: Field2D) -> HJProblem:
    return HJProblem(HamiltonianSpec(kappa=1.0, gamma=2.0), f)


def solve_and_audit(f: Field2D, tol: float = 1e-9, u0: Optional[Field2D] = None):
    """Solve -Δu + |∇u|² + λ = f and audit u against f - λ."""
    sol = solve_hj(quadratic_problem(f), tol=tol, u0=u0)
    return sol, audit(sol.u, f - sol.lam)


def normalized_source(n: int, seed: int, kmax: float = 6, radius: float = 1.0, period: float = 1.0) -> Field2D:
    f = random_bandlimited(n, kmax, seed, period=period, decay=1.0)
    norm = math.sqrt(ops_for(n, period).integral(f.values**2))
    return f * (radius / norm)


def audit_corpus(n: int, seeds, kmax: float = 6, radius: float = 1.0, tol: float = 1e-9):
    """Audit one random source per seed; rows (seed, ratio, lhs_hessian, lhs_grad4, rhs)."""
    rows = []
    for seed in seeds:
        f = normalized_source(n, seed, kmax, radius)
        sol, rep = solve_and_audit(f, tol=tol)
        rows.append(
            {
                "seed": seed,
                "ratio": rep.ratio,
                "lhs_hessian": rep.lhs_hessian,
                "lhs_grad4": rep.lhs_grad4,
                "rhs": rep.rhs_f2,
                "lambda": sol.lam,
                "residual": sol.residual_linf,
            }
        )
    return rows


# ---------------------------------------------------------------------------
# sharpness probe


def _real_basis(band: int):
    """Half-plane integer wavenumbers 0 < |k| <= band, each giving a cos and a sin mode."""
    modes = []
    for kx in range(-band, band + 1):
        for ky in range(-band, band + 1):
            if kx * kx + ky * ky == 0 or kx * kx + ky * ky > band * band:
                continue
            if kx > 0 or (kx == 0 and ky > 0):
                modes.append((kx, ky))
    return modes


def _source_builder(n: int, band: int, period: float):
    x = np.arange(n)[:, None] * (period / n)
    y = np.arange(n)[None, :] * (period / n)
    scale = math.sqrt(2.0) / period
    funcs = []
    for kx, ky in _real_basis(band):
        phase = 2 * np.pi * (kx * x + ky * y) / period
        funcs.append(scale * np.cos(phase))
        funcs.append(scale * np.sin(phase))
    basis = np.array(funcs)

    def build(c):
        return Field2D(np.tensordot(c, basis, axes=1), period)

    return basis, build


@dataclass
class SearchResult:
    best_ratio: float
    best_f: Field2D
    best_coefficients: np.ndarray
    per_seed: list = field(default_factory=list)
    skipped: int = 0


def adversarial_ratio_search(
    n: int = 64,
    seeds=range(8),
    ascent_iters: int = 10,
    band: int = 4,
    radius: float = 1.0,
    fd_step: float = 1e-4,
    step: float = 0.5,
    tol: float = 1e-10,
    start: Optional[np.ndarray] = None,
    period: float = 1.0,
) -> SearchResult:
    """Projected gradient ascent of the estimate ratio over ||f||_{L²} = radius.

    f ranges over real trigonometric modes with 0 < |k| <= band.  The
    gradient is a central difference in the coefficients; a step is
    accepted only if the ratio increases, otherwise the step is halved, so
    accepted ratios are nondecreasing.  Trial points where the HJ solve
    fails are skipped.  ``start`` overrides the random start for every
    seed.
    """
    basis, build = _source_builder(n, band, period)
    dim = len(basis)
    skipped = 0

    def evaluate(c, u0=None):
        nonlocal skipped
        try:
            sol, rep = solve_and_audit(build(c), tol=tol, u0=u0)
        except SolverError as exc:
            skipped += 1
            logger.info("search trial skipped: %s", exc)
            return None, None
        return rep.ratio, sol.u

    def project(c):
        return c * (radius / np.linalg.norm(c))

    best = (-np.inf, None)
    per_seed = []
    for seed in seeds:
        if start is not None:
            c = project(np.asarray(start, dtype=float))
        else:
            c = project(np.random.default_rng(seed).standard_normal(dim))
        ratio, u = evaluate(c)
        if ratio is None:
            per_seed.append({"seed": seed, "ratio": float("nan"), "trace": []})
            continue
        trace = [ratio]
        h = step * radius
        for _ in range(ascent_iters):
            grad = np.zeros(dim)
            for i in range(dim):
                e = np.zeros(dim)
                e[i] = fd_step * radius
                rp, _ = evaluate(c + e, u)
                rm, _ = evaluate(c - e, u)
                if rp is not None and rm is not None:
                    grad[i] = (rp - rm) / (2 * e[i])
            grad -= grad.dot(c) * c / c.dot(c)
            gnorm = np.linalg.norm(grad)
            if gnorm == 0:
                break
            accepted = False
            while h > 1e-6 * radius:
                trial = project(c + h * grad / gnorm)
                rt, ut = evaluate(trial, u)
                if rt is not None and rt > ratio:
                    c, ratio, u = trial, rt, ut
                    accepted = True
                    break
                h *= 0.5
            if not accepted:
                break
            trace.append(ratio)
        per_seed.append({"seed": seed, "ratio": ratio, "trace": trace})
        if ratio > best[0]:
            best = (ratio, c.copy())
    if best[1] is None:
        raise SolverError("no search trial converged")
    return SearchResult(
        best_ratio=best[0],
        best_f=build(best[1]),
        best_coefficients=best[1],
        per_seed=per_seed,
        skipped=skipped,
    )
