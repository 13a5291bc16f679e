"""Stationary second-order mean field games on the torus.

    -Δu + H(x, ∇u) + λ = σ m^α
    -Δm - div(D_pH(x, ∇u) m) = 0,   m > 0,  ∫m = 1

Two solvers: damped Picard over (HJ, FP), valid for any admissible H, and a
Hopf-Cole ground-state solver for H(x, p) = |p|^2 + V(x).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .diagnostics import BootstrapReport, bootstrap_report
from .errors import NegativeV, NonConvergence, SolverError
from .fokker_planck import drift_from_hamiltonian, fp_residual, solve_fp
from .hj import HamiltonianSpec, HJProblem, hj_residual, solve_hj
from .torus import Field2D, gradient, ops_for, resample

logger = logging.getLogger(__name__)

__all__ = [
    "CouplingSpec",
    "MFGProblem",
    "MFGSolution",
    "solve_mfg",
    "solve_mfg_hopf_cole",
    "alpha_sweep",
    "mfg_residuals",
]

MIN_DAMPING = 1.0 / 64


@dataclass(frozen=True)
class CouplingSpec:
    """f(m) = sigma * (m ⋆ χ_ε ⋆ χ_ε)^alpha with a Gaussian mollifier χ_ε."""

    sigma: float = 1.0
    alpha: float = 1.0
    mollify_eps: float = 0.0

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("only defocusing couplings (sigma > 0) are supported")
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if self.mollify_eps < 0:
            raise ValueError("mollify_eps must be >= 0")

    def mollify(self, m: Field2D) -> Field2D:
        if self.mollify_eps == 0:
            return m
        ops = ops_for(m.n, m.period)
        # Gaussian symbol applied twice: exp(-eps^2 |k|^2 / 2)^2
        kernel = np.exp(-(self.mollify_eps**2) * ops.k2)
        return Field2D(ops.ifft(kernel * ops.fft(m.values)), m.period)

    def __call__(self, m: Field2D) -> Field2D:
        mm = self.mollify(m).values
        return Field2D(self.sigma * np.maximum(mm, 0.0) ** self.alpha, m.period)


@dataclass(frozen=True, eq=False)
class MFGProblem:
    hamiltonian: HamiltonianSpec = field(default_factory=HamiltonianSpec)
    coupling: CouplingSpec = field(default_factory=CouplingSpec)
    n: int = 64
    period: float = 1.0
    damping: float = 1.0
    tol: float = 1e-8
    max_outer: int = 500

    def __post_init__(self):
        if not 0 < self.damping <= 1:
            raise ValueError("damping must lie in (0, 1]")
        if not self.tol > 0:
            raise ValueError("tol must be positive")

    def with_resolution(self, n: int) -> "MFGProblem":
        return replace(self, n=n, hamiltonian=self.hamiltonian.at_resolution(n, self.period))


@dataclass
class MFGSolution:
    u: Field2D
    lam: float
    m: Field2D
    outer_iters: int
    residual_hj: float
    residual_fp: float
    fixpoint_gap: float
    history: list = field(default_factory=list)
    diagnostics: Optional[BootstrapReport] = None

    def summary(self) -> dict:
        out = {
            "lambda": self.lam,
            "outer_iters": self.outer_iters,
            "residual_hj": self.residual_hj,
            "residual_fp": self.residual_fp,
            "fixpoint_gap": self.fixpoint_gap,
            "min_m": float(np.min(self.m.values)),
            "max_m": float(np.max(self.m.values)),
            "gap_history": [h["gap"] for h in self.history],
        }
        if self.diagnostics is not None:
            out["diagnostics"] = self.diagnostics.to_dict()
        return out


def mfg_residuals(hamiltonian: HamiltonianSpec, coupling: CouplingSpec, u, lam, m):
    """(sup HJ residual, L^2 FP residual) from fresh spectral derivatives."""
    H = hamiltonian.at_resolution(u.n, u.period)
    r_hj = hj_residual(HJProblem(H, coupling(m)), u, lam).max_abs()
    b = drift_from_hamiltonian(H, gradient(u))
    r = fp_residual(m, b).values
    r_fp = float(np.sqrt(np.sum(r * r)) * m.spacing)
    return r_hj, r_fp


def solve_mfg(
    problem: MFGProblem,
    m0: Optional[Field2D] = None,
    u0: Optional[Field2D] = None,
    with_diagnostics: bool = True,
) -> MFGSolution:
    """Damped Picard iteration m <- (1 - θ) m + θ FP(HJ(m)).

    θ is halved (not below 1/64) whenever the fixed-point gap grows three
    iterations in a row.  Stops once the gap, the HJ residual and the FP
    residual are all below ``problem.tol``.
    """
    n, period = problem.n, problem.period
    H = problem.hamiltonian.at_resolution(n, period)
    coupling = problem.coupling
    tol = problem.tol
    inner = 0.1 * tol
    area = period**2
    if m0 is None:
        m = Field2D.constant(1.0 / area, n, period)
    else:
        m = resample(m0, n)
        m = m * (1.0 / (np.mean(m.values) * area))
    u, lam = u0, None
    theta = problem.damping
    history = []
    rising = 0
    for k in range(1, problem.max_outer + 1):
        hj = solve_hj(HJProblem(H, coupling(m)), tol=inner, u0=u, lam0=lam)
        u, lam = hj.u, hj.lam
        b = drift_from_hamiltonian(H, gradient(u))
        fp = solve_fp(b, tol=inner, m0=m)
        gap = float(np.max(np.abs(fp.m.values - m.values)))
        if history and gap > history[-1]["gap"]:
            rising += 1
        else:
            rising = 0
        history.append({"iter": k, "gap": gap, "lambda": lam, "theta": theta})
        if rising >= 3 and theta > MIN_DAMPING:
            theta = max(MIN_DAMPING, 0.5 * theta)
            rising = 0
            logger.info("oscillation detected; damping reduced to %g", theta)
        if gap <= tol:
            r_hj, r_fp = mfg_residuals(H, coupling, u, lam, fp.m)
            if r_hj <= tol and r_fp <= tol:
                sol = MFGSolution(
                    u=u, lam=lam, m=fp.m, outer_iters=k,
                    residual_hj=r_hj, residual_fp=r_fp, fixpoint_gap=gap,
                    history=history,
                )
                if with_diagnostics:
                    sol.diagnostics = bootstrap_report(u, fp.m, H, coupling.alpha)
                return sol
        m = Field2D((1.0 - theta) * m.values + theta * fp.m.values, period)
    best = min(h["gap"] for h in history)
    raise NonConvergence(f"Picard: no convergence in {problem.max_outer} outer iterations", best, history)


def solve_mfg_hopf_cole(
    alpha: float,
    sigma: float,
    V: Optional[Field2D] = None,
    tol: float = 1e-10,
    n: Optional[int] = None,
    period: float = 1.0,
    tau: float = 0.05,
    max_iters: int = 200_000,
    v0: Optional[Field2D] = None,
    with_diagnostics: bool = True,
) -> MFGSolution:
    """Ground state of  -Δv + (σ m^α - V) v = λ v,  m = v² / ∫v²,  v > 0.

    V is the potential inside the Hamiltonian H(x, p) = |p|² + V(x); with
    v = e^{-u} this is the MFG system above, and m is the Gibbs density
    e^{-2u} / ∫e^{-2u}.  ``sigma = 0`` switches the coupling off and leaves
    the linear ground-state problem.

    The normalized flow subtracts the current Rayleigh quotient,
    v <- (I + τ(s - Δ))^{-1} (v - τ(W - λ - s) v),  W = σ m^α - V,
    with s >= max(W - λ) so the explicit factor stays positive.  Its fixed
    points are exactly the eigenpairs.
    """
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    if V is not None:
        n = V.n if n is None else n
        period = V.period
        Vv = resample(V, n).values
    else:
        if n is None:
            raise ValueError("n is required when V is omitted")
        Vv = np.zeros((n, n))
    ops = ops_for(n, period)

    def normalize(v):
        return v / np.sqrt(ops.integral(v * v))

    def rayleigh(v, W):
        vx, vy = ops.grad(v)
        return ops.integral(vx * vx + vy * vy + W * v * v)

    def potential(v):
        m = v * v
        return (sigma * m**alpha if sigma > 0 else 0.0) - Vv, m

    start = np.ones((n, n)) if v0 is None else np.array(v0.values, dtype=float)
    restarted = False
    v = normalize(start)
    history = []
    for it in range(1, max_iters + 1):
        W, m = potential(v)
        lam = rayleigh(v, W)
        shift = max(0.0, float(np.max(W)) - lam)
        rhs = v - tau * (W - lam - shift) * v
        vn = ops.ifft(ops.fft(rhs) / (1.0 + tau * (shift + ops.k2)))
        if np.min(vn) <= 0:
            if restarted:
                raise NegativeV("Hopf-Cole flow left the positive cone")
            restarted = True
            tau *= 0.5
            v = normalize(np.ones((n, n)))
            continue
        vn = normalize(vn)
        change = float(np.max(np.abs(vn - v)))
        v = vn
        if it % 10:
            continue
        W, m = potential(v)
        lam = rayleigh(v, W)
        eig_res = float(np.max(np.abs(-ops.lap(v) + (W - lam) * v)))
        history.append({"iter": it, "gap": change, "eig_residual": eig_res, "lambda": lam})
        if eig_res <= tol:
            break
    else:
        best = min((h["eig_residual"] for h in history), default=float("nan"))
        raise NonConvergence(f"Hopf-Cole: no convergence in {max_iters} steps", best, history)

    u = -np.log(v)
    u -= np.mean(u)
    m = v * v / ops.integral(v * v)
    u_f, m_f = Field2D(u, period), Field2D(m, period)
    V_field = Field2D(Vv, period) if V is not None else None
    H = HamiltonianSpec(kappa=1.0, gamma=2.0, V=V_field)
    sol = MFGSolution(
        u=u_f, lam=lam, m=m_f, outer_iters=it,
        residual_hj=float("nan"), residual_fp=float("nan"), fixpoint_gap=change,
        history=history,
    )
    if sigma > 0:
        coupling = CouplingSpec(sigma=sigma, alpha=alpha)
        sol.residual_hj, sol.residual_fp = mfg_residuals(H, coupling, u_f, lam, m_f)
        if with_diagnostics:
            sol.diagnostics = bootstrap_report(u_f, m_f, H, alpha)
    else:
        zero = Field2D.zeros(n, period)
        sol.residual_hj = hj_residual(HJProblem(H, zero), u_f, lam).max_abs()
        b = drift_from_hamiltonian(H, gradient(u_f))
        sol.residual_fp = float(np.sqrt(np.sum(fp_residual(m_f, b).values ** 2)) * m_f.spacing)
    return sol


@dataclass
class SweepRow:
    alpha: float
    converged: bool
    lam: float = float("nan")
    residual_hj: float = float("nan")
    residual_fp: float = float("nan")
    min_m: float = float("nan")
    max_m: float = float("nan")
    w22_u: float = float("nan")
    holder_m: float = float("nan")
    outer_iters: int = 0
    error: str = ""


def alpha_sweep(base: MFGProblem, alphas, beta: float = 0.5, keep_solutions: bool = False):
    """Warm-started continuation in α.  Failures are recorded, not raised."""
    alphas = list(alphas)
    if alphas != sorted(alphas):
        raise ValueError("alphas must be sorted ascending")
    rows, solutions = [], []
    u = m = None
    for a in alphas:
        problem = replace(base, coupling=replace(base.coupling, alpha=a))
        try:
            sol = solve_mfg(problem, m0=m, u0=u)
        except SolverError as exc:
            rows.append(SweepRow(alpha=a, converged=False, error=str(exc)))
            solutions.append(None)
            continue
        u, m = sol.u, sol.m
        diag = sol.diagnostics
        rows.append(
            SweepRow(
                alpha=a, converged=True, lam=sol.lam,
                residual_hj=sol.residual_hj, residual_fp=sol.residual_fp,
                min_m=float(np.min(sol.m.values)), max_m=float(np.max(sol.m.values)),
                w22_u=diag.w22_u,
                holder_m=diag.holder_m.get(beta, float("nan")),
                outer_iters=sol.outer_iters,
            )
        )
        solutions.append(sol)
    return (rows, solutions) if keep_solutions else rows
