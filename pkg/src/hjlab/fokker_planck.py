"""Stationary Fokker-Planck equation  -Δm - div(b m) = 0,  ∫m = 1,  m > 0."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonConvergence, PositivityLoss
from .hj import HamiltonianSpec
from .torus import Field2D, ops_for

__all__ = [
    "FPSolution",
    "solve_fp",
    "fp_iterate",
    "fp_residual",
    "fp_weak_residual",
    "stable_step",
    "drift_from_hamiltonian",
]


@dataclass
class FPSolution:
    m: Field2D
    residual_l2: float
    min_m: float
    mass_error: float
    iterations: int = 0

    def summary(self) -> dict:
        return {
            "residual_l2": self.residual_l2,
            "min_m": self.min_m,
            "mass_error": self.mass_error,
            "iterations": self.iterations,
        }


def drift_from_hamiltonian(spec: HamiltonianSpec, grad_u) -> tuple[Field2D, Field2D]:
    """D_pH(x, ∇u), with the regularized modulus when gamma < 2."""
    gx, gy = grad_u
    spec = spec.at_resolution(gx.n, gx.period)
    ax, ay = spec.dp(gx.values, gy.values)
    return Field2D(ax, gx.period), Field2D(ay, gx.period)


def stable_step(b) -> float:
    """Pseudo-time step 1 / (2 ||b||_inf^2 + 1)."""
    bmax = float(np.max(np.hypot(b[0].values, b[1].values)))
    return 1.0 / (2.0 * bmax**2 + 1.0)


def fp_iterate(m: Field2D, b, steps: int, tau=None, renormalize: bool = True) -> Field2D:
    """Run ``steps`` updates m <- (I - τΔ)^(-1) (m + τ div(b m))."""
    ops = ops_for(m.n, m.period)
    tau = stable_step(b) if tau is None else tau
    bx, by = b[0].values, b[1].values
    target = 1.0 / ops.area
    mv = np.array(m.values)
    for _ in range(steps):
        mv = _step(ops, mv, bx, by, tau)
        if renormalize:
            mv *= target / np.mean(mv)
    return Field2D(mv, m.period)


def _step(ops, m, bx, by, tau):
    mh = ops.fft(m) + tau * (ops.ikx * ops.fft(bx * m) + ops.iky * ops.fft(by * m))
    return ops.ifft(mh / (1.0 + tau * ops.k2))


def _residual(ops, m, bx, by):
    mh = ops.fft(m)
    return ops.ifft(ops.k2 * mh - ops.ikx * ops.fft(bx * m) - ops.iky * ops.fft(by * m))


def fp_residual(m: Field2D, b) -> Field2D:
    ops = ops_for(m.n, m.period)
    return Field2D(_residual(ops, m.values, b[0].values, b[1].values), m.period)


def fp_weak_residual(m: Field2D, b, phi: Field2D) -> float:
    """|∫ (∇m·∇φ + m b·∇φ)| for a test field φ."""
    ops = ops_for(m.n, m.period)
    mx, my = ops.grad(m.values)
    px, py = ops.grad(phi.values)
    integrand = mx * px + my * py + m.values * (b[0].values * px + b[1].values * py)
    return abs(ops.integral(integrand))


def solve_fp(b, tol: float = 1e-9, max_iters: int = 20_000, m0: Field2D | None = None) -> FPSolution:
    """Fixed point of the mass-preserving semi-implicit pseudo-time iteration.

    ``b`` is the drift pair D_pH(x, ∇u).  ``tol`` bounds the L^2 norm of
    the strong residual -Δm - div(b m).
    """
    bx, by = b[0].values, b[1].values
    n, period = b[0].n, b[0].period
    ops = ops_for(n, period)
    tau = stable_step(b)
    target = 1.0 / ops.area
    m = np.full((n, n), target) if m0 is None else np.array(m0.values, dtype=float)
    m *= target / np.mean(m)
    history = []
    check_every = 10
    for it in range(1, max_iters + 1):
        m = _step(ops, m, bx, by, tau)
        m *= target / np.mean(m)
        if it % check_every and it != max_iters:
            continue
        res = float(np.sqrt(ops.integral(_residual(ops, m, bx, by) ** 2)))
        history.append(res)
        if res <= tol:
            break
    else:
        raise NonConvergence(f"Fokker-Planck: no convergence in {max_iters} steps", min(history), history)
    min_m = float(np.min(m))
    if min_m <= 0:
        raise PositivityLoss(f"min m = {min_m:.3e}; increase the resolution")
    return FPSolution(
        m=Field2D(m, period),
        residual_l2=res,
        min_m=min_m,
        mass_error=abs(ops.integral(m) - 1.0),
        iterations=it,
    )
