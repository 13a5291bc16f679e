"""Ergodic viscous Hamilton-Jacobi solvers on the torus.

Solves  -Δu + H(x, ∇u) + λ = f  with  ∫u = 0  by damped Newton.  Each
Newton correction solves the linearization

    -Δw + D_pH(x, ∇u)·∇w + dλ = -r

with GMRES preconditioned by the spectral inverse of (I - Δ).  The pair
(w, dλ) is packed into one grid vector z = w + dλ: derivatives ignore the
constant part, and the mean of z carries dλ.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np
from scipy.sparse.linalg import LinearOperator, gmres

from .errors import BlowUp, NonConvergence
from .torus import Field2D, ops_for, resample

logger = logging.getLogger(__name__)

__all__ = [
    "HamiltonianSpec",
    "HJProblem",
    "HJSolution",
    "solve_hj",
    "continuation_solve",
    "hj_residual",
    "jacobian_action",
    "HJ1DSolution",
    "solve_hj_1d",
    "ConvexityCheck",
    "convexity_audit_1d",
    "PHI",
]

BLOWUP_CAP = 1e6


@dataclass(frozen=True, eq=False)
class HamiltonianSpec:
    """H(x, p) = kappa |p|^gamma + b0(x)·p + V(x).

    For gamma < 2 the modulus inside D_pH is regularized as
    sqrt(|p|^2 + delta^2); H itself is never regularized.
    """

    kappa: float = 1.0
    gamma: float = 2.0
    b0: Optional[tuple] = None
    V: Optional[Field2D] = None
    delta: float = 1e-10

    def __post_init__(self):
        if not self.kappa > 0:
            raise ValueError("kappa must be positive")
        if not self.gamma > 1:
            raise ValueError("gamma must exceed 1")
        if self.b0 is not None and len(self.b0) != 2:
            raise ValueError("b0 must be a pair of fields")

    @property
    def is_quadratic(self) -> bool:
        return self.gamma == 2.0 and self.b0 is None

    def at_resolution(self, n: int, period: float = 1.0) -> "HamiltonianSpec":
        def fit(f):
            if f is None:
                return None
            if f.period != period:
                raise ValueError("Hamiltonian fields use a different period")
            return resample(f, n)

        b0 = None if self.b0 is None else (fit(self.b0[0]), fit(self.b0[1]))
        return replace(self, b0=b0, V=fit(self.V))

    def value(self, px, py):
        p2 = px * px + py * py
        if self.gamma == 2.0:
            out = self.kappa * p2
        else:
            out = self.kappa * p2 ** (0.5 * self.gamma)
        if self.b0 is not None:
            out = out + self.b0[0].values * px + self.b0[1].values * py
        if self.V is not None:
            out = out + self.V.values
        return out

    def dp(self, px, py):
        p2 = px * px + py * py
        g = self.gamma
        if g == 2.0:
            w = 2.0 * self.kappa
        elif g < 2.0:
            w = self.kappa * g * (p2 + self.delta**2) ** (0.5 * (g - 2.0))
        else:
            w = self.kappa * g * p2 ** (0.5 * (g - 2.0))
        ax, ay = w * px, w * py
        if self.b0 is not None:
            ax = ax + self.b0[0].values
            ay = ay + self.b0[1].values
        return ax, ay


@dataclass(frozen=True, eq=False)
class HJProblem:
    hamiltonian: HamiltonianSpec
    source: Field2D

    @property
    def n(self):
        return self.source.n

    @property
    def period(self):
        return self.source.period


@dataclass
class HJSolution:
    u: Field2D
    lam: float
    residual_linf: float
    residual_l2: float
    newton_iters: int
    history: list = field(default_factory=list)

    def summary(self) -> dict:
        return {
            "lambda": self.lam,
            "residual_linf": self.residual_linf,
            "residual_l2": self.residual_l2,
            "newton_iters": self.newton_iters,
            "residual_history": list(self.history),
        }


class _Residual:
    """F(u, λ) = -Δu + H(x, ∇u) + λ - f on raw arrays."""

    def __init__(self, problem: HJProblem):
        self.ops = ops_for(problem.n, problem.period)
        self.H = problem.hamiltonian.at_resolution(problem.n, problem.period)
        self.f = problem.source.values

    def __call__(self, u, lam):
        ops = self.ops
        uh = ops.fft(u)
        px, py = ops.grad(None, uh)
        r = ops.ifft(ops.k2 * uh) + self.H.value(px, py) + lam - self.f
        return r, px, py

    def linear_operator(self, px, py):
        ops = self.ops
        ax, ay = self.H.dp(px, py)
        shape = (ops.n, ops.n)
        size = ops.n * ops.n

        def matvec(z):
            z = z.reshape(shape)
            zh = ops.fft(z)
            zx, zy = ops.grad(None, zh)
            out = ops.ifft(ops.k2 * zh) + ax * zx + ay * zy + zh[0, 0].real / size
            return out.ravel()

        def precond(z):
            return ops.helmholtz_inv(z.reshape(shape)).ravel()

        return (
            LinearOperator((size, size), matvec=matvec, dtype=float),
            LinearOperator((size, size), matvec=precond, dtype=float),
        )


def hj_residual(problem: HJProblem, u: Field2D, lam: float) -> Field2D:
    """Residual -Δu + H(x, ∇u) + λ - f from fresh spectral derivatives."""
    r, _, _ = _Residual(problem)(u.values, lam)
    return Field2D(r, problem.period)


def jacobian_action(problem: HJProblem, u: Field2D, w: Field2D, dlam: float = 0.0) -> Field2D:
    """Action of the Newton linearization at u on the direction (w, dλ)."""
    res = _Residual(problem)
    _, px, py = res(u.values, 0.0)
    op, _ = res.linear_operator(px, py)
    w0 = w.values - np.mean(w.values)
    return Field2D(op.matvec((w0 + dlam).ravel()).reshape(w.values.shape), problem.period)


def _rms(a) -> float:
    return float(np.sqrt(np.mean(a * a)))


def solve_hj(
    problem: HJProblem,
    tol: float = 1e-9,
    max_iters: int = 60,
    u0: Optional[Field2D] = None,
    lam0: Optional[float] = None,
    blowup_cap: float = BLOWUP_CAP,
) -> HJSolution:
    """Damped Newton-Krylov solve of the ergodic problem.

    Returns the first iterate with sup-norm residual at most ``tol``.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    res = _Residual(problem)
    ops = res.ops
    u = np.zeros((ops.n, ops.n)) if u0 is None else np.array(u0.values, dtype=float)
    u -= np.mean(u)
    if lam0 is None:
        _, px, py = res(u, 0.0)
        lam = float(np.mean(res.f - res.H.value(px, py)))
    else:
        lam = float(lam0)
    r, px, py = res(u, lam)
    history = []
    for it in range(max_iters + 1):
        rinf = float(np.max(np.abs(r)))
        history.append(rinf)
        if rinf <= tol:
            u = u - np.mean(u)
            return HJSolution(
                u=Field2D(u, ops.period),
                lam=lam,
                residual_linf=rinf,
                residual_l2=_rms(r) * ops.period,
                newton_iters=it,
                history=history,
            )
        if it == max_iters:
            break
        op, prec = res.linear_operator(px, py)
        r2 = _rms(r)
        eta = min(1e-2, max(1e-12, 0.1 * rinf))
        z, info = gmres(op, -r.ravel(), M=prec, rtol=eta, atol=0.0, restart=60, maxiter=20)
        if info != 0:
            logger.debug("gmres returned info=%d at newton step %d", info, it)
        z = z.reshape(u.shape)
        dlam = float(np.mean(z))
        w = z - dlam
        t = 1.0
        while True:
            ut = u + t * w
            lt = lam + t * dlam
            rt, pxt, pyt = res(ut, lt)
            if _rms(rt) < (1.0 - 1e-4 * t) * r2 or np.max(np.abs(rt)) <= tol:
                break
            t *= 0.5
            if t < 2.0**-12:
                raise NonConvergence(
                    f"line search stalled at Newton step {it}", min(history), history
                )
        if np.max(np.abs(ut)) > blowup_cap:
            raise BlowUp(f"|u| exceeded {blowup_cap:g} at Newton step {it}")
        u, lam, r, px, py = ut, lt, rt, pxt, pyt
    raise NonConvergence(f"no convergence in {max_iters} Newton steps", min(history), history)


def continuation_solve(
    problem: HJProblem,
    steps: int,
    tol: float = 1e-9,
    max_iters: int = 60,
    u0: Optional[Field2D] = None,
) -> HJSolution:
    """Solve with sources s f for s = 1/steps, ..., 1, warm-starting each stage."""
    if steps < 1:
        raise ValueError("steps must be >= 1")
    sol = None
    u = u0
    lam = None
    for s in range(1, steps + 1):
        stage = HJProblem(problem.hamiltonian, problem.source * (s / steps))
        sol = solve_hj(stage, tol=tol, max_iters=max_iters, u0=u, lam0=lam)
        u, lam = sol.u, sol.lam
    return sol


# ---------------------------------------------------------------------------
# one-dimensional periodic variant


@dataclass
class HJ1DSolution:
    u: np.ndarray
    lam: float
    residual_linf: float
    newton_iters: int
    period: float = 1.0

    @property
    def x(self):
        return np.arange(len(self.u)) * (self.period / len(self.u))


def _spectral_matrices_1d(n, period):
    k = np.fft.fftfreq(n, 1.0 / n) * (2 * np.pi / period)
    k_odd = k.copy()
    k_odd[n // 2] = 0.0
    eye = np.eye(n)
    fe = np.fft.fft(eye, axis=0)
    d1 = np.fft.ifft(1j * k_odd[:, None] * fe, axis=0).real
    d2 = np.fft.ifft(-(k**2)[:, None] * fe, axis=0).real
    return k_odd, k, d1, d2


def _derivatives_1d(u, k_odd, k):
    uh = np.fft.fft(u)
    return np.fft.ifft(1j * k_odd * uh).real, np.fft.ifft(-(k**2) * uh).real


def _numeric_derivative(h):
    def dh(q):
        e = 1e-6 * (1.0 + np.abs(q))
        return (h(q + e) - h(q - e)) / (2 * e)

    return dh


def solve_hj_1d(
    h: Callable,
    f,
    n: Optional[int] = None,
    period: float = 1.0,
    tol: float = 1e-10,
    max_iters: int = 60,
    dh: Optional[Callable] = None,
    u0=None,
) -> HJ1DSolution:
    """Solve -u'' + h(u') + λ = f on [0, L) periodic with ∫u = 0.

    ``f`` is either an array of n samples or a callable of x.  ``h`` must
    accept arrays; ``dh`` defaults to a central difference of ``h``.
    """
    if callable(f):
        if n is None:
            raise ValueError("n is required when f is callable")
        f = f(np.arange(n) * (period / n))
    f = np.asarray(f, dtype=float)
    n = len(f)
    if n < 8 or n % 2:
        raise ValueError("n must be even and >= 8")
    dh = dh or _numeric_derivative(h)
    k_odd, k, d1, d2 = _spectral_matrices_1d(n, period)
    u = np.zeros(n) if u0 is None else np.asarray(u0, dtype=float) - np.mean(u0)

    def residual(u, lam):
        ux, uxx = _derivatives_1d(u, k_odd, k)
        return -uxx + h(ux) + lam - f, ux

    _, ux = residual(u, 0.0)
    lam = float(np.mean(f - h(ux)))
    r, ux = residual(u, lam)
    history = []
    for it in range(max_iters + 1):
        rinf = float(np.max(np.abs(r)))
        history.append(rinf)
        if rinf <= tol:
            return HJ1DSolution(u - np.mean(u), lam, rinf, it, period)
        if it == max_iters:
            break
        jac = -d2 + dh(ux)[:, None] * d1 + 1.0 / n
        z = np.linalg.solve(jac, -r)
        dlam = float(np.mean(z))
        w = z - dlam
        r2 = _rms(r)
        t = 1.0
        while True:
            rt, uxt = residual(u + t * w, lam + t * dlam)
            if _rms(rt) < (1.0 - 1e-4 * t) * r2 or np.max(np.abs(rt)) <= tol:
                break
            t *= 0.5
            if t < 2.0**-12:
                raise NonConvergence("1D line search stalled", min(history), history)
        u, lam, r, ux = u + t * w, lam + t * dlam, rt, uxt
        if np.max(np.abs(u)) > BLOWUP_CAP:
            raise BlowUp("1D iterate exceeded the blow-up cap")
    raise NonConvergence(f"1D solve: no convergence in {max_iters} steps", min(history), history)


PHI_EPS = 1e-8

PHI = {
    "square": lambda t: t * t,
    "quartic": lambda t: t**4,
    "abs": lambda t: np.sqrt(t * t + PHI_EPS**2),
}


@dataclass
class ConvexityCheck:
    name: str
    lhs: float
    rhs: float
    passed: bool


def convexity_audit_1d(u, lam, f, h, phis=("square", "quartic", "abs"), period=1.0):
    """Compare ∫Φ(h(u')) with ∫Φ(f - λ) for each convex Φ.

    ``phis`` holds names from :data:`PHI` or callables.  Failures are
    reported, never raised.
    """
    u = np.asarray(u, dtype=float)
    f = np.asarray(f, dtype=float)
    n = len(u)
    k = np.fft.fftfreq(n, 1.0 / n) * (2 * np.pi / period)
    k[n // 2] = 0.0
    ux = np.fft.ifft(1j * k * np.fft.fft(u)).real
    dx = period / n
    hq = h(ux)
    out = []
    for phi in phis:
        name = phi if isinstance(phi, str) else getattr(phi, "__name__", "phi")
        fn = PHI[phi] if isinstance(phi, str) else phi
        lhs = float(np.sum(fn(hq)) * dx)
        rhs = float(np.sum(fn(f - lam)) * dx)
        out.append(ConvexityCheck(name, lhs, rhs, lhs <= rhs * (1 + 1e-8) + 1e-10))
    return out
