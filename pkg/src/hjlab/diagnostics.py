"""Measured quantities along the MFG regularity chain.

Every step of the chain  m^α ∈ L² ⇒ D²u, |∇u|² ∈ L² ⇒ D_pH(x, ∇u) ∈ L^r
⇒ m ∈ C^β ⇒ u ∈ C^{2,β}  is reported as a number computed from grid data.
The constants of the second-order energy estimate are not evaluated; its
two integrals are reported raw.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .hj import HamiltonianSpec
from .torus import Field2D, holder_quotient, lp_norm, ops_for

__all__ = ["BootstrapReport", "bootstrap_report", "refinement_stability"]

DEFAULT_BETAS = (0.25, 0.5, 0.75)


@dataclass
class BootstrapReport:
    lq_m_alpha: dict = field(default_factory=dict)
    w22_u: float = 0.0
    grad4_u: float = 0.0
    lr_drift: dict = field(default_factory=dict)
    holder_m: dict = field(default_factory=dict)
    holder_d2u: dict = field(default_factory=dict)
    second_order_energy: tuple = (0.0, 0.0)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["lq_m_alpha"] = {str(k): v for k, v in self.lq_m_alpha.items()}
        d["lr_drift"] = {str(k): v for k, v in self.lr_drift.items()}
        d["holder_m"] = {str(k): v for k, v in self.holder_m.items()}
        d["holder_d2u"] = {
            str(b): dict(entries) for b, entries in self.holder_d2u.items()
        }
        d["second_order_energy"] = list(self.second_order_energy)
        return d


def bootstrap_report(
    u: Field2D,
    m: Field2D,
    spec: HamiltonianSpec,
    alpha: float,
    betas=DEFAULT_BETAS,
    pairs: int = 100_000,
    seed: int = 0,
) -> BootstrapReport:
    ops = ops_for(u.n, u.period)
    spec = spec.at_resolution(u.n, u.period)
    uh = ops.fft(u.values)
    ux, uy = ops.grad(None, uh)
    uxx, uxy, uyy = ops.hess(None, uh)

    m_alpha = Field2D(m.values**alpha, m.period)
    lq = {q: lp_norm(m_alpha, q) for q in (2, 4, 8)}

    hess2 = uxx**2 + 2 * uxy**2 + uyy**2
    w22 = float(np.sqrt(ops.integral(hess2)))
    grad4 = ops.integral((ux**2 + uy**2) ** 2)

    ax, ay = spec.dp(ux, uy)
    drift = Field2D(np.hypot(ax, ay), u.period)
    lr = {r: lp_norm(drift, r) for r in (2, 3, 4)}
    lr[np.inf] = drift.max_abs()

    holder_m = {b: holder_quotient(m, b, pairs, seed) for b in betas}
    entries = {"u_xx": uxx, "u_xy": uxy, "u_yy": uyy}
    holder_d2u = {
        b: {k: holder_quotient(Field2D(v, u.period), b, pairs, seed) for k, v in entries.items()}
        for b in betas
    }

    power = m.values ** (0.5 * (alpha + 1.0))
    px, py = ops.grad(power)
    energy = (ops.integral(hess2 * m.values), ops.integral(px**2 + py**2))

    return BootstrapReport(
        lq_m_alpha=lq,
        w22_u=w22,
        grad4_u=grad4,
        lr_drift=lr,
        holder_m=holder_m,
        holder_d2u=holder_d2u,
        second_order_energy=energy,
    )


def _rel_change(a, b):
    scale = max(abs(a), abs(b))
    return 0.0 if scale == 0 else abs(b - a) / scale


def refinement_stability(problem, resolutions, beta: float = 0.5, solver=None):
    """Re-solve ``problem`` at each resolution and tabulate consecutive changes.

    Returns a list of dict rows; rows after the first carry relative changes
    of λ, max m and the Hölder quotient of m against the previous row, plus
    the absolute change of λ.
    """
    from .mfg import solve_mfg

    if len(resolutions) < 2:
        raise ValueError("need at least two resolutions")
    solver = solver or solve_mfg
    rows = []
    prev = None
    for n in resolutions:
        sol = solver(problem.with_resolution(n))
        row = {
            "n": n,
            "lambda": sol.lam,
            "max_m": sol.m.max_abs(),
            "holder_m": holder_quotient(sol.m, beta),
        }
        if prev is not None:
            row["d_lambda"] = abs(row["lambda"] - prev["lambda"])
            row["rel_lambda"] = _rel_change(prev["lambda"], row["lambda"])
            row["rel_max_m"] = _rel_change(prev["max_m"], row["max_m"])
            row["rel_holder_m"] = _rel_change(prev["holder_m"], row["holder_m"])
        else:
            row.update(d_lambda=0.0, rel_lambda=0.0, rel_max_m=0.0, rel_holder_m=0.0)
        rows.append(row)
        prev = row
    return rows
