"""Closed-form smoothness thresholds for second-order MFGs.

Each regime maps (n, γ, α) to the best available explicit bound.  For power
couplings the bound is on α; for logarithmic couplings it is on γ.  A
formula with a nonpositive denominator yields +inf and the note
``nonpositive-denominator``.  Verdicts at equality are unsatisfied and
carry the note ``critical``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

__all__ = [
    "REGIMES",
    "RegimeQuery",
    "ThresholdVerdict",
    "evaluate",
    "regime_table",
    "table_to_csv",
    "conjugate",
]

INF = math.inf

REGIMES = (
    "stationary-defocusing",
    "stationary-focusing",
    "stationary-log",
    "parabolic-defocusing",
    "parabolic-focusing",
    "parabolic-log",
)

# Short descriptions printed next to each formula id.
FORMULAS = {
    "sd-2d-quadratic": "n = 2, gamma = 2: smooth for every alpha > 0",
    "sd-slow-growth": "1 < gamma < n/(n-1): smooth for every alpha > 0",
    "sd-maximal-regularity": "alpha < gamma'/(n-2-gamma')",
    "sf-base": "alpha < gamma'/n",
    "sf-small-data": "alpha < gamma'/(n-gamma') for small sigma",
    "sl-growth": "gamma < 2 + 1/(n-1)",
    "pd-weak-coercive": "1 < gamma < (n+2)/(n+1): smooth for every alpha > 0",
    "pd-low-dimension": "n <= 2, gamma = 2: smooth for every alpha > 0",
    "pd-subquadratic": "alpha < gamma'/(n-2) * n/(n+2-gamma'), (n+2)/(n+1) < gamma <= 2",
    "pd-superquadratic": "alpha < 2/(n(gamma-1)-2), gamma >= 2",
    "pd-improved": "alpha < gamma'[(n+2)(gamma-1)-2] / ((n+2-gamma')[n(gamma-1)-2]), gamma > 2",
    "pf-weak-coercive": "1 < gamma < (n+2)/(n+1): smooth for every alpha > 0",
    "pf-subquadratic": "alpha < gamma'/n, (n+2)/(n+1) < gamma <= 2",
    "pf-superquadratic": "alpha < 2/((n+2)(gamma-1)-2), gamma >= 2",
    "pf-small-data": "alpha >= 2/n with small sigma: smooth",
    "pl-growth": "gamma < 5/4",
}


def conjugate(gamma: float) -> float:
    return gamma / (gamma - 1.0)


@dataclass(frozen=True)
class RegimeQuery:
    n: int
    gamma: float
    alpha: float = 1.0
    regime: str = "stationary-defocusing"
    small_data: bool = False
    improved: bool = False

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if not self.gamma > 1:
            raise ValueError("gamma must exceed 1")
        if self.regime not in REGIMES:
            raise ValueError(f"unknown regime {self.regime!r}; choose from {', '.join(REGIMES)}")
        if not self.regime.endswith("log") and not self.alpha > 0:
            raise ValueError("alpha must be positive")

    @property
    def gamma_conj(self) -> float:
        return conjugate(self.gamma)


@dataclass
class ThresholdVerdict:
    threshold: float
    satisfied: bool
    formula_id: str
    variable: str = "alpha"
    notes: list = field(default_factory=list)

    @property
    def formula(self) -> str:
        return FORMULAS[self.formula_id]

    def to_dict(self) -> dict:
        return {
            "threshold": self.threshold,
            "satisfied": self.satisfied,
            "formula_id": self.formula_id,
            "formula": self.formula,
            "variable": self.variable,
            "notes": list(self.notes),
        }


def _ratio(num, den, notes):
    if den <= 0:
        notes.append("nonpositive-denominator")
        return INF
    return num / den


def _stationary_defocusing(q, notes):
    n, g, gc = q.n, q.gamma, q.gamma_conj
    if n == 2 and g == 2:
        return INF, "sd-2d-quadratic"
    if n == 1 or g < n / (n - 1):
        return INF, "sd-slow-growth"
    return _ratio(gc, n - 2 - gc, notes), "sd-maximal-regularity"


def _stationary_focusing(q, notes):
    n, gc = q.n, q.gamma_conj
    if q.small_data:
        return _ratio(gc, n - gc, notes), "sf-small-data"
    return gc / n, "sf-base"


def _stationary_log(q, notes):
    if q.n == 1:
        return INF, "sl-growth"
    return 2.0 + 1.0 / (q.n - 1), "sl-growth"


def _parabolic_defocusing(q, notes):
    n, g, gc = q.n, q.gamma, q.gamma_conj
    if g < (n + 2) / (n + 1):
        return INF, "pd-weak-coercive"
    if n <= 2 and g == 2:
        return INF, "pd-low-dimension"
    if q.improved and g > 2:
        den = (n + 2 - gc) * (n * (g - 1) - 2)
        return _ratio(gc * ((n + 2) * (g - 1) - 2), den, notes), "pd-improved"
    if g <= 2:
        if n - 2 <= 0:
            notes.append("nonpositive-denominator")
            return INF, "pd-subquadratic"
        return _ratio(gc * n, (n - 2) * (n + 2 - gc), notes), "pd-subquadratic"
    return _ratio(2.0, n * (g - 1) - 2, notes), "pd-superquadratic"


def _parabolic_focusing(q, notes):
    n, g, gc = q.n, q.gamma, q.gamma_conj
    if g < (n + 2) / (n + 1):
        return INF, "pf-weak-coercive"
    if q.small_data and q.alpha >= 2.0 / n:
        return INF, "pf-small-data"
    if g <= 2:
        return gc / n, "pf-subquadratic"
    return _ratio(2.0, (n + 2) * (g - 1) - 2, notes), "pf-superquadratic"


def _parabolic_log(q, notes):
    return 1.25, "pl-growth"


_DISPATCH = {
    "stationary-defocusing": _stationary_defocusing,
    "stationary-focusing": _stationary_focusing,
    "stationary-log": _stationary_log,
    "parabolic-defocusing": _parabolic_defocusing,
    "parabolic-focusing": _parabolic_focusing,
    "parabolic-log": _parabolic_log,
}


def evaluate(query: RegimeQuery) -> ThresholdVerdict:
    notes: list = []
    threshold, fid = _DISPATCH[query.regime](query, notes)
    variable = "gamma" if query.regime.endswith("log") else "alpha"
    value = query.gamma if variable == "gamma" else query.alpha
    if threshold == INF:
        satisfied = True
    else:
        satisfied = value < threshold
        if value == threshold:
            notes.append("critical")
    if query.gamma == 2 and variable == "alpha" and threshold != INF and query.regime.endswith("defocusing"):
        notes.append("purely-quadratic-H-smooth-for-all-alpha")
    return ThresholdVerdict(threshold, satisfied, fid, variable, notes)


def regime_table(n: int, gamma_grid, alpha_grid, regime: str, small_data: bool = False, improved: bool = False):
    """Verdict matrix indexed [gamma][alpha]."""
    gamma_grid, alpha_grid = list(gamma_grid), list(alpha_grid)
    if not gamma_grid or not alpha_grid:
        raise ValueError("grids must be nonempty")
    return [
        [evaluate(RegimeQuery(n, g, a, regime, small_data, improved)) for a in alpha_grid]
        for g in gamma_grid
    ]


def table_to_csv(n, gamma_grid, alpha_grid, table, regime) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["regime", "n", "gamma", "alpha", "threshold", "satisfied", "formula_id", "notes"])
    for g, row in zip(gamma_grid, table):
        for a, v in zip(alpha_grid, row):
            writer.writerow([regime, n, repr(g), repr(a), repr(v.threshold), int(v.satisfied), v.formula_id, ";".join(v.notes)])
    return buf.getvalue()
