import numpy as np
import pytest

from hjlab.diagnostics import bootstrap_report, refinement_stability
from hjlab.hj import HamiltonianSpec
from hjlab.mfg import CouplingSpec, MFGProblem, solve_mfg
from hjlab.torus import Field2D, gradient, integral, lp_norm

from .conftest import PI, bandlimited, field


def cos_problem(alpha, n=64):
    V = field(lambda x, y: 0.5 * np.cos(2 * PI * x), n=n)
    return MFGProblem(HamiltonianSpec(V=V), CouplingSpec(alpha=alpha), n=n)


@pytest.fixture(scope="module")
def cos_solution():
    return solve_mfg(cos_problem(1.0))


def test_uniform_report():
    z = Field2D.zeros(32)
    one = Field2D.constant(1.0, 32)
    rep = bootstrap_report(z, one, HamiltonianSpec(), alpha=2.5)
    assert all(v == pytest.approx(1.0, abs=1e-14) for v in rep.lq_m_alpha.values())
    assert rep.w22_u == 0 and rep.grad4_u == 0
    assert rep.second_order_energy == (0.0, 0.0)
    assert all(v == 0 for v in rep.holder_m.values())
    assert set(rep.lr_drift) == {2, 3, 4, np.inf}


def test_energy_identity_at_alpha_one(cos_solution):
    rep = cos_solution.diagnostics
    mx, my = gradient(cos_solution.m)
    direct = integral(mx * mx + my * my)
    assert rep.second_order_energy[1] == pytest.approx(direct, rel=1e-10, abs=1e-10)
    assert rep.second_order_energy[1] > 0


def test_all_entries_nonnegative(cos_solution):
    d = cos_solution.diagnostics.to_dict()
    values = list(d["lq_m_alpha"].values()) + list(d["lr_drift"].values()) + list(d["holder_m"].values())
    values += [v for entries in d["holder_d2u"].values() for v in entries.values()]
    values += [d["w22_u"], d["grad4_u"], *d["second_order_energy"]]
    assert all(np.isfinite(v) and v >= 0 for v in values)


@pytest.mark.parametrize("alpha", [0.5, 1.0, 3.0])
def test_lq_norms_nondecreasing(alpha):
    m = field(lambda x, y: np.exp(np.cos(2 * PI * x) * np.sin(2 * PI * y)))
    m = m * (1.0 / integral(m))
    rep = bootstrap_report(Field2D.zeros(64), m, HamiltonianSpec(), alpha, pairs=1000)
    q = [rep.lq_m_alpha[k] for k in (2, 4, 8)]
    assert q[0] <= q[1] <= q[2]


def test_drift_norms_quadratic_hamiltonian():
    u = bandlimited(64, 12, scale=0.5)
    m = Field2D.constant(1.0, 64)
    rep = bootstrap_report(u, m, HamiltonianSpec(), 1.0, pairs=1000)
    gx, gy = gradient(u)
    grad = Field2D(np.hypot(gx.values, gy.values))
    for r in (2, 3, 4):
        assert rep.lr_drift[r] == pytest.approx(2 * lp_norm(grad, r), rel=1e-14)
    assert rep.lr_drift[np.inf] == pytest.approx(2 * grad.max_abs(), rel=1e-14)
    ordered = [rep.lr_drift[r] for r in (2, 3, 4, np.inf)]
    assert ordered == sorted(ordered)


def test_w22_matches_laplacian_norm():
    u = bandlimited(32, 4)
    rep = bootstrap_report(u, Field2D.constant(1.0, 32), HamiltonianSpec(), 1.0, pairs=100)
    from hjlab.torus import laplacian

    lap = laplacian(u)
    assert rep.w22_u**2 == pytest.approx(integral(lap * lap), rel=1e-10)
    # with m ≡ 1 the weighted Hessian energy is the plain one
    assert rep.second_order_energy[0] == pytest.approx(rep.w22_u**2, rel=1e-12)


def test_refinement_uniform_problem():
    p = MFGProblem(HamiltonianSpec(), CouplingSpec(alpha=2.0), n=16)
    rows = refinement_stability(p, [16, 32])
    assert rows[1]["d_lambda"] <= 1e-12
    assert rows[1]["rel_max_m"] <= 1e-12
    assert rows[1]["rel_holder_m"] == 0.0


def test_refinement_ordering_and_stabilization():
    p = cos_problem(2.0, n=64)
    rows = refinement_stability(p, [16, 32, 64])
    assert rows[2]["d_lambda"] <= rows[1]["d_lambda"]
    rows = refinement_stability(p, [128, 256])
    assert rows[1]["d_lambda"] <= 1e-8
    assert rows[1]["rel_holder_m"] <= 0.1


def test_refinement_requires_two_resolutions():
    with pytest.raises(ValueError):
        refinement_stability(cos_problem(1.0), [64])
