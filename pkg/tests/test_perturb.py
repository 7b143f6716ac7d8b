import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hyerslab.algebra import AlgebraContext, MatrixElement, PolyElement
from hyerslab.control import phi_eval
from hyerslab.errors import DenominatorDegenerate, SingularS
from hyerslab.homstab import hom_residual
from hyerslab.hyers import JensenParams, jensen_residual
from hyerslab.perturb import (FiveSlotPower, IdentityCore, LatticeMaskedProbe, LinearCore, PerturbationSpec,
                              PolySignCore, SimilarityCore, TwoSlotPower, UnitaryCore, calibrate_epsilon,
                              calibration_tuples, make_exact_hom, make_probe)
from hyerslab.sampling import sample_points, sample_tuples

S1 = AlgebraContext.matrix(1)
P211 = JensenParams(2, 1, 1)


def test_delta_zero_is_core(m2):
    core = LinearCore.random(m2, 4)
    f = make_probe(core, PerturbationSpec(delta=0.0), m2)
    for x in sample_points(m2, 10, 1):
        assert f(x) == core(x)


def test_scalar_envelope_at_four():
    f = make_probe(IdentityCore(), PerturbationSpec(delta=0.1, p=0.5, seed=3), S1)
    x = MatrixElement([[4.0]])
    assert abs(f(x).entries[0, 0] - 4.0) == pytest.approx(0.2, rel=1e-14)
    fixed = make_probe(IdentityCore(), PerturbationSpec(delta=0.1, p=0.5, direction="fixed"), S1)
    assert fixed(x).entries[0, 0] == pytest.approx(4.2, rel=1e-15)


def test_zero_maps_to_zero(m2, poly):
    for ctx in (m2, poly):
        f = make_probe(IdentityCore(), PerturbationSpec(delta=0.5, p=0.5, seed=1), ctx)
        assert ctx.is_zero(f(ctx.zero()))


def test_bounded_kind(m2):
    spec = PerturbationSpec(kind="bounded", delta=0.3, seed=2)
    f = make_probe(IdentityCore(), spec, m2)
    for x in sample_points(m2, 20, 3):
        assert m2.norm(f(x) - x) == pytest.approx(0.3, rel=1e-12)
    assert spec.envelope(0.0) == 0.0


def test_ray_invariance(m2):
    # the direction depends only on the ray, so b(c x) = c**p b(x) for c > 0
    spec = PerturbationSpec(delta=0.2, p=0.5, seed=9)
    f = make_probe(lambda x: m2.zero(), spec, m2)
    for x in sample_points(m2, 10, 4):
        for c in (2.0, 4.0, 1024.0):
            assert m2.norm(f(c * x) - c ** 0.5 * f(x)) <= 1e-12 * m2.norm(f(c * x))


# -- calibration ------------------------------------------------------------------

def test_calibration_delta_zero(m2):
    f = make_probe(LinearCore.random(m2, 1), PerturbationSpec(delta=0.0), m2)
    cal = calibrate_epsilon(f, P211, m2, TwoSlotPower(0.5), 1000)
    assert cal.sup_ratio < 1e-14
    zero = make_probe(lambda x: S1.zero(), PerturbationSpec(delta=0.0), S1)
    assert calibrate_epsilon(zero, P211, S1, TwoSlotPower(0.5), 1000).eps == 0.0
    # an additive core leaves only floating-point rounding in the residual
    g = make_probe(IdentityCore(), PerturbationSpec(delta=0.0), S1)
    assert calibrate_epsilon(g, P211, S1, TwoSlotPower(0.5), 1000).eps <= 1e-14


def test_calibration_scalar_range():
    f = make_probe(IdentityCore(), PerturbationSpec(delta=0.1, p=0.5, direction="fixed"), S1)
    cal = calibrate_epsilon(f, P211, S1, TwoSlotPower(0.5), 2000, seed=0)
    assert 0.1 <= cal.eps <= 0.35
    # analytic bound delta (1 + sqrt 2) on the true supremum
    assert cal.sup_ratio <= 0.1 * (1 + math.sqrt(2))
    assert cal.safety_factor == 1.05 and cal.eps == pytest.approx(1.05 * cal.sup_ratio)


def test_calibration_linear_in_delta(m2):
    core = LinearCore.random(m2, 2)
    e1 = calibrate_epsilon(make_probe(core, PerturbationSpec(delta=0.1, seed=5), m2), P211, m2,
                           TwoSlotPower(0.5), 1000, seed=1).eps
    e2 = calibrate_epsilon(make_probe(IdentityCore(), PerturbationSpec(delta=0.2, seed=5), m2), P211, m2,
                           TwoSlotPower(0.5), 1000, seed=1).eps
    # residual of an additive core is pure rounding, so only the noise scales
    assert e2 == pytest.approx(2 * e1, rel=1e-6)
    e3 = calibrate_epsilon(make_probe(IdentityCore(), PerturbationSpec(delta=0.1, seed=5), m2), P211, m2,
                           TwoSlotPower(0.5), 1000, seed=1).eps
    assert e2 == pytest.approx(2 * e3, rel=1e-10)


def test_calibration_budget():
    f = make_probe(IdentityCore(), PerturbationSpec(delta=0.1), S1)
    with pytest.raises(ValueError):
        calibrate_epsilon(f, P211, S1, TwoSlotPower(0.5), 999)


def test_calibration_degenerate(monkeypatch):
    import hyerslab.perturb as pm
    f = make_probe(IdentityCore(), PerturbationSpec(delta=0.1), S1)
    monkeypatch.setattr(pm, "DENOMINATOR_FLOOR", math.inf)
    with pytest.raises(DenominatorDegenerate):
        calibrate_epsilon(f, P211, S1, TwoSlotPower(0.5), 1000)


def test_calibration_soundness_two_slot(m2):
    core = LinearCore.random(m2, 8)
    f = make_probe(core, PerturbationSpec(delta=0.1, p=0.5, seed=11), m2)
    phi = calibrate_epsilon(f, P211, m2, TwoSlotPower(0.5), 2000, seed=1).control()
    fails = 0
    for mu, (x, y) in calibration_tuples(m2, 2, 10_000, seed=99):
        fails += jensen_residual(f, P211, m2, x, y) > phi_eval(phi, [x, y], m2)
    assert fails == 0


def test_calibration_soundness_five_slot(m2):
    core = UnitaryCore.random(m2, 3)
    f = make_probe(core, PerturbationSpec(delta=0.05, p=0.5, seed=4), m2)
    phi = calibrate_epsilon(f, P211, m2, FiveSlotPower(0.5), 2000, seed=1).control()
    fails = 0
    for mu, args in calibration_tuples(m2, 5, 2000, seed=77):
        fails += hom_residual(f, P211, m2, mu, *args) > phi_eval(phi, args, m2)
    assert fails == 0


# -- exact homomorphisms ------------------------------------------------------------

def test_similarity_identity(m2):
    f = make_exact_hom(m2, "similarity", S=np.eye(2))
    for x in sample_points(m2, 5, 0):
        assert f(x) == x


def test_poly_sign_negation(poly):
    f = make_exact_hom(poly, "poly_sign", sigma=-1, c=1.0)
    for p, q, r in sample_tuples(poly, 10, 3, 1):
        assert f(p) == -p
        assert poly.norm(poly.triple(f(p), f(q), f(r)) + poly.triple(p, q, r)) == 0


def test_poly_sign_scaling(poly):
    f = make_exact_hom(poly, "poly_sign", sigma=1, c=2.0)
    p = PolyElement({1: 1, 3: 1})
    assert f(p).as_dict() == {1: 2, 3: 8}


def test_similarity_diag_is_hom(m2):
    f = make_exact_hom(m2, "similarity", S=np.diag([1.0, 2.0]))
    for u, v, w in sample_tuples(m2, 50, 3, 2):
        defect = m2.norm(f(m2.triple(u, v, w)) - m2.triple(f(u), f(v), f(w)))
        assert defect <= 1e-12 * (1 + m2.norm(u) * m2.norm(v) * m2.norm(w))


@pytest.mark.parametrize("kind,kw", [("similarity", {"S": np.diag([1.0, 3.0])}), ("unitary", {"seed": 2})])
def test_exact_hom_residual(m2, kind, kw):
    f = make_exact_hom(m2, kind, **kw)
    for mu, args in calibration_tuples(m2, 5, 200, 3):
        scale = 1 + sum(m2.norm(a) for a in args) + math.prod(m2.norm(a) for a in args[2:])
        assert hom_residual(f, P211, m2, mu, *args) <= 1e-9 * scale


def test_singular_similarity():
    with pytest.raises(SingularS):
        SimilarityCore(np.array([[1.0, 0.0], [0.0, 1e-6]]))
    with pytest.raises(SingularS):
        UnitaryCore(np.array([[1.0, 1.0], [0.0, 1.0]]))
    with pytest.raises(SingularS):
        PolySignCore(2)


def test_lattice_mask(m2):
    core = UnitaryCore.random(m2, 1)
    masked = sample_points(m2, 3, 1)
    f = LatticeMaskedProbe(core, PerturbationSpec(delta=0.1, seed=3), m2, masked)
    for x in masked:
        assert f(x) == core(x) and f(8.0 * x) == core(8.0 * x)
    other = sample_points(m2, 3, 2)
    assert all(m2.norm(f(x) - core(x)) > 0 for x in other)


# -- invariants ------------------------------------------------------------------------

@given(seed=st.integers(0, 2**63 - 1), stream=st.integers(0, 1000))
def test_determinism(seed, stream):
    ctx = AlgebraContext.matrix(2)
    spec = PerturbationSpec(delta=0.1, p=0.5, seed=seed)
    f = make_probe(LinearCore.random(ctx, 1), spec, ctx)
    g = make_probe(LinearCore.random(ctx, 1), spec, ctx)
    x = sample_points(ctx, 1, seed % 1000, stream)[0]
    assert f(x).entries.tobytes() == g(x).entries.tobytes()


@pytest.mark.parametrize("ctx", [AlgebraContext.matrix(3), AlgebraContext.poly()], ids=["m3", "poly"])
def test_envelope(ctx):
    core = IdentityCore()
    spec = PerturbationSpec(delta=0.1, p=0.5, seed=8)
    f = make_probe(core, spec, ctx)
    for x in sample_points(ctx, 10_000, 6, lo=1e-3, hi=1e3):
        assert ctx.norm(f(x) - x) <= 0.1 * ctx.norm(x) ** 0.5 * (1 + 1e-12)
