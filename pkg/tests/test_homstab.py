import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hyerslab.algebra import AlgebraContext, MatrixElement
from hyerslab.control import PowerType
from hyerslab.errors import Divergent, InapplicableHypothesis, PreconditionViolated, ScalingHypothesisViolated
from hyerslab.homstab import (LinearityMode, UnimodularTriple, choose_M, decay_sequence, hom_residual,
                              idempotent_generators, recover_hom, unimodular_three_split, verify_complex_linearity,
                              verify_generated_hom, verify_hom_defect, verify_scaling)
from hyerslab.hyers import JensenParams, LimitMap, ProbeFunction
from hyerslab.perturb import (ConjugationCore, LatticeMaskedProbe, PerturbationSpec, SimilarityCore, UnitaryCore,
                              make_exact_hom, make_probe)
from hyerslab.sampling import sample_points, sample_tuples

P211 = JensenParams(2, 1, 1)
PHI5 = PowerType(0.5, 0.5, arity=5)


def conj_probe(ctx, delta=0.1, seed=3):
    return make_probe(ConjugationCore(), PerturbationSpec(delta=delta, p=0.5, seed=seed), ctx)


# -- residual -------------------------------------------------------------------------

def test_residual_zero_args(m2):
    f = conj_probe(m2)
    z = m2.zero()
    assert hom_residual(f, P211, m2, 1j, z, z, z, z, z) == 0


def test_residual_similarity_noise_oracle(m2):
    S = np.array([[2.0, 1.0], [0.5, 1.0]])
    f = make_probe(SimilarityCore(S), PerturbationSpec(delta=0.1, p=0.5, seed=2), m2)
    for mu, (x, y, u, v, w) in zip([1, 1j, cmath.exp(0.3j)], sample_tuples(m2, 3, 5, 4)):
        F = lambda a: f(MatrixElement(a)).entries  # noqa: E731
        X, Y, U, V, W = (e.entries for e in (x, y, u, v, w))
        z = (mu * X + mu * Y + U @ V @ W) / 2
        direct = 2 * F(z) - mu * F(X) - mu * F(Y) - F(U) @ F(V) @ F(W)
        assert hom_residual(f, P211, m2, mu, x, y, u, v, w) == pytest.approx(np.linalg.norm(direct), rel=1e-12)


def test_residual_sign_flag(m2):
    f = ProbeFunction(lambda a: a, m2)
    x, y = sample_points(m2, 2, 1)
    z = m2.zero()
    minus = hom_residual(f, P211, m2, 1, x, y, z, z, z)
    plus = hom_residual(f, P211, m2, 1, x, y, z, z, z, residual_sign="plus")
    assert minus <= 1e-14
    assert plus == pytest.approx(2 * m2.norm(y), rel=1e-12)


# -- recovery -------------------------------------------------------------------------

def test_recover_exact_hom(m2):
    f = make_exact_hom(m2, "unitary", seed=1)
    xs = sample_points(m2, 5, 2)
    res = recover_hom(f, P211, m2, PowerType(0.0, 0.5, 5), xs, 1e-9)
    assert all(res[i] == f(x) for i, x in enumerate(xs))


def test_recover_conjugation(m2):
    f = conj_probe(m2)
    xs = sample_points(m2, 10, 3)
    res = recover_hom(f, P211, m2, PHI5, xs, 1e-7)
    assert res.certified
    for i, x in enumerate(xs):
        assert m2.norm(res[i] - ConjugationCore()(x)) <= 1e-6
        assert m2.norm(f(x) - res[i]) <= res.bound_ft[i]


def test_recover_divergent(m2):
    with pytest.raises(Divergent):
        recover_hom(conj_probe(m2), P211, m2, PowerType(1, 2, 5), sample_points(m2, 1, 0), 1e-6)


# -- scaling / defect ---------------------------------------------------------------------

def test_scaling_examples():
    ctx = AlgebraContext.matrix(1)
    xs = [MatrixElement([[2.0]])]
    assert verify_scaling(lambda a: 3 * a, P211, ctx, xs, 1e-12).max_value() == 0
    one = MatrixElement([[1.0]])
    rep = verify_scaling(lambda a: a + one, P211, ctx, xs, 1e-9)
    assert rep.max_value() == 1.0 and not rep.passed


def test_defect_exact_hom(m2):
    T = make_exact_hom(m2, "similarity", S=np.diag([1.0, 2.0]))
    trip = sample_tuples(m2, 30, 3, 1)
    rep = verify_hom_defect(T, m2, trip, P211, PHI5, tol=1e-9)
    assert rep.passed
    zero = m2.zero()
    rep0 = verify_hom_defect(T, m2, [(zero, zero, zero)], P211, PHI5)
    assert rep0.max_hom_defect == 0


def test_defect_scaling_violation():
    ctx = AlgebraContext.matrix(1)
    one = MatrixElement([[1.0]])
    with pytest.raises(ScalingHypothesisViolated):
        verify_hom_defect(lambda a: a + one, ctx, [(one, one, one)], P211, PHI5)


def test_defect_recovered_conjugation(m2):
    f = conj_probe(m2)
    T = LimitMap(f, P211, m2, PHI5, 1e-8)
    trip = sample_tuples(m2, 20, 3, 2, lo=0.1, hi=2.0)
    rep = verify_hom_defect(T, m2, trip, P211, PHI5, tol=1e-6, scaling_tol=1e-8)
    assert rep.passed
    for (u, v, w), r in zip(trip, rep.select("hom_defect")):
        assert r.value <= 1e-6 * (1 + m2.norm(u) * m2.norm(v) * m2.norm(w))


@given(st.floats(0.0, 0.95), st.floats(0.01, 5), st.floats(0.01, 5), st.floats(0.01, 5))
def test_decay_factor(p, a, b, c):
    phi = PowerType(0.7, p, 5)
    seq = decay_sequence(phi, P211, [a, b, c], 20)
    ratios = seq[1:] / seq[:-1]
    assert np.allclose(ratios, 2.0 ** (p - 1), rtol=1e-10, atol=0)


# -- three-split ------------------------------------------------------------------------------

def test_split_zero_is_cube_roots():
    trip = unimodular_three_split(0, 1)
    assert abs(trip.total) <= 1e-12
    roots = sorted(np.angle([complex(m) for m in trip]))
    assert np.allclose(roots, [-2 * math.pi / 3, 0, 2 * math.pi / 3], atol=1e-12)


def test_split_examples():
    trip = unimodular_three_split(1, 5)
    assert trip.mu3 == 1
    assert abs(trip.total - 0.6) <= 1e-12
    trip = unimodular_three_split(0.5j, 3)
    assert abs(trip.total - 0.5j) <= 1e-12
    assert all(abs(abs(m) - 1) <= 1e-12 for m in trip)


def test_split_precondition():
    with pytest.raises(PreconditionViolated):
        unimodular_three_split(1, 4)
    with pytest.raises(PreconditionViolated):
        unimodular_three_split(1, 0)


def test_choose_M():
    assert choose_M(0) == 1
    assert choose_M(1) == 5
    assert choose_M(1.1) == 6
    with pytest.raises(ValueError):
        UnimodularTriple(1, 1, 2)


def test_split_soundness_many():
    rng = np.random.default_rng(123)
    lams = rng.uniform(-50, 50, 10_000) + 1j * rng.uniform(-50, 50, 10_000)
    for lam in lams:
        M = choose_M(lam)
        trip = unimodular_three_split(lam, M)
        assert max(abs(abs(m) - 1) for m in trip) <= 1e-12
        assert abs(trip.total - 3 * lam / M) <= 1e-12


@given(st.complex_numbers(max_magnitude=1e6, allow_nan=False, allow_infinity=False))
def test_split_property(lam):
    M = choose_M(lam)
    trip = unimodular_three_split(lam, M)
    assert abs(trip.total - 3 * lam / M) <= 1e-12


# -- linearity ----------------------------------------------------------------------------------

GRID = [complex(a, b) for a, b in [(2, 3), (1, 0), (0, 1), (-1, 0.5), (0.25, -4), (0, 0)]]


@pytest.mark.parametrize("mode", list(LinearityMode))
def test_linearity_linear_map(m2, mode):
    T = make_exact_hom(m2, "unitary", seed=5)
    xs = sample_points(m2, 5, 1)
    rep = verify_complex_linearity(T, m2, xs, GRID, mode, tol=1e-10)
    assert rep.passed
    for r in rep.select("linearity_direct"):
        if r.mu == 1:
            assert r.value == 0


def test_linearity_conjugation_flagged(m2):
    T = ConjugationCore()
    xs = sample_points(m2, 5, 2)
    rep = verify_complex_linearity(T, m2, xs, GRID, LinearityMode.ONE_AND_I, tol=1e-9)
    rows = rep.select("linearity_mu_i")
    for x, r in zip(xs, rows):
        assert r.value == pytest.approx(2 * m2.norm(T(x)), rel=1e-12)
        assert not r.passed
    full = verify_complex_linearity(T, m2, xs, [1j], LinearityMode.FULL_CIRCLE, tol=1e-9)
    assert not full.passed


# -- generated algebras -----------------------------------------------------------------------------

def test_idempotents_span(m3):
    S = idempotent_generators(m3)
    for u in S:
        assert m3.triple(u, u, u) == u
    basis = np.array([u.entries.ravel() for u in S])
    assert np.linalg.matrix_rank(basis) == 9


def test_generated_exact_hom(m2):
    f = make_exact_hom(m2, "unitary", seed=4)
    S = idempotent_generators(m2)
    zs = sample_points(m2, 3, 1) + [m2.zero()]
    rep = verify_generated_hom(f, f, m2, S, zs, P211, 1, 3, 1e-9)
    assert rep.passed
    zero_rows = [r for r in rep.rows if r.check == "generated_scaled_limit" and r.sample_id % 4 == 3]
    assert zero_rows and all(r.value == 0 for r in zero_rows)


def test_generated_masked_noise(m2):
    core = UnitaryCore.random(m2, 2)
    S = idempotent_generators(m2)
    zs = sample_points(m2, 3, 5)
    masked = list(S) + zs + [m2.triple(a, b, z) for a in S for b in S for z in zs]
    f = LatticeMaskedProbe(core, PerturbationSpec(delta=0.1, seed=9), m2, masked)
    T = LimitMap(f, P211, m2, PowerType(0.3, 0.5), 1e-8)
    rep = verify_generated_hom(f, T, m2, S, zs, P211, 1, 3, 1e-6, samples_xy=sample_tuples(m2, 3, 2, 6))
    assert rep.passed
    assert rep.select("hom_defect_generated")


def test_generated_rejects_plain_noise(m2):
    f = make_probe(UnitaryCore.random(m2, 2), PerturbationSpec(delta=0.1, seed=9), m2)
    S = idempotent_generators(m2)
    with pytest.raises(InapplicableHypothesis):
        verify_generated_hom(f, f, m2, S, sample_points(m2, 2, 1), P211, 1, 2, 1e-9)
