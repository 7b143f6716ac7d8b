"""Stability of ternary homomorphisms: the five-variable residual, recovery of
the homomorphism, and finite-sample checks of the structural conclusions
(ternary multiplicativity, complex linearity, generated-algebra variant).
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import control
from .algebra import AlgebraContext, Element, as_scalar
from .control import ControlFunction, Direction
from .errors import InapplicableHypothesis, PreconditionViolated, ScalingHypothesisViolated
from .hyers import HyersResult, JensenParams, hyers_limit
from .report import HomReport, Report

MODULUS_TOL = 1e-12


def hom_residual(f, params: JensenParams, ctx: AlgebraContext, mu, x, y, u, v, w,
                 residual_sign: str = "minus") -> float:
    """``||r f((mu s x + mu t y + [uvw]) / r) - mu s f(x) - mu t f(y) - [f(u) f(v) f(w)]||``.

    ``residual_sign="plus"`` adds the ``mu t f(y)`` term instead.
    """
    ctx.check(x, y, u, v, w)
    mu = as_scalar(mu)
    r, s, t = params.r, params.s, params.t
    sign = -1.0 if residual_sign == "minus" else 1.0
    z = (mu * s * x + mu * t * y + ctx.triple(u, v, w)) / r
    res = r * f(z) - (mu * s) * f(x) + (sign * mu * t) * f(y) - ctx.triple(f(u), f(v), f(w))
    return ctx.norm(res)


def recover_hom(f, params: JensenParams, ctx: AlgebraContext, phi5: ControlFunction, samples,
                tol: float, n_cap: int = 64) -> HyersResult:
    """Hyers limit of ``f`` with the five-slot control restricted to ``(x, y, 0, 0, 0)``.

    Also records the bound ``phi-tilde(x, x, 0, 0, 0)`` per sample in ``bound_ft``.
    """
    if phi5.arity != 5:
        raise ValueError("recover_hom needs a five-slot control")
    res = hyers_limit(f, params, ctx, phi5, samples, tol, n_cap)
    for sid, x in res.samples.items():
        nx = ctx.norm(x)
        sv = control.phi_tilde(phi5, params.r, params.k, [nx, nx, 0.0, 0.0, 0.0], direction=params.direction)
        res.bound_ft[sid] = sv.upper
    return res


def verify_scaling(T: Callable, params: JensenParams, ctx: AlgebraContext, samples: Sequence[Element],
                   tol: float) -> Report:
    """``||T((r/s) x) - (r/s) T(x)|| <= tol (1 + ||x||)``."""
    rho = float(params.ratio)
    report = Report("scaling")
    for sid, x in enumerate(samples):
        v = ctx.norm(T(rho * x) - rho * T(x))
        report.add("scaling", sid, v, tol * (1.0 + ctx.norm(x)))
    return report


def decay_sequence(phi5: ControlFunction, params: JensenParams, norms_uvw: Sequence[float], n_probe: int,
                   exponent: int = 1) -> np.ndarray:
    """``(r/s)**(-exponent n) phi5(0, 0, (r/s)**n u, (r/s)**n v, (r/s)**n w)`` for ``n = 0..n_probe``."""
    rho = params.r / params.k
    ns = np.arange(n_probe + 1, dtype=float)
    if params.direction is Direction.BACKWARD:
        ns = -ns
    args = np.zeros((len(ns), 5))
    args[:, 2:] = np.power(rho, ns)[:, None] * np.asarray(norms_uvw, dtype=float)[None, :]
    return np.power(rho, -exponent * ns) * phi5.evaluate(args)


def verify_hom_defect(T: Callable, ctx: AlgebraContext, triples: Sequence[tuple], params: JensenParams,
                      phi5: ControlFunction, n_probe: int = 20, tol: float = 1e-6,
                      scaling_tol: float = 1e-8) -> HomReport:
    """Ternary defect ``||T([uvw]) - [T(u) T(v) T(w)]||`` and the vanishing of its bound.

    The decay rows check that the control sequence behind the defect bound
    is nonincreasing; for power-type controls they also check the exact
    per-step factor ``(r/s)**(p-1)``.
    """
    firsts = [t[0] for t in triples]
    sc = verify_scaling(T, params, ctx, firsts, scaling_tol)
    if not sc.passed:
        raise ScalingHypothesisViolated(
            f"T((r/s)x) != (r/s)T(x): max defect {sc.max_value():.3g}")
    report = HomReport("hom_defect")
    report.extend(sc)
    for sid, (u, v, w) in enumerate(triples):
        ctx.check(u, v, w)
        val = ctx.norm(T(ctx.triple(u, v, w)) - ctx.triple(T(u), T(v), T(w)))
        scale = 1.0 + ctx.norm(u) * ctx.norm(v) * ctx.norm(w)
        report.add("hom_defect", sid, val, tol * scale)
    if triples:
        u, v, w = triples[0]
        seq = decay_sequence(phi5, params, [ctx.norm(u), ctx.norm(v), ctx.norm(w)], n_probe)
        expected = None
        if isinstance(phi5, control.PowerType) and phi5.eps > 0:
            expected = control.geometric_ratio(phi5, params.r / params.k, params.direction)
        for n in range(1, len(seq)):
            report.add("hom_defect_decay_monotone", n, seq[n], seq[n - 1])
            if expected is not None and seq[n - 1] > 0:
                ratio = seq[n] / seq[n - 1]
                report.add("hom_defect_decay_ratio", n, abs(ratio - expected), 1e-10 * expected)
        report.meta["decay_sequence"] = seq.tolist()
    return report


@dataclass(frozen=True)
class UnimodularTriple:
    mu1: complex
    mu2: complex
    mu3: complex

    def __post_init__(self):
        for m in (self.mu1, self.mu2, self.mu3):
            if abs(abs(m) - 1.0) > MODULUS_TOL:
                raise ValueError(f"{m!r} is not unimodular")

    def __iter__(self):
        return iter((self.mu1, self.mu2, self.mu3))

    @property
    def total(self) -> complex:
        return self.mu1 + self.mu2 + self.mu3


def choose_M(lam) -> int:  # noqa: N802
    """``ceil(4|lambda|) + 1``, an integer strictly greater than ``4|lambda|``."""
    return math.ceil(4.0 * abs(as_scalar(lam))) + 1


def unimodular_three_split(lam, M: int) -> UnimodularTriple:
    """Three unimodular numbers summing to ``3 lambda / M`` (needs ``M > 4|lambda|``).

    ``mu3`` points along ``w = 3 lambda / M``; the remainder ``v = w - mu3``
    has modulus at most 1 and is split symmetrically as
    ``exp(i(theta + alpha)) + exp(i(theta - alpha))`` with
    ``alpha = arccos(|v| / 2)``.
    """
    lam = as_scalar(lam)
    if int(M) != M or M < 1 or not M > 4.0 * abs(lam):
        raise PreconditionViolated(f"need a natural number M > 4|lambda| = {4 * abs(lam):.6g}, got {M}")
    w = 3.0 * lam / M
    aw = abs(w)
    mu3 = w / aw if aw > 0 else 1.0 + 0j
    mu3 = mu3 / abs(mu3)
    v = w - mu3
    theta = math.atan2(v.imag, v.real) if v != 0 else 0.0
    alpha = math.acos(min(1.0, abs(v) / 2.0))
    mu1 = complex(math.cos(theta + alpha), math.sin(theta + alpha))
    mu2 = complex(math.cos(theta - alpha), math.sin(theta - alpha))
    return UnimodularTriple(mu1, mu2, mu3)


class LinearityMode(str, enum.Enum):
    FULL_CIRCLE = "full_circle"
    ONE_AND_I = "one_and_i"


def verify_complex_linearity(T: Callable, ctx: AlgebraContext, samples: Sequence[Element], scalars,
                             mode: LinearityMode = LinearityMode.FULL_CIRCLE, tol: float = 1e-9) -> HomReport:
    """Finite-sample check of ``T(lambda x) = lambda T(x)``.

    FULL_CIRCLE rebuilds ``T(lambda x)`` from unit-circle values via the
    three-split with ``M = ceil(4|lambda|) + 1``. ONE_AND_I uses only
    ``T(i x) = i T(x)`` and real homogeneity, with ``lambda = a1 + i a2``.
    Bounds are ``tol * (1 + |lambda|) * (1 + ||x||)``.
    """
    mode = LinearityMode(mode)
    scalars = [as_scalar(s) for s in scalars]
    report = HomReport(f"linearity_{mode.value}")
    nsc = max(len(scalars), 1)
    for xi, x in enumerate(samples):
        Tx = T(x)
        xs = 1.0 + ctx.norm(x)
        if mode is LinearityMode.ONE_AND_I:
            Tix = T(1j * x)
            report.add("linearity_mu_i", xi, ctx.norm(Tix - 1j * Tx), 2 * tol * xs, mu=1j)
        for li, lam in enumerate(scalars):
            sid = xi * nsc + li
            bound = tol * (1.0 + abs(lam)) * xs
            direct = ctx.norm(T(lam * x) - lam * Tx)
            report.add("linearity_direct", sid, direct, bound, mu=lam)
            if mode is LinearityMode.FULL_CIRCLE:
                M = choose_M(lam)
                trip = unimodular_three_split(lam, M)
                parts = [T(m * x) for m in trip]
                for m, Tm in zip(trip, parts):
                    report.add("linearity_unit_circle", sid, ctx.norm(Tm - m * Tx), 2 * tol * xs, mu=m)
                rebuilt = (M / 3.0) * (parts[0] + parts[1] + parts[2])
                report.add("linearity_split_rebuild", sid, ctx.norm(rebuilt - lam * Tx),
                           bound * M, mu=lam)
            else:
                a1, a2 = lam.real, lam.imag
                real_part = ctx.norm(T(a1 * x) - a1 * Tx)
                report.add("linearity_real", sid, real_part, tol * (1.0 + abs(a1)) * xs, mu=complex(a1))
                rebuilt = a1 * Tx + a2 * Tix
                report.add("linearity_decomposed", sid, ctx.norm(rebuilt - lam * Tx), bound, mu=lam)
    return report


def verify_generated_hom(f, T: Callable, ctx: AlgebraContext, S: Sequence[Element], samples_z: Sequence[Element],
                         params: JensenParams, n_lo: int, n_hi: int, tol: float,
                         samples_xy: Sequence[tuple[Element, Element]] | None = None) -> HomReport:
    """Numerical chain for algebras spanned by a generating set ``S``.

    First checks the hypothesis ``f(rho**2n [s1 s2 z]) = [f(rho**n s1) f(rho**n s2) f(z)]``
    for ``n_lo <= n <= n_hi``. Then reports (a) ``T([s1 s2 z])`` against
    ``[T(s1) T(s2) f(z)]`` and the ``rho**-2n`` scaled estimate, and (b)
    the upgrade ``T([x y z]) = [T(x) T(y) T(z)]`` through the
    ``rho**-n [T(x) T(y) f(rho**n z)]`` limit. The ``(x, y)`` pairs for (b)
    default to neighbouring ``z`` samples.
    """
    if params.direction is not Direction.FORWARD:
        raise ValueError("the generated-algebra chain is stated for the forward sequence")
    rho = params.ratio
    report = HomReport("generated")
    for n in range(n_lo, n_hi + 1):
        up = float(rho ** n)
        up2 = float(rho ** (2 * n))
        for i, s1 in enumerate(S):
            for j, s2 in enumerate(S):
                for k, z in enumerate(samples_z):
                    lhs = f(up2 * ctx.triple(s1, s2, z))
                    rhs = ctx.triple(f(up * s1), f(up * s2), f(z))
                    scale = 1.0 + up2 * ctx.norm(s1) * ctx.norm(s2) * ctx.norm(z)
                    if ctx.norm(lhs - rhs) > tol * scale:
                        raise InapplicableHypothesis(
                            f"generating identity fails at n={n}, s1=#{i}, s2=#{j}, z=#{k}")
    down2 = float(rho ** (-2 * n_hi))
    up2 = float(rho ** (2 * n_hi))
    nz = max(len(samples_z), 1)
    sid = 0
    for s1 in S:
        for s2 in S:
            for z in samples_z:
                target = ctx.triple(T(s1), T(s2), f(z))
                scale = 1.0 + ctx.norm(s1) * ctx.norm(s2) * ctx.norm(z)
                est = down2 * f(up2 * ctx.triple(s1, s2, z))
                report.add("generated_scaled_limit", sid, ctx.norm(est - target), tol * scale)
                report.add("generated_generator_hom", sid, ctx.norm(T(ctx.triple(s1, s2, z)) - target), tol * scale)
                sid += 1
    up = float(rho ** n_hi)
    down = float(rho ** -n_hi)
    for i, z in enumerate(samples_z):
        if samples_xy is not None:
            x, y = samples_xy[i % len(samples_xy)]
        else:
            x, y = samples_z[(i + 1) % nz], samples_z[(i + 2) % nz]
        Tx, Ty = T(x), T(y)
        full = ctx.triple(Tx, Ty, T(z))
        scale = 1.0 + ctx.norm(x) * ctx.norm(y) * ctx.norm(z)
        mid = down * ctx.triple(Tx, Ty, f(up * z))
        report.add("generated_upgrade_limit", i, ctx.norm(mid - full), tol * scale)
        report.add("hom_defect_generated", i, ctx.norm(T(ctx.triple(x, y, z)) - full), tol * scale)
    return report


def idempotent_generators(ctx: AlgebraContext) -> list[Element]:
    """Elements with ``u**3 = u`` spanning the algebra.

    Matrices: the diagonal units ``E_ii`` and ``E_ii + E_ij`` (i != j).
    """
    from .algebra import Kind, MatrixElement

    if ctx.kind is not Kind.MATRIX:
        raise ValueError("the odd-polynomial algebra has no spanning set of idempotents")
    d = ctx.dim
    out = []
    for i in range(d):
        e = np.zeros((d, d), dtype=complex)
        e[i, i] = 1
        out.append(MatrixElement(e))
        for j in range(d):
            if j != i:
                g = e.copy()
                g[i, j] = 1
                out.append(MatrixElement(g))
    return out
