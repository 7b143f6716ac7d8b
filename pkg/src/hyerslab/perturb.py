"""Deterministic test maps: exact additive cores, exact ternary homomorphisms,
controlled perturbations, and the empirical epsilon calibration.

A probe is ``f(x) = core(x) + b(x)`` with ``b(x) = delta * ||x||**p * u(x)``.
The unit element ``u(x)`` is a splitmix64 hash of the seed and of the ray
of ``x`` quantized to 6 decimals, so ``b`` is deterministic, vanishes at
zero and keeps its direction along the rays the Hyers iteration follows.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping

import numpy as np

from . import kernels
from .algebra import AlgebraContext, Element, Kind, MatrixElement, PolyElement
from .control import PowerType
from .errors import DenominatorDegenerate, SingularS
from .hyers import JensenParams, ProbeFunction, jensen_residual
from .sampling import random_norm, rng_for, random_element, unit_scalars

RAY_DECIMALS = 6
MAX_CONDITION = 1e3
SAFETY_FACTOR = 1.05
DENOMINATOR_FLOOR = 1e-12


# --- additive cores -------------------------------------------------------

class LinearCore:
    """Complex-linear operator acting on the flattened matrix entries."""

    def __init__(self, ctx: AlgebraContext, op):
        if ctx.kind is not Kind.MATRIX:
            raise ValueError("LinearCore needs a matrix algebra")
        op = np.array(op, dtype=np.complex128)
        n = ctx.dim * ctx.dim
        if op.shape != (n, n):
            raise ValueError(f"operator must be {n}x{n}")
        self.ctx, self.op = ctx, op

    @classmethod
    def random(cls, ctx: AlgebraContext, seed: int) -> "LinearCore":
        rng = rng_for(seed, 11)
        n = ctx.dim * ctx.dim
        op = (rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))) / math.sqrt(2 * n)
        return cls(ctx, op)

    def __call__(self, x: MatrixElement) -> MatrixElement:
        d = self.ctx.dim
        return MatrixElement._wrap((self.op @ x.entries.reshape(-1)).reshape(d, d))


class SimilarityCore:
    """``a -> S a S^-1``; a ternary (and binary) homomorphism."""

    def __init__(self, S):
        S = np.array(S.entries if isinstance(S, MatrixElement) else S, dtype=np.complex128)
        cond = np.linalg.cond(S) if S.size else math.inf
        if not np.isfinite(cond) or cond > MAX_CONDITION:
            raise SingularS(f"similarity matrix condition number {cond:.3g} exceeds {MAX_CONDITION:g}")
        self.S, self.S_inv = S, np.linalg.inv(S)

    def __call__(self, x: MatrixElement) -> MatrixElement:
        return MatrixElement._wrap(self.S @ x.entries @ self.S_inv)


class UnitaryCore:
    """``a -> U a U*``."""

    def __init__(self, U):
        U = np.array(U.entries if isinstance(U, MatrixElement) else U, dtype=np.complex128)
        if not np.allclose(U @ U.conj().T, np.eye(U.shape[0]), atol=1e-12):
            raise SingularS("matrix is not unitary")
        self.U, self.U_h = U, U.conj().T

    @classmethod
    def random(cls, ctx: AlgebraContext, seed: int) -> "UnitaryCore":
        rng = rng_for(seed, 12)
        d = ctx.dim
        z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        q, r = np.linalg.qr(z)
        q = q * (np.diag(r) / np.abs(np.diag(r)))
        return cls(q)

    def __call__(self, x: MatrixElement) -> MatrixElement:
        return MatrixElement._wrap(self.U @ x.entries @ self.U_h)


class PolyLinearCore:
    """Per-degree multipliers ``c_d x^d -> sigma_d c_d x^d``."""

    def __init__(self, multipliers: Mapping[int, complex] | Callable[[int], complex], default: complex = 1.0):
        self._table = dict(multipliers) if isinstance(multipliers, Mapping) else None
        self._fn = None if self._table is not None else multipliers
        self.default = complex(default)

    def multiplier(self, d: int) -> complex:
        if self._fn is not None:
            return complex(self._fn(d))
        return complex(self._table.get(d, self.default))

    def __call__(self, x: PolyElement) -> PolyElement:
        m = np.array([self.multiplier(d) for d in x.degrees.tolist()], dtype=np.complex128)
        c = x.coeffs * m
        keep = c != 0
        return PolyElement._wrap(x.degrees[keep].copy(), c[keep])


class PolySignCore(PolyLinearCore):
    """``p(x) -> sigma p(c x)``; a ternary homomorphism because sigma**3 = sigma."""

    def __init__(self, sigma: int, c: complex = 1.0):
        if sigma not in (1, -1):
            raise SingularS("sigma must be +1 or -1")
        self.sigma, self.c = sigma, complex(c)
        super().__init__(lambda d: self.sigma * self.c ** d)


class IdentityCore:
    def __call__(self, x):
        return x


class ConjugationCore:
    """Entrywise complex conjugation: real-linear but not complex-linear."""

    def __call__(self, x):
        if isinstance(x, MatrixElement):
            return MatrixElement._wrap(x.entries.conj())
        return PolyElement._wrap(x.degrees.copy(), x.coeffs.conj())


# --- perturbations --------------------------------------------------------

class PerturbationKind(str, enum.Enum):
    POWER = "power"
    BOUNDED = "bounded"


@dataclass(frozen=True)
class PerturbationSpec:
    kind: PerturbationKind = PerturbationKind.POWER
    delta: float = 0.0
    p: float = 0.5
    seed: int = 0
    direction: str = "hash"  # or "fixed": u(x) is one constant unit element

    def __post_init__(self):
        object.__setattr__(self, "kind", PerturbationKind(self.kind))
        if not self.delta >= 0 or not math.isfinite(self.delta):
            raise ValueError("delta must be finite and nonnegative")
        if self.direction not in ("hash", "fixed"):
            raise ValueError("direction must be 'hash' or 'fixed'")

    def envelope(self, x_norm: float) -> float:
        if x_norm == 0:
            return 0.0
        return self.delta * x_norm ** self.p if self.kind is PerturbationKind.POWER else self.delta


def ray_keys(ctx: AlgebraContext, x: Element, x_norm: float) -> np.ndarray:
    comp = ctx.components(x) / x_norm
    q = np.rint(np.stack([comp.real, comp.imag], axis=-1).ravel() * 10 ** RAY_DECIMALS).astype(np.int64)
    if ctx.kind is Kind.POLY:
        return np.concatenate([x.degrees, q])
    return q


class Perturbation:
    """``b(x) = envelope(||x||) * u(x)`` with ``||u(x)|| = 1``."""

    def __init__(self, spec: PerturbationSpec, ctx: AlgebraContext):
        self.spec, self.ctx = spec, ctx

    def unit(self, x: Element, x_norm: float) -> Element:
        ctx = self.ctx
        if self.spec.direction == "fixed":
            if ctx.kind is Kind.MATRIX:
                return MatrixElement._wrap(np.eye(ctx.dim, dtype=np.complex128) / math.sqrt(ctx.dim))
            return PolyElement.monomial(1)
        state = kernels.direction_hash(self.spec.seed, ray_keys(ctx, x, x_norm))
        if ctx.kind is Kind.MATRIX:
            n = ctx.dim * ctx.dim
            u = kernels.unit_uniforms(state, 2 * n)
            z = (u[0::2] + 1j * u[1::2]).reshape(ctx.dim, ctx.dim)
            return MatrixElement._wrap(z / np.linalg.norm(z))
        k = len(x.degrees)
        u = kernels.unit_uniforms(state, 2 * k)
        z = u[0::2] + 1j * u[1::2]
        return PolyElement._wrap(x.degrees.copy(), z / np.abs(z).sum())

    def __call__(self, x: Element) -> Element:
        nx = self.ctx.norm(x)
        mag = self.spec.envelope(nx)
        if mag == 0:
            return self.ctx.zero()
        return mag * self.unit(x, nx)


def make_probe(core: Callable[[Element], Element], pert: PerturbationSpec, ctx: AlgebraContext,
               label: str = "probe") -> ProbeFunction:
    b = Perturbation(pert, ctx)
    if pert.delta == 0:
        return ProbeFunction(core, ctx, label, core=core, perturbation=b)
    return ProbeFunction(lambda x: core(x) + b(x), ctx, label, core=core, perturbation=b)


def make_exact_hom(ctx: AlgebraContext, kind: str, **kw) -> ProbeFunction:
    """Exact ternary homomorphism: ``similarity`` (S), ``unitary`` (U or seed), ``poly_sign`` (sigma, c)."""
    if kind == "similarity":
        core = SimilarityCore(kw["S"])
    elif kind == "unitary":
        core = UnitaryCore(kw["U"]) if "U" in kw else UnitaryCore.random(ctx, kw.get("seed", 0))
    elif kind == "poly_sign":
        core = PolySignCore(kw.get("sigma", 1), kw.get("c", 1.0))
    else:
        raise ValueError(f"unknown homomorphism kind {kind!r}")
    return ProbeFunction(core, ctx, kind, core=core)


class LatticeMaskedProbe(ProbeFunction):
    """Exact homomorphism plus noise that vanishes on a finite set of rays.

    Used to build maps satisfying ``f(rho**2n [s1 s2 z]) = [f(rho**n s1) f(rho**n s2) f(z)]``
    exactly on a test lattice while still being noisy elsewhere.
    """

    def __init__(self, core, pert: PerturbationSpec, ctx: AlgebraContext, masked: Iterable[Element]):
        self._pert = Perturbation(pert, ctx)
        self._rays = {ray_keys(ctx, m, ctx.norm(m)).tobytes() for m in masked if not ctx.is_zero(m)}

        def handle(x):
            y = core(x)
            if ctx.is_zero(x) or ray_keys(ctx, x, ctx.norm(x)).tobytes() in self._rays:
                return y
            return y + self._pert(x)

        super().__init__(handle, ctx, "lattice_masked", core=core, perturbation=self._pert)


# --- calibration ----------------------------------------------------------

@dataclass(frozen=True)
class CalibrationShape:
    slots: int
    p: float

    def __post_init__(self):
        if self.slots not in (2, 5):
            raise ValueError("slots must be 2 or 5")

    def control(self, eps: float) -> PowerType:
        return PowerType(eps, self.p, self.slots)


def TwoSlotPower(p: float) -> CalibrationShape:  # noqa: N802
    return CalibrationShape(2, p)


def FiveSlotPower(p: float) -> CalibrationShape:  # noqa: N802
    return CalibrationShape(5, p)


@dataclass(frozen=True)
class Calibration:
    eps: float
    sup_ratio: float
    safety_factor: float
    samples_used: int
    samples_excluded: int
    shape: CalibrationShape

    def control(self) -> PowerType:
        return self.shape.control(self.eps)


def calibration_tuples(ctx: AlgebraContext, slots: int, count: int, seed: int):
    """Seeded argument tuples ``(mu, args)`` mixing generic and structured cases.

    Structured cases (zero slots, ``y = -x``, ``y = c x``) are where the
    worst residual ratios sit, so they are sampled explicitly.
    """
    rng = rng_for(seed, 21)
    zero = ctx.zero()
    out = []
    for i in range(count):
        pattern = i % 6
        x = random_element(ctx, rng, random_norm(rng))
        y = random_element(ctx, rng, random_norm(rng))
        if pattern == 1:
            y = zero
        elif pattern == 2:
            x, y = zero, y
        elif pattern == 3:
            y = -1.0 * x
        elif pattern == 4:
            y = float(rng.uniform(0.1, 3.0)) * x
        if slots == 2:
            out.append((1.0, (x, y)))
            continue
        mu = (1.0, 1j, unit_scalars(rng, 1)[0])[i % 3]
        uvw = [random_element(ctx, rng, random_norm(rng)) for _ in range(3)]
        mask = rng.random(3) < 0.25
        if pattern in (1, 2):
            mask[:] = True
        uvw = [zero if m else u for m, u in zip(mask, uvw)]
        out.append((mu, (x, y, *uvw)))
    return out


def calibrate_epsilon(f, params: JensenParams, ctx: AlgebraContext, shape: CalibrationShape,
                      sample_budget: int = 2000, seed: int = 0, residual_sign: str = "minus",
                      safety_factor: float = SAFETY_FACTOR) -> Calibration:
    """Smallest power-type epsilon (times the safety factor) dominating the sampled residuals."""
    from .homstab import hom_residual

    if sample_budget < 1000:
        raise ValueError("sample_budget must be at least 1000")
    base = shape.control(1.0)
    sup, used, excluded = 0.0, 0, 0
    for mu, args in calibration_tuples(ctx, shape.slots, sample_budget, seed):
        denom = float(base.evaluate(np.array([ctx.norm(a) for a in args])))
        if denom < DENOMINATOR_FLOOR:
            excluded += 1
            continue
        if shape.slots == 2:
            res = jensen_residual(f, params, ctx, *args)
        else:
            res = hom_residual(f, params, ctx, mu, *args, residual_sign=residual_sign)
        sup = max(sup, res / denom)
        used += 1
    if used == 0:
        raise DenominatorDegenerate("every calibration sample had a vanishing denominator")
    return Calibration(safety_factor * sup, sup, safety_factor, used, excluded, shape)
