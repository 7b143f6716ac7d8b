"""Hyers direct method for the generalized Jensen equation.

For ``r f((s x + t y) / r) = s f(x) + t f(y)`` the forward Hyers sequence
is ``(r/s)**-n f((r/s)**n x)`` and the backward one is
``(r/s)**n f((r/s)**-n x)``. Pivoting on ``t`` swaps the roles of
``(s, x)`` and ``(t, y)``.

Limits are certified strictly by the control-function tail, never by
observed successive differences.
"""
from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from . import control
from .algebra import AlgebraContext, Element, MatrixElement, PolyElement
from .control import ControlFunction, Direction
from .errors import CapExceeded, EvaluationFailure, HyersLabError, InvalidRegime, NotCertified
from .report import Report, StabilityRow

log = logging.getLogger(__name__)

DEFAULT_N_CAP = 64


class Pivot(str, enum.Enum):
    S = "s"
    T = "t"


@dataclass(frozen=True)
class JensenParams:
    r: int
    s: int
    t: int
    direction: Direction = Direction.FORWARD
    pivot: Pivot = Pivot.S

    def __post_init__(self):
        for name in ("r", "s", "t"):
            v = getattr(self, name)
            if isinstance(v, bool) or int(v) != v or v < 1:
                raise InvalidRegime(f"{name} must be a positive integer, got {v!r}")
            object.__setattr__(self, name, int(v))
        object.__setattr__(self, "direction", Direction(self.direction))
        object.__setattr__(self, "pivot", Pivot(self.pivot))
        if self.k == self.r:
            raise InvalidRegime(f"pivot coefficient equals r={self.r}: iteration ratio would be 1")

    @property
    def k(self) -> int:
        """Pivot coefficient (s, or t when pivoting on t)."""
        return self.s if self.pivot is Pivot.S else self.t

    @property
    def ratio(self) -> Fraction:
        return Fraction(self.r, self.k)

    @property
    def slot(self) -> int:
        return 0 if self.pivot is Pivot.S else 1

    def power(self, n: int) -> tuple[float, float]:
        """``((r/k)**n, (r/k)**-n)`` from exact integer powers, rounded once."""
        rn, kn = self.r ** n, self.k ** n
        return float(Fraction(rn, kn)), float(Fraction(kn, rn))


class ProbeFunction:
    """A map between algebra elements with ``f(0) = 0`` enforced.

    If the handle maps zero elsewhere, ``f(0)`` is subtracted from every
    value (the standard reduction for the Jensen equation).
    """

    def __init__(self, handle: Callable[[Element], Element], ctx: AlgebraContext, label: str = "f",
                 core: Callable[[Element], Element] | None = None, perturbation=None):
        self.handle = handle
        self.ctx = ctx
        self.label = label
        self.core = core
        self.perturbation = perturbation
        f0 = self._raw(ctx.zero())
        self.offset = None if ctx.is_zero(f0) else f0
        if self.offset is not None:
            log.info("probe %s: f(0) != 0, subtracting f(0)", label)

    def _raw(self, x):
        try:
            y = self.handle(x)
        except HyersLabError:
            raise
        except Exception as exc:
            raise EvaluationFailure(f"probe {self.label} failed: {exc}") from exc
        self.ctx.check(y)
        return y

    def __call__(self, x: Element) -> Element:
        y = self._raw(x)
        return y if self.offset is None else y - self.offset

    def __repr__(self):
        return f"ProbeFunction({self.label!r})"


@dataclass
class HyersResult:
    samples: dict[int, Element]
    limit_at: dict[int, Element]
    n_used: dict[int, int]
    tail_bound: dict[int, float]
    certified: bool
    observed_step: dict[int, float] = field(default_factory=dict)
    bound_ft: dict[int, float] = field(default_factory=dict)

    @property
    def max_n(self) -> int:
        return max(self.n_used.values(), default=0)

    def __getitem__(self, sample_id: int) -> Element:
        return self.limit_at[sample_id]


def jensen_residual(f, params: JensenParams, ctx: AlgebraContext, x: Element, y: Element) -> float:
    """``||r f((s x + t y) / r) - s f(x) - t f(y)||``."""
    ctx.check(x, y)
    r, s, t = params.r, params.s, params.t
    z = (s * x + t * y) / r
    return ctx.norm(r * f(z) - s * f(x) - t * f(y))


def hyers_iterate(f, params: JensenParams, ctx: AlgebraContext, x: Element, n: int,
                  n_cap: int = DEFAULT_N_CAP) -> Element:
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n > n_cap:
        raise CapExceeded(f"n={n} exceeds the iteration cap {n_cap}")
    if n == 0:
        return f(x)
    up, down = params.power(n)
    if params.direction is Direction.FORWARD:
        return down * f(up * x)
    return up * f(down * x)


def _check_regime(phi: ControlFunction, params: JensenParams):
    control.geometric_ratio(phi, params.r / params.k, params.direction)


def _as_samples(x) -> dict[int, Element]:
    if isinstance(x, (MatrixElement, PolyElement)):
        return {0: x}
    if isinstance(x, dict):
        return dict(x)
    return dict(enumerate(x))


def hyers_limit(f, params: JensenParams, ctx: AlgebraContext, phi: ControlFunction, x,
                tol: float, n_cap: int = DEFAULT_N_CAP) -> HyersResult:
    """Certified Hyers limit at one element or a collection of sample points.

    For each point the smallest ``n`` whose control tail is ``<= tol`` is
    used. If no ``n <= n_cap`` qualifies, the estimate at ``n_cap`` is
    returned with ``certified=False``.
    """
    _check_regime(phi, params)
    samples = _as_samples(x)
    ctx.check(*samples.values())
    res = HyersResult(samples, {}, {}, {}, True)
    for sid, xi in samples.items():
        tails, cert = control.cauchy_tails(phi, params.r, params.k, ctx.norm(xi), n_cap,
                                           params.direction, params.slot)
        hits = [m for m in range(n_cap + 1) if tails[m] <= tol]
        if hits:
            n = hits[0]
        else:
            n = n_cap
            cert = False
            log.warning("sample %s: tail %.3g > tol %.3g at n_cap=%d", sid, tails[n_cap], tol, n_cap)
        est = hyers_iterate(f, params, ctx, xi, n, n_cap)
        res.limit_at[sid] = est
        res.n_used[sid] = n
        res.tail_bound[sid] = float(tails[n])
        if n > 0:
            prev = hyers_iterate(f, params, ctx, xi, n - 1, n_cap)
            res.observed_step[sid] = ctx.norm(est - prev)
        res.certified = res.certified and cert
    return res


class LimitMap:
    """Callable ``x -> T(x)`` that runs :func:`hyers_limit` on demand."""

    def __init__(self, f, params: JensenParams, ctx: AlgebraContext, phi: ControlFunction,
                 tol: float, n_cap: int = DEFAULT_N_CAP):
        _check_regime(phi, params)
        self.f, self.params, self.ctx, self.phi = f, params, ctx, phi
        self.tol, self.n_cap = tol, n_cap
        self.certified = True

    def __call__(self, x: Element) -> Element:
        res = hyers_limit(self.f, self.params, self.ctx, self.phi, x, self.tol, self.n_cap)
        self.certified = self.certified and res.certified
        return res.limit_at[0]


def verify_stability_bound(f, result: HyersResult, phi: ControlFunction, params: JensenParams,
                           ctx: AlgebraContext, samples: Iterable[int] | None = None,
                           slack: float = 1e-9) -> tuple[Report, list[StabilityRow]]:
    """Compare ``||f(x) - T(x)||`` with the telescoping bound and with phi-tilde(x, x)."""
    if not result.certified:
        raise NotCertified("stability can only be checked against a certified limit")
    ids = list(result.limit_at) if samples is None else list(samples)
    report = Report("stability")
    rows = []
    for sid in ids:
        x = result.samples[sid]
        nx = ctx.norm(x)
        resid = ctx.norm(f(x) - result.limit_at[sid])
        app = control.derivation_bound(phi, params.r, params.k, nx, math.inf,
                                       direction=params.direction, slot=params.slot)
        tilde_norms = [nx, nx] + [0.0] * (phi.arity - 2)
        tilde = control.phi_tilde(phi, params.r, params.k, tilde_norms, direction=params.direction)
        ok = app.certified and resid <= app.upper + slack
        report.add("stability_bound_app", sid, resid, app.upper + slack, passed=ok)
        report.add("stability_bound_phitilde", sid, resid, tilde.upper + slack)
        rows.append(StabilityRow(sid, nx, resid, app.upper, tilde.upper, result.n_used[sid],
                                 result.certified, ok))
    return report, rows


def verify_uniqueness(T: Callable, T_prime: Callable, phi: ControlFunction, params: JensenParams,
                      ctx: AlgebraContext, samples: Sequence[Element], j_max: int,
                      slack: float = 0.0) -> Report:
    """Check ``||T(x) - T'(x)|| <= 2 (r/s)**-j phi-tilde((r/s)**j x, (r/s)**j x)`` for j <= j_max.

    ``slack`` absorbs the truncation error of the two limit estimates.
    """
    report = Report("uniqueness")
    for sid, x in enumerate(samples):
        nx = ctx.norm(x)
        diff = ctx.norm(T(x) - T_prime(x))
        norms = [nx, nx] + [0.0] * (phi.arity - 2)
        prev = math.inf
        for j in range(j_max + 1):
            tail = control.phi_tilde(phi, params.r, params.k, norms, direction=params.direction, start=j)
            bound = 2.0 * tail.upper
            report.add("uniqueness_tail", sid * (j_max + 1) + j, diff, bound + slack)
            report.add("uniqueness_tail_shrinks", sid * (j_max + 1) + j, bound, prev,
                       passed=bound <= prev)
            prev = bound
    return report


def verify_additivity(T: Callable, ctx: AlgebraContext, pairs: Sequence[tuple[Element, Element]],
                      tol: float) -> Report:
    """``||T(x+y) - T(x) - T(y)|| <= tol (1 + ||x|| + ||y||)`` and ``T(0) = 0``."""
    report = Report("additivity")
    t0 = ctx.norm(T(ctx.zero()))
    report.add("additivity_zero", 0, t0, tol)
    for sid, (x, y) in enumerate(pairs):
        v = ctx.norm(T(x + y) - T(x) - T(y))
        report.add("additivity", sid, v, tol * (1.0 + ctx.norm(x) + ctx.norm(y)))
    return report
