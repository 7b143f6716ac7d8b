"""Control functions and their geometric series transforms.

A control function bounds the Jensen residual. Everything here works on
*norms*: each slot of a control function receives ``||arg||`` and scaling
an argument by ``c > 0`` scales its norm by ``c``.

Series are summed in ascending order with ``math.fsum``. For power-type
and constant controls the terms form an exact geometric sequence, so the
omitted remainder is known in closed form and the truncation tail is
certified. Sampled controls only get a last-ratio estimate and are
flagged as not certified.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from .errors import ArityMismatch, Divergent, InvalidRegime, TailNotCertifiable

DEFAULT_TOL = 1e-12
MAX_TERMS = 20_000
_CHUNK = 64
# covers rounding of the computed terms relative to the exact geometric sequence
_ROUNDING_SLACK = 8 * np.finfo(float).eps


class Direction(str, enum.Enum):
    FORWARD = "forward"
    BACKWARD = "backward"


class DecayHint(str, enum.Enum):
    FORWARD_SUMMABLE = "forward_summable"
    BACKWARD_SUMMABLE = "backward_summable"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class PowerType:
    """``eps * sum_i ||arg_i||**p``; slots with zero norm contribute nothing."""

    eps: float
    p: float
    arity: int = 2

    def __post_init__(self):
        if not self.eps >= 0 or not math.isfinite(self.eps):
            raise ValueError("eps must be a finite nonnegative number")
        if self.arity not in (2, 5):
            raise ValueError("arity must be 2 or 5")

    def evaluate(self, norms: np.ndarray) -> np.ndarray:
        norms = np.asarray(norms, dtype=float)
        with np.errstate(divide="ignore"):
            powered = np.where(norms > 0, np.power(np.where(norms > 0, norms, 1.0), self.p), 0.0)
        return self.eps * powered.sum(axis=-1)


@dataclass(frozen=True)
class Constant:
    eps: float
    arity: int = 2

    def __post_init__(self):
        if not self.eps >= 0 or not math.isfinite(self.eps):
            raise ValueError("eps must be a finite nonnegative number")
        if self.arity not in (2, 5):
            raise ValueError("arity must be 2 or 5")

    def evaluate(self, norms: np.ndarray) -> np.ndarray:
        norms = np.asarray(norms, dtype=float)
        return np.full(norms.shape[:-1], self.eps)


@dataclass(frozen=True)
class Sampled:
    """Arbitrary nonnegative control given as a callable on per-slot norms."""

    handle: Callable[..., float]
    arity: int = 2
    decay_hint: DecayHint = DecayHint.UNKNOWN

    def __post_init__(self):
        object.__setattr__(self, "decay_hint", DecayHint(self.decay_hint))
        if self.arity not in (2, 5):
            raise ValueError("arity must be 2 or 5")

    def evaluate(self, norms: np.ndarray) -> np.ndarray:
        norms = np.asarray(norms, dtype=float)
        flat = norms.reshape(-1, self.arity)
        out = np.array([float(self.handle(*row)) for row in flat])
        if np.any(out < 0) or not np.all(np.isfinite(out)):
            raise ValueError("sampled control returned a negative or non-finite value")
        return out.reshape(norms.shape[:-1])


ControlFunction = Union[PowerType, Constant, Sampled]


@dataclass(frozen=True)
class SeriesValue:
    value: float
    truncation_tail: float
    terms_used: int
    certified: bool = True

    @property
    def upper(self) -> float:
        return self.value + self.truncation_tail


def is_zero(phi: ControlFunction) -> bool:
    return isinstance(phi, (PowerType, Constant)) and phi.eps == 0


def phi_eval(phi: ControlFunction, args: Sequence, ctx=None) -> float:
    """Evaluate ``phi`` at norms, or at elements when ``ctx`` is given."""
    if len(args) != phi.arity:
        raise ArityMismatch(f"control has arity {phi.arity}, got {len(args)} arguments")
    if ctx is not None:
        norms = [ctx.norm(a) for a in args]
    else:
        norms = [float(a) for a in args]
    if any(n < 0 for n in norms):
        raise ValueError("norms must be nonnegative")
    return float(phi.evaluate(np.array(norms)))


def geometric_ratio(phi: ControlFunction, ratio: float, direction: Direction = Direction.FORWARD) -> float:
    """Ratio of consecutive series terms for certified controls.

    Raises :class:`Divergent` outside the convergent regime and
    :class:`TailNotCertifiable` for sampled controls without a usable hint.
    """
    direction = Direction(direction)
    if is_zero(phi):
        return 0.0
    if ratio == 1.0:
        raise Divergent("scaling ratio 1: the series diverges for nonzero controls")
    if isinstance(phi, PowerType):
        q = ratio ** (phi.p - 1.0) if direction is Direction.FORWARD else ratio ** (1.0 - phi.p)
    elif isinstance(phi, Constant):
        q = 1.0 / ratio if direction is Direction.FORWARD else ratio
    else:
        hint = phi.decay_hint
        if hint is DecayHint.UNKNOWN:
            raise TailNotCertifiable("sampled control without a decay hint")
        wanted = DecayHint.FORWARD_SUMMABLE if direction is Direction.FORWARD else DecayHint.BACKWARD_SUMMABLE
        if hint is not wanted:
            raise Divergent(f"sampled control is {hint.value}, not summable {direction.value}")
        return math.nan
    if not q < 1.0:
        raise Divergent(f"term ratio {q:.6g} >= 1 in the {direction.value} direction")
    return q


def _weights(r: int, s: int, direction: Direction):
    """(weight, scale) factories for the term index n."""
    rho = r / s
    if direction is Direction.FORWARD:
        return (lambda n: np.power(rho, -n) / r), (lambda n: np.power(rho, n))
    return (lambda n: np.power(rho, n) / s), (lambda n: np.power(rho, -n))


def _max_terms(r: int, s: int, max_terms: int) -> int:
    # keep rho**n finite
    return min(max_terms, int(700.0 / abs(math.log(r / s))))


def _sum_series(phi, base_norms, r, s, direction, start, tol, max_terms, shift=0):
    """Sum ``sum_{n >= start} weight(n) * phi(scale(n + shift) * base_norms)``."""
    direction = Direction(direction)
    q = geometric_ratio(phi, r / s, direction)
    base = np.asarray(base_norms, dtype=float)
    if base.shape != (phi.arity,):
        raise ArityMismatch(f"control has arity {phi.arity}, got {base.shape[0]} norms")
    if q == 0.0:
        return SeriesValue(0.0, 0.0, 0, True)
    weight, scale = _weights(r, s, direction)
    certified = not math.isnan(q)
    limit = _max_terms(r, s, max_terms)
    terms: list[float] = []
    running = 0.0
    n = start
    while len(terms) < limit:
        ns = np.arange(n, n + _CHUNK, dtype=float)
        chunk = weight(ns) * phi.evaluate(scale(ns + shift)[:, None] * base[None, :])
        for term in chunk.tolist():
            terms.append(term)
            running += term
            if certified:
                tail = term * q / (1.0 - q)
            else:
                prev = terms[-2] if len(terms) > 1 else 0.0
                rq = term / prev if prev > 0 else math.inf
                tail = term * rq / (1.0 - rq) if rq < 1.0 else math.inf
            if tail <= tol * running or term == 0.0 and (certified or len(terms) > 1 and terms[-2] == 0.0):
                value = math.fsum(terms)
                tail = tail * (1.0 + 1e-12) + _ROUNDING_SLACK * value
                return SeriesValue(value, float(tail), len(terms), certified)
            if len(terms) >= limit:
                break
        n += _CHUNK
    value = math.fsum(terms)
    return SeriesValue(value, math.inf, len(terms), False)


def _check_rs(r, s):
    if int(r) != r or int(s) != s or r < 1 or s < 1:
        raise ValueError("r and s must be positive integers")


def phi_tilde(phi: ControlFunction, r: int, s: int, x_norms: Sequence[float], tol: float = DEFAULT_TOL,
              direction: Direction = Direction.FORWARD, start: int = 0, max_terms: int = MAX_TERMS) -> SeriesValue:
    """The weighted series transform of ``phi`` in either scaling direction.

    Forward: ``(1/r) sum_n (r/s)**-n phi((r/s)**n x)``;
    backward: ``(1/s) sum_n (r/s)**n phi((r/s)**-n x)``. ``start`` skips
    the first terms (the uniqueness argument needs the tail from ``j``).
    """
    _check_rs(r, s)
    return _sum_series(phi, x_norms, r, s, direction, start, tol, max_terms)


def phi_tilde_forward(phi, r, s, x_norms, tol=DEFAULT_TOL) -> SeriesValue:
    return phi_tilde(phi, r, s, x_norms, tol, Direction.FORWARD)


def phi_tilde_backward(phi, r, s, x_norms, tol=DEFAULT_TOL) -> SeriesValue:
    return phi_tilde(phi, r, s, x_norms, tol, Direction.BACKWARD)


def slot_norms(arity: int, x_norm: float, slot: int = 0) -> np.ndarray:
    out = np.zeros(arity)
    out[slot] = x_norm
    return out


def derivation_bound(phi: ControlFunction, r: int, s: int, x_norm: float, n: int | float = math.inf,
                     tol: float = DEFAULT_TOL, direction: Direction = Direction.FORWARD,
                     slot: int = 0) -> SeriesValue:
    """Partial-sum bound on ``||f(x) - T_n(x)||`` obtained by telescoping.

    Forward: ``(1/r) sum_{k<n} (r/s)**-k phi((r/s)**(k+1) x, 0)``;
    backward: ``(1/s) sum_{k<n} (r/s)**k phi((r/s)**-k x, 0)``.
    ``slot`` selects which argument carries ``x`` (1 when pivoting on t).
    """
    _check_rs(r, s)
    direction = Direction(direction)
    base = slot_norms(phi.arity, x_norm, slot)
    shift = 1 if direction is Direction.FORWARD else 0
    if n == math.inf:
        return _sum_series(phi, base, r, s, direction, 0, tol, MAX_TERMS, shift=shift)
    n = int(n)
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n == 0 or is_zero(phi):
        return SeriesValue(0.0, 0.0, n, True)
    weight, scale = _weights(r, s, direction)
    ks = np.arange(n, dtype=float)
    terms = weight(ks) * phi.evaluate(scale(ks + shift)[:, None] * base[None, :])
    return SeriesValue(math.fsum(terms.tolist()), 0.0, n, True)


def cauchy_tails(phi: ControlFunction, r: int, s: int, x_norm: float, m_max: int,
                 direction: Direction = Direction.FORWARD, slot: int = 0,
                 tol: float = DEFAULT_TOL) -> tuple[np.ndarray, bool]:
    """Upper bounds on the telescoping remainder ``sum_{k >= m}`` for ``m = 0..m_max``.

    Bounds ``||T_m(x) - T(x)||``. Returns ``(tails, certified)``.
    """
    _check_rs(r, s)
    direction = Direction(direction)
    q = geometric_ratio(phi, r / s, direction)
    if q == 0.0 or x_norm == 0 and isinstance(phi, PowerType):
        return np.zeros(m_max + 1), True
    base = slot_norms(phi.arity, x_norm, slot)
    shift = 1 if direction is Direction.FORWARD else 0
    if math.isnan(q):
        tails = []
        for m in range(m_max + 1):
            sv = _sum_series(phi, base, r, s, direction, m, tol, MAX_TERMS, shift=shift)
            tails.append(sv.upper)
        return np.array(tails), False
    weight, scale = _weights(r, s, direction)
    ks = np.arange(m_max + 1, dtype=float)
    terms = weight(ks) * phi.evaluate(scale(ks + shift)[:, None] * base[None, :])
    tails = terms / (1.0 - q) * (1.0 + 1e-12) + _ROUNDING_SLACK * terms
    return tails, True


def power_bound_closed_form(eps: float, p: float, r: int, s: int, x_norm: float,
                            direction: Direction = Direction.FORWARD) -> float:
    """Closed form of the power-type stability bound.

    Forward (``p < 1``, ``r > s``): ``2 r**-p eps ||x||**p / (r**(1-p) - s**(1-p))``.
    Backward (``p > 1``, ``r > s``) is the same expression with ``r`` and
    ``s`` exchanged.
    """
    _check_rs(r, s)
    direction = Direction(direction)
    if not r > s:
        raise InvalidRegime(f"need r > s, got r={r}, s={s}")
    if direction is Direction.FORWARD:
        if not p < 1:
            raise InvalidRegime(f"forward bound needs p < 1, got p={p}")
        big, small = r, s
    else:
        if not p > 1:
            raise InvalidRegime(f"backward bound needs p > 1, got p={p}")
        big, small = s, r
    if eps == 0 or x_norm == 0:
        return 0.0
    return 2.0 * big ** (-p) * eps * x_norm ** p / (big ** (1.0 - p) - small ** (1.0 - p))


def control_from_json(data: dict) -> ControlFunction:
    kind = data.get("type")
    arity = int(data.get("arity", 2))
    if kind == "power":
        return PowerType(float(data["eps"]), float(data["p"]), arity)
    if kind == "constant":
        return Constant(float(data["eps"]), arity)
    raise ValueError(f"unknown control type {kind!r}")


def control_to_json(phi: ControlFunction) -> dict:
    if isinstance(phi, PowerType):
        return {"type": "power", "eps": phi.eps, "p": phi.p, "arity": phi.arity}
    if isinstance(phi, Constant):
        return {"type": "constant", "eps": phi.eps, "arity": phi.arity}
    return {"type": "sampled", "arity": phi.arity, "decay_hint": phi.decay_hint.value}
