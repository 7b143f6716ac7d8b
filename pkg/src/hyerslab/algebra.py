"""Concrete Banach ternary algebras.

Two instances are provided:

* ``MatrixTrivial(dim)``: complex ``dim x dim`` matrices with
  ``[abc] = (a b) c`` and the Frobenius norm.
* ``OddPolynomial``: polynomials in one variable with only odd-degree
  terms, ``[pqr] = p q r`` and the coefficient l1 norm. It has no
  identity element.

Both norms are submultiplicative, so ``||[abc]|| <= ||a|| ||b|| ||c||``.
Elements are immutable and support ``+``, ``-`` and scalar ``*``/``/``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Mapping, Union

import numpy as np

from . import kernels
from .errors import ContextMismatch, DegreeOverflow, IdentityViolation

DEFAULT_MAX_TERMS = 100_000


class Kind(str, enum.Enum):
    MATRIX = "matrix"
    POLY = "poly"


def as_scalar(value) -> complex:
    """Coerce to a finite complex scalar."""
    if isinstance(value, (list, tuple)) and len(value) == 2:
        value = complex(float(value[0]), float(value[1]))
    z = complex(value)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValueError(f"scalar must be finite, got {z!r}")
    return z


class MatrixElement:
    __slots__ = ("entries",)

    def __init__(self, entries):
        arr = np.array(entries, dtype=np.complex128)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
            raise ContextMismatch(f"matrix element must be square and non-empty, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("matrix entries must be finite")
        arr.flags.writeable = False
        object.__setattr__(self, "entries", arr)

    @classmethod
    def _wrap(cls, arr):
        # trusted fast path: arr is a fresh complex128 square array
        obj = cls.__new__(cls)
        arr.flags.writeable = False
        object.__setattr__(obj, "entries", arr)
        return obj

    def __setattr__(self, name, value):
        raise AttributeError("elements are immutable")

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def _check(self, other):
        if not isinstance(other, MatrixElement) or other.entries.shape != self.entries.shape:
            raise ContextMismatch("operands belong to different algebras")

    def __add__(self, other):
        self._check(other)
        return MatrixElement._wrap(self.entries + other.entries)

    def __sub__(self, other):
        self._check(other)
        return MatrixElement._wrap(self.entries - other.entries)

    def __neg__(self):
        return MatrixElement._wrap(-self.entries)

    def __mul__(self, lam):
        if isinstance(lam, (MatrixElement, PolyElement)):
            return NotImplemented
        return MatrixElement._wrap(self.entries * complex(lam))

    __rmul__ = __mul__

    def __truediv__(self, lam):
        return MatrixElement._wrap(self.entries / complex(lam))

    def __eq__(self, other):
        return isinstance(other, MatrixElement) and np.array_equal(self.entries, other.entries)

    def __hash__(self):
        return hash(self.entries.tobytes())

    def __repr__(self):
        return f"MatrixElement({self.entries.tolist()!r})"


class PolyElement:
    """Odd polynomial stored as sorted degree / coefficient arrays without zeros."""

    __slots__ = ("degrees", "coeffs")

    def __init__(self, terms: Mapping[int, complex] | None = None):
        terms = dict(terms or {})
        for d in terms:
            if int(d) != d or d < 1 or d % 2 == 0:
                raise ContextMismatch(f"odd-polynomial algebra has no degree {d}")
        items = sorted((int(d), as_scalar(c)) for d, c in terms.items() if as_scalar(c) != 0)
        degs = np.array([d for d, _ in items], dtype=np.int64)
        coefs = np.array([c for _, c in items], dtype=np.complex128)
        PolyElement._init(self, degs, coefs)

    @staticmethod
    def _init(obj, degs, coefs):
        degs.flags.writeable = False
        coefs.flags.writeable = False
        object.__setattr__(obj, "degrees", degs)
        object.__setattr__(obj, "coeffs", coefs)

    @classmethod
    def _wrap(cls, degs, coefs):
        obj = cls.__new__(cls)
        cls._init(obj, degs, coefs)
        return obj

    @classmethod
    def monomial(cls, degree: int, coeff: complex = 1.0) -> "PolyElement":
        return cls({degree: coeff})

    def __setattr__(self, name, value):
        raise AttributeError("elements are immutable")

    def as_dict(self) -> dict[int, complex]:
        return dict(zip(self.degrees.tolist(), self.coeffs.tolist()))

    def _combine(self, other, sign):
        if not isinstance(other, PolyElement):
            raise ContextMismatch("operands belong to different algebras")
        acc = self.as_dict()
        for d, c in zip(other.degrees.tolist(), other.coeffs.tolist()):
            acc[d] = acc.get(d, 0j) + sign * c
        keys = sorted(d for d, c in acc.items() if c != 0)
        return PolyElement._wrap(np.array(keys, dtype=np.int64),
                                 np.array([acc[d] for d in keys], dtype=np.complex128))

    def __add__(self, other):
        return self._combine(other, 1.0)

    def __sub__(self, other):
        return self._combine(other, -1.0)

    def __neg__(self):
        return PolyElement._wrap(self.degrees.copy(), -self.coeffs)

    def __mul__(self, lam):
        if isinstance(lam, (MatrixElement, PolyElement)):
            return NotImplemented
        c = self.coeffs * complex(lam)
        keep = c != 0
        return PolyElement._wrap(self.degrees[keep].copy(), c[keep])

    __rmul__ = __mul__

    def __truediv__(self, lam):
        return self * (1.0 / complex(lam))

    def __eq__(self, other):
        return (isinstance(other, PolyElement)
                and np.array_equal(self.degrees, other.degrees)
                and np.array_equal(self.coeffs, other.coeffs))

    def __hash__(self):
        return hash((self.degrees.tobytes(), self.coeffs.tobytes()))

    def __repr__(self):
        return f"PolyElement({self.as_dict()!r})"


Element = Union[MatrixElement, PolyElement]


@dataclass(frozen=True)
class AlgebraContext:
    kind: Kind
    dim: int = 1
    max_terms: int = DEFAULT_MAX_TERMS

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        if self.kind is Kind.MATRIX and (int(self.dim) != self.dim or self.dim < 1):
            raise ValueError(f"matrix dimension must be a positive integer, got {self.dim}")
        if self.max_terms < 1:
            raise ValueError("max_terms must be positive")

    @classmethod
    def matrix(cls, dim: int) -> "AlgebraContext":
        return cls(Kind.MATRIX, dim=dim)

    @classmethod
    def poly(cls, max_terms: int = DEFAULT_MAX_TERMS) -> "AlgebraContext":
        return cls(Kind.POLY, dim=0, max_terms=max_terms)

    @property
    def norm_kind(self) -> str:
        return "frobenius" if self.kind is Kind.MATRIX else "coefficient_l1"

    def check(self, *elements) -> None:
        for a in elements:
            if self.kind is Kind.MATRIX:
                if not isinstance(a, MatrixElement) or a.dim != self.dim:
                    raise ContextMismatch(f"expected a {self.dim}x{self.dim} matrix element, got {a!r}")
            elif not isinstance(a, PolyElement):
                raise ContextMismatch(f"expected an odd polynomial, got {a!r}")

    # the methods below skip validation; module-level functions validate

    def norm(self, a: Element) -> float:
        if self.kind is Kind.MATRIX:
            return float(np.linalg.norm(a.entries))
        return float(np.abs(a.coeffs).sum())

    def triple(self, a: Element, b: Element, c: Element) -> Element:
        if self.kind is Kind.MATRIX:
            return MatrixElement._wrap(a.entries @ b.entries @ c.entries)
        ab = kernels.poly_mul(a.degrees, a.coeffs, b.degrees, b.coeffs, self.max_terms)
        d, cf = kernels.poly_mul(ab[0], ab[1], c.degrees, c.coeffs, self.max_terms)
        return PolyElement._wrap(d, cf)

    def zero(self) -> Element:
        if self.kind is Kind.MATRIX:
            return MatrixElement._wrap(np.zeros((self.dim, self.dim), dtype=np.complex128))
        return PolyElement._wrap(np.empty(0, dtype=np.int64), np.empty(0, dtype=np.complex128))

    def identity(self) -> Element:
        if self.kind is not Kind.MATRIX:
            raise IdentityViolation("the odd-polynomial ternary algebra has no identity")
        return MatrixElement._wrap(np.eye(self.dim, dtype=np.complex128))

    def is_zero(self, a: Element) -> bool:
        if self.kind is Kind.MATRIX:
            return not np.any(a.entries)
        return len(a.degrees) == 0

    def components(self, a: Element) -> np.ndarray:
        """Flat complex view of the stored coefficients."""
        return a.entries.ravel() if self.kind is Kind.MATRIX else a.coeffs


def ternary_product(ctx: AlgebraContext, a: Element, b: Element, c: Element) -> Element:
    ctx.check(a, b, c)
    return ctx.triple(a, b, c)


def norm(ctx: AlgebraContext, a: Element) -> float:
    ctx.check(a)
    return ctx.norm(a)


def add(ctx: AlgebraContext, a: Element, b: Element) -> Element:
    ctx.check(a, b)
    return a + b


def sub(ctx: AlgebraContext, a: Element, b: Element) -> Element:
    ctx.check(a, b)
    return a - b


def scalar_mul(ctx: AlgebraContext, lam, a: Element) -> Element:
    ctx.check(a)
    return as_scalar(lam) * a


def check_ternary_associativity(ctx: AlgebraContext, a, b, c, d, e) -> float:
    """max(||[[abc]de] - [a[bcd]e]||, ||[a[bcd]e] - [ab[cde]]||)."""
    ctx.check(a, b, c, d, e)
    left = ctx.triple(ctx.triple(a, b, c), d, e)
    mid = ctx.triple(a, ctx.triple(b, c, d), e)
    right = ctx.triple(a, b, ctx.triple(c, d, e))
    return max(ctx.norm(left - mid), ctx.norm(mid - right))


def check_identity(ctx: AlgebraContext, e: Element, probes) -> float:
    """Largest of ||[aee] - a|| and ||[eea] - a|| over the probes."""
    ctx.check(e, *probes)
    worst = 0.0
    for a in probes:
        worst = max(worst, ctx.norm(ctx.triple(a, e, e) - a), ctx.norm(ctx.triple(e, e, a) - a))
    return worst


def binary_from_identity(ctx: AlgebraContext, e: Element, a: Element, b: Element,
                         tol_identity: float = 1e-12) -> Element:
    """The binary product a . b = [a e b] induced by a ternary identity ``e``."""
    ctx.check(e, a, b)
    for probe in (a, b):
        if check_identity(ctx, e, [probe]) > tol_identity * (1.0 + ctx.norm(probe)):
            raise IdentityViolation("e is not a ternary identity on the probe elements")
    return ctx.triple(a, e, b)


def check_bridge(ctx: AlgebraContext, e: Element, a: Element, b: Element, c: Element) -> dict[str, float]:
    """Defects of the binary algebra induced by ``e``: associativity and both unit laws."""
    ctx.check(e, a, b, c)
    dot = lambda x, y: ctx.triple(x, e, y)  # noqa: E731
    return {
        "associativity": ctx.norm(dot(dot(a, b), c) - dot(a, dot(b, c))),
        "right_unit": ctx.norm(dot(a, e) - a),
        "left_unit": ctx.norm(dot(e, a) - a),
    }


def element_to_json(a: Element):
    if isinstance(a, MatrixElement):
        return [[[z.real, z.imag] for z in row] for row in a.entries.tolist()]
    return {str(d): [c.real, c.imag] for d, c in zip(a.degrees.tolist(), a.coeffs.tolist())}


def element_from_json(ctx: AlgebraContext, data) -> Element:
    if ctx.kind is Kind.MATRIX:
        rows = [[as_scalar(z) for z in row] for row in data]
        el = MatrixElement(rows)
    else:
        try:
            el = PolyElement({int(k): as_scalar(v) for k, v in dict(data).items()})
        except (TypeError, ValueError) as exc:
            raise ContextMismatch(f"bad polynomial encoding: {exc}") from exc
    ctx.check(el)
    return el


__all__ = [
    "AlgebraContext", "Kind", "MatrixElement", "PolyElement", "Element", "DegreeOverflow",
    "as_scalar", "ternary_product", "norm", "add", "sub", "scalar_mul",
    "check_ternary_associativity", "check_identity", "binary_from_identity", "check_bridge",
    "element_to_json", "element_from_json",
]
