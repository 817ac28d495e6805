"""Sparse multivariate polynomials in named parameters.

Used as the coefficient ring when foliation coefficients are kept as
indeterminates (symbolic obstruction mode).  Coefficients of these
polynomials are exact Gaussian rationals; exponent keys are tuples, one
slot per parameter.  Everything is immutable.
"""

from __future__ import annotations

import math
from fractions import Fraction

from .algebra import GaussianRational, format_scalar

__all__ = ["ParamPoly"]


def _promote_scalar(v):
    if isinstance(v, GaussianRational):
        return v
    if isinstance(v, (int, Fraction)):
        return GaussianRational(v)
    return None


class ParamPoly:
    __slots__ = ("names", "_c")

    def __init__(self, names, coeffs=None):
        object.__setattr__(self, "names", tuple(names))
        c = {}
        if coeffs:
            for k, v in coeffs.items():
                k = tuple(k)
                if len(k) != len(self.names):
                    raise ValueError("exponent tuple length does not match parameter count")
                if not v.is_zero():
                    c[k] = v
        object.__setattr__(self, "_c", c)

    def __setattr__(self, *a):
        raise AttributeError("ParamPoly is immutable")

    # -- constructors -------------------------------------------------
    @classmethod
    def const(cls, names, v) -> "ParamPoly":
        v = _promote_scalar(v)
        z = (0,) * len(tuple(names))
        return cls(names, {z: v})

    @classmethod
    def param(cls, names, idx: int) -> "ParamPoly":
        e = [0] * len(tuple(names))
        e[idx] = 1
        return cls(names, {tuple(e): GaussianRational(1)})

    def const_like(self, v) -> "ParamPoly":
        return ParamPoly.const(self.names, v)

    # -- ring operations -----------------------------------------------
    def _check(self, other: "ParamPoly"):
        if self.names != other.names:
            raise ValueError("parameter name mismatch")

    def __add__(self, other):
        if not isinstance(other, ParamPoly):
            s = _promote_scalar(other)
            if s is None:
                return NotImplemented
            other = self.const_like(s)
        self._check(other)
        c = dict(self._c)
        for k, v in other._c.items():
            w = c.get(k)
            c[k] = v if w is None else w + v
        return ParamPoly(self.names, c)

    __radd__ = __add__

    def __sub__(self, other):
        if not isinstance(other, ParamPoly):
            s = _promote_scalar(other)
            if s is None:
                return NotImplemented
            other = self.const_like(s)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return ParamPoly(self.names, {k: -v for k, v in self._c.items()})

    def __mul__(self, other):
        if isinstance(other, ParamPoly):
            self._check(other)
            c = {}
            for k1, v1 in self._c.items():
                for k2, v2 in other._c.items():
                    k = tuple(a + b for a, b in zip(k1, k2))
                    p = v1 * v2
                    w = c.get(k)
                    c[k] = p if w is None else w + p
            return ParamPoly(self.names, c)
        s = _promote_scalar(other)
        if s is None:
            return NotImplemented
        if s.is_zero():
            return ParamPoly(self.names)
        return ParamPoly(self.names, {k: v * s for k, v in self._c.items()})

    __rmul__ = __mul__

    # -- predicates ------------------------------------------------------
    def is_zero(self) -> bool:
        return not self._c

    def __eq__(self, other):
        if isinstance(other, ParamPoly):
            if self.names != other.names:
                return False
            return self._c == other._c
        s = _promote_scalar(other)
        if s is None:
            return NotImplemented
        if s.is_zero():
            return not self._c
        return self._c == {(0,) * len(self.names): s}

    def __hash__(self):
        return hash((self.names, frozenset(self._c.items())))

    @property
    def degree(self) -> int:
        return max((sum(k) for k in self._c), default=-1)

    def is_constant(self) -> bool:
        return all(sum(k) == 0 for k in self._c)

    def constant_value(self) -> GaussianRational:
        if not self.is_constant():
            raise ValueError("not a constant")
        return self._c.get((0,) * len(self.names), GaussianRational(0))

    # -- substitution ----------------------------------------------------
    def subs(self, values) -> GaussianRational:
        """Evaluate at exact parameter values (list/tuple in name order)."""
        vals = [
            v if isinstance(v, GaussianRational) else GaussianRational(v) for v in values
        ]
        if len(vals) != len(self.names):
            raise ValueError("wrong number of parameter values")
        total = GaussianRational(0)
        for k, c in self._c.items():
            t = c
            for e, v in zip(k, vals):
                for _ in range(e):
                    t = t * v
            total = total + t
        return total

    # -- normalization ---------------------------------------------------
    def integer_normalized(self) -> "ParamPoly":
        """Content-cleared copy: integer Gaussian coefficients, gcd 1, the
        graded-lex leading coefficient made positive (real part, then imag)."""
        if not self._c:
            return self
        den = 1
        for v in self._c.values():
            den = den * v.re.denominator // math.gcd(den, v.re.denominator)
            den = den * v.im.denominator // math.gcd(den, v.im.denominator)
        num = 0
        for v in self._c.values():
            num = math.gcd(num, abs(v.re.numerator * (den // v.re.denominator)))
            num = math.gcd(num, abs(v.im.numerator * (den // v.im.denominator)))
        s = Fraction(den, num if num else 1)
        lead = max(self._c, key=lambda k: (sum(k), k))
        lc = self._c[lead] * s
        if lc.re < 0 or (lc.re == 0 and lc.im < 0):
            s = -s
        return ParamPoly(self.names, {k: v * s for k, v in self._c.items()})

    # -- printing ----------------------------------------------------------
    def terms(self):
        return sorted(self._c.items(), key=lambda kv: (-sum(kv[0]), tuple(-e for e in kv[0])))

    def __str__(self):
        if not self._c:
            return "0"
        chunks = []
        for k, v in self.terms():
            mono = "*".join(
                (n if e == 1 else f"{n}^{e}") for n, e in zip(self.names, k) if e
            )
            if v.im == 0:
                c = v.re
                sign = "-" if c < 0 else "+"
                mag = abs(c)
                if mono and mag == 1:
                    body = mono
                elif mono:
                    body = f"{mag}*{mono}"
                else:
                    body = f"{mag}"
            else:
                sign = "+"
                cs = format_scalar(v)
                body = f"{cs}*{mono}" if mono else cs
            if not chunks:
                chunks.append(body if sign == "+" else f"-{body}")
            else:
                chunks.append(f" {sign} {body}")
        return "".join(chunks)

    def __repr__(self):
        return f"ParamPoly({str(self)!r})"
