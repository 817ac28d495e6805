"""Exact bivariate polynomial algebra over Gaussian rationals.

Scalars are complex numbers with rational real and imaginary parts,
kept exact through every ring operation.  Polynomials are sparse
dictionaries keyed by exponent pairs; coefficients may be
:class:`GaussianRational`, complex floats (for certified float work),
or any object implementing ``+ - *`` and ``== 0`` (the symbolic
parameter polynomials use this).  One- and two-forms, the exterior
derivative and the wedge product are built on top.

All objects are immutable by convention: methods return new values and
never mutate, so concurrent evaluation is safe.
"""

from __future__ import annotations

import math
import re as _re
from fractions import Fraction

__all__ = [
    "GaussianRational",
    "BivarPoly",
    "OneForm",
    "TwoForm",
    "exterior_d",
    "wedge",
    "parse_poly",
    "format_poly",
    "format_scalar",
    "ParseError",
    "sqrt_fraction",
]


def _as_fraction(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, str):
        return Fraction(v)
    # floats are rejected on purpose: exactness is the whole point here
    raise TypeError(f"cannot build an exact rational from {type(v).__name__}")


def sqrt_fraction(a: Fraction):
    """Exact square root of a nonnegative rational, or None."""
    if a < 0:
        return None
    if a == 0:
        return Fraction(0)
    n, d = a.numerator, a.denominator
    rn, rd = math.isqrt(n), math.isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return None


class GaussianRational:
    """Element of Q(i): exact complex scalar with rational parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        object.__setattr__(self, "re", _as_fraction(re))
        object.__setattr__(self, "im", _as_fraction(im))

    def __setattr__(self, *a):
        raise AttributeError("GaussianRational is immutable")

    # -- promotion -------------------------------------------------
    @staticmethod
    def promote(v):
        if isinstance(v, GaussianRational):
            return v
        if isinstance(v, (int, Fraction)):
            return GaussianRational(v)
        return None

    # -- ring/field operations ------------------------------------
    def __add__(self, other):
        o = GaussianRational.promote(other)
        if o is None:
            return NotImplemented
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = GaussianRational.promote(other)
        if o is None:
            return NotImplemented
        return GaussianRational(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = GaussianRational.promote(other)
        if o is None:
            return NotImplemented
        return GaussianRational(o.re - self.re, o.im - self.im)

    def __mul__(self, other):
        o = GaussianRational.promote(other)
        if o is None:
            return NotImplemented
        return GaussianRational(
            self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = GaussianRational.promote(other)
        if o is None:
            return NotImplemented
        n = o.re * o.re + o.im * o.im
        if n == 0:
            raise ZeroDivisionError("division by zero GaussianRational")
        return GaussianRational(
            (self.re * o.re + self.im * o.im) / n,
            (self.im * o.re - self.re * o.im) / n,
        )

    def __rtruediv__(self, other):
        o = GaussianRational.promote(other)
        if o is None:
            return NotImplemented
        return o / self

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return (GaussianRational(1) / self) ** (-k)
        out = GaussianRational(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    def abs2(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    # Explicit conversions are fine; only implicit operator mixing is refused.
    def __complex__(self) -> complex:
        return complex(float(self.re), float(self.im))

    def __float__(self) -> float:
        if self.im != 0:
            raise ValueError("nonzero imaginary part")
        return float(self.re)

    def sqrt(self):
        """Exact square root staying in Q(i), or None when it leaves the field."""
        a, b = self.re, self.im
        if b == 0:
            r = sqrt_fraction(a)
            if r is not None:
                return GaussianRational(r)
            r = sqrt_fraction(-a)
            if r is not None:
                return GaussianRational(0, r)
            return None
        m = sqrt_fraction(a * a + b * b)
        if m is None:
            return None
        u2 = (a + m) / 2
        u = sqrt_fraction(u2)
        if u is None or u == 0:
            return None
        v = b / (2 * u)
        cand = GaussianRational(u, v)
        if cand * cand == self:
            # canonical branch: positive real part, tie broken by imag sign
            return cand if (u > 0 or (u == 0 and v > 0)) else -cand
        return None

    # -- comparisons/views -----------------------------------------
    def __eq__(self, other):
        o = GaussianRational.promote(other)
        if o is None:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __bool__(self):
        return self.re != 0 or self.im != 0

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def is_real(self) -> bool:
        return self.im == 0

    def to_complex(self) -> complex:
        return complex(self.re, self.im)

    def __repr__(self):
        return f"GaussianRational({self.re!r}, {self.im!r})"

    def __str__(self):
        return format_scalar(self)


_ONE = GaussianRational(1)


def format_scalar(c) -> str:
    """Canonical text for a coefficient (reparses to the same value)."""
    if isinstance(c, GaussianRational):
        if c.im == 0:
            return str(c.re)
        sign = "+" if c.im >= 0 else "-"
        return f"({c.re}{sign}{abs(c.im)}i)"
    return str(c)


def _is_zero_coeff(c) -> bool:
    return c == 0


class BivarPoly:
    """Sparse polynomial in x, y keyed by exponent pairs.

    No zero coefficients are stored.  The degree of the zero polynomial
    is the sentinel -1.  Term iteration and printing use graded
    lexicographic order (total degree, then x-power, descending), which
    makes all derived output deterministic.
    """

    __slots__ = ("_c",)

    def __init__(self, coeffs=None):
        c = {}
        if coeffs:
            for (i, j), v in coeffs.items():
                if not _is_zero_coeff(v):
                    c[(int(i), int(j))] = v
        object.__setattr__(self, "_c", c)

    def __setattr__(self, *a):
        raise AttributeError("BivarPoly is immutable")

    # -- constructors ----------------------------------------------
    @staticmethod
    def zero() -> "BivarPoly":
        return BivarPoly()

    @staticmethod
    def const(v) -> "BivarPoly":
        if isinstance(v, (int, Fraction)):
            v = GaussianRational(v)
        return BivarPoly({(0, 0): v})

    @staticmethod
    def monomial(i: int, j: int, coeff=_ONE) -> "BivarPoly":
        if isinstance(coeff, (int, Fraction)):
            coeff = GaussianRational(coeff)
        return BivarPoly({(i, j): coeff})

    @staticmethod
    def variable(name: str) -> "BivarPoly":
        if name == "x":
            return BivarPoly.monomial(1, 0)
        if name == "y":
            return BivarPoly.monomial(0, 1)
        raise ValueError(f"unknown variable {name!r}")

    # -- inspection -------------------------------------------------
    @property
    def degree(self) -> int:
        return max((i + j for (i, j) in self._c), default=-1)

    def is_zero(self) -> bool:
        return not self._c

    def coeff(self, i: int, j: int):
        return self._c.get((i, j), GaussianRational(0))

    def terms(self):
        """Terms in graded-lex descending order."""
        return sorted(self._c.items(), key=lambda kv: (-(kv[0][0] + kv[0][1]), -kv[0][0]))

    def num_terms(self) -> int:
        return len(self._c)

    def leading_key(self):
        if not self._c:
            return None
        return max(self._c, key=lambda k: (k[0] + k[1], k[0]))

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, GaussianRational)):
            other = BivarPoly.const(other) if other != 0 else BivarPoly.zero()
        if not isinstance(other, BivarPoly):
            return NotImplemented
        return (self - other).is_zero()

    def __hash__(self):
        return hash(frozenset(self._c.items()))

    # -- arithmetic ---------------------------------------------------
    def __add__(self, other):
        if isinstance(other, (int, Fraction, GaussianRational)):
            other = BivarPoly.const(other)
        if not isinstance(other, BivarPoly):
            return NotImplemented
        c = dict(self._c)
        for k, v in other._c.items():
            w = c.get(k)
            c[k] = v if w is None else w + v
        return BivarPoly(c)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other if isinstance(other, BivarPoly) else -BivarPoly.const(other))

    def __rsub__(self, other):
        return BivarPoly.const(other) + (-self)

    def __neg__(self):
        return BivarPoly({k: -v for k, v in self._c.items()})

    def __mul__(self, other):
        if isinstance(other, BivarPoly):
            c = {}
            for (i1, j1), v1 in self._c.items():
                for (i2, j2), v2 in other._c.items():
                    k = (i1 + i2, j1 + j2)
                    p = v1 * v2
                    w = c.get(k)
                    c[k] = p if w is None else w + p
            return BivarPoly(c)
        if isinstance(other, (OneForm, TwoForm)):
            return NotImplemented
        return self.scale(other)

    __rmul__ = __mul__

    def scale(self, s) -> "BivarPoly":
        if _is_zero_coeff(s):
            return BivarPoly.zero()
        return BivarPoly({k: v * s for k, v in self._c.items()})

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("polynomial powers need a nonnegative int")
        out = BivarPoly.const(GaussianRational(1))
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    # -- calculus -----------------------------------------------------
    def diff(self, var: str) -> "BivarPoly":
        c = {}
        for (i, j), v in self._c.items():
            if var == "x" and i > 0:
                c[(i - 1, j)] = v * Fraction(i)
            elif var == "y" and j > 0:
                c[(i, j - 1)] = v * Fraction(j)
        return BivarPoly(c)

    # -- structure ----------------------------------------------------
    def homogeneous_parts(self):
        """Ordered list of (degree, part); sum of parts equals self."""
        buckets = {}
        for (i, j), v in self._c.items():
            buckets.setdefault(i + j, {})[(i, j)] = v
        return [(d, BivarPoly(buckets[d])) for d in sorted(buckets)]

    def homogeneous_component(self, n: int) -> "BivarPoly":
        return BivarPoly({k: v for k, v in self._c.items() if k[0] + k[1] == n})

    def map_coeffs(self, fn) -> "BivarPoly":
        return BivarPoly({k: fn(v) for k, v in self._c.items()})

    def to_float(self) -> "BivarPoly":
        """Coefficients converted to complex floats."""

        def conv(v):
            return v.to_complex() if isinstance(v, GaussianRational) else complex(v)

        return self.map_coeffs(conv)

    # -- evaluation/substitution --------------------------------------
    def eval(self, x, y):
        """Exact evaluation when x, y are exact scalars; works for complex too."""
        total = None
        for (i, j), v in self._c.items():
            term = v
            if i:
                term = term * _int_pow(x, i)
            if j:
                term = term * _int_pow(y, j)
            total = term if total is None else total + term
        if total is None:
            return x * 0
        return total

    def compose(self, px: "BivarPoly", py: "BivarPoly") -> "BivarPoly":
        """Substitute x -> px, y -> py (works for any coefficient ring)."""
        xpow = {1: px}
        ypow = {1: py}

        def power(cache, base, k):
            if k not in cache:
                cache[k] = power(cache, base, k - 1) * base
            return cache[k]

        out = BivarPoly.zero()
        for (i, j), v in self._c.items():
            if i == 0 and j == 0:
                out = out + BivarPoly({(0, 0): v})
                continue
            t = None
            if i:
                t = power(xpow, px, i)
            if j:
                yp = power(ypow, py, j)
                t = yp if t is None else t * yp
            out = out + t.scale(v)
        return out

    def translate(self, x0, y0) -> "BivarPoly":
        """Shift of origin: p(x + x0, y + y0).

        Exact shifts keep exact coefficients; float/complex shifts require
        the polynomial itself to carry float coefficients (see to_float).
        """
        if isinstance(x0, (float, complex)) or isinstance(y0, (float, complex)):
            one = complex(1)
            x0 = complex(x0)
            y0 = complex(y0)
        else:
            one = GaussianRational(1)
        X = BivarPoly({(1, 0): one, (0, 0): x0})
        Y = BivarPoly({(0, 1): one, (0, 0): y0})
        return self.compose(X, Y)

    def coeff_matrix(self):
        """Dense complex coefficient matrix C with p = sum C[i,j] x^i y^j."""
        import numpy as np

        d = self.degree
        if d < 0:
            return np.zeros((1, 1), dtype=complex)
        di = max(i for (i, j) in self._c)
        dj = max(j for (i, j) in self._c)
        C = np.zeros((di + 1, dj + 1), dtype=complex)
        for (i, j), v in self._c.items():
            C[i, j] = v.to_complex() if isinstance(v, GaussianRational) else complex(v)
        return C

    def __str__(self):
        return format_poly(self)

    def __repr__(self):
        return f"BivarPoly({format_poly(self)!r})"


def _int_pow(v, k):
    out = None
    base = v
    while k:
        if k & 1:
            out = base if out is None else out * base
        base = base * base
        k >>= 1
    return out


class OneForm:
    """Polynomial differential 1-form A dx + B dy."""

    __slots__ = ("A", "B")

    def __init__(self, A: BivarPoly, B: BivarPoly):
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)

    def __setattr__(self, *a):
        raise AttributeError("OneForm is immutable")

    @staticmethod
    def zero() -> "OneForm":
        return OneForm(BivarPoly.zero(), BivarPoly.zero())

    @property
    def degree(self) -> int:
        return max(self.A.degree, self.B.degree)

    def is_zero(self) -> bool:
        return self.A.is_zero() and self.B.is_zero()

    def __add__(self, other):
        if not isinstance(other, OneForm):
            return NotImplemented
        return OneForm(self.A + other.A, self.B + other.B)

    def __sub__(self, other):
        if not isinstance(other, OneForm):
            return NotImplemented
        return OneForm(self.A - other.A, self.B - other.B)

    def __neg__(self):
        return OneForm(-self.A, -self.B)

    def scale(self, s) -> "OneForm":
        return OneForm(self.A.scale(s), self.B.scale(s))

    def __mul__(self, other):
        """Multiplication by a polynomial or scalar (module structure)."""
        if isinstance(other, BivarPoly):
            return OneForm(self.A * other, self.B * other)
        return self.scale(other)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, OneForm):
            return NotImplemented
        return self.A == other.A and self.B == other.B

    def __hash__(self):
        return hash((self.A, self.B))

    def d(self) -> "TwoForm":
        return TwoForm(self.B.diff("x") - self.A.diff("y"))

    def wedge(self, other: "OneForm") -> "TwoForm":
        return TwoForm(self.A * other.B - other.A * self.B)

    def homogeneous_parts(self):
        """List of (n, part) by coefficient degree n; sum of parts is self."""
        degs = sorted(
            {d for d, _ in self.A.homogeneous_parts()}
            | {d for d, _ in self.B.homogeneous_parts()}
        )
        return [
            (n, OneForm(self.A.homogeneous_component(n), self.B.homogeneous_component(n)))
            for n in degs
        ]

    def homogeneous_component(self, n: int) -> "OneForm":
        return OneForm(self.A.homogeneous_component(n), self.B.homogeneous_component(n))

    def compose(self, px: BivarPoly, py: BivarPoly, jac) -> "OneForm":
        """Pullback under (x, y) = (px(u,v), py(u,v)) with jac = ((dpx/du, dpx/dv), (dpy/du, dpy/dv))."""
        Ao = self.A.compose(px, py)
        Bo = self.B.compose(px, py)
        (m11, m12), (m21, m22) = jac
        return OneForm(Ao * m11 + Bo * m21, Ao * m12 + Bo * m22)

    def pullback_linear(self, m) -> "OneForm":
        """Pullback under the linear change (x, y) = M (u, v)."""
        (a, b), (c, d) = m

        def lin(p, q):
            return BivarPoly({(1, 0): p}) + BivarPoly({(0, 1): q})

        px = lin(a, b)
        py = lin(c, d)
        jac = ((BivarPoly.const(a), BivarPoly.const(b)), (BivarPoly.const(c), BivarPoly.const(d)))
        return self.compose(px, py, jac)

    def translate(self, x0, y0) -> "OneForm":
        return OneForm(self.A.translate(x0, y0), self.B.translate(x0, y0))

    def map_coeffs(self, fn) -> "OneForm":
        return OneForm(self.A.map_coeffs(fn), self.B.map_coeffs(fn))

    def to_float(self) -> "OneForm":
        return OneForm(self.A.to_float(), self.B.to_float())

    def __str__(self):
        return f"({format_poly(self.A)}) dx + ({format_poly(self.B)}) dy"

    def __repr__(self):
        return f"OneForm({format_poly(self.A)!r}, {format_poly(self.B)!r})"


class TwoForm:
    """Polynomial differential 2-form C dx^dy."""

    __slots__ = ("C",)

    def __init__(self, C: BivarPoly):
        object.__setattr__(self, "C", C)

    def __setattr__(self, *a):
        raise AttributeError("TwoForm is immutable")

    @staticmethod
    def zero() -> "TwoForm":
        return TwoForm(BivarPoly.zero())

    def __add__(self, other):
        if not isinstance(other, TwoForm):
            return NotImplemented
        return TwoForm(self.C + other.C)

    def __sub__(self, other):
        if not isinstance(other, TwoForm):
            return NotImplemented
        return TwoForm(self.C - other.C)

    def __neg__(self):
        return TwoForm(-self.C)

    def scale(self, s) -> "TwoForm":
        return TwoForm(self.C.scale(s))

    def is_zero(self) -> bool:
        return self.C.is_zero()

    def __eq__(self, other):
        if not isinstance(other, TwoForm):
            return NotImplemented
        return self.C == other.C

    def __hash__(self):
        return hash(self.C)

    def __str__(self):
        return f"({format_poly(self.C)}) dx^dy"

    __repr__ = __str__


def exterior_d(obj):
    """Exterior derivative: polynomials to 1-forms, 1-forms to 2-forms."""
    if isinstance(obj, BivarPoly):
        return OneForm(obj.diff("x"), obj.diff("y"))
    if isinstance(obj, OneForm):
        return obj.d()
    raise TypeError(f"no exterior derivative for {type(obj).__name__}")


def wedge(a: OneForm, b: OneForm) -> TwoForm:
    return a.wedge(b)


# ---------------------------------------------------------------------------
# parsing and printing
# ---------------------------------------------------------------------------


class ParseError(ValueError):
    """Raised on malformed polynomial text; carries the offending position."""

    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} at position {pos}")
        self.pos = pos


_TOKEN_RE = _re.compile(
    r"\s*(?:(?P<num>\d+\.\d+|\.\d+|\d+)|(?P<name>[A-Za-z_]\w*)|(?P<op>\*\*|[-+*/^()]))"
)


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            bad = len(text) - len(stripped)
            raise ParseError(f"unexpected character {text[bad]!r}", bad)
        if m.lastgroup == "num":
            tokens.append(("num", m.group("num"), m.start("num")))
        elif m.lastgroup == "name":
            tokens.append(("name", m.group("name"), m.start("name")))
        else:
            op = m.group("op")
            tokens.append(("op", "^" if op == "**" else op, m.start("op")))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    """Recursive descent over: terms joined by +/-, each term a product of
    coefficients and variable powers.  Division is only allowed between
    numeric literals (rational coefficients)."""

    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.k = 0

    def peek(self):
        return self.toks[self.k]

    def take(self):
        t = self.toks[self.k]
        self.k += 1
        return t

    def parse(self) -> BivarPoly:
        p = self.parse_sum()
        kind, val, pos = self.peek()
        if kind != "end":
            raise ParseError(f"unexpected {val!r}", pos)
        return p

    def parse_sum(self) -> BivarPoly:
        sign = 1
        kind, val, _ = self.peek()
        while kind == "op" and val in "+-":
            self.take()
            if val == "-":
                sign = -sign
            kind, val, _ = self.peek()
        total = self.parse_term().scale(GaussianRational(sign))
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "+-":
                sign = 1
                while kind == "op" and val in "+-":
                    self.take()
                    if val == "-":
                        sign = -sign
                    kind, val, _ = self.peek()
                total = total + self.parse_term().scale(GaussianRational(sign))
            else:
                return total

    def parse_term(self) -> BivarPoly:
        p = self.parse_factor()
        while True:
            kind, val, pos = self.peek()
            if kind == "op" and val == "*":
                self.take()
                p = p * self.parse_factor()
            elif kind in ("name",) or (kind == "op" and val == "("):
                # juxtaposition: 3x, x y, x^2y
                p = p * self.parse_factor()
            elif kind == "op" and val == "/":
                raise ParseError(
                    "unexpected '/' (division is only allowed between numeric literals)",
                    pos,
                )
            else:
                return p

    def parse_factor(self) -> BivarPoly:
        kind, val, pos = self.take()
        if kind == "num":
            coeff = Fraction(val)  # decimal text converts exactly
            nkind, nval, _ = self.peek()
            if nkind == "op" and nval == "/":
                self.take()
                dkind, dval, dpos = self.take()
                if dkind != "num" or "." in dval:
                    raise ParseError("expected an integer denominator", dpos)
                den = int(dval)
                if den == 0:
                    raise ParseError("zero denominator", dpos)
                coeff = coeff / den
                nkind, nval, _ = self.peek()
            base = BivarPoly.const(GaussianRational(coeff))
            if nkind == "name" and nval == "i":
                self.take()
                base = BivarPoly.const(GaussianRational(0, coeff))
            return self.maybe_power(base)
        if kind == "name":
            if val in ("x", "y"):
                return self.maybe_power(BivarPoly.variable(val))
            if val == "i":
                return self.maybe_power(BivarPoly.const(GaussianRational(0, 1)))
            raise ParseError(f"unknown symbol {val!r}", pos)
        if kind == "op" and val == "(":
            inner = self.parse_sum()
            ckind, cval, cpos = self.take()
            if not (ckind == "op" and cval == ")"):
                raise ParseError("expected ')'", cpos)
            return self.maybe_power(inner)
        raise ParseError(f"unexpected {val!r}" if val else "unexpected end of input", pos)

    def maybe_power(self, base: BivarPoly) -> BivarPoly:
        kind, val, _ = self.peek()
        if kind == "op" and val == "^":
            self.take()
            ekind, eval_, epos = self.take()
            if ekind != "num" or "." in eval_:
                raise ParseError("expected an integer exponent", epos)
            return base ** int(eval_)
        return base


def parse_poly(text: str) -> BivarPoly:
    """Parse polynomial text in x, y with exact rational/complex coefficients.

    Grammar: terms joined by + or -; a term multiplies coefficients and
    variable powers (explicit * or juxtaposition).  Coefficients are
    integers, rationals a/b, exact decimals, or parenthesized complex
    literals like (1+2i).
    """
    return _Parser(text).parse()


def _monomial_str(i: int, j: int) -> str:
    parts = []
    if i == 1:
        parts.append("x")
    elif i > 1:
        parts.append(f"x^{i}")
    if j == 1:
        parts.append("y")
    elif j > 1:
        parts.append(f"y^{j}")
    return "*".join(parts)


def format_poly(p: BivarPoly) -> str:
    """Canonical text in graded-lex descending term order; reparses equal."""
    if p.is_zero():
        return "0"
    chunks = []
    for (i, j), v in p.terms():
        mono = _monomial_str(i, j)
        if isinstance(v, GaussianRational) and v.im == 0:
            c = v.re
            neg = c < 0
            mag = abs(c)
            if mono and mag == 1:
                body = mono
            elif mono:
                body = f"{mag}*{mono}"
            else:
                body = f"{mag}"
            sign = "-" if neg else "+"
        else:
            cs = format_scalar(v)
            body = f"{cs}*{mono}" if mono else cs
            sign = "+"
        if not chunks:
            chunks.append(body if sign == "+" else f"-{body}")
        else:
            chunks.append(f" {sign} {body}")
    return "".join(chunks)
