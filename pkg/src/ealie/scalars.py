"""Exact scalar domains: Q, cyclotomic fields Q(zeta_m), and finite fields.

Every coefficient in the toolkit lives in exactly one of these domains.
Mixing domains is an error (``DomainMismatch``); promotion is always an
explicit call so that a cyclotomic or mod-p coefficient can never appear
by accident in a computation that is meant to stay rational.

Rationals are plain ``fractions.Fraction`` values.  Cyclotomic and finite
field elements are immutable residue-class polynomials with operator
overloads, each carrying a reference to its field object.  Integers are
accepted by the arithmetic of every domain since Z maps canonically into
all of them.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import isqrt
from typing import Iterator, Sequence, Union

from sympy import cyclotomic_poly, factorint, isprime, legendre_symbol
from sympy.abc import x as _sympy_x

from ealie.errors import (
    DenominatorDivisibleByP,
    DomainMismatch,
    NonSquareObstruction,
)

Rational = Union[int, Fraction]


def _as_fraction(v: Rational | str) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, int):
        return Fraction(v)
    if isinstance(v, str):
        return Fraction(v)
    raise DomainMismatch(f"cannot read {v!r} as a rational")


def frac_str(q: Rational) -> str:
    """Serialize a rational as 'n' or 'n/d'."""
    q = _as_fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


# ---------------------------------------------------------------------------
# rationals


class Rationals:
    """The field Q, wrapping fractions.Fraction."""

    char = 0
    name = "Q"

    def coerce(self, v: object) -> Fraction:
        if isinstance(v, CycEl):
            if v.is_rational():
                return v.as_fraction()
            raise DomainMismatch("cyclotomic element is not rational")
        if isinstance(v, FFEl):
            raise DomainMismatch("cannot coerce a finite field element into Q")
        return _as_fraction(v)  # type: ignore[arg-type]

    @property
    def zero(self) -> Fraction:
        return Fraction(0)

    @property
    def one(self) -> Fraction:
        return Fraction(1)

    def is_rational(self, v: Fraction) -> bool:
        return True

    def as_fraction(self, v: Fraction) -> Fraction:
        return v

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Rationals)

    def __hash__(self) -> int:
        return hash("Q")

    def __repr__(self) -> str:
        return "QQ"


QQ = Rationals()


# ---------------------------------------------------------------------------
# cyclotomic fields


def _phi_coeffs(m: int) -> tuple[int, ...]:
    """Coefficients of the m-th cyclotomic polynomial, low degree first."""
    coeffs = cyclotomic_poly(m, _sympy_x).as_poly(_sympy_x).all_coeffs()
    return tuple(int(c) for c in reversed(coeffs))


class CyclotomicField:
    """Q(zeta_m) as Q[x]/(Phi_m), elements stored reduced mod Phi_m."""

    char = 0

    def __init__(self, m: int) -> None:
        if m < 1:
            raise ValueError("cyclotomic order must be positive")
        self.m = m
        self._phi = _phi_coeffs(m)
        self.degree = len(self._phi) - 1
        self.name = f"Q(zeta_{m})"

    def coerce(self, v: object) -> "CycEl":
        if isinstance(v, CycEl):
            if v.field.m == self.m:
                return v
            if self.m % v.field.m == 0:
                return embed_cyclotomic(v, self.m)
            raise DomainMismatch(
                f"cyclotomic element of order {v.field.m} in Q(zeta_{self.m})"
            )
        if isinstance(v, FFEl):
            raise DomainMismatch("cannot coerce a finite field element into Q(zeta)")
        q = _as_fraction(v)  # type: ignore[arg-type]
        coeffs = [Fraction(0)] * self.degree
        if self.degree == 0:
            # m = 1 and m = 2 give degree-1 minimal polynomials, never 0
            raise AssertionError("cyclotomic field of degree 0")
        coeffs[0] = q
        return CycEl(self, tuple(coeffs))

    @property
    def zero(self) -> "CycEl":
        return self.coerce(0)

    @property
    def one(self) -> "CycEl":
        return self.coerce(1)

    @property
    def zeta(self) -> "CycEl":
        """A fixed primitive m-th root of unity."""
        if self.degree == 1:
            # zeta is rational: 1 for m=1, -1 for m=2
            return self.coerce(1 if self.m == 1 else -1)
        coeffs = [Fraction(0)] * self.degree
        coeffs[1] = Fraction(1)
        return CycEl(self, tuple(coeffs))

    def is_rational(self, v: "CycEl") -> bool:
        return v.is_rational()

    def as_fraction(self, v: "CycEl") -> Fraction:
        return v.as_fraction()

    def _reduce(self, coeffs: list[Fraction]) -> tuple[Fraction, ...]:
        d = self.degree
        phi = self._phi
        for i in range(len(coeffs) - 1, d - 1, -1):
            c = coeffs[i]
            if c:
                coeffs[i] = Fraction(0)
                for j in range(d):
                    coeffs[i - d + j] -= c * phi[j]
        out = coeffs[:d]
        out += [Fraction(0)] * (d - len(out))
        return tuple(out)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, CyclotomicField) and other.m == self.m

    def __hash__(self) -> int:
        return hash(("cyc", self.m))

    def __repr__(self) -> str:
        return f"CyclotomicField({self.m})"


@dataclass(frozen=True)
class CycEl:
    """An element of Q(zeta_m), reduced mod Phi_m, low degree first."""

    field: CyclotomicField
    coeffs: tuple[Fraction, ...]

    def _check(self, other: object) -> "CycEl":
        if isinstance(other, CycEl):
            if other.field.m != self.field.m:
                raise DomainMismatch(
                    f"mixing Q(zeta_{self.field.m}) with Q(zeta_{other.field.m})"
                )
            return other
        if isinstance(other, int):
            return self.field.coerce(other)
        raise DomainMismatch(
            f"cannot mix {other!r} into Q(zeta_{self.field.m}) implicitly"
        )

    def __add__(self, other: object) -> "CycEl":
        o = self._check(other)
        return CycEl(self.field, tuple(a + b for a, b in zip(self.coeffs, o.coeffs)))

    __radd__ = __add__

    def __neg__(self) -> "CycEl":
        return CycEl(self.field, tuple(-a for a in self.coeffs))

    def __sub__(self, other: object) -> "CycEl":
        return self + (-self._check(other))

    def __rsub__(self, other: object) -> "CycEl":
        return self._check(other) + (-self)

    def __mul__(self, other: object) -> "CycEl":
        o = self._check(other)
        n = self.field.degree
        prod = [Fraction(0)] * (2 * n - 1)
        for i, a in enumerate(self.coeffs):
            if not a:
                continue
            for j, b in enumerate(o.coeffs):
                if b:
                    prod[i + j] += a * b
        return CycEl(self.field, self.field._reduce(prod))

    __rmul__ = __mul__

    def inverse(self) -> "CycEl":
        if not self:
            raise ZeroDivisionError("inverse of zero cyclotomic element")
        # extended Euclid in Q[x] against Phi_m
        phi = [Fraction(c) for c in self.field._phi]
        a = list(self.coeffs)
        inv = _poly_ext_inverse(a, phi)
        return CycEl(self.field, self.field._reduce(inv))

    def __truediv__(self, other: object) -> "CycEl":
        return self * self._check(other).inverse()

    def __rtruediv__(self, other: object) -> "CycEl":
        return self._check(other) * self.inverse()

    def __pow__(self, n: int) -> "CycEl":
        if n < 0:
            return self.inverse() ** (-n)
        out = self.field.one
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __bool__(self) -> bool:
        return any(self.coeffs)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction)):
            return self.is_rational() and self.as_fraction() == other
        if not isinstance(other, CycEl):
            return NotImplemented
        return self.field.m == other.field.m and self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash((self.field.m, self.coeffs))

    def is_rational(self) -> bool:
        return not any(self.coeffs[1:])

    def as_fraction(self) -> Fraction:
        if not self.is_rational():
            raise DomainMismatch("cyclotomic element is not rational")
        return self.coeffs[0]

    def __repr__(self) -> str:
        if self.is_rational():
            return f"CycEl({frac_str(self.coeffs[0])}; m={self.field.m})"
        terms = [
            f"{frac_str(c)}*z^{i}" if i else frac_str(c)
            for i, c in enumerate(self.coeffs)
            if c
        ]
        return f"CycEl({' + '.join(terms)}; m={self.field.m})"


def _pdeg(p: Sequence[Fraction]) -> int:
    for i in range(len(p) - 1, -1, -1):
        if p[i]:
            return i
    return -1


def _ptrim(p: Sequence[Fraction]) -> list[Fraction]:
    d = _pdeg(p)
    return list(p[: d + 1]) if d >= 0 else []


def _pdivmod(
    num: Sequence[Fraction], den: Sequence[Fraction]
) -> tuple[list[Fraction], list[Fraction]]:
    den = _ptrim(den)
    dd = _pdeg(den)
    if dd < 0:
        raise ZeroDivisionError("polynomial division by zero")
    rem = list(num)
    quo = [Fraction(0)] * max(_pdeg(rem) - dd + 1, 1)
    while _pdeg(rem) >= dd:
        shift = _pdeg(rem) - dd
        c = rem[_pdeg(rem)] / den[dd]
        quo[shift] += c
        for i, b in enumerate(den):
            rem[i + shift] -= c * b
    return _ptrim(quo), _ptrim(rem)


def _padd_scaled(a: Sequence[Fraction], b: Sequence[Fraction], sign: int) -> list[Fraction]:
    out = [Fraction(0)] * max(len(a), len(b), 1)
    for i, c in enumerate(a):
        out[i] += c
    for i, c in enumerate(b):
        out[i] += sign * c
    return _ptrim(out)


def _pmul_q(a: Sequence[Fraction], b: Sequence[Fraction]) -> list[Fraction]:
    if not a or not b:
        return []
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, c in enumerate(a):
        if c:
            for j, d in enumerate(b):
                if d:
                    out[i + j] += c * d
    return _ptrim(out)


def _poly_ext_inverse(a: list[Fraction], mod: list[Fraction]) -> list[Fraction]:
    """Inverse of a modulo mod in Q[x], both low-degree-first."""
    r0, r1 = _ptrim(mod), _ptrim(a)
    s0: list[Fraction] = []
    s1: list[Fraction] = [Fraction(1)]
    while _pdeg(r1) > 0:
        q, rem = _pdivmod(r0, r1)
        r0, r1 = r1, rem
        s0, s1 = s1, _padd_scaled(s0, _pmul_q(q, s1), -1)
    if _pdeg(r1) != 0:
        raise ZeroDivisionError("element not invertible")
    lead = r1[0]
    return [c / lead for c in s1]


def embed_cyclotomic(v: CycEl, m_target: int) -> CycEl:
    """Embed Q(zeta_m) into Q(zeta_M) for m | M via zeta_m = zeta_M^(M/m)."""
    m = v.field.m
    if m_target % m != 0:
        raise DomainMismatch(f"no canonical embedding of Q(zeta_{m}) in Q(zeta_{m_target})")
    big = CyclotomicField(m_target)
    z = big.zeta ** (m_target // m)
    out = big.zero
    for i, c in enumerate(v.coeffs):
        if c:
            out = out + big.coerce(c) * z**i
    return out


# ---------------------------------------------------------------------------
# finite fields


def _pmod(a: list[int], f: Sequence[int], p: int) -> list[int]:
    """a mod f over F_p; f monic, both low-degree-first."""
    a = [c % p for c in a]
    k = len(f) - 1
    for i in range(len(a) - 1, k - 1, -1):
        c = a[i]
        if c:
            a[i] = 0
            for j in range(k):
                a[i - k + j] = (a[i - k + j] - c * f[j]) % p
    out = a[:k]
    out += [0] * (k - len(out))
    return out


def _pmul(a: Sequence[int], b: Sequence[int], f: Sequence[int], p: int) -> list[int]:
    prod = [0] * (len(a) + len(b) - 1)
    for i, c in enumerate(a):
        if c:
            for j, d in enumerate(b):
                if d:
                    prod[i + j] = (prod[i + j] + c * d) % p
    return _pmod(prod, f, p)


def _ppow_x(n: int, f: Sequence[int], p: int) -> list[int]:
    """x^n mod f over F_p."""
    k = len(f) - 1
    result = [0] * k
    result[0] = 1
    base = [0] * k
    if k == 1:
        base[0] = (-f[0]) % p
    else:
        base[1] = 1
    while n:
        if n & 1:
            result = _pmul(result, base, f, p)
        base = _pmul(base, base, f, p)
        n >>= 1
    return result


def _pgcd(a: list[int], b: list[int], p: int) -> list[int]:
    def deg(q: list[int]) -> int:
        for i in range(len(q) - 1, -1, -1):
            if q[i] % p:
                return i
        return -1

    a = [c % p for c in a]
    b = [c % p for c in b]
    while deg(b) >= 0:
        da, db = deg(a), deg(b)
        if da < db:
            a, b = b, a
            continue
        inv = pow(b[db], p - 2, p)
        while deg(a) >= db:
            sh = deg(a) - db
            c = a[deg(a)] * inv % p
            for i in range(db + 1):
                a[i + sh] = (a[i + sh] - c * b[i]) % p
        a, b = b, a
    d = deg(a)
    if d < 0:
        return []
    inv = pow(a[d], p - 2, p)
    return [c * inv % p for c in a[: d + 1]]


def poly_is_irreducible(coeffs: Sequence[int], p: int) -> bool:
    """Whether a monic polynomial (low-degree-first) is irreducible over F_p."""
    k = len(coeffs) - 1
    if k < 1 or coeffs[-1] % p != 1:
        return False
    f = [c % p for c in coeffs]
    if k == 1:
        return True
    # x^(p^k) == x mod f, and gcd(x^(p^(k/q)) - x, f) = 1 for primes q | k
    xp = _ppow_x(p**k, f, p)
    target = [0] * k
    target[1] = 1
    if xp != target:
        return False
    for q in {int(r) for r in factorint(k)}:
        g = _ppow_x(p ** (k // q), f, p)
        g[1] = (g[1] - 1) % p
        if len(_pgcd(g, f[:], p)) != 1:
            return False
    return True


def default_irreducible(p: int, k: int) -> tuple[int, ...]:
    """First monic irreducible of degree k over F_p in lexicographic order."""
    if k == 1:
        return (0, 1)
    for lower in _lex_tuples(k, p):
        cand = lower + (1,)
        if poly_is_irreducible(cand, p):
            return cand
    raise AssertionError("no irreducible polynomial found")


def _lex_tuples(k: int, p: int) -> Iterator[tuple[int, ...]]:
    if k == 0:
        yield ()
        return
    for head in range(p):
        for tail in _lex_tuples(k - 1, p):
            yield (head,) + tail


@dataclass(frozen=True)
class FieldSpec:
    """Description of GF(p^k) with an explicit residue polynomial.

    ``irreducible`` lists coefficients low degree first and must be monic of
    degree k.  When omitted, the lexicographically first monic irreducible is
    used, so equal specs always describe identical arithmetic.
    """

    p: int
    k: int = 1
    irreducible: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        if not isprime(self.p):
            raise ValueError(f"{self.p} is not prime")
        if self.k < 1:
            raise ValueError("extension degree must be at least 1")
        if self.irreducible is not None:
            irr = tuple(c % self.p for c in self.irreducible)
            if len(irr) != self.k + 1 or irr[-1] != 1:
                raise ValueError("residue polynomial must be monic of degree k")
            if not poly_is_irreducible(irr, self.p):
                raise ValueError("residue polynomial is reducible")
            object.__setattr__(self, "irreducible", irr)

    def resolve(self) -> tuple[int, ...]:
        if self.irreducible is not None:
            return self.irreducible
        return default_irreducible(self.p, self.k)

    def to_json(self) -> dict:
        out: dict = {"p": self.p, "k": self.k}
        out["irreducible"] = list(self.resolve())
        return out

    @staticmethod
    def from_json(data: dict) -> "FieldSpec":
        irr = data.get("irreducible")
        return FieldSpec(
            p=int(data["p"]),
            k=int(data.get("k", 1)),
            irreducible=tuple(int(c) for c in irr) if irr is not None else None,
        )


class FiniteField:
    """GF(p^k) as F_p[x]/(f), elements stored as residue coefficient tuples."""

    def __init__(self, spec: FieldSpec) -> None:
        self.spec = spec
        self.p = spec.p
        self.k = spec.k
        self.modulus = spec.resolve()
        self.char = spec.p
        self.order = spec.p**spec.k
        self.name = f"GF({self.order})"

    def coerce(self, v: object) -> "FFEl":
        if isinstance(v, FFEl):
            if v.field == self:
                return v
            raise DomainMismatch(f"element of {v.field.name} in {self.name}")
        if isinstance(v, int):
            coeffs = [0] * self.k
            coeffs[0] = v % self.p
            return FFEl(self, tuple(coeffs))
        if isinstance(v, Fraction):
            if v.denominator % self.p == 0:
                raise DenominatorDivisibleByP(
                    f"denominator of {v} is divisible by {self.p}"
                )
            num = self.coerce(v.numerator)
            den = self.coerce(v.denominator % self.p)
            return num * den.inverse()
        if isinstance(v, (list, tuple)):
            coeffs = [int(c) % self.p for c in v]
            if len(coeffs) > self.k:
                coeffs = _pmod(coeffs, self.modulus, self.p)
            coeffs += [0] * (self.k - len(coeffs))
            return FFEl(self, tuple(coeffs))
        raise DomainMismatch(f"cannot coerce {v!r} into {self.name}")

    @property
    def zero(self) -> "FFEl":
        return self.coerce(0)

    @property
    def one(self) -> "FFEl":
        return self.coerce(1)

    @property
    def gen(self) -> "FFEl":
        """The residue class of x, a generator of the extension."""
        coeffs = [0] * self.k
        if self.k == 1:
            raise ValueError("prime field has no extension generator")
        coeffs[1] = 1
        return FFEl(self, tuple(coeffs))

    def elements(self) -> Iterator["FFEl"]:
        for tup in _lex_tuples(self.k, self.p):
            yield FFEl(self, tup)

    def is_rational(self, v: "FFEl") -> bool:
        return False

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, FiniteField)
            and other.p == self.p
            and other.k == self.k
            and other.modulus == self.modulus
        )

    def __hash__(self) -> int:
        return hash(("ff", self.p, self.k, self.modulus))

    def __repr__(self) -> str:
        return f"FiniteField({self.p}, {self.k})"


@dataclass(frozen=True)
class FFEl:
    field: FiniteField
    coeffs: tuple[int, ...]

    def _check(self, other: object) -> "FFEl":
        if isinstance(other, FFEl):
            if other.field != self.field:
                raise DomainMismatch(
                    f"mixing {self.field.name} with {other.field.name}"
                )
            return other
        if isinstance(other, int):
            return self.field.coerce(other)
        raise DomainMismatch(f"cannot mix {other!r} into {self.field.name}")

    def __add__(self, other: object) -> "FFEl":
        o = self._check(other)
        p = self.field.p
        return FFEl(self.field, tuple((a + b) % p for a, b in zip(self.coeffs, o.coeffs)))

    __radd__ = __add__

    def __neg__(self) -> "FFEl":
        p = self.field.p
        return FFEl(self.field, tuple((-a) % p for a in self.coeffs))

    def __sub__(self, other: object) -> "FFEl":
        return self + (-self._check(other))

    def __rsub__(self, other: object) -> "FFEl":
        return self._check(other) + (-self)

    def __mul__(self, other: object) -> "FFEl":
        o = self._check(other)
        res = _pmul(self.coeffs, o.coeffs, self.field.modulus, self.field.p)
        return FFEl(self.field, tuple(res))

    __rmul__ = __mul__

    def inverse(self) -> "FFEl":
        if not self:
            raise ZeroDivisionError(f"inverse of zero in {self.field.name}")
        # a^(q-2) = a^(-1) in GF(q)
        return self ** (self.field.order - 2)

    def __truediv__(self, other: object) -> "FFEl":
        return self * self._check(other).inverse()

    def __rtruediv__(self, other: object) -> "FFEl":
        return self._check(other) * self.inverse()

    def __pow__(self, n: int) -> "FFEl":
        if n < 0:
            return self.inverse() ** (-n)
        out = self.field.one
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __bool__(self) -> bool:
        return any(self.coeffs)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, int):
            return self == self.field.coerce(other)
        if not isinstance(other, FFEl):
            return NotImplemented
        return self.field == other.field and self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash((self.field.p, self.field.k, self.coeffs))

    def __repr__(self) -> str:
        if self.field.k == 1:
            return f"FFEl({self.coeffs[0]} mod {self.field.p})"
        return f"FFEl({list(self.coeffs)}; {self.field.name})"


# ---------------------------------------------------------------------------
# cross-domain utilities

Domain = Union[Rationals, CyclotomicField, FiniteField]
Scalar = Union[Fraction, CycEl, FFEl]


def promote(v: Scalar | int, dom: Domain) -> Scalar:
    """Explicitly move a scalar into dom, or raise DomainMismatch."""
    return dom.coerce(v)


def reduce_mod(v: Rational, ff: FiniteField) -> FFEl:
    """Reduce a rational mod p, raising when p divides the denominator."""
    return ff.coerce(_as_fraction(v))


def scalar_is_integer(v: Scalar) -> bool:
    if isinstance(v, Fraction):
        return v.denominator == 1
    if isinstance(v, CycEl):
        return v.is_rational() and v.as_fraction().denominator == 1
    raise DomainMismatch("integrality is only meaningful in characteristic 0")


def _rational_sqrt(q: Fraction) -> Fraction | None:
    if q < 0:
        return None
    num, den = q.numerator, q.denominator
    rn, rd = isqrt(num), isqrt(den)
    if rn * rn == num and rd * rd == den:
        return Fraction(rn, rd)
    return None


def sqrt_exact(q: Rational, dom: Domain) -> Scalar:
    """An exact square root of the rational q inside dom.

    In Q only perfect squares succeed.  In Q(zeta_m) the square root is
    assembled from quadratic Gauss sums, which succeeds exactly when the
    conductor of Q(sqrt(q)) divides m.  Raises NonSquareObstruction when no
    root exists in the domain.
    """
    q = _as_fraction(q)
    if q == 0:
        return dom.zero  # type: ignore[union-attr]
    r = _rational_sqrt(q)
    if r is not None:
        return dom.coerce(r)
    if not isinstance(dom, CyclotomicField):
        raise NonSquareObstruction(f"{q} has no square root in {dom.name}")
    m = dom.m
    # q = (s/b)^2 * (sign * f) with f > 0 squarefree
    n_int = q.numerator * q.denominator
    sign = 1 if n_int > 0 else -1
    mag = abs(n_int)
    s = 1
    f = 1
    for prime, exp in factorint(mag).items():
        s *= int(prime) ** (exp // 2)
        if exp % 2:
            f *= int(prime)
    rational_part = Fraction(s, q.denominator)
    # build sqrt(sign * f) from Gauss sums
    root = dom.one
    built_sign = 1
    rem = f
    if rem % 2 == 0:
        if m % 8 != 0:
            raise NonSquareObstruction(
                f"sqrt({q}) needs zeta_8; conductor does not divide {m}"
            )
        z8 = dom.zeta ** (m // 8)
        root = root * (z8 + z8 ** (-1))
        rem //= 2
    for prime in [int(pp) for pp in factorint(rem)]:
        if m % prime != 0:
            raise NonSquareObstruction(
                f"sqrt({q}) needs zeta_{prime}; conductor does not divide {m}"
            )
        zp = dom.zeta ** (m // prime)
        gauss = dom.zero
        for a in range(1, prime):
            gauss = gauss + int(legendre_symbol(a, prime)) * (zp**a)
        root = root * gauss
        if prime % 4 == 3:
            built_sign = -built_sign
    if built_sign != sign:
        if m % 4 != 0:
            raise NonSquareObstruction(
                f"sqrt({q}) needs zeta_4; conductor does not divide {m}"
            )
        root = root * (dom.zeta ** (m // 4))
    out = dom.coerce(rational_part) * root
    if out * out != dom.coerce(q):
        raise AssertionError("Gauss sum square root failed self-check")
    return out
