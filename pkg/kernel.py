"""
qtwist - twisting q-holonomic recurrences by roots of unity

Copyright (C) 2026 qtwist contributors

License: MIT

Exact arithmetic foundation: cyclotomic numbers, sparse polynomials and rational functions.
Polynomials are sympy ``PolyElement`` objects and rational functions are sympy ``FracElement`` objects;
this module adds the cyclotomic layer and the normalizations used everywhere else.
"""

import cmath
import functools
import math
from dataclasses import dataclass

from sympy import I, Poly, exp, factorint, pi, symbols
from sympy.polys.domains import QQ, ZZ, AlgebraicField
from sympy.polys.factortools import dup_zz_cyclotomic_poly
from sympy.polys.polyerrors import ExactQuotientFailed
from sympy.polys.rings import ring as poly_ring


class QTwistError(Exception):
    pass


class CyclotomicDomainError(QTwistError):
    pass


class DivisibilityError(QTwistError):
    pass


class AdmissibilityError(QTwistError):
    pass


@functools.lru_cache(maxsize=None)
def _residue_ring(order: int):
    """ring QQ[z] together with the order-th cyclotomic polynomial in it"""
    R, _ = poly_ring("z", QQ)
    phi = R.from_list([QQ(int(c)) for c in dup_zz_cyclotomic_poly(order, ZZ)])
    return R, phi


def totient(order: int) -> int:
    return _residue_ring(order)[1].degree()


@functools.lru_cache(maxsize=None)
def _trace_of_root(order: int, i: int):
    """trace of zeta_order**i down to QQ, divided by the degree"""
    d = order // math.gcd(order, i)
    exponents = factorint(d).values()
    if any(e > 1 for e in exponents):
        return QQ.zero
    return QQ((-1) ** len(exponents), totient(d))


@functools.lru_cache(maxsize=None)
def cyclotomic_domain(order: int):
    """
    Coefficient domain holding the order-th roots of unity.

    Orders 1 and 2 only need the rationals; everything else is an algebraic field whose
    primitive element is exp(2*pi*I/order).
    """
    if order < 1:
        raise CyclotomicDomainError(f"Invalid root of unity order {order}")
    if order <= 2:
        return QQ
    x = symbols("x")
    minpoly = Poly([int(c) for c in dup_zz_cyclotomic_poly(order, ZZ)], x, domain=ZZ)
    return AlgebraicField(QQ, (minpoly, exp(2 * pi * I / order)), alias=f"zeta{order}")


def domain_order(domain) -> int:
    """order m such that ``domain`` is cyclotomic_domain(m); the rationals report 1"""
    if domain.is_QQ or domain.is_ZZ:
        return 1
    alias = getattr(domain.ext, "alias", None)
    if alias is None or not str(alias).startswith("zeta"):
        raise CyclotomicDomainError(f"Domain {domain} is not a cyclotomic field")
    return int(str(alias)[4:])


def common_domain(*domains):
    order = 1
    for domain in domains:
        order = math.lcm(order, domain_order(domain))
    return cyclotomic_domain(order)


@dataclass(frozen=True, eq=False)
class CyclotomicNumber:
    """
    Element of QQ(zeta_m) stored as its residue modulo the m-th cyclotomic polynomial,
    ``coeffs[i]`` being the coefficient of zeta_m**i.
    """

    order: int
    coeffs: tuple

    def __post_init__(self):
        if self.order < 1:
            raise CyclotomicDomainError(f"Invalid root of unity order {self.order}")
        if len(self.coeffs) != totient(self.order):
            raise CyclotomicDomainError(
                f"Expected {totient(self.order)} coefficients for order {self.order}, got {len(self.coeffs)}"
            )

    @classmethod
    def from_residue(cls, order: int, residue) -> "CyclotomicNumber":
        R, phi = _residue_ring(order)
        residue = R(residue).rem(phi)
        coeffs = [QQ.zero] * totient(order)
        for (i,), c in residue.iterterms():
            coeffs[i] = c
        return cls(order, tuple(coeffs))

    @classmethod
    def rational(cls, value, order: int = 1) -> "CyclotomicNumber":
        return cls.from_residue(order, QQ.convert(value))

    @classmethod
    def zeta(cls, order: int, power: int = 1) -> "CyclotomicNumber":
        R, _ = _residue_ring(order)
        return cls.from_residue(order, R.gens[0] ** (power % order))

    @classmethod
    def from_domain(cls, element, domain) -> "CyclotomicNumber":
        """inverse of to_domain"""
        order = domain_order(domain)
        if order == 1:
            return cls.rational(element)
        R, _ = _residue_ring(order)
        residue = R.from_list([QQ.convert(c) for c in element.to_list()])
        return cls.from_residue(order, residue)

    def _residue(self):
        R, _ = _residue_ring(self.order)
        return R.from_dict({(i,): c for i, c in enumerate(self.coeffs) if c})

    def embed(self, order: int) -> "CyclotomicNumber":
        """Image of this number in QQ(zeta_order); ``order`` must be a multiple of the own order."""
        if order % self.order:
            raise CyclotomicDomainError(f"Cannot embed order {self.order} into order {order}")
        if order == self.order:
            return self
        step = order // self.order
        R, _ = _residue_ring(order)
        return CyclotomicNumber.from_residue(order, R.from_dict({(i * step,): c for i, c in enumerate(self.coeffs)}))

    def _lift(self, other):
        if not isinstance(other, CyclotomicNumber):
            other = CyclotomicNumber.rational(other)
        order = math.lcm(self.order, other.order)
        return self.embed(order), other.embed(order), order

    def __add__(self, other):
        a, b, order = self._lift(other)
        return CyclotomicNumber(order, tuple(x + y for x, y in zip(a.coeffs, b.coeffs)))

    __radd__ = __add__

    def __neg__(self):
        return CyclotomicNumber(self.order, tuple(-c for c in self.coeffs))

    def __sub__(self, other):
        return self + (-other if isinstance(other, CyclotomicNumber) else -QQ.convert(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        a, b, order = self._lift(other)
        return CyclotomicNumber.from_residue(order, a._residue() * b._residue())

    __rmul__ = __mul__

    def inverse(self) -> "CyclotomicNumber":
        if self.is_zero:
            raise CyclotomicDomainError("Inversion of zero in a cyclotomic field")
        _, phi = _residue_ring(self.order)
        s, h = self._residue().half_gcdex(phi)
        # phi is irreducible, so h is a nonzero constant
        return CyclotomicNumber.from_residue(self.order, s.quo_ground(h.LC))

    def __truediv__(self, other):
        if not isinstance(other, CyclotomicNumber):
            other = CyclotomicNumber.rational(other)
        return self * other.inverse()

    def __pow__(self, exponent: int):
        if exponent < 0:
            return self.inverse() ** (-exponent)
        R, phi = _residue_ring(self.order)
        result, base = R.one, self._residue()
        while exponent:
            if exponent & 1:
                result = (result * base).rem(phi)
            base = (base * base).rem(phi)
            exponent >>= 1
        return CyclotomicNumber.from_residue(self.order, result)

    def __eq__(self, other):
        if not isinstance(other, CyclotomicNumber):
            try:
                other = CyclotomicNumber.rational(other)
            except Exception:
                return NotImplemented
        a, b, _ = self._lift(other)
        return a.coeffs == b.coeffs

    def __hash__(self):
        # normalized trace to QQ, unchanged by embedding into a larger order
        return hash(sum((c * _trace_of_root(self.order, i) for i, c in enumerate(self.coeffs) if c), QQ.zero))

    @property
    def is_zero(self) -> bool:
        return not any(self.coeffs)

    @property
    def is_rational(self) -> bool:
        return not any(self.coeffs[1:])

    def rational_value(self):
        if not self.is_rational:
            raise CyclotomicDomainError(f"{self} is not rational")
        return self.coeffs[0]

    def multiplicative_order(self) -> int:
        """smallest l > 0 with self**l == 1, or 0 when no such l up to the field's root count exists"""
        limit = 2 * self.order if self.order % 2 else self.order
        power = self
        for ell in range(1, limit + 1):
            if power == 1:
                return ell
            power = power * self
        return 0

    def to_complex(self) -> complex:
        z = cmath.exp(2j * cmath.pi / self.order)
        return sum(float(QQ.to_sympy(c)) * z**i for i, c in enumerate(self.coeffs))

    def to_domain(self, domain):
        """Element of the sympy domain ``domain`` (QQ or a cyclotomic algebraic field)."""
        target = domain_order(domain)
        if target == 1 or self.is_rational:
            return domain.convert(self.rational_value())
        embedded = self.embed(math.lcm(self.order, target))
        if embedded.order != target:
            raise CyclotomicDomainError(f"{self} does not live in {domain}")
        result, power = domain.zero, domain.one
        for c in embedded.coeffs:
            if c:
                result += domain.convert(c) * power
            power = power * domain.unit
        return result

    def __str__(self):
        if self.is_rational:
            return str(QQ.to_sympy(self.coeffs[0]))
        out = ""
        for i, c in enumerate(self.coeffs):
            if not c:
                continue
            magnitude = QQ.to_sympy(abs(c))
            if i == 0:
                text = str(magnitude)
            else:
                zeta = f"zeta({self.order})" + ("" if i == 1 else f"^{i}")
                text = zeta if magnitude == 1 else f"{magnitude}*{zeta}"
            if not out:
                out = f"-{text}" if c < 0 else text
            else:
                out += f" - {text}" if c < 0 else f" + {text}"
        return out


def cyclo_arith(a: CyclotomicNumber, b: CyclotomicNumber = None, op: str = "add", order: int = None):
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    if op == "inv":
        return a.inverse()
    if op == "embed":
        if order is None:
            return a.rational_value() if a.is_rational else a
        return a.embed(order)
    raise ValueError(f"Unknown cyclotomic operation {op}")


def convert_coefficient(c, source, target):
    """Move a ground element from cyclotomic domain ``source`` into ``target``."""
    if source == target:
        return c
    if domain_order(source) == 1:
        return target.convert(c, source)
    return CyclotomicNumber.from_domain(c, source).to_domain(target)


def change_domain(p, domain):
    """polynomial ``p`` with its coefficients moved into the cyclotomic ``domain``"""
    source = p.ring.domain
    if source == domain:
        return p
    ring = p.ring.clone(domain=domain)
    return ring.from_dict({m: convert_coefficient(c, source, domain) for m, c in p.iterterms()})


def _check_rings(a, b):
    if a.ring != b.ring:
        raise CyclotomicDomainError(f"Incompatible polynomial rings {a.ring} and {b.ring}")


def poly_arith(a, b, op: str):
    _check_rings(a, b)
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "exact_div":
        return exact_div(a, b)
    raise ValueError(f"Unknown polynomial operation {op}")


def exact_div(a, b):
    if not b:
        raise DivisibilityError("Division by the zero polynomial")
    try:
        return a.exquo(b)
    except ExactQuotientFailed:
        raise DivisibilityError(f"{b.as_expr()} does not divide {a.as_expr()}")


def _integral_scale(polys):
    """rational factor making all coefficients integral and jointly primitive (QQ coefficients)"""
    denominator, numerator = ZZ.one, ZZ.zero
    for p in polys:
        for c in p.itercoeffs():
            denominator = ZZ.lcm(denominator, QQ.denom(c))
    for p in polys:
        for c in p.itercoeffs():
            numerator = ZZ.gcd(numerator, QQ.numer(c) * (denominator // QQ.denom(c)))
    return QQ(int(denominator), int(numerator)) if numerator else QQ.one


def _algebraic_scale(polys, lead):
    """factor making ``lead`` monic-led and all rational coordinates jointly integral and primitive"""
    domain = polys[0].ring.domain
    inverse = domain.one / lead
    scaled = [p.mul_ground(inverse) for p in polys]
    denominator, numerator = ZZ.one, ZZ.zero
    for p in scaled:
        for c in p.itercoeffs():
            for x in c.to_list():
                denominator = ZZ.lcm(denominator, QQ.denom(x))
    for p in scaled:
        for c in p.itercoeffs():
            for x in c.to_list():
                numerator = ZZ.gcd(numerator, QQ.numer(x) * (denominator // QQ.denom(x)))
    factor = QQ(int(denominator), int(numerator)) if numerator else QQ.one
    return inverse * domain.convert(factor)


def primitive_vector(polys: list, lead_index: int = 0) -> list:
    """
    Scale polynomials by a common nonzero factor of the coefficient field so that they
    are content-free.

    Over the rationals the polynomial gcd is divided out, coefficients become coprime integers and
    the leading coefficient of ``polys[lead_index]`` is positive. Over a cyclotomic field only the
    unit is normalized: that leading coefficient becomes a positive integer and the rational
    coordinates are jointly primitive.
    """
    if not any(polys):
        return list(polys)
    domain = polys[0].ring.domain
    if domain.is_QQ:
        g = polys[0].ring.zero
        for p in polys:
            g = g.gcd(p)
        polys = [p.exquo(g) for p in polys]
        scale = _integral_scale(polys)
        polys = [p.mul_ground(scale) for p in polys]
        lead = polys[lead_index]
        if lead and lead.LC < 0:
            polys = [-p for p in polys]
        return polys
    lead = polys[lead_index]
    if not lead:
        lead = next(p for p in polys if p)
    scale = _algebraic_scale(polys, lead.LC)
    return [p.mul_ground(scale) for p in polys]


def normalize_polynomial(p):
    """``p`` with its rational content removed and a positive (or unit) leading coefficient"""
    if not p:
        return p
    if p.ring.domain.is_QQ:
        p = p.mul_ground(_integral_scale([p]))
        return -p if p.LC < 0 else p
    return p.mul_ground(_algebraic_scale([p], p.LC))


def poly_gcd(a, b):
    """gcd normalized to be primitive with positive leading coefficient"""
    _check_rings(a, b)
    return normalize_polynomial(a.gcd(b))


def rational_function(num, den=None):
    field = num.ring.to_field()
    if den is None:
        return field.new(num)
    if not den:
        raise CyclotomicDomainError("Rational function with zero denominator")
    return field.new(num, den)


def normalize_fraction(x):
    return x.field.new(x.numer, x.denom)


def substitute_scaled(p, var: str, scale: CyclotomicNumber, root_index: int = 1):
    """
    Map every monomial var**e of ``p`` to scale**e * var**(e / root_index).

    The result lives over the smallest cyclotomic domain containing both the coefficients of ``p``
    and ``scale``.
    """
    ring = p.ring
    names = [str(s) for s in ring.symbols]
    if var not in names:
        raise AdmissibilityError(f"Unknown variable {var} in {ring}")
    i = names.index(var)
    target = ring.domain if scale.is_rational else common_domain(ring.domain, cyclotomic_domain(scale.order))
    powers = {}
    terms = {}
    for monom, coeff in p.iterterms():
        e = monom[i]
        if e % root_index:
            raise AdmissibilityError(f"Exponent {e} of {var} is not divisible by {root_index}")
        if e not in powers:
            powers[e] = (scale**e).to_domain(target)
        reduced = monom[:i] + (e // root_index,) + monom[i + 1 :]
        terms[reduced] = terms.get(reduced, target.zero) + convert_coefficient(coeff, ring.domain, target) * powers[e]
    return ring.clone(domain=target).from_dict(terms)
