"""
qtwist - twisting q-holonomic recurrences by roots of unity

Copyright (C) 2026 qtwist contributors

License: MIT

Operators of the q-Ore algebra K(q, M)<L>. Coefficients are written to the left of the
L-powers and the commutation rule is L_k c(q, M) = c(q, ..., q_a M_k, ...) L_k with q_a the
q-variable attached to M_k.
"""

import functools
import itertools
import logging
from dataclasses import dataclass

from sympy.polys.domains import QQ
from sympy.polys.fields import FracField
from sympy.polys.orderings import grevlex, grlex, lex

from config import config
from kernel import QTwistError, convert_coefficient, cyclotomic_domain, primitive_vector, CyclotomicNumber


class SignatureError(QTwistError):
    pass


class RecurrenceError(QTwistError):
    pass


class DimensionError(QTwistError):
    pass


class BudgetError(QTwistError):
    pass


class CoverageError(QTwistError):
    pass


@dataclass(frozen=True)
class OreAlgebraSignature:
    """
    Variables of an Ore algebra: q-variables, the M- and L-variables of every shift direction and,
    for every direction k, the position ``q_index[k]`` of the q-variable that M_k is a power of.
    """

    q_vars: tuple
    m_vars: tuple
    l_vars: tuple
    q_index: tuple
    domain: object = QQ

    def __post_init__(self):
        for name in ["q_vars", "m_vars", "l_vars", "q_index"]:
            object.__setattr__(self, name, tuple(getattr(self, name)))
        r, s = len(self.m_vars), len(self.q_vars)
        if r < 1 or s < 1:
            raise SignatureError("At least one q-variable and one shift direction are required")
        if len(self.l_vars) != r or len(self.q_index) != r:
            raise SignatureError("Every shift direction needs exactly one M-variable, L-variable and q-variable")
        if s > r:
            raise SignatureError(f"{s} q-variables declared for only {r} shift directions")
        if any(not 0 <= a < s for a in self.q_index):
            raise SignatureError(f"Invalid q-variable assignment {self.q_index}")
        names = self.q_vars + self.m_vars + self.l_vars
        if len(set(names)) != len(names):
            raise SignatureError(f"Variable names must be pairwise distinct: {', '.join(names)}")

    @classmethod
    def univariate(cls, q="q", m="M", l="L", domain=QQ):
        return cls((q,), (m,), (l,), (0,), domain)

    @property
    def r(self) -> int:
        return len(self.m_vars)

    @property
    def s(self) -> int:
        return len(self.q_vars)

    @functools.cached_property
    def field(self):
        return FracField(self.q_vars + self.m_vars, self.domain, lex)

    @property
    def ring(self):
        return self.field.ring

    def with_domain(self, domain) -> "OreAlgebraSignature":
        return OreAlgebraSignature(self.q_vars, self.m_vars, self.l_vars, self.q_index, domain)

    def compatible(self, other: "OreAlgebraSignature") -> bool:
        return (self.q_vars, self.m_vars, self.l_vars, self.q_index) == (
            other.q_vars,
            other.m_vars,
            other.l_vars,
            other.q_index,
        )

    def coefficient(self, value):
        """element of K(q, M) built from a number, sympy expression, ring or field element"""
        if isinstance(value, CyclotomicNumber):
            return self.field.ground_new(value.to_domain(self.domain))
        if hasattr(value, "ring") and value.ring.symbols == self.ring.symbols and value.ring.domain != self.domain:
            value = value.ring.clone(domain=self.domain).from_dict(
                {m: convert_coefficient(c, value.ring.domain, self.domain) for m, c in value.iterterms()}
            )
        return self.field.field_new(value)

    def unit(self, k: int, power: int = 1) -> tuple:
        return tuple(power if i == k else 0 for i in range(self.r))

    def shift_poly(self, p, beta: tuple):
        """sigma^beta on a polynomial: M_k -> q_{a_k}^{beta_k} M_k"""
        if not any(beta):
            return p
        s = self.s
        terms = {}
        for monom, coeff in p.iterterms():
            exps = list(monom)
            for k, b in enumerate(beta):
                if b:
                    exps[self.q_index[k]] += b * monom[s + k]
            terms[tuple(exps)] = coeff
        return p.ring.from_dict(terms)

    def shift(self, c, beta: tuple):
        """sigma^beta on a rational function; sigma is an automorphism, so no cancellation is needed"""
        if not any(beta):
            return c
        numer, denom = self.shift_poly(c.numer, beta), self.shift_poly(c.denom, beta)
        u = denom.canonical_unit()
        if u != self.domain.one:
            numer, denom = numer.mul_ground(u), denom.mul_ground(u)
        return self.field.raw_new(numer, denom)


_ORDER_KEYS = {
    "lex": lex,
    "deglex": grlex,
    "degrevlex": grevlex,
}


@dataclass(frozen=True)
class MonomialOrder:
    """
    Term order on L-exponent vectors, optionally after permuting variables by ``priority``.
    In module mode monomials carry a component index and component 0 ranks above component 1
    regardless of the term (position over term).
    """

    kind: str = "degrevlex"
    priority: tuple = None
    module_mode: bool = False

    def __post_init__(self):
        if self.kind not in _ORDER_KEYS:
            raise QTwistError(f"Unknown monomial order {self.kind}")
        if self.priority is not None:
            object.__setattr__(self, "priority", tuple(self.priority))

    @classmethod
    def default(cls, module_mode=False) -> "MonomialOrder":
        return cls(config.default_order, module_mode=module_mode)

    def term_key(self, alpha: tuple):
        if self.priority is not None:
            alpha = tuple(alpha[i] for i in self.priority)
        return _ORDER_KEYS[self.kind](alpha)

    def key(self, monomial: tuple):
        component, alpha = monomial
        return (-component, self.term_key(alpha))


def _add(alpha, beta):
    return tuple(a + b for a, b in zip(alpha, beta))


def _divides(alpha, beta) -> bool:
    return all(a <= b for a, b in zip(alpha, beta))


class OreOperator:
    """Finite sum of c_alpha(q, M) * L^alpha with rational-function coefficients."""

    __slots__ = ("signature", "terms")

    def __init__(self, signature: OreAlgebraSignature, terms: dict = None):
        self.signature = signature
        self.terms = {tuple(alpha): c for alpha, c in (terms or {}).items() if c}

    @classmethod
    def zero(cls, signature):
        return cls(signature)

    @classmethod
    def from_coefficient(cls, signature, value):
        return cls(signature, {(0,) * signature.r: signature.coefficient(value)})

    @classmethod
    def one(cls, signature):
        return cls.from_coefficient(signature, 1)

    @classmethod
    def monomial(cls, signature, alpha: tuple, value=1):
        return cls(signature, {tuple(alpha): signature.coefficient(value)})

    @classmethod
    def shift_operator(cls, signature, k: int = 0, power: int = 1):
        return cls.monomial(signature, signature.unit(k, power))

    @classmethod
    def multiplier(cls, signature, k: int = 0):
        """the operator M_k"""
        return cls.from_coefficient(signature, signature.ring.gens[signature.s + k])

    @classmethod
    def q_power(cls, signature, j: int = 0, power: int = 1):
        return cls.from_coefficient(signature, signature.ring.gens[j] ** power)

    def __bool__(self):
        return bool(self.terms)

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def _coerce(self, other):
        if isinstance(other, OreOperator):
            if not self.signature.compatible(other.signature):
                raise SignatureError("Operators belong to different algebras")
            if other.signature.domain != self.signature.domain:
                raise SignatureError("Operators have different coefficient domains")
            return other
        return OreOperator.from_coefficient(self.signature, other)

    def __add__(self, other):
        other = self._coerce(other)
        terms = dict(self.terms)
        for alpha, c in other.terms.items():
            terms[alpha] = terms[alpha] + c if alpha in terms else c
        return OreOperator(self.signature, terms)

    __radd__ = __add__

    def __neg__(self):
        return OreOperator(self.signature, {alpha: -c for alpha, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, ModuleElement):
            return NotImplemented
        return multiply(self, self._coerce(other))

    def __rmul__(self, other):
        return multiply(self._coerce(other), self)

    def __pow__(self, exponent: int):
        if exponent < 0:
            raise QTwistError(f"Operators have no inverse, got exponent {exponent}")
        result = OreOperator.one(self.signature)
        for _ in range(exponent):
            result = result * self
        return result

    def __eq__(self, other):
        try:
            return (self - other).is_zero
        except (SignatureError, TypeError, NotImplementedError):
            return False

    __hash__ = None

    def support(self, order: MonomialOrder = None) -> list:
        order = order or MonomialOrder.default()
        return sorted(self.terms, key=lambda alpha: order.term_key(alpha), reverse=True)

    def leading_monomial(self, order: MonomialOrder = None) -> tuple:
        if not self.terms:
            raise QTwistError("The zero operator has no leading monomial")
        return self.support(order)[0]

    def leading_coefficient(self, order: MonomialOrder = None):
        return self.terms[self.leading_monomial(order)]

    def coefficient(self, alpha: tuple):
        return self.terms.get(tuple(alpha), self.signature.field.zero)

    def degree(self, k: int = 0) -> int:
        return max((alpha[k] for alpha in self.terms), default=-1)

    @property
    def order(self) -> int:
        return self.degree(0)

    def shift_left(self, beta: tuple) -> "OreOperator":
        """L^beta * self"""
        alg = self.signature
        return OreOperator(alg, {_add(alpha, beta): alg.shift(c, beta) for alpha, c in self.terms.items()})

    def __str__(self):
        return format_element(self)

    def __repr__(self):
        return f"OreOperator({format_element(self)})"


class ModuleElement:
    """
    Element (P, B) of the free module of rank two over the Ore algebra, standing for the
    inhomogeneous relation P f = B(1) with 1 the constant sequence.
    """

    __slots__ = ("components",)

    def __init__(self, *components):
        if len(components) == 1 and isinstance(components[0], (list, tuple)):
            components = tuple(components[0])
        if not components:
            raise QTwistError("A module element needs at least one component")
        first = components[0].signature
        for component in components[1:]:
            if not first.compatible(component.signature):
                raise SignatureError("Module components belong to different algebras")
        self.components = tuple(components)

    @classmethod
    def inhomogeneous(cls, operator: OreOperator, rhs) -> "ModuleElement":
        """the relation operator(f) = rhs(q, q^n)"""
        if not isinstance(rhs, OreOperator):
            rhs = OreOperator.from_coefficient(operator.signature, rhs)
        return cls(operator, rhs)

    @property
    def signature(self):
        return self.components[0].signature

    @property
    def is_zero(self) -> bool:
        return all(c.is_zero for c in self.components)

    def __bool__(self):
        return not self.is_zero

    def __add__(self, other):
        return ModuleElement(*(a + b for a, b in zip(self.components, other.components)))

    def __neg__(self):
        return ModuleElement(*(-a for a in self.components))

    def __sub__(self, other):
        return self + (-other)

    def __rmul__(self, other):
        """left multiplication by an operator or a coefficient"""
        return ModuleElement(*(other * a for a in self.components))

    def __eq__(self, other):
        if not isinstance(other, ModuleElement) or len(other.components) != len(self.components):
            return False
        return all(a == b for a, b in zip(self.components, other.components))

    __hash__ = None

    def __getitem__(self, index):
        return self.components[index]

    def __str__(self):
        return format_element(self)

    def __repr__(self):
        return f"ModuleElement({format_element(self)})"


def _vector(element) -> dict:
    if isinstance(element, ModuleElement):
        return {(i, alpha): c for i, component in enumerate(element.components) for alpha, c in component.terms.items()}
    return {(0, alpha): c for alpha, c in element.terms.items()}


def _element(signature, vector: dict, components: int):
    parts = [{} for _ in range(components)]
    for (i, alpha), c in vector.items():
        parts[i][alpha] = c
    operators = [OreOperator(signature, part) for part in parts]
    return operators[0] if components == 1 else ModuleElement(*operators)


def _components(element) -> int:
    return len(element.components) if isinstance(element, ModuleElement) else 1


def _shift_vector(signature, vector: dict, beta: tuple) -> dict:
    return {(i, _add(alpha, beta)): signature.shift(c, beta) for (i, alpha), c in vector.items()}


def _leading(vector: dict, order: MonomialOrder):
    return max(vector, key=order.key)


def _make_monic(vector: dict, order: MonomialOrder) -> dict:
    lc = vector[_leading(vector, order)]
    if lc == 1:
        return vector
    inverse = 1 / lc
    return {m: inverse * c for m, c in vector.items()}


def _subtract_multiple(target: dict, factor, vector: dict) -> None:
    for m, c in vector.items():
        value = target[m] - factor * c if m in target else -factor * c
        if value:
            target[m] = value
        else:
            target.pop(m, None)


class _Reducer:
    """monic generator vectors with their leading monomials and a computation-local shift memo"""

    def __init__(self, signature, vectors, order, cache=None):
        self.signature = signature
        self.order = order
        self.vectors = list(vectors)
        self.leads = [_leading(v, order) for v in self.vectors]
        self.cache = {} if cache is None else cache

    def append(self, vector):
        self.vectors.append(vector)
        self.leads.append(_leading(vector, self.order))

    def shifted(self, index: int, gamma: tuple) -> dict:
        key = (id(self.vectors[index]), gamma)
        if key not in self.cache:
            self.cache[key] = (self.vectors[index], _shift_vector(self.signature, self.vectors[index], gamma))
        return self.cache[key][1]

    def find(self, monomial, skip=None):
        component, alpha = monomial
        for index, (c, lead) in enumerate(self.leads):
            if index != skip and c == component and _divides(lead, alpha):
                return index, tuple(a - b for a, b in zip(alpha, lead))
        return None

    def reduce(self, vector: dict, skip=None) -> dict:
        vector = dict(vector)
        remainder = {}
        while vector:
            monomial = _leading(vector, self.order)
            coeff = vector[monomial]
            found = self.find(monomial, skip)
            if found is None:
                remainder[monomial] = coeff
                del vector[monomial]
                continue
            index, gamma = found
            _subtract_multiple(vector, coeff, self.shifted(index, gamma))
            vector.pop(monomial, None)
        return remainder


class LeftGroebnerBasis:
    """
    Generators of a left ideal (or left submodule) together with the monomial order they form a
    Gröbner basis for. The generators are trusted; use left_buchberger to complete arbitrary input.
    """

    def __init__(self, generators, order: MonomialOrder = None):
        generators = [g for g in generators if g]
        if not generators:
            raise QTwistError("A Gröbner basis needs at least one nonzero generator")
        self.generators = tuple(generators)
        self.components = _components(generators[0])
        if any(_components(g) != self.components for g in generators):
            raise SignatureError("Mixed operators and module elements in one basis")
        self.signature = generators[0].signature
        self.order = order or MonomialOrder.default(module_mode=self.components > 1)
        self._reducer = _Reducer(self.signature, [_make_monic(_vector(g), self.order) for g in generators], self.order)

    def reducer(self, cache=None) -> _Reducer:
        return _Reducer(self.signature, self._reducer.vectors, self.order, cache)

    @property
    def leading_monomials(self) -> list:
        return list(self._reducer.leads)

    @functools.cached_property
    def stair_monomials(self) -> list:
        return _stairs(self.leading_monomials, self.components, self.signature.r, self.order)

    @property
    def stairs(self) -> list:
        if self.components == 1:
            return [alpha for _, alpha in self.stair_monomials]
        return list(self.stair_monomials)

    @property
    def rank(self) -> int:
        return len(self.stair_monomials)

    def __len__(self):
        return len(self.generators)

    def __iter__(self):
        return iter(self.generators)

    def __getitem__(self, index):
        return self.generators[index]


def _stairs(leads, components, r, order) -> list:
    result = []
    for component in range(components):
        own = [alpha for c, alpha in leads if c == component]
        bounds = []
        for k in range(r):
            pure = [alpha[k] for alpha in own if all(alpha[j] == 0 for j in range(r) if j != k)]
            if not pure:
                raise DimensionError(
                    f"The ideal is not zero-dimensional: no leading monomial is a pure power of L{k + 1}"
                    + (f" in component {component + 1}" if components > 1 else "")
                )
            bounds.append(min(pure))
        for alpha in itertools.product(*(range(b) for b in bounds)):
            if not any(_divides(lead, alpha) for lead in own):
                result.append((component, tuple(alpha)))
    return sorted(result, key=order.key)


def under_stairs(G: LeftGroebnerBasis) -> list:
    return G.stairs


def multiply(A: OreOperator, B: OreOperator) -> OreOperator:
    if not A.signature.compatible(B.signature) or A.signature.domain != B.signature.domain:
        raise SignatureError("Cannot multiply operators of different algebras")
    alg = A.signature
    terms = {}
    for beta, b in B.terms.items():
        for alpha, a in A.terms.items():
            c = a * alg.shift(b, alpha)
            key = _add(alpha, beta)
            terms[key] = terms[key] + c if key in terms else c
    return OreOperator(alg, terms)


def left_reduce(A, G: LeftGroebnerBasis, cache: dict = None):
    """
    Remainder of A modulo the left ideal generated by G: A minus a left combination of G
    whose monomials are all under the stairs of G.
    """
    if not A.signature.compatible(G.signature):
        raise SignatureError("Operator and basis belong to different algebras")
    if _components(A) != G.components:
        raise SignatureError("Operator and basis have different numbers of components")
    remainder = G.reducer(cache).reduce(_vector(A))
    return _element(G.signature, remainder, G.components)


def _s_vector(reducer: _Reducer, i: int, j: int):
    lead_i, lead_j = reducer.leads[i], reducer.leads[j]
    lcm = tuple(max(a, b) for a, b in zip(lead_i[1], lead_j[1]))
    gamma_i = tuple(a - b for a, b in zip(lcm, lead_i[1]))
    gamma_j = tuple(a - b for a, b in zip(lcm, lead_j[1]))
    vector = dict(reducer.shifted(i, gamma_i))
    _subtract_multiple(vector, 1, reducer.shifted(j, gamma_j))
    return vector


def _auto_reduce(signature, vectors: list, order: MonomialOrder) -> list:
    leads = [_leading(v, order) for v in vectors]
    minimal = []
    for i, (vector, lead) in enumerate(zip(vectors, leads)):
        dominated = False
        for j, other in enumerate(leads):
            if j == i or other[0] != lead[0] or not _divides(other[1], lead[1]):
                continue
            if other != lead or j < i:
                dominated = True
                break
        if not dominated:
            minimal.append(vector)
    reducer = _Reducer(signature, minimal, order)
    return [_make_monic(reducer.reduce(v, skip=i), order) for i, v in enumerate(minimal)]


def left_buchberger(F: list, order: MonomialOrder = None, max_basis_size: int = None) -> LeftGroebnerBasis:
    """
    Complete F to an auto-reduced left Gröbner basis. Raises BudgetError once more than
    ``max_basis_size`` elements would be needed.
    """
    F = [f for f in F if f]
    if not F:
        raise QTwistError("Cannot compute a Gröbner basis of the zero ideal")
    signature = F[0].signature
    components = _components(F[0])
    order = order or MonomialOrder.default(module_mode=components > 1)
    if max_basis_size is None:
        max_basis_size = config.as_int("max_basis_size")

    reducer = _Reducer(signature, [], order)
    for f in F:
        r = reducer.reduce(_vector(f))
        if r:
            reducer.append(_make_monic(r, order))
    if len(reducer.vectors) > max_basis_size:
        raise BudgetError(f"Gröbner basis exceeds the configured maximum of {max_basis_size} elements")
    pairs = [
        (i, j)
        for j in range(len(reducer.vectors))
        for i in range(j)
        if reducer.leads[i][0] == reducer.leads[j][0]
    ]

    def pair_key(pair):
        i, j = pair
        lcm = tuple(max(a, b) for a, b in zip(reducer.leads[i][1], reducer.leads[j][1]))
        return order.key((reducer.leads[i][0], lcm))

    while pairs:
        pairs.sort(key=pair_key, reverse=True)
        i, j = pairs.pop()
        r = reducer.reduce(_s_vector(reducer, i, j))
        if not r:
            continue
        reducer.append(_make_monic(r, order))
        if len(reducer.vectors) > max_basis_size:
            raise BudgetError(f"Gröbner basis exceeds the configured maximum of {max_basis_size} elements")
        new = len(reducer.vectors) - 1
        pairs.extend((i, new) for i in range(new) if reducer.leads[i][0] == reducer.leads[new][0])
        logging.debug(f"Buchberger: basis size {len(reducer.vectors)}, {len(pairs)} pairs pending")

    basis = _auto_reduce(signature, reducer.vectors, order)
    basis.sort(key=lambda v: order.key(_leading(v, order)))
    return LeftGroebnerBasis([_element(signature, v, components) for v in basis], order)


def from_recurrences(signature: OreAlgebraSignature, recs: list) -> list:
    """
    One operator sum_j c_{k,j} L_k^j per direction k, given the coefficient lists c_{k,0}, ..., c_{k,d_k}.
    """
    if len(recs) > signature.r:
        raise RecurrenceError(f"{len(recs)} recurrences given for {signature.r} shift directions")
    operators = []
    for k, coeffs in enumerate(recs):
        coeffs = [signature.coefficient(c) for c in coeffs]
        if not coeffs or not coeffs[-1]:
            raise RecurrenceError(f"Leading coefficient of recurrence {k + 1} is zero")
        operators.append(OreOperator(signature, {signature.unit(k, j): c for j, c in enumerate(coeffs)}))
    return operators


def right_divide(A: OreOperator, P: OreOperator):
    """Q, R with A = Q * P + R and ord R < ord P (one shift direction)."""
    if A.signature.r != 1:
        raise SignatureError("Right division needs a single shift direction")
    if P.is_zero:
        raise QTwistError("Division by the zero operator")
    alg = A.signature
    d = P.order
    lc = P.coefficient((d,))
    quotient = OreOperator.zero(alg)
    remainder = A
    while not remainder.is_zero and remainder.order >= d:
        e = remainder.order - d
        t = OreOperator.monomial(alg, (e,), remainder.coefficient((remainder.order,)) / alg.shift(lc, (e,)))
        quotient = quotient + t
        remainder = remainder - t * P
    return quotient, remainder


def polynomial_parts(element) -> dict:
    """(component, alpha) -> polynomial numerator of an element with cleared denominators"""
    vector = _vector(element)
    if not vector:
        return {}
    ring = element.signature.ring
    common = ring.one
    for c in vector.values():
        if c.denom != ring.one:
            common = common.lcm(c.denom)
    return {m: c.numer * common.exquo(c.denom) for m, c in vector.items()}


def normalize(element, order: MonomialOrder = None):
    """
    Same element scaled into polynomial coefficients without content, integral and with
    positive leading coefficient (leading monomial of ``order``, leading term of that coefficient
    in lex order of the q- then M-variables).
    """
    if not element:
        return element
    components = _components(element)
    order = order or MonomialOrder.default(module_mode=components > 1)
    parts = polynomial_parts(element)
    monomials = sorted(parts, key=order.key, reverse=True)
    polys = primitive_vector([parts[m] for m in monomials], lead_index=0)
    field = element.signature.field
    vector = {m: field.raw_new(p, field.ring.one) for m, p in zip(monomials, polys)}
    return _element(element.signature, vector, components)


def evaluate_coefficient(signature: OreAlgebraSignature, c, n: tuple, value_ring):
    """
    Value of c(q, M) at M_k = q_{a_k}^{n_k} as (numerator, denominator) in ``value_ring``,
    whose variables are the q-variables.
    """
    s = signature.s
    source, target = c.numer.ring.domain, value_ring.domain
    parts = []
    for poly in (c.numer, c.denom):
        terms = {}
        for monom, coeff in poly.iterterms():
            exps = list(monom[:s])
            for k in range(signature.r):
                exps[signature.q_index[k]] += monom[s + k] * n[k]
            key = tuple(exps)
            value = convert_coefficient(coeff, source, target)
            terms[key] = terms[key] + value if key in terms else value
        parts.append(terms)
    lowest = [min((min(m[j] for m in part) for part in parts if part), default=0) for j in range(s)]
    shift = [-e if e < 0 else 0 for e in lowest]
    numer, denom = (
        value_ring.from_dict({tuple(e + d for e, d in zip(m, shift)): v for m, v in part.items()}) for part in parts
    )
    return numer, denom


def combine_fractions(pairs, ring):
    """sum of (numerator, denominator) pairs, accumulated over a common denominator"""
    exact_gcd = ring.domain.is_QQ
    num, den = ring.zero, ring.one
    for a, b in pairs:
        if not a:
            continue
        if b == den:
            num += a
        elif b == 1:
            num += a * den
        elif exact_gcd:
            _, cb, cd = b.cofactors(den)
            num = num * cb + a * cd
            den = den * cb
        else:
            num = num * b + a * den
            den = den * b
    return num, den


def value_ring_for(signature: OreAlgebraSignature, values: dict):
    first = next(iter(values.values()))
    ring = first.field.ring
    if tuple(str(s) for s in ring.symbols) != signature.q_vars:
        raise SignatureError(f"Table variables {ring.symbols} do not match the q-variables {signature.q_vars}")
    return first.field


def apply(P, values: dict, window) -> dict:
    """
    (P f)_n for every index n in ``window``; ``values`` maps index tuples to rational functions in
    the q-variables.
    """
    signature = P.signature
    if not values:
        raise CoverageError("Cannot apply an operator to an empty table")
    field = value_ring_for(signature, values)
    ring = field.ring
    result = {}
    for n in window:
        n = (n,) if isinstance(n, int) else tuple(n)
        pairs = []
        for alpha, c in P.terms.items():
            index = _add(n, alpha)
            if index not in values:
                raise CoverageError(f"Table has no value at index {index[0] if len(index) == 1 else index}")
            numer, denom = evaluate_coefficient(signature, c, n, ring)
            if not denom:
                raise CoverageError(f"Coefficient of L^{alpha} has a pole at index {n[0] if len(n) == 1 else n}")
            value = values[index]
            pairs.append((numer * value.numer, denom * value.denom))
        num, den = combine_fractions(pairs, ring)
        if not num:
            result[n] = field.zero
        elif ring.domain.is_QQ:
            result[n] = field.new(num, den)
        else:
            result[n] = field.raw_new(num, den)
    return result


def _format_ground(c, domain) -> str:
    if domain.is_QQ or domain.is_ZZ:
        return str(domain.to_sympy(c))
    return str(CyclotomicNumber.from_domain(c, domain))


def format_polynomial(p) -> str:
    """polynomial in the document syntax, terms in descending lex order"""
    if not p:
        return "0"
    names = [str(s) for s in p.ring.symbols]
    domain = p.ring.domain
    pieces = []
    for monom, coeff in p.terms():
        factors = [name if e == 1 else f"{name}^{e}" for name, e in zip(names, monom) if e]
        text = _format_ground(coeff, domain)
        negative = text.startswith("-") and " " not in text
        if negative:
            text = text[1:]
        elif " " in text:
            text = f"({text})"
        if factors:
            monomial = "*".join(factors)
            text = monomial if text == "1" else f"{text}*{monomial}"
        pieces.append((negative, text))
    out = ("-" if pieces[0][0] else "") + pieces[0][1]
    for negative, text in pieces[1:]:
        out += (" - " if negative else " + ") + text
    return out


def _format_operator(operator: OreOperator, order: MonomialOrder) -> str:
    if operator.is_zero:
        return "0"
    alg = operator.signature
    pieces = []
    for alpha in operator.support(order):
        c = operator.terms[alpha]
        coeff = format_polynomial(c.numer)
        integral = c.denom == c.denom.ring.one
        if not integral:
            coeff = f"({coeff})/({format_polynomial(c.denom)})"
        shifts = "*".join(
            name if a == 1 else f"{name}^{a}" for name, a in zip(alg.l_vars, alpha) if a
        )
        if not shifts:
            pieces.append(coeff)
        elif coeff == "1":
            pieces.append(shifts)
        elif coeff == "-1":
            pieces.append(f"-{shifts}")
        elif len(c.numer) == 1 and integral:
            pieces.append(f"{coeff}*{shifts}")
        else:
            pieces.append(f"({coeff})*{shifts}")
    out = pieces[0]
    for piece in pieces[1:]:
        out += f" - {piece[1:]}" if piece.startswith("-") else f" + {piece}"
    return out


def format_element(element, order: MonomialOrder = None) -> str:
    if isinstance(element, ModuleElement):
        order = order or MonomialOrder.default()
        return "[" + ", ".join(_format_operator(c, order) for c in element.components) + "]"
    return _format_operator(element, order or MonomialOrder.default())
