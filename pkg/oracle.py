"""
qtwist - twisting q-holonomic recurrences by roots of unity

Copyright (C) 2026 qtwist contributors

License: MIT

Brute-force ground truth: value tables of q-holonomic sequences, forward unrolling of
recurrences and direct substitution q -> omega * q into table values.
"""

import logging
from dataclasses import dataclass, field

from sympy.polys.domains import QQ
from sympy.polys.fields import FracField
from sympy.polys.orderings import lex

from kernel import QTwistError, common_domain, convert_coefficient, exact_div
from ore import (
    CoverageError,
    LeftGroebnerBasis,
    ModuleElement,
    OreOperator,
    SignatureError,
    apply,
    combine_fractions,
    evaluate_coefficient,
)


class SingularStepError(QTwistError):
    def __init__(self, n, message=None):
        self.n = n
        super().__init__(message or f"Leading coefficient vanishes at n = {n}")


@dataclass(frozen=True)
class SequenceTable:
    """values maps index tuples to elements of ``field``, a rational function field in the q-variables"""

    field: FracField
    values: dict
    origin: str = "closed_form"

    @property
    def indices(self) -> list:
        return sorted(self.values)

    def __getitem__(self, index):
        return self.values[(index,) if isinstance(index, int) else tuple(index)]

    def __len__(self):
        return len(self.values)

    def __contains__(self, index):
        return ((index,) if isinstance(index, int) else tuple(index)) in self.values


def value_field(q_vars=("q",), domain=QQ) -> FracField:
    return FracField(",".join(q_vars), domain, lex)


def fraction(field, numer, denom=None):
    """field element numer/denom; cancelled over the rationals, kept as is over cyclotomic fields"""
    if denom is None:
        denom = field.ring.one
    if not numer:
        return field.zero
    if field.domain.is_QQ:
        return field.new(numer, denom)
    return field.raw_new(numer, denom)


def _pochhammer(ring, n: int):
    (q,) = ring.gens
    value = ring.one
    for k in range(1, n + 1):
        value *= 1 - q**k
    return value


def q_pochhammer_table(n_max: int, q: str = "q") -> SequenceTable:
    """(q; q)_n for 0 <= n <= n_max"""
    if n_max < 0:
        raise QTwistError("n_max must not be negative")
    K = value_field((q,))
    values = {}
    value = K.ring.one
    for n in range(n_max + 1):
        if n:
            value *= 1 - K.ring.gens[0] ** n
        values[(n,)] = K.raw_new(value, K.ring.one)
    return SequenceTable(K, values)


def q_binomial_table(kind: str = "central", n_max: int = 0, q: str = "q") -> SequenceTable:
    """central q-binomial coefficients [2n, n]_q for 0 <= n <= n_max"""
    if kind != "central":
        raise QTwistError(f"Unknown q-binomial family {kind}")
    if n_max < 0:
        raise QTwistError("n_max must not be negative")
    K = value_field((q,))
    values = {}
    for n in range(n_max + 1):
        value = exact_div(_pochhammer(K.ring, 2 * n), _pochhammer(K.ring, n) ** 2)
        values[(n,)] = K.raw_new(value, K.ring.one)
    return SequenceTable(K, values)


def _ones(signature, indices) -> dict:
    K = value_field(signature.q_vars, signature.domain)
    return {index: K.one for index in indices}


def _inhomogeneous_value(signature, B: OreOperator, n: int, ring):
    """(B 1)_n as a (numerator, denominator) pair"""
    pairs = [evaluate_coefficient(signature, c, (n,), ring) for c in B.terms.values()]
    return combine_fractions(pairs, ring)


def unroll(rec, initial: list, n_max: int, start: int = 0) -> SequenceTable:
    """
    Solve rec f = 0 (or P f = B 1 for a module element (P, B)) forward for f_start .. f_n_max,
    starting from the ``order`` initial values f_start, f_start+1, ...
    """
    if isinstance(rec, ModuleElement):
        P, B = rec[0], rec[1]
    else:
        P, B = rec, None
    signature = P.signature
    if signature.r != 1:
        raise SignatureError("Unrolling needs one shift direction")
    if P.is_zero:
        raise QTwistError("Cannot unroll the zero operator")
    d = P.order
    low = min(alpha[0] for alpha in P.terms)
    if len(initial) != d - low:
        raise QTwistError(f"Expected {d - low} initial values, got {len(initial)}")
    K = value_field(signature.q_vars, signature.domain)
    ring = K.ring
    values = {}
    for i, v in enumerate(initial):
        values[(start + i,)] = K.field_new(v)
    lead = P.terms[(d,)]
    for n in range(start - low, n_max - d + 1):
        lead_numer, lead_denom = evaluate_coefficient(signature, lead, (n,), ring)
        if not lead_numer:
            raise SingularStepError(n)
        pairs = []
        if B is not None:
            b_numer, b_denom = _inhomogeneous_value(signature, B, n, ring)
            pairs.append((b_numer, b_denom))
        for (j,), c in P.terms.items():
            if j == d:
                continue
            c_numer, c_denom = evaluate_coefficient(signature, c, (n,), ring)
            value = values[(n + j,)]
            pairs.append((-c_numer * value.numer, c_denom * value.denom))
        numer, denom = combine_fractions(pairs, ring)
        values[(n + d,)] = fraction(K, numer * lead_denom, denom * lead_numer)
        logging.debug(f"Unroll: computed term {n + d}")
    return SequenceTable(K, values, origin="unrolled")


def _twist_polynomial(p, ring, spec, powers: dict):
    terms = {}
    source = p.ring.domain
    for monom, coeff in p.iterterms():
        value = convert_coefficient(coeff, source, ring.domain)
        for j, e in enumerate(monom):
            if e:
                if (j, e) not in powers:
                    powers[(j, e)] = (spec.omegas[j] ** e).to_domain(ring.domain)
                value = value * powers[(j, e)]
        key = tuple(e * p_j for e, p_j in zip(monom, spec.powers))
        terms[key] = terms[key] + value if key in terms else value
    return ring.from_dict(terms)


def twist_table(t: SequenceTable, spec) -> SequenceTable:
    """
    Table of g_n(s) = f_n(omega * s^p). With q = s^k this is f_n(omega * q^(p/k)), so operators
    are checked against it after rescale_operator.
    """
    K = t.field
    if len(spec.omegas) != len(K.symbols):
        raise SignatureError(f"Twist specification covers {len(spec.omegas)} of {len(K.symbols)} table variables")
    domain = common_domain(K.domain, spec.domain)
    target = FracField(K.symbols, domain, lex)
    powers = {}
    values = {}
    for index, v in t.values.items():
        numer = _twist_polynomial(v.numer, target.ring, spec, powers)
        denom = _twist_polynomial(v.denom, target.ring, spec, powers)
        values[index] = fraction(target, numer, denom)
    return SequenceTable(target, values, origin=t.origin)


def rescale_operator(P, roots):
    """coefficients c(q, M) -> c(q^k, M^k), k taken per q-variable"""
    signature = P.signature
    scales = tuple(roots) + tuple(roots[a] for a in signature.q_index)
    if all(k == 1 for k in scales):
        return P
    K = signature.field

    def rescale(c):
        return K.raw_new(
            *(
                K.ring.from_dict({tuple(e * k for e, k in zip(m, scales)): v for m, v in poly.iterterms()})
                for poly in (c.numer, c.denom)
            )
        )

    if isinstance(P, ModuleElement):
        return ModuleElement(*(rescale_operator(component, roots) for component in P.components))
    return OreOperator(signature, {alpha: rescale(c) for alpha, c in P.terms.items()})


@dataclass
class AnnihilationReport:
    checked: int
    failures: list = field(default_factory=list)
    residuals: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.checked > 0 and not self.failures


def _span(element) -> list:
    if isinstance(element, ModuleElement):
        return [alpha for component in element.components for alpha in component.terms]
    return list(element.terms)


def _window(element, t: SequenceTable) -> list:
    span = _span(element)
    dims = len(span[0])
    window = []
    for n in t.indices:
        if len(n) != dims:
            raise SignatureError("Table and operator have different numbers of indices")
        if all(tuple(a + b for a, b in zip(n, alpha)) in t.values for alpha in span):
            window.append(n)
    if not window:
        raise CoverageError("Table window does not cover the support of the operator")
    return window


def _residuals(element, t: SequenceTable, window) -> dict:
    if isinstance(element, ModuleElement):
        P, B = element[0], element[1]
        left = apply(P, t.values, window) if P else {}
        ones = _ones(B.signature.with_domain(t.field.domain), t.values)
        right = apply(B, ones, window) if B else {}
    else:
        left, right = apply(element, t.values, window), {}
    ring = t.field.ring
    result = {}
    for n in window:
        pairs = []
        if n in left:
            pairs.append((left[n].numer, left[n].denom))
        if n in right:
            pairs.append((-right[n].numer, right[n].denom))
        numer, denom = combine_fractions(pairs, ring)
        result[n] = fraction(t.field, numer, denom)
    return result


def check_annihilates(P, t: SequenceTable) -> AnnihilationReport:
    """
    Apply every element of ``P`` (operator, module element or Gröbner basis) to the table; a module
    element (A, B) passes when A t = B 1 on the whole window.
    """
    elements = list(P) if isinstance(P, LeftGroebnerBasis) else [P]
    report = AnnihilationReport(checked=0)
    for element in elements:
        if not element:
            continue
        window = _window(element, t)
        for n, value in _residuals(element, t, window).items():
            report.checked += 1
            if value:
                report.failures.append(n[0] if len(n) == 1 else n)
                report.residuals[n[0] if len(n) == 1 else n] = str(value.as_expr())
    logging.debug(f"Annihilation check: {report.checked} terms, {len(report.failures)} failures")
    return report
