"""
qtwist - twisting q-holonomic recurrences by roots of unity

Copyright (C) 2026 qtwist contributors

License: MIT

Annihilators of twisted and substituted sequences g_n(q) = f_n(omega * q^(p/k)).

The ansatz runs over the rationals: it looks for left combinations of normal forms whose
coefficients only involve Q = q^k and N = M^lcm(m, k). Such operators survive the substitution
q -> omega * q^(1/k), which is applied at the very end (back-substitution).
"""

import itertools
import logging
import math
from dataclasses import dataclass, field

from sympy.polys.domains import QQ
from sympy.polys.matrices import DomainMatrix
from sympy.polys.orderings import lex
from sympy.polys.rings import ring as poly_ring

from config import config
from kernel import (
    CyclotomicNumber,
    QTwistError,
    change_domain,
    common_domain,
    convert_coefficient,
    cyclotomic_domain,
    primitive_vector,
    substitute_scaled,
)
from ore import (
    BudgetError,
    LeftGroebnerBasis,
    ModuleElement,
    MonomialOrder,
    OreOperator,
    SignatureError,
    _divides,
    _element,
    _shift_vector,
    _vector,
    normalize,
    polynomial_parts,
    right_divide,
)

ANY_PERIOD = 0


@dataclass(frozen=True)
class TwistSpec:
    """
    Per q-variable j the substitution q_j -> omega_j * q_j^(p_j / k_j), omega_j a primitive
    m_j-th root of unity.
    """

    orders: tuple
    roots: tuple
    omegas: tuple
    powers: tuple = None

    def __post_init__(self):
        for name in ["orders", "roots", "omegas"]:
            object.__setattr__(self, name, tuple(getattr(self, name)))
        powers = tuple(self.powers) if self.powers is not None else (1,) * len(self.orders)
        object.__setattr__(self, "powers", powers)
        if not len(self.orders) == len(self.roots) == len(self.omegas) == len(self.powers):
            raise QTwistError("Twist specification needs m, k, omega and p for every q-variable")
        for m, k, omega, p in zip(self.orders, self.roots, self.omegas, self.powers):
            if m < 1 or k < 1 or p < 1:
                raise QTwistError(f"Invalid twist parameters m={m}, k={k}, p={p}")
            if omega**m != 1:
                raise QTwistError(f"{omega} is not an {m}-th root of unity")
            if any(omega**ell == 1 for ell in range(1, m)):
                raise QTwistError(f"{omega} is not a primitive {m}-th root of unity")

    @classmethod
    def single(cls, m: int = 1, k: int = 1, omega: CyclotomicNumber = None, p: int = 1) -> "TwistSpec":
        return cls((m,), (k,), (omega if omega is not None else CyclotomicNumber.zeta(m),), (p,))

    @classmethod
    def build(cls, signature, entries: dict) -> "TwistSpec":
        """
        ``entries`` maps q-variable names to dicts with optional keys m, k, omega, p;
        variables not mentioned stay untouched.
        """
        unknown = set(entries) - set(signature.q_vars)
        if unknown:
            raise SignatureError(f"Unknown q-variable(s) {', '.join(sorted(unknown))}")
        orders, roots, omegas, powers = [], [], [], []
        for name in signature.q_vars:
            entry = entries.get(name, {})
            m = entry.get("m", 1)
            orders.append(m)
            roots.append(entry.get("k", 1))
            omegas.append(entry.get("omega") or CyclotomicNumber.zeta(m))
            powers.append(entry.get("p", 1))
        return cls(tuple(orders), tuple(roots), tuple(omegas), tuple(powers))

    def multiple(self, signature, k: int) -> int:
        """exponents of M_k must be multiples of this number before back-substitution"""
        a = signature.q_index[k]
        return math.lcm(self.orders[a], self.roots[a])

    def rank_bound(self, signature, rank: int) -> int:
        bound = rank
        for k in range(signature.r):
            bound *= self.multiple(signature, k)
        for k_j in self.roots:
            bound *= k_j
        return bound

    @property
    def domain(self):
        return common_domain(*(cyclotomic_domain(w.order) for w in self.omegas if not w.is_rational))

    @property
    def is_identity(self) -> bool:
        return all(m == 1 for m in self.orders) and all(k == 1 for k in self.roots) and all(
            p == 1 for p in self.powers
        )


@dataclass
class AnsatzState:
    output: list = field(default_factory=list)
    stairs: list = field(default_factory=list)
    frontier: list = field(default_factory=list)
    rejected: list = field(default_factory=list)
    normal_forms: dict = field(default_factory=dict)
    scales: dict = field(default_factory=dict)

    def is_divisible(self, monomial) -> bool:
        component, alpha = monomial
        return any(c == component and _divides(lead, alpha) for (c, lead), _ in self.output)


@dataclass
class TwistResult:
    basis: LeftGroebnerBasis
    before_backsub: LeftGroebnerBasis
    rank_bound: int
    cofactors: list = None

    @property
    def rank(self) -> int:
        return self.basis.rank


def _auxiliary_ring(signature):
    names = [f"Q{j + 1}" for j in range(signature.s)] + [f"N{k + 1}" for k in range(signature.r)]
    return poly_ring(",".join(names), QQ, lex)[0]


@dataclass
class ResidueCoordinates:
    """
    Coordinates of rational functions in (q, M) over QQ(Q, N) in the basis of monomials q^a M^b
    with a < k and b < lcm(m, k).
    """

    moduli: tuple
    aux: object
    inverses: dict = field(default_factory=dict)

    def __post_init__(self):
        self.residues = list(itertools.product(*(range(n) for n in self.moduli)))
        self.index = {r: i for i, r in enumerate(self.residues)}

    def split(self, poly) -> dict:
        parts = {}
        for monom, coeff in poly.iterterms():
            residue = tuple(e % n for e, n in zip(monom, self.moduli))
            reduced = tuple(e // n for e, n in zip(monom, self.moduli))
            part = parts.setdefault(residue, {})
            part[reduced] = part.get(reduced, QQ.zero) + coeff
        return {r: self.aux.from_dict(p) for r, p in parts.items()}

    def _inverse(self, d):
        """(A, den) with A / den the inverse of multiplication by ``d``"""
        if d not in self.inverses:
            size = len(self.residues)
            rows = [[self.aux.zero] * size for _ in range(size)]
            for shift, h in self.split(d).items():
                for r in self.residues:
                    total = [a + b for a, b in zip(r, shift)]
                    target = tuple(t % n for t, n in zip(total, self.moduli))
                    carry = self.aux.from_dict({tuple(t // n for t, n in zip(total, self.moduli)): QQ.one})
                    rows[self.index[target]][self.index[r]] += h * carry
            inverse, den = DomainMatrix(rows, (size, size), self.aux.to_domain()).inv_den()
            self.inverses[d] = (inverse.to_list(), den)
        return self.inverses[d]

    def of(self, c) -> tuple:
        """(residue -> polynomial in Q, N, denominator) for the rational function ``c``"""
        parts = self.split(c.numer)
        if c.denom == c.denom.ring.one:
            return parts, self.aux.one
        inverse, den = self._inverse(c.denom)
        coords = {}
        for i, r in enumerate(self.residues):
            value = self.aux.zero
            for s, p in parts.items():
                value += inverse[i][self.index[s]] * p
            if value:
                coords[r] = value
        return coords, den


def _combine(x: dict, a, y: dict, b) -> dict:
    """a*x - b*y"""
    out = {key: a * v for key, v in x.items()}
    for key, v in y.items():
        value = out[key] - b * v if key in out else -b * v
        if value:
            out[key] = value
        else:
            out.pop(key, None)
    return out


@dataclass
class Echelon:
    """
    Fraction-free echelon form of the columns of rejected monomials. Every row is zero at the
    pivots of the rows before it and carries the combination of columns it stands for.
    """

    rows: list = field(default_factory=list)

    def reduce(self, vector: dict, weights: dict) -> tuple:
        for pivot, lead, row, row_weights in self.rows:
            a = vector.get(pivot)
            if not a:
                continue
            g = a.gcd(lead)
            left, right = lead.exquo(g), a.exquo(g)
            vector = _combine(vector, left, row, right)
            weights = _combine(weights, left, row_weights, right)
        content = None
        for v in itertools.chain(vector.values(), weights.values()):
            content = v if content is None else content.gcd(v)
        if content is not None and content != content.ring.one and content:
            vector = {key: v.exquo(content) for key, v in vector.items()}
            weights = {key: v.exquo(content) for key, v in weights.items()}
        return vector, weights

    def insert(self, vector: dict, weights: dict):
        pivot = min(vector)
        self.rows.append((pivot, vector[pivot], vector, weights))


def _column(coordinates, state, monomial) -> tuple:
    """polynomial coordinate vector of NF(monomial) and the scalar in QQ[Q, N] it was multiplied by"""
    parts = []
    common = coordinates.aux.one
    for u, e in state.normal_forms[monomial].items():
        coords, den = coordinates.of(e)
        parts.append((u, coords, den))
        if den != coordinates.aux.one:
            common = common.lcm(den)
    vector = {}
    for u, coords, den in parts:
        factor = common.exquo(den)
        for r, p in coords.items():
            vector[(u, r)] = p * factor
    return vector, common


def _solve(state, coordinates, echelon, t0):
    """
    content-free solution (c_0, ..., c_last) over the columns rejected + [t0] with c_last != 0,
    or None after t0 joined the echelon form
    """
    vector, scale = _column(coordinates, state, t0)
    state.scales[t0] = scale
    vector, weights = echelon.reduce(vector, {t0: coordinates.aux.one})
    if vector:
        echelon.insert(vector, weights)
        return None
    columns = state.rejected + [t0]
    values = [weights[c] * state.scales[c] if c in weights else coordinates.aux.zero for c in columns]
    return primitive_vector(values, lead_index=len(columns) - 1)


def _lift(signature, spec, aux_poly):
    """Q_j -> q_j^k_j, N_k -> M_k^lcm(m, k) as a polynomial of the algebra's ring"""
    s = signature.s
    multiples = [spec.multiple(signature, k) for k in range(signature.r)]
    scales = tuple(spec.roots) + tuple(multiples)
    return signature.ring.from_dict(
        {tuple(e * c for e, c in zip(monom, scales)): coeff for monom, coeff in aux_poly.iterterms()}
    )


def _normal_form(signature, reducer, state, monomial):
    component, alpha = monomial
    for k, a in enumerate(alpha):
        if a:
            parent = (component, tuple(x - 1 if i == k else x for i, x in enumerate(alpha)))
            if parent in state.normal_forms:
                return reducer.reduce(_shift_vector(signature, state.normal_forms[parent], signature.unit(k)))
    return reducer.reduce({monomial: signature.field.one})


def _back_substitute(signature, spec, poly, domain):
    for k, name in enumerate(signature.m_vars):
        poly = substitute_scaled(poly, name, CyclotomicNumber.rational(1), spec.roots[signature.q_index[k]])
    for j, name in enumerate(signature.q_vars):
        poly = substitute_scaled(poly, name, spec.omegas[j], spec.roots[j])
    poly = change_domain(poly, domain)
    if any(p != 1 for p in spec.powers):
        s = signature.s
        scales = tuple(spec.powers) + tuple(spec.powers[a] for a in signature.q_index)
        poly = poly.ring.from_dict({tuple(e * c for e, c in zip(m, scales)): v for m, v in poly.iterterms()})
    return poly


def _has_unit_relation(G: LeftGroebnerBasis) -> bool:
    signature = G.signature
    relation = ModuleElement(
        OreOperator.zero(signature),
        OreOperator.shift_operator(signature) - 1,
    )
    return not G.reducer().reduce(_vector(relation))


def twist_substitute(
    G: LeftGroebnerBasis,
    spec: TwistSpec,
    return_before_backsub: bool = False,
    module_mode: bool = None,
    frontier_factor: int = None,
) -> TwistResult:
    """
    Left Gröbner basis annihilating g_n(q) = f_n(omega * q^(p/k)) for every f annihilated by G.

    ``G`` must be zero-dimensional with rational coefficients. The output basis keeps G's monomial order.
    """
    signature = G.signature
    if len(spec.orders) != signature.s:
        raise SignatureError(f"Twist specification covers {len(spec.orders)} of {signature.s} q-variables")
    if not signature.domain.is_QQ:
        raise QTwistError("Twisting needs an input with rational coefficients")
    if module_mode is None:
        module_mode = G.components > 1
    if module_mode:
        if G.components != 2 or signature.r != 1:
            raise QTwistError("Module mode needs pairs (P, B) in one shift direction")
        if not _has_unit_relation(G):
            raise QTwistError("Module basis must contain the relation (0, L - 1)")
    elif G.components != 1:
        raise QTwistError("Module elements given without module mode")
    if frontier_factor is None:
        frontier_factor = config.as_int("frontier_factor")

    order = G.order
    state = AnsatzState(stairs=list(G.stair_monomials))
    bound = spec.rank_bound(signature, len(state.stairs))
    reducer = G.reducer(cache={})
    aux = _auxiliary_ring(signature)
    moduli = tuple(spec.roots) + tuple(spec.multiple(signature, k) for k in range(signature.r))
    coordinates = ResidueCoordinates(moduli, aux)
    echelon = Echelon()
    state.frontier = [(c, (0,) * signature.r) for c in range(G.components)]
    logging.debug(f"Twist: input rank {len(state.stairs)}, rank bound {bound}")

    while state.frontier:
        state.frontier.sort(key=order.key)
        t0 = state.frontier.pop(0)
        if state.is_divisible(t0):
            continue
        state.normal_forms[t0] = _normal_form(signature, reducer, state, t0)
        columns = state.rejected + [t0]
        solution = _solve(state, coordinates, echelon, t0)
        if solution is None:
            state.rejected.append(t0)
            logging.debug(f"Twist: no relation with support {t0}, {len(state.rejected)} monomials rejected")
            if len(state.rejected) > bound:
                raise BudgetError(
                    f"More than {bound} independent monomials; the input is not a zero-dimensional Gröbner basis"
                )
            component, alpha = t0
            for k in range(signature.r):
                candidate = (component, tuple(a + 1 if i == k else a for i, a in enumerate(alpha)))
                if candidate not in state.frontier and not state.is_divisible(candidate):
                    state.frontier.append(candidate)
            if len(state.frontier) > frontier_factor * bound:
                raise BudgetError(f"Frontier exceeds {frontier_factor} times the rank bound {bound}")
        else:
            vector = {
                c: signature.field.raw_new(_lift(signature, spec, x), signature.ring.one)
                for c, x in zip(columns, solution)
                if x
            }
            state.output.append((t0, vector))
            state.frontier = [t for t in state.frontier if not state.is_divisible(t)]
            logging.debug(f"Twist: found relation with leading monomial {t0}")

    components = G.components
    before = LeftGroebnerBasis([_element(signature, v, components) for _, v in state.output], order)
    domain = spec.domain
    target = signature.with_domain(domain)
    elements = []
    for _, vector in state.output:
        lifted = {}
        for monomial, c in vector.items():
            poly = _back_substitute(signature, spec, c.numer, domain)
            lifted[monomial] = target.field.raw_new(target.ring.from_dict(dict(poly.iterterms())), target.ring.one)
        elements.append(normalize(_element(target, lifted, components), order))
    logging.debug(f"Twist: {len(elements)} output generators, back-substituted over {domain}")
    basis = LeftGroebnerBasis(elements, order)
    if basis.rank > bound:
        raise BudgetError(f"Output rank {basis.rank} exceeds the bound {bound}")

    cofactors = None
    if components == 1 and signature.r == 1 and len(G) == 1:
        cofactors = [right_divide(g, G[0])[0] for g in before]

    return TwistResult(
        basis=basis,
        before_backsub=before if return_before_backsub else None,
        rank_bound=bound,
        cofactors=cofactors,
    )


def tau_omega(P: OreOperator, omega: CyclotomicNumber) -> OreOperator:
    """content-free annihilator of f_n(omega * q) in the q-Weyl algebra"""
    if P.signature.r != 1 or isinstance(P, ModuleElement):
        raise SignatureError("tau_omega needs an operator in one shift direction")
    if P.is_zero:
        raise QTwistError("Cannot twist the zero operator")
    m = omega.multiplicative_order()
    if not m:
        raise QTwistError(f"{omega} is not a root of unity")
    result = twist_substitute(LeftGroebnerBasis([P]), TwistSpec.single(m, 1, omega))
    return result.basis[0]


def inhomogeneous_basis(P: OreOperator, b) -> LeftGroebnerBasis:
    """module basis {(P, b), (0, L - 1)} in position-over-term order"""
    signature = P.signature
    if signature.r != 1:
        raise SignatureError("Inhomogeneous recurrences need one shift direction")
    relation = ModuleElement(OreOperator.zero(signature), OreOperator.shift_operator(signature) - 1)
    return LeftGroebnerBasis(
        [ModuleElement.inhomogeneous(P, b), relation],
        MonomialOrder.default(module_mode=True),
    )


def inhomogeneous_twist(P: OreOperator, b, spec: TwistSpec) -> ModuleElement:
    result = twist_substitute(inhomogeneous_basis(P, b), spec, module_mode=True)
    order = result.basis.order
    return next(g for g in result.basis if max(_vector(g), key=order.key)[0] == 0)


def m_period(P) -> int:
    """gcd of all M-exponents; ANY_PERIOD when no M occurs"""
    if not P:
        raise QTwistError("The zero operator has no M-period")
    s = P.signature.s
    period = 0
    for p in polynomial_parts(P).values():
        for monom in p.itermonoms():
            for b in monom[s:]:
                period = math.gcd(period, b)
    return period


def exponent_summary(element) -> tuple:
    """largest exponents of L, of the M-variables and of the q-variables in the normalized element"""
    signature = element.signature
    s = signature.s
    l_exp = m_exp = q_exp = 0
    for (_, alpha), p in polynomial_parts(normalize(element)).items():
        l_exp = max(l_exp, sum(alpha))
        for monom in p.itermonoms():
            q_exp = max(q_exp, sum(monom[:s]))
            m_exp = max(m_exp, sum(monom[s:]))
    return l_exp, m_exp, q_exp


@dataclass
class FactorizationReport:
    status: str
    period: int
    factors: int
    specialized: str
    product: str
    witness: str = None
    discrepancy: str = None

    @property
    def ok(self) -> bool:
        return self.status != "inconclusive"


def _commutative(P, domain, q_value: CyclotomicNumber, m_scale: CyclotomicNumber):
    """P(m_scale * M, L, q_value) as a commutative polynomial in L, M"""
    R = poly_ring("L,M", domain, lex)[0]
    source = P.signature.domain
    terms = {}
    for ((_, alpha), p) in polynomial_parts(P).items():
        for (e, b), c in p.iterterms():
            value = convert_coefficient(c, source, domain) * ((q_value**e) * (m_scale**b)).to_domain(domain)
            key = (alpha[0], b)
            terms[key] = terms[key] + value if key in terms else value
    return R.from_dict(terms)


def verify_factorization(P: OreOperator, omega: CyclotomicNumber, T: OreOperator = None) -> FactorizationReport:
    """
    Compare T(M, L, 1/omega) with the product of P(omega^i M, L, 1), i = 1 .. m/gcd(l, m), as
    polynomials in L over K(M).
    """
    if P.signature.r != 1 or P.signature.s != 1:
        raise SignatureError("Factorization check needs one q-variable and one shift direction")
    m = omega.multiplicative_order()
    if T is None:
        T = tau_omega(P, omega)
    period = m_period(P)
    factors = m // math.gcd(period, m)
    domain = common_domain(cyclotomic_domain(omega.order), T.signature.domain, P.signature.domain)
    one = CyclotomicNumber.rational(1)
    F = _commutative(T, domain, omega.inverse(), one)
    G = F.ring.one
    for i in range(1, factors + 1):
        G = G * _commutative(P, domain, one, omega**i)
    L = F.ring.gens[0]
    dF, dG = F.degree(L), G.degree(L)
    report = FactorizationReport(
        status="inconclusive",
        period=period,
        factors=factors,
        specialized=str(F.as_expr()),
        product=str(G.as_expr()),
    )
    if dF == dG:
        lf, lg = F.coeff_wrt(L, dF), G.coeff_wrt(L, dG)
        difference = F * lg - G * lf
        if not difference:
            report.status = "equal"
            report.witness = f"({lf.as_expr()})/({lg.as_expr()})"
        else:
            report.discrepancy = str(difference.as_expr())
    elif dF > dG:
        remainder = F.prem(G, L)
        if not remainder:
            report.status = "divisible"
        else:
            report.discrepancy = str(remainder.as_expr())
    else:
        remainder = G.prem(F, L)
        if not remainder:
            report.status = "divisible"
        else:
            report.discrepancy = str(remainder.as_expr())
    logging.debug(f"Factorization check: {report.status} ({factors} factors, period {period})")
    return report
