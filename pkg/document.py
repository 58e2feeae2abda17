"""
qtwist - twisting q-holonomic recurrences by roots of unity

Copyright (C) 2026 qtwist contributors

License: MIT

Reader and printer of operator documents (*.qw):

    # central q-binomial coefficients
    algebra q;
    shift L:M@q;
    description "central q-binomial";
    operator qbin = (q*M^2 - 1)*L - ...;
    module fig41 = [..., ...];

Products are noncommutative and evaluated left to right, so ``L*M`` reads as q*M*L.
"""

import math
import os
import pathlib
import tempfile
from dataclasses import dataclass, field

import ply.lex as lex
import ply.yacc as yacc
from sympy.polys.domains import QQ

from kernel import CyclotomicNumber, QTwistError, cyclotomic_domain
from ore import ModuleElement, OreAlgebraSignature, OreOperator, SignatureError, format_element, normalize


class DocumentError(QTwistError):
    pass


class DocumentSyntaxError(DocumentError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        location = f" at line {line}, column {column}" if line is not None else ""
        super().__init__(f"{message}{location}")


@dataclass
class OperatorDocument:
    signature: OreAlgebraSignature
    elements: dict = field(default_factory=dict)
    description: str = None
    provenance: str = None

    def __getitem__(self, name):
        return self.elements[name]

    def first(self):
        if not self.elements:
            raise DocumentError("The document declares no operators")
        return next(iter(self.elements.values()))

    @property
    def operators(self) -> dict:
        return {k: v for k, v in self.elements.items() if isinstance(v, OreOperator)}

    @property
    def modules(self) -> dict:
        return {k: v for k, v in self.elements.items() if isinstance(v, ModuleElement)}


class _Grammar:
    reserved = {
        "algebra": "ALGEBRA",
        "shift": "SHIFT",
        "operator": "OPERATOR",
        "module": "MODULE",
        "description": "DESCRIPTION",
        "provenance": "PROVENANCE",
        "zeta": "ZETA",
    }

    tokens = [
        "NAME",
        "NUMBER",
        "STRING",
        "PLUS",
        "MINUS",
        "TIMES",
        "CARET",
        "LPAREN",
        "RPAREN",
        "LBRACKET",
        "RBRACKET",
        "SEMI",
        "COMMA",
        "COLON",
        "AT",
        "EQUALS",
    ] + list(reserved.values())

    t_PLUS = r"\+"
    t_MINUS = r"-"
    t_TIMES = r"\*"
    t_CARET = r"\^"
    t_LPAREN = r"\("
    t_RPAREN = r"\)"
    t_LBRACKET = r"\["
    t_RBRACKET = r"\]"
    t_SEMI = r";"
    t_COMMA = r","
    t_COLON = r":"
    t_AT = r"@"
    t_EQUALS = r"="
    t_ignore = " \t\r"
    t_ignore_COMMENT = r"\#[^\n]*"

    def __init__(self):
        self.text = ""
        self.zeta_orders = set()
        self.lexer = lex.lex(module=self)
        self.parser = yacc.yacc(
            module=self,
            start="document",
            write_tables=False,
            debug=False,
            errorlog=yacc.NullLogger(),
        )

    def column(self, lexpos):
        return lexpos - self.text.rfind("\n", 0, lexpos)

    def t_NAME(self, t):
        r"[A-Za-z_][A-Za-z0-9_]*"
        t.type = self.reserved.get(t.value, "NAME")
        return t

    def t_NUMBER(self, t):
        r"\d+(/\d+)?"
        return t

    def t_STRING(self, t):
        r'"([^"\\\n]|\\.)*"'
        t.value = t.value[1:-1].replace('\\"', '"').replace("\\\\", "\\")
        return t

    def t_newline(self, t):
        r"\n+"
        t.lexer.lineno += len(t.value)

    def t_error(self, t):
        raise DocumentSyntaxError(f"Illegal character {t.value[0]!r}", t.lexer.lineno, self.column(t.lexpos))

    def p_document(self, p):
        "document : header statements"
        p[0] = (p[1], p[2])

    def p_header(self, p):
        "header : ALGEBRA namelist SEMI SHIFT shiftlist SEMI"
        p[0] = (p[2], p[5])

    def p_namelist(self, p):
        """namelist : NAME
        | namelist COMMA NAME"""
        p[0] = [p[1]] if len(p) == 2 else p[1] + [p[3]]

    def p_shiftlist(self, p):
        """shiftlist : shiftdecl
        | shiftlist COMMA shiftdecl"""
        p[0] = [p[1]] if len(p) == 2 else p[1] + [p[3]]

    def p_shiftdecl(self, p):
        """shiftdecl : NAME COLON NAME
        | NAME COLON NAME AT NAME"""
        p[0] = (p[1], p[3], p[5] if len(p) == 6 else None, p.lineno(1))

    def p_statements(self, p):
        """statements :
        | statements statement"""
        p[0] = [] if len(p) == 1 else p[1] + [p[2]]

    def p_statement_operator(self, p):
        "statement : OPERATOR NAME EQUALS expr SEMI"
        p[0] = ("operator", p[2], p[4], p.lineno(2))

    def p_statement_module(self, p):
        "statement : MODULE NAME EQUALS LBRACKET expr COMMA expr RBRACKET SEMI"
        p[0] = ("module", p[2], (p[5], p[7]), p.lineno(2))

    def p_statement_meta(self, p):
        """statement : DESCRIPTION STRING SEMI
        | PROVENANCE STRING SEMI"""
        p[0] = (p[1], p[2])

    def p_expr(self, p):
        """expr : expr PLUS term
        | expr MINUS term
        | term"""
        p[0] = p[1] if len(p) == 2 else ("add" if p[2] == "+" else "sub", p[1], p[3])

    def p_term(self, p):
        """term : term TIMES factor
        | factor"""
        p[0] = p[1] if len(p) == 2 else ("mul", p[1], p[3])

    def p_factor_negative(self, p):
        "factor : MINUS factor"
        p[0] = ("neg", p[2])

    def p_factor(self, p):
        """factor : atom
        | atom CARET NUMBER"""
        if len(p) == 2:
            p[0] = p[1]
            return
        if "/" in p[3]:
            raise DocumentSyntaxError("Exponents must be natural numbers", p.lineno(3), self.column(p.lexpos(3)))
        p[0] = ("pow", p[1], int(p[3]))

    def p_atom_number(self, p):
        "atom : NUMBER"
        numerator, _, denominator = p[1].partition("/")
        if denominator and int(denominator) == 0:
            raise DocumentSyntaxError("Division by zero", p.lineno(1), self.column(p.lexpos(1)))
        p[0] = ("num", QQ(int(numerator), int(denominator or 1)))

    def p_atom_name(self, p):
        "atom : NAME"
        p[0] = ("var", p[1], p.lineno(1), self.column(p.lexpos(1)))

    def p_atom_zeta(self, p):
        "atom : ZETA LPAREN NUMBER RPAREN"
        if "/" in p[3] or int(p[3]) < 1:
            raise DocumentSyntaxError(
                "Root of unity order must be a positive integer", p.lineno(3), self.column(p.lexpos(3))
            )
        self.zeta_orders.add(int(p[3]))
        p[0] = ("zeta", int(p[3]))

    def p_atom_group(self, p):
        "atom : LPAREN expr RPAREN"
        p[0] = p[2]

    def p_error(self, t):
        if t is None:
            raise DocumentSyntaxError("Unexpected end of document")
        raise DocumentSyntaxError(f"Unexpected {t.value!r}", t.lineno, self.column(t.lexpos))

    def parse(self, text):
        self.text = text
        self.zeta_orders = set()
        self.lexer.lineno = 1
        return self.parser.parse(text, lexer=self.lexer, tracking=True)


_grammar = None


def _get_grammar() -> _Grammar:
    global _grammar
    if _grammar is None:
        _grammar = _Grammar()
    return _grammar


def _signature(names, shifts, domain) -> OreAlgebraSignature:
    q_vars = tuple(names)
    q_index = []
    for l_name, m_name, q_name, line in shifts:
        if q_name is None:
            if len(q_vars) != 1:
                raise DocumentError(f"Shift {l_name} must name its q-variable with @ (line {line})")
            q_name = q_vars[0]
        if q_name not in q_vars:
            raise DocumentError(f"Unknown q-variable {q_name} in shift declaration (line {line})")
        q_index.append(q_vars.index(q_name))
    try:
        return OreAlgebraSignature(
            q_vars=q_vars,
            m_vars=tuple(m for _, m, _, _ in shifts),
            l_vars=tuple(l for l, _, _, _ in shifts),
            q_index=tuple(q_index),
            domain=domain,
        )
    except SignatureError as e:
        raise DocumentError(f"Inconsistent algebra declaration: {e}")


def _evaluate(node, signature: OreAlgebraSignature):
    kind = node[0]
    if kind == "num":
        return OreOperator.from_coefficient(signature, node[1])
    if kind == "zeta":
        return OreOperator.from_coefficient(signature, CyclotomicNumber.zeta(node[1]))
    if kind == "var":
        name, line, column = node[1:]
        if name in signature.q_vars:
            return OreOperator.from_coefficient(signature, signature.field.gens[signature.q_vars.index(name)])
        if name in signature.m_vars:
            gen = signature.field.gens[signature.s + signature.m_vars.index(name)]
            return OreOperator.from_coefficient(signature, gen)
        if name in signature.l_vars:
            return OreOperator.shift_operator(signature, signature.l_vars.index(name))
        raise DocumentSyntaxError(f"Unknown variable {name}", line, column)
    if kind == "neg":
        return -_evaluate(node[1], signature)
    if kind == "pow":
        return _evaluate(node[1], signature) ** node[2]
    a, b = _evaluate(node[1], signature), _evaluate(node[2], signature)
    if kind == "add":
        return a + b
    if kind == "sub":
        return a - b
    return a * b


def parse_operator_document(text: str) -> OperatorDocument:
    grammar = _get_grammar()
    (names, shifts), statements = grammar.parse(text)
    order = 1
    for m in grammar.zeta_orders:
        order = math.lcm(order, m)
    signature = _signature(names, shifts, cyclotomic_domain(order))
    document = OperatorDocument(signature)
    for statement in statements:
        if statement[0] in ("description", "provenance"):
            setattr(document, statement[0], statement[1])
            continue
        kind, name, body, line = statement
        if name in document.elements:
            raise DocumentError(f"Operator {name} declared twice (line {line})")
        if kind == "operator":
            document.elements[name] = _evaluate(body, signature)
        else:
            document.elements[name] = ModuleElement(*(_evaluate(part, signature) for part in body))
    return document


def parse_operator(text: str, signature: OreAlgebraSignature = None) -> OreOperator:
    """single operator expression, by default in the algebra q, M, L"""
    signature = signature or OreAlgebraSignature.univariate()
    header = "algebra {}; shift {};".format(
        ", ".join(signature.q_vars),
        ", ".join(
            f"{l}:{m}@{signature.q_vars[a]}"
            for l, m, a in zip(signature.l_vars, signature.m_vars, signature.q_index)
        ),
    )
    document = parse_operator_document(f"{header}\noperator _ = {text};")
    return document["_"]


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def print_operator_document(document: OperatorDocument) -> str:
    signature = document.signature
    lines = [
        f"algebra {', '.join(signature.q_vars)};",
        "shift "
        + ", ".join(
            f"{l}:{m}@{signature.q_vars[a]}" for l, m, a in zip(signature.l_vars, signature.m_vars, signature.q_index)
        )
        + ";",
    ]
    if document.description is not None:
        lines.append(f"description {_quote(document.description)};")
    if document.provenance is not None:
        lines.append(f"provenance {_quote(document.provenance)};")
    for name, element in document.elements.items():
        keyword = "module" if isinstance(element, ModuleElement) else "operator"
        lines.append(f"{keyword} {name} = {format_element(normalize(element))};")
    return "\n".join(lines) + "\n"


def read_document(path) -> OperatorDocument:
    path = pathlib.Path(path)
    if not path.exists():
        raise DocumentError(f"Document {path} does not exist")
    return parse_operator_document(path.read_text(encoding="utf-8"))


def write_text_atomic(path, text: str) -> None:
    path = pathlib.Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        pathlib.Path(tmp).unlink(missing_ok=True)
        raise
