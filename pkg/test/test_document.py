"""
qtwist - twisting q-holonomic recurrences by roots of unity

Copyright (C) 2026 qtwist contributors

License: MIT
"""

import pytest

from document import (
    DocumentError,
    DocumentSyntaxError,
    parse_operator,
    parse_operator_document,
    print_operator_document,
    read_document,
    write_text_atomic,
)
from kernel import domain_order
from ore import ModuleElement, OreOperator, normalize

from .conftest import QBIN, QP, data_path, op


def test_parse_examples():
    document = read_document(data_path("qbin.qw"))
    assert document.description == "central q-binomial coefficients"
    assert document.provenance.startswith("c(n+1)/c(n)")
    assert list(document.operators) == ["qbin"]
    assert document["qbin"] == op(QBIN)
    assert document.first().order == 1

    document = read_document(data_path("fig41.qw"))
    assert list(document.modules) == ["fig41"]
    element = document.first()
    assert isinstance(element, ModuleElement)
    assert element[0].order == 2
    assert element[1].order == 0


def test_shift_before_multiplier(signature):
    L = OreOperator.shift_operator(signature)
    M = OreOperator.multiplier(signature)
    assert op("L*M") == L * M
    assert op("L*M") == op("q*M*L")
    assert op("2*(L - 1)^2") == 2 * L * L - 4 * L + 2
    assert op("-1/2*M") == OreOperator.from_coefficient(signature, -signature.field.gens[1] / 2)


def test_multivariate_algebra():
    text = """
    algebra q1, q2;
    shift L1:M1@q1, L2:M2@q2;
    operator a = L1*M2 - M2*L1;
    operator b = L2*M2 - M2*L2;
    """
    document = parse_operator_document(text)
    signature = document.signature
    assert signature.q_vars == ("q1", "q2")
    assert signature.q_index == (0, 1)
    assert document["a"].is_zero
    q2, M2 = signature.field.gens[1], signature.field.gens[3]
    L2 = OreOperator.shift_operator(signature, 1)
    assert document["b"] == OreOperator.from_coefficient(signature, (q2 - 1) * M2) * L2


def test_zeta_coefficients():
    document = parse_operator_document("algebra q; shift L:M; operator t = L - zeta(3)*q*M + zeta(3)^2;")
    assert domain_order(document.signature.domain) == 3
    t = document["t"]
    assert t.order == 1

    printed = print_operator_document(document)
    assert "operator t = L - zeta(3)*q*M + (-1 - zeta(3));" in printed
    again = parse_operator_document(print_operator_document(document))
    assert again["t"] == normalize(t)

    document = parse_operator_document("algebra q; shift L:M; operator t = L - zeta(2);")
    assert domain_order(document.signature.domain) == 1


def test_syntax_error_location():
    text = "algebra q;\nshift L:M;\noperator p = L + * M;\n"
    with pytest.raises(DocumentSyntaxError) as error:
        parse_operator_document(text)
    assert error.value.line == 3
    assert error.value.column == 18
    assert "at line 3, column 18" in str(error.value)


def test_illegal_character():
    with pytest.raises(DocumentSyntaxError, match="Illegal character '!'"):
        parse_operator("L!")


def test_unknown_variable():
    with pytest.raises(DocumentSyntaxError, match="Unknown variable x at line 2"):
        parse_operator_document("algebra q; shift L:M;\noperator p = L - x;")


def test_exponents_must_be_natural():
    with pytest.raises(DocumentSyntaxError, match="natural numbers"):
        parse_operator("L^1/2")


def test_document_errors():
    with pytest.raises(DocumentError, match="declared twice"):
        parse_operator_document("algebra q; shift L:M; operator p = L; operator p = M;")
    with pytest.raises(DocumentError, match="Unknown q-variable"):
        parse_operator_document("algebra q; shift L:M@p; operator p = L;")
    with pytest.raises(DocumentError, match="must name its q-variable"):
        parse_operator_document("algebra q1, q2; shift L:M; operator p = L;")
    with pytest.raises(DocumentError, match="Inconsistent algebra"):
        parse_operator_document("algebra q; shift L:L; operator p = L;")
    with pytest.raises(DocumentError, match="no operators"):
        parse_operator_document("algebra q; shift L:M;").first()
    with pytest.raises(DocumentError, match="does not exist"):
        read_document(data_path("missing.qw"))


@pytest.mark.parametrize("name", ["qbin.qw", "qp.qw", "fig41.qw"])
def test_print_round_trip(name):
    document = read_document(data_path(name))
    text = print_operator_document(document)
    again = parse_operator_document(text)
    assert again.description == document.description
    assert again.provenance == document.provenance
    for key, element in document.elements.items():
        assert again[key] == normalize(element)
    assert print_operator_document(again) == text


def test_printed_document():
    document = read_document(data_path("qp.qw"))
    assert print_operator_document(document) == (
        "algebra q;\n"
        "shift L:M@q;\n"
        'description "q-Pochhammer symbol";\n'
        "operator qp = L + q*M - 1;\n"
    )
    assert document["qp"] == op(QP)


def test_write_text_atomic(tmp_path):
    path = tmp_path / "out.qw"
    write_text_atomic(path, "algebra q;\n")
    write_text_atomic(path, 'algebra q;\ndescription "x";\n')
    assert path.read_text() == 'algebra q;\ndescription "x";\n'
    assert [p.name for p in tmp_path.iterdir()] == ["out.qw"]
