import os
import random

import pytest

from config import config
from document import parse_operator, read_document
from kernel import CyclotomicNumber
from ore import OreAlgebraSignature, OreOperator, normalize

TEST_DATA_DIR = os.path.join(
    os.path.dirname(os.path.realpath(__file__)),
    "test_data",
)
RUN_STRETCH = bool(os.environ.get("TEST_STRETCH"))

QBIN = "(q*M - 1)*L - q^2*M^3 - q*M^2 + q*M + 1"
QP = "L - (1 - q*M)"

QBIN_NEGATED = (
    "(q^4*M^2 - 1)*L^2 + ((q^7 - q^6)*M^4 - q + 1)*L"
    " - q^7*M^6 - (q^6 - q^5 + q^4)*M^4 + (q^4 - q^3 + q^2)*M^2 + q"
)
QP_CUBE_ROOT_RATIONAL = "L^3 - (q^2 + q + 1)*L^2 + (q^3 + q^2 + q)*L + q^6*M^3 - q^3"
QP_SQRT_RATIONAL = (
    "L^4 - (q^2 + 1)*L^3 - (q^8*M^2 + q^6*M^2 - q^4 - q^2)*L - q^10*M^4 + q^8*M^2 + q^6*M^2 - q^4"
)
QP_SQRT = "L^4 - (q + 1)*L^3 - (q^4*M + q^3*M - q^2 - q)*L - q^5*M^2 + q^4*M + q^3*M - q^2"


def data_path(name: str) -> str:
    return os.path.join(TEST_DATA_DIR, name)


def load(name: str):
    """first element of a document from test_data"""
    return read_document(data_path(name)).first()


def op(text: str, signature: OreAlgebraSignature = None) -> OreOperator:
    return parse_operator(text, signature)


def same_up_to_content(a, b) -> bool:
    return normalize(a) == normalize(b)


def zeta(m: int, power: int = 1) -> CyclotomicNumber:
    return CyclotomicNumber.zeta(m, power)


def random_operator(rng: random.Random, signature=None, order: int = 2, degree: int = 2) -> OreOperator:
    """operator with small integer polynomial coefficients and nonzero constant leading coefficient"""
    signature = signature or OreAlgebraSignature.univariate()
    q, M = signature.field.gens
    terms = {}
    for j in range(order + 1):
        if j == order:
            c = signature.field(rng.choice([1, 2, -1]))
        else:
            c = signature.field.zero
            for a in range(degree + 1):
                for b in range(degree + 1):
                    if rng.random() < 0.4:
                        c += rng.randint(-2, 2) * q**a * M**b
            if not c:
                c = signature.field(rng.randint(1, 3))
        terms[(j,)] = c
    return OreOperator(signature, terms)


@pytest.fixture
def signature():
    return OreAlgebraSignature.univariate()


DEFAULT_SETTINGS = {
    "max_basis_size": 256,
    "frontier_factor": 4,
    "default_order": "degrevlex",
    "verify_terms": 30,
    "svg_coordinates": "jolted",
    "newton_include_rhs": False,
}


def _reset_config():
    """helper to reset config settings to the defaults"""
    config.update(DEFAULT_SETTINGS)


@pytest.fixture(autouse=True)
def reset_config():
    _reset_config()
    yield
    _reset_config()
