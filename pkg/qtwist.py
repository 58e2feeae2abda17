"""
qtwist - twisting q-holonomic recurrences by roots of unity

Copyright (C) 2026 qtwist contributors

License: MIT

Command line entry point:

    qtwist.py twist --input qbin.qw --spec q:2
    qtwist.py newton --input fig41.qw --emit slopes
    qtwist.py verify --input out.qw --against central-qbinom --spec q:2
    qtwist.py gb --input system.qw --order lex
    qtwist.py table --input fig41.qw --orders 1 2
"""

import argparse
import logging
import pathlib
import sys
import typing

from pydantic import BaseModel

import document as qw
from config import ConfigError, config, update_config_path, validate_config
from kernel import CyclotomicNumber, QTwistError, domain_order
from log_functions import handle_error_and_exit, setup_logger
from newton import format_slopes, format_tsv, newton_polygon, render_svg
from ore import LeftGroebnerBasis, ModuleElement, MonomialOrder, OreOperator, format_element, left_buchberger, normalize
from oracle import check_annihilates, q_binomial_table, q_pochhammer_table, rescale_operator, twist_table, unroll
from twist import TwistSpec, exponent_summary, inhomogeneous_basis, twist_substitute, verify_factorization
from version import __version__

EXIT_MATH_ERROR = 1
EXIT_USAGE_ERROR = 2


class TwistReport(BaseModel):
    input: str
    element: str
    specs: typing.List[str]
    module_mode: bool
    before_backsub: bool
    domain: str
    rank: int
    rank_bound: int
    normalized: bool = True
    basis: typing.List[str]
    cofactors: typing.Optional[typing.List[str]] = None


class VerifyReport(BaseModel):
    input: str
    against: str
    specs: typing.List[str]
    passed: bool
    checked: int
    failures: typing.List[str] = []


class FactorizationResult(BaseModel):
    input: str
    omega: str
    status: str
    period: int
    factors: int
    specialized: str
    product: str
    witness: typing.Optional[str] = None


class ExponentRow(BaseModel):
    m: int
    l_exponent: int
    m_exponent: int
    q_exponent: int


def domain_name(domain) -> str:
    order = domain_order(domain)
    return "QQ" if order == 1 else f"QQ(zeta({order}))"


def parse_spec(text: str) -> tuple:
    """VAR:M[:K[:P]]"""
    parts = text.split(":")
    if not 2 <= len(parts) <= 4 or not parts[0]:
        raise argparse.ArgumentTypeError(f"Invalid twist specification `{text}`, expected VAR:M[:K[:P]]")
    try:
        values = [int(x) for x in parts[1:]]
    except ValueError:
        raise argparse.ArgumentTypeError(f"Invalid twist specification `{text}`, orders must be integers")
    if any(v < 1 for v in values):
        raise argparse.ArgumentTypeError(f"Invalid twist specification `{text}`, orders must be positive")
    values += [1] * (3 - len(values))
    return parts[0], values[0], values[1], values[2]


def build_spec(signature, specs: list) -> TwistSpec:
    entries = {}
    for name, m, k, p in specs:
        if name in entries:
            raise qw.DocumentError(f"Variable {name} is twisted twice")
        entries[name] = {"m": m, "k": k, "p": p, "omega": CyclotomicNumber.zeta(m)}
    try:
        return TwistSpec.build(signature, entries)
    except QTwistError as e:
        raise qw.DocumentError(str(e))


def select_element(document: qw.OperatorDocument, name: str = None):
    if name is None:
        return next(iter(document.elements)), document.first()
    if name not in document.elements:
        raise qw.DocumentError(f"The document declares no operator named {name}")
    return name, document[name]


def input_basis(document: qw.OperatorDocument, name: str, module: bool) -> LeftGroebnerBasis:
    _, element = select_element(document, name)
    if isinstance(element, ModuleElement):
        return inhomogeneous_basis(element[0], element[1])
    if module:
        return inhomogeneous_basis(element, OreOperator.zero(element.signature))
    operators = list(document.operators.values()) if name is None else [element]
    if len(operators) == 1 and element.signature.r == 1:
        return LeftGroebnerBasis(operators)
    return left_buchberger(operators)


def emit(text: str, out: str = None) -> None:
    if out:
        qw.write_text_atomic(out, text)
    else:
        sys.stdout.write(text)


def spec_names(specs) -> list:
    return [f"{n}:{m}:{k}:{p}" for n, m, k, p in specs]


def run_twist(args) -> None:
    document = qw.read_document(args.input)
    basis = input_basis(document, args.name, args.module)
    spec = build_spec(basis.signature, args.spec)
    module_mode = basis.components > 1
    result = twist_substitute(basis, spec, return_before_backsub=args.before_backsub, module_mode=module_mode)
    output = result.before_backsub if args.before_backsub else result.basis
    element_name = args.name or next(iter(document.elements))

    if args.format == "json":
        report = TwistReport(
            input=str(args.input),
            element=element_name,
            specs=spec_names(args.spec),
            module_mode=module_mode,
            before_backsub=args.before_backsub,
            domain=domain_name(output.signature.domain),
            rank=result.rank,
            rank_bound=result.rank_bound,
            basis=[format_element(normalize(g, output.order), output.order) for g in output],
            cofactors=[format_element(c) for c in result.cofactors] if result.cofactors else None,
        )
        emit(report.model_dump_json(indent=2) + "\n", args.out)
        return

    out = qw.OperatorDocument(output.signature)
    out.description = f"{element_name} twisted by {', '.join(spec_names(args.spec)) or 'identity'}"
    if args.before_backsub:
        out.provenance = "before back-substitution"
    else:
        out.provenance = f"rank {result.rank} of bound {result.rank_bound}"
    for i, g in enumerate(output, start=1):
        out.elements[f"{element_name}_{i}" if len(output) > 1 else element_name] = g
    emit(qw.print_operator_document(out), args.out)


def run_newton(args) -> None:
    document = qw.read_document(args.input)
    _, element = select_element(document, args.name)
    include_rhs = args.include_rhs if args.include_rhs is not None else config.newton_include_rhs
    polygon = newton_polygon(element, include_rhs=include_rhs)
    if args.emit == "slopes":
        text = format_slopes(polygon.slopes) + "\n"
    elif args.emit == "upper":
        text = format_tsv(polygon.upper)
    elif args.emit == "svg":
        text = render_svg(polygon, m=args.m, coordinates=args.coordinates)
    else:
        text = format_tsv(polygon.hull)
    emit(text, args.out)


def reference_table(kind: str, source: str, terms: int, element):
    if kind == "pochhammer":
        return q_pochhammer_table(terms)
    if kind == "central-qbinom":
        return q_binomial_table("central", terms)
    if source is None:
        raise qw.DocumentError("`--against unroll` needs the recurrence document as second argument")
    _, rec = select_element(qw.read_document(source))
    order = (rec[0] if isinstance(rec, ModuleElement) else rec).order
    return unroll(rec, [1] * order, terms)


def run_verify(args) -> None:
    document = qw.read_document(args.input)
    name, element = select_element(document, args.name)
    kind = args.against[0]
    spec = build_spec(element.signature, args.spec) if args.spec else None

    if kind == "factorization":
        if spec is None or element.signature.s != 1:
            raise qw.DocumentError("The factorization check needs one --spec q:M")
        omega = spec.omegas[0]
        report = verify_factorization(element, omega)
        result = FactorizationResult(
            input=str(args.input),
            omega=str(omega),
            status=report.status,
            period=report.period,
            factors=report.factors,
            specialized=report.specialized,
            product=report.product,
            witness=report.witness,
        )
        emit(result.model_dump_json(indent=2) + "\n" if args.format == "json" else f"{report.status}\n", args.out)
        if not report.ok:
            raise QTwistError("Factorization check is inconclusive")
        return

    if kind not in ("pochhammer", "central-qbinom", "unroll"):
        raise qw.DocumentError(f"Unknown reference `{kind}`")
    terms = args.terms or config.as_int("verify_terms")
    table = reference_table(kind, args.against[1] if len(args.against) > 1 else None, terms, element)
    target = element
    if spec is not None:
        table = twist_table(table, spec)
        target = rescale_operator(element, spec.roots)
    report = check_annihilates(target, table)
    result = VerifyReport(
        input=str(args.input),
        against=kind,
        specs=spec_names(args.spec),
        passed=report.passed,
        checked=report.checked,
        failures=[str(n) for n in report.failures],
    )
    if args.format == "json":
        emit(result.model_dump_json(indent=2) + "\n", args.out)
    else:
        emit(f"{'passed' if report.passed else 'failed'}: {report.checked} terms checked\n", args.out)
    if not report.passed:
        raise QTwistError(f"{name} does not annihilate the {kind} table at n = {', '.join(result.failures)}")


def run_gb(args) -> None:
    document = qw.read_document(args.input)
    order = MonomialOrder(args.order or config.default_order)
    operators = list(document.operators.values())
    if not operators:
        raise qw.DocumentError("The document declares no operators")
    basis = left_buchberger(operators, order)
    out = qw.OperatorDocument(document.signature, description=f"left Gröbner basis in {order.kind} order")
    for i, g in enumerate(basis, start=1):
        out.elements[f"g{i}"] = g
    emit(qw.print_operator_document(out), args.out)


def run_table(args) -> None:
    document = qw.read_document(args.input)
    basis = input_basis(document, args.name, True)
    rows = []
    for m in args.orders:
        result = twist_substitute(basis, TwistSpec.single(m), module_mode=True)
        lead = next(g for g in result.basis if g[0])
        l_exp, m_exp, q_exp = exponent_summary(lead)
        rows.append(ExponentRow(m=m, l_exponent=l_exp, m_exponent=m_exp, q_exponent=q_exp))
        logging.info(f"Twist of order {m}: L {l_exp}, M {m_exp}, q {q_exp}")
    if args.format == "json":
        emit("[" + ", ".join(row.model_dump_json() for row in rows) + "]\n", args.out)
    else:
        emit(
            "m\tL\tM\tq\n" + "".join(f"{r.m}\t{r.l_exponent}\t{r.m_exponent}\t{r.q_exponent}\n" for r in rows),
            args.out,
        )


def create_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qtwist.py",
        description="Annihilators of q-holonomic sequences twisted by roots of unity.",
    )
    parser.add_argument("--config", default=None, help="Path to a settings file (YAML, TOML or JSON).")
    parser.add_argument("--log-file", default="", action="store", help="Store logging to file.")
    parser.add_argument(
        "--log-verbosity",
        choices=["DEBUG", "INFO", "WARNING", "ERROR", "FATAL", "CRITICAL"],
        default="DEBUG",
        help="Set level of logging into log-file.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="Print debug messages to stderr.")
    subparsers = parser.add_subparsers(dest="command", required=True)

    def common(sub, output_format=False):
        sub.add_argument("--input", required=True, help="Operator document (*.qw).")
        sub.add_argument("--name", default=None, help="Operator of the document to use. Default is the first one.")
        sub.add_argument("--out", default=None, help="Write the result to this file instead of stdout.")
        if output_format:
            sub.add_argument("--format", choices=["text", "json"], default="text")

    twist = subparsers.add_parser("twist", help="Annihilator of f_n(omega * q^(p/k)).")
    common(twist, output_format=True)
    twist.add_argument("--spec", type=parse_spec, action="append", default=[], help="VAR:M[:K[:P]], repeatable.")
    twist.add_argument("--before-backsub", action="store_true", help="Print the result before back-substitution.")
    twist.add_argument("--module", action="store_true", help="Twist as an inhomogeneous module element.")
    twist.set_defaults(func=run_twist)

    newton = subparsers.add_parser("newton", help="Newton polygon of an operator.")
    common(newton)
    newton.add_argument("--emit", choices=["vertices", "slopes", "svg", "upper"], default="vertices")
    newton.add_argument("--include-rhs", action="store_true", default=None, help="Add the right-hand side points.")
    newton.add_argument("-m", type=int, default=1, help="Root of unity order for the (L, M^m) axes of the SVG.")
    newton.add_argument("--coordinates", choices=["jolted", "raw"], default=None)
    newton.set_defaults(func=run_newton)

    verify = subparsers.add_parser("verify", help="Check an operator against a table of values.")
    common(verify, output_format=True)
    verify.add_argument(
        "--against",
        nargs="+",
        required=True,
        metavar="KIND",
        help="pochhammer, central-qbinom, `unroll FILE` or factorization.",
    )
    verify.add_argument("--spec", type=parse_spec, action="append", default=[], help="Twist applied to the table.")
    verify.add_argument("--terms", type=int, default=None, help="Number of table terms.")
    verify.set_defaults(func=run_verify)

    gb = subparsers.add_parser("gb", help="Left Gröbner basis of the operators of a document.")
    gb.add_argument("--input", required=True)
    gb.add_argument("--order", choices=["lex", "deglex", "degrevlex"], default=None)
    gb.add_argument("--out", default=None)
    gb.set_defaults(func=run_gb)

    table = subparsers.add_parser("table", help="Exponents of inhomogeneous twists for several orders.")
    common(table, output_format=True)
    table.add_argument("--orders", type=int, nargs="+", default=[1, 2])
    table.set_defaults(func=run_table)

    return parser


def main(argv=None) -> int:
    parser = create_parser()
    args = parser.parse_args(argv)

    if args.log_file:
        setup_logger(pathlib.Path(args.log_file), args.log_verbosity, "DEBUG" if args.verbose else "WARNING")
    else:
        setup_logger(console_verbosity="DEBUG" if args.verbose else "WARNING")

    logging.debug(f"== starting qtwist == version {__version__} ==")

    try:
        if args.config:
            update_config_path(args.config)
        validate_config(config)
    except (IOError, ConfigError) as e:
        handle_error_and_exit(e, EXIT_USAGE_ERROR)

    try:
        args.func(args)
    except qw.DocumentError as e:
        handle_error_and_exit(e, EXIT_USAGE_ERROR)
    except QTwistError as e:
        handle_error_and_exit(e, EXIT_MATH_ERROR)
    except OSError as e:
        handle_error_and_exit(e, EXIT_USAGE_ERROR)
    return 0


if __name__ == "__main__":
    sys.exit(main())
