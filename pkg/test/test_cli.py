"""
qtwist - twisting q-holonomic recurrences by roots of unity

Copyright (C) 2026 qtwist contributors

License: MIT
"""

import json

import pytest

from document import read_document
from qtwist import main

from .conftest import QBIN_NEGATED, QP_CUBE_ROOT_RATIONAL, data_path, op, same_up_to_content


def run(*args):
    return main([str(a) for a in args])


def exit_code(*args) -> int:
    with pytest.raises(SystemExit) as error:
        run(*args)
    return error.value.code


def test_twist_to_file(tmp_path):
    out = tmp_path / "qbin2.qw"
    assert run("twist", "--input", data_path("qbin.qw"), "--spec", "q:2", "--out", out) == 0
    document = read_document(out)
    assert list(document.elements) == ["qbin"]
    assert same_up_to_content(document["qbin"], op(QBIN_NEGATED))
    assert document.description == "qbin twisted by q:2:1:1"


def test_twist_json(capsys):
    assert run("twist", "--input", data_path("qbin.qw"), "--spec", "q:2", "--format", "json") == 0
    report = json.loads(capsys.readouterr().out)
    assert report["element"] == "qbin"
    assert report["domain"] == "QQ"
    assert report["rank"] == 2
    assert report["rank_bound"] == 2
    assert report["module_mode"] is False
    assert len(report["basis"]) == 1
    assert len(report["cofactors"]) == 1


def test_twist_before_backsub(tmp_path, capsys):
    out = tmp_path / "a.qw"
    assert run("twist", "--input", data_path("qp.qw"), "--spec", "q:3", "--before-backsub", "--out", out) == 0
    assert same_up_to_content(read_document(out)["qp"], op(QP_CUBE_ROOT_RATIONAL))

    assert run("twist", "--input", data_path("qp.qw"), "--spec", "q:3", "--format", "json") == 0
    assert json.loads(capsys.readouterr().out)["domain"] == "QQ(zeta(3))"


def test_twist_cyclotomic_output_verifies(tmp_path):
    out = tmp_path / "qp3.qw"
    assert run("twist", "--input", data_path("qp.qw"), "--spec", "q:3", "--out", out) == 0
    assert "/" not in out.read_text()
    assert run("verify", "--input", out, "--against", "pochhammer", "--spec", "q:3") == 0


def test_twist_module(capsys):
    assert run("twist", "--input", data_path("qp.qw"), "--spec", "q:2", "--module", "--format", "json") == 0
    report = json.loads(capsys.readouterr().out)
    assert report["module_mode"] is True
    assert len(report["basis"]) == 2


def test_newton(capsys):
    assert run("newton", "--input", data_path("fig41.qw"), "--emit", "slopes") == 0
    assert capsys.readouterr().out == "-2 2\n"

    assert run("newton", "--input", data_path("fig41.qw")) == 0
    assert capsys.readouterr().out == "0\t2\n1\t0\n2\t2\n2\t5\n1\t7\n0\t5\n"

    assert run("newton", "--input", data_path("fig41.qw"), "--emit", "slopes", "--include-rhs") == 0
    assert capsys.readouterr().out == "-1 2\n"

    assert run("newton", "--input", data_path("fig41.qw"), "--emit", "svg", "-m", "2") == 0
    assert capsys.readouterr().out.startswith("<svg")


def test_verify_twisted_output(tmp_path, capsys):
    out = tmp_path / "qbin2.qw"
    run("twist", "--input", data_path("qbin.qw"), "--spec", "q:2", "--out", out)
    assert run("verify", "--input", out, "--against", "central-qbinom", "--spec", "q:2") == 0
    assert capsys.readouterr().out == "passed: 29 terms checked\n"

    assert run("verify", "--input", data_path("qp.qw"), "--against", "pochhammer", "--terms", "10") == 0
    assert capsys.readouterr().out == "passed: 10 terms checked\n"


def test_verify_against_unrolled(tmp_path, capsys):
    out = tmp_path / "qp_sqrt.qw"
    run("twist", "--input", data_path("qp.qw"), "--spec", "q:1:2", "--out", out)
    args = ["verify", "--input", out, "--against", "unroll", data_path("qp.qw"), "--spec", "q:1:2", "--format", "json"]
    assert run(*args) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["passed"] is True
    assert report["against"] == "unroll"


def test_verify_failure():
    assert exit_code("verify", "--input", data_path("qp.qw"), "--against", "central-qbinom") == 1
    assert exit_code("verify", "--input", data_path("qp.qw"), "--against", "unroll") == 2
    assert exit_code("verify", "--input", data_path("qp.qw"), "--against", "fibonacci") == 2


def test_verify_factorization(capsys):
    assert run("verify", "--input", data_path("qbin.qw"), "--against", "factorization", "--spec", "q:2") == 0
    assert capsys.readouterr().out == "equal\n"
    assert exit_code("verify", "--input", data_path("qbin.qw"), "--against", "factorization") == 2


def test_gb(tmp_path):
    system = tmp_path / "system.qw"
    system.write_text(
        "algebra q;\nshift L1:M1@q, L2:M2@q;\noperator a = L1 - M2;\noperator b = L2^2 - M1^2;\n"
    )
    out = tmp_path / "gb.qw"
    assert run("gb", "--input", system, "--order", "lex", "--out", out) == 0
    document = read_document(out)
    assert list(document.elements) == ["g1", "g2"]
    assert document.description == "left Gröbner basis in lex order"


def test_table(capsys):
    assert run("table", "--input", data_path("fig41.qw"), "--orders", "1") == 0
    assert capsys.readouterr().out == "m\tL\tM\tq\n1\t2\t7\t7\n"


@pytest.mark.slow
def test_table_second_root(capsys):
    assert run("table", "--input", data_path("fig41.qw"), "--orders", "1", "2") == 0
    assert capsys.readouterr().out == "m\tL\tM\tq\n1\t2\t7\t7\n2\t5\t22\t58\n"


def test_usage_errors(tmp_path):
    assert exit_code("twist", "--input", tmp_path / "missing.qw") == 2
    assert exit_code("twist", "--input", data_path("qbin.qw"), "--spec", "q:two") == 2
    assert exit_code("twist", "--input", data_path("qbin.qw"), "--spec", "p:2") == 2
    assert exit_code("twist", "--input", data_path("qbin.qw"), "--name", "nothing") == 2
    assert exit_code("--config", tmp_path / "missing.yaml", "newton", "--input", data_path("qbin.qw")) == 2

    broken = tmp_path / "broken.qw"
    broken.write_text("algebra q;\nshift L:M;\noperator p = L +;\n")
    assert exit_code("newton", "--input", broken) == 2


def test_config_file(tmp_path, capsys):
    settings = tmp_path / "settings.yaml"
    settings.write_text("verify_terms: 12\n")
    assert run("--config", settings, "verify", "--input", data_path("qp.qw"), "--against", "pochhammer") == 0
    assert capsys.readouterr().out == "passed: 12 terms checked\n"

    settings.write_text("verify_terms: 0\n")
    assert exit_code("--config", settings, "verify", "--input", data_path("qp.qw"), "--against", "pochhammer") == 2
