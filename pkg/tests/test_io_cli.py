import json
import random
from fractions import Fraction as F
from importlib import resources

import jsonschema
import pytest
from hypothesis import given
from hypothesis import strategies as st

import randomized as R
from cli_suite import SUITE, call, run_suite
from statcat._exact import fmt, parse_rational
from statcat.cli import revalidate_certificate
from statcat.errors import InvariantError, ParseError
from statcat.io import (
    dumps,
    kernel_from_json,
    kernel_to_json,
    map_from_document,
    map_to_document,
    model_from_document,
    model_to_document,
    parse_document,
    parse_model,
    read,
    schema,
)
from statcat.kernels import apply_kernel
from statcat.measure import SigmaAlgebra

FIXTURES = resources.files("statcat").joinpath("fixtures")


def _model_text(mass_00="9/16"):
    doc = json.loads(FIXTURES.joinpath("coinpair.model.json").read_text("utf-8"))
    doc["family"][0]["mass"]["00"] = mass_00
    return json.dumps(doc)


@given(st.fractions())
def test_rational_strings_round_trip(q):
    text = fmt(q)
    assert parse_rational(text) == q
    # canonical: lowest terms and no denominator of one
    assert fmt(parse_rational(text)) == text and not text.endswith("/1")


def test_fixture_parses():
    m = parse_model("coinpair")
    assert len(m.space) == 4 and len(m) == 3
    assert m.family[0].mass == (F(9, 16), F(3, 16), F(3, 16), F(1, 16))
    theta = model_from_document(read("coinpair", "model").doc).parametrisation
    assert theta.parameters == ((F(1, 4),), (F(1, 2),), (F(3, 4),))


def test_mass_sum_error_names_member():
    doc = parse_document(_model_text("10/16"), "model")
    with pytest.raises(InvariantError, match="p=1/4"):
        model_from_document(doc)


def test_duplicate_label_rejected():
    doc = json.loads(_model_text())
    doc["points"][1] = "00"
    with pytest.raises(ParseError):
        model_from_document(parse_document(json.dumps(doc), "model"))


def test_syntax_error_reports_line():
    text = '{\n  "schema": "statcat/model/v1",\n  "points": [\n}'
    with pytest.raises(ParseError, match="line 4"):
        parse_document(text, "model")


def test_duplicate_key_rejected():
    with pytest.raises(ParseError, match="duplicate"):
        parse_document('{"schema": "statcat/map/v1", "schema": "x"}', "map")


def test_schema_violation_reports_path():
    doc = json.loads(_model_text())
    doc["family"][1]["mass"]["01"] = "0.25"
    with pytest.raises(ParseError, match=r"\$\.family\[1\]"):
        parse_document(json.dumps(doc), "model")


def test_fixtures_round_trip_byte_identical():
    for entry in FIXTURES.iterdir():
        text = entry.read_text("utf-8")
        kind = "model" if entry.name.endswith(".model.json") else "map"
        doc = parse_document(text, kind)
        if kind == "model":
            parsed = model_from_document(doc)
            again = model_to_document(parsed.model, parsed.parametrisation)
        else:
            src = parse_model("coinpair").sigma
            again = map_to_document(map_from_document(doc, src))
        assert dumps(again) == text, entry.name


def test_random_models_round_trip():
    rng = random.Random(60)
    for _ in range(100):
        m = R.model(rng, rng.randint(1, 5), rng.randint(1, 4))
        text = dumps(model_to_document(m))
        back = model_from_document(parse_document(text, "model")).model
        assert back.family == m.family and back.sigma == m.sigma
        assert dumps(model_to_document(back)) == text


def test_kernel_json_round_trip():
    rng = random.Random(61)
    for _ in range(50):
        dom, cod = R.space(rng.randint(1, 4)), R.space(rng.randint(1, 4), "y")
        k = R.kernel(rng, SigmaAlgebra.power_set(dom), SigmaAlgebra.power_set(cod))
        assert kernel_from_json(json.loads(dumps(kernel_to_json(k)))).matrix == k.matrix


def test_worked_cli_examples():
    code, out, _ = call(["sufficient", "--model", "coinpair", "--map", "sum"])
    assert code == 0 and json.loads(out)["verdict"] == "pass"
    code, out, _ = call(["sufficient", "--model", "coinpair", "--map", "first"])
    w = json.loads(out)["witness"]
    assert code == 1 and (w["member"], w["x"], w["y"]) == ("p=1/4", "00", "0")
    code, out, _ = call(["equivalent", "--model-a", "coinpair", "--model-b", "coinsum", "--map", "sum"])
    doc = json.loads(out)
    assert code == 0 and doc["agree"]
    assert [r["verdict"] for r in doc["routes"].values()] == ["pass"] * 3
    assert doc["certificate"]["backward"]["rows"][1] == ["0", "1/2", "1/2", "0"]


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["frobnicate"],
        ["sufficient", "--model", "coinpair"],
        ["sufficient", "--model", "nosuch", "--map", "sum"],
        ["sufficient", "--model", "coinpair", "--map", "sum", "--member", "p=9/10"],
        ["equivalent", "--model-a", "coinpair", "--model-b", "coinsum"],
        ["minimal", "--model", "coinpair", "--category", "FinTop"],
        ["structural", "--model-a", "coinpair", "--model-b", "coinsum", "--category", "Vect"],
        ["sufficient", "--model", "coinpair", "--map", "sum", "--threads", "0"],
    ],
)
def test_usage_and_input_errors_exit_2(argv):
    code, out, err = call(argv)
    assert code == 2 and out == "" and err


def test_bad_model_file_exits_2(tmp_path):
    bad = tmp_path / "bad.model.json"
    bad.write_text(_model_text("17/16"), encoding="utf-8")
    code, _, err = call(["quotient", "--model", str(bad)])
    assert code == 2 and "p=1/4" in err
    bad.write_text("{", encoding="utf-8")
    code, _, err = call(["quotient", "--model", str(bad)])
    assert code == 2 and "line 1" in err


def test_family_mismatch_exits_1(tmp_path):
    doc = json.loads(FIXTURES.joinpath("coinsum.model.json").read_text("utf-8"))
    doc["family"][0]["mass"] = {"0": "1/2", "1": "1/4", "2": "1/4"}
    other = tmp_path / "other.model.json"
    other.write_text(json.dumps(doc), encoding="utf-8")
    code, out, _ = call(["equivalent", "--model-a", "coinpair", "--model-b", str(other), "--map", "sum"])
    cert = json.loads(out)
    assert code == 1 and cert["reason"] == "family-mismatch" and cert["witness"]["member"] == "p=1/4"


def test_suite_certificates_validate_and_revalidate(tmp_path):
    codes = run_suite(tmp_path)
    cert_schema = schema("certificate")
    coinpair = parse_model("coinpair")
    revalidated = 0
    for stem, argv, expected in SUITE:
        assert codes[stem] == expected, stem
        doc = json.loads((tmp_path / f"{stem}.json").read_text("utf-8"))
        jsonschema.validate(doc, cert_schema)
        assert doc["verdict"] == ("pass" if expected == 0 else "fail")
        if doc["command"] == "equivalent" and doc["verdict"] == "pass":
            other = parse_model(argv[argv.index("--model-b") + 1])
            assert revalidate_certificate(doc, coinpair, other)
            # the backward kernel sends every member of b to a member of a
            backward = kernel_from_json(doc["certificate"]["backward"])
            for q in other.family:
                assert apply_kernel(backward, q.atomic(other.sigma)).mass in {p.mass for p in coinpair.family}
            revalidated += 1
    assert revalidated == 3


def test_tampered_certificate_fails_revalidation(tmp_path):
    run_suite(tmp_path)
    doc = json.loads((tmp_path / "equivalent-sum.json").read_text("utf-8"))
    doc["certificate"]["backward"]["rows"][1] = ["0", "1", "0", "0"]
    assert not revalidate_certificate(doc, parse_model("coinpair"), parse_model("coinsum"))
