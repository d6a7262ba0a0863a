"""JSON documents for models, maps and certificates.

Rationals travel as strings ("3/16"). Serialization is canonical: sorted
keys, lowest-terms rationals, two-space indentation and a trailing newline,
so a parsed canonical document dumps back to the same bytes.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Any

import jsonschema

from ._exact import fmt, parse_rational
from .errors import InvariantError, ParseError
from .kernels import ConditionalTable, MarkovKernel
from .measure import DensityVector, FiniteSpace, MeasurableMap, RationalMeasure, SigmaAlgebra
from .morphisms import FiniteModel, InfeasibilityCertificate
from .parametrisation import Parametrisation
from .topology import FiniteTopology

MODEL_SCHEMA = "statcat/model/v1"
MAP_SCHEMA = "statcat/map/v1"
CERTIFICATE_SCHEMA = "statcat/certificate/v1"


@lru_cache(maxsize=None)
def schema(kind: str) -> dict:
    text = resources.files("statcat").joinpath(f"schemas/v1/{kind}.schema.json").read_text("utf-8")
    return json.loads(text)


def _no_duplicate_keys(pairs):
    out = {}
    for k, v in pairs:
        if k in out:
            raise ParseError(f"duplicate key {k!r}")
        out[k] = v
    return out


def _json_path(path) -> str:
    out = "$"
    for part in path:
        out += f"[{part}]" if isinstance(part, int) else f".{part}"
    return out


def parse_document(text: str, kind: str) -> dict:
    try:
        doc = json.loads(text, object_pairs_hook=_no_duplicate_keys)
    except json.JSONDecodeError as e:
        raise ParseError(e.msg, f"line {e.lineno}, column {e.colno}") from None
    validator = jsonschema.Draft202012Validator(schema(kind))
    error = jsonschema.exceptions.best_match(validator.iter_errors(doc))
    if error is not None:
        raise ParseError(error.message, _json_path(error.absolute_path))
    return doc


def digest(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def dumps(doc: Any) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


# -- models ----------------------------------------------------------------


@dataclass(frozen=True)
class ModelDocument:
    model: FiniteModel
    parametrisation: Parametrisation | None = None


def _rational(text: str, where: str) -> Fraction:
    try:
        return parse_rational(text)
    except ValueError as e:
        raise ParseError(str(e), where) from None


def _masses(space: FiniteSpace, table: dict, where: str) -> tuple[Fraction, ...]:
    unknown = sorted(set(table) - set(space.points))
    if unknown:
        raise InvariantError(f"{where}: mass given for unknown point {unknown[0]!r}")
    return tuple(_rational(table.get(p, "0"), f"{where}.{p}") for p in space.points)


def _partition(space: FiniteSpace, blocks, where: str) -> SigmaAlgebra:
    if blocks is None:
        return SigmaAlgebra.power_set(space)
    idx = []
    for b in blocks:
        for label in b:
            if label not in space.points:
                raise InvariantError(f"{where}: unknown point {label!r}")
        idx.append([space.index(label) for label in b])
    try:
        return SigmaAlgebra(space, idx)
    except InvariantError as e:
        raise InvariantError(f"{where}: {e}") from None


def model_from_document(doc: dict) -> ModelDocument:
    points = doc["points"]
    seen = set()
    for k, p in enumerate(points):
        if p in seen:
            raise ParseError(f"duplicate point label {p!r}", f"$.points[{k}]")
        seen.add(p)
    space = FiniteSpace(tuple(points))
    sigma = _partition(space, doc.get("partition"), "partition")
    family, names = [], []
    for k, entry in enumerate(doc["family"]):
        name = entry["name"]
        try:
            family.append(RationalMeasure(space, _masses(space, entry["mass"], f"$.family[{k}].mass")))
        except InvariantError as e:
            raise InvariantError(f"family member {name!r}: {e}") from None
        names.append(name)
    dominating = None
    if "dominating" in doc:
        mass = _masses(space, doc["dominating"], "$.dominating")
        try:
            dominating = RationalMeasure(space, mass, is_probability=sum(mass) == 1)
        except InvariantError as e:
            raise InvariantError(f"dominating measure: {e}") from None
    model = FiniteModel(space, sigma, tuple(family), tuple(names), dominating)
    theta = None
    if "parametrisation" in doc:
        block = doc["parametrisation"]
        params = tuple(
            tuple(_rational(v, f"$.parametrisation.parameters[{k}]") for v in row)
            for k, row in enumerate(block["parameters"])
        )
        try:
            assignment = tuple(model.index(n) for n in block["assignment"])
        except KeyError as e:
            raise InvariantError(f"parametrisation: {e.args[0]}") from None
        theta = Parametrisation(params, assignment)
    return ModelDocument(model, theta)


def model_to_document(model: FiniteModel, theta: Parametrisation | None = None) -> dict:
    space = model.space
    doc: dict[str, Any] = {
        "schema": MODEL_SCHEMA,
        "points": list(space.points),
        "family": [
            {"name": n, "mass": {space.label(i): fmt(m) for i, m in enumerate(p.mass)}}
            for n, p in zip(model.names, model.family)
        ],
    }
    if not model.sigma.is_power_set:
        doc["partition"] = [[space.label(i) for i in b] for b in model.sigma.blocks]
    if model.dominating is not None:
        doc["dominating"] = {space.label(i): fmt(m) for i, m in enumerate(model.dominating.mass)}
    if theta is not None:
        doc["parametrisation"] = {
            "parameters": [[fmt(v) for v in row] for row in theta.parameters],
            "assignment": [model.names[i] for i in theta.assignment],
        }
    return doc


# -- maps ------------------------------------------------------------------


def map_from_document(doc: dict, domain: SigmaAlgebra, codomain: SigmaAlgebra | None = None) -> MeasurableMap:
    """Build the map on `domain`. The codomain algebra is `codomain` if given,
    else the document's partition, else the power set."""
    if list(domain.space.points) != doc["domain"]:
        raise InvariantError("map domain points do not match the model's points")
    if codomain is None:
        cspace = FiniteSpace(tuple(doc["codomain"]))
        codomain = _partition(cspace, doc.get("codomain_partition"), "codomain_partition")
    elif list(codomain.space.points) != doc["codomain"]:
        raise InvariantError("map codomain points do not match the target model's points")
    table = doc["assignment"]
    for x, y in table.items():
        if x not in domain.space.points:
            raise InvariantError(f"assignment: unknown domain point {x!r}")
        if y not in codomain.space.points:
            raise InvariantError(f"assignment of {x!r}: unknown codomain point {y!r}")
    missing = [p for p in domain.space.points if p not in table]
    if missing:
        raise InvariantError(f"assignment: no image for point {missing[0]!r}")
    return MeasurableMap.from_labels(domain, codomain, table)


def map_to_document(map: MeasurableMap) -> dict:
    doc = {
        "schema": MAP_SCHEMA,
        "domain": list(map.domain.space.points),
        "codomain": list(map.codomain.space.points),
        "assignment": dict(map.as_dict()),
    }
    if not map.codomain.is_power_set:
        doc["codomain_partition"] = [[map.codomain.space.label(i) for i in b] for b in map.codomain.blocks]
    return doc


# -- certificate values ----------------------------------------------------


def kernel_to_json(k: MarkovKernel) -> dict:
    return {
        "domain": list(k.domain.space.points),
        "codomain": list(k.codomain.space.points),
        "rows": [[fmt(v) for v in row] for row in k.matrix],
    }


def kernel_from_json(doc: dict) -> MarkovKernel:
    dom = SigmaAlgebra.power_set(FiniteSpace(tuple(doc["domain"])))
    cod = SigmaAlgebra.power_set(FiniteSpace(tuple(doc["codomain"])))
    rows = tuple(tuple(parse_rational(v) for v in row) for row in doc["rows"])
    return MarkovKernel(dom, cod, rows)


def encode(obj: Any) -> Any:
    """Plain JSON view of library values, rationals as strings."""
    if obj is None or isinstance(obj, (bool, str)):
        return obj
    if isinstance(obj, int):
        return obj
    if isinstance(obj, Fraction):
        return fmt(obj)
    if isinstance(obj, MarkovKernel):
        return kernel_to_json(obj)
    if isinstance(obj, ConditionalTable):
        return {"kernel": kernel_to_json(obj.kernel), "defined": list(obj.defined)}
    if isinstance(obj, RationalMeasure):
        return {obj.space.label(i): fmt(m) for i, m in enumerate(obj.mass)}
    if isinstance(obj, DensityVector):
        return {obj.space.label(i): fmt(v) for i, v in enumerate(obj.value)}
    if isinstance(obj, SigmaAlgebra):
        return [[obj.space.label(i) for i in b] for b in obj.blocks]
    if isinstance(obj, InfeasibilityCertificate):
        return {
            "row_weights": [fmt(v) for v in obj.row_weights],
            "pair_weights": [[fmt(v) for v in row] for row in obj.pair_weights],
        }
    if isinstance(obj, FiniteTopology):
        return [sorted(u) for u in obj.opens]
    if isinstance(obj, dict):
        return {str(k): encode(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = [encode(v) for v in obj]
        return sorted(items, key=json.dumps) if isinstance(obj, (set, frozenset)) else items
    raise TypeError(f"cannot encode {type(obj).__name__}")


# -- files -----------------------------------------------------------------


FIXTURE_SUFFIX = {"model": ".model.json", "map": ".map.json"}


def resolve(name: str, kind: str) -> Path:
    """A readable path, or the shipped fixture called `name`."""
    path = Path(name)
    if path.is_file():
        return path
    fixture = resources.files("statcat").joinpath("fixtures", name + FIXTURE_SUFFIX[kind])
    if fixture.is_file():
        return Path(str(fixture))
    raise FileNotFoundError(f"no {kind} file or fixture named {name!r}")


@dataclass(frozen=True)
class Loaded:
    name: str
    sha256: str
    doc: dict


def read(name: str, kind: str) -> Loaded:
    data = resolve(name, kind).read_bytes()
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as e:
        raise ParseError("file is not UTF-8", f"byte {e.start}") from None
    return Loaded(name, digest(data), parse_document(text, kind))


def parse_model(path: str) -> FiniteModel:
    return model_from_document(read(path, "model").doc).model


__all__ = [
    "ModelDocument",
    "dumps",
    "encode",
    "kernel_from_json",
    "kernel_to_json",
    "map_from_document",
    "map_to_document",
    "model_from_document",
    "model_to_document",
    "parse_document",
    "parse_model",
    "read",
    "resolve",
]
