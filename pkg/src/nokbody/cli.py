"""Command line front end: read a series document, run a command, print a report.

Usage::

    nokbody COMMAND DOCUMENT [--max-degree N] [--p 1,2,3] [--format json|csv]
                             [--ordering 2,1] [--tolerance 1/100]

``DOCUMENT`` is a path or ``-`` for stdin.  Exit status is 0 on success, 2
when the document is invalid and 3 when a computation is refused.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import re
import sys
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Any

import jsonschema

from .errors import DocumentError, NokError
from .hull import body_limit, nok_body, normalized_volume
from .limits import (
    MultiComponentSeries,
    convergence,
    decompose_reduced,
    degree_limit_report,
    sumset_report,
    volume_limit_report,
)
from .semigroup import (
    GradedSemigroup,
    boundary_lattice,
    ind,
    level_index,
    minimal_generators,
    q,
    slice as semigroup_slice,
    strongly_nonnegative,
)
from .series import GradedLinearSeries, Poly

SCHEMA_VERSION = "1"
COMMANDS = ("analyze", "body", "limit", "degree", "sumset", "decompose")
DEFAULT_MAX_DEGREE = 20
DEFAULT_P = (1, 2, 3)

_INT = {"type": "integer"}
_NAT = {"type": "integer", "minimum": 0}
_POS = {"type": "integer", "minimum": 1}
_INTVEC = {"type": "array", "items": _INT}
_POLY = {"type": "object", "additionalProperties": {"type": ["string", "integer"]}}

_OPTIONS = {
    "type": "object",
    "properties": {
        "max_degree": _POS,
        "p": {"type": "array", "items": _POS, "minItems": 1},
        "ordering": {"type": "array", "items": _POS},
        "tolerance": {"type": ["string", "integer"]},
    },
    "additionalProperties": False,
}

_COMMON = {
    "schema_version": {"const": SCHEMA_VERSION},
    "type": {"type": "string"},
    "options": _OPTIONS,
}


def _schema(required: list[str], props: dict) -> dict:
    return {
        "type": "object",
        "required": ["type"] + required,
        "properties": {**_COMMON, **props},
        "additionalProperties": False,
    }


_SERIES_SCHEMAS = {
    "toric": _schema(["d", "polytope"], {"d": _POS, "polytope": {"type": "array", "items": _INTVEC, "minItems": 1}}),
    "generated": _schema(["d", "generators"], {
        "d": _POS,
        "generators": {"type": "array", "items": {
            "type": "object", "required": ["degree", "poly"], "additionalProperties": False,
            "properties": {"degree": _POS, "poly": _POLY}}},
    }),
    "explicit": _schema(["d", "bases"], {
        "d": _POS,
        "max_degree": _NAT,
        "bases": {"type": "object", "propertyNames": {"pattern": "^[0-9]+$"},
                  "additionalProperties": {"type": "array", "items": _POLY}},
    }),
}

SCHEMAS = {
    **_SERIES_SCHEMAS,
    "semigroup": _schema(["d"], {
        "d": _POS,
        "generators": {"type": "array", "items": _INTVEC},
        "slices": {"type": "object", "propertyNames": {"pattern": "^[0-9]+$"},
                   "additionalProperties": {"type": "array", "items": _INTVEC}},
        "truncation": _NAT,
    }),
    "multicomponent": _schema(["component_dims"], {
        "component_dims": {"type": "array", "items": _POS, "minItems": 1},
        "components": {"type": "array", "items": {"type": "object"}},
        "generators": {"type": "array", "items": {
            "type": "object", "required": ["degree", "polys"], "additionalProperties": False,
            "properties": {"degree": _POS, "polys": {"type": "array", "items": _POLY}}}},
        "bases": {"type": "object", "propertyNames": {"pattern": "^[0-9]+$"},
                  "additionalProperties": {"type": "array", "items": {"type": "array", "items": _POLY}}},
        "max_degree": _NAT,
    }),
}

_RATIONAL = re.compile(r"^-?[0-9]+(/[0-9]+)?$")
_EXPONENT = re.compile(r"^[0-9]+(,[0-9]+)*$")


# --------------------------------------------------------------------------
# Parsing


def parse_rational(value: Any, pointer: str) -> Fraction:
    if isinstance(value, bool) or not isinstance(value, (int, str)):
        raise DocumentError("BAD_RATIONAL", f"coefficient {value!r} is not an integer or p/q string", pointer)
    if isinstance(value, int):
        return Fraction(value)
    if not _RATIONAL.match(value):
        raise DocumentError("BAD_RATIONAL", f"coefficient {value!r} is not an integer or p/q string", pointer)
    num, _, den = value.partition("/")
    if den and int(den) == 0:
        raise DocumentError("BAD_RATIONAL", f"zero denominator in {value!r}", pointer)
    return Fraction(int(num), int(den or 1))


def _escape(token: str) -> str:
    return token.replace("~", "~0").replace("/", "~1")


def parse_poly(obj: dict, d: int, pointer: str) -> Poly:
    terms = {}
    for key, coeff in obj.items():
        where = f"{pointer}/{_escape(key)}"
        if not _EXPONENT.match(key):
            raise DocumentError("BAD_EXPONENT", f"exponent key {key!r} is not comma-separated integers", where)
        exp = tuple(int(x) for x in key.split(","))
        if len(exp) != d:
            raise DocumentError("BAD_EXPONENT", f"exponent key {key!r} has length {len(exp)}, expected {d}", where)
        c = parse_rational(coeff, where)
        terms[exp] = terms.get(exp, 0) + c
    return Poly(d, terms)


def emit_poly(f: Poly) -> dict:
    return {",".join(map(str, e)): str(c) for e, c in sorted(f.terms.items())}


def _check_vec(v: list, length: int, pointer: str) -> None:
    if len(v) != length:
        raise DocumentError("SCHEMA_ERROR", f"vector of length {len(v)}, expected {length}", pointer)


@dataclass
class SeriesDocument:
    """A validated input document in canonical form."""

    type: str
    payload: dict
    options: dict = field(default_factory=dict)
    schema_version: str = SCHEMA_VERSION

    def to_json(self) -> dict:
        out = {"schema_version": self.schema_version, "type": self.type, **self.payload}
        if self.options:
            out["options"] = self.options
        return out

    def build(self):
        """The library object described by the document."""
        return _build(self.type, self.payload)


def _canonical(kind: str, doc: dict, pointer: str = "") -> dict:
    """Validate one (sub)document and return its payload in canonical form."""
    schema = SCHEMAS.get(kind)
    if schema is None:
        raise DocumentError("SCHEMA_ERROR", f"unknown type {kind!r}", f"{pointer}/type")
    err = jsonschema.exceptions.best_match(jsonschema.Draft7Validator(schema).iter_errors(doc))
    if err is not None:
        path = "".join(f"/{_escape(str(p))}" for p in err.absolute_path)
        raise DocumentError("SCHEMA_ERROR", err.message, pointer + path)

    out: dict = {}
    if kind == "toric":
        d = doc["d"]
        out["d"] = d
        for i, v in enumerate(doc["polytope"]):
            _check_vec(v, d, f"{pointer}/polytope/{i}")
        out["polytope"] = [list(v) for v in doc["polytope"]]
    elif kind == "generated":
        d = doc["d"]
        out["d"] = d
        out["generators"] = [
            {"degree": g["degree"], "poly": emit_poly(parse_poly(g["poly"], d, f"{pointer}/generators/{i}/poly"))}
            for i, g in enumerate(doc["generators"])
        ]
    elif kind == "explicit":
        d = doc["d"]
        out["d"] = d
        bases = {}
        for k in sorted(doc["bases"], key=int):
            bases[str(int(k))] = [
                emit_poly(parse_poly(f, d, f"{pointer}/bases/{k}/{j}")) for j, f in enumerate(doc["bases"][k])
            ]
        out["bases"] = bases
        top = doc.get("max_degree", max((int(k) for k in bases), default=0))
        if any(int(k) > top for k in bases):
            raise DocumentError("SCHEMA_ERROR", "basis degree beyond max_degree", f"{pointer}/max_degree")
        out["max_degree"] = top
    elif kind == "semigroup":
        d = doc["d"]
        out["d"] = d
        if "generators" not in doc and "slices" not in doc:
            raise DocumentError("SCHEMA_ERROR", "semigroup needs generators or slices", pointer)
        if "generators" in doc:
            for i, g in enumerate(doc["generators"]):
                _check_vec(g, d + 1, f"{pointer}/generators/{i}")
                if g[-1] < 1:
                    raise DocumentError("SCHEMA_ERROR", "generator level must be >= 1", f"{pointer}/generators/{i}")
            out["generators"] = sorted(list(g) for g in doc["generators"])
        if "slices" in doc:
            slices = {}
            for k in sorted(doc["slices"], key=int):
                for i, v in enumerate(doc["slices"][k]):
                    _check_vec(v, d, f"{pointer}/slices/{k}/{i}")
                slices[str(int(k))] = sorted(list(v) for v in doc["slices"][k])
            out["slices"] = slices
            out["truncation"] = doc.get("truncation", max((int(k) for k in slices), default=0))
    else:  # multicomponent
        dims = doc["component_dims"]
        out["component_dims"] = list(dims)
        modes = [k for k in ("components", "generators", "bases") if k in doc]
        if len(modes) != 1:
            raise DocumentError("SCHEMA_ERROR", "give exactly one of components, generators, bases", pointer)
        if "components" in doc:
            if len(doc["components"]) != len(dims):
                raise DocumentError("SCHEMA_ERROR", "one component document per component", f"{pointer}/components")
            comps = []
            for i, sub in enumerate(doc["components"]):
                where = f"{pointer}/components/{i}"
                sub_kind = sub.get("type")
                if sub_kind not in _SERIES_SCHEMAS:
                    raise DocumentError("SCHEMA_ERROR", f"component type {sub_kind!r} is not a series", f"{where}/type")
                payload = _canonical(sub_kind, sub, where)
                if payload["d"] != dims[i]:
                    raise DocumentError("SCHEMA_ERROR", "component dimension disagrees with component_dims", f"{where}/d")
                comps.append({"type": sub_kind, **payload})
            out["components"] = comps
        elif "generators" in doc:
            gens = []
            for i, g in enumerate(doc["generators"]):
                where = f"{pointer}/generators/{i}/polys"
                _check_vec(g["polys"], len(dims), where)
                gens.append({"degree": g["degree"], "polys": [
                    emit_poly(parse_poly(f, dims[j], f"{where}/{j}")) for j, f in enumerate(g["polys"])]})
            out["generators"] = gens
        else:
            bases = {}
            for k in sorted(doc["bases"], key=int):
                elems = []
                for j, elem in enumerate(doc["bases"][k]):
                    where = f"{pointer}/bases/{k}/{j}"
                    _check_vec(elem, len(dims), where)
                    elems.append([emit_poly(parse_poly(f, dims[c], f"{where}/{c}")) for c, f in enumerate(elem)])
                bases[str(int(k))] = elems
            out["bases"] = bases
        if "max_degree" in doc:
            out["max_degree"] = doc["max_degree"]
    return out


def parse_document(text: str) -> SeriesDocument:
    """Parse and validate a JSON series document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError("SCHEMA_ERROR", f"invalid JSON: {exc.msg}", "") from None
    if not isinstance(doc, dict):
        raise DocumentError("SCHEMA_ERROR", "document must be a JSON object", "")
    kind = doc.get("type")
    if not isinstance(kind, str):
        raise DocumentError("SCHEMA_ERROR", "missing or non-string 'type'", "/type")
    payload = _canonical(kind, doc)
    options = dict(doc.get("options", {}))
    if "tolerance" in options:
        options["tolerance"] = str(parse_rational(options["tolerance"], "/options/tolerance"))
    return SeriesDocument(kind, payload, options, doc.get("schema_version", SCHEMA_VERSION))


def _polys(obj: dict, d: int) -> Poly:
    return parse_poly(obj, d, "")


def _build(kind: str, p: dict, max_degree: int | None = None):
    if kind == "toric":
        return GradedLinearSeries.toric(p["polytope"])
    if kind == "generated":
        return GradedLinearSeries.generated(p["d"], [(g["degree"], _polys(g["poly"], p["d"])) for g in p["generators"]])
    if kind == "explicit":
        bases = {int(k): [_polys(f, p["d"]) for f in v] for k, v in p["bases"].items()}
        return GradedLinearSeries.explicit(p["d"], bases, p["max_degree"])
    if kind == "semigroup":
        gens = [tuple(g) for g in p.get("generators", [])] or None
        samples = None
        if "slices" in p:
            samples = {int(k): frozenset(tuple(v) for v in pts) for k, pts in p["slices"].items()}
            samples.setdefault(0, frozenset({(0,) * p["d"]}))
        if gens is None and samples is None:
            raise NokError("EMPTY_SEMIGROUP", "no generators or slices")
        return GradedSemigroup(p["d"], tuple(sorted(gens)) if gens else None, samples, p.get("truncation"))
    dims = p["component_dims"]
    N = p.get("max_degree", max_degree or DEFAULT_MAX_DEGREE)
    if "components" in p:
        comps = [_build(c["type"], c) for c in p["components"]]
        return MultiComponentSeries.from_components(comps, N)
    if "generators" in p:
        gens = [(g["degree"], [_polys(f, dims[j]) for j, f in enumerate(g["polys"])]) for g in p["generators"]]
        return MultiComponentSeries.generated(dims, gens, N)
    bases = {int(k): [tuple(_polys(f, dims[c]) for c, f in enumerate(e)) for e in v] for k, v in p["bases"].items()}
    return MultiComponentSeries.explicit(dims, bases, p.get("max_degree"))


# --------------------------------------------------------------------------
# Reports


def fmt(x):
    """Exact JSON rendering: rationals as strings, -inf as \"-inf\"."""
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, float) and math.isinf(x):
        return "-inf" if x < 0 else "inf"
    return x


def approx(x: Fraction) -> str:
    with localcontext() as ctx:
        ctx.prec = 12
        return str(Decimal(x.numerator) / Decimal(x.denominator))


def _vec(v) -> list:
    return [fmt(Fraction(c)) if isinstance(c, Fraction) else c for c in v]


def _semigroup_summary(S: GradedSemigroup) -> dict:
    out = {"m": level_index(S), "q": q(S), "ind": ind(S),
           "boundary_lattice": [list(b) for b in boundary_lattice(S).basis]}
    return out


def _body(S: GradedSemigroup) -> dict:
    estimate = not S.finitely_generated
    if estimate:
        gens = minimal_generators({k: v for k, v in S.samples.items() if k > 0}, S.truncation)
        if not gens:
            raise NokError("EMPTY_SEMIGROUP", "no sampled points of positive level")
        S = GradedSemigroup.from_generators(gens)
    P = nok_body(S)
    lim = body_limit(S)
    return {
        **_semigroup_summary(S),
        "vertices": [_vec(v) for v in P.vertices],
        "dimension": P.dim,
        "normalized_volume": fmt(normalized_volume(P, boundary_lattice(S))),
        "body_limit": fmt(lim),
        "approx": approx(lim),
        "estimate": estimate,
    }


def _limit_rows(rows) -> list[dict]:
    return [{"n": r.n, "degree": r.degree, "dim": r.dim, "ratio": fmt(r.ratio), "approx": approx(r.ratio)}
            for r in rows]


def _diag(d: dict) -> dict:
    return {k: fmt(v) for k, v in d.items()}


def _as_series(obj, N: int) -> MultiComponentSeries:
    if isinstance(obj, MultiComponentSeries):
        return obj
    return MultiComponentSeries.from_components([obj], N)


def run(command: str, document: SeriesDocument, flags: dict | None = None) -> dict:
    """Execute ``command`` on a parsed document; returns a JSON-ready report."""
    if command not in COMMANDS:
        raise DocumentError("SCHEMA_ERROR", f"unknown command {command!r}", "")
    flags = {k: v for k, v in (flags or {}).items() if v is not None}
    opts = {**document.options, **flags}
    N = int(opts.get("max_degree", DEFAULT_MAX_DEGREE))
    p_list = list(opts.get("p", DEFAULT_P))
    tol = opts.get("tolerance")
    tol = parse_rational(tol, "/options/tolerance") if tol is not None else None
    obj = _build(document.type, document.payload, N)
    report: dict = {"command": command, "type": document.type, "max_degree": N}

    if command == "analyze":
        if isinstance(obj, GradedSemigroup):
            top = N if obj.finitely_generated else min(N, obj.truncation)
            report.update(_semigroup_summary(obj))
            check = strongly_nonnegative(obj) if obj.finitely_generated or top >= 3 else None
            report["strongly_nonnegative"] = None if check is None else check.ok
            report["rows"] = [{"n": k, "slice_size": len(semigroup_slice(obj, k))} for k in range(top + 1)]
        elif isinstance(obj, MultiComponentSeries):
            dec = decompose_reduced(obj, N)
            report.update({"s": obj.s, "kappa": fmt(dec.kappa), "r": dec.r})
            report["rows"] = [{"n": n, "dim": total, "component_dims": parts} for n, total, parts in dec.additivity]
        else:
            top = N if obj.mode != "explicit" else min(N, obj.max_degree)
            kappa, stable_from, exact = obj.kappa_stabilization(top)
            try:
                m = obj.index(top)
            except NokError:
                m = None
            report.update({"kappa": fmt(kappa), "kappa_exact": exact, "kappa_stable_from": stable_from, "m": m})
            report["rows"] = [{"n": n, "dim": len(obj.degree_piece(n)), "slice_size": len(obj.value_slice(n))}
                              for n in range(top + 1)]
    elif command == "body":
        if isinstance(obj, MultiComponentSeries):
            raise NokError("UNSUPPORTED", "body needs a single series or a semigroup")
        S = obj if isinstance(obj, GradedSemigroup) else obj.value_semigroup(N)
        report.update(_body(S))
    elif command == "limit":
        if isinstance(obj, GradedSemigroup):
            m, qq = level_index(obj), q(obj)
            top = N if obj.finitely_generated else min(N, obj.truncation)
            rows = [{"n": k, "degree": k * m, "dim": len(semigroup_slice(obj, k * m)),
                     "ratio": Fraction(len(semigroup_slice(obj, k * m)), k**qq)} for k in range(1, top // m + 1)]
            lim = body_limit(obj) if obj.finitely_generated else None
            diag = convergence([r["ratio"] for r in rows], lim, tol) if rows else {}
            for r in rows:
                r["approx"] = approx(r["ratio"])
                r["ratio"] = fmt(r["ratio"])
            report.update({"kappa": qq, "m": m, "predicted": fmt(lim), "rows": rows, "convergence": _diag(diag)})
        elif isinstance(obj, MultiComponentSeries):
            raise NokError("UNSUPPORTED", "use decompose for multicomponent series")
        else:
            rep = volume_limit_report(obj, N, tol)
            report.update({
                "kappa": rep.kappa, "m": rep.m, "predicted": fmt(rep.predicted),
                "kappa_exact": rep.kappa_exact, "kappa_stable_from": rep.kappa_stable_from,
                "asserted": rep.asserted, "rows": _limit_rows(rep.rows), "convergence": _diag(rep.convergence),
            })
    elif command == "degree":
        if not isinstance(obj, GradedLinearSeries):
            raise NokError("UNSUPPORTED", "degree needs a single series")
        rep = degree_limit_report(obj, p_list, min(N, 10))
        report.update({
            "kappa": rep.kappa, "m": rep.m, "predicted": fmt(rep.predicted),
            "bounded": rep.bounded, "nondecreasing": rep.nondecreasing,
            "rows": [{"p": r.p, "degree": r.degree, "ratio": fmt(r.ratio), "approx": approx(r.ratio),
                      "route_a": r.route_a, "route_b": r.route_b if r.route_b is not None else "UNSTABLE"}
                     for r in rep.rows],
        })
    elif command == "sumset":
        if isinstance(obj, MultiComponentSeries):
            raise NokError("UNSUPPORTED", "sumset needs a single series or a semigroup")
        rows = []
        summary = []
        for p in p_list:
            rep = sumset_report(obj, p, N)
            summary.append({"p": p, "q": rep.q, "m": rep.m, "body_limit": fmt(rep.body_limit),
                            "sandwich_ok": rep.sandwich_ok, "gap": fmt(rep.gap)})
            for r in rep.rows:
                rows.append({"p": p, "n": r.n, "sumset": r.sumset, "middle": r.middle, "upper": r.upper,
                             "lower_ratio": fmt(r.lower_ratio), "upper_ratio": fmt(r.upper_ratio),
                             "approx": approx(r.lower_ratio)})
        report.update({"summary": summary, "rows": rows})
    else:  # decompose
        if isinstance(obj, GradedSemigroup):
            raise NokError("UNSUPPORTED", "decompose needs a series")
        M = _as_series(obj, N)
        ordering = opts.get("ordering")
        dec = decompose_reduced(M, N, ordering)
        report.update({
            "ordering": list(dec.ordering), "kappa": fmt(dec.kappa), "r": dec.r,
            "additive": dec.additive, "asserted": dec.asserted,
            "components": [{"component": c.component, "kappa": fmt(c.kappa), "m": c.m,
                            "kappa_stable_from": c.kappa_stable_from, "body_limit_estimate": fmt(c.body_limit)}
                           for c in dec.components],
            "additivity": [{"n": n, "dim": total, "parts": parts} for n, total, parts in dec.additivity],
            "tables": [{"a": t.a, "predicted": fmt(t.predicted), "convergence": _diag(t.convergence),
                        "rows": _limit_rows(t.rows)} for t in dec.tables],
        })
    return report


def to_json(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def to_csv(report: dict) -> str:
    """Flat projection: the row table when there is one, else key/value pairs."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if "tables" in report:
        rows = [{"a": t["a"], **r} for t in report["tables"] for r in t["rows"]]
    else:
        rows = report.get("rows")
    if rows:
        keys = sorted({k for r in rows for k in r})
        writer.writerow(keys)
        for r in rows:
            writer.writerow([json.dumps(r[k], sort_keys=True) if isinstance(r.get(k), (list, dict)) else
                             ("" if r.get(k) is None else r[k]) for k in keys])
    else:
        writer.writerow(["key", "value"])
        for k in sorted(report):
            v = report[k]
            writer.writerow([k, json.dumps(v, sort_keys=True) if isinstance(v, (list, dict)) else v])
    return buf.getvalue()


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nokbody", description="Value semigroups and volume limits of graded linear series.")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("document", help="path to a JSON series document, or - for stdin")
    parser.add_argument("--max-degree", type=int, dest="max_degree", help="truncation degree N")
    parser.add_argument("--p", type=_int_list, dest="p", help="comma-separated list of p values")
    parser.add_argument("--format", choices=("json", "csv"), default="json")
    parser.add_argument("--ordering", type=_int_list, help="component order for decompose, e.g. 2,1")
    parser.add_argument("--tolerance", help="rational threshold for convergence diagnostics")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.document == "-":
            text = sys.stdin.read()
        else:
            with open(args.document, encoding="utf-8") as fh:
                text = fh.read()
        doc = parse_document(text)
        flags = {"max_degree": args.max_degree, "p": args.p, "ordering": args.ordering, "tolerance": args.tolerance}
        report = run(args.command, doc, flags)
    except OSError as exc:
        print(json.dumps({"error": "IO_ERROR", "message": str(exc)}), file=sys.stderr)
        return 2
    except DocumentError as exc:
        print(json.dumps({"error": exc.code, "message": exc.message, "pointer": exc.pointer}, sort_keys=True),
              file=sys.stderr)
        return 2
    except NokError as exc:
        print(json.dumps({"error": exc.code, "message": exc.message}, sort_keys=True), file=sys.stderr)
        return 3
    sys.stdout.write(to_csv(report) if args.format == "csv" else to_json(report))
    return 0


if __name__ == "__main__":
    sys.exit(main())
