"""Command-line front end and the JSON space-document format.

Documents are UTF-8 JSON with every scalar stored as a string, so exact
values survive a round trip::

    {
      "format": "gromovlab.space/1",
      "name": "...",
      "scalar": "rational" | "decimal",
      "precision": 50,            # decimal documents only
      "labels": [...],
      "dist": [["0", "3/2"], ["3/2", "0"]],
      "base": <label or null>,
      "generator": {"sequence": [...], "mode": ..., "variant": ...} | null
    }

Exit status: 0 success or positive verdict, 1 negative verdict, 2 bad input.
"""

from __future__ import annotations

import argparse
import json
import sys
from contextlib import contextmanager
from dataclasses import dataclass
from decimal import Decimal, localcontext
from pathlib import Path
from typing import Optional

from .coarse_geometry import QICertificate, best_bijection, qi_search
from .gromov_space import (
    EntourageCertificate,
    entourage_bound,
    gh_correspondence,
    oracle_gh_distance,
    oracle_min_objective,
    pointed_gh_bounds,
    SizeError,
)
from .metric_core import FiniteMetricSpace, MetricError, PointedSpace, ShapeError, hausdorff_distance, validate_metric
from .reduction_lab import ConstructionConfig, SpikeSequence, _build, verify_claims
from .scalars import DEFAULT_PRECISION, format_scalar, parse_scalar

FORMAT = "gromovlab.space/1"

EXIT_OK, EXIT_NEGATIVE, EXIT_INPUT = 0, 1, 2


class DocumentError(ValueError):
    """Malformed document; the message names the offending location."""


@dataclass
class SpaceDocument:
    name: str
    space: FiniteMetricSpace
    base: Optional[object] = None
    generator: Optional[dict] = None
    precision: Optional[int] = None

    @property
    def pointed(self) -> PointedSpace:
        return PointedSpace(self.space, 0 if self.base is None else self.space.index(self.base))

    @property
    def kind(self) -> str:
        return "decimal" if self.space.is_decimal else "rational"

    @contextmanager
    def context(self):
        if self.kind != "decimal":
            yield
            return
        with localcontext() as ctx:
            ctx.prec = max(self.precision or DEFAULT_PRECISION, DEFAULT_PRECISION)
            yield


def document_to_dict(doc: SpaceDocument) -> dict:
    out = {"format": FORMAT, "name": doc.name, "scalar": doc.kind}
    if doc.kind == "decimal":
        out["precision"] = doc.precision or DEFAULT_PRECISION
    out["labels"] = list(doc.space.labels)
    out["dist"] = [[format_scalar(v) for v in row] for row in doc.space.dist]
    out["base"] = doc.base
    out["generator"] = doc.generator
    return out


def dumps_document(doc: SpaceDocument) -> str:
    return json.dumps(document_to_dict(doc), indent=2, ensure_ascii=False) + "\n"


def _generate(gen: dict, where: str):
    try:
        seq = SpikeSequence(gen["sequence"])
        config = ConstructionConfig(gen.get("mode", "integer"), int(gen.get("precision", DEFAULT_PRECISION)))
        variant = gen.get("variant", "qi")
        if variant not in ("qi", "gh"):
            raise ValueError(f"unknown variant {variant!r}")
    except (KeyError, TypeError, ValueError) as exc:
        raise DocumentError(f"{where}: generator: {exc}") from exc
    return seq, config, variant


def document_from_dict(data: dict, where: str = "<document>") -> SpaceDocument:
    if not isinstance(data, dict):
        raise DocumentError(f"{where}: top level must be an object")
    if data.get("format", FORMAT) != FORMAT:
        raise DocumentError(f"{where}: unsupported format {data.get('format')!r}")
    name = data.get("name", "")
    gen = data.get("generator")
    if "dist" not in data:
        if gen is None:
            raise DocumentError(f"{where}: needs either 'dist' or 'generator'")
        return build_document(*_generate(gen, where), name=name)
    kind = data.get("scalar", "rational")
    if kind not in ("rational", "decimal"):
        raise DocumentError(f"{where}: scalar must be 'rational' or 'decimal'")
    precision = int(data.get("precision", DEFAULT_PRECISION)) if kind == "decimal" else None
    rows = data["dist"]
    if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
        raise DocumentError(f"{where}: 'dist' must be a list of lists")
    matrix = []
    for i, row in enumerate(rows):
        parsed = []
        for j, cell in enumerate(row):
            try:
                parsed.append(parse_scalar(str(cell), kind))
            except ValueError as exc:
                raise DocumentError(f"{where}: dist[{i}][{j}]: {exc}") from exc
        matrix.append(parsed)
    labels = data.get("labels", list(range(len(matrix))))
    try:
        with localcontext() as ctx:
            ctx.prec = max(precision or DEFAULT_PRECISION, DEFAULT_PRECISION)
            space = FiniteMetricSpace(labels, matrix)
    except MetricError as exc:
        raise DocumentError(f"{where}: {exc}") from exc
    except ValueError as exc:
        raise DocumentError(f"{where}: {exc}") from exc
    base = data.get("base")
    if base is not None and base not in space.labels:
        raise DocumentError(f"{where}: base {base!r} is not a label")
    doc = SpaceDocument(name, space, base, gen, precision)
    if gen is not None:
        rebuilt = build_document(*_generate(gen, where), name=name)
        if rebuilt.space != space or rebuilt.base != base:
            raise DocumentError(f"{where}: matrix does not match its generator stanza")
    return doc


def load_document(path) -> SpaceDocument:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise DocumentError(f"{path}: no such file") from exc
    except json.JSONDecodeError as exc:
        raise DocumentError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    return document_from_dict(data, str(path))


def build_document(seq: SpikeSequence, config: ConstructionConfig, variant: str = "qi",
                   name: str = "") -> SpaceDocument:
    inst = _build(seq, config, variant)
    gen = {"sequence": list(seq.values), "mode": config.mode, "variant": variant}
    if config.mode == "paper":
        gen["precision"] = config.precision
    name = name or f"M_{variant}({seq})"
    precision = config.digits(seq.depth) if config.mode == "paper" else None
    return SpaceDocument(name, inst.space, inst.space.labels[inst.base], gen, precision)


# -- reports ---------------------------------------------------------------

def _s(v):
    return None if v is None else format_scalar(v)


def coupling_report(cert: EntourageCertificate) -> dict:
    c = cert.coupling
    return {
        "left": list(c.left.labels),
        "right": list(c.right.labels),
        "cross": [[format_scalar(v) for v in row] for row in c.cross],
        "x": c.left.labels[cert.x],
        "y": c.right.labels[cert.y],
        "R": _s(cert.R),
        "r": _s(cert.r),
        "objective": _s(cert.objective),
        "infimum": _s(cert.infimum),
    }


def qi_report(cert: QICertificate) -> dict:
    L, R = cert.phi.left.labels, cert.phi.right.labels
    return {
        "C": _s(cert.C),
        "lambda": _s(cert.lam),
        "netA": [L[i] for i in sorted(cert.netA)],
        "netB": [R[j] for j in sorted(cert.netB)],
        "phi": [[L[a], R[b]] for a, b in cert.phi.pairs],
        "pointed": cert.pointed,
    }


def pairs_report(left, right, pairs) -> list:
    return [[left.labels[a], right.labels[b]] for a, b in sorted(pairs)]


def report(verdict: str, certificate=None, upper=None, lower=None, **extra) -> dict:
    out = {"verdict": verdict, "certificate": certificate,
           "bounds": {"upper": _s(upper), "lower": _s(lower)}}
    out.update(extra)
    return out


# -- commands ----------------------------------------------------------------

def _scalar_arg(text: str, like: FiniteMetricSpace):
    kind = "decimal" if like.is_decimal else None
    value = parse_scalar(text, kind)
    if like.is_decimal and not isinstance(value, Decimal):
        value = Decimal(value.numerator) / value.denominator
    return value


def _labels_arg(text: str, space: FiniteMetricSpace) -> list[int]:
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        match = [i for i, lab in enumerate(space.labels) if str(lab) == tok]
        if not match:
            raise DocumentError(f"unknown label {tok!r}")
        out.append(match[0])
    return out


def cmd_validate(args):
    path = Path(args.file)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
        kind = data.get("scalar", "rational")
        matrix = [[parse_scalar(str(c), kind) for c in row] for row in data["dist"]]
    except (OSError, json.JSONDecodeError, KeyError, TypeError, AttributeError, ValueError) as exc:
        raise DocumentError(f"{path}: {exc}") from exc
    with localcontext() as ctx:
        ctx.prec = max(int(data.get("precision", DEFAULT_PRECISION)), DEFAULT_PRECISION)
        try:
            problems = validate_metric(matrix)
        except ShapeError as exc:
            raise DocumentError(f"{path}: {exc}") from exc
    rep = report("metric" if not problems else "not-metric",
                 violations=[{"axiom": v.axiom, "indices": list(v.indices), "message": v.message}
                             for v in problems])
    text = "valid metric" if not problems else "\n".join(v.message for v in problems)
    return (EXIT_OK if not problems else EXIT_NEGATIVE), rep, text


def cmd_hausdorff(args):
    doc = load_document(args.file)
    A, B = _labels_arg(args.a, doc.space), _labels_arg(args.b, doc.space)
    with doc.context():
        value = hausdorff_distance(doc.space, A, B)
    return EXIT_OK, report("computed", upper=value, lower=value), f"H = {format_scalar(value)}"


def cmd_gh(args):
    a, b = load_document(args.a), load_document(args.b)
    with a.context():
        value, corr = gh_correspondence(a.space, b.space)
    cert = {"correspondence": pairs_report(a.space, b.space, corr.pairs)}
    return EXIT_OK, report("computed", cert, value, value), f"d_GH = {format_scalar(value)}"


def cmd_pgh(args):
    a, b = load_document(args.a), load_document(args.b)
    with a.context():
        res = pointed_gh_bounds(a.pointed, b.pointed)
    cert = {"correspondence": pairs_report(a.space, b.space, res.correspondence.pairs),
            "x": a.space.labels[a.pointed.base], "y": b.space.labels[b.pointed.base]}
    text = f"pointed d_GH <= {format_scalar(res.upper)} (lower bound {format_scalar(res.lower)})"
    return EXIT_OK, report("computed", cert, res.upper, res.lower), text


def cmd_entourage(args):
    a, b = load_document(args.a), load_document(args.b)
    with a.context():
        R, r = _scalar_arg(args.R, a.space), _scalar_arg(args.r, a.space)
        upper, cert = entourage_bound(a.pointed, b.pointed, R, r=r)
        member = cert.objective < r
    verdict = "member" if member else "not-certified"
    text = (f"{verdict}: objective {format_scalar(cert.objective)} "
            f"(infimum {format_scalar(upper)}) vs r = {format_scalar(r)}")
    return (EXIT_OK if member else EXIT_NEGATIVE), report(verdict, coupling_report(cert), upper, None), text


def cmd_lip(args):
    a, b = load_document(args.a), load_document(args.b)
    if len(a.space) != len(b.space):
        return EXIT_NEGATIVE, report("unrelated", None), "different cardinalities: no bijection"
    with a.context():
        found = best_bijection(a.space, b.space)
        lam = _scalar_arg(args.lam, a.space) if args.lam else None
    ok = lam is None or found.distortion <= lam
    cert = {"phi": pairs_report(a.space, b.space, found.bijection.pairs),
            "distortion": format_scalar(found.distortion), "optimal": found.optimal}
    verdict = "computed" if lam is None else ("related" if ok else "unrelated")
    return (EXIT_OK if ok else EXIT_NEGATIVE), report(verdict, cert, found.distortion, None), \
        f"least distortion {format_scalar(found.distortion)}"


def cmd_qi(args):
    a, b = load_document(args.a), load_document(args.b)
    with a.context():
        C, lam = _scalar_arg(args.C, a.space), _scalar_arg(args.lam, a.space)
        cert = qi_search(a.pointed, b.pointed, C, lam, pointed=not args.unpointed)
    if cert is None:
        return EXIT_NEGATIVE, report("exhausted", None), "exhausted: no quasi-isometry within budget"
    return EXIT_OK, report("related", qi_report(cert)), \
        f"related: |A| = {len(cert.netA)}, lambda = {format_scalar(cert.lam)}"


def cmd_build(args):
    try:
        seq = SpikeSequence([int(t) for t in args.seq.split(",")])
    except ValueError as exc:
        raise DocumentError(f"--seq: {exc}") from exc
    doc = build_document(seq, ConstructionConfig(args.mode), args.variant, args.name or "")
    text = dumps_document(doc)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK, None, None


def cmd_verify_claims(args):
    rows = verify_claims(args.depth, ConstructionConfig(args.mode), args.max_dev)
    ok = all(r.passed for r in rows)
    width = max(len(r.claim) for r in rows)
    lines = [f"{'check':<{width}}  result  cases"]
    for r in rows:
        lines.append(f"{r.claim:<{width}}  {'pass' if r.passed else 'FAIL':<6}  {r.checked}"
                     + (f"  {r.detail}" if r.detail else ""))
    rep = report("pass" if ok else "fail",
                 rows=[{"check": r.claim, "passed": r.passed, "cases": r.checked, "detail": r.detail}
                       for r in rows])
    return (EXIT_OK if ok else EXIT_NEGATIVE), rep, "\n".join(lines)


def cmd_oracle(args):
    a, b = load_document(args.a), load_document(args.b)
    grid = float(parse_scalar(args.grid))
    box = float(parse_scalar(args.box)) if args.box else None
    try:
        if args.R is None:
            value = oracle_gh_distance(a.space, b.space, grid, box, args.method)
        else:
            value = oracle_min_objective(a.pointed, b.pointed, parse_scalar(args.R, "rational"),
                                         grid, box, args.method)
    except SizeError as exc:
        raise DocumentError(str(exc)) from exc
    rep = report("computed", None, repr(value), None)
    return EXIT_OK, rep, f"oracle minimum {value!r}"


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gromovlab", description=__doc__.splitlines()[0])
    p.add_argument("--json", action="store_true", help="print the machine-readable report")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("validate", help="check the metric axioms of a document")
    s.add_argument("file")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("hausdorff", help="Hausdorff distance between two labelled subsets")
    s.add_argument("file")
    s.add_argument("--a", required=True, help="comma-separated labels")
    s.add_argument("--b", required=True, help="comma-separated labels")
    s.set_defaults(func=cmd_hausdorff)

    for name, func, help_ in (("gh", cmd_gh, "Gromov-Hausdorff distance"),
                              ("pgh", cmd_pgh, "pointed Gromov-Hausdorff distance bounds")):
        s = sub.add_parser(name, help=help_)
        s.add_argument("a")
        s.add_argument("b")
        s.set_defaults(func=func)

    s = sub.add_parser("entourage", help="certify membership in U_{R,r}")
    s.add_argument("a")
    s.add_argument("b")
    s.add_argument("--R", required=True)
    s.add_argument("--r", required=True)
    s.set_defaults(func=cmd_entourage)

    s = sub.add_parser("lip", help="least-distortion bijection")
    s.add_argument("a")
    s.add_argument("b")
    s.add_argument("--lambda", dest="lam")
    s.set_defaults(func=cmd_lip)

    s = sub.add_parser("qi", help="budgeted pointed quasi-isometry search")
    s.add_argument("a")
    s.add_argument("b")
    s.add_argument("--C", required=True)
    s.add_argument("--lambda", dest="lam", required=True)
    s.add_argument("--unpointed", action="store_true")
    s.set_defaults(func=cmd_qi)

    s = sub.add_parser("build", help="write the spike space of a sequence")
    s.add_argument("--seq", required=True, help="x_2,...,x_N")
    s.add_argument("--mode", choices=("integer", "paper"), default="integer")
    s.add_argument("--variant", choices=("qi", "gh"), default="qi")
    s.add_argument("--name")
    s.add_argument("--out")
    s.set_defaults(func=cmd_build)

    s = sub.add_parser("verify-claims", help="run the reduction checks over all pairs of a depth")
    s.add_argument("--depth", type=int, default=3)
    s.add_argument("--mode", choices=("integer", "paper"), default="integer")
    s.add_argument("--max-dev", type=int)
    s.set_defaults(func=cmd_verify_claims)

    s = sub.add_parser("oracle", help="brute-force minimum objective (spaces of <= 3 points)")
    s.add_argument("a")
    s.add_argument("b")
    s.add_argument("--R", help="radius; omit for the plain GH distance")
    s.add_argument("--grid", required=True)
    s.add_argument("--box")
    s.add_argument("--method", choices=("milp", "grid"), default="milp")
    s.set_defaults(func=cmd_oracle)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        code, rep, text = args.func(args)
    except DocumentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if rep is not None:
        if args.json:
            print(json.dumps(rep, indent=2, ensure_ascii=False))
        elif text:
            print(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
