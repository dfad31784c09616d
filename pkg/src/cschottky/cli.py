"""Command-line entry point.

Every command writes one JSON artifact (or a table/CSV projection of it) with
a header carrying the tool version, the seed and the tolerances in force.
Exit codes: 0 success, 1 bad input or I/O, 2 failed certificate, 3 geometric
obstruction.
"""

import argparse
import csv
import io
import json
import os
import sys
import tempfile

import numpy as np

from . import __version__
from .errors import CertificateFailed, SchottkyError
from .geom import parse_model
from .invariants import topology_report
from .numlin import Tolerances
from .satake import classify_all, hypersurface_records
from .schottky import (MoveSearchOptions, SchottkyGroupSpec, build_group, certify_ping_pong, format_word,
                       group_hash, limit_set_sample, point_coordinates)


class InputError(SchottkyError):
    code = "MALFORMED_INPUT"


class IOFailure(SchottkyError):
    code = "IO_ERROR"


def atomic_write(path, text):
    """Write to a temp file in the target directory, then rename over the target."""
    directory = os.path.dirname(os.path.abspath(path))
    try:
        fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        raise IOFailure(f"cannot write {path}: {exc.strerror or exc}") from exc


def header(args, tol):
    return {"tool_version": __version__, "command": args.command, "seed": args.seed,
            "tolerances": tol.to_dict()}


def load_group(path) -> SchottkyGroupSpec:
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise IOFailure(f"cannot read {path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise InputError(f"{path} does not hold a JSON object")
    group = obj.get("group", obj)
    try:
        return SchottkyGroupSpec.from_json(group)
    except SchottkyError as exc:
        raise InputError(str(exc)) from exc


def dump_json(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for k, v in obj.items():
            yield from _flatten(v, f"{prefix}.{k}" if prefix else str(k))
    elif isinstance(obj, list) and obj and isinstance(obj[0], (dict, list)):
        yield prefix, f"[{len(obj)} items]"
    else:
        yield prefix, obj


def _table(rows, columns):
    cells = [[str(r.get(c, "")) for c in columns] for r in rows]
    widths = [max([len(c)] + [len(row[i]) for row in cells]) for i, c in enumerate(columns)]
    line = lambda vals: "  ".join(v.ljust(w) for v, w in zip(vals, widths)).rstrip()
    out = [line(columns), line(["-" * w for w in widths])] + [line(r) for r in cells]
    return "\n".join(out) + "\n"


def _csv(rows, columns):
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=columns, extrasaction="ignore", lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r)
    return buf.getvalue()


def render(doc, fmt, rows=None, columns=None):
    if fmt == "json":
        return dump_json(doc)
    if rows is None:
        rows = [{"field": k, "value": v} for k, v in _flatten(doc)]
        columns = ["field", "value"]
    return _table(rows, columns) if fmt == "table" else _csv(rows, columns)


def emit(args, text):
    if args.out:
        atomic_write(args.out, text)
    else:
        sys.stdout.write(text)


# commands -------------------------------------------------------------------


CLASSIFY_COLUMNS = ["type", "rank", "real_form", "removed", "codim", "manifold_name", "witness", "status"]


def cmd_classify(args, tol):
    records = classify_all(args.max_rank)
    hits = hypersurface_records(records)
    shown = records if args.all else hits
    doc = {
        "header": header(args, tol),
        "max_rank": args.max_rank,
        "scanned": len(records),
        "hypersurface_count": len(hits),
        "records": [r.to_json() for r in shown],
    }
    rows = []
    for r in doc["records"]:
        row = dict(r)
        row["removed"] = " ".join(str(i) for i in r["removed"])
        row["witness"] = " ".join(r.get("witness") or [])
        rows.append(row)
    emit(args, render(doc, args.format, rows, CLASSIFY_COLUMNS))
    return 0


def cmd_construct(args, tol):
    model = parse_model(args.model)
    opts = MoveSearchOptions(max_attempts=args.max_attempts, strategy=args.strategy,
                             subsphere_m=args.subsphere)
    group = build_group(model, args.rank, args.seed, opts, tol)
    doc = {"header": header(args, tol), "group_hash": group_hash(group), "group": group.to_json()}
    emit(args, render(doc, args.format))
    return 0


def cmd_certify(args, tol):
    group = load_group(args.group)
    cert = certify_ping_pong(group, args.samples, args.max_word_len, args.seed, tol, raise_on_fail=False)
    doc = {"header": header(args, tol), "group_hash": group_hash(group), "certificate": cert.to_json()}
    emit(args, render(doc, args.format))
    if not cert.passed:
        raise CertificateFailed(f"ping-pong check '{cert.first_failure()}' failed", cert)
    return 0


def cmd_invariants(args, tol):
    group = load_group(args.group)
    rep = topology_report(group, args.samples, args.seed, tol)
    doc = {"header": header(args, tol), "group_hash": group_hash(group), "invariants": rep.to_json()}
    emit(args, render(doc, args.format))
    return 0


def cmd_limitset(args, tol):
    group = load_group(args.group)
    pts = limit_set_sample(group, args.depth)
    rows = []
    for w, i, x in pts:
        coords = point_coordinates(group.model, x)
        row = {"word": format_word(w), "base": i}
        row.update({f"x{k}": float(c) for k, c in enumerate(coords)})
        rows.append(row)
    columns = ["word", "base"] + [f"x{k}" for k in range(len(rows[0]) - 2)] if rows else ["word", "base"]
    if args.csv:
        atomic_write(args.csv, _csv(rows, columns))
    doc = {"header": header(args, tol), "group_hash": group_hash(group), "depth": args.depth,
           "points": len(rows), "csv": args.csv}
    if args.format == "json" and not args.csv:
        doc["samples"] = rows
    emit(args, render(doc, args.format) if args.format == "json" else render(doc, args.format, rows, columns))
    return 0


def cmd_report(args, tol):
    group = load_group(args.group)
    cert = certify_ping_pong(group, args.samples, args.max_word_len, args.seed, tol, raise_on_fail=False)
    rep = topology_report(group, args.orbit_samples, args.seed, tol)
    doc = {"header": header(args, tol), "group_hash": group_hash(group),
           "certificate": cert.to_json(), "invariants": rep.to_json()}
    emit(args, render(doc, args.format))
    if not cert.passed:
        raise CertificateFailed(f"ping-pong check '{cert.first_failure()}' failed", cert)
    return 0


# parser ---------------------------------------------------------------------


def _seed(text):
    v = int(text, 0)
    if not 0 <= v < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return v


def _positive(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_seed, default=0)
    common.add_argument("--rank-rel", type=float, default=Tolerances.rank_rel)
    common.add_argument("--orth", type=float, default=Tolerances.orth)
    common.add_argument("--cert-margin", type=float, default=Tolerances.cert_margin)
    common.add_argument("--format", choices=("json", "table", "csv"), default="json")
    common.add_argument("--out", help="output file (default: stdout)")

    p = argparse.ArgumentParser(prog="cschottky", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("classify", parents=[common], help="minimal orbits of hypersurface type")
    s.add_argument("--max-rank", type=_positive, default=8)
    s.add_argument("--all", action="store_true", help="list every scanned record, not only hypersurfaces")
    s.set_defaults(func=cmd_classify)

    s = sub.add_parser("construct", parents=[common], help="build a Schottky group")
    s.add_argument("--model", required=True, help="P:n | Qeven:n | Qodd:n | IGr:n")
    s.add_argument("--rank", type=_positive, required=True)
    s.add_argument("--subsphere", type=_positive)
    s.add_argument("--strategy", choices=("generic-matrix", "mobius-on-sphere", "left-factor"))
    s.add_argument("--max-attempts", type=_positive, default=200)
    s.set_defaults(func=cmd_construct)

    for name, func, helptext in (("certify", cmd_certify, "ping-pong certificate"),
                                 ("report", cmd_report, "certificate and invariants together")):
        s = sub.add_parser(name, parents=[common], help=helptext)
        s.add_argument("--group", required=True)
        s.add_argument("--samples", type=_positive, default=2000)
        s.add_argument("--max-word-len", type=_positive, default=4)
        if name == "report":
            s.add_argument("--orbit-samples", type=_positive, default=20)
        s.set_defaults(func=func)

    s = sub.add_parser("invariants", parents=[common], help="invariants of the quotient")
    s.add_argument("--group", required=True)
    s.add_argument("--samples", type=_positive, default=20)
    s.set_defaults(func=cmd_invariants)

    s = sub.add_parser("limitset", parents=[common], help="sample the limit set")
    s.add_argument("--group", required=True)
    s.add_argument("--depth", type=_positive, default=3)
    s.add_argument("--csv")
    s.set_defaults(func=cmd_limitset)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        try:
            tol = Tolerances(args.rank_rel, args.orth, args.cert_margin)
        except ValueError as exc:
            raise InputError(str(exc)) from exc
        try:
            return args.func(args, tol)
        except ValueError as exc:
            raise InputError(str(exc)) from exc
    except SchottkyError as exc:
        msg = " ".join(str(exc).split())
        sys.stderr.write(f"error {exc.code}: {msg}\n")
        return exc.exit_status


if __name__ == "__main__":
    sys.exit(main())
