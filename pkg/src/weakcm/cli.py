"""Command-line front end.

Subcommands map one-to-one onto the library operations; input documents are
JSON files (see README for the schemas), output is a deterministic report
envelope on stdout.  Exit codes: 0 ok, 1 invalid input (validation failure
with a named condition), 2 math/internal error.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import cmfield, dodson, hodge, serialize, tausplit
from .errors import IncompatibleIdentifications, InputError, WeakCMError
from .presets import preset_reflex_reports


def _load(args) -> dict:
    if args.input in (None, "-"):
        text = sys.stdin.read()
    else:
        try:
            with open(args.input, "r", encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise InputError(f"cannot read input file: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"input is not valid JSON: {exc}") from exc


# --------------------------------------------------------------------------
# handlers


def _cmd_classify_field(args):
    field = serialize.parse_field(_load(args))
    return serialize.field_report(field)


def _cmd_galois(args):
    field = serialize.parse_field(_load(args))
    gg = cmfield.galois_group(field)
    return {
        "case": field.case,
        "order": gg.order,
        "conjugation": gg.elements[gg.conj_index].label,
        "embeddings": list(gg.embedding_words),
        "embedding_pairing": list(gg.pairing),
        "elements": [
            {
                "label": g.label,
                "embedding_perm": list(perm),
                "action": g.action_table(),
            }
            for g, perm in zip(gg.elements, gg.action)
        ],
    }


def _cmd_reflex(args):
    field = serialize.parse_field(_load(args))
    return serialize.reflex_report(field)


def _cmd_validate(args):
    pm = serialize.parse_period_matrix(_load(args))
    de = tausplit.validate_weak_cm(pm)
    return serialize.validation_report(pm, de)


def _cmd_split(args):
    pm = serialize.parse_period_matrix(_load(args))
    cert, _level = tausplit.split(pm)
    verified = tausplit.verify_certificate(pm, cert)
    return serialize.certificate_report(pm, cert, verified.ok)


def _cmd_dodson_enum(args):
    subgroups = dodson.enumerate_admissible(args.n, bound=args.bound)
    return {
        "n": args.n,
        "ambient_order": dodson.im_order(args.n),
        "count": len(subgroups),
        "subgroups": [serialize.subgroup_out(g) for g in subgroups],
    }


def _parse_partition(args):
    name = args.partition
    if name in ("abl", "k3", "cy3"):
        return name, dodson.partition_preset(name, args.n)
    try:
        doc = json.loads(name)
    except json.JSONDecodeError:
        raise InputError(
            "--partition must be abl, k3, cy3 or an inline JSON block list"
        ) from None
    labelled = []
    for block in doc:
        label = tuple(int(x) for x in block["label"])
        for slot in block["slots"]:
            labelled.append(((int(slot[0]), int(slot[1])), label))
    weight = sum(labelled[0][1])
    return "custom", dodson.partition_from_labels(args.n, weight, labelled)


def _cmd_dodson_classify(args):
    name, partition = _parse_partition(args)
    classes = dodson.classify_conjugacy(args.n, partition, bound=args.bound,
                                        threads=args.threads)
    return serialize.classification_report(args.n, name, classes)


def _cmd_dodson_reflex(args):
    doc = _load(args)
    ct = serialize.parse_cm_type(doc)
    n = int(doc.get("n", ct.N))
    report = dodson.reflex_from_dodson(ct, n)
    return serialize.reflex_dodson_report(report)


def _cmd_presets(args):
    reports = preset_reflex_reports()
    degrees = sorted({rep.degree for _, rep in reports})
    return {
        "count": len(reports),
        "presets": [
            {
                "name": pr.name,
                "description": pr.description,
                "reflex": serialize.reflex_dodson_report(rep),
            }
            for pr, rep in reports
        ],
        "informational": {
            "reflex_degrees_realized": degrees,
            "note": (
                "weight-1 data of rank 6 realize reflex degrees "
                f"{degrees} only; degrees 10/12/14 are not produced by any "
                "of these presets, and whether abstract level-3 structures "
                "attain them is not settled by this enumeration."
            ),
        },
    }


def _character_map(doc_character, ts, ct, e):
    """Translate an element-keyed character into an identification list
    aligned with the canonical group order of the built structure."""
    if doc_character is None:
        return None
    by_element = {}
    for item in doc_character:
        el = serialize.parse_imn2_element(item["element"], ct.N)
        by_element[el] = int(item["value"])
    ident2 = tuple(e.slots)
    flip_idx = next(i for i, g in enumerate(e.group) if g != ident2)
    ident_idx = e.group.index(ident2)
    mapping = []
    for images in ts.group:
        src = None
        for g in ct.group:
            if tuple(dodson.act_slot(g, s) for s in ts.slots) == images:
                src = g
                break
        if src is None or src not in by_element:
            raise IncompatibleIdentifications(
                "character must assign a value to every group element"
            )
        mapping.append(flip_idx if by_element[src] else ident_idx)
    return mapping


def _cmd_k3t2(args):
    doc = _load(args)
    ct = serialize.parse_cm_type(doc.get("transcendental", {}))
    ts = hodge.k3_structure(ct.group)
    e = hodge.elliptic_structure()
    situation = doc.get("situation", "disjoint")
    character = _character_map(doc.get("character"), ts, ct, e)
    rep = hodge.k3t2_analyze(ts, e, situation, character)
    out = serialize.product_report_out(rep)
    out["transcendental_dim"] = len(ts.slots)
    return out


def _cmd_product(args):
    doc = _load(args)
    h1 = serialize.parse_structure(doc.get("factor1", {}))
    h2 = serialize.parse_structure(doc.get("factor2", {}))
    identification = None
    if "identification" in doc:
        raise InputError(
            "explicit identifications are supported through the k3t2 "
            "subcommand's character input"
        )
    product = hodge.tensor_cm(h1, h2, identification)
    verdicts = hodge.factor_weak_cm(product)
    level = hodge.level_subspace(product)
    return {
        "weight": product.weight,
        "dim": product.dim,
        "level_dim": len(level.slots),
        "product_is_weak_cm": product.is_cm(),
        "factor_weak_cm": [bool(ok) for ok, _ in verdicts],
        "witnesses": [
            None if w is None else {"factor": i + 1}
            for i, (ok, w) in enumerate(verdicts)
        ],
        "level_hodge_numbers": {
            f"{p},{q}": c for (p, q), c in level.hodge_numbers().items()
        },
    }


def _cmd_weil_griffiths(args):
    doc = _load(args)
    h = serialize.parse_structure(doc.get("structure", doc))
    pair = hodge.weil_griffiths(h)
    return {
        "weil_cm": pair.weil_cm,
        "griffiths_cm": pair.griffiths_cm,
        "common_algebra_ok": pair.common_algebra_ok,
        "weil_hodge_numbers": {
            f"{p},{q}": c for (p, q), c in pair.weil.hodge_numbers().items()
        },
        "griffiths_hodge_numbers": {
            f"{p},{q}": c
            for (p, q), c in pair.griffiths.hodge_numbers().items()
        },
    }


# --------------------------------------------------------------------------
# plumbing


def _emit_text(obj, indent=0, key=None, lines=None):
    lines = [] if lines is None else lines
    prefix = "  " * indent + (f"{key}: " if key is not None else "")
    if isinstance(obj, dict):
        if key is not None:
            lines.append("  " * indent + f"{key}:")
        for k, v in obj.items():
            _emit_text(v, indent + (key is not None), k, lines)
    elif isinstance(obj, list) and obj and isinstance(obj[0], (dict, list)):
        lines.append("  " * indent + f"{key}:")
        for i, v in enumerate(obj):
            _emit_text(v, indent + 1, f"[{i}]", lines)
    else:
        lines.append(prefix + json.dumps(obj))
    return lines


def _print_report(report, emit):
    if emit == "json":
        sys.stdout.write(json.dumps(report, indent=2) + "\n")
    else:
        sys.stdout.write("\n".join(_emit_text(report)) + "\n")


_COMMANDS = {
    "classify-field": (_cmd_classify_field, "classify CM field parameters", True),
    "galois": (_cmd_galois, "Galois group and embedding action", True),
    "reflex": (_cmd_reflex, "reflex field for cases B/C", True),
    "validate": (_cmd_validate, "validate a weak-CM period matrix", True),
    "split": (_cmd_split, "split a period matrix into CM factors", True),
    "dodson-enum": (_cmd_dodson_enum, "enumerate admissible subgroups", False),
    "dodson-classify": (_cmd_dodson_classify, "classify subgroups modulo the slot stabilizer", False),
    "dodson-reflex": (_cmd_dodson_reflex, "level-n reflex data of a weight-1 type", True),
    "presets": (_cmd_presets, "the 13 weight-1 configurations and their reflexes", False),
    "k3t2": (_cmd_k3t2, "weak-CM analysis of a K3 x elliptic product", True),
    "product": (_cmd_product, "tensor product and factor verdicts", True),
    "weil-griffiths": (_cmd_weil_griffiths, "weight-1 repackagings of a weight-3 structure", True),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="weakcm",
        description="exact CM-field classification, Dodson data, and "
                    "isogeny splitting",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name, (handler, help_text, takes_input) in _COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(handler=handler)
        if takes_input:
            p.add_argument("--input", "-i", default=None,
                           help="input JSON document ('-' or omit for stdin)")
        if name in ("dodson-enum", "dodson-classify"):
            p.add_argument("--n", type=int, required=True)
            p.add_argument("--bound", type=int,
                           default=dodson.ENUMERATION_BOUND_DEFAULT)
        if name == "dodson-classify":
            p.add_argument("--partition", required=True,
                           help="abl | k3 | cy3 | inline JSON block list")
        p.add_argument("--emit", choices=("json", "text"), default="json")
        p.add_argument("--threads", type=int, default=1)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "threads", 1) < 1:
        args.threads = 1
    try:
        payload = args.handler(args)
        report = {"status": "ok", "payload": payload, "diagnostics": []}
        code = 0
    except InputError as exc:
        report = {
            "status": "invalid-input",
            "payload": None,
            "diagnostics": [{"condition": exc.condition, "message": str(exc)}],
        }
        code = 1
    except WeakCMError as exc:
        report = {
            "status": "math-error",
            "payload": None,
            "diagnostics": [{"condition": exc.condition, "message": str(exc)}],
        }
        code = 2
    except Exception as exc:  # malformed input must not crash the process
        report = {
            "status": "math-error",
            "payload": None,
            "diagnostics": [{"condition": "internal", "message": repr(exc)}],
        }
        code = 2
    _print_report(report, args.emit)
    return code


if __name__ == "__main__":
    sys.exit(main())
