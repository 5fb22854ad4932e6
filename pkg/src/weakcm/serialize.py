"""Document schemas: parsing CLI input files and building report payloads.

Everything is JSON with rationals as "num/den" strings (denominator omitted
when 1), field elements as arrays of such strings in tower-basis order, and
fixed key order per schema.  Payload builders insert keys in schema order,
so serialized output is byte-stable for identical inputs.
"""

from __future__ import annotations

from fractions import Fraction

from . import cmfield, dodson, hodge, tausplit, tower as tw
from .errors import InputError


def _rat(x) -> str:
    return tw.format_rational(Fraction(x))


def rational_matrix_out(M):
    return [[_rat(x) for x in row] for row in M]


def element_matrix_out(M):
    return [[x.serialize() for x in row] for row in M]


def parse_rational_matrix(doc, n, what):
    if not isinstance(doc, list) or len(doc) != n:
        raise InputError(f"{what} must be an {n}x{n} matrix")
    out = []
    for row in doc:
        if not isinstance(row, list) or len(row) != n:
            raise InputError(f"{what} must be an {n}x{n} matrix")
        try:
            out.append([tw.parse_rational(x) for x in row])
        except (ValueError, ZeroDivisionError) as exc:
            raise InputError(f"bad rational in {what}: {exc}") from exc
    return out


# --------------------------------------------------------------------------
# CM field documents


def parse_field(doc) -> cmfield.CMFieldData:
    if not isinstance(doc, dict):
        raise InputError("field document must be an object")
    params = {k: doc[k] for k in ("p", "q", "d", "p1", "p2") if k in doc}
    requested = doc.get("case")
    try:
        if requested is not None:
            return cmfield.build_as_case(requested, params)
        return cmfield.classify(params)
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"bad rational parameter: {exc}") from exc


def field_report(data: cmfield.CMFieldData) -> dict:
    return cmfield.case_report(data)


def reflex_report(data: cmfield.CMFieldData) -> dict:
    r = cmfield.reflex_bc(data)
    return {
        "case": data.case,
        "degree": r.degree,
        "basis": [b.serialize() for b in r.basis],
        "basis_display": [str(b) for b in r.basis],
        "equals_field": r.equals_field,
        "type_stabilizer": list(r.stabilizer_words),
        "cm_witness": {
            k: [_rat(u), _rat(v)] for k, (u, v) in sorted(r.cm_witness.items())
        },
    }


# --------------------------------------------------------------------------
# period-matrix documents


def parse_period_matrix(doc) -> tausplit.PeriodMatrix:
    if not isinstance(doc, dict):
        raise InputError("period-matrix document must be an object")
    try:
        n = int(doc["n"])
    except (KeyError, TypeError, ValueError):
        raise InputError("document needs an integer 'n'") from None
    if "field" not in doc:
        raise InputError("document needs a 'field' parameter object")
    field = parse_field(doc["field"])
    mats = doc.get("B")
    want = 2 if field.case == cmfield.DEG2 else 4
    if not isinstance(mats, list) or len(mats) != want:
        raise InputError(f"'B' must list {want} rational matrices for case {field.case}")
    Bs = [parse_rational_matrix(M, n, f"B{k + 1}") for k, M in enumerate(mats)]
    return tausplit.period_matrix(field, *Bs)


def period_matrix_out(pm: tausplit.PeriodMatrix) -> dict:
    return {
        "n": pm.n,
        "field": {
            "case": pm.field.case,
            **{k: _rat(v) for k, v in sorted(pm.field.tower.params.items())},
        },
        "B": [rational_matrix_out(M) for M in pm.B],
    }


def validation_report(pm: tausplit.PeriodMatrix, de: tausplit.DeltaEps) -> dict:
    return {
        "case": pm.field.case,
        "n": pm.n,
        "rank_delta": de.rank_delta,
        "rank_eps": de.rank_eps,
        "rank_joint": de.rank_joint,
        "p_split": de.p_split,
        "field_dimension": de.subfield_dim,
        "delta": element_matrix_out(de.delta),
        "eps": element_matrix_out(de.eps),
    }


def certificate_report(pm, cert: tausplit.SplitCertificate, verified: bool) -> dict:
    out = {
        "case": cert.case,
        "n": cert.n,
        "renaming": list(cert.renaming),
        "block_sizes": list(cert.block_sizes),
        "block_fields": [list(b) for b in cert.block_fields],
        "P": element_matrix_out(cert.P),
        "S": rational_matrix_out(cert.S),
    }
    if cert.c1 is not None:
        out["c1"] = element_matrix_out(cert.c1)
        out["c2"] = element_matrix_out(cert.c2)
    if cert.M is not None:
        out["M"] = element_matrix_out(cert.M)
    out["standard_form"] = element_matrix_out(cert.standard_form)
    out["factors"] = [
        {"kind": f.kind, "cm_field": f.cm_field, "multiplicity": f.multiplicity}
        for f in cert.factors
    ]
    out["level_report"] = level_report_out(cert.level)
    out["verified"] = verified
    return out


def level_report_out(level: tausplit.LevelNReport) -> dict:
    return {
        "hodge_numbers": {
            f"{p},{q}": c for (p, q), c in sorted(level.hodge_numbers.items(),
                                                  key=lambda kv: (-kv[0][0],))
        },
        "p_split": level.p_split,
    }


# --------------------------------------------------------------------------
# dodson documents


def imn2_element_out(g: dodson.ImN2Element) -> dict:
    return {"bits": list(g.bits), "perm": list(g.perm)}


def parse_imn2_element(doc, N) -> dodson.ImN2Element:
    try:
        bits = tuple(int(b) for b in doc["bits"])
        perm = tuple(int(x) for x in doc["perm"])
    except (KeyError, TypeError, ValueError):
        raise InputError("group element needs 'bits' and 'perm' lists") from None
    if len(bits) != N or sorted(perm) != list(range(N)) or any(b not in (0, 1) for b in bits):
        raise InputError("malformed Im(N,2) element")
    return dodson.ImN2Element(bits, perm)


def triple_out(t: dodson.DodsonTriple) -> dict:
    return {
        "g0": [list(p) for p in t.g0],
        "v": [list(b) for b in t.v],
        "s": [{"perm": list(p), "bits": list(b)} for p, b in t.s],
        "tag": t.tag(),
    }


def subgroup_out(elements) -> dict:
    triple = dodson.triple_from_group(elements)
    return {
        "order": len(elements),
        "triple": triple_out(triple),
        "elements": [imn2_element_out(g) for g in elements],
    }


def classification_report(N, partition_name, classes) -> dict:
    return {
        "n": N,
        "partition": partition_name,
        "class_count": len(classes),
        "classes": [
            {
                "tag": c.tag,
                "case": c.case_alias,
                "orbit_size": c.orbit_size,
                "representative": triple_out(c.triple),
            }
            for c in classes
        ],
    }


def parse_cm_type(doc) -> dodson.AbstractCMType:
    if not isinstance(doc, dict):
        raise InputError("cm-type document must be an object")
    if "preset" in doc:
        from .presets import preset_by_name

        try:
            return preset_by_name(doc["preset"]).cm_type
        except KeyError:
            raise InputError(f"unknown preset {doc['preset']!r}") from None
    if "field" in doc:
        return cmfield.dodson_type(parse_field(doc["field"]))
    try:
        n = int(doc["n"])
        raw = doc["elements"]
    except (KeyError, TypeError, ValueError):
        raise InputError(
            "cm-type document needs 'preset', 'field', or 'n' + 'elements'"
        ) from None
    elements = tuple(sorted((parse_imn2_element(e, n) for e in raw),
                            key=dodson.element_key))
    phi = doc.get("phi")
    if phi is None:
        phi_t = dodson.standard_phi(n)
    else:
        phi_t = tuple((int(i), int(b)) for i, b in phi)
    return dodson.AbstractCMType(elements, phi_t)


def reflex_dodson_report(report: dodson.ReflexReport, notes=()) -> dict:
    out = {
        "n": report.n,
        "reflex_degree": report.degree,
        "n_prime": report.n_prime,
        "hodge_numbers": {
            f"{p},{q}": c for (p, q), c in report.hodge_numbers.items()
        },
        "bound_2npow": 2 ** report.n,
        "bound_ok": report.bound_ok,
        "triple": triple_out(report.triple),
        "tag": report.tag,
        "class_tag": report.class_tag,
        "galois_group": report.group_name,
        "group": [imn2_element_out(g) for g in report.group],
    }
    all_notes = tuple(report.notes) + tuple(notes)
    if all_notes:
        out["notes"] = list(all_notes)
    return out


# --------------------------------------------------------------------------
# hodge documents


def parse_structure(doc) -> hodge.CMHodgeStructure:
    if not isinstance(doc, dict):
        raise InputError("structure document must be an object")
    kind = doc.get("type")
    if kind == "elliptic":
        return hodge.elliptic_structure()
    if kind in ("k3", "cy3", "weight1"):
        ct = parse_cm_type(doc.get("group", {}))
        builder = {
            "k3": hodge.k3_structure,
            "cy3": hodge.cy3_structure,
            "weight1": hodge.weight1_structure,
        }[kind]
        return builder(ct.group)
    if kind == "explicit":
        return _parse_explicit_structure(doc)
    raise InputError(
        "structure 'type' must be elliptic, k3, cy3, weight1 or explicit"
    )


def _parse_explicit_structure(doc):
    try:
        weight = int(doc["weight"])
        n = int(doc["pairs"])
        labels_in = doc["labels"]
        raw = doc["elements"]
    except (KeyError, TypeError, ValueError):
        raise InputError(
            "explicit structure needs weight, pairs, labels, elements"
        ) from None
    if len(labels_in) != n:
        raise InputError("one label per pair required")
    elements = [parse_imn2_element(e, n) for e in raw]
    labels = {}
    for i, (p, q) in enumerate(labels_in):
        labels[(i, 0)] = (int(p), int(q))
        labels[(i, 1)] = (int(q), int(p))
    h = hodge.from_group(weight, elements, labels)
    spreads_doc = doc.get("spreads")
    if spreads_doc:
        spreads = {g: h.spread(g) for g in h.group}
        for item in spreads_doc:
            el = parse_imn2_element(item["element"], n)
            images = tuple(dodson.act_slot(el, s) for s in h.slots)
            if images not in spreads:
                raise InputError("spread element is not in the group")
            spreads[images] = frozenset((int(i), int(b)) for i, b in item["slots"])
        h = hodge.CMHodgeStructure(weight, h.slots, h.labels, h.rho,
                                   list(h.group), top_spreads=spreads)
    return h


def product_report_out(rep: hodge.ProductReport) -> dict:
    return {
        "level_dim": rep.level_dim,
        "endo_field_degree": rep.endo_field_degree,
        "situation": rep.situation,
        "strong_cm_verdict": rep.strong_cm_verdict,
        "factor_weak_cm": [bool(v[0]) for v in rep.factor_verdicts],
        "tau_orbit_size": rep.tau_orbit_size,
        "star1_count": rep.star1_count,
        "star2_count": rep.star2_count,
        "coset_types": {f"{p},{q}": c for (p, q), c in rep.coset_types.items()},
        "level_group": rep.level_group_name,
        "level_case": rep.level_case_alias,
    }
