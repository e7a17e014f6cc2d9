"""Comparison of computed matrices against printed reference tables, and
rendering of fits, matrices and comparisons as Markdown, CSV or JSON.

Deltas against printed tables are findings, never failures: the printed
tables disagree with themselves (asymmetric cells, text quoting values that
differ from the tables), so nothing here gates on agreement.
"""

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .dataio import ReferenceMatrix, format_float, resolve_label
from .errors import DataError, DomainError
from .similarity import Method, SimilarityMatrix, pearson

__all__ = [
    "SCHEMA_VERSION",
    "PairRow",
    "Variant",
    "ClaimRow",
    "ComparisonReport",
    "compare",
    "listing_comparison",
    "exp_demo",
    "EXP_DEMO_PAPER",
    "EXP_DEMO_TOL",
    "render_fit",
    "render_matrices",
    "render_comparison",
    "render_exp_demo",
]

SCHEMA_VERSION = 1
EXP_DEMO_PAPER = 0.71687
EXP_DEMO_TOL = 5e-3

_EXPECTED_REFERENCE = {Method.TAU: "paper_table3", Method.PEARSON: "paper_table2"}


@dataclass(frozen=True)
class PairRow:
    label_i: str
    label_j: str
    computed: float
    reference_ij: float
    reference_ji: float
    delta_ij: float
    delta_ji: float
    sign_mismatch: bool
    reference_asymmetric: bool


@dataclass
class Variant:
    name: str
    computed: SimilarityMatrix
    reference: ReferenceMatrix
    per_cell_delta: np.ndarray
    max_abs_delta: float
    pairs: list
    sign_mismatches: list


@dataclass(frozen=True)
class ClaimRow:
    label_a: str
    label_b: str
    quoted: float
    table_ab: float
    table_ba: float
    computed: dict
    matches_table: bool


@dataclass
class ComparisonReport:
    method: Method
    reference_source: str
    variants: list
    notes: list = field(default_factory=list)
    claims: list = field(default_factory=list)

    @property
    def k0_variants(self):
        return {v.name: v for v in self.variants}


def _sign(v):
    return (v > 0) - (v < 0)


def _aligned(reference, labels):
    if set(reference.labels) != set(labels):
        missing = sorted(set(labels) - set(reference.labels))
        extra = sorted(set(reference.labels) - set(labels))
        raise DataError(f"label sets differ: missing from reference {missing}, "
                        f"not computed {extra}")
    order = [reference.labels.index(lab) for lab in labels]
    return ReferenceMatrix(labels, reference.entries[np.ix_(order, order)], reference.source)


def _variant_name(matrix):
    if matrix.k0_included is None:
        return "default"
    return "k0_included" if matrix.k0_included else "k0_excluded"


def _compare_one(computed, reference):
    ref = _aligned(reference, computed.labels)
    delta = computed.entries - ref.entries
    n = len(computed.labels)
    pairs, mismatches = [], []
    for i in range(n):
        for j in range(i + 1, n):
            c = float(computed.entries[i, j])
            rij, rji = float(ref.entries[i, j]), float(ref.entries[j, i])
            flip = _sign(c) != _sign(rij) or _sign(c) != _sign(rji)
            pairs.append(PairRow(computed.labels[i], computed.labels[j], c, rij, rji,
                                 float(delta[i, j]), float(delta[j, i]), flip, rij != rji))
            if flip:
                mismatches.append((computed.labels[i], computed.labels[j]))
    return Variant(_variant_name(computed), computed, ref, delta,
                   float(np.max(np.abs(delta))), pairs, mismatches)


def _claim_rows(claims, method, reference, variants):
    rows = []
    for claim in claims:
        if Method(claim.method) is not method:
            continue
        a = resolve_label(claim.label_a, reference.labels)
        b = resolve_label(claim.label_b, reference.labels)
        tab, tba = reference.get(a, b), reference.get(b, a)
        rows.append(ClaimRow(a, b, claim.value, tab, tba,
                             {v.name: v.computed.get(a, b) for v in variants},
                             claim.value == tab and claim.value == tba))
    return rows


def compare(computed, reference, claims=(), force=False):
    """Diff one or more computed matrices (same method) against ``reference``.

    ``computed`` is a SimilarityMatrix or a list of them; for tau pass both
    k0 variants. ``claims`` are text-quoted values cross-checked against the
    reference table.
    """
    if isinstance(computed, SimilarityMatrix):
        computed = [computed]
    computed = list(computed)
    if not computed:
        raise DomainError("nothing to compare")
    method = computed[0].method
    if any(m.method is not method for m in computed):
        raise DomainError("all computed matrices must share one method")
    expected = _EXPECTED_REFERENCE[method]
    if reference.source.startswith("paper_") and reference.source != expected and not force:
        raise DomainError(f"{method.value} results should be compared with {expected}, "
                          f"not {reference.source} (use force to override)")

    variants = [_compare_one(m, reference) for m in computed]
    report = ComparisonReport(method, reference.source, variants)

    for a, b, vab, vba in reference.asymmetric_pairs():
        report.notes.append(f"reference is asymmetric for ({a}, {b}): "
                            f"{format_float(vab)} vs {format_float(vba)}")
    diag = np.diag(reference.entries)
    if not np.all(diag == 1.0):
        report.notes.append("reference diagonal is not identically 1")
    for v in variants:
        if v.sign_mismatches:
            report.notes.append(f"{v.name}: {len(v.sign_mismatches)} of {len(v.pairs)} pairs "
                                f"differ in sign from the reference")
    report.claims = _claim_rows(claims, method, reference, variants)
    for row in report.claims:
        if not row.matches_table:
            report.notes.append(
                f"quoted {method.value} for ({row.label_a}, {row.label_b}) is "
                f"{format_float(row.quoted)} but the table prints "
                f"{format_float(row.table_ab)}"
                + ("" if row.table_ab == row.table_ba else f" / {format_float(row.table_ba)}"))
    return report


def listing_comparison(fit, listing):
    """Side-by-side computed vs printed Hermite coefficients.

    Two unit readings are tried: the table units as stored, and a rescaled
    reading (US$ series in billions, percentage series as fractions).
    """
    computed = list(fit.coefficients)
    printed = list(listing.coefficients)
    if len(printed) != len(computed):
        raise DomainError(f"listing has {len(printed)} coefficients, fit has {len(computed)}")
    if "US$" in listing.label:
        rescale = 1e-9
    elif "% of GDP" in listing.label:
        rescale = 1e-2
    else:
        rescale = 1.0
    hypotheses = []
    for name, scale in (("table_units", 1.0), ("rescaled", rescale)):
        rows = []
        for k, (c, p) in enumerate(zip(computed, printed)):
            c = c * scale
            rel = abs(c - p) / abs(p) if p else math.inf
            rows.append({"index": k, "computed": c, "printed": p, "rel_delta": rel})
        hypotheses.append({"name": name, "scale": scale, "rows": rows,
                           "max_rel_delta": max(r["rel_delta"] for r in rows)})
    return {"header": listing.header, "hypotheses": hypotheses}


def exp_demo(points=10):
    """Pearson correlation of 0..points-1 against exp of the same values."""
    if points < 2:
        raise DomainError("need at least two points")
    x = [float(i) for i in range(points)]
    y = [math.exp(v) for v in x]
    r = pearson(x, y)
    return {"points": points, "x": x, "y": y, "computed": r, "paper": EXP_DEMO_PAPER,
            "delta": r - EXP_DEMO_PAPER}


# -- rendering ----------------------------------------------------------------

def _md_table(header, rows):
    out = ["| " + " | ".join(header) + " |", "|" + "|".join("---" for _ in header) + "|"]
    out += ["| " + " | ".join(str(c) for c in row) + " |" for row in rows]
    return "\n".join(out) + "\n"


def _csv(rows):
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def _json(doc):
    return json.dumps(doc, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def _jsonable(v):
    return None if isinstance(v, float) and not math.isfinite(v) else v


def fit_document(fit, domain, listing=None):
    doc = {
        "schema_version": SCHEMA_VERSION,
        "kind": "fit",
        "label": fit.label,
        "basis": {"family": fit.basis.family.value, "degree": fit.basis.degree},
        "domain": {"year_min": domain.year_min, "year_max": domain.year_max},
        "coefficients": list(fit.coefficients),
        "residual_max_rel": fit.residual_max_rel,
        "float_residual_max_rel": fit.float_residual_max_rel,
        "condition_estimate": _jsonable(fit.condition_estimate),
        "refined": fit.refined,
        "least_squares": fit.least_squares,
        "precision_digits": fit.precision,
    }
    if listing is not None:
        cmp = listing_comparison(fit, listing)
        for h in cmp["hypotheses"]:
            for row in h["rows"]:
                row["rel_delta"] = _jsonable(row["rel_delta"])
            h["max_rel_delta"] = _jsonable(h["max_rel_delta"])
        doc["printed_listing"] = cmp
    return doc


def render_fit(fit, domain, fmt="json", listing=None):
    doc = fit_document(fit, domain, listing)
    if fmt == "json":
        return _json(doc)
    printed = doc.get("printed_listing")
    header = ["index", "coefficient"] + (["printed"] if printed else [])
    rows = []
    for k, c in enumerate(doc["coefficients"]):
        row = [k, format_float(c)]
        if printed:
            row.append(format_float(listing.coefficients[k]))
        rows.append(row)
    if fmt == "csv":
        return _csv([header] + rows)
    lines = [f"## Fit: {fit.label}\n",
             f"- basis: {doc['basis']['family']}, degree {doc['basis']['degree']}",
             f"- domain: {domain.year_min} -> 0, {domain.year_max} -> 1",
             f"- residual_max_rel: {fit.residual_max_rel:.3e}",
             f"- residual with float64 coefficients: {fit.float_residual_max_rel:.3e}",
             f"- condition estimate (1-norm): {fit.condition_estimate:.3e}",
             f"- working precision: "
             + (f"{fit.precision} digits" if fit.precision else "float64"),
             ""]
    text = "\n".join(lines) + "\n" + _md_table(header, rows)
    if printed:
        text += "\n| hypothesis | scale | max relative delta |\n|---|---|---|\n"
        for h in printed["hypotheses"]:
            text += f"| {h['name']} | {h['scale']:g} | {h['max_rel_delta']:.3e} |\n"
    return text


def matrix_document(matrices):
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "similarity_matrices",
        "matrices": [
            {"method": m.method.value, "k0_included": m.k0_included,
             "labels": list(m.labels), "entries": m.entries.tolist()}
            for m in matrices
        ],
    }


def _matrix_title(m):
    if m.method is Method.TAU:
        return f"tau_covariance ({'k0 included' if m.k0_included else 'k0 excluded'})"
    return "pearson"


def render_matrices(matrices, fmt="md"):
    if fmt == "json":
        return _json(matrix_document(matrices))
    if fmt == "csv":
        rows = []
        for m in matrices:
            rows.append([_matrix_title(m), *m.labels])
            rows += [[lab, *(format_float(v) for v in row)]
                     for lab, row in zip(m.labels, m.entries)]
        return _csv(rows)
    parts = []
    for m in matrices:
        rows = [[lab, *(f"{v:.9f}" for v in row)] for lab, row in zip(m.labels, m.entries)]
        parts.append(f"## {_matrix_title(m)}\n\n" + _md_table(["", *m.labels], rows))
    return "\n".join(parts)


def comparison_document(report):
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "comparison",
        "method": report.method.value,
        "reference": report.reference_source,
        "variants": [
            {
                "name": v.name,
                "pair_count": len(v.pairs),
                "max_abs_delta": v.max_abs_delta,
                "labels": list(v.computed.labels),
                "computed": v.computed.entries.tolist(),
                "reference": v.reference.entries.tolist(),
                "per_cell_delta": v.per_cell_delta.tolist(),
                "pairs": [p.__dict__ for p in v.pairs],
                "sign_mismatches": [list(p) for p in v.sign_mismatches],
            }
            for v in report.variants
        ],
        "claims": [c.__dict__ for c in report.claims],
        "notes": list(report.notes),
    }


def render_comparison(report, fmt="md"):
    if fmt == "json":
        return _json(comparison_document(report))
    if fmt == "csv":
        rows = [["variant", "series_i", "series_j", "computed", "reference_ij",
                 "reference_ji", "delta_ij", "delta_ji", "sign_mismatch",
                 "reference_asymmetric"]]
        for v in report.variants:
            rows += [[v.name, p.label_i, p.label_j, format_float(p.computed),
                      format_float(p.reference_ij), format_float(p.reference_ji),
                      format_float(p.delta_ij), format_float(p.delta_ji),
                      int(p.sign_mismatch), int(p.reference_asymmetric)] for p in v.pairs]
        return _csv(rows)

    out = [f"# {report.method.value} vs {report.reference_source}\n"]
    for v in report.variants:
        out.append(f"## Variant: {v.name}\n")
        out.append(f"- pairs compared: {len(v.pairs)}")
        out.append(f"- max_abs_delta: {v.max_abs_delta:.9f}")
        out.append(f"- sign mismatches: {len(v.sign_mismatches)}\n")
        rows = [[p.label_i, p.label_j, f"{p.computed:.9f}", f"{p.reference_ij:.9f}",
                 f"{p.reference_ji:.9f}", f"{p.delta_ij:+.9f}",
                 "yes" if p.sign_mismatch else "", "yes" if p.reference_asymmetric else ""]
                for p in v.pairs]
        out.append(_md_table(["series i", "series j", "computed", "ref (i,j)", "ref (j,i)",
                              "delta (i,j)", "sign mismatch", "ref asymmetric"], rows))
        if v.sign_mismatches:
            out.append("Sign mismatches:\n")
            out += [f"- {a} / {b}" for a, b in v.sign_mismatches]
            out.append("")
    if report.claims:
        out.append("## Values quoted in the text\n")
        names = [v.name for v in report.variants]
        rows = [[c.label_a, c.label_b, f"{c.quoted:.9f}", f"{c.table_ab:.9f}",
                 *(f"{c.computed[n]:.9f}" for n in names),
                 "" if c.matches_table else "no"] for c in report.claims]
        out.append(_md_table(["series a", "series b", "quoted", "table",
                              *(f"computed ({n})" for n in names), "matches table"], rows))
    if report.notes:
        out.append("## Notes\n")
        out += [f"- {n}" for n in report.notes]
        out.append("")
    return "\n".join(out)


def render_exp_demo(result, as_json=False):
    if as_json:
        return _json({"schema_version": SCHEMA_VERSION, "kind": "exp_demo",
                      "points": result["points"], "computed": result["computed"],
                      "paper": result["paper"], "delta": result["delta"]})
    return (f"x = 0..{result['points'] - 1}, y = exp(x)\n"
            f"computed pearson: {result['computed']:.6f}\n"
            f"paper:            {result['paper']:.5f}\n"
            f"delta:            {result['delta']:+.6f}\n")
