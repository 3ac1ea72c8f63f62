"""Command-line interface.

Subcommands: ``tables``, ``certify``, ``discrepancy``, ``curse``, ``generate``.
Exit codes: 0 success, 1 usage or input error, 2 numerical precondition failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from typing import Sequence

from . import fooling, positive
from .discrepancy import Backend, DiscrepancyKind, DiscrepancySettings, Family, discrepancy
from .errors import CursekitError, IntegrationError, ParseError, PreconditionError
from .pointsets import Domain, GeneratorKind, dumps, format_float, generate, read
from .spaces import SpaceKind, SpaceSpec, holder_conjugate, inv_alpha_closed_form, worst_case_function

CTILDE_Q_REFERENCE = [(2, 1.00016), (3, 1.00098), (4, 1.00161), (5, 1.00195),
                      (10, 1.00204), (100, 1.00039), (1000, 1.00004)]
CP_HALF_REFERENCE = [(2, 1.0198), (3, 1.01023), (4, 1.00465), (5, 1.00208), (10, 1.00004)]
WEIGHTED_GAUSS = "weighted-gauss"


class UsageError(CursekitError):
    pass


# --- output -----------------------------------------------------------------

def _cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format_float(v)
    return str(v)


def _json_cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format_float(v) if math.isfinite(v) else json.dumps(format_float(v))
    if isinstance(v, int):
        return str(v)
    return json.dumps(v)


@dataclass
class OutputTable:
    columns: list[tuple[str, str]]
    rows: list[tuple] = field(default_factory=list)

    def __post_init__(self):
        for row in self.rows:
            if len(row) != len(self.columns):
                raise ValueError("ragged table row")

    @property
    def names(self) -> list[str]:
        return [c[0] for c in self.columns]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.names)
        for row in self.rows:
            w.writerow([_cell(v) for v in row])
        return buf.getvalue()

    def to_json(self) -> str:
        objs = []
        for row in self.rows:
            items = ", ".join(f"{json.dumps(k)}: {_json_cell(v)}" for k, v in zip(self.names, row))
            objs.append("  {" + items + "}")
        return "[\n" + ",\n".join(objs) + "\n]\n" if objs else "[]\n"

    def to_pretty(self) -> str:
        head = [f"{n} [{u}]" if u else n for n, u in self.columns]
        # shortest round-trip repr reads better and is still exact
        body = [[repr(v) if isinstance(v, float) else _cell(v) for v in row] for row in self.rows]
        widths = [max(len(x) for x in col) for col in zip(head, *body)]
        lines = ["  ".join(h.rjust(w) for h, w in zip(head, widths)),
                 "  ".join("-" * w for w in widths)]
        lines += ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in body]
        return "\n".join(lines) + "\n"

    def render(self, fmt: str) -> str:
        return {"csv": self.to_csv, "json": self.to_json, "pretty": self.to_pretty}[fmt]()


def _plot_svg(xs: Sequence[float], ys: Sequence[float], xlabel: str, ylabel: str) -> str:
    w, h, m = 640, 400, 50
    pts = [(x, y) for x, y in zip(xs, ys) if math.isfinite(y)]
    if not pts:
        pts = [(0.0, 0.0)]
    x0, x1 = min(p[0] for p in pts), max(p[0] for p in pts)
    y0, y1 = min(p[1] for p in pts), max(p[1] for p in pts)
    sx = (w - 2 * m) / ((x1 - x0) or 1.0)
    sy = (h - 2 * m) / ((y1 - y0) or 1.0)
    poly = " ".join(f"{m + (x - x0) * sx:.2f},{h - m - (y - y0) * sy:.2f}" for x, y in pts)
    return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}">\n'
            f'<rect width="{w}" height="{h}" fill="white"/>\n'
            f'<line x1="{m}" y1="{h - m}" x2="{w - m}" y2="{h - m}" stroke="black"/>\n'
            f'<line x1="{m}" y1="{m}" x2="{m}" y2="{h - m}" stroke="black"/>\n'
            f'<polyline fill="none" stroke="steelblue" stroke-width="2" points="{poly}"/>\n'
            f'<text x="{w / 2}" y="{h - 10}" text-anchor="middle">{xlabel}</text>\n'
            f'<text x="15" y="{h / 2}" transform="rotate(-90 15 {h / 2})" '
            f'text-anchor="middle">{ylabel}</text>\n'
            f'<text x="{m}" y="{m - 10}">{ylabel}: {format(y0, ".4g")} .. {format(y1, ".4g")}</text>\n'
            "</svg>\n")


# --- commands ---------------------------------------------------------------

def cmd_tables(which: str, a: float = 0.5) -> OutputTable:
    if which == "ctilde-q":
        rows = []
        for q, ref in CTILDE_Q_REFERENCE:
            c = positive.p2_constants(q).c_tilde
            rows.append((q, c, ref, abs(c - ref)))
        return OutputTable([("q", ""), ("c_tilde", ""), ("reference", ""), ("abs_dev", "")], rows)
    if which == "cp-a-half":
        rows = []
        for p, ref in CP_HALF_REFERENCE:
            dec = worst_case_function(SpaceSpec.from_p(SpaceKind.NO_ANCHOR_SOBOLEV, p, a=0.5))
            c = positive.dp_plus_constants(dec).c_tilde
            rows.append((p, c, ref, abs(c - ref)))
        return OutputTable([("p", ""), ("c_p", ""), ("reference", ""), ("abs_dev", "")], rows)
    if which == "cpr-grid":
        rows = []
        for r in (1, 2, 3):
            for p in (1, 2, 3, 5):
                spec = SpaceSpec.from_p(SpaceKind.ANCHORED_SOBOLEV, p, r=r, a=a)
                dec = worst_case_function(spec)
                quad = (dec.I0 + dec.I1) / max(dec.I0, dec.I1)
                rows.append((r, p, a, inv_alpha_closed_form(spec), quad))
        return OutputTable([("r", ""), ("p", ""), ("a", ""), ("c_pr", ""), ("c_pr_quadrature", "")],
                           rows)
    raise UsageError(f"unknown table {which!r}")


def _decomposition(args):
    if args.space == WEIGHTED_GAUSS:
        from .weighted import WeightedSpec, worst_case_function_weighted
        return worst_case_function_weighted(WeightedSpec(args.r, args.q))
    return worst_case_function(SpaceSpec(SpaceKind(args.space), r=args.r, q=args.q, a=args.a))


def _positive_constants(args, dec) -> positive.PositiveConstants:
    if args.space == SpaceKind.POLY2.value:
        return positive.p2_constants(args.q)
    return positive.dp_plus_constants(dec, args.q)


def _fmt_constants(consts) -> str:
    return ";".join(f"{k}={_cell(float(v))}" for k, v in consts.items())


def _default_theorems(dec, space: str, q: float) -> list[str]:
    out = []
    if dec.decomposable:
        out.append("3" if dec.has_smooth_part else "1")
    if q != math.inf:
        out.append("5")
    return out


def cmd_certify(path: str, args) -> OutputTable:
    domain = Domain.REAL if args.space == WEIGHTED_GAUSS else Domain.CUBE
    ps = read(path, domain)
    dec = _decomposition(args)
    theorems = args.theorem or _default_theorems(dec, args.space, args.q)
    rows = []
    for t in theorems:
        if t == "1":
            cert = fooling.certify_thm1(dec, ps)
        elif t == "3":
            if ps.d <= fooling.MAX_SUBSET_DIM:
                cert = fooling.certify_thm3(dec, ps)
            else:
                dec.require_decomposable()
                bn = fooling.closed_form_thm3(dec.alpha, dec.alpha3, ps.n, ps.d)
                cert = fooling.Certificate(bn * dec.initial_error_1d ** ps.d, bn,
                                           fooling.CertTheorem.THM3_CLOSED, ps.n, ps.d,
                                           {"alpha": dec.alpha, "alpha3": dec.alpha3})
        else:
            if ps.weights is not None and ps.n and min(ps.weights) < 0:
                raise PreconditionError("nonnegative-rule bound needs nonnegative weights")
            cert = positive.positive_rule_bound(_positive_constants(args, dec), ps.n, ps.d)
        rows.append((cert.theorem.value, cert.n_nodes, cert.d, cert.bound_absolute,
                     cert.bound_normalized, _fmt_constants(cert.constants_used)))
    return OutputTable([("theorem", ""), ("n", ""), ("d", ""), ("bound_absolute", ""),
                        ("bound_normalized", ""), ("constants", "")], rows)


def cmd_discrepancy(path: str, args) -> OutputTable:
    ps = read(path)
    kind = DiscrepancyKind(Family(args.family), args.p_exp, args.a, args.generalized)
    backend = Backend(args.backend)
    if backend is Backend.MONTE_CARLO and args.seed is None:
        raise PreconditionError("monte-carlo backend needs --seed")
    settings = DiscrepancySettings(seed=args.seed, n_samples=args.samples)
    res = discrepancy(kind, ps, backend, settings)
    return OutputTable(
        [("family", ""), ("p", ""), ("a", ""), ("generalized", ""), ("backend", ""), ("n", ""),
         ("d", ""), ("value", ""), ("stderr", ""), ("n_samples", "")],
        [(kind.family.value, kind.p, kind.a, kind.generalized, res.backend.value, ps.n, ps.d,
          res.value, res.stderr, res.n_samples)])


def _curse_constants(args) -> dict[str, float]:
    t = fooling.Theorem(args.theorem)
    given = {"alpha": args.alpha, "alpha3": args.alpha3, "c_tilde": args.c_tilde}
    need = {fooling.Theorem.THM1: ["alpha"], fooling.Theorem.THM3: ["alpha", "alpha3"],
            fooling.Theorem.THM5: ["c_tilde"]}[t]
    if all(given[k] is not None for k in need):
        return {k: given[k] for k in need}
    dec = None if args.space == SpaceKind.POLY2.value and t is fooling.Theorem.THM5 \
        else _decomposition(args)
    if t is fooling.Theorem.THM5:
        return {"c_tilde": _positive_constants(args, dec).c_tilde}
    dec.require_decomposable()
    if t is fooling.Theorem.THM1 and dec.has_smooth_part:
        raise PreconditionError("this bound needs a worst-case function without smooth part; "
                                "use --theorem 3")
    return {"alpha": dec.alpha, "alpha3": dec.alpha3}


def _parse_range(text: str) -> list[int]:
    try:
        if ":" in text:
            parts = [int(x) for x in text.split(":")]
            lo, hi = parts[0], parts[1]
            step = parts[2] if len(parts) > 2 else 1
            if step < 1:
                raise ValueError
            return list(range(lo, hi + 1, step))
        return [int(x) for x in text.split(",")]
    except ValueError:
        raise UsageError(f"bad dimension range {text!r}; use LO:HI[:STEP] or a comma list") \
            from None


def cmd_curse(args) -> OutputTable:
    consts = _curse_constants(args)
    ds = _parse_range(args.d)
    if not ds or min(ds) < 1:
        raise UsageError("dimensions must be >= 1")
    rows = []
    for d in ds:
        n = fooling.info_complexity_bound(args.theorem, consts, args.eps, d)
        row = (d, n)
        if args.log2:
            row += (math.log2(n) if n > 0 else -math.inf,)
        rows.append(row)
    cols = [("d", ""), ("n_lower", "nodes")]
    if args.log2:
        cols.append(("log2_n_lower", ""))
    table = OutputTable(cols, rows)
    if args.plot:
        ys = [math.log2(r[1]) if r[1] > 0 else -math.inf for r in rows]
        with open(args.plot, "w", encoding="utf-8") as fh:
            fh.write(_plot_svg([r[0] for r in rows], ys, "d", "log2 N lower bound"))
    return table


# --- argument parsing --------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _q_value(text: str) -> float:
    v = float(text)
    if not v > 1:
        raise argparse.ArgumentTypeError("q must exceed 1 (use 'inf' for the sup norm)")
    return v


def _space_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--space", default=SpaceKind.ANCHORED_SOBOLEV.value,
                   choices=[k.value for k in SpaceKind] + [WEIGHTED_GAUSS])
    p.add_argument("--r", type=int, default=1, help="smoothness")
    p.add_argument("--q", type=_q_value, default=2.0, help="norm exponent in (1, inf]")
    p.add_argument("--a", type=float, default=0.5, help="anchor / split point")


def _format_flag(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=["csv", "json", "pretty"], default="pretty")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cursekit",
                     description="Lower bounds for multivariate integration in tensor-product spaces.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    t = sub.add_parser("tables", help="reproduce the constant tables")
    t.add_argument("which", choices=["ctilde-q", "cp-a-half", "cpr-grid"])
    t.add_argument("--a", type=float, default=0.5, help="anchor for cpr-grid")
    _format_flag(t)

    c = sub.add_parser("certify", help="error lower bounds for a node set")
    c.add_argument("pointset")
    _space_flags(c)
    c.add_argument("--theorem", action="append", choices=["1", "3", "5"],
                   help="repeatable; default: every bound that applies to the space")
    _format_flag(c)

    d = sub.add_parser("discrepancy", help="L_p discrepancy of a node set")
    d.add_argument("pointset")
    d.add_argument("--family", choices=[f.value for f in Family], default="anchored")
    d.add_argument("--p-exp", type=float, default=2.0, help="discrepancy exponent p >= 1")
    d.add_argument("--a", type=float, default=0.5)
    d.add_argument("--generalized", action="store_true")
    d.add_argument("--backend", choices=[b.value for b in Backend], default="box-exact")
    d.add_argument("--seed", type=int, default=None, help="required for monte-carlo")
    d.add_argument("--samples", type=int, default=1_000_000)
    _format_flag(d)

    k = sub.add_parser("curse", help="lower bounds on the information complexity")
    k.add_argument("--theorem", choices=["1", "3", "5"], required=True)
    _space_flags(k)
    k.add_argument("--alpha", type=float, help="override the split ratio")
    k.add_argument("--alpha3", type=float, help="override the smooth-part ratio")
    k.add_argument("--c-tilde", type=float, help="override the nonnegative-rule constant")
    k.add_argument("--eps", type=float, required=True)
    k.add_argument("--d", default="1:10", help="LO:HI[:STEP] or comma list")
    k.add_argument("--log2", action="store_true", help="add a log2 column")
    k.add_argument("--plot", metavar="SVG", help="write an SVG line plot")
    _format_flag(k)

    g = sub.add_parser("generate", help="write a node set file")
    g.add_argument("kind", choices=[k.value for k in GeneratorKind])
    g.add_argument("--d", type=int, required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("-o", "--output", help="output file (default stdout)")
    return parser


def run(argv: Sequence[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "generate":
            text = dumps(generate(GeneratorKind(args.kind), args.d, args.n, args.seed))
            if args.output:
                with open(args.output, "w", encoding="utf-8") as fh:
                    fh.write(text)
            else:
                out.write(text)
            return 0
        if args.command == "tables":
            table = cmd_tables(args.which, args.a)
        elif args.command == "certify":
            table = cmd_certify(args.pointset, args)
        elif args.command == "discrepancy":
            table = cmd_discrepancy(args.pointset, args)
        else:
            table = cmd_curse(args)
        out.write(table.render(args.format))
        return 0
    except (ParseError, UsageError, OSError) as exc:
        print(f"cursekit: error: {exc}", file=sys.stderr)
        return 1
    except (PreconditionError, IntegrationError) as exc:
        print(f"cursekit: refused: {exc}", file=sys.stderr)
        return 2


def main(argv: Sequence[str] | None = None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
