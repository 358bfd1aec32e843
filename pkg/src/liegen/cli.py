"""Command-line entry point: ``liegen <subcommand> ...``.

Exit codes: 0 success, 2 bad input or failed precondition (including argparse
usage errors), 3 numerical degeneracy.  Stochastic subcommands need
``--seed`` and print it on the first line of output.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from . import __version__
from .errors import InputError, NumericalDegeneracyError, PreconditionError


def _floats(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("expected a positive integer")
    return v


def _nonneg_int(text):
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("expected a nonnegative integer")
    return v


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="liegen", description="Real semisimple Lie algebras and generation experiments.")
    p.add_argument("--version", action="version", version=f"liegen {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, seed=False):
        sp.add_argument("--format", choices=("text", "json", "csv"), default="text")
        sp.add_argument("--out", help="write the JSON document to this path")
        if seed:
            sp.add_argument("--seed", type=_nonneg_int, required=True, help="RNG seed (required)")
            sp.add_argument("--workers", type=_positive_int, default=1)

    sp = sub.add_parser("build", help="construct an algebra and summarize it")
    sp.add_argument("--algebra", required=True, help='spec, e.g. "su:3", "su_pq:2,1", "sum:su:2+sl_real:2"')
    sp.add_argument("--emit-json", action="store_true", help="print the structure-constant JSON")
    common(sp)

    sp = sub.add_parser("report", help="Cartan decomposition, rank and (optionally) roots")
    sp.add_argument("--algebra", required=True)
    sp.add_argument("--roots", action="store_true")
    common(sp)

    sp = sub.add_parser("vogan", help="Vogan diagram of a real form")
    sp.add_argument("--algebra", required=True)
    common(sp)

    sp = sub.add_parser("regularity", help="strong regularity of a torus element")
    sp.add_argument("--algebra", required=True)
    sp.add_argument("--element", type=_floats, help="coordinates; default: the standard circle")
    common(sp)

    sp = sub.add_parser("generate", help="Monte Carlo over random conjugates of two circles")
    sp.add_argument("--algebra", required=True)
    sp.add_argument("--circle1", type=_floats)
    sp.add_argument("--circle2", type=_floats)
    sp.add_argument("--trials", type=_nonneg_int, default=1000)
    sp.add_argument("--sigma", type=float, default=1.0)
    sp.add_argument("--json", dest="json_out", help="write the report JSON here")
    common(sp, seed=True)

    sp = sub.add_parser("perturb", help="perturbation stability of a generating circle pair")
    sp.add_argument("--algebra", required=True)
    sp.add_argument("--delta", type=float, default=1e-3)
    sp.add_argument("--trials", type=_positive_int, default=200)
    sp.add_argument("--sigma", type=float, default=1.0)
    common(sp, seed=True)

    sp = sub.add_parser("pairs", help="element-pair Monte Carlo in a compact group")
    sp.add_argument("--group", choices=("so3", "su2"), required=True)
    sp.add_argument("--trials", type=_nonneg_int, default=500)
    sp.add_argument("--jordan-c", type=_positive_int, default=60)
    sp.add_argument("--max-word-len", type=_positive_int, default=4)
    sp.add_argument("--sigma", type=float, default=1.0)
    sp.add_argument("--json", dest="json_out")
    common(sp, seed=True)

    sp = sub.add_parser("helly", help="pair-surjectivity check on random closed subalgebras")
    sp.add_argument("--algebra", required=True)
    sp.add_argument("--samples", type=_positive_int, default=500)
    common(sp, seed=True)

    sp = sub.add_parser("charindex", help="dim g - dim k")
    sp.add_argument("--algebra", required=True)
    common(sp)
    return p


# JSON document schema shipped for each command
SCHEMAS = {
    "build": "summary", "report": "report", "vogan": "vogan", "regularity": "regularity",
    "generate": "genreport", "perturb": "perturb", "pairs": "genreport", "helly": "helly",
    "charindex": "charindex",
}


def load_schema(name: str) -> dict:
    """Shipped JSON schema, e.g. ``load_schema("genreport")``."""
    from importlib import resources

    path = resources.files("liegen").joinpath(f"schemas/{name}.schema.json")
    return json.loads(path.read_text())


def _csv(doc: dict) -> str:
    """Flat projection: one ``key,value`` row per scalar leaf."""
    rows = []

    def walk(prefix, v):
        if isinstance(v, dict):
            for k in sorted(v):
                walk(f"{prefix}.{k}" if prefix else k, v[k])
        elif isinstance(v, list) and v and isinstance(v[0], (dict, list)):
            for i, x in enumerate(v):
                walk(f"{prefix}[{i}]", x)
        else:
            rows.append((prefix, json.dumps(v) if isinstance(v, list) else v))

    walk("", doc)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("key", "value"))
    w.writerows(rows)
    return buf.getvalue()


def _emit(args, doc: dict, text: str, out):
    if getattr(args, "out", None):
        with open(args.out, "w") as fh:
            fh.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    if args.format == "json":
        out.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    elif args.format == "csv":
        out.write(_csv(doc))
    else:
        out.write(text.rstrip("\n") + "\n")


def _algebra(text):
    from .constructors import MAX_CLI_DIM, build, classical_dim

    d = classical_dim(text)
    if d > MAX_CLI_DIM:
        raise InputError(f"algebra dimension {d} exceeds the CLI limit {MAX_CLI_DIM}")
    return build(text)


def _enc(z):
    return [float(np.real(z)), float(np.imag(z))]


def roots_document(L, rd) -> list:
    """Roots with value vectors as ``[re, im]`` pairs, sorted by rounded value vector."""
    orbit = {}
    if rd.theta_perm is not None:
        nxt = 0
        for i in range(len(rd.roots)):
            if i not in orbit:
                orbit[i] = orbit[rd.theta_perm[i]] = nxt
                nxt += 1
    items = []
    for i, r in enumerate(rd.roots):
        key = tuple(np.round(np.concatenate([r.value.real, r.value.imag]), 6) + 0.0)
        items.append((key, i))
    items.sort()
    out = []
    for _, i in items:
        r = rd.roots[i]
        out.append({
            "value": [_enc(v) for v in np.round(r.value, 12)],
            "positive": bool(rd.positive[i]),
            "theta_orbit": orbit.get(i),
        })
    # orbit ids renumbered in output order
    ren = {}
    for o in out:
        if o["theta_orbit"] is not None:
            o["theta_orbit"] = ren.setdefault(o["theta_orbit"], len(ren))
    return out


def _cmd_build(args, out):
    from .lie_core import dumps, is_semisimple

    L = _algebra(args.algebra)
    if args.out:
        # for build, --out always holds the structure-constant document
        with open(args.out, "w") as fh:
            fh.write(dumps(L) + "\n")
    if args.emit_json:
        out.write(dumps(L) + "\n")
        return 0
    doc = {"label": L.label, "dim": L.dim, "field": L.field, "semisimple": is_semisimple(L),
           "rational": L.rational}
    text = f"{L.label}: dim {L.dim}, {L.field}, semisimple={doc['semisimple']}"
    args.out = None
    _emit(args, doc, text, out)
    return 0


def _cmd_report(args, out):
    from .cartan import cartan_decomposition, root_datum
    from .lie_core import simple_ideal_decomposition

    L = _algebra(args.algebra)
    cd = cartan_decomposition(L, L.seed.theta)
    ideals = simple_ideal_decomposition(L)
    doc = {
        "label": L.label,
        "dim": L.dim,
        "dim_k": cd.k.dim,
        "dim_p": cd.p.dim,
        "cartan_rank": L.seed.rank,
        "torus_rank": len(L.seed.compact),
        "ideal_dims": [I.dim for I in ideals],
    }
    lines = [f"{L.label}: dim {L.dim}", f"k + p: {cd.k.dim} + {cd.p.dim}",
             f"cartan: rank {L.seed.rank} (t {len(L.seed.compact)}, a {len(L.seed.noncompact)})",
             f"simple ideals: {doc['ideal_dims']}"]
    if args.roots:
        rd = root_datum(L)
        doc["roots"] = roots_document(L, rd)
        lines.append(f"roots: {len(rd.roots)} ({sum(rd.positive)} positive)")
        for r in doc["roots"]:
            vals = " ".join(f"{a:+.6g}{b:+.6g}i" for a, b in r["value"])
            lines.append(f"  {'+' if r['positive'] else '-'} [{vals}] orbit={r['theta_orbit']}")
    _emit(args, doc, "\n".join(lines), out)
    return 0


def _cmd_vogan(args, out):
    from .vogan import validate_vogan, vogan_diagram

    L = _algebra(args.algebra)
    v = vogan_diagram(L)
    rep = validate_vogan(v, L)
    doc = v.to_json_dict()
    doc["label"] = L.label
    doc["checks"] = rep.checks
    doc["orbit_count"] = rep.orbit_count
    doc["compact_rank"] = rep.compact_rank
    text = f"{L.label}\n{v.render()}\norbits {rep.orbit_count}, rank of K {rep.compact_rank}"
    _emit(args, doc, text, out)
    return 0


def _cmd_regularity(args, out):
    from .cartan import root_datum
    from .generation import default_circle, is_strongly_regular

    L = _algebra(args.algebra)
    rd = root_datum(L)
    X = np.array(args.element) if args.element is not None else default_circle(L, rd).generator
    if X.shape != (L.dim,):
        raise InputError(f"element must have {L.dim} coordinates")
    ok = is_strongly_regular(rd, X)
    _emit(args, {"label": L.label, "element": X.tolist(), "strongly_regular": ok},
          "true" if ok else "false", out)
    return 0


def _seed_line(args, out):
    out.write(f"seed {args.seed} (liegen {__version__})\n")


def _report_text(rep) -> str:
    rate = "undefined" if rep.rate is None else f"{rep.rate:.4f}"
    return f"trials {rep.trials}, successes {rep.successes}, rate {rate}, failures {len(rep.failures)}"


def _cmd_generate(args, out):
    from .generation import GenerationConfig, monte_carlo_generation

    _seed_line(args, out)
    cfg = GenerationConfig(args.algebra, seed=args.seed, trials=args.trials, sigma=args.sigma,
                           circle1=args.circle1, circle2=args.circle2, workers=args.workers)
    rep = monte_carlo_generation(cfg)
    if args.json_out:
        with open(args.json_out, "w") as fh:
            fh.write(rep.dumps() + "\n")
    _emit(args, rep.to_json_dict(), _report_text(rep), out)
    return 0


def _cmd_perturb(args, out):
    from .cartan import root_datum
    from .generation import adjoint_conjugate, default_circle, generates, perturbation_stability

    _seed_line(args, out)
    if args.delta < 0:
        raise InputError("delta must be nonnegative")
    L = _algebra(args.algebra)
    rd = root_datum(L)
    rng = np.random.default_rng(args.seed)
    c1, c2 = default_circle(L, rd), default_circle(L, rd, shift=1)
    for _ in range(20):
        parts = [c1.subalgebra(), adjoint_conjugate(L, args.sigma * rng.standard_normal(L.dim), c2.subalgebra())]
        if generates(L, parts):
            break
    else:
        raise PreconditionError("no generating configuration found in 20 draws")
    rate = perturbation_stability(L, parts, args.delta, args.trials, rng=rng)
    doc = {"algebra": args.algebra, "seed": args.seed, "delta": args.delta, "trials": args.trials, "rate": rate}
    _emit(args, doc, f"rate {rate:.4f}", out)
    return 0


def _cmd_pairs(args, out):
    from .group_rep import element_pair_montecarlo

    _seed_line(args, out)
    rep = element_pair_montecarlo(args.group, args.trials, args.seed, C=args.jordan_c,
                                  max_len=args.max_word_len, sigma=args.sigma, workers=args.workers)
    if args.json_out:
        with open(args.json_out, "w") as fh:
            fh.write(rep.dumps() + "\n")
    text = _report_text(rep) + "\n(certificates are numerical evidence of non-finiteness; a missing one proves nothing)"
    _emit(args, rep.to_json_dict(), text, out)
    return 0


def _cmd_helly(args, out):
    from .generation import helly_check, random_closed_subalgebra
    from .lie_core import simple_ideal_decomposition

    _seed_line(args, out)
    L = _algebra(args.algebra)
    ideals = simple_ideal_decomposition(L)
    falsified = []
    for i in range(args.samples):
        h = random_closed_subalgebra(L, np.random.default_rng([args.seed, i]))
        if not helly_check(L, h, ideals):
            falsified.append(i)
    doc = {"algebra": args.algebra, "seed": args.seed, "samples": args.samples, "falsified": falsified}
    _emit(args, doc, f"samples {args.samples}, falsified {len(falsified)}", out)
    return 0


def _cmd_charindex(args, out):
    from .generation import characteristic_index

    L = _algebra(args.algebra)
    r = characteristic_index(L)
    _emit(args, {"label": L.label, "characteristic_index": r}, str(r), out)
    return 0


_COMMANDS = {
    "build": _cmd_build,
    "report": _cmd_report,
    "vogan": _cmd_vogan,
    "regularity": _cmd_regularity,
    "generate": _cmd_generate,
    "perturb": _cmd_perturb,
    "pairs": _cmd_pairs,
    "helly": _cmd_helly,
    "charindex": _cmd_charindex,
}


def run(argv=None, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        return _COMMANDS[args.command](args, out)
    except (InputError, PreconditionError) as exc:
        err.write(f"error: {exc}\n")
        return 2
    except NumericalDegeneracyError as exc:
        err.write(f"numerical error: {exc}\n")
        return 3
    except OSError as exc:
        err.write(f"error: {exc}\n")
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
