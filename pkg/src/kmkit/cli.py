"""Command line front end.

Every command emits one JSON report (stdout or --out) that embeds the
fully resolved configuration, including any auto-chosen field modulus and
the seed, so reruns with the same config are byte-identical.  Exit codes:
0 success, 1 invalid input, 2 window exceeded, 3 mathematical property
violation or counterexample found (the report still gets written), 4
unsupported configuration.
"""

import argparse
import json
import os
import sys

from kmkit.errors import (
    InputError,
    PropertyViolationError,
    UnsupportedConfigurationError,
    WindowExceededError,
)
from kmkit import adrep, cosheaf, davis, gcm as gcmmod, kmalg, weyl
from kmkit.adrep import HypothesisNotSatisfied
from kmkit.exactalg import QQ, ZZ, ffield_make

SCHEMA = 1

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_WINDOW = 2
EXIT_VIOLATION = 3
EXIT_UNSUPPORTED = 4


def _read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as ex:
        raise InputError("cannot read %s: %s" % (path, ex))
    except json.JSONDecodeError as ex:
        raise InputError("invalid JSON in %s: %s" % (path, ex))


def _load_datum(path, variant_flag=None):
    doc = _read_json(path)
    g, variant = gcmmod.gcm_from_json(doc)
    if variant_flag:
        variant = variant_flag
    return gcmmod.build_root_datum(g, variant)


def _resolve_seed(args):
    if getattr(args, "seed", None) is not None:
        return args.seed
    env = os.environ.get("KMKIT_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise InputError("KMKIT_SEED must be an integer, got %r" % (env,))
    return 0


def _field(args):
    p = getattr(args, "prime", None)
    if p is None:
        raise InputError("--prime is required here")
    m = getattr(args, "degree", None) or 1
    modulus = None
    if getattr(args, "modulus", None):
        modulus = [int(c) for c in args.modulus.split(",")]
    return ffield_make(p, m, modulus)


def _ring_choice(args):
    name = getattr(args, "ring", "Z") or "Z"
    if name == "Z":
        return ZZ
    if name == "Q":
        return QQ
    if name == "F":
        return _field(args)
    raise InputError("unknown ring %r" % (name,))


def _emit(args, report, code):
    tsv_data = report.pop("_tsv", None)
    text = json.dumps(report, sort_keys=True, indent=2) + "\n"
    out = getattr(args, "out", None)
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    tsv = getattr(args, "tsv", None)
    if tsv and tsv_data is not None:
        with open(tsv, "w") as fh:
            fh.write(tsv_data)
    return code


def _report(command, config, result):
    cfg = {k: v for k, v in config.items() if v is not None}
    return {"schema": SCHEMA, "command": command, "config": cfg, "result": result}


def _exact_height(datum):
    """Window height making a finite-type algebra truncation-free."""
    roots = weyl.enumerate_real_roots(
        datum, max(w.length for w in weyl.enumerate_weyl_ball(datum, 64))
    )
    hs = [r.height for r in roots]
    if len(hs) == 1:
        return 1
    pair_max = max(
        a.height + b.height
        for i, a in enumerate(roots)
        for b in roots[i + 1 :]
    )
    return max(max(hs), pair_max)


def _adjoint_rep(datum, field, height=None):
    if height is None:
        tags = gcmmod.classify(datum.gcm).tags
        if all(t == gcmmod.FINITE for t in tags):
            height = _exact_height(datum)
        else:
            raise InputError("--height is required for non-finite type data")
    alg = kmalg.assemble_g(datum, height, ring=field)
    return adrep.adjoint_representation(alg), height


# ---------------------------------------------------------------------------
# command handlers


def cmd_gcm_validate(args):
    doc = _read_json(args.gcm)
    try:
        g, variant = gcmmod.gcm_from_json(doc)
        datum = gcmmod.build_root_datum(g, variant)
    except InputError as ex:
        rep = _report(
            "gcm validate",
            {"gcm": args.gcm},
            {"valid": False, "error": str(ex), "detail": ex.detail},
        )
        return _emit(args, rep, EXIT_INPUT)
    rep = _report(
        "gcm validate",
        {"gcm": args.gcm, "variant": variant},
        {"valid": True, "datum": datum.to_json()},
    )
    return _emit(args, rep, EXIT_OK)


def cmd_gcm_classify(args):
    doc = _read_json(args.gcm)
    g, _ = gcmmod.gcm_from_json(doc)
    rep = _report("gcm classify", {"gcm": args.gcm}, gcmmod.classify(g).to_json())
    return _emit(args, rep, EXIT_OK)


def cmd_roots(args):
    datum = _load_datum(args.gcm)
    roots = weyl.enumerate_real_roots(datum, args.height)
    tsv = "".join(
        "\t".join(str(c) for c in r.coeffs) + "\t%d\n" % r.height for r in roots
    )
    rep = _report(
        "roots",
        {"gcm": args.gcm, "height": args.height},
        {"count": len(roots), "roots": [r.to_json() for r in roots]},
    )
    rep["_tsv"] = tsv
    return _emit(args, rep, EXIT_OK)


def cmd_mult(args):
    datum = _load_datum(args.gcm)
    summary = kmalg.build_nplus_serre(datum, args.height)
    rep = _report(
        "mult", {"gcm": args.gcm, "height": args.height}, summary.to_json()
    )
    return _emit(args, rep, EXIT_OK)


def cmd_algebra_dump(args):
    datum = _load_datum(args.gcm)
    ring = _ring_choice(args)
    alg = kmalg.assemble_g(datum, args.height, ring=ring)
    cfg = {"gcm": args.gcm, "height": args.height, "ring": alg.ring.tag()}
    rep = _report("algebra dump", cfg, alg.to_json())
    return _emit(args, rep, EXIT_OK)


def cmd_overrestricted(args):
    datum = _load_datum(args.gcm)
    field = _field(args)
    rep_obj, height = _adjoint_rep(datum, field, args.height)
    res = adrep.is_over_restricted(rep_obj, args.prime)
    cfg = {
        "gcm": args.gcm,
        "prime": args.prime,
        "field": field.tag(),
        "height": height,
    }
    return _emit(args, _report("overrestricted", cfg, res.to_json()), EXIT_OK)


def _sweep_eq1(rep_obj, field):
    total = failed = skipped = 0
    witnesses = []
    for root in rep_obj.alg.real_positive:
        for sgn in (1, -1):
            coeffs = tuple(sgn * x for x in root)
            for t in sorted(field.elements()):
                for x in range(rep_obj.alg.dim):
                    try:
                        ok = adrep.check_eq1(rep_obj, coeffs, t, x)
                    except HypothesisNotSatisfied:
                        skipped += 1
                        continue
                    total += 1
                    if not ok:
                        failed += 1
                        if len(witnesses) < 16:
                            witnesses.append(
                                {"root": list(coeffs), "t": field.to_json(t), "x": x}
                            )
    return total, failed, skipped, witnesses


def cmd_adjoint(args):
    datum = _load_datum(args.gcm)
    field = _field(args)
    rep_obj, height = _adjoint_rep(datum, field, args.height)
    cfg = {
        "gcm": args.gcm,
        "prime": args.prime,
        "field": field.tag(),
        "height": height,
        "check": args.which,
    }
    if args.which == "check-eq1":
        total, failed, skipped, wit = _sweep_eq1(rep_obj, field)
        result = {
            "check": "eq1",
            "cases_total": total,
            "cases_failed": failed,
            "hypothesis_skipped": skipped,
            "witnesses": wit,
        }
    elif args.which == "check-eq2":
        total = failed = 0
        wit = []
        units = [t for t in sorted(field.elements()) if not field.is_zero(t)]
        for i in range(1, datum.n + 1):
            h = datum.coroots[i - 1]
            for t in units:
                for x in range(rep_obj.alg.dim):
                    total += 1
                    if not adrep.check_eq2(rep_obj, h, t, x):
                        failed += 1
                        if len(wit) < 16:
                            wit.append({"h": i, "t": field.to_json(t), "x": x})
        result = {"check": "eq2", "cases_total": total, "cases_failed": failed, "witnesses": wit}
    elif args.which == "check-ind":
        p = field.char
        total = failed = 0
        wit = []
        for root in rep_obj.alg.real_positive:
            for k in range(1, p):
                for x in range(rep_obj.alg.dim):
                    total += 1
                    if not adrep.check_induction_formula(rep_obj, root, k, x):
                        failed += 1
                        if len(wit) < 16:
                            wit.append({"root": list(root), "k": k, "x": x})
        result = {"check": "induction", "cases_total": total, "cases_failed": failed, "witnesses": wit}
    else:
        raise InputError("unknown adjoint check %r" % (args.which,))
    code = EXIT_VIOLATION if result["cases_failed"] else EXIT_OK
    return _emit(args, _report("adjoint " + args.which, cfg, result), code)


def cmd_group_verify(args):
    datum = _load_datum(args.gcm)
    field = _field(args)
    seed = _resolve_seed(args)
    rep_obj, height = _adjoint_rep(datum, field, args.height)
    report = adrep.build_gv_and_verify(rep_obj, words=args.words, seed=seed)
    cfg = {
        "gcm": args.gcm,
        "prime": args.prime,
        "field": field.tag(),
        "height": height,
        "words": args.words,
        "seed": seed,
    }
    code = EXIT_VIOLATION if report.cases_failed else EXIT_OK
    return _emit(args, _report("group verify", cfg, report.to_json()), code)


def cmd_davis(args):
    datum = _load_datum(args.gcm)
    if args.which == "coxeter":
        dc = davis.coxeter_davis_ball(datum, args.length)
        cfg = {"gcm": args.gcm, "length": args.length}
    else:
        ball = davis.building_ball(datum, args.q, args.radius)
        dc = davis.davis_realization_of_ball(ball)
        cfg = {"gcm": args.gcm, "q": args.q, "radius": args.radius}
    rep = _report("davis " + args.which, cfg, dc.to_json())
    rep["_tsv"] = dc.edge_tsv()
    return _emit(args, rep, EXIT_OK)


def cmd_building(args):
    datum = _load_datum(args.gcm)
    ball = davis.building_ball(datum, args.q, args.radius)
    cfg = {"gcm": args.gcm, "q": args.q, "radius": args.radius, "field": ball.ring.tag()}
    if args.which == "ball":
        rep = _report("building ball", cfg, ball.to_json())
        rep["_tsv"] = ball.adjacency_tsv()
        return _emit(args, rep, EXIT_OK)
    complete = [p for p in ball.panels if p.complete]
    result = {
        "chambers": len(ball.chambers),
        "panels_total": len(ball.panels),
        "panels_complete": len(complete),
        "panel_sizes": sorted({len(p.members) for p in complete}),
        "parabolic_index": {
            str(s): davis.parabolic_index(datum, args.q, s) for s in range(1, datum.n + 1)
        },
    }
    return _emit(args, _report("building panels", cfg, result), EXIT_OK)


def cmd_homology(args):
    doc = _read_json(args.complex)
    cx = cosheaf.complex_from_json(doc)
    ring = _ring_choice(args)
    C = cosheaf.trivial_cosheaf(cx, args.dim, ring)
    report = cosheaf.homology(C)
    cfg = {
        "complex": args.complex,
        "dim": args.dim,
        "ring": ring.tag() if hasattr(ring, "tag") else str(ring),
    }
    return _emit(args, _report("homology", cfg, report.to_json()), EXIT_OK)


def _load_tree(args):
    if args.tree:
        return cosheaf.complex_from_json(_read_json(args.tree))
    if args.random_tree:
        return cosheaf.random_tree(args.random_tree, _resolve_seed(args))
    raise InputError("provide --tree FILE or --random-tree N")


def cmd_geodesic(args):
    seed = _resolve_seed(args)
    if args.which == "generate":
        tree = _load_tree(args)
        ring = _ring_choice(args) if args.ring else QQ
        S = cosheaf.generate_geodesic_system(
            tree, args.dim, seed, ring=ring, conjugate=args.conjugate
        )
        cfg = {"dim": args.dim, "seed": seed, "ring": S.ring.tag(), "conjugate": args.conjugate}
        return _emit(args, _report("geodesic generate", cfg, S.to_json(seed=seed)), EXIT_OK)
    if args.which == "validate":
        S = _system_from_json(_read_json(args.system))
        ok, violations = cosheaf.validate_geodesic_system(S)
        cfg = {"system": args.system}
        result = {"valid": ok, "violations": violations}
        return _emit(
            args, _report("geodesic validate", cfg, result), EXIT_OK if ok else EXIT_VIOLATION
        )
    # probe
    if args.system:
        S = _system_from_json(_read_json(args.system))
        cfg = {"system": args.system, "seed": seed}
    else:
        tree = _load_tree(args)
        ring = _ring_choice(args) if args.ring else QQ
        S = cosheaf.generate_geodesic_system(tree, args.dim, seed, ring=ring)
        cfg = {"dim": args.dim, "seed": seed, "ring": S.ring.tag()}
    pr = cosheaf.conjecture_probe(S, seed=seed)
    result = pr.to_json()
    if pr.verdict == cosheaf.COUNTEREXAMPLE:
        archive = args.archive or "counterexample.json"
        with open(archive, "w") as fh:
            json.dump(result, fh, sort_keys=True, indent=2)
        result["archived_to"] = archive
        return _emit(args, _report("geodesic probe", cfg, result), EXIT_VIOLATION)
    return _emit(args, _report("geodesic probe", cfg, result), EXIT_OK)


def _system_from_json(doc):
    from kmkit.exactalg import ring_from_tag, Matrix

    ring = ring_from_tag(doc["ring"])
    cx = cosheaf.complex_from_json(doc["complex"])
    lambdas = {}
    for v, rows in doc["lambdas"]:
        lambdas[v] = Matrix(
            ring, [[ring.from_json(x) for x in row] for row in rows], ncols=doc["dim"]
        )
    geodesic = None
    if "geodesic" in doc:
        geodesic = {tuple(k): tuple(v) for k, v in doc["geodesic"]}
    return cosheaf.IdempotentSystem(cx, ring, doc["dim"], lambdas, geodesic=geodesic)


# ---------------------------------------------------------------------------
# parser


def build_parser():
    ap = argparse.ArgumentParser(
        prog="kmkit",
        description="Exact computations with Kac-Moody root data, algebras, "
        "buildings, and cosheaf homology.",
    )
    ap.add_argument("--jobs", type=int, default=1, help="cap on worker count (all current backends are sequential)")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, out=True):
        if out:
            p.add_argument("--out", help="write the JSON report here instead of stdout")
            p.add_argument("--tsv", help="write the TSV side table here, when the command has one")

    p = sub.add_parser("gcm", help="validate or classify a generalized Cartan matrix")
    gsub = p.add_subparsers(dest="which", required=True)
    for which, fn in (("validate", cmd_gcm_validate), ("classify", cmd_gcm_classify)):
        q = gsub.add_parser(which)
        q.add_argument("--gcm", required=True)
        common(q)
        q.set_defaults(func=fn)

    p = sub.add_parser("roots", help="positive real roots up to a height bound")
    p.add_argument("--gcm", required=True)
    p.add_argument("--height", type=int, required=True)
    common(p)
    p.set_defaults(func=cmd_roots)

    p = sub.add_parser("mult", help="graded dimensions and root multiplicities")
    p.add_argument("--gcm", required=True)
    p.add_argument("--height", type=int, required=True)
    common(p)
    p.set_defaults(func=cmd_mult)

    p = sub.add_parser("algebra", help="windowed algebra operations")
    asub = p.add_subparsers(dest="which", required=True)
    q = asub.add_parser("dump")
    q.add_argument("--gcm", required=True)
    q.add_argument("--height", type=int, required=True)
    q.add_argument("--ring", choices=["Z", "Q", "F"], default="Z")
    q.add_argument("--prime", type=int)
    q.add_argument("--degree", type=int, default=1)
    q.add_argument("--modulus")
    common(q)
    q.set_defaults(func=cmd_algebra_dump)

    p = sub.add_parser("adjoint", help="exhaustive identity sweeps on the adjoint module")
    p.add_argument("which", choices=["check-eq1", "check-eq2", "check-ind"])
    p.add_argument("--gcm", required=True)
    p.add_argument("--prime", type=int, required=True)
    p.add_argument("--degree", type=int, default=1)
    p.add_argument("--modulus")
    p.add_argument("--height", type=int)
    common(p)
    p.set_defaults(func=cmd_adjoint)

    p = sub.add_parser("overrestricted", help="the over-restricted predicate with witness")
    p.add_argument("--gcm", required=True)
    p.add_argument("--prime", type=int, required=True)
    p.add_argument("--degree", type=int, default=1)
    p.add_argument("--modulus")
    p.add_argument("--height", type=int)
    common(p)
    p.set_defaults(func=cmd_overrestricted)

    p = sub.add_parser("group", help="group-level relation verification")
    gsub2 = p.add_subparsers(dest="which", required=True)
    q = gsub2.add_parser("verify")
    q.add_argument("--gcm", required=True)
    q.add_argument("--prime", type=int, required=True)
    q.add_argument("--degree", type=int, default=1)
    q.add_argument("--modulus")
    q.add_argument("--height", type=int)
    q.add_argument("--words", type=int, default=10000)
    q.add_argument("--seed", type=int)
    common(q)
    q.set_defaults(func=cmd_group_verify)

    p = sub.add_parser("davis", help="Davis complexes")
    dsub = p.add_subparsers(dest="which", required=True)
    q = dsub.add_parser("coxeter")
    q.add_argument("--gcm", required=True)
    q.add_argument("--length", type=int, required=True)
    common(q)
    q.set_defaults(func=cmd_davis)
    q = dsub.add_parser("ball")
    q.add_argument("--gcm", required=True)
    q.add_argument("--q", type=int, required=True)
    q.add_argument("--radius", type=int, required=True)
    common(q)
    q.set_defaults(func=cmd_davis)

    p = sub.add_parser("building", help="building balls over F_q")
    bsub = p.add_subparsers(dest="which", required=True)
    for which in ("ball", "panels"):
        q = bsub.add_parser(which)
        q.add_argument("--gcm", required=True)
        q.add_argument("--q", type=int, required=True)
        q.add_argument("--radius", type=int, required=True)
        common(q)
        q.set_defaults(func=cmd_building)

    p = sub.add_parser("homology", help="trivial-coefficient homology of a complex file")
    p.add_argument("--complex", required=True)
    p.add_argument("--dim", type=int, default=1, help="coefficient dimension")
    p.add_argument("--ring", choices=["Z", "Q", "F"], default="Q")
    p.add_argument("--prime", type=int)
    p.add_argument("--degree", type=int, default=1)
    p.add_argument("--modulus")
    common(p)
    p.set_defaults(func=cmd_homology)

    p = sub.add_parser("geodesic", help="geodesic idempotent systems and the vanishing probe")
    gsub3 = p.add_subparsers(dest="which", required=True)
    for which in ("generate", "validate", "probe"):
        q = gsub3.add_parser(which)
        if which in ("generate", "probe"):
            q.add_argument("--tree", help="complex JSON file (must be a tree)")
            q.add_argument("--random-tree", type=int, dest="random_tree")
            q.add_argument("--dim", type=int, default=2)
            q.add_argument("--seed", type=int)
            q.add_argument("--ring", choices=["Q", "F"])
            q.add_argument("--prime", type=int)
            q.add_argument("--degree", type=int, default=1)
            q.add_argument("--modulus")
        if which == "generate":
            q.add_argument("--conjugate", action="store_true")
        if which in ("validate", "probe"):
            q.add_argument("--system", help="system JSON file")
        if which == "probe":
            q.add_argument("--archive", help="counterexample archive path")
        common(q)
        q.set_defaults(func=cmd_geodesic)

    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except HypothesisNotSatisfied as ex:
        sys.stderr.write("hypothesis not satisfied: %s\n" % ex)
        return EXIT_INPUT
    except InputError as ex:
        sys.stderr.write("input error: %s\n" % ex)
        if ex.detail:
            sys.stderr.write(json.dumps(ex.detail, sort_keys=True) + "\n")
        return EXIT_INPUT
    except WindowExceededError as ex:
        sys.stderr.write("window exceeded: %s\n" % ex)
        return EXIT_WINDOW
    except PropertyViolationError as ex:
        sys.stderr.write("property violation: %s\n" % ex)
        return EXIT_VIOLATION
    except UnsupportedConfigurationError as ex:
        sys.stderr.write("unsupported configuration: %s\n" % ex)
        return EXIT_UNSUPPORTED


if __name__ == "__main__":
    sys.exit(main())
