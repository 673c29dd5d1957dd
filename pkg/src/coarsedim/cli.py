"""Command line front end.

Subcommands build spaces, run the cover solvers and the map-assembly
pipeline, enumerate group balls, and emit JSON/CSV reports.  Every command
is deterministic given its inputs and seed; reports echo their parameters,
the tool version, and the rule used, so a rerun reproduces byte-identical
output apart from timing fields.

Exit codes: 0 ok, 1 invariant failure, 2 input error, 3 resource cap.
Expensive enumerations are cached under $COARSEDIM_CACHE (content-hash
keyed, version-stamped).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import tempfile
from pathlib import Path

from . import __version__
from .covers import (
    colored_decomposition,
    decomposition_from_json,
    decomposition_to_json,
    scale_dimension_profile,
)
from .errors import CapExceeded, CoarsedimError, InputError, InvariantViolation, StageFailure
from .group_spaces import (
    amalgam_projection,
    asdim_upper_bound,
    cayley_ball,
    free_product_space,
    free_product_tree,
    group_from_json,
    heisenberg_center_quotient,
    hyperbolization,
    height_projection,
    kernel_neighborhood_check,
    plain_free_product_z2_z3,
    tree_projection,
    z4_amalgam_z6,
    z_amalgam_2z,
)
from .group_spaces.free_products import PointedSpace
from .group_spaces.hyperbolic import geometric_radii
from .hurewicz import build_assembly, make_config
from .metric_core import (
    cycle_space,
    grid_space,
    load_space,
    map_between_spaces,
    measured_lipschitz,
    path_space,
    space_from_json,
    space_to_json,
    verify_metric_axioms,
)

AMALGAM_MODELS = {
    "z2_z3": plain_free_product_z2_z3,
    "z_2z": z_amalgam_2z,
    "z4_z6": z4_amalgam_z6,
}


# ---------------------------------------------------------------------------
# workspace


class Workspace:
    """Content-hash keyed JSON cache; entries are stamped with the tool
    version so stale data is never served across upgrades."""

    def __init__(self, root: str | None = None):
        root = root or os.environ.get("COARSEDIM_CACHE") or os.path.join(
            os.path.expanduser("~"), ".cache", "coarsedim"
        )
        self.root = Path(root)

    def key(self, kind: str, params: dict) -> str:
        blob = json.dumps({"kind": kind, "params": params, "version": __version__}, sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()[:24]

    def get(self, kind: str, params: dict):
        path = self.root / f"{self.key(kind, params)}.json"
        if not path.exists():
            return None
        with path.open() as f:
            doc = json.load(f)
        if doc.get("version") != __version__:
            return None
        return doc["data"]

    def put(self, kind: str, params: dict, data) -> None:
        self.root.mkdir(parents=True, exist_ok=True)
        path = self.root / f"{self.key(kind, params)}.json"
        _atomic_write_json(path, {"version": __version__, "data": data})


def _atomic_write_json(path, doc) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=str(path.parent), suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as f:
            json.dump(doc, f, indent=2, sort_keys=True)
            f.write("\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _stamp(doc: dict, args_echo: dict, rule: str | None = None, seed: int = 0) -> dict:
    doc["version"] = __version__
    doc["parameters"] = args_echo
    doc["seed"] = seed
    if rule:
        doc["rule"] = rule
    return doc


def _emit(doc: dict, out_path: str | None) -> None:
    if out_path:
        _atomic_write_json(out_path, doc)
    else:
        json.dump(doc, sys.stdout, indent=2, sort_keys=True)
        sys.stdout.write("\n")


# ---------------------------------------------------------------------------
# space


def cmd_space(args) -> int:
    if args.action == "build":
        kind = args.kind
        if kind == "grid":
            space = grid_space(int(args.params[0]), int(args.params[1]))
        elif kind == "path":
            space = path_space(int(args.params[0]))
        elif kind == "cycle":
            space = cycle_space(int(args.params[0]))
        elif kind == "file":
            space = load_space(args.params[0])
        else:
            raise InputError(f"unknown space kind {kind!r}")
        _emit(space_to_json(space), args.out)
        return 0
    if args.action == "check":
        if not args.file:
            raise InputError("space check needs --file")
        with open(args.file) as f:
            doc = json.load(f)
        try:
            space = space_from_json(doc)
        except CoarsedimError as exc:
            print(f"FAIL: {exc}")
            return 2
        report = verify_metric_axioms(space, seed=args.seed)
        print(json.dumps(_stamp(report, {"file": args.file}), sort_keys=True, default=str))
        return 0 if report["ok"] else 2
    if args.action == "info":
        if not args.file:
            raise InputError("space info needs --file")
        space = load_space(args.file)
        info = {
            "n": space.n,
            "diameter": space.diameter(),
            "provenance": space.provenance,
        }
        print(json.dumps(_stamp(info, {"file": args.file}), sort_keys=True))
        return 0
    raise InputError(f"unknown space action {args.action!r}")


# ---------------------------------------------------------------------------
# cover


def cmd_cover(args) -> int:
    space = load_space(args.space)
    if args.action == "solve":
        dec = colored_decomposition(space, args.D, args.B, mode=args.mode)
        doc = decomposition_to_json(dec)
        _stamp(doc, {"space": args.space, "D": args.D, "B": args.B, "mode": args.mode},
               rule="scale-separated decomposition")
        doc["colors"] = dec.colors
        doc["label"] = dec.info["label"]
        _emit(doc, args.out)
        return 0
    if args.action == "verify":
        if not args.decomposition:
            raise InputError("cover verify needs --decomposition")
        with open(args.decomposition) as f:
            doc = json.load(f)
        try:
            dec = decomposition_from_json(doc, space)
        except InvariantViolation as exc:
            print(f"FAIL: {exc} witness={exc.witness}")
            return 1
        print(f"ok: {dec.colors} colors, D={dec.D}, B={dec.B}")
        return 0
    if args.action == "profile":
        d_list = [float(d) for d in args.Dlist.split(",")]
        rows = scale_dimension_profile(space, d_list, mesh_multiplier=args.mesh_multiplier)
        lines = ["D,B,colors,mode,seconds"]
        for row in rows:
            lines.append(
                f"{row['D']:g},{row['B']:g},{row['colors']},{row['mode']},{row['seconds']:.6f}"
            )
        text = "\n".join(lines) + "\n"
        if args.out:
            tmp = Path(args.out)
            tmp.parent.mkdir(parents=True, exist_ok=True)
            fd, name = tempfile.mkstemp(dir=str(tmp.parent))
            with os.fdopen(fd, "w") as f:
                f.write(text)
            os.replace(name, tmp)
        else:
            sys.stdout.write(text)
        return 0
    raise InputError(f"unknown cover action {args.action!r}")


# ---------------------------------------------------------------------------
# hurewicz


def cmd_hurewicz(args) -> int:
    space = load_space(args.space)
    with open(args.map) as f:
        map_doc = json.load(f)
    codomain_doc = map_doc["codomain"]
    codomain = (
        load_space(codomain_doc) if isinstance(codomain_doc, str) else space_from_json(codomain_doc)
    )
    f_map = map_between_spaces(
        space, codomain, map_doc["assignment"], map_doc.get("lipschitz")
    )
    r = None if args.r in (None, "auto") else float(args.r)
    sub_required = False
    try:
        cfg = make_config(
            f_map, args.epsilon, args.n, args.k, r=r,
            mesh_multiplier=args.mesh_multiplier, seed=args.seed,
        )
    except InputError:
        if r is None:
            raise
        sub_required = True
        cfg = make_config(
            f_map, args.epsilon, args.n, args.k, r=r, allow_sub_required=True,
            mesh_multiplier=args.mesh_multiplier, seed=args.seed,
        )
        print(
            f"warning: scale {r} is below the required scale; "
            "the epsilon claim will not be certified",
            file=sys.stderr,
        )
    asm = build_assembly(cfg)
    report = dict(asm.report)
    report.pop("stage_log", None)
    _stamp(
        report,
        {
            "space": args.space,
            "map": args.map,
            "epsilon": args.epsilon,
            "n": args.n,
            "k": args.k,
            "r": args.r,
        },
        rule="dimension-lowering assembly",
        seed=args.seed,
    )
    report["sub_required_scale"] = sub_required
    _emit(report, args.out)
    return 0


# ---------------------------------------------------------------------------
# group


def _parse_bound_expr(text: str):
    if text.startswith("{"):
        return json.loads(text)
    head, _, rest = text.partition(":")
    parts = [p for p in rest.split(",") if p]
    if head == "polycyclic":
        return {"rule": "polycyclic", "series": parts}
    if head == "freeprod":
        a, b = parts
        return {"rule": "free_product", "left": _leaf(a), "right": _leaf(b)}
    if head == "amalgam":
        c, a, b = parts
        return {"rule": "amalgam", "c": _leaf(c), "a_quotient": _leaf(a), "b_quotient": _leaf(b)}
    if head == "extension":
        q, k = parts
        return {"rule": "extension", "quotient": _leaf(q), "kernel": _leaf(k)}
    raise InputError(f"cannot parse bound expression {text!r}")


def _leaf(token: str):
    try:
        return int(token)
    except ValueError:
        return token


def cmd_group(args) -> int:
    ws = Workspace(args.cache_dir)
    if args.action == "ball":
        group_doc = json.loads(args.group) if args.group else {"builtin": args.builtin or "heisenberg"}
        params = {"group": group_doc, "R": args.R}
        cached = None if args.no_cache else ws.get("cayley-ball", params)
        if cached is not None and not args.verify_cache:
            _emit(cached, args.out)
            return 0
        group = group_from_json(group_doc)
        ball = cayley_ball(group, args.R)
        doc = space_to_json(ball.space)
        doc["elements"] = [repr(e) for e in ball.elements]
        _stamp(doc, params, rule="word-metric ball")
        if args.verify_cache and cached is not None:
            if json.dumps(cached, sort_keys=True) != json.dumps(doc, sort_keys=True):
                print("cache mismatch against recomputation", file=sys.stderr)
                return 1
            print("cache verified: identical to recomputation")
        if not args.no_cache:
            ws.put("cayley-ball", params, doc)
        _emit(doc, args.out)
        return 0
    if args.action == "freeprod":
        x = PointedSpace(path_space(args.factor_size), 0)
        y = PointedSpace(path_space(args.factor_size), 0)
        fps = free_product_space(x, y, args.max_norm)
        doc = {
            "max_norm": args.max_norm,
            "count": len(fps.words),
            "words": [[[t, p] for t, p in w] for w in fps.words],
            "norms": list(fps.norms),
        }
        _stamp(doc, {"factor_size": args.factor_size, "max_norm": args.max_norm},
               rule="free product of pointed spaces")
        _emit(doc, args.out)
        return 0
    if args.action == "tree":
        x = PointedSpace(path_space(args.factor_size), 0)
        y = PointedSpace(path_space(args.factor_size), 0)
        fps = free_product_space(x, y, args.max_norm)
        tree = free_product_tree(fps)
        proj = tree_projection(fps, tree)
        doc = {
            "vertices": len(tree.vertices),
            "edges": len(tree.edges),
            "acyclic": len(tree.edges) == len(tree.vertices) - 1,
            "projection_lipschitz": measured_lipschitz(proj),
        }
        _stamp(doc, {"factor_size": args.factor_size, "max_norm": args.max_norm},
               rule="coset tree projection")
        _emit(doc, args.out)
        return 0
    if args.action == "amalgam":
        if args.model not in AMALGAM_MODELS:
            raise InputError(f"unknown amalgam model {args.model!r}")
        rep = amalgam_projection(AMALGAM_MODELS[args.model](), radius=args.R)
        doc = {k: v for k, v in rep.items() if k in (
            "model", "radius", "ball_size", "pairs_checked",
            "max_generator_ratio", "max_generator_ratio_plain_metric", "lipschitz_ok",
        )}
        _stamp(doc, {"model": args.model, "R": args.R}, rule="amalgam coset projection")
        _emit(doc, args.out)
        return 0 if rep["lipschitz_ok"] else 1
    if args.action == "hyperbolize":
        if not args.space:
            raise InputError("hyperbolize needs --space")
        base = load_space(args.space)
        ratio = math.e if args.ratio == "e" else float(args.ratio)
        hspace = hyperbolization(base, geometric_radii(args.t0, ratio, args.levels))
        proj = height_projection(hspace)
        doc = space_to_json(hspace.space)
        doc["height_lipschitz"] = measured_lipschitz(proj)
        _stamp(doc, {"space": args.space, "levels": args.levels, "t0": args.t0, "ratio": args.ratio},
               rule="logarithmic space of balls")
        _emit(doc, args.out)
        return 0
    if args.action == "bound":
        if not args.expr:
            raise InputError("bound needs --expr")
        rep = asdim_upper_bound(_parse_bound_expr(args.expr))
        print(f"bound <= {rep['bound']}")
        for line in rep["derivation"]:
            print(f"  {line}")
        return 0
    raise InputError(f"unknown group action {args.action!r}")


# ---------------------------------------------------------------------------
# verify


def run_verify(inject_fault: bool = False) -> list[dict]:
    from .covers import (
        _conflict_graph,
        brute_force_chromatic,
        carve_clusters,
        chromatic_number,
        make_cover,
    )
    from .polyhedra import projection_lipschitz_check

    results = []

    def check(name, fn):
        try:
            detail = fn()
            results.append({"name": name, "ok": True, "detail": detail})
        except CoarsedimError as exc:
            witness = getattr(exc, "witness", None)
            results.append({"name": name, "ok": False, "detail": f"{exc} witness={witness}"})
        except AssertionError as exc:
            results.append({"name": name, "ok": False, "detail": str(exc)})

    def axioms():
        for space in (path_space(64), grid_space(6, 6), cycle_space(12)):
            rep = verify_metric_axioms(space)
            assert rep["ok"], rep
        if inject_fault:
            rep = verify_metric_axioms(
                [[0, 1, 5], [1, 0, 1], [5, 1, 0]], triple_mode="exhaustive"
            )
            assert rep["ok"], f"axiom violation at {rep['witness']}"
        return "3 spaces"

    def coloring():
        space = path_space(16)
        clusters = carve_clusters(space, 4)
        adj = _conflict_graph(space, clusters, 2)
        chi, _ = chromatic_number(adj)
        assert chi == brute_force_chromatic(adj)
        greedy = colored_decomposition(space, 2, 4, mode="greedy")
        exact = colored_decomposition(space, 2, 4, mode="exact")
        assert greedy.colors >= exact.colors
        return f"chi={chi}"

    def projection():
        cover = make_cover(path_space(12), [range(0, 7), range(5, 12)])
        rep = projection_lipschitz_check(cover)
        assert rep["ok"], rep
        return f"measured={rep['measured']:.3f} bound={rep['bound']:.3f}"

    def freeprod():
        x = PointedSpace(path_space(3), 0)
        fps = free_product_space(x, x, 4)
        rep = verify_metric_axioms(fps.space)
        assert rep["ok"], rep
        tree = free_product_tree(fps)
        proj = tree_projection(fps, tree)
        assert measured_lipschitz(proj) <= 1.0
        return f"{len(fps.words)} words"

    def hyperbolize():
        h = hyperbolization(path_space(6), geometric_radii(levels=3))
        height_projection(h)
        return f"{h.space.n} ball points"

    def extension():
        rep = kernel_neighborhood_check(heisenberg_center_quotient(), 1, 4)
        assert rep["ok"], rep
        return f"ball={rep['ball_size']}"

    check("metric-axioms", axioms)
    check("coloring-oracle", coloring)
    check("projection-bound", projection)
    check("free-product", freeprod)
    check("hyperbolization", hyperbolize)
    check("extension-kernel", extension)
    return results


def cmd_verify(args) -> int:
    results = run_verify(inject_fault=args.inject_fault)
    ok = all(r["ok"] for r in results)
    if args.json:
        print(json.dumps({"ok": ok, "results": results, "version": __version__},
                         indent=2, sort_keys=True))
    else:
        for r in results:
            print(f"{'PASS' if r['ok'] else 'FAIL'} {r['name']}: {r['detail']}")
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# argument wiring


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="coarsedim", description=__doc__)
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("space", help="build, check, or describe finite metric spaces")
    sp.add_argument("action", choices=["build", "check", "info"])
    sp.add_argument("kind", nargs="?", help="grid|path|cycle|file (for build)")
    sp.add_argument("params", nargs="*", help="size parameters or input file")
    sp.add_argument("--file", help="space JSON (for check/info)")
    sp.add_argument("-o", "--out")
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(fn=cmd_space)

    cv = sub.add_parser("cover", help="solve, verify, or profile decompositions")
    cv.add_argument("action", choices=["solve", "verify", "profile"])
    cv.add_argument("space", help="space JSON file")
    cv.add_argument("--D", type=float, default=2.0)
    cv.add_argument("--B", type=float, default=6.0)
    cv.add_argument("--mode", choices=["auto", "exact", "greedy"], default="auto")
    cv.add_argument("--decomposition", help="decomposition JSON (for verify)")
    cv.add_argument("--Dlist", default="2,4,8")
    cv.add_argument("--mesh-multiplier", type=float, default=3.0)
    cv.add_argument("-o", "--out")
    cv.set_defaults(fn=cmd_cover)

    hw = sub.add_parser("hurewicz", help="run the dimension-lowering assembly")
    hw.add_argument("action", choices=["run"])
    hw.add_argument("--space", required=True)
    hw.add_argument("--map", required=True)
    hw.add_argument("--epsilon", type=float, default=1.0)
    hw.add_argument("--n", type=int, required=True)
    hw.add_argument("--k", type=int, required=True)
    hw.add_argument("--r", default="auto")
    hw.add_argument("--mesh-multiplier", type=float, default=3.0)
    hw.add_argument("--seed", type=int, default=0)
    hw.add_argument("-o", "--out")
    hw.set_defaults(fn=cmd_hurewicz)

    gp = sub.add_parser("group", help="group balls, free products, amalgams, bounds")
    gp.add_argument("action", choices=["ball", "freeprod", "tree", "amalgam", "hyperbolize", "bound"])
    gp.add_argument("--group", help="group JSON")
    gp.add_argument("--builtin")
    gp.add_argument("--R", type=int, default=3)
    gp.add_argument("--factor-size", type=int, default=4)
    gp.add_argument("--max-norm", type=float, default=6.0)
    gp.add_argument("--model", default="z2_z3")
    gp.add_argument("--space", help="base space JSON (for hyperbolize)")
    gp.add_argument("--levels", type=int, default=5)
    gp.add_argument("--t0", type=float, default=1.0)
    gp.add_argument("--ratio", default="e")
    gp.add_argument("--expr", help="bound expression (for bound)")
    gp.add_argument("--cache-dir")
    gp.add_argument("--no-cache", action="store_true")
    gp.add_argument("--verify-cache", action="store_true")
    gp.add_argument("-o", "--out")
    gp.set_defaults(fn=cmd_group)

    vf = sub.add_parser("verify", help="run the cross-module invariant battery")
    vf.add_argument("--json", action="store_true")
    vf.add_argument("--inject-fault", action="store_true", help=argparse.SUPPRESS)
    vf.set_defaults(fn=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (StageFailure, InvariantViolation) as exc:
        print(f"invariant failure: {exc}", file=sys.stderr)
        return 1
    except CapExceeded as exc:
        print(f"resource cap: {exc}", file=sys.stderr)
        return 3
    except (InputError, OSError, json.JSONDecodeError, KeyError, ValueError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
