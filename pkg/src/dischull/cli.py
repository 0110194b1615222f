"""Command line interface ``dischull``.

Every subcommand writes one JSON document (to ``--out`` or stdout) carrying
``"schema": "disc-hull/1"``.  Exit codes: 0 when every contract holds, 2 on a
contract failure (the JSON then holds the failure report), 1 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .contprin import cauchy_extend
from .dendra import Neuron, build_dendrite
from .discs import AnalyticDisc, is_g_disc, linear_disc
from .domains import torus_tube
from .errors import ContractError
from .lab import (
    SCHEMA, make_domain, ring_neuron, run_family_pipeline, run_through_point, tilting_family, tilting_lift,
    torus_disc, tree_neuron, tree_trace, winding_diagnostic,
)
from .peeler import grow_twins, peel
from .rhsolve import Arc, HartogsCoreData, solve_rh
from .treecore import (
    SubtreeSelection, TreeError, canonical_form, cut_subtrees, embed_planar, from_parent_list, pellicle, pellicle_points,
    reattach, tree_from_json, tree_to_json,
)

log = logging.getLogger("dischull")

HARTOGS_FIXTURES: dict[str, Callable] = {
    "pole2": lambda t, z: 1.0 / (z - 2.0) + 0 * t,
    "product": lambda t, z: (1 + t) * z * (z + 0.5),
    "exp": lambda t, z: np.exp(z + 1j * t),
    "hidden-pole": lambda t, z: 1.0 / (z - 0.5) + 0 * t,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


# input helpers -----------------------------------------------------------------------------

def _load(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc


def _floats(text: str, n: int | None = None) -> list[float]:
    try:
        vals = [float(x) for x in text.split(",")]
    except ValueError as exc:
        raise UsageError(f"expected comma separated numbers, got {text!r}") from exc
    if n is not None and len(vals) != n:
        raise UsageError(f"expected {n} numbers, got {len(vals)}")
    return vals


def _tree(args):
    if args.tree:
        return tree_from_json(_load(args.tree))
    if args.parents:
        return from_parent_list([None if p in ("-", "") else int(p) for p in args.parents.split(",")])
    raise UsageError("give --tree or --parents")


def _neuron_spec(path: str, G, seed: int) -> Neuron:
    """``{"M": 64, "trees": {"20": <tree json>}, "seed": 0}`` over the disc ``(z, 0)``."""
    spec = _load(path)
    trees = {int(j): tree_from_json(t) for j, t in spec.get("trees", {}).items()}
    return tree_neuron(trees, G, M=int(spec.get("M", 64)), rng=spec.get("seed", seed))


# svg ---------------------------------------------------------------------------------------

def _svg(frames: Sequence[list], path: str, dur: float = 0.25) -> None:
    """Polylines (complex arrays) per frame; several frames play as an animation."""
    pts = np.concatenate([np.asarray(p) for f in frames for p in f]) if frames else np.zeros(1)
    lo = complex(pts.real.min(), pts.imag.min())
    hi = complex(pts.real.max(), pts.imag.max())
    span = max(hi.real - lo.real, hi.imag - lo.imag, 1e-9)
    size = 480.0

    def xy(z):
        return (z.real - lo.real) / span * size + 10, (hi.imag - z.imag) / span * size + 10

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size + 20:.0f}" height="{size + 20:.0f}">']
    n = len(frames)
    for k, f in enumerate(frames):
        vis = "visible" if n == 1 or k == 0 else "hidden"
        out.append(f'<g visibility="{vis}">')
        if n > 1:
            out.append(f'<set attributeName="visibility" to="visible" begin="{k * dur:.3f}s" dur="{dur:.3f}s"/>')
        for line in f:
            line = np.atleast_1d(np.asarray(line))
            p = " ".join("%.2f,%.2f" % xy(z) for z in line)
            out.append(f'<polyline points="{p}" fill="none" stroke="black" stroke-width="1"/>')
        out.append("</g>")
    out.append("</svg>")
    Path(path).write_text("\n".join(out))


def _tree_lines(tree, pos) -> list:
    return [np.array([complex(*pos[tree.parent[e]]), complex(*pos[e])]) for e in tree.edges]


def _neuron_lines(n: Neuron) -> list:
    lines = [np.exp(1j * np.linspace(0, 2 * np.pi, 129))]
    segs, _, _ = n.tree_segments()
    lines += [s[:, 0] + 1j * s[:, 1] for s in segs]
    return lines


# subcommands -------------------------------------------------------------------------------

def cmd_pellicle(args) -> dict:
    tree = _tree(args)
    if tree.pos is None:
        tree = embed_planar(tree)
    walk = pellicle(tree)
    counts: dict[int, int] = {}
    for e, _ in walk.events:
        counts[e] = counts.get(e, 0) + 1
    twice = all(counts.get(e, 0) == 2 for e in tree.edges) and set(counts) == set(tree.edges)
    keep = {tree.root} | set(tree.children[tree.root][:1])
    kept, residual = cut_subtrees(tree, SubtreeSelection(keep))
    roundtrip = canonical_form(reattach(kept, residual)) == canonical_form(tree)
    if args.svg:
        s = np.linspace(0, 1, 40 * max(len(walk), 1))
        p = pellicle_points(tree, walk, s, offset=0.05) if len(walk) else np.zeros((1, 2))
        _svg([_tree_lines(tree, tree.pos) + [p[:, 0] + 1j * p[:, 1]]], args.svg)
    ok = twice and roundtrip
    return {"ok": ok, "tree": tree_to_json(tree), "events": [[e, side] for e, side in walk.events],
            "edges_twice": twice, "cut_reattach": roundtrip}


def cmd_grow_twins(args) -> dict:
    G = make_domain("shell")
    tree = _tree(args)
    start = ring_neuron(linear_disc([0, 0], [1, 0]), G).ring_out[0]
    D = build_dendrite(tree_trace(tree, start, rng=args.seed), G)
    tg = grow_twins(D, 1.0)
    twin = tg.dendrite(args.s)
    rep = tg.check(twin, args.s)
    if args.svg:
        frames = []
        for s in tg.schedule:
            Ds = tg.dendrite(float(s))
            frames.append(_tree_lines(Ds.tree, Ds.tree.pos) or [np.array([1.0 + 0j])])
        _svg(frames, args.svg)
    rep = {k: (float(v) if isinstance(v, (np.floating, float)) else v) for k, v in rep.items()}
    return {"ok": True, "s": args.s, "source": tree_to_json(tree), "twins": tree_to_json(twin.tree),
            "check": rep}


def cmd_peel(args) -> dict:
    G = make_domain("shell")
    nm = _neuron_spec(args.minus, G, args.seed)
    np_ = _neuron_spec(args.plus, G, args.seed + 1)
    gam = Arc(*_floats(args.gamma, 2))
    res = peel(nm, np_, gam, G=G)
    if args.svg:
        step = max(1, len(res.homotopy) // 60)
        _svg([_neuron_lines(n) for n in res.homotopy[::step]], args.svg)
    out = res.to_json()
    out.pop("states")
    return {"ok": True, **out}


def cmd_extend_hartogs(args) -> dict:
    if args.fn not in HARTOGS_FIXTURES:
        raise UsageError(f"unknown fixture {args.fn!r}; choose from {sorted(HARTOGS_FIXTURES)}")
    x, y = _floats(args.z, 2)
    tol = 1e-8 if args.tol is None else args.tol
    ext = cauchy_extend(HARTOGS_FIXTURES[args.fn], args.t, complex(x, y), tol=tol)
    v = complex(ext.value)
    return {"ok": ext.valid, "fn": args.fn, "t": args.t, "z": [x, y], "value": [v.real, v.imag],
            "residual": ext.residual, "valid": ext.valid}


def cmd_rh_solve(args) -> dict:
    core = _load(args.input)
    central = AnalyticDisc.from_json(core["central"])
    fibers = [AnalyticDisc.from_json(f) for f in core["fibers"]]
    data = HartogsCoreData.from_discs(central, fibers)
    gam = Arc(*_floats(args.gamma, 2))
    K = np.array([complex(*k) for k in core.get("K", [])], dtype=complex)
    eps = args.eps if args.tol is None else args.tol
    sol = solve_rh(data, gam, gam.inner(0.5), K, eps=eps)
    return {"ok": bool(sol.contract["pass"]), "solution": sol.to_json()}


def cmd_through_point(args) -> dict:
    G = make_domain(args.domain)
    body = AnalyticDisc.from_json(_load(args.body)) if args.body else linear_disc([0, 0], [1, 0])
    target = _floats(args.target)
    if len(target) != 4:
        raise UsageError("--target takes re1,im1,re2,im2")
    eps = args.eps if args.tol is None else args.tol
    res = run_through_point(G, ring_neuron(body, G), [complex(target[0], target[1]), complex(target[2], target[3])],
                            eps=eps, rho_min=args.rho_min, rng=args.seed)
    if args.svg:
        b = res.disc.boundary(256)
        _svg([[b[:, 0], b[:, 1]]], args.svg)
    return res.to_json()


def cmd_family_run(args) -> dict:
    G = make_domain("shell")
    Psi = tilting_family(args.n_t)
    eps = args.eps if args.tol is None else args.tol
    run = run_family_pipeline(Psi, tilting_lift(Psi, G), Arc(-0.5, 0.5), G, eps=eps, workers=args.workers)
    if args.svg:
        _svg([[d.boundary(128)[:, 0] for d in run.discs]], args.svg)
    return run.to_json()


def cmd_demo_torus(args) -> dict:
    T = torus_tube(closed=True)
    z = np.exp(1j * np.linspace(0, 2 * np.pi, 513))
    tol = 1e-9 if args.tol is None else args.tol
    out, lines, ok = {}, [], True
    for name, sign in (("plus", 1), ("minus", -1)):
        d = torus_disc(sign)
        w = d(z)
        rep = is_g_disc(d, T)
        wind = winding_diagnostic(w)
        L = np.log(np.abs(w))
        lines.append(L[:, 0] + 1j * L[:, 1])
        good = rep.ok and abs(rep.margin) <= tol and wind == (sign,)
        ok = ok and good
        out[name] = {"winding": wind[0], "g_disc": rep.to_json(), "pass": good}
    if args.svg:
        _svg([lines + [np.exp(1j * np.linspace(0, 2 * np.pi, 129))]], args.svg)
    return {"ok": ok, **out}


COMMANDS = {
    "pellicle": cmd_pellicle, "grow-twins": cmd_grow_twins, "peel": cmd_peel,
    "extend-hartogs": cmd_extend_hartogs, "rh-solve": cmd_rh_solve, "through-point": cmd_through_point,
    "family-run": cmd_family_run, "demo-torus": cmd_demo_torus,
}


def _common(top: bool) -> argparse.ArgumentParser:
    """Global flags; below the subcommand they only override values given explicitly."""
    c = _Parser(add_help=False, allow_abbrev=False)
    d = (lambda v: v) if top else (lambda v: argparse.SUPPRESS)
    c.add_argument("--out", default=d(None), help="JSON output path (default stdout)")
    c.add_argument("--svg", default=d(None), help="optional SVG rendering path")
    c.add_argument("--seed", type=int, default=d(0), help="seed for randomized steps")
    c.add_argument("--tol", type=float, default=d(None), help="override the contract tolerance")
    c.add_argument("-v", "--verbose", action="store_true", default=d(False))
    return c


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="dischull", description=__doc__.splitlines()[0], parents=[_common(True)],
                allow_abbrev=False)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    common = _common(False)

    def add(name, help_):
        return sub.add_parser(name, help=help_, parents=[common], allow_abbrev=False)

    for name in ("pellicle", "grow-twins"):
        q = add(name, "pellicle walk of a tree" if name == "pellicle" else "grow mirror twins of a dendrite")
        q.add_argument("--tree", help="tree JSON file")
        q.add_argument("--parents", help="parent list such as -,0,0,1")
        if name == "grow-twins":
            q.add_argument("--s", type=float, default=0.75)
    q = add("peel", "peel one neuron into another")
    q.add_argument("--minus", required=True, help="neuron spec JSON")
    q.add_argument("--plus", required=True, help="neuron spec JSON")
    q.add_argument("--gamma", default="-0.5,0.5", help="free arc a,b in radians")
    q = add("extend-hartogs", "continue a fixture through the Hartogs figure")
    q.add_argument("--fn", required=True, help="fixture: " + ", ".join(HARTOGS_FIXTURES))
    q.add_argument("--t", type=float, required=True)
    q.add_argument("--z", required=True, help="re,im with |z| < 1")
    q = add("rh-solve", "squeezed Riemann-Hilbert solution over a Hartogs core")
    q.add_argument("--input", required=True, help="core JSON with central disc and fibers")
    q.add_argument("--gamma", required=True, help="arc a,b in radians")
    q.add_argument("--eps", type=float, default=0.05)
    q = add("through-point", "disc with boundary in G through a target point")
    q.add_argument("--domain", default="shell", help="shell, hartogs or torus")
    q.add_argument("--body", help="disc JSON (default z -> (z, 0))")
    q.add_argument("--target", required=True, help="re1,im1,re2,im2")
    q.add_argument("--eps", type=float, default=0.05)
    q.add_argument("--rho-min", type=float, default=None)
    q = add("family-run", "family pipeline on the tilting disc family in the shell")
    q.add_argument("--n-t", type=int, default=13)
    q.add_argument("--eps", type=float, default=0.05)
    q.add_argument("--workers", type=int, default=1)
    add("demo-torus", "windings of the two torus discs")
    return p


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, complex):
        return [o.real, o.imag]
    raise TypeError(f"not serializable: {type(o).__name__}")


def _emit(doc: dict, out: str | None) -> None:
    text = json.dumps(doc, default=_json_default, indent=1)
    if out:
        Path(out).write_text(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        doc = COMMANDS[args.command](args)
    except (UsageError, TreeError, ValueError) as exc:
        print(f"dischull: error: {exc}", file=sys.stderr)
        return 1
    except ContractError as exc:
        _emit({"schema": SCHEMA, "command": args.command, "ok": False, "error": str(exc),
               "stage": exc.stage, "report": exc.report}, args.out)
        return 2
    doc = {"schema": SCHEMA, "command": args.command, **{k: v for k, v in doc.items() if k != "schema"}}
    _emit(doc, args.out)
    return 0 if doc.get("ok", True) else 2


if __name__ == "__main__":
    sys.exit(main())
