"""Command-line entry point.

Exit status: 0 when the verdict holds or the problem is feasible, 1 when it
fails or is infeasible, 2 on bad input.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import random
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from . import classify as cl
from . import formats
from .census import connected_posets_upto
from .feasibility import (
    MapDistribution,
    is_realizably_monotone,
    max_theta,
    max_theta_witness,
    realize_acyclic,
    strassen_lp,
)
from .markov import Generator, decompose_generator, simulate_path, kernel_from_decomposition, massey_violation, uniformize
from .measures import MeasureError, MeasureSystem, monotonicity_violation, witness_up_set
from .poset import MAP_BOUND, PosetError, SizeLimit

fmt = formats.fmt


@dataclass
class RunReport:
    command: str
    inputs: Tuple[str, ...]
    digest: str
    items: List[Tuple[str, object]] = field(default_factory=list)
    status: int = 0

    def add(self, key: str, value) -> None:
        self.items.append((key, value))

    def render(self, style: str = "text") -> str:
        head = [("command", self.command), ("inputs", list(self.inputs)), ("sha256", self.digest)]
        rows = head + self.items + [("exit", self.status)]
        if style == "json-like":
            return json.dumps({k: _plain(v) for k, v in rows}, indent=2, ensure_ascii=False) + "\n"
        out = []
        for k, v in rows:
            if isinstance(v, str) and "\n" in v:
                v = v.splitlines()
            if isinstance(v, list):
                out.append(f"{k}:")
                out += [f"  {_plain(x)}" for x in v]
            else:
                out.append(f"{k}: {_plain(v)}")
        return "\n".join(out) + "\n"


def _plain(v):
    if isinstance(v, Fraction):
        return fmt(v)
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, list):
        return [_plain(x) for x in v]
    return v


class InputError(Exception):
    pass


def _read(paths: Sequence[str]) -> Tuple[List[str], str]:
    h = hashlib.sha256()
    texts = []
    for p in paths:
        try:
            with open(p, "rb") as f:
                data = f.read()
        except OSError as e:
            raise InputError(f"{p}: {e.strerror}") from e
        h.update(data)
        try:
            texts.append(data.decode("utf-8"))
        except UnicodeDecodeError as e:
            raise InputError(f"{p}: not UTF-8") from e
    return texts, h.hexdigest()


# -- commands -------------------------------------------------------------------------


def _system(texts: List[str]) -> MeasureSystem:
    S = formats.load_poset(texts[0])
    return formats.load_system(texts[1], S)


def _generator_or_system(texts: List[str]):
    if len(texts) == 1:
        return formats.load_generator(texts[0])
    if len(texts) == 2:
        return _system(texts)
    raise InputError("expected <gen> or <poset> <system>")


def cmd_classify(args, texts, rep: RunReport) -> None:
    P = formats.load_poset(texts[0])
    v = cl.verdict(P)
    rep.add("elements", len(P))
    rep.add("kind", v.kind)
    if v.reason:
        rep.add("reason", v.reason)
    ev = v.evidence
    if v.kind == cl.W_GLUED:
        rep.add("diamond", " ".join(f"{k}={ev.diamond[k]}" for k in "abcd"))
    if v.kind == cl.Y_GLUED:
        lo, hi = ev.bipartite
        rep.add("bipartite", f"{' '.join(sorted(lo))} < {' '.join(sorted(hi))}")
    rep.status = 1 if v.kind == cl.FAILS else 0


def cmd_check_sm(args, texts, rep: RunReport) -> None:
    obj = _generator_or_system(texts)
    if isinstance(obj, Generator):
        L = obj
        bad = massey_violation(L)
        rep.add("lambda_star", L.lam_star)
        rep.add("massey", bad is None)
        rep.add("uniformized_stoch_monotone", monotonicity_violation(uniformize(L)) is None)
        if bad is not None:
            x, y, U, clause = bad
            side = "into" if clause == "i" else "out of"
            rep.add("witness", f"{x} <= {y}, rates {side} up-set {{{' '.join(sorted(U))}}}")
        rep.status = 0 if bad is None else 1
        return
    bad = monotonicity_violation(obj)
    rep.add("stoch_monotone", bad is None)
    if bad is not None:
        lo, hi, U = bad
        rep.add("witness", f"P_{lo} not below P_{hi} on up-set {{{' '.join(sorted(U))}}}")
    rep.status = 0 if bad is None else 1


def law_lines(law: MapDistribution) -> List[str]:
    """One ``values : weight`` line per map, values in index order."""
    return [" ".join(k) + f" : {fmt(w)}" for k, w in law.weights]


def cmd_check_rm(args, texts, rep: RunReport) -> None:
    obj = _generator_or_system(texts)
    if isinstance(obj, Generator):
        L = obj
        gamma = decompose_generator(L, args.bound)
        rep.add("realizably_monotone", gamma is not None)
        if gamma is None:
            rep.add("result", "infeasible")
            rep.status = 1
        else:
            rep.add("result", "feasible")
            rep.add("total_rate", sum(gamma.values(), Fraction(0)))
        return
    P = obj
    law = is_realizably_monotone(P, args.bound)
    rep.add("realizably_monotone", law is not None)
    rep.add("max_theta", max_theta(P, args.bound))
    rep.status = 0 if law is not None else 1


def cmd_decompose(args, texts, rep: RunReport) -> None:
    L = formats.load_generator(texts[0])
    gamma = decompose_generator(L, args.bound)
    if gamma is None:
        rep.add("result", "infeasible")
        rep.status = 1
        return
    S = L.poset
    rep.add("result", "feasible")
    rep.add("states", " ".join(S.elements))
    rep.add("maps", [" ".join(h.values) + f" : {fmt(w)}" for h, w in sorted(gamma.items(), key=lambda t: t[0].values)])
    lam = 2 * L.lam_star
    lam = max(lam, sum(gamma.values(), Fraction(0)))
    rep.add("lambda", lam)
    rep.add("reconstructs_uniformized_kernel", kernel_from_decomposition(S, gamma, lam) == uniformize(L, lam))


def _transform_line(name: str, X) -> str:
    return f"{name}: " + "; ".join(X.text())


def _realize(P: MeasureSystem, rule: str) -> Tuple[str, Fraction, Optional[MapDistribution], List[str]]:
    """Constructive route by the support's verdict, the LP otherwise."""
    from .glued import w_glued_realize, y_glued_realize
    from .rit import w_class_realize

    S, A = P.support, P.index
    extra: List[str] = []
    kind = cl.verdict(S).kind if S.is_connected() else cl.FAILS
    if cl.is_w_class(S) and len(A.minimal()) == 1 and len(A.maximal()) == 1:
        R = w_class_realize(P)
        extra = [_transform_line(a, R.X[a]) for a in A.elements]
        return "inverse-transform", Fraction(1), R.map_distribution(A), extra
    if kind == cl.ACYCLIC and A.is_connected() and len(A.covers) == len(A) - 1:
        return "coupling-glue", Fraction(1), realize_acyclic(P), extra
    if kind == cl.Y_GLUED and A == S:
        theta, law = y_glued_realize(P)
        return "y-glued-extension", theta, law, extra
    if kind == cl.W_GLUED:
        try:
            out = w_glued_realize(P, rule)
        except (PosetError, MeasureError) as e:
            extra = [f"construction failed: {e}"]
        else:
            extra = [_transform_line(a, x) for a, x in sorted(out.transforms.items())]
            return "w-glued-transform", out.weak_theta, out.law, extra
    theta, law = max_theta_witness(P)
    return "lp", theta, law if theta else None, extra


def cmd_realize(args, texts, rep: RunReport) -> None:
    P = _system(texts)
    if monotonicity_violation(P) is not None:
        rep.add("stoch_monotone", False)
        rep.add("result", "infeasible")
        rep.status = 1
        return
    method, theta, law, extra = _realize(P, args.rule)
    rep.add("method", method)
    rep.add("theta", theta)
    if law is None:
        if extra:
            rep.add("notes", extra)
        rep.add("result", "infeasible")
        rep.status = 1
        return
    rep.add("result", "feasible")
    rep.add("index", " ".join(law.index.elements))
    rep.add("maps", law_lines(law))
    if extra:
        rep.add("transforms" if method != "lp" else "notes", extra)


def cmd_realize_w(args, texts, rep: RunReport) -> None:
    from .rit import w_class_realize

    P = _system(texts)
    R = w_class_realize(P)
    rep.add("root", R.tree.root)
    rep.add("paths", [f"{k}: {' '.join(R.K[k].path)} mu={fmt(R.mu(k))}" for k in R.K])
    for a in P.index.elements:
        rep.add(f"X_{a}", R.X[a].text())
    law = R.map_distribution(P.index)
    rep.add("maps", law_lines(law))
    rep.add("realizes", law.realizes(P))


def cmd_simulate(args, texts, rep: RunReport) -> None:
    L = formats.load_generator(texts[0])
    x0 = args.start if args.start is not None else L.poset.elements[0]
    horizon = formats.parse_rational(args.horizon)
    if horizon < 0:
        raise InputError("horizon must be nonnegative")
    ev = simulate_path(L, x0, horizon, args.seed)
    rep.add("events", [f"{fmt(t)} {x}" for t, x in ev])


def cmd_couple(args, texts, rep: RunReport) -> None:
    S = formats.load_poset(texts[0])
    p1, p2 = formats.load_measure(texts[1], S), formats.load_measure(texts[2], S)
    c = strassen_lp(p1, p2)
    if c is None:
        U = witness_up_set(p1, p2)
        rep.add("result", "infeasible")
        rep.add("witness", "{" + " ".join(sorted(U)) + "}" if U is not None else "none")
        rep.status = 1
        return
    rep.add("result", "feasible")
    rep.add("pairs", [f"{x} <= {y} : {fmt(w)}" for (x, y), w in c.weights])
    if S.is_connected() and cl.verdict(S).kind == cl.W_GLUED:
        from .glued import strassen_w_glued

        sp = strassen_w_glued(p1, p2, S, args.rule)
        rep.add("transform_X1", sp.X1.text())
        rep.add("transform_X2", sp.X2.text())


def cmd_fixtures(args, texts, rep: RunReport) -> None:
    from .fixtures import all_fixtures

    ok = True
    lines = []
    for f in all_fixtures():
        if args.action == "list":
            lines.append(f"{f.name} elements={len(f.poset)} index={' '.join(f.system.index.elements)}")
            continue
        got = f.check(full=args.full)
        good = f.passes(args.full) if args.full else (got["stoch_monotone"] and got["max_theta"] == 0)
        ok &= good
        vals = " ".join(f"{k}={_plain(v)}" for k, v in got.items())
        lines.append(f"{f.name} {vals} {'PASS' if good else 'FAIL'}")
    rep.add("fixtures", lines)
    rep.status = 0 if ok else 1


def cmd_sweep(args, texts, rep: RunReport) -> None:
    n = args.max_elements
    if n > 6 or (n == 6 and not args.six):
        raise InputError("sweep above 5 elements needs --six (and stops at 6)")
    rng = random.Random(args.seed)
    counts: Dict[str, int] = {k: 0 for k in cl.KINDS}
    rows = []
    bad = 0
    for P in connected_posets_upto(n):
        v = cl.verdict(P)
        counts[v.kind] += 1
        line = f"{len(P)} {' '.join(f'{x}<{y}' for x, y in sorted(P.covers)) or '-'} {v.kind}"
        if args.kernels and v.kind != cl.FAILS:
            from .sampling import random_sm_kernel

            low = min(max_theta(random_sm_kernel(P, rng), args.bound) for _ in range(args.kernels))
            bad += low == 0
            line += f" min_theta={fmt(low)}"
        rows.append(line)
    rep.add("posets", rows)
    for k in cl.KINDS:
        rep.add(k, counts[k])
    rep.status = 1 if bad else 0


COMMANDS: Dict[str, Callable] = {
    "classify": cmd_classify,
    "check-sm": cmd_check_sm,
    "check-rm": cmd_check_rm,
    "decompose": cmd_decompose,
    "realize": cmd_realize,
    "realize-w": cmd_realize_w,
    "simulate": cmd_simulate,
    "couple": cmd_couple,
    "fixtures": cmd_fixtures,
    "sweep": cmd_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json-like"), default="text")
    common.add_argument("--bound", type=int, default=MAP_BOUND, help="cap on enumerated monotone maps")
    common.add_argument("--seed", type=int, default=0)

    ap = argparse.ArgumentParser(prog="monoeq", description="Monotonicity equivalence checks on finite posets.")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name: str, files: Sequence[str], help: str):
        sp = sub.add_parser(name, parents=[common], help=help)
        single = len(files) == 1 and "|" not in files[0]
        sp.add_argument("files", nargs=1 if single else "+", metavar="FILE", help=" ".join(files))
        sp.set_defaults(arity=files)
        return sp

    add("classify", ["POSET"], "trichotomy verdict of a connected poset")
    add("check-sm", ["GEN | POSET SYSTEM"], "stochastic monotonicity (Massey test for a generator)")
    add("check-rm", ["GEN | POSET SYSTEM"], "realizable monotonicity by exact LP")
    add("decompose", ["GEN"], "split a generator into monotone-map jump rates")
    sp = add("simulate", ["GEN"], "sample path by uniformization")
    sp.add_argument("--horizon", default="1")
    sp.add_argument("--start", default=None)
    for name, help in [("realize", "realize a system, dispatching on the verdict"),
                       ("realize-w", "inverse transforms for a system on a W-class poset")]:
        sp = add(name, ["POSET", "SYSTEM"], help)
        sp.add_argument("--rule", choices=("auto", "proportional", "nested"), default="auto")
    sp = add("couple", ["POSET", "P1", "P2"], "ordered coupling of two measures")
    sp.add_argument("--rule", choices=("auto", "proportional", "nested"), default="auto")
    sp = sub.add_parser("fixtures", parents=[common], help="counterexample systems")
    sp.add_argument("action", choices=("list", "check"))
    sp.add_argument("--full", action="store_true", help="also solve whole-host systems (slow)")
    sp = sub.add_parser("sweep", parents=[common], help="verdict table over all small connected posets")
    sp.add_argument("--max-elements", type=int, default=5)
    sp.add_argument("--six", action="store_true", help="allow the 6-element sweep")
    sp.add_argument("--kernels", type=int, default=0, help="random kernels per non-failing poset")
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    files = list(getattr(args, "files", []))
    try:
        arity = getattr(args, "arity", None)
        if arity is not None and "|" not in arity[0] and len(files) != len(arity):
            raise InputError(f"expected {len(arity)} file(s): {' '.join(arity)}")
        texts, digest = _read(files)
        rep = RunReport(args.command, tuple(files), digest)
        COMMANDS[args.command](args, texts, rep)
    except (InputError, formats.ParseError, PosetError, MeasureError, SizeLimit, ValueError) as e:
        sys.stderr.write(f"monoeq {args.command}: {e}\n")
        return 2
    sys.stdout.write(rep.render(args.format))
    return rep.status


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
