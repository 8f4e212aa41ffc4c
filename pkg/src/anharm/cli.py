"""Batch verification driver.

Subcommands::

    anharm verify {group-axioms,plancherel,convolution-identity,
                   projected-convolution,operator-identity,ideals,
                   scalar-groups,all} [flags]
    anharm solve fundamental-solution --operator EXPR [flags]

Reports are JSON-lines (one object per check, ``"schema": 1``) or a CSV
summary.  Exit codes: 0 all gating checks pass, 1 check failure, 2
usage/configuration error, 3 I/O error.  Reports contain no clock data
unless --timings is given, so identical seed and configuration produce
byte-identical output.
"""

import argparse
import csv
import io
import json
import sys
import time

import numpy as np

from .harmonic import (
    group_law, plancherel_check, projected_convolution_check,
    theorem31_residual,
)
from .ideals import (
    correspondence_check, gamma_intertwine_residual, ideal_model,
    transport_gram_deviation,
)
from .operators import (
    EnvelopingElement, ZeroOperatorError, fundamental_solution_group,
    operator_identity_residual,
)
from .scalars import (
    NegReal, iso_Phi, iso_Psi, iso_Psi_inv, iso_psi, neg_identity, neg_inv,
    neg_mul, pair_mul,
)
from .testfuncs import Axis, GridFunction, export_csv, gaussian

__all__ = ["main", "parse_operator", "OperatorSyntaxError"]

CHECKS = ["group-axioms", "plancherel", "convolution-identity",
          "projected-convolution", "operator-identity", "ideals",
          "scalar-groups"]


# ── operator expression parser ───────────────────────────────────────────────

class OperatorSyntaxError(ValueError):
    """Malformed operator expression; carries the offending position."""

    def __init__(self, message, pos):
        super().__init__(f"{message} (at position {pos})")
        self.pos = pos


def _tokenize(expr):
    tokens = []
    i, n = 0, len(expr)
    while i < n:
        c = expr[i]
        if c.isspace():
            i += 1
        elif c in "+-*()":
            tokens.append((c, c, i))
            i += 1
        elif c in "Ee" and i + 1 < n and expr[i + 1].isdigit():
            j = i + 1
            while j < n and expr[j].isdigit():
                j += 1
            tokens.append(("gen", int(expr[i + 1:j]), i))
            i = j
        elif c.isdigit() or c == ".":
            j = i
            while j < n and (expr[j].isdigit() or expr[j] in ".eE"):
                if expr[j] in "eE" and j + 1 < n and expr[j + 1] in "+-":
                    j += 1
                j += 1
            try:
                val = float(expr[i:j])
            except ValueError:
                raise OperatorSyntaxError(f"bad literal {expr[i:j]!r}", i)
            tokens.append(("num", val, i))
            i = j
        else:
            raise OperatorSyntaxError(f"unexpected character {c!r}", i)
    tokens.append(("end", None, n))
    return tokens


def parse_operator(expr, dim):
    """Parse sums of products of E<k> tokens and literals into an element.

    Generators are written E1..E<dim>; ``*`` composes (order-sensitive),
    ``+``/``-`` add, parentheses group.
    """
    tokens = _tokenize(expr)
    pos = [0]

    def peek():
        return tokens[pos[0]]

    def advance():
        tok = tokens[pos[0]]
        pos[0] += 1
        return tok

    def parse_factor():
        kind, val, at = advance()
        if kind == "num":
            return ((complex(val), ()),)
        if kind == "gen":
            if not 1 <= val <= dim:
                raise OperatorSyntaxError(
                    f"generator E{val} out of range 1..{dim}", at)
            return (((1 + 0j), (val - 1,)),)
        if kind == "-":
            return tuple((-c, w) for c, w in parse_factor())
        if kind == "(":
            inner = parse_expr()
            kind2, _, at2 = advance()
            if kind2 != ")":
                raise OperatorSyntaxError("expected ')'", at2)
            return inner
        raise OperatorSyntaxError(f"unexpected token {kind!r}", at)

    def parse_term():
        terms = parse_factor()
        while peek()[0] == "*":
            advance()
            rhs = parse_factor()
            terms = tuple((c1 * c2, w1 + w2)
                          for c1, w1 in terms for c2, w2 in rhs)
        return terms

    def parse_expr():
        terms = parse_term()
        while peek()[0] in "+-":
            op, _, _ = advance()
            rhs = parse_term()
            if op == "-":
                rhs = tuple((-c, w) for c, w in rhs)
            terms = terms + rhs
        return terms

    terms = parse_expr()
    kind, _, at = peek()
    if kind != "end":
        raise OperatorSyntaxError(f"trailing input {kind!r}", at)
    merged = {}
    for c, w in terms:
        merged[w] = merged.get(w, 0j) + c
    out = tuple((c, w) for w, c in merged.items() if c != 0)
    if not out:
        out = ((0j, ()),)
    return EnvelopingElement(dim, out)


# ── report plumbing ──────────────────────────────────────────────────────────

def _line(check, params, metric, value, tolerance, gating=True):
    return {
        "schema": 1,
        "check": check,
        "params": params,
        "metric": metric,
        "value": float(value),
        "tolerance": float(tolerance),
        "pass": bool(value <= tolerance),
        "gating": bool(gating),
    }


# ── checks ───────────────────────────────────────────────────────────────────

def check_group_axioms(cfg):
    rng = np.random.default_rng(cfg.seed)
    ms = [cfg.m] if cfg.m else [2, 3, 4, 5]
    groups = [cfg.group] if cfg.group else ["N", "S"]
    lines = []
    for group in groups:
        for m in ms:
            mul, inv, dim = group_law(group, m)
            x, y, z = (rng.uniform(-2.0, 2.0, (10_000, dim)) for _ in range(3))
            lhs = mul(mul(x, y), z)
            assoc = lhs - mul(x, mul(y, z))
            unit = mul(x, np.zeros(dim)) - x
            invv = mul(x, inv(x))
            # ρ factors inflate S intermediates; compare against their size
            scale = max(1.0, float(np.max(np.abs(lhs))))
            worst = max(np.max(np.abs(assoc)), np.max(np.abs(unit)),
                        np.max(np.abs(invv))) / scale
            lines.append(_line("group-axioms", {"group": group, "m": m},
                               "max_rel_coord_err", worst, cfg.tol(1e-12)))
    return lines


def check_plancherel(cfg):
    lines = []
    grid = cfg.grid or 64
    half = cfg.halfwidth or 10.0
    if cfg.group in (None, "N"):
        axes = [Axis(0.0, half, grid)] * 3
        rep = plancherel_check(gaussian([0.1, -0.2, 0.0], [1.0, 1.2, 0.9]),
                               axes)
        lines.append(_line("plancherel", {"group": "N", "m": 3, "grid": grid},
                           "rel_err", rep.rel_err, cfg.tol(1e-8)))
    rng = np.random.default_rng(cfg.seed)
    data = rng.normal(size=(16, 16)) + 1j * rng.normal(size=(16, 16))
    gf = GridFunction((Axis(0.0, 3.0, 16),) * 2, data)
    rep = plancherel_check(gf, gf.axes)
    lines.append(_line("plancherel", {"kind": "discrete-parseval"},
                       "rel_err", rep.rel_err, cfg.tol(1e-12)))
    if cfg.group in (None, "S"):
        g_s = cfg.grid or 16
        axes = [Axis(0.0, 6.0, g_s)] * 5
        rep = plancherel_check(
            gaussian([0.1, 0.0, -0.1, 0.05, 0.0], [1.0, 1.1, 0.9, 1.2, 1.0]),
            axes)
        lines.append(_line("plancherel", {"group": "S", "m": 3, "grid": g_s},
                           "rel_err", rep.rel_err, cfg.tol(1e-6)))
    return lines


def _gauss_pair(rng, dim, widths, k, pt_scale):
    phi = gaussian(rng.uniform(-0.3, 0.3, dim), widths)
    f = gaussian(rng.uniform(-0.3, 0.3, dim), widths)
    pts = [(rng.uniform(-pt_scale, pt_scale, dim),
            rng.uniform(-pt_scale, pt_scale, k)) for _ in range(10)]
    return phi, f, pts


def check_convolution_identity(cfg):
    rng = np.random.default_rng(cfg.seed)
    lines = []
    phi, f, pts = _gauss_pair(rng, 3, [1.0] * 3, 1, 0.4)
    axes = [Axis(0.0, 6.4, cfg.grid or 16)] * 3
    r, s = theorem31_residual(phi, f, "K1", 3, pts, axes, axes)
    lines.append(_line("convolution-identity", {"case": "K1", "m": 3},
                       "rel_residual", r / max(s, 1e-300), cfg.tol(1e-3)))
    phi, f, pts = _gauss_pair(rng, 2, [1.0, 3.0], 1, 0.4)
    axes = [Axis(0.0, 6.4, 4 * (cfg.grid or 16)), Axis(0.0, 3.2, 2 * (cfg.grid or 16))]
    r, s = theorem31_residual(phi, f, "H", 2, pts, axes, axes)
    lines.append(_line("convolution-identity", {"case": "H", "m": 2},
                       "rel_residual", r / max(s, 1e-300), cfg.tol(1e-3)))
    return lines


def check_projected_convolution(cfg):
    rng = np.random.default_rng(cfg.seed)
    lines = []
    phi = gaussian(rng.uniform(-0.3, 0.3, 3), [1.0] * 3)
    f = gaussian(rng.uniform(-0.3, 0.3, 3), [1.0] * 3)
    axes = [Axis(0.0, 4.8, 8)] * 4
    fi = [tuple(int(v) for v in idx) for idx in rng.integers(2, 6, (10, 3))]
    r, s = projected_convolution_check(phi, f, "K1", 3, axes, fi)
    lines.append(_line("projected-convolution", {"case": "K1", "m": 3},
                       "rel_residual", r / max(s, 1e-300), cfg.tol(1e-2)))
    phi = gaussian(rng.uniform(-0.2, 0.2, 2), [1.0, 4.0])
    f = gaussian(rng.uniform(-0.2, 0.2, 2), [3.0, 6.0])
    axes = [Axis(0.0, 10.0, 32), Axis(0.0, 2.4, 16), Axis(0.0, 2.4, 16)]
    fi = [(int(i), int(j)) for i, j in
          zip(rng.integers(13, 19, 10), rng.integers(5, 11, 10))]
    r, s = projected_convolution_check(phi, f, "H", 2, axes, fi)
    lines.append(_line("projected-convolution", {"case": "H", "m": 2},
                       "rel_residual", r / max(s, 1e-300), cfg.tol(1e-2)))
    return lines


def check_operator_identity(cfg):
    rng = np.random.default_rng(cfg.seed)
    lines = []
    f3 = gaussian([0.1, 0.0, -0.2], [1.0, 1.2, 0.9])
    pts3 = [(rng.uniform(-0.5, 0.5, 3), rng.uniform(-0.5, 0.5, 1))
            for _ in range(10)]
    for name, u in [
        ("E1", EnvelopingElement(3, ((1.0, (0,)),))),
        ("E1*E2+E2*E2", EnvelopingElement(3, ((1.0, (0, 1)), (1.0, (1, 1))))),
        ("sublaplacian", EnvelopingElement(3, ((1.0, (0, 0)), (1.0, (2, 2))))),
    ]:
        r, s = operator_identity_residual(u, f3, "K1", 3, pts3)
        lines.append(_line("operator-identity",
                           {"case": "K1", "m": 3, "operator": name},
                           "rel_residual", r / max(s, 1e-300), cfg.tol(1e-3)))
    f2 = gaussian([0.1, -0.1], [1.0, 1.3])
    pts2 = [(rng.uniform(-0.5, 0.5, 2), rng.uniform(-0.5, 0.5, 1))
            for _ in range(10)]
    u = EnvelopingElement(2, ((1.0, (0, 0)), (0.5, (0, 1))))
    r, s = operator_identity_residual(u, f2, "H", 2, pts2)
    lines.append(_line("operator-identity",
                       {"case": "H", "m": 2, "operator": "E1*E1+0.5*E1*E2"},
                       "rel_residual", r / max(s, 1e-300), cfg.tol(1e-3)))
    return lines


def check_ideals(cfg):
    rng = np.random.default_rng(cfg.seed)
    n_gen = max(1, (cfg.dictionary_size or 3) - (cfg.probes or 2))
    # calibrated base functions; extra members drawn near them if requested
    gens = [gaussian([0.2, 0.0, -0.1], [1.0, 0.4, 0.9])]
    gens += [gaussian(rng.uniform(-0.2, 0.2, 3), [1.0, 0.4, 0.9])
             for _ in range(n_gen - 1)]
    fixed = [gaussian([0.1, -0.2, 0.0], [4.0, 4.0, 4.0]),
             gaussian([0.0, 0.3, -0.1], [4.0, 4.0, 4.0])]
    n_probe = cfg.probes or 2
    probes = fixed[:n_probe] + [
        gaussian(rng.uniform(-0.3, 0.3, 3), [4.0, 4.0, 4.0])
        for _ in range(max(0, n_probe - len(fixed)))]
    gating = gaussian([0.05, 0.1, -0.05], [3.5, 3.5, 3.5])
    ax_x, ax_z, ax_y = Axis(0, 8.0, 16), Axis(0, 9.6, 16), Axis(0, 8.0, 16)
    model = ideal_model(gens, probes, 3, (ax_x, ax_z, ax_y),
                        (ax_z, ax_y, ax_x))
    lines = [_line("ideals", {"m": 3}, "gram_transport_deviation",
                   transport_gram_deviation(model), cfg.tol(1e-6))]
    rep = correspondence_check(model, [gating])
    lines.append(_line("ideals", {"m": 3}, "closure_residual_difference",
                       rep[0].difference, cfg.tol(1e-3)))
    pts = rng.uniform(-1.0, 1.0, (20, 3))
    psi = gaussian([0.1, -0.2, 0.0], [1.3, 0.5, 1.1])
    r, s = gamma_intertwine_residual(psi, gens[0], 3, pts,
                                     (ax_x, ax_z, ax_y), (ax_z, ax_y, ax_x))
    lines.append(_line("ideals", {"m": 3}, "intertwine_rel_residual",
                       r / max(s, 1e-300), cfg.tol(1e-3)))
    return lines


def check_scalar_groups(cfg):
    rng = np.random.default_rng(cfg.seed)
    xs, ys, zs = (-np.exp(rng.uniform(-3, 3, 10_000)) for _ in range(3))
    worst = 0.0
    for x, y, z in zip(xs, ys, zs):
        a, b, c = NegReal(x), NegReal(y), NegReal(z)
        lhs = neg_mul(neg_mul(a, b), c).value
        worst = max(worst,
                    abs(lhs - neg_mul(a, neg_mul(b, c)).value) / abs(lhs),
                    abs(neg_mul(neg_identity(), a).value - x) / abs(x),
                    abs(neg_mul(a, neg_inv(a)).value + 1.0))
    hom = 0.0
    for x, y in zip(xs, ys):
        a, b = NegReal(x), NegReal(y)
        val = iso_psi(neg_mul(a, b))
        hom = max(hom, abs(val - iso_psi(a) * iso_psi(b)) / abs(val))
        p = (float(np.exp(0.1 * x)), x)
        q = (float(np.exp(0.1 * y)), y)
        l2 = np.asarray(iso_Psi(*pair_mul(p, q)))
        r2 = np.asarray(iso_Psi(*p)) + np.asarray(iso_Psi(*q))
        hom = max(hom, float(np.max(np.abs(l2 - r2))) / max(1.0, float(np.max(np.abs(l2)))))
        hom = max(hom, abs(iso_Phi(*pair_mul(p, q))
                           - iso_Phi(*p) - iso_Phi(*q))
                  / max(1.0, abs(iso_Phi(*p) + iso_Phi(*q))))
        xr, yr = iso_Psi_inv(*iso_Psi(*p))
        hom = max(hom, abs(xr - p[0]) / p[0], abs(yr - x) / abs(x))
    return [
        _line("scalar-groups", {"samples": 10_000}, "max_axiom_err",
              worst, cfg.tol(1e-12)),
        _line("scalar-groups", {"samples": 10_000}, "max_homomorphism_err",
              hom, cfg.tol(1e-12)),
    ]


CHECK_FUNS = {
    "group-axioms": check_group_axioms,
    "plancherel": check_plancherel,
    "convolution-identity": check_convolution_identity,
    "projected-convolution": check_projected_convolution,
    "operator-identity": check_operator_identity,
    "ideals": check_ideals,
    "scalar-groups": check_scalar_groups,
}


# ── configuration and output ─────────────────────────────────────────────────

class RunConfig:
    def __init__(self, args):
        self.group = args.group
        self.m = args.m
        self.grid = args.grid
        self.halfwidth = args.halfwidth
        self.seed = args.seed
        self.threads = args.threads
        self.tolerance = args.tolerance
        self.epsilon = getattr(args, "epsilon", 1e-8)
        self.dictionary_size = getattr(args, "dictionary_size", None)
        self.probes = getattr(args, "probes", None)
        self.timings = args.timings
        if self.tolerance is not None and self.tolerance < 0:
            raise ValueError("tolerance must be nonnegative")
        if self.grid is not None and (
                self.grid < 2 or self.grid & (self.grid - 1)):
            raise ValueError("grid must be a power of two >= 2")

    def tol(self, default):
        return default if self.tolerance is None else self.tolerance


def _emit(lines, args):
    if args.format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["check", "metric", "value", "tolerance", "pass",
                         "gating", "params"])
        for ln in lines:
            writer.writerow([ln["check"], ln["metric"], repr(ln["value"]),
                             repr(ln["tolerance"]), ln["pass"], ln["gating"],
                             json.dumps(ln["params"], sort_keys=True)])
        text = buf.getvalue()
    else:
        text = "".join(json.dumps(ln, sort_keys=True) + "\n" for ln in lines)
    if args.output:
        try:
            with open(args.output, "w") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"error: cannot write {args.output}: {exc}", file=sys.stderr)
            return 3
    else:
        sys.stdout.write(text)
    return 0


def _run_verify(args):
    try:
        cfg = RunConfig(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    names = CHECKS if args.check == "all" else [args.check]
    lines = []
    for name in names:
        t0 = time.perf_counter()
        produced = CHECK_FUNS[name](cfg)
        elapsed = time.perf_counter() - t0
        if cfg.timings:
            for ln in produced:
                ln["wall_time"] = elapsed / len(produced)
        lines.extend(produced)
    code = _emit(lines, args)
    if code:
        return code
    return 0 if all(ln["pass"] for ln in lines if ln["gating"]) else 1


def _run_solve(args):
    try:
        cfg = RunConfig(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    group = cfg.group or "N"
    m = cfg.m or 3
    dim = group_law(group, m)[2]
    try:
        u = parse_operator(args.operator, dim)
    except OperatorSyntaxError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    axes = [Axis(0.0, cfg.halfwidth or 8.0, cfg.grid or 32)] * dim
    try:
        sol = fundamental_solution_group(u, group, m, axes,
                                         epsilon=cfg.epsilon)
    except (ZeroOperatorError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if not args.output:
        print("error: solve requires --output", file=sys.stderr)
        return 2
    try:
        export_csv(sol.values, args.output)
    except OSError as exc:
        print(f"error: cannot write {args.output}: {exc}", file=sys.stderr)
        return 3
    summary = {"schema": 1, "operator": args.operator, "group": group,
               "m": m, "grid": axes[0].points, "halfwidth": axes[0].half_width,
               "epsilon": cfg.epsilon, "output": args.output}
    print(json.dumps(summary, sort_keys=True))
    return 0


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="anharm",
        description="verification suite for group harmonic-analysis identities")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--group", choices=["N", "S"])
        p.add_argument("--m", type=int)
        p.add_argument("--grid", type=int)
        p.add_argument("--halfwidth", type=float)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--tolerance", type=float)
        p.add_argument("--output")
        p.add_argument("--format", choices=["jsonl", "csv"], default="jsonl")
        p.add_argument("--timings", action="store_true")

    verify = sub.add_parser("verify", help="run identity checks")
    verify.add_argument("check", choices=CHECKS + ["all"])
    common(verify)
    verify.add_argument("--dictionary-size", type=int, dest="dictionary_size")
    verify.add_argument("--probes", type=int)

    solve = sub.add_parser("solve", help="numerical solves")
    solve.add_argument("what", choices=["fundamental-solution"])
    common(solve)
    solve.add_argument("--operator", required=True)
    solve.add_argument("--epsilon", type=float, default=1e-8)
    return parser


def main(argv=None):
    args = _build_parser().parse_args(argv)
    if args.command == "verify":
        return _run_verify(args)
    return _run_solve(args)


if __name__ == "__main__":
    sys.exit(main())
