"""Command-line entry point: ``hoqmc {gen,quality,disc,wce,study,cbc}``.

Exit codes are 0 on success, 2 on usage or validation errors and 3 when a
resource guard trips.  Every output carries the package version and the full
run configuration, so identical invocations produce identical bytes.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Sequence

from . import __version__
from .analysis import (
    STAR_GUARD,
    StudyConfig,
    convergence_study,
    l2_discrepancy,
    random_shifts,
    shift_avg_wce_empirical,
    star_discrepancy_exact,
    worst_case_error,
)
from .constructions import (
    CbcConfig,
    Descriptor,
    build_spec,
    cbc_search,
    criterion_V,
    default_modulus,
    niederreiter_t_bound,
    plps_spec,
    sobol_t_bound,
)
from .errors import HoqmcError, ResourceGuardError
from .gf import Polynomial
from .netcore import DEFAULT_GUARD, PointSet, digital_shift, generate_points, points_csv_text, read_points_csv
from .quality import interlacing_bound, propagation_bound, t_value
from .walsh import ANCHORED, KernelId
from .weights import WeightSpec

EXIT_OK, EXIT_USAGE, EXIT_GUARD = 0, 2, 3


class UsageError(Exception):
    pass


def thread_budget() -> int:
    """Parallelism bound from ``HOQMC_THREADS`` (default 1)."""
    raw = os.environ.get("HOQMC_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"HOQMC_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise UsageError(f"HOQMC_THREADS must be a positive integer, got {raw!r}")
    return n


def _header(cmd: str, config: dict) -> list[str]:
    return [f"hoqmc {__version__} {cmd}", "config " + json.dumps(config, sort_keys=True)]


def _comment_block(lines: Sequence[str]) -> str:
    return "".join(f"# {line}\n" for line in lines)


# --- construction flags -------------------------------------------------------


def _add_construction_flags(p: argparse.ArgumentParser, with_m: bool = True) -> None:
    p.add_argument("--descriptor", help="construction descriptor as JSON text or @file")
    p.add_argument("--construction", choices=("niederreiter", "sobol", "plps"))
    p.add_argument("--b", type=int, default=2)
    p.add_argument("--s", type=int, help="dimension before interlacing")
    if with_m:
        p.add_argument("--m", type=int)
    p.add_argument("--n", type=int, help="output digits per coordinate (non-interlaced)")
    p.add_argument("--variant", choices=("review", "classic"))
    p.add_argument("--p", help="plps modulus, e.g. x^4+x+1")
    p.add_argument("--q", help="plps generating vector, comma separated, e.g. 1,x+1")
    p.add_argument("--interlace", type=int, help="interlacing factor alpha")


def _load_json_arg(text: str) -> dict:
    if text.startswith("@"):
        with open(text[1:], encoding="utf-8") as fh:
            text = fh.read()
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"descriptor is not valid JSON: {exc}") from None
    if not isinstance(d, dict):
        raise UsageError("descriptor must be a JSON object")
    return d


def _descriptor_dict(args, with_m: bool = True) -> dict:
    if args.descriptor:
        d = _load_json_arg(args.descriptor)
    else:
        s = args.s
        if s is None and args.construction == "plps" and args.q is not None:
            s = len(args.q.split(","))
        if args.construction is None or s is None:
            raise UsageError("give --descriptor or both --construction and --s")
        d = {"construction": args.construction, "b": args.b, "s": s}
        for key in ("n", "variant", "p"):
            if getattr(args, key) is not None:
                d[key] = getattr(args, key)
        if args.q is not None:
            d["q"] = [t.strip() for t in args.q.split(",")]
        if args.interlace is not None:
            d["alpha"] = args.interlace
    if with_m:
        m = getattr(args, "m", None)
        if m is not None:
            d["m"] = m
        elif "m" not in d and d.get("construction") == "plps" and "p" in d:
            d["m"] = Polynomial.parse(d["p"], int(d.get("b", 2))).degree
        if "m" not in d:
            raise UsageError("--m is required")
    else:
        d.pop("m", None)
    return d


def _descriptor(args) -> Descriptor:
    try:
        return Descriptor.from_json(_descriptor_dict(args))
    except TypeError as exc:
        raise UsageError(f"bad descriptor: {exc}") from None


# --- subcommands --------------------------------------------------------------


def cmd_gen(args) -> str:
    desc = _descriptor(args)
    ps = generate_points(build_spec(desc))
    config = json.loads(desc.to_json())
    if args.shift_seed is not None:
        delta = random_shifts(1, ps.s, ps.n, ps.b, args.shift_seed)[0]
        ps = digital_shift(ps, delta)
        config["shift_seed"] = args.shift_seed
    return points_csv_text(ps, desc.m, _header("gen", config))


def _underlying_descriptor(desc: Descriptor) -> Descriptor:
    d = json.loads(desc.to_json())
    d.pop("alpha", None)
    return Descriptor.from_json(d)


def _construction_bound(desc: Descriptor) -> int | None:
    if desc.construction == "niederreiter":
        return niederreiter_t_bound(desc.b, desc.s)
    if desc.construction == "sobol":
        return sobol_t_bound(desc.s)
    return None


def cmd_quality(args) -> str:
    desc = _descriptor(args)
    spec = build_spec(desc)
    w = WeightSpec(args.alpha)
    bounds: dict = {}
    cbound = _construction_bound(desc)
    if cbound is not None:
        bounds["construction"] = cbound
    if desc.alpha:
        under = t_value(build_spec(_underlying_descriptor(desc)), guard=args.guard, tolerant=True,
                        fallback_t=cbound, fallback_source="construction")
        lb = interlacing_bound(desc.alpha, desc.m, under.t, desc.dimension)
        if args.alpha == desc.alpha:
            bounds["interlacing"] = lb
        elif args.alpha < desc.alpha:
            bounds["interlacing"] = propagation_bound(lb, args.alpha, desc.alpha)
        bounds["underlying_t"] = under.t
        bounds["underlying_exact"] = under.exact
    fallback = None
    if args.alpha == 1 and not desc.alpha and cbound is not None:
        fallback = cbound
    elif "interlacing" in bounds:
        fallback = bounds["interlacing"]
    rep = t_value(spec, w, guard=args.guard, tolerant=True, fallback_t=fallback,
                  fallback_source="interlacing" if desc.alpha else "construction")
    out: dict = {}
    if rep.exact:
        out["t"] = rep.t
        out["mu_min"] = rep.mu_min
    else:
        out["t_upper_bound"] = rep.t
        out["mu_min_lower_bound"] = rep.mu_min
        out["bound_source"] = rep.bound_source
    out.update(
        exact=rep.exact,
        method=rep.method,
        weight_kind=rep.weight_kind,
        bounds=bounds,
        version=__version__,
        config={**json.loads(desc.to_json()), "weight_alpha": args.alpha, "guard": args.guard},
    )
    if rep.witness is not None:
        out["witness"] = list(rep.witness)
    return json.dumps(out, sort_keys=True) + "\n"


def _read_points(path: str) -> tuple[PointSet, dict]:
    if path == "-":
        text = sys.stdin.read()
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    ps, meta = read_points_csv(text)
    if ps.N == 0:
        raise UsageError(f"{path}: point file holds no points")
    return ps, meta


def cmd_disc(args) -> str:
    ps, _ = _read_points(args.input)
    if args.metric == "l2":
        value = l2_discrepancy(ps)
    else:
        value = star_discrepancy_exact(ps, guard=args.guard)
    config = {"input": args.input, "metric": args.metric, "guard": args.guard}
    return _comment_block(_header("disc", config)) + f"{value:.17g}\n"


def _kernel(args) -> KernelId:
    if args.kernel == "anchored":
        return ANCHORED
    return KernelId.sobolev(args.alpha)


def cmd_wce(args) -> str:
    ps, _ = _read_points(args.input)
    ker = _kernel(args)
    config = {"input": args.input, "kernel": ker.label, "shifts": args.shifts, "seed": args.seed}
    if args.shifts:
        sa = shift_avg_wce_empirical(ker, ps, args.shifts, args.seed)
        body = f"mean_e2,stderr\n{sa.mean:.17g},{sa.stderr:.17g}\n"
    else:
        body = f"{worst_case_error(ker, ps):.17g}\n"
    return _comment_block(_header("wce", config)) + body


def _m_range(text: str) -> range:
    lo, sep, hi = text.partition("..")
    try:
        if not sep:
            return range(int(lo), int(lo) + 1)
        return range(int(lo), int(hi) + 1)
    except ValueError:
        raise UsageError(f"--m-range must look like 4..12, got {text!r}") from None


def cmd_study(args) -> str:
    construction = _descriptor_dict(args, with_m=False)
    params = _load_json_arg(args.integrand_params) if args.integrand_params else {}
    cfg = StudyConfig(
        construction=construction,
        metric=args.metric,
        m_values=tuple(_m_range(args.m_range)),
        kernel=args.kernel,
        alpha=args.alpha,
        R=args.shifts,
        seed=args.seed,
        integrand=args.integrand,
        integrand_params=params,
        replicas=args.replicas,
    )
    res = convergence_study(cfg)
    slope = "none" if res.slope is None else f"{res.slope:.17g}"
    text = res.to_csv(_header("study", cfg.to_dict()))
    return text + f"# slope log_{res.base}(value) vs m, top half: {slope}\n"


def cmd_cbc(args) -> str:
    if not args.lam > 1:
        raise UsageError(f"--lambda must exceed 1, got {args.lam}")
    if args.modulus in ("irreducible", "monomial"):
        p = default_modulus(args.b, args.m, args.modulus)
    else:
        p = Polynomial.parse(args.modulus, args.b)
    lat = cbc_search(p, args.m, args.s, CbcConfig(args.lam))
    V = criterion_V(generate_points(plps_spec(lat)), args.lam)
    if any(q.degree < 0 for q in lat.q):
        print("warning: a chosen component is q = 0, which makes that coordinate constant", file=sys.stderr)
    desc = Descriptor("plps", args.b, args.s, args.m, p=str(p), q=tuple(str(q) for q in lat.q))
    out = {
        "descriptor": json.loads(desc.to_json()),
        "V": V,
        "codes": list(lat.codes),
        "version": __version__,
        "config": {"b": args.b, "m": args.m, "s": args.s, "lambda": args.lam, "modulus": args.modulus},
    }
    return json.dumps(out, sort_keys=True) + "\n"


# --- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hoqmc", description="Digital nets, quality parameters and QMC error studies.")
    ap.add_argument("--version", action="version", version=f"hoqmc {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", "-o", help="write to this file instead of stdout")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", parents=[common], help="generate a point file")
    _add_construction_flags(g)
    g.add_argument("--shift-seed", type=int, help="apply one random digital shift with this seed")
    g.set_defaults(func=cmd_gen)

    q = sub.add_parser("quality", parents=[common], help="t-value report as JSON")
    _add_construction_flags(q)
    q.add_argument("--alpha", type=int, default=1, help="Dick weight order (1 = NRT)")
    q.add_argument("--guard", type=int, default=DEFAULT_GUARD)
    q.set_defaults(func=cmd_quality)

    d = sub.add_parser("disc", parents=[common], help="discrepancy of a point file")
    d.add_argument("input", help="point file, or - for stdin")
    d.add_argument("--metric", choices=("l2", "star"), default="l2")
    d.add_argument("--guard", type=float, default=STAR_GUARD)
    d.set_defaults(func=cmd_disc)

    w = sub.add_parser("wce", parents=[common], help="worst-case error of a point file")
    w.add_argument("input", help="point file, or - for stdin")
    w.add_argument("--kernel", choices=("anchored", "sobolev"), default="anchored")
    w.add_argument("--alpha", type=int, default=2, help="Sobolev smoothness")
    w.add_argument("--shifts", type=int, default=0, help="average over this many random digital shifts")
    w.add_argument("--seed", type=int, default=0)
    w.set_defaults(func=cmd_wce)

    st = sub.add_parser("study", parents=[common], help="convergence study as CSV")
    _add_construction_flags(st, with_m=False)
    st.add_argument("--metric", required=True,
                    choices=("l2", "star", "wce", "wce_shift", "integration", "mc_integration"))
    st.add_argument("--m-range", required=True, help="inclusive range such as 4..12")
    st.add_argument("--kernel", choices=("anchored", "sobolev"), default="anchored")
    st.add_argument("--alpha", type=int, default=1, help="Sobolev smoothness")
    st.add_argument("--shifts", type=int, default=32)
    st.add_argument("--seed", type=int, default=0)
    st.add_argument("--integrand", default="monomial")
    st.add_argument("--integrand-params", help="JSON object of integrand parameters")
    st.add_argument("--replicas", type=int, default=128)
    st.set_defaults(func=cmd_study)

    c = sub.add_parser("cbc", parents=[common], help="component-by-component polynomial lattice search")
    c.add_argument("--b", type=int, default=2)
    c.add_argument("--m", type=int, required=True)
    c.add_argument("--s", type=int, required=True)
    c.add_argument("--lambda", dest="lam", type=float, default=2.0)
    c.add_argument("--modulus", default="irreducible", help="irreducible, monomial, or a polynomial")
    c.set_defaults(func=cmd_cbc)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        thread_budget()
        text = args.func(args)
    except ResourceGuardError as exc:
        print(f"hoqmc: resource guard: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except (UsageError, HoqmcError, ValueError, KeyError, OSError) as exc:
        print(f"hoqmc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
