"""Command-line front end: ``cantor-density <command> ...``.

Exit codes: 0 success, 2 usage or invalid input, 3 resource limit, 4 other
domain errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import mpmath

from . import atlas as atlas_mod
from . import coding, density, entropy, expansions, staircase as stair_mod
from .errors import CantorDensityError, InvalidInput, ResourceLimit
from .words import EpSeq

EXIT_OK, EXIT_USAGE, EXIT_RESOURCE, EXIT_DOMAIN = 0, 2, 3, 4


@dataclass(frozen=True)
class RunConfig:
    rho: Fraction = Fraction(1, 3)
    precision: int = 50
    max_word_len: int = 12
    tol: float = 1e-9
    output: Optional[str] = None
    format: Optional[str] = None

    def __post_init__(self):
        if self.tol <= 0:
            raise InvalidInput("tol must be positive")
        # validates rho and precision
        self.params()

    def params(self) -> coding.RhoParams:
        return coding.RhoParams(self.rho, self.precision)


_CONFIG_KEYS = {
    "rho": coding.as_fraction,
    "precision": int,
    "max_word_len": int,
    "max-word-len": int,
    "tol": float,
    "out": str,
    "output": str,
    "format": str,
}


def read_config(path: str) -> dict:
    """``key=value`` lines; ``#`` starts a comment."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InvalidInput(f"{path}:{lineno}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            if key not in _CONFIG_KEYS:
                raise InvalidInput(f"{path}:{lineno}: unknown key {key!r}")
            try:
                val = _CONFIG_KEYS[key](value)
            except ValueError as exc:
                raise InvalidInput(f"{path}:{lineno}: bad value for {key}") from exc
            key = {"max-word-len": "max_word_len", "out": "output"}.get(key, key)
            out[key] = val
    return out


def build_config(args) -> RunConfig:
    merged = {}
    if getattr(args, "config", None):
        merged.update(read_config(args.config))
    for key, attr in (("rho", "rho"), ("precision", "precision"), ("max_word_len", "max_word_len"),
                      ("tol", "tol"), ("output", "out"), ("format", "format")):
        val = getattr(args, attr, None)
        if val is not None:
            merged[key] = val
    if "rho" in merged:
        merged["rho"] = coding.as_fraction(merged["rho"])
    return RunConfig(**merged)


# -- formatting -------------------------------------------------------------------


def _num(x, cfg: RunConfig) -> str:
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, float):
        return format(x, ".15g")
    return mpmath.nstr(x, cfg.precision)


def _record(cfg: RunConfig, **fields) -> dict:
    out = {}
    for k, v in fields.items():
        if isinstance(v, (Fraction, float, mpmath.mpf)):
            out[k] = _num(v, cfg)
        elif isinstance(v, EpSeq):
            out[k] = str(v)
        else:
            out[k] = v
    return out


def _emit_records(records: list[dict], cfg: RunConfig, default: str = "json-lines") -> str:
    fmt = cfg.format or default
    if fmt == "json-lines":
        return "".join(json.dumps(r, sort_keys=False) + "\n" for r in records)
    if fmt == "csv":
        if not records:
            return ""
        cols = []
        for r in records:
            cols += [k for k in r if k not in cols]
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        for r in records:
            w.writerow(r)
        return buf.getvalue()
    raise InvalidInput(f"format {fmt!r} is not available for this command")


def _write(text: str, cfg: RunConfig) -> None:
    if cfg.output and cfg.output != "-":
        with open(cfg.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _point_coding(args, p) -> EpSeq:
    if getattr(args, "coding", None):
        return EpSeq.parse(args.coding)
    if getattr(args, "x", None) is not None:
        return coding.pi_inverse(args.x, p)
    if getattr(args, "t", None) is not None:
        return coding.delta(args.t, p)
    raise InvalidInput("give a point with --coding, --x or --t")


# -- commands -----------------------------------------------------------------------


def cmd_constants(args, cfg: RunConfig) -> list[dict]:
    p = cfg.params()
    lo, up = density.almost_sure_densities(p)
    q_kl, q_lo, q_hi = expansions.komornik_loreti(256, cfg.precision)
    tkl_lo, tkl_hi = expansions.t_kl_bracket(p, 128)
    return [
        _record(cfg, name="s", value=p.s, provenance="log 2 / -log rho"),
        _record(cfg, name="t_G", value=p.t_G, provenance="pi((01)^inf) = rho/(1+rho), exact"),
        _record(cfg, name="t_KL", value=p.mp((tkl_lo + tkl_hi) / 2), lower=p.mp(tkl_lo),
                upper=p.mp(tkl_hi), provenance="pi of reflected Thue-Morse tail, 128-digit bracket"),
        _record(cfg, name="q_G", value=expansions.golden_ratio(cfg.precision),
                provenance="base with alpha(q) = (10)^inf"),
        _record(cfg, name="q_KL", value=q_kl, lower=q_lo, upper=q_hi,
                provenance="Thue-Morse prefix bracket, 256 digits"),
        _record(cfg, name="d_lower", value=lo, provenance="lower density at tau = 0"),
        _record(cfg, name="d_upper", value=up, provenance="upper density at tau = 0"),
    ]


def cmd_density(args, cfg: RunConfig) -> list[dict]:
    p = cfg.params()
    pt = coding.CantorPoint.from_coding(_point_coding(args, p), p)
    dv = density.density_pair(pt, p)
    return [_record(cfg, coding=pt.coding, x=pt.value, tau=dv.tau, lower=dv.lower,
                    upper=dv.upper, endpoint_case=dv.endpoint_case)]


def cmd_tau(args, cfg: RunConfig) -> list[dict]:
    p = cfg.params()
    if args.numeric:
        x = args.x if args.x is not None else coding.pi(_point_coding(args, p), p)
        est = coding.tau_numeric(x, p, n_iters=args.numeric)
        return [_record(cfg, x=coding.as_fraction(x), value=est.value, iterations=est.iterations,
                        certified=False, note=est.note)]
    c = _point_coding(args, p)
    return [_record(cfg, coding=c, value=coding.tau_exact(c, p), certified=True)]


def cmd_gamma(args, cfg: RunConfig) -> list[dict]:
    p = cfg.params()
    if args.gamma_cmd == "enumerate":
        rows = []
        for seq, cls in coding.enumerate_gamma_periodic(args.max_period, p):
            rows.append(_record(cfg, coding=seq, t=coding.pi(seq, p), kind=cls.kind.value,
                                witness=cls.witness))
        return rows
    c = _point_coding(args, p)
    if args.gamma_cmd == "check":
        return [_record(cfg, coding=c, value=coding.in_gamma(c, p))]
    cls = coding.classify_gamma(c, p)
    return [_record(cfg, coding=c, kind=cls.kind.value, witness=cls.witness)]


def cmd_dim(args, cfg: RunConfig) -> list[dict]:
    p = cfg.params()
    if args.dim_cmd == "survivor":
        t = args.t if args.t is not None else coding.pi(_point_coding(args, p), p)
        res = entropy.dim_survivor(t, p, tol=cfg.tol)
        return [_record(cfg, t=coding.as_fraction(t), value=res.value, lower=res.lower_witness,
                        upper=res.upper_bound, block_len=res.block_len_used, converged=res.converged)]
    c = _point_coding(args, p)
    pt = coding.CantorPoint.from_coding(c, p)
    res = atlas_mod.level_set_dimension(pt, p, max_len=cfg.max_word_len)
    return [_record(cfg, t=pt.value, value=res.dimension, kind=res.kind.value, word=res.word,
                    t_hat=res.t_hat.value if res.t_hat else None,
                    depth_certified=res.depth_certified, converged=True)]


def cmd_atlas(args, cfg: RunConfig) -> list[dict]:
    p = cfg.params()
    return [
        {"word": r.word, "t_left": str(r.t_left), "t_right": str(r.t_right),
         "psi": _num(r.psi, cfg), "nesting_depth": r.nesting_depth}
        for r in atlas_mod.atlas_rows(cfg.max_word_len, p)
    ]


def cmd_oracle(args, cfg: RunConfig) -> list[dict]:
    p = cfg.params()
    if args.oracle_cmd == "blocks":
        sys_ = entropy.SandwichSystem(EpSeq.parse(args.coding))
        return [_record(cfg, coding=sys_.lower, n=n, count=entropy.count_blocks(sys_, n))
                for n in range(args.n_min, args.n + 1)]
    lo, hi = density.ball_measure(args.x, args.r, p, depth=args.depth)
    return [_record(cfg, x=coding.as_fraction(args.x), r=coding.as_fraction(args.r),
                    lower=lo, upper=hi, certified=True)]


def cmd_staircase(args, cfg: RunConfig) -> str:
    p = cfg.params()
    segs = stair_mod.staircase(p, cfg.max_word_len)
    segs = stair_mod.filter_range(segs, args.t_min, args.t_max)
    fmt = cfg.format or "csv"
    if fmt == "csv":
        return stair_mod.to_csv(segs)
    if fmt == "svg":
        return stair_mod.to_svg(segs, p)
    if fmt == "json-lines":
        return "".join(
            json.dumps({"t_left": str(s.t_left), "t_right": str(s.t_right),
                        "psi": stair_mod.format_psi(s.psi), "word": s.word,
                        "converged": s.converged}) + "\n"
            for s in segs
        )
    raise InvalidInput(f"unknown format {fmt!r}")


def cmd_monotone(args, cfg: RunConfig) -> tuple[str, int]:
    """Check that psi never increases along a staircase CSV."""
    if args.csv_path == "-":
        text = sys.stdin.read()
    else:
        with open(args.csv_path, encoding="utf-8") as fh:
            text = fh.read()
    try:
        segs = stair_mod.read_csv(text)
    except (KeyError, ValueError, ZeroDivisionError) as exc:
        raise InvalidInput(f"not a staircase CSV: {exc}") from exc
    bad = stair_mod.monotone_violations(segs)
    rec = {"rows": len(segs), "violations": len(bad), "value": not bad}
    return json.dumps(rec) + "\n", EXIT_OK if not bad else EXIT_DOMAIN


# -- parser -------------------------------------------------------------------------


def _rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--rho", type=_rational, default=argparse.SUPPRESS, help="contraction ratio in (0, 1/3]")
    common.add_argument("--precision", type=int, default=argparse.SUPPRESS, help="decimal digits (>= 20)")
    common.add_argument("--tol", type=float, default=argparse.SUPPRESS)
    common.add_argument("--max-word-len", dest="max_word_len", type=int, default=argparse.SUPPRESS)
    common.add_argument("--out", default=argparse.SUPPRESS, help="output path (default stdout)")
    common.add_argument("--format", choices=["csv", "json-lines", "svg"], default=argparse.SUPPRESS)
    common.add_argument("--config", default=argparse.SUPPRESS, help="file of key=value lines; flags win")

    point = argparse.ArgumentParser(add_help=False)
    point.add_argument("--coding", help='eventually periodic coding, e.g. "0(01)"')
    point.add_argument("--x", type=_rational, help="rational point of the Cantor set")

    parser = argparse.ArgumentParser(prog="cantor-density", parents=[common],
                                     description="Density spectrum of Cantor measures.")
    sub = parser.add_subparsers(dest="cmd", required=True)

    sub.add_parser("constants", parents=[common], help="s, t_G, t_KL, q_G, q_KL, d_*, d^*")

    sp = sub.add_parser("staircase", parents=[common], help="plateaus of psi as CSV or SVG")
    sp.add_argument("--t-min", type=_rational, default=None)
    sp.add_argument("--t-max", type=_rational, default=None)

    sp = sub.add_parser("monotone", parents=[common], help="check a staircase CSV for increasing psi")
    sp.add_argument("csv_path", help="CSV file from the staircase command, or - for stdin")

    sub.add_parser("density", parents=[common, point], help="lower and upper densities at a point")

    sp = sub.add_parser("tau", parents=[common, point], help="exact or estimated tau")
    sp.add_argument("--numeric", type=int, default=0, metavar="N",
                    help="estimate from N iterates of T instead")

    sp = sub.add_parser("gamma", parents=[common], help="spectrum queries")
    gsub = sp.add_subparsers(dest="gamma_cmd", required=True)
    gsub.add_parser("check", parents=[common, point])
    gsub.add_parser("classify", parents=[common, point])
    g = gsub.add_parser("enumerate", parents=[common])
    g.add_argument("--max-period", type=int, default=12)

    sp = sub.add_parser("dim", parents=[common], help="survivor-set and level-set dimensions")
    dsub = sp.add_subparsers(dest="dim_cmd", required=True)
    for name in ("survivor", "levelset"):
        d = dsub.add_parser(name, parents=[common, point])
        d.add_argument("--t", type=_rational, default=None)

    sub.add_parser("atlas", parents=[common], help="fundamental intervals as CSV")

    sp = sub.add_parser("oracle", parents=[common], help="brute-force oracles")
    osub = sp.add_subparsers(dest="oracle_cmd", required=True)
    o = osub.add_parser("blocks", parents=[common])
    o.add_argument("--coding", required=True)
    o.add_argument("--n", type=int, required=True)
    o.add_argument("--n-min", type=int, default=None)
    o = osub.add_parser("ballmeasure", parents=[common])
    o.add_argument("--x", type=_rational, required=True)
    o.add_argument("--r", type=_rational, required=True)
    o.add_argument("--depth", type=int, default=30)
    return parser


_DISPATCH = {
    "constants": cmd_constants,
    "density": cmd_density,
    "tau": cmd_tau,
    "gamma": cmd_gamma,
    "dim": cmd_dim,
    "atlas": cmd_atlas,
    "oracle": cmd_oracle,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = build_config(args)
        if args.cmd == "staircase":
            text = cmd_staircase(args, cfg)
        elif args.cmd == "monotone":
            text, code = cmd_monotone(args, cfg)
            _write(text, cfg)
            return code
        else:
            if args.cmd == "oracle" and args.oracle_cmd == "blocks" and args.n_min is None:
                args.n_min = args.n
            records = _DISPATCH[args.cmd](args, cfg)
            default = "csv" if args.cmd == "atlas" else "json-lines"
            text = _emit_records(records, cfg, default)
        _write(text, cfg)
    except InvalidInput as exc:
        print(f"error: InvalidInput: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ResourceLimit as exc:
        print(f"error: ResourceLimit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except CantorDensityError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
