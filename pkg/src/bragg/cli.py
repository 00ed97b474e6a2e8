"""Command-line entry point.

Exit codes: 0 success, 1 a verification check failed, 2 configuration or
domain error (including usage errors), 3 capacity exceeded.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .autocorr import autocorrelation
from .comb import WeightedComb, read_comb, restrict, write_comb
from .config import RunConfig, load_config
from .cps import (
    CPScheme,
    build_scheme,
    build_weight,
    dual_candidates,
    dual_window,
    generate_model_comb,
    preset,
)
from .errors import CapacityError, DomainError
from .exactnum import format_quad
from .plot import read_spectrum_csv, render_svg
from .spectrum import SpectrumEstimate, bragg_scan, decompose, grid_candidates, scan_with_refinement
from .verify import THEOREMS, run_suite

EXIT_OK, EXIT_FAIL, EXIT_DOMAIN, EXIT_CAPACITY = 0, 1, 2, 3
PRESET_BY_RADICAND = {0: "integer", 2: "zroot2", 5: "fibonacci"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(message)


class _UsageError(Exception):
    pass


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat 'section.key = value' file")
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override one config key (repeatable)")
    common.add_argument("--sizes", type=int, nargs="+", help="van Hove sizes n")
    common.add_argument("--L0", type=float, help="base half-length of A_n")
    common.add_argument("--seed", type=int)
    common.add_argument("--out-dir", help="directory for default output paths")
    common.add_argument("--timing", action="store_true", help="record runtimes (breaks byte equality)")

    scheme = argparse.ArgumentParser(add_help=False)
    scheme.add_argument("--preset", choices=("integer", "zroot2", "fibonacci"))
    scheme.add_argument("--scheme", help="scheme file (preset | m | basis.v1 | basis.v2 | window.lo | window.hi)")

    freq = argparse.ArgumentParser(add_help=False)
    freq.add_argument("--freq", type=float, nargs=2, metavar=("LO", "HI"))
    freq.add_argument("--source", choices=("dual", "grid", "refined"))
    freq.add_argument("--coeff-bound", type=int)
    freq.add_argument("--internal-max", type=float)
    freq.add_argument("--epsilon", type=float)
    freq.add_argument("--delta-rel", type=float)

    p = _Parser(prog="bragg", description="Autocorrelation and diffraction of weighted Dirac combs.")
    p.add_argument("--version", action="version", version=f"bragg {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", parents=[common, scheme], help="write a model comb file")
    g.add_argument("--weight", choices=("indicator", "tent", "autoconv_step"))
    g.add_argument("--halfwidth", type=float)
    g.add_argument("--height", type=float)
    g.add_argument("--interval", type=float, nargs=2, metavar=("A", "B"))
    g.add_argument("--out")

    a = sub.add_parser("autocorr", parents=[common], help="autocorrelation CSV of a comb file")
    a.add_argument("comb")
    a.add_argument("--radius", type=float)
    a.add_argument("--n", type=int, help="patch size (default: largest)")
    a.add_argument("--out")

    d = sub.add_parser("diffract", parents=[common, scheme, freq], help="spectrum CSV and JSON report")
    d.add_argument("comb")
    d.add_argument("--out")

    e = sub.add_parser("decompose", parents=[common, scheme, freq], help="gamma_S / gamma_0 CSV")
    e.add_argument("comb")
    e.add_argument("--radius", type=float)
    e.add_argument("--out")

    v = sub.add_parser("verify", parents=[common, scheme], help="run verification suites")
    v.add_argument("--theorem", choices=THEOREMS + ("all",), default="all")
    v.add_argument("--out")

    s = sub.add_parser("plot", parents=[common], help="SVG stick plot of a spectrum CSV")
    s.add_argument("spectrum")
    s.add_argument("--title", default="")
    s.add_argument("--out")
    return p


def _overrides(args) -> dict[str, str]:
    out: dict[str, str] = {}
    for item in args.set:
        if "=" not in item:
            raise DomainError(f"--set expects KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    flag_keys = {
        "sizes": "vanhove.sizes", "L0": "vanhove.L0", "seed": "run.seed", "out_dir": "output.dir",
        "source": "freq.source", "coeff_bound": "freq.coeff_bound", "internal_max": "freq.internal_max",
        "epsilon": "thresholds.epsilon", "delta_rel": "thresholds.delta_rel", "radius": "run.radius",
        "preset": "scheme.preset", "weight": "scheme.weight.kind", "halfwidth": "scheme.weight.halfwidth",
        "height": "scheme.weight.height",
    }
    for attr, key in flag_keys.items():
        val = getattr(args, attr, None)
        if val is None:
            continue
        out[key] = " ".join(str(t) for t in val) if isinstance(val, list) else str(val)
    if getattr(args, "scheme", None):
        out["scheme.path"] = str(Path(args.scheme).resolve())
    if getattr(args, "freq", None):
        out["freq.lo"], out["freq.hi"] = (repr(float(t)) for t in args.freq)
    return out


def _header(cfg: RunConfig, command: str) -> dict:
    return {"config_hash": cfg.hash(), "command": command}


def _out_path(cfg: RunConfig, given: str | None, default: str) -> Path:
    path = Path(given) if given else Path(cfg.output_dir) / default
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    return path


def _write(path: Path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _comment_block(header: dict) -> str:
    return "".join(f"# {k} {v}\n" for k, v in header.items())


def _scheme_for(cfg: RunConfig, comb: WeightedComb | None = None) -> CPScheme:
    if cfg.scheme:
        s = build_scheme(cfg.scheme)
        if comb is not None and comb.m != 0 and (s.degenerate or s.m != comb.m):
            raise DomainError(f"comb radicand {comb.m} does not match scheme {s.name}")
        return s
    if comb is None:
        return preset("zroot2")
    name = PRESET_BY_RADICAND.get(comb.m)
    if name is None:
        raise DomainError(f"no preset for radicand {comb.m}; pass --scheme")
    return preset(name)


def _threads() -> int:
    raw = os.environ.get("BRAGG_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        raise DomainError(f"BRAGG_THREADS must be an integer, got {raw!r}") from None
    if n < 0:
        raise DomainError("BRAGG_THREADS must be >= 0")
    return n if n > 0 else (os.cpu_count() or 1)


# -- subcommands ---------------------------------------------------------------------

def _cmd_generate(args, cfg: RunConfig) -> int:
    s = _scheme_for(cfg)
    h = build_weight(cfg.scheme, s)
    interval = tuple(args.interval) if args.interval else cfg.spec.largest
    comb = generate_model_comb(s, h, interval)
    path = _out_path(cfg, args.out, "comb.tsv")
    write_comb(comb, path, header=_header(cfg, "generate"))
    print(f"{len(comb)} points -> {path}")
    return EXIT_OK


def _load(path) -> WeightedComb:
    comb = read_comb(path)
    if len(comb) == 0:
        raise DomainError(f"{path}: comb is empty")
    return comb


def _cmd_autocorr(args, cfg: RunConfig) -> int:
    comb = _load(args.comb)
    n = args.n or cfg.sizes[-1]
    a = autocorrelation(comb, cfg.spec, n, cfg.radius)
    lines = [_comment_block(_header(cfg, "autocorr")), "z_exact,z_float,value_real,value_imag,n,volume\n"]
    for z, x, v in zip(a.coords, a.x, a.values):
        v = complex(v)
        lines.append(f"{format_quad(z)},{float(x)!r},{v.real!r},{v.imag!r},{a.n},{a.volume!r}\n")
    path = _out_path(cfg, args.out, "autocorrelation.csv")
    _write(path, "".join(lines))
    print(f"{len(a)} differences -> {path}")
    return EXIT_OK


def _spectrum(comb: WeightedComb, cfg: RunConfig) -> SpectrumEstimate:
    kw = dict(epsilon=cfg.epsilon, delta_rel=cfg.delta_rel, eps_factor=cfg.eps_factor)
    window = cfg.freq_window
    if cfg.candidate_source == "grid":
        return bragg_scan(comb, grid_candidates(comb, window), cfg.spec, freq_window=window,
                          provenance="grid", **kw)
    if cfg.candidate_source == "refined":
        return scan_with_refinement(comb, cfg.spec, window, eps_factor=cfg.eps_factor, epsilon=cfg.epsilon)
    s = _scheme_for(cfg, comb)
    if cfg.internal_max is not None:
        cands = dual_window(s, window[1], cfg.internal_max, kmin=window[0])
        meta = {"internal_max": cfg.internal_max}
    else:
        cands = [k for k in dual_candidates(s, cfg.coeff_bound) if window[0] <= float(k) <= window[1]]
        meta = {"coeff_bound": cfg.coeff_bound}
    if not cands:
        raise DomainError("no dual candidates in the frequency window")
    return bragg_scan(comb, cands, cfg.spec, freq_window=window, meta=meta, **kw)


def _cmd_diffract(args, cfg: RunConfig) -> int:
    comb = _load(args.comb)
    se = _spectrum(comb, cfg)
    header = _header(cfg, "diffract")
    cols = ",".join(f"I_n{n}" for n in cfg.sizes)
    lines = [_comment_block(header), f"k_exact,k_float,{cols},class,I_inf\n"]
    for e in se.entries:
        ints = ",".join(repr(v) for v in e.intensities)
        inf = "" if e.i_inf is None else repr(e.i_inf)
        lines.append(f"{e.k_text},{e.k_float!r},{ints},{e.label},{inf}\n")
    path = _out_path(cfg, args.out, "spectrum.csv")
    _write(path, "".join(lines))
    report = {
        **header,
        "provenance": se.provenance,
        "candidates": len(se.entries),
        "bragg_count": len(se.bragg()),
        "bragg_mass": se.bragg_mass(),
        "max_gap": se.max_gap,
        "epsilon": se.epsilon,
        "eps_factor": cfg.eps_factor,
        "delta_rel": se.delta_rel,
        "freq_window": list(se.freq_window),
        "sizes": list(cfg.sizes),
        "meta": se.meta,
    }
    _write(path.with_suffix(".json"), json.dumps(report, indent=2) + "\n")
    print(f"{len(se.bragg())} bragg of {len(se.entries)} candidates -> {path}")
    return EXIT_OK


def _cmd_decompose(args, cfg: RunConfig) -> int:
    comb = _load(args.comb)
    se = _spectrum(comb, cfg)
    a = autocorrelation(comb, cfg.spec, cfg.sizes[-1], cfg.radius)
    d = decompose(a, se)
    lines = [_comment_block(_header(cfg, "decompose")),
             f"# residual {d.residual()!r}\n",
             "z_exact,z_float,gamma_S_real,gamma_S_imag,gamma_0_real,gamma_0_imag\n"]
    for z, x, gs, g0 in zip(d.gamma_s.coords, d.gamma_s.x, d.gamma_s.values, d.gamma_0.values):
        gs, g0 = complex(gs), complex(g0)
        lines.append(f"{format_quad(z)},{float(x)!r},{gs.real!r},{gs.imag!r},{g0.real!r},{g0.imag!r}\n")
    path = _out_path(cfg, args.out, "decomposition.csv")
    _write(path, "".join(lines))
    print(f"residual {d.residual():.3g} -> {path}")
    return EXIT_OK


def _cmd_verify(args, cfg: RunConfig) -> int:
    scheme = _scheme_for(cfg)
    reports = run_suite(args.theorem, seed=cfg.seed, spec=cfg.spec, scheme=scheme, threads=_threads())
    doc = {
        **_header(cfg, f"verify --theorem {args.theorem}"),
        "seed": cfg.seed,
        "pass": all(r.passed for r in reports),
        "reports": [r.as_dict(timing=args.timing) for r in reports],
    }
    path = _out_path(cfg, args.out, f"verify_{args.theorem}.json")
    _write(path, json.dumps(doc, indent=2) + "\n")
    for r in reports:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.theorem:8s} {r.scenario}")
    return EXIT_OK if doc["pass"] else EXIT_FAIL


def _cmd_plot(args, cfg: RunConfig) -> int:
    try:
        text = Path(args.spectrum).read_text(encoding="utf-8")
    except OSError as exc:
        raise DomainError(f"cannot read {args.spectrum}: {exc.strerror}") from None
    svg = render_svg(read_spectrum_csv(text), args.title, f"config_hash {cfg.hash()}")
    path = _out_path(cfg, args.out, Path(args.spectrum).with_suffix(".svg").name)
    _write(path, svg)
    print(f"-> {path}")
    return EXIT_OK


_COMMANDS = {
    "generate": _cmd_generate,
    "autocorr": _cmd_autocorr,
    "diffract": _cmd_diffract,
    "decompose": _cmd_decompose,
    "verify": _cmd_verify,
    "plot": _cmd_plot,
}


def run(argv: list[str] | None = None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"bragg: error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    try:
        cfg = load_config(args.config, _overrides(args))
        return _COMMANDS[args.command](args, cfg)
    except CapacityError as exc:
        print(f"bragg: capacity exceeded: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (DomainError, ValueError, OSError) as exc:
        print(f"bragg: error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


def main() -> None:
    np.seterr(all="ignore")
    sys.exit(run())


if __name__ == "__main__":
    main()
