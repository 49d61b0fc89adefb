"""Command-line front end.

    lilnorm VERB [--config FILE] [--out DIR] [--seed N] [--format csv,json]
                 [--grid-decades N] [--tol X] [--some.key VALUE ...]

Verbs: analyze, check-conditions, klass-seq, alpha0, simulate,
construct-normalizer. Exit codes: 0 conclusive, 2 config error,
3 inconclusive verdict, 4 numeric non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import platform
import re
import sys
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .alpha0 import NormSeqSpec, SigmaPolicy, TruncationError, alpha0_estimate
from .conditions import analyze, corollary_check
from .distmodel import Gaussian, Rademacher, SymPareto, TailTable, feller_pruitt
from .klass import InversionError, KlassEval, klass_sequence
from .logscale import LL
from .mcsim import SimConfig, cluster_histogram, run_sim, write_histogram_csv
from .normalizer import (SLOWFN_HEADER, FixedPointError, Normalizer, SlowFunction,
                         construct_psi_from_phi, fp_phi2_closed_form_log_psi)

EXIT_OK, EXIT_CONFIG, EXIT_INCONCLUSIVE, EXIT_NONCONVERGENCE = 0, 2, 3, 4
VERBS = ("analyze", "check-conditions", "klass-seq", "alpha0", "simulate", "construct-normalizer")


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None, source: str = "config"):
        where = f"{source}:{line}: " if line else f"{source}: "
        super().__init__(where + message)


class Config:
    """Parsed config plus the raw text, so errors can name a line."""

    def __init__(self, data: dict, text: str = "", source: str = "config"):
        self.data = data
        self.text = text
        self.source = source

    def line_of(self, key: str) -> int | None:
        for i, ln in enumerate(self.text.splitlines(), start=1):
            if re.search(r'"%s"\s*:' % re.escape(key), ln):
                return i
        return None

    def error(self, message: str, key: str | None = None) -> ConfigError:
        return ConfigError(message, self.line_of(key) if key else None, self.source)

    def block(self, name: str, required: bool = True) -> dict:
        val = self.data.get(name)
        if val is None:
            if required:
                raise self.error(f"missing {name!r} block")
            return {}
        if not isinstance(val, dict):
            raise self.error(f"{name!r} must be an object", name)
        return val


def load_config(path: str | None) -> Config:
    if path is None:
        return Config({}, "", "<flags>")
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}", None, str(p)) from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(exc.msg, exc.lineno, str(p)) from exc
    if not isinstance(data, dict):
        raise ConfigError("top level must be an object", 1, str(p))
    if "manifest" in data and "config" in data:
        # re-running a manifest replays its config echo
        return Config(data["config"], text, str(p))
    return Config(data, text, str(p))


def _parse_value(raw: str):
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        return raw


def apply_overrides(cfg: Config, pairs: list[str]) -> None:
    """``--a.b.c VALUE`` sets ``cfg.data[a][b][c]``; values parse as JSON when they can."""
    i = 0
    while i < len(pairs):
        key = pairs[i]
        if not key.startswith("--") or len(key) == 2:
            raise ConfigError(f"unexpected argument {key!r}", None, "<flags>")
        key = key[2:]
        if "=" in key:
            key, raw = key.split("=", 1)
            i += 1
        else:
            if i + 1 >= len(pairs):
                raise ConfigError(f"flag --{key} needs a value", None, "<flags>")
            raw = pairs[i + 1]
            i += 2
        node = cfg.data
        parts = key.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigError(f"--{key}: {part!r} is not an object", None, "<flags>")
        node[parts[-1]] = _parse_value(raw)


# -- building blocks --------------------------------------------------------


def _num(cfg: Config, block: dict, key: str, default=None, positive: bool = False):
    val = block.get(key, default)
    if val is None:
        raise cfg.error(f"missing {key!r}", key)
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise cfg.error(f"{key!r} must be a number", key)
    if positive and not val > 0:
        raise cfg.error(f"{key!r} must be positive", key)
    return val


def build_dist(cfg: Config):
    b = cfg.block("distribution")
    kind = b.get("kind")
    try:
        if kind == "rademacher":
            return Rademacher(float(_num(cfg, b, "amplitude", 1.0, True)))
        if kind == "gaussian":
            return Gaussian(float(_num(cfg, b, "sigma", 1.0, True)))
        if kind == "feller-pruitt":
            return feller_pruitt()
        if kind == "sym-pareto":
            return SymPareto(beta=float(_num(cfg, b, "beta", None, True)),
                             xmin=float(_num(cfg, b, "xmin", 1.0, True)))
        if kind == "tail-table":
            if "path" in b:
                return TailTable.from_file(b["path"])
            if "points" in b:
                return TailTable(tuple(tuple(p) for p in b["points"]))
            raise cfg.error("tail-table needs 'path' or 'points'", "kind")
    except (ValueError, OSError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise cfg.error(str(exc), "distribution") from exc
    raise cfg.error(f"unknown distribution kind {kind!r}", "kind" if kind else "distribution")


def build_slow(cfg: Config, b: dict, key: str = "normalizer") -> SlowFunction:
    fam = b.get("family")
    try:
        if fam == "loglog-power":
            return SlowFunction.loglog_power(float(_num(cfg, b, "p")))
        if fam == "log-power":
            return SlowFunction.log_power(float(_num(cfg, b, "r")))
        if fam == "stretched":
            return SlowFunction.stretched(float(_num(cfg, b, "q")))
        if fam in ("phi2", "feller-pruitt-phi2"):
            return SlowFunction.phi2()
        if fam == "constant":
            return SlowFunction.constant(float(_num(cfg, b, "c", None, True)))
        if fam == "table":
            if "path" not in b:
                raise cfg.error("table normalizer needs 'path'", "family")
            return SlowFunction.from_file(b["path"])
    except ConfigError:
        raise
    except (ValueError, OSError) as exc:
        raise cfg.error(str(exc), key) from exc
    raise cfg.error(f"unknown slow-function family {fam!r}", "family" if fam else key)


def build_normalizer(cfg: Config, dist, tol: float) -> Normalizer:
    b = cfg.block("normalizer")
    if b.get("family") == "construct-from-phi":
        phi = build_slow(cfg, b.get("phi") or {}, "phi")
        nm, _ = construct_psi_from_phi(dist, phi, tol=tol)
        return nm
    if b.get("family") in ("gamma", "formula", "explicit"):
        raise cfg.error(f"this verb needs Psi(x) = sqrt(x h(x)); {b['family']!r} gives none",
                        "family")
    return Normalizer(build_slow(cfg, b))


def build_sequence(cfg: Config, dist, tol: float, klass=None) -> NormSeqSpec:
    b = cfg.block("normalizer")
    fam = b.get("family")
    if fam == "gamma":
        return NormSeqSpec.gamma(dist, klass)
    if fam == "formula":
        try:
            return NormSeqSpec.formula(str(b.get("name")), float(_num(cfg, b, "sigma", 1.0, True)))
        except ValueError as exc:
            raise cfg.error(str(exc), "name") from exc
    if fam == "explicit":
        try:
            rows = np.loadtxt(b["path"], comments="#", delimiter=None, ndmin=2) \
                if "path" in b else np.asarray(b.get("table"), dtype=float)
            return NormSeqSpec.explicit(rows[:, 0], rows[:, 1])
        except (ValueError, OSError, KeyError, IndexError, TypeError) as exc:
            raise cfg.error(f"explicit sequence: {exc}", "family") from exc
    seq = NormSeqSpec.psi(build_normalizer(cfg, dist, tol))
    factor = b.get("scale")
    if factor is not None:
        seq = NormSeqSpec.scaled(seq, float(_num(cfg, b, "scale", None, True)))
    return seq


def grid_from(cfg: Config, decades):
    if decades is None:
        return None
    if isinstance(decades, bool) or not isinstance(decades, int) or decades < 20:
        raise cfg.error("grid decades must be an integer >= 20", "decades")
    return np.arange(1, decades + 1) * math.log(10.0)


# -- output -------------------------------------------------------------------


def _clean(obj):
    """JSON-safe copy: non-finite floats become strings, arrays become lists."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if math.isfinite(x):
            return x
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    if isinstance(obj, np.integer):
        return int(obj)
    if hasattr(obj, "value") and hasattr(obj, "name"):  # enum flags
        return obj.name.lower()
    return obj


class Writer:
    def __init__(self, out: Path, formats: set[str]):
        self.out = out
        self.formats = formats
        self.files: list[str] = []
        out.mkdir(parents=True, exist_ok=True)

    def json(self, name: str, obj) -> None:
        if "json" in self.formats:
            (self.out / name).write_text(json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n",
                                         encoding="utf-8")
            self.files.append(name)

    def csv(self, name: str, header, rows, seed=None) -> None:
        if "csv" not in self.formats:
            return
        with open(self.out / name, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            if seed is not None:
                w.writerow(["# seed", seed])
            w.writerow(header)
            for row in rows:
                w.writerow([_cell(v) for v in row])
        self.files.append(name)

    def raw(self, name: str, text: str) -> None:
        (self.out / name).write_text(text, encoding="utf-8")
        self.files.append(name)


def _cell(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def write_manifest(w: Writer, verb: str, cfg: Config, seed) -> None:
    # the output location is not an input: leave it out so a replay into
    # another directory writes the same bytes
    echo = dict(cfg.data)
    if isinstance(echo.get("output"), dict):
        echo["output"] = {k: v for k, v in echo["output"].items() if k != "dir"}
        if not echo["output"]:
            del echo["output"]
    manifest = {
        "manifest": 1,
        "verb": verb,
        "seed": seed,
        "config": echo,
        "versions": {"lilnorm": __version__, "python": platform.python_version(),
                     "numpy": np.__version__, "scipy": scipy.__version__},
        "outputs": sorted(w.files),
    }
    (w.out / "manifest.json").write_text(json.dumps(_clean(manifest), indent=2, sort_keys=True)
                                         + "\n", encoding="utf-8")


# -- verbs ----------------------------------------------------------------------


def run_analyze(cfg, w, opts) -> int:
    dist = build_dist(cfg)
    nm = build_normalizer(cfg, dist, opts["tol"])
    a = cfg.block("analysis", required=False)
    q = a.get("q")
    try:
        rep = analyze(dist, nm, q=q, log_grid=opts["grid"])
    except ValueError as exc:
        raise cfg.error(str(exc), "analysis") from exc
    w.json("condition_report.json", rep.to_json())
    w.csv("evidence.csv", ["log10_x", "H_functional"], rep.estimate.table())
    return EXIT_INCONCLUSIVE if rep.verdict == "inconclusive" else EXIT_OK


def run_check_conditions(cfg, w, opts) -> int:
    dist = build_dist(cfg)
    a = cfg.block("analysis")
    family = a.get("family")
    if family not in ("p", "r", "q"):
        raise cfg.error("analysis.family must be one of 'p', 'r', 'q'", "family")
    param = float(_num(cfg, a, "param"))
    try:
        res = corollary_check(dist, family, param, opts["grid"])
    except ValueError as exc:
        raise cfg.error(str(exc), "param") from exc
    w.json("corollary_report.json", res.to_json())
    w.csv("evidence.csv", ["log10_x", "functional"], res.estimate.table())
    return EXIT_INCONCLUSIVE if res.moment.verdict == "inconclusive" else EXIT_OK


def run_klass_seq(cfg, w, opts) -> int:
    dist = build_dist(cfg)
    a = cfg.block("analysis", required=False)
    ns = a.get("n")
    if not isinstance(ns, list) or not ns:
        raise cfg.error("analysis.n must be a nonempty list of n >= 1", "n" if "n" in a else None)
    for n in ns:
        if isinstance(n, bool) or not isinstance(n, (int, float)) or not n >= 1 \
                or not math.isfinite(n):
            raise cfg.error(f"invalid n {n!r}", "n")
    kl = KlassEval(dist, rtol=max(opts["tol"], 1e-12))
    seq = None
    if "normalizer" in cfg.data:
        seq = build_sequence(cfg, dist, opts["tol"], kl)
    rows = []
    for n, g, k in klass_sequence(kl, [float(n) for n in ns]):
        row = [n, g, k]
        if seq is not None:
            an = seq.c(n)
            row += [an, an / g]
        rows.append(row)
    header = ["n", "gamma_n", "K_n_over_LLn"] + (["a_n", "a_n_over_gamma_n"] if seq else [])
    w.csv("klass_seq.csv", header, rows)
    w.json("klass_seq.json", {"columns": header, "rows": rows})
    return EXIT_OK


def run_alpha0(cfg, w, opts) -> int:
    dist = build_dist(cfg)
    kl = KlassEval(dist)
    c = build_sequence(cfg, dist, opts["tol"], kl)
    a = cfg.block("analysis", required=False)
    s = a.get("sigma", {"kind": "delta", "delta": 1.0})
    try:
        if s.get("kind") == "delta":
            policy = SigmaPolicy.of_delta(float(s.get("delta", 1.0)))
        elif s.get("kind") == "constant":
            policy = SigmaPolicy.of_constant(float(s.get("value", 1.0)))
        elif s.get("kind") == "dseq":
            sub = Config({"normalizer": s.get("d") or {}}, cfg.text, cfg.source)
            policy = SigmaPolicy.of_dseq(build_sequence(sub, dist, opts["tol"], kl))
        else:
            raise cfg.error(f"unknown sigma policy {s.get('kind')!r}", "sigma")
        nmax = float(_num(cfg, a, "nmax", 1e16, True))
        rep = alpha0_estimate(dist, c, policy, nmax=nmax, klass=kl, far=a.get("far"))
    except ConfigError:
        raise
    except (ValueError, TruncationError) as exc:
        raise cfg.error(str(exc), "analysis") from exc
    w.json("alpha0_report.json", rep.to_json())
    w.csv("alpha0_blocks.csv", ["alpha", "j", "B_j"], rep.evidence_rows())
    return EXIT_INCONCLUSIVE if rep.flag == "inconclusive" else EXIT_OK


def run_simulate(cfg, w, opts) -> int:
    dist = build_dist(cfg)
    seq = build_sequence(cfg, dist, opts["tol"])
    a = cfg.block("analysis", required=False)
    try:
        sc = SimConfig(dist, seq, n_max=int(_num(cfg, a, "n_max", 10**6)),
                       paths=_num(cfg, a, "paths", 16), seed=int(opts["seed"]),
                       ratio=float(_num(cfg, a, "ratio", 1.2)),
                       first=int(_num(cfg, a, "first", 1000)),
                       summation=str(a.get("summation", "compensated")))
    except ValueError as exc:
        raise cfg.error(str(exc), "analysis") from exc
    res = run_sim(sc)
    bins = int(_num(cfg, a, "bins", 20, True))
    burn = int(_num(cfg, a, "burn_in", 0))
    try:
        hist = cluster_histogram(res, bins, burn)
    except ValueError as exc:
        raise cfg.error(str(exc), "burn_in") from exc
    if "csv" in w.formats:
        res.write_csv(w.out / "paths.csv")
        write_histogram_csv(hist, w.out / "histogram.csv", res.seed)
        w.files += ["paths.csv", "histogram.csv"]
    w.json("simulation.json", {
        "seed": res.seed, "checkpoints": len(res.checkpoints), "path_max": res.path_max,
        "pooled_max": res.pooled_max, "symmetry": hist.symmetry, "occupancy": hist.occupancy,
        "histogram_half_width": hist.m, "samples": hist.samples,
    })
    return EXIT_OK


def run_construct(cfg, w, opts) -> int:
    dist = build_dist(cfg)
    b = cfg.block("normalizer")
    if b.get("family") != "construct-from-phi":
        raise cfg.error("construct-normalizer needs normalizer.family = 'construct-from-phi'",
                        "family")
    phi = build_slow(cfg, b.get("phi") or {}, "phi")
    nm, rep = construct_psi_from_phi(dist, phi, tol=opts["tol"], log_x_grid=opts["grid"])
    decades = range(1, 301) if opts["grid"] is None else range(1, len(opts["grid"]) + 1)
    rows = []
    closed = phi.family == "feller-pruitt-phi2"
    for k in decades:
        u = k * math.log(10.0)
        lp = nm.log_psi_from_log(u)
        lh = float(nm.h.log_value(u))
        row = [f"1e{k}", lp / math.log(10.0), lh]
        if closed:
            row.append(math.exp(lp - fp_phi2_closed_form_log_psi(u)))
        rows.append(row)
    header = ["x", "log10_psi", "log_h"] + (["psi_over_closed_form"] if closed else [])
    w.csv("psi_table.csv", header, rows)
    lines = [SLOWFN_HEADER] + [f"{float(r[0])!r} {math.exp(r[2])!r}" for r in rows if r[2] < 700]
    w.raw("h_table.txt", "\n".join(lines) + "\n")
    w.json("construction_report.json", rep.to_json())
    return EXIT_INCONCLUSIVE if rep.moment_verdict == "inconclusive" else EXIT_OK


RUNNERS = {
    "analyze": run_analyze,
    "check-conditions": run_check_conditions,
    "klass-seq": run_klass_seq,
    "alpha0": run_alpha0,
    "simulate": run_simulate,
    "construct-normalizer": run_construct,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lilnorm", description="LIL normalizer diagnostics.")
    p.add_argument("verb", choices=VERBS)
    p.add_argument("--config", help="JSON config file, or a manifest to replay")
    p.add_argument("--out", help="output directory")
    p.add_argument("--seed", type=int)
    p.add_argument("--format", help="comma list from csv,json")
    p.add_argument("--grid-decades", type=int)
    p.add_argument("--tol", type=float)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args, extra = parser.parse_known_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        cfg = load_config(args.config)
        apply_overrides(cfg, extra)
        out = cfg.block("output", required=False)
        for key, val in (("seed", args.seed), ("tol", args.tol)):
            if val is not None:
                cfg.data[key] = val
        if args.grid_decades is not None:
            cfg.data.setdefault("grid", {})["decades"] = args.grid_decades
        if args.out is not None:
            cfg.data.setdefault("output", {})["dir"] = args.out
        if args.format is not None:
            cfg.data.setdefault("output", {})["formats"] = args.format.split(",")
        out = cfg.block("output", required=False)
        formats = out.get("formats", ["csv", "json"])
        if isinstance(formats, str):
            formats = formats.split(",")
        if not formats or not set(formats) <= {"csv", "json"}:
            raise cfg.error("output formats must be a nonempty subset of csv,json", "formats")
        tol = cfg.data.get("tol", 1e-10)
        if isinstance(tol, bool) or not isinstance(tol, (int, float)) or not tol > 0:
            raise cfg.error("tol must be positive", "tol")
        seed = cfg.data.get("seed", 42)
        if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2**64:
            raise cfg.error("seed must be a 64-bit unsigned integer", "seed")
        grid = grid_from(cfg, (cfg.data.get("grid") or {}).get("decades"))
        opts = {"tol": float(tol), "seed": seed, "grid": grid}
        writer = Writer(Path(out.get("dir", "lilnorm-out")), set(formats))
        code = RUNNERS[args.verb](cfg, writer, opts)
        write_manifest(writer, args.verb, cfg, seed)
        return code
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FixedPointError, InversionError) as exc:
        print(f"non-convergence: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
