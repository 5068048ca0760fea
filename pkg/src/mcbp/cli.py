"""Command-line driver: ``mcbp curvature | experiment | synth | bench``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 pipeline error.

Options can also come from a flat ``key = value`` file passed with
``--config``; flags given on the command line win. The output directory
defaults to ``$MCBP_OUT`` and then to the current directory.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__
from .bench import run_scaling
from .cluster.strategies import MCS_CANDIDATES
from .curvature import mcbp
from .data import GENERATORS, Dataset, load_csv, load_iris, preprocess, write_csv
from .errors import DataParseError, DatasetTooSmallError, DimensionError, MCBPError, ParameterError
from .experiments import STRATEGIES, run_experiment, write_table
from .filter import partition
from .plot import boundary_overlay, curvature_heatmap, raw_scatter

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_PIPELINE = 0, 1, 2, 3
OUT_ENV = "MCBP_OUT"
FORMATS = ("csv", "json", "svg")
BUILTIN = {"iris": load_iris}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _int_list(text: str) -> list[int]:
    """``"0-19"``, ``"5,10,20"`` or a mix such as ``"0-3,7"``; non-negative only."""
    out = []
    try:
        for part in str(text).split(","):
            part = part.strip()
            if not part:
                continue
            if "-" in part:
                lo, hi = part.split("-", 1)
                out.extend(range(int(lo), int(hi) + 1))
            else:
                out.append(int(part))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer list: {text!r}") from None
    if not out:
        raise argparse.ArgumentTypeError(f"empty integer list: {text!r}")
    return out


def _formats(text: str) -> list[str]:
    fmts = [f.strip() for f in str(text).split(",") if f.strip()]
    bad = [f for f in fmts if f not in FORMATS]
    if bad or not fmts:
        raise argparse.ArgumentTypeError(f"formats must be drawn from {FORMATS}, got {text!r}")
    return fmts


def _add_input(p):
    g = p.add_argument_group("input")
    g.add_argument("--input", help="CSV file, or a built-in dataset name (iris)")
    g.add_argument("--generator", choices=sorted(GENERATORS), help="synthetic generator instead of --input")
    g.add_argument("--n", type=int, help="generator sample count")
    g.add_argument("--seed", type=int, help="generator seed")
    g.add_argument("--noise", type=float, help="moons noise sd or noisy-blobs noise fraction")
    g.add_argument("--label-column", help="label column name or index in the CSV")
    g.add_argument("--no-header", action="store_true", help="the CSV has no header row")
    g.add_argument("--drop-missing", action="store_true", help="drop rows with missing cells instead of failing")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mcbp", description="Mean-curvature boundary points and curvature-filtered clustering.")
    parser.add_argument("--version", action="version", version=f"mcbp {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def common(p):
        p.add_argument("--config", help="flat key = value file; command-line flags override it")
        p.add_argument("--out", help=f"output directory (default ${OUT_ENV} or .)")

    cur = sub.add_parser("curvature", help="score every sample and flag boundary points")
    common(cur)
    _add_input(cur)
    cur.add_argument("--k", type=int, help="neighbourhood size (default floor(log2 n))")
    cur.add_argument("--p", type=float, help="percentile threshold in (0, 1), default 0.75")
    cur.add_argument("--formats", type=_formats, help="comma list from csv,json,svg (default all)")
    cur.add_argument("--preprocess", action="store_true", help="standardise (and PCA above 50 features) first")

    exp = sub.add_parser("experiment", help="baseline vs curvature-filtered clustering")
    common(exp)
    _add_input(exp)
    exp.add_argument("--strategy", choices=STRATEGIES)
    exp.add_argument("--k", type=int)
    exp.add_argument("--p", type=float)
    exp.add_argument("--mcs", type=_int_list, help="min_cluster_size candidates (default 5,10,20)")
    exp.add_argument("--seeds", type=_int_list, help="seed list such as 0-19 (default)")
    exp.add_argument("--clusters", type=int, help="cluster count for k-means (default: class count)")
    exp.add_argument("--formats", type=_formats, help="comma list from csv,json (default both)")
    exp.add_argument("--no-preprocess", action="store_true", help="cluster the raw features")
    exp.add_argument("--jobs", type=int, help="parallel seed runs")

    syn = sub.add_parser("synth", help="write a synthetic dataset with a provenance sidecar")
    common(syn)
    syn.add_argument("--generator", choices=sorted(GENERATORS))
    syn.add_argument("--n", type=int)
    syn.add_argument("--seed", type=int)
    syn.add_argument("--noise", type=float)

    ben = sub.add_parser("bench", help="time the k-NN and curvature stages over a grid")
    common(ben)
    ben.add_argument("--axis", choices=("n", "m"))
    ben.add_argument("--grid", type=_int_list, help="ascending grid, e.g. 1000,2000,4000,8000")
    ben.add_argument("--repetitions", type=int)
    ben.add_argument("--fixed-n", type=int, help="n when sweeping m")
    ben.add_argument("--fixed-m", type=int, help="m when sweeping n")
    return parser


DEFAULTS = {
    "k": None, "p": 0.75, "formats": None, "preprocess": False, "no_preprocess": False,
    "strategy": None, "mcs": list(MCS_CANDIDATES), "seeds": list(range(20)), "clusters": None, "jobs": 1,
    "input": None, "generator": None, "n": None, "seed": 0, "noise": None, "label_column": None,
    "no_header": False, "drop_missing": False, "axis": "n", "grid": [1000, 2000, 4000, 8000],
    "repetitions": 5, "fixed_n": 2000, "fixed_m": 10,
}
_CONVERT = {
    "k": int, "p": float, "n": int, "seed": int, "noise": float, "clusters": int, "jobs": int,
    "repetitions": int, "fixed_n": int, "fixed_m": int, "mcs": _int_list, "seeds": _int_list,
    "grid": _int_list, "formats": _formats,
}
_FLAGS = {"preprocess", "no_preprocess", "no_header", "drop_missing"}


def read_config(path) -> dict:
    """Parse a flat ``key = value`` file; ``#`` starts a comment, dashes in keys become underscores."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key = value")
            key, value = (s.strip() for s in line.split("=", 1))
            key = key.replace("-", "_")
            if key not in DEFAULTS:
                raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
            try:
                if key in _FLAGS:
                    out[key] = value.lower() in ("1", "true", "yes", "on")
                else:
                    out[key] = _CONVERT.get(key, str)(value)
            except (ValueError, argparse.ArgumentTypeError) as exc:
                raise UsageError(f"{path}:{lineno}: {exc}") from None
    return out


def resolve(args) -> dict:
    """Defaults, then the config file, then explicit flags."""
    cfg = dict(DEFAULTS)
    if getattr(args, "config", None):
        cfg.update(read_config(args.config))
    for key, value in vars(args).items():
        if value is None or (key in _FLAGS and value is False):
            continue
        cfg[key] = value
    cfg["out"] = Path(cfg.get("out") or os.environ.get(OUT_ENV) or ".")
    if not 0.0 < cfg["p"] < 1.0:
        raise UsageError(f"p={cfg['p']} must lie strictly between 0 and 1")
    if cfg["k"] is not None and cfg["k"] < 2:
        raise UsageError(f"k={cfg['k']} must be at least 2")
    if not cfg["seeds"]:
        raise UsageError("seed list is empty")
    return cfg


def _generate(cfg) -> tuple[Dataset, dict]:
    name = cfg["generator"]
    if name not in GENERATORS:
        raise UsageError(f"unknown generator {name!r}; choose from {sorted(GENERATORS)}")
    n = cfg["n"] or 400
    params = {"n": n, "seed": cfg["seed"]}
    if cfg["noise"] is not None:
        params["noise"] = cfg["noise"]
    data = GENERATORS[name](**params).replace(name=name, provenance=f"generator:{name}")
    return data, {"generator": name, **params}


def load_input(cfg) -> Dataset:
    if cfg["input"] and cfg["generator"]:
        raise UsageError("give either --input or --generator, not both")
    if cfg["generator"]:
        return _generate(cfg)[0]
    if not cfg["input"]:
        raise UsageError("an input is required: --input PATH, --input iris or --generator NAME")
    src = cfg["input"]
    if src in BUILTIN and not Path(src).exists():
        return BUILTIN[src]()
    path = Path(src)
    if not path.is_file():
        raise FileNotFoundError(f"input file not found: {path}")
    return load_csv(path, has_header=not cfg["no_header"], label_column=cfg["label_column"],
                    drop_missing=cfg["drop_missing"], name=path.stem)


def _note(msg: str) -> None:
    print(msg, file=sys.stderr)


def cmd_curvature(cfg) -> list[Path]:
    data = load_input(cfg)
    if cfg["preprocess"]:
        data = preprocess(data)
    fmts = cfg["formats"] or list(FORMATS)
    report = mcbp(data, cfg["k"], cfg["p"])
    out = cfg["out"]
    out.mkdir(parents=True, exist_ok=True)
    stem = data.name or "data"
    written = []
    if "csv" in fmts:
        written.append(out / f"{stem}_curvature.csv")
        report.to_csv(written[-1])
        written.append(out / f"{stem}_partition.csv")
        partition(data, report).to_csv(written[-1])
    if "json" in fmts:
        written.append(out / f"{stem}_curvature.json")
        report.to_json(written[-1])
    if "svg" in fmts:
        if data.m != 2:
            _note(f"note: data has {data.m} features; SVG plots are only drawn for 2-D data")
        else:
            views = {
                "raw": raw_scatter(data.features, data.labels, title=f"{stem}: raw", version=__version__),
                "heatmap": curvature_heatmap(data.features, report.normalized_scores,
                                             title=f"{stem}: normalized curvature", version=__version__),
                "boundary": boundary_overlay(data.features, report.boundary_flags,
                                             title=f"{stem}: boundary points (p={cfg['p']})", version=__version__),
            }
            for view, svg in views.items():
                written.append(out / f"{stem}_{view}.svg")
                written[-1].write_text(svg, encoding="utf-8")
    _note(f"{stem}: n={report.n} k={report.k} p={report.p} threshold={report.threshold:.6f} boundary={report.n_boundary}")
    return written


def cmd_experiment(cfg) -> list[Path]:
    if not cfg["strategy"]:
        raise UsageError(f"--strategy is required; choose from {STRATEGIES}")
    data = load_input(cfg)
    if not cfg["no_preprocess"]:
        data = preprocess(data)
    fmts = [f for f in (cfg["formats"] or ["csv", "json"]) if f != "svg"]
    row = run_experiment(data, cfg["strategy"], seeds=cfg["seeds"], k=cfg["k"], p=cfg["p"], mcs=cfg["mcs"],
                         n_clusters=cfg["clusters"], n_jobs=cfg["jobs"])
    for failure in row.failures:
        _note(f"warning: {failure}")
    if row.n_seeds == 0:
        raise MCBPError(f"{cfg['strategy']} failed for every seed")
    out = cfg["out"]
    out.mkdir(parents=True, exist_ok=True)
    stem = f"{row.dataset}_{cfg['strategy']}"
    written = []
    if "csv" in fmts:
        written.append(out / f"{stem}_table.csv")
        write_table([row], written[-1])
    if "json" in fmts:
        written.append(out / f"{stem}.json")
        payload = row.to_dict() | {"seeds": cfg["seeds"], "k": cfg["k"], "p": cfg["p"], "mcs": cfg["mcs"]}
        written[-1].write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    _note(",".join(row.TABLE_HEADER))
    _note(",".join(row.table_cells()))
    return written


def cmd_synth(cfg) -> list[Path]:
    if not cfg["generator"]:
        raise UsageError(f"--generator is required; choose from {sorted(GENERATORS)}")
    data, params = _generate(cfg)
    out = cfg["out"]
    out.mkdir(parents=True, exist_ok=True)
    stem = f"{params['generator']}_n{params['n']}_seed{params['seed']}"
    csv_path, meta_path = out / f"{stem}.csv", out / f"{stem}.json"
    write_csv(data, csv_path)
    meta = {"generator": params.pop("generator"), "parameters": params, "seed": params["seed"],
            "rows": data.n, "version": __version__}
    meta_path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return [csv_path, meta_path]


def cmd_bench(cfg) -> list[Path]:
    report = run_scaling(cfg["axis"], cfg["grid"], cfg["repetitions"], n=cfg["fixed_n"], m=cfg["fixed_m"])
    out = cfg["out"]
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"scaling_{cfg['axis']}.csv"
    report.to_csv(path)
    print(report.summary())
    return [path]


COMMANDS = {"curvature": cmd_curvature, "experiment": cmd_experiment, "synth": cmd_synth, "bench": cmd_bench}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not args.command:
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    try:
        cfg = resolve(args)
        for path in COMMANDS[args.command](cfg):
            print(path)
    except (UsageError, OSError) as exc:
        if isinstance(exc, UsageError):
            _note(f"mcbp: usage error: {exc}")
            return EXIT_USAGE
        _note(f"mcbp: data error: {exc}")
        return EXIT_DATA
    except (DataParseError, DimensionError, DatasetTooSmallError) as exc:
        _note(f"mcbp: data error: {exc}")
        return EXIT_DATA
    except ParameterError as exc:
        _note(f"mcbp: usage error: {exc}")
        return EXIT_USAGE
    except MCBPError as exc:
        _note(f"mcbp: pipeline error: {exc}")
        return EXIT_PIPELINE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
