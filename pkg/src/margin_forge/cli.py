"""Command-line front end for dataset utilities, reweighting, bounds, experiments.

Exit codes: 0 on success, 1 for configuration problems (arguments, config
files, unreadable or malformed inputs), 2 for failures during computation.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .bounds import breiman_bound, germain_bound, report_rows, schapire_terms
from .cart import TreeParams
from .dataset_io import (
    Dataset,
    DatasetError,
    SplitSpec,
    generate_synthetic,
    load_dataset,
    stratified_split,
    write_dataset,
)
from .ensemble import load_model, prediction_matrix
from .harness import (
    TABLE_FAMILIES,
    ExperimentConfig,
    export_cmd_series,
    fit_baseline,
    render_table,
    report_lines,
    run_experiment,
)
from .margins import compute_margins, margin_improvement
from .reweight import apply_scheme, parse_spec

_CONFIG_KEYS = (
    "dataset", "test", "format", "label_column", "method", "T", "schemes",
    "sims", "seed", "alpha", "depth", "leaves", "mtry", "vc", "frac",
    "max_rows", "freeze_split", "freeze_ensemble", "table", "out", "cmd_out",
    "cmd_checkpoints",
)


class CliError(Exception):
    """Configuration problem; the process exits with status 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(message)


def _load_ref(ref: str, fmt: str = "delimited", label_column: int = -1) -> Dataset:
    """Load a dataset from a file path or a synthetic:kind:n:noise:seed reference."""
    if ref.startswith("synthetic:"):
        parts = ref.split(":")
        if len(parts) != 5:
            raise CliError("synthetic reference must be synthetic:kind:n:noise:seed")
        try:
            return generate_synthetic(parts[1], int(parts[2]), float(parts[3]),
                                      int(parts[4]))
        except ValueError as exc:
            raise CliError(str(exc))
    try:
        return load_dataset(ref, fmt, label_column=label_column)
    except OSError as exc:
        raise CliError(f"cannot read {ref}: {exc}")
    except DatasetError as exc:
        raise CliError(str(exc))


def _load_snapshot(path: str):
    try:
        return load_model(path)
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}")
    except (ValueError, KeyError, TypeError) as exc:
        raise CliError(f"bad model snapshot {path}: {exc}")


def _matrix_for(model, data):
    try:
        return prediction_matrix(model, data)
    except ValueError as exc:
        raise CliError(f"data does not match the model: {exc}")


def _cmd_data_info(args) -> int:
    data = _load_ref(args.path, args.fmt, args.label_column)
    counts = data.class_counts()
    print(f"name\t{data.name}")
    print(f"rows\t{data.n_rows}")
    print(f"features\t{data.n_features}")
    print(f"class -1\t{counts[-1]}")
    print(f"class +1\t{counts[+1]}")
    return 0


def _cmd_data_split(args) -> int:
    data = _load_ref(args.path, args.fmt, args.label_column)
    try:
        spec = SplitSpec(args.frac, True, args.seed)
        train, test = stratified_split(data, spec)
    except ValueError as exc:
        raise CliError(str(exc))
    base = Path(args.path if not args.path.startswith("synthetic:") else "synthetic.csv")
    train_path = args.out_train or str(base.with_suffix(f".train{base.suffix}"))
    test_path = args.out_test or str(base.with_suffix(f".test{base.suffix}"))
    write_dataset(train, train_path)
    write_dataset(test, test_path)
    print(f"wrote {train_path} ({train.n_rows} rows)")
    print(f"wrote {test_path} ({test.n_rows} rows)")
    return 0


def _cmd_reweight(args) -> int:
    try:
        spec = parse_spec(args.scheme)
    except ValueError as exc:
        raise CliError(str(exc))
    model = _load_snapshot(args.model)
    data = _load_ref(args.data, args.fmt, args.label_column)
    matrix = _matrix_for(model, data)
    result = apply_scheme(spec, matrix, model.vote_weights)
    print(f"scheme\t{result.scheme}")
    print(f"feasible\t{'yes' if result.feasible else 'no'}")
    if result.feasible:
        lift = margin_improvement(result.old_profile, result.new_profile)
        print(f"objective\t{result.objective:.17g}")
        print(f"mean_improvement\t{lift.mean:.17g}")
        print(f"min_improvement\t{lift.min:.17g}")
        print(f"variance_reduction\t{result.variance_reduction:.17g}")
        print(f"range_reduction\t{result.range_reduction:.17g}")
        print("weights\t" + "\t".join(f"{w:.17g}" for w in result.weights))
    else:
        print(f"old_mean\t{result.old_profile.mean:.17g}")
        print(f"old_min\t{result.old_profile.min:.17g}")
    return 0


def _cmd_bounds(args) -> int:
    model = _load_snapshot(args.model)
    data = _load_ref(args.data, args.fmt, args.label_column)
    matrix = _matrix_for(model, data)
    weights = model.vote_weights
    profile = compute_margins(matrix, weights)
    reports = []
    try:
        if args.theta is not None and args.vc is not None:
            reports.append(schapire_terms(profile, args.theta, args.vc, data.n_rows))
        if args.theta is not None and args.hspace is not None:
            reports.append(breiman_bound(args.theta, args.hspace, data.n_rows,
                                         args.delta))
    except ValueError as exc:
        raise CliError(str(exc))
    reports.append(germain_bound(matrix, weights))
    for idx, report in enumerate(reports):
        if idx:
            print()
        for row in report_rows(report):
            print(row)
    return 0


def _parse_bool(value: str, key: str) -> bool:
    low = value.strip().lower()
    if low in ("yes", "true", "1", "on"):
        return True
    if low in ("no", "false", "0", "off"):
        return False
    raise CliError(f"{key} must be a yes/no value, got {value!r}")


def _read_config(path: str) -> dict[str, str]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}")
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise CliError(f"{path}:{lineno}: expected key = value")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in _CONFIG_KEYS:
            raise CliError(f"{path}:{lineno}: unknown key {key!r}")
        if key in out:
            raise CliError(f"{path}:{lineno}: duplicate key {key!r}")
        out[key] = value
    for required in ("dataset", "schemes"):
        if required not in out:
            raise CliError(f"{path}: config must set {required}")
    return out


def _build_experiment(cfg: dict[str, str]) -> ExperimentConfig:
    fmt = cfg.get("format", "delimited")
    try:
        label_column = int(cfg.get("label_column", "-1"))
    except ValueError as exc:
        raise CliError(str(exc))
    data = _load_ref(cfg["dataset"], fmt, label_column)
    test = _load_ref(cfg["test"], fmt, label_column) if "test" in cfg else None
    try:
        schemes = tuple(parse_spec(part.strip())
                        for part in cfg["schemes"].split(",") if part.strip())
        params = TreeParams(max_depth=int(cfg.get("depth", "2")),
                            max_leaves=int(cfg.get("leaves", "4")))
        return ExperimentConfig(
            dataset=data,
            schemes=schemes,
            method=cfg.get("method", "adaboost"),
            n_trees=int(cfg.get("T", "100")),
            tree_params=params,
            simulations=int(cfg.get("sims", "30")),
            train_fraction=float(cfg.get("frac", "0.7")),
            alpha_level=float(cfg.get("alpha", "0.05")),
            seed=int(cfg.get("seed", "0")),
            m_try=int(cfg["mtry"]) if "mtry" in cfg else None,
            test_dataset=test,
            freeze_split=_parse_bool(cfg.get("freeze_split", "no"), "freeze_split"),
            freeze_ensemble=_parse_bool(cfg.get("freeze_ensemble", "no"),
                                        "freeze_ensemble"),
            max_rows=int(cfg["max_rows"]) if "max_rows" in cfg else 1000,
        )
    except ValueError as exc:
        raise CliError(str(exc))


def _check_table_family(cfg: dict[str, str], config: ExperimentConfig) -> None:
    family = cfg.get("table")
    if family is None:
        return
    if family not in TABLE_FAMILIES:
        raise CliError(f"table must be one of {TABLE_FAMILIES}")
    if family == "pws":
        kinds = [s.scheme for s in config.schemes]
        if len(kinds) != 3 or any(k != "pws" for k in kinds):
            raise CliError("the pws table needs exactly three pws schemes")
    elif len(config.schemes) != 1:
        raise CliError(f"the {family} table needs exactly one scheme")


def _cmd_experiment(args) -> int:
    cfg = _read_config(args.config)
    config = _build_experiment(cfg)
    _check_table_family(cfg, config)
    report = run_experiment(config)
    print(f"# {report.resampling}")
    print(f"dataset\t{config.dataset.name}")
    print(f"method\t{config.method}\ttrees\t{config.n_trees}"
          f"\tsimulations\t{config.simulations}\tsuccesses\t{report.successes}")
    print(f"baseline_mean_test_error\t{report.baseline_error:.6f}")
    print("\t".join(("scheme", "test_error", "mean_improve", "min_improve",
                     "var_reduce", "range_reduce", "feasible", "t_stat",
                     "p_value", "winner")))
    for s in report.summaries:
        print("\t".join((s.label, f"{s.mean_error:.6f}", f"{s.mean_improvement:.6f}",
                         f"{s.min_improvement:.6f}", f"{s.variance_reduction:.6f}",
                         f"{s.range_reduction:.6f}", str(s.feasible_count),
                         f"{s.t_statistic:.4f}", f"{s.p_value:.6f}", s.winner)))
    if "table" in cfg:
        print()
        print(render_table(report, cfg["table"]))
    if "out" in cfg:
        Path(cfg["out"]).write_text("\n".join(report_lines(report)) + "\n",
                                    encoding="utf-8")
        print(f"wrote {cfg['out']}")
    if "cmd_out" in cfg:
        try:
            checkpoints = tuple(int(v.strip())
                                for v in cfg.get("cmd_checkpoints", "50,200,500").split(","))
        except ValueError as exc:
            raise CliError(str(exc))
        model = fit_baseline(config, config.dataset, config.seed)
        series = export_cmd_series(model, config.dataset, checkpoints)
        for count, rows in sorted(series.items()):
            path = Path(f"{cfg['cmd_out']}.T{count}.tsv")
            path.write_text("\n".join(f"{t:.17g}\t{f:.17g}" for t, f in rows) + "\n",
                            encoding="utf-8")
            print(f"wrote {path}")
    return 0


def _add_format_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--fmt", choices=("delimited", "sparse-index"),
                        default="delimited", help="input file format")
    parser.add_argument("--label-column", type=int, default=-1,
                        help="label column for delimited files")


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="margin-forge",
                     description="Ensemble margin analysis: training, "
                                 "reweighting, bound reports, experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    data = sub.add_parser("data", help="dataset utilities")
    data_sub = data.add_subparsers(dest="subcommand", required=True)
    info = data_sub.add_parser("info", help="describe a dataset")
    info.add_argument("path", help="dataset file or synthetic:kind:n:noise:seed")
    _add_format_flags(info)
    info.set_defaults(handler=_cmd_data_info)
    split = data_sub.add_parser("split", help="write stratified train/test files")
    split.add_argument("path", help="dataset file or synthetic:kind:n:noise:seed")
    split.add_argument("--frac", type=float, default=0.7,
                       help="training fraction (default 0.7)")
    split.add_argument("--seed", type=int, default=0)
    split.add_argument("--out-train", help="training output path")
    split.add_argument("--out-test", help="test output path")
    _add_format_flags(split)
    split.set_defaults(handler=_cmd_data_split)

    rew = sub.add_parser("reweight", help="reweight a saved ensemble on a dataset")
    rew.add_argument("--model", required=True, help="model snapshot path")
    rew.add_argument("--data", required=True, help="dataset used for the margins")
    rew.add_argument("--scheme", required=True,
                     help="uws | ews:k | pws:xi | sm1:xi | sm2[:mean]")
    _add_format_flags(rew)
    rew.set_defaults(handler=_cmd_reweight)

    bnd = sub.add_parser("bounds", help="evaluate generalization bound reports")
    bnd.add_argument("--model", required=True, help="model snapshot path")
    bnd.add_argument("--data", required=True, help="dataset to plug in")
    bnd.add_argument("--theta", type=float, help="margin threshold")
    bnd.add_argument("--vc", type=float, help="learner capacity dimension")
    bnd.add_argument("--hspace", type=float, help="learner space size")
    bnd.add_argument("--delta", type=float, default=0.05, help="confidence level")
    _add_format_flags(bnd)
    bnd.set_defaults(handler=_cmd_bounds)

    exp = sub.add_parser("experiment", help="run a repeated-simulation comparison")
    exp.add_argument("--config", required=True, help="key = value config file")
    exp.set_defaults(handler=_cmd_experiment)
    return parser


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        return args.handler(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (RuntimeError, ValueError, ArithmeticError, OSError) as exc:
        print(f"failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
