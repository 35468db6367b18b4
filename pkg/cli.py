"""
커맨드라인 진입점
서브커맨드: evolve, retrain, cost, export-front, export-kernels
종료 코드: 0 정상, 2 설정 오류, 3 데이터 오류, 4 연산 오류
"""
import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

import orjson
from pydantic import ValidationError

from app.exceptions import ConfigError, KernelSearchError
from app.runner.cost import format_cost_report, run_cost
from app.runner.evolve import export_run, latest_checkpoint, load_checkpoint, read_run_config, run_evolve, state_from_checkpoint
from app.runner.export import export_kernel_distribution, read_front, read_reference_points, reference_genotype, write_kernel_csv
from app.runner.retrain import run_retrain
from app.schemas.run import RetrainConfig, RunConfig
from app.search.genotype import get_template
from app.utils.logger import setup_logging
from app.utils.validators import load_genotype_file

EVOLVE_FLAGS = [
    "template", "dataset", "mode", "population", "generations", "mutation_rate", "seed", "preset",
    "search_train_size", "eval_size", "epochs", "batch_size", "lr", "parent_selection",
    "include_benchmark", "workers", "data_dir", "output_dir",
]
RETRAIN_FLAGS = [
    "preset", "dataset", "epochs", "train_size", "batch_size", "lr", "lr_drop_epoch",
    "weight_decay", "augment", "seed", "compare_benchmark", "data_dir",
]


def _emit(data, as_json: bool, text: Optional[str] = None) -> None:
    if as_json:
        sys.stdout.write(orjson.dumps(data, option=orjson.OPT_INDENT_2).decode() + "\n")
    else:
        print(text if text is not None else data)


def _load_config_file(path: Optional[Path]) -> dict:
    if path is None:
        return {}
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}", path=str(path))
    try:
        data = orjson.loads(path.read_bytes())
    except orjson.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}: {exc.msg}", path=str(path))
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a JSON object", path=str(path))
    return data


def _merge(args: argparse.Namespace, names: Sequence[str]) -> dict:
    """설정 파일 위에 명시한 플래그만 덮어쓰기"""
    data = _load_config_file(args.config)
    for name in names:
        value = getattr(args, name, None)
        if value is not None:
            data[name] = value
    return data


def cmd_evolve(args: argparse.Namespace) -> int:
    config = RunConfig(**_merge(args, EVOLVE_FLAGS))
    run_dir = run_evolve(config)
    front = read_front(run_dir)
    points = read_reference_points(run_dir)
    _emit(
        {"run_dir": str(run_dir), "front_size": len(front), "reference_points": points.model_dump(mode="json")},
        args.json,
        f"run directory: {run_dir}\nfront members: {len(front)}\n"
        + "\n".join(f"{p.tag}: #{p.member_id} mults={p.mults:,} error={p.top1_error:.4f}"
                    for p in (points.ref1, points.ref2, points.ref3)),
    )
    return 0


def cmd_retrain(args: argparse.Namespace) -> int:
    config = RetrainConfig(**_merge(args, RETRAIN_FLAGS))
    report = run_retrain(
        config,
        run_dir=args.run_dir,
        ref=args.ref,
        genotype_file=args.genotype,
        template_id=args.template,
    )
    text = (
        f"{report.source} on {report.dataset}: test accuracy {report.test_accuracy:.4f}, "
        f"mults {report.mults:,} ({report.reduction} fewer than {report.benchmark_mults:,})"
    )
    if report.accuracy_improvement is not None:
        text += f"\nbenchmark accuracy {report.benchmark_accuracy:.4f}, improvement {report.accuracy_improvement:+.4f}"
    _emit(report.model_dump(mode="json"), args.json, text)
    return 0


def cmd_cost(args: argparse.Namespace) -> int:
    report = run_cost(args.template, args.dataset, genotype_file=args.genotype, all_square=args.all_square)
    _emit(report.model_dump(), args.json, format_cost_report(report))
    return 0


def cmd_export_front(args: argparse.Namespace) -> int:
    """최신 체크포인트의 아카이브로 전선 산출물을 다시 씀"""
    latest = latest_checkpoint(args.run_dir)
    if latest is None:
        raise ConfigError(f"no checkpoint found in {args.run_dir}")
    state = state_from_checkpoint(load_checkpoint(latest))
    export_run(state, read_run_config(args.run_dir), Path(args.run_dir))
    front = read_front(args.run_dir)
    _emit(
        [m.model_dump(mode="json") for m in front],
        args.json,
        "\n".join(f"#{m.id} mults={m.mults:,} error={m.top1_error:.4f} kernels={m.kernel_count}" for m in front),
    )
    return 0


def cmd_export_kernels(args: argparse.Namespace) -> int:
    if args.genotype is not None:
        genotype = load_genotype_file(args.genotype)
        template = get_template(args.template, args.dataset) if args.template else None
    elif args.run_dir is not None:
        genotype = reference_genotype(args.run_dir, args.ref)
        config = read_run_config(args.run_dir)
        template = get_template(config.template, config.dataset)
    else:
        raise ConfigError("export-kernels needs --genotype or --run-dir")

    rows = export_kernel_distribution(genotype, template)
    if args.output is not None:
        write_kernel_csv(rows, args.output)
    _emit(
        [r.model_dump() for r in rows],
        args.json,
        "layer_index,shape_label,count\n" + "\n".join(f"{r.layer_index},{r.shape_label},{r.count}" for r in rows),
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kernelshape", description="NSGA-II search over mixed CNN kernel shapes")
    parser.add_argument("--json", action="store_true", help="machine-readable output")
    parser.add_argument("--log-level", default=None)
    sub = parser.add_subparsers(dest="command", required=True)

    evolve = sub.add_parser("evolve", help="run (or resume) a search")
    evolve.add_argument("--config", type=Path)
    evolve.add_argument("--template", choices=["lenet5", "lenet5_small", "three_layer", "four_layer"])
    evolve.add_argument("--dataset", choices=["mnist", "fashion_mnist", "cifar10"])
    evolve.add_argument("--mode", choices=["two_obj", "three_obj"])
    evolve.add_argument("--population", type=int)
    evolve.add_argument("--generations", type=int)
    evolve.add_argument("--mutation-rate", dest="mutation_rate", type=float)
    evolve.add_argument("--seed", type=int)
    evolve.add_argument("--preset", choices=["desk", "full"])
    evolve.add_argument("--search-train-size", dest="search_train_size", type=int)
    evolve.add_argument("--eval-size", dest="eval_size", type=int)
    evolve.add_argument("--epochs", type=int)
    evolve.add_argument("--batch-size", dest="batch_size", type=int)
    evolve.add_argument("--lr", type=float)
    evolve.add_argument("--parent-selection", dest="parent_selection", choices=["mutate_all", "tournament"])
    evolve.add_argument("--include-benchmark", dest="include_benchmark", action="store_true", default=None)
    evolve.add_argument("--workers", type=int)
    evolve.add_argument("--data-dir", dest="data_dir", type=Path)
    evolve.add_argument("--output-dir", dest="output_dir", type=Path)
    evolve.set_defaults(handler=cmd_evolve)

    retrain = sub.add_parser("retrain", help="retrain a front member or genotype file on the full training set")
    retrain.add_argument("--config", type=Path)
    retrain.add_argument("--run-dir", dest="run_dir", type=Path)
    retrain.add_argument("--ref", choices=["ref1", "ref2", "ref3"])
    retrain.add_argument("--genotype", type=Path)
    retrain.add_argument("--template", choices=["lenet5", "lenet5_small", "three_layer", "four_layer"])
    retrain.add_argument("--dataset", choices=["mnist", "fashion_mnist", "cifar10"])
    retrain.add_argument("--preset", choices=["desk", "full"])
    retrain.add_argument("--epochs", type=int)
    retrain.add_argument("--train-size", dest="train_size", type=int)
    retrain.add_argument("--batch-size", dest="batch_size", type=int)
    retrain.add_argument("--lr", type=float)
    retrain.add_argument("--lr-drop-epoch", dest="lr_drop_epoch", type=int)
    retrain.add_argument("--weight-decay", dest="weight_decay", type=float)
    retrain.add_argument("--augment", action=argparse.BooleanOptionalAction, default=None)
    retrain.add_argument("--seed", type=int)
    retrain.add_argument("--compare-benchmark", dest="compare_benchmark", action="store_true", default=None)
    retrain.add_argument("--data-dir", dest="data_dir", type=Path)
    retrain.set_defaults(handler=cmd_retrain)

    cost = sub.add_parser("cost", help="report analytic convolution mults")
    cost.add_argument("--template", default="lenet5", choices=["lenet5", "lenet5_small", "three_layer", "four_layer"])
    cost.add_argument("--dataset", default="mnist", choices=["mnist", "fashion_mnist", "cifar10"])
    source = cost.add_mutually_exclusive_group(required=True)
    source.add_argument("--genotype", type=Path)
    source.add_argument("--all-square", dest="all_square")
    cost.set_defaults(handler=cmd_cost)

    front = sub.add_parser("export-front", help="rewrite front files from the latest checkpoint")
    front.add_argument("--run-dir", dest="run_dir", type=Path, required=True)
    front.set_defaults(handler=cmd_export_front)

    kernels = sub.add_parser("export-kernels", help="per-layer kernel shape distribution")
    kernels.add_argument("--run-dir", dest="run_dir", type=Path)
    kernels.add_argument("--ref", default="ref1", choices=["ref1", "ref2", "ref3"])
    kernels.add_argument("--genotype", type=Path)
    kernels.add_argument("--template", choices=["lenet5", "lenet5_small", "three_layer", "four_layer"])
    kernels.add_argument("--dataset", default="mnist", choices=["mnist", "fashion_mnist", "cifar10"])
    kernels.add_argument("--output", type=Path)
    kernels.set_defaults(handler=cmd_export_kernels)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.log_level)
    try:
        return args.handler(args)
    except ValidationError as exc:
        error = ConfigError(f"invalid configuration: {exc.error_count()} error(s)", errors=exc.errors(include_url=False))
    except KernelSearchError as exc:
        error = exc

    if args.json:
        sys.stderr.write(orjson.dumps(error.to_dict(), default=str).decode() + "\n")
    else:
        print(f"error: {error.detail}", file=sys.stderr)
    return error.exit_code


if __name__ == "__main__":
    sys.exit(main())
