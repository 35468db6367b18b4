import csv
import os
import signal
import subprocess
import sys
import time
from pathlib import Path

import orjson
import pytest

from app.config import settings
from app.exceptions import ArtifactError, ConfigError, InvariantViolationError, RunLockedError
from app.runner.cost import format_cost_report, run_cost
from app.runner.evolve import (
    CHECKPOINT_DIR,
    LOCK_FILE,
    latest_checkpoint,
    load_checkpoint,
    read_run_config,
    run_evolve,
)
from app.runner.export import (
    FRONT_CSV,
    FRONT_JSON,
    REFERENCE_JSON,
    check_mutually_nondominated,
    export_kernel_distribution,
    read_front,
    read_front_csv,
    read_json,
    read_reference_points,
    reference_genotype,
    write_json,
)
from app.runner.reference import select_reference_points
from app.runner.retrain import reduction_factor, run_retrain
from app.schemas.genotype import Genotype, Mode
from app.schemas.run import FrontMember, RetrainConfig, RunConfig
from app.search import evaluator as evaluator_module
from app.search.cost import genotype_cost
from app.search.genotype import get_template, uniform_genotype
from app.utils.validators import format_genotype, load_genotype_file, validate_genotype_text, write_genotype_file
from cli import main

from conftest import make_dataset, shape_area_surrogate

SMALL = get_template("lenet5_small", "mnist")


def member(id, mults, error, kernels=1, mode=Mode.TWO_OBJ):
    return FrontMember(id=id, key=str(id), mode=mode, layers=[[1]], mults=mults, top1_error=error, kernel_count=kernels)


def small_config(tmp_path, name="run", **overrides):
    values = dict(template="lenet5_small", dataset="mnist", population=6, generations=3, seed=3,
                  output_dir=tmp_path / name)
    values.update(overrides)
    return RunConfig(**values)


# === 기준점 ===

def test_reference_points_example():
    front = [member(0, 30, 0.20), member(1, 60, 0.12), member(2, 100, 0.10)]
    points = select_reference_points(front)
    assert points.ref1.member_id == 2
    assert points.ref2.member_id == 0
    assert points.ref3.member_id == 1


def test_reference_points_singleton():
    points = select_reference_points([member(0, 10, 0.5)])
    assert points.ref1.member_id == points.ref2.member_id == points.ref3.member_id == 0


def test_reference_points_fall_back_to_median_mults():
    front = [member(0, 60, 0.3), member(1, 80, 0.2), member(2, 90, 0.15), member(3, 100, 0.1)]
    points = select_reference_points(front)
    assert points.ref2.member_id == 1
    assert "median" in points.ref2.rationale


def test_reference_points_ignore_objective_scale():
    front = [member(0, 30, 0.20), member(1, 60, 0.12), member(2, 100, 0.10), member(3, 45, 0.15)]
    scaled = [m.model_copy(update={"mults": m.mults * 7}) for m in front]
    a, b = select_reference_points(front), select_reference_points(scaled)
    assert [p.member_id for p in (a.ref1, a.ref2, a.ref3)] == [p.member_id for p in (b.ref1, b.ref2, b.ref3)]


def test_reference_points_reject_empty_front():
    with pytest.raises(ValueError):
        select_reference_points([])


def test_check_mutually_nondominated():
    check_mutually_nondominated([member(0, 30, 0.2), member(1, 60, 0.1)])
    with pytest.raises(InvariantViolationError):
        check_mutually_nondominated([member(0, 30, 0.1), member(1, 60, 0.2)])


# === 재학습 배율 ===

def test_reduction_factor():
    assert reduction_factor(100, 100) == 1.0
    assert reduction_factor(100, 50) == 2.0
    assert f"{reduction_factor(15_564_800, 2_624_000):.2f}x" == "5.93x"
    with pytest.raises(ConfigError):
        reduction_factor(100, 0)


def test_run_retrain_benchmark_against_itself(tmp_path):
    path = tmp_path / "benchmark.txt"
    write_genotype_file(uniform_genotype(SMALL), path)
    data = make_dataset(40, shape=(1, 28, 28))
    config = RetrainConfig(dataset="mnist", epochs=1, batch_size=20, compare_benchmark=True)
    report = run_retrain(config, genotype_file=path, template_id="lenet5_small", train_set=data, test_set=data)
    assert report.reduction == "1.00x"
    assert report.mults == report.benchmark_mults
    assert report.accuracy_improvement == 0.0
    assert report.augment is False and report.epochs == 1


def test_run_retrain_requires_template_for_genotype_file(tmp_path):
    path = tmp_path / "g.txt"
    write_genotype_file(uniform_genotype(SMALL), path)
    with pytest.raises(ConfigError):
        run_retrain(RetrainConfig(dataset="mnist", epochs=0), genotype_file=path)


# === 커널 분포 ===

def test_kernel_distribution_of_benchmark():
    template = get_template("lenet5", "mnist")
    rows = export_kernel_distribution(uniform_genotype(template), template)
    assert len(rows) == 20
    layer1 = {r.shape_label: r.count for r in rows if r.layer_index == 1}
    assert layer1["5x5"] == 32
    assert sum(layer1.values()) == 32
    assert layer1["1x3"] == 0 and layer1["REMOVED"] == 0


def test_kernel_distribution_counts_removed_slots():
    template = get_template("lenet5", "mnist")
    genotype = Genotype(layers=((9,) * 32, (0,) * 10 + (4,) * 54), mode=Mode.THREE_OBJ)
    rows = [r for r in export_kernel_distribution(genotype, template) if r.layer_index == 2]
    counts = {r.shape_label: r.count for r in rows}
    assert counts["REMOVED"] == 10 and counts["3x3"] == 54
    assert sum(counts.values()) == 64


# === cost ===

@pytest.mark.parametrize("template_id,dataset_id,shape,total", [
    ("lenet5", "cifar10", "5x5", 15_564_800),
    ("lenet5", "mnist", "5x5", 10_662_400),
    ("three_layer", "cifar10", "3x3", 13_565_952),
])
def test_run_cost_all_square(template_id, dataset_id, shape, total):
    report = run_cost(template_id, dataset_id, all_square=shape)
    assert report.total_conv_mults == total
    assert f"total conv mults: {total:,}" in format_cost_report(report)


def test_run_cost_from_file_checks_slot_counts(tmp_path):
    path = tmp_path / "g.txt"
    path.write_text("1 2 3\n4 5\n")
    with pytest.raises(ConfigError, match="do not match"):
        run_cost("lenet5", "mnist", genotype_file=path)


def test_run_cost_needs_exactly_one_source():
    with pytest.raises(ConfigError):
        run_cost("lenet5", "mnist")


# === 유전자형 파일 ===

def test_genotype_text_errors_carry_line_numbers():
    text = "# comment\nmode: two_obj\n1 2 3\n4 x 0\n\n12 1\n"
    is_valid, errors, genotype = validate_genotype_text(text)
    assert not is_valid and genotype is None
    lines = sorted({e["line"] for e in errors})
    assert lines == [4, 6]
    assert any("REMOVED" in e["error"] for e in errors)


def test_genotype_file_formats(tmp_path):
    genotype = Genotype(layers=((0, 4, 4), (9,)), mode=Mode.THREE_OBJ)
    text_path = tmp_path / "g.txt"
    write_genotype_file(genotype, text_path)
    assert load_genotype_file(text_path) == genotype
    assert format_genotype(genotype).startswith("mode: three_obj\n")

    json_path = tmp_path / "g.json"
    json_path.write_bytes(orjson.dumps({"layers": [[0, 4, 4], [9]], "mode": "three_obj"}))
    assert load_genotype_file(json_path) == genotype


def test_genotype_file_missing_or_invalid(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_genotype_file(tmp_path / "missing.txt")
    bad = tmp_path / "bad.txt"
    bad.write_text("0 0 0\n")
    with pytest.raises(ConfigError, match="line 1"):
        load_genotype_file(bad)


# === evolve 실행 ===

def test_run_evolve_writes_artifacts(tmp_path):
    run_dir = run_evolve(small_config(tmp_path), evaluate=shape_area_surrogate(SMALL))

    assert sorted(p.name for p in (run_dir / CHECKPOINT_DIR).iterdir()) == [f"gen_000{g}.json" for g in range(4)]
    assert not (run_dir / LOCK_FILE).exists()

    front = read_front(run_dir)
    from_csv = read_front_csv(run_dir / FRONT_CSV)
    assert [(m.id, m.key, m.mults, m.layers) for m in from_csv] == [(m.id, m.key, m.mults, m.layers) for m in front]
    assert [m.top1_error for m in from_csv] == pytest.approx([m.top1_error for m in front], abs=1e-6)
    check_mutually_nondominated(front)
    assert [m.id for m in front] == list(range(len(front)))
    assert (run_dir / "pareto_front.svg").read_text().lstrip().startswith("<svg")

    points = read_reference_points(run_dir)
    for tag in ("ref1", "ref2", "ref3"):
        with open(run_dir / f"kernels_{tag}.csv", newline="") as f:
            rows = list(csv.DictReader(f))
        assert len(rows) == 2 * 10
        assert sum(int(r["count"]) for r in rows) == SMALL.total_slots
        assert 0 <= points.get(tag).member_id < len(front)

    with open(run_dir / "hypervolume.csv", newline="") as f:
        volumes = [float(r["hypervolume"]) for r in csv.DictReader(f)]
    assert len(volumes) == 4
    assert all(b >= a for a, b in zip(volumes, volumes[1:]))

    config = read_json(run_dir / "config.json")
    assert config["config"]["epochs"] == 3
    assert config["init_scheme"] and config["provenance"]
    assert read_run_config(run_dir).population == 6


def test_resume_equals_continuous_run(tmp_path):
    surrogate = shape_area_surrogate(SMALL)
    continuous = run_evolve(small_config(tmp_path, "continuous", generations=5), evaluate=surrogate)

    resumed_config = small_config(tmp_path, "resumed", generations=3)
    run_evolve(resumed_config, evaluate=surrogate)
    resumed = run_evolve(resumed_config.model_copy(update={"generations": 5}), evaluate=surrogate)

    assert read_json(resumed / FRONT_JSON) == read_json(continuous / FRONT_JSON)
    a = load_checkpoint(latest_checkpoint(resumed))
    b = load_checkpoint(latest_checkpoint(continuous))
    assert a.generation == b.generation == 5
    assert a.model_dump() == b.model_dump()


def test_resume_rejects_changed_configuration(tmp_path):
    surrogate = shape_area_surrogate(SMALL)
    run_evolve(small_config(tmp_path, generations=1), evaluate=surrogate)
    with pytest.raises(ConfigError, match="mutation_rate"):
        run_evolve(small_config(tmp_path, generations=2, mutation_rate=0.3), evaluate=surrogate)
    assert not (tmp_path / "run" / LOCK_FILE).exists()


def test_locked_run_directory(tmp_path):
    run_dir = tmp_path / "run"
    run_dir.mkdir()
    (run_dir / LOCK_FILE).write_text(str(os.getpid()))
    with pytest.raises(RunLockedError):
        run_evolve(small_config(tmp_path), evaluate=shape_area_surrogate(SMALL))
    assert (run_dir / LOCK_FILE).read_text() == str(os.getpid())


def test_stale_lock_from_dead_process_is_replaced(tmp_path):
    finished = subprocess.run([sys.executable, "-c", "import os; print(os.getpid())"], capture_output=True, text=True)
    run_dir = tmp_path / "run"
    run_dir.mkdir()
    (run_dir / LOCK_FILE).write_text(finished.stdout.strip())
    run_evolve(small_config(tmp_path, generations=1), evaluate=shape_area_surrogate(SMALL))
    assert latest_checkpoint(run_dir).name == "gen_0001.json"
    assert not (run_dir / LOCK_FILE).exists()


KILLED_RUN_SCRIPT = """
import sys, time
sys.path[:0] = [{root!r}, {tests!r}]
from conftest import shape_area_surrogate
from app.runner.evolve import run_evolve
from app.schemas.run import RunConfig
from app.search.genotype import get_template

surrogate = shape_area_surrogate(get_template("lenet5_small", "mnist"))

def slow(genotype):
    time.sleep(0.2)
    return surrogate(genotype)

config = RunConfig(template="lenet5_small", dataset="mnist", population=6, generations=50, seed=3,
                   workers=1, output_dir={run_dir!r})
run_evolve(config, evaluate=slow)
"""


@pytest.mark.skipif(not hasattr(signal, "SIGKILL"), reason="POSIX 시그널 필요")
def test_run_killed_mid_search_resumes(tmp_path):
    run_dir = tmp_path / "run"
    tests_dir = Path(__file__).resolve().parent
    script = KILLED_RUN_SCRIPT.format(root=str(tests_dir.parent), tests=str(tests_dir), run_dir=str(run_dir))
    process = subprocess.Popen([sys.executable, "-c", script])
    try:
        deadline = time.time() + 120
        while not (run_dir / CHECKPOINT_DIR / "gen_0003.json").exists():
            assert process.poll() is None, "search process exited before generation 3"
            assert time.time() < deadline, "generation 3 checkpoint never appeared"
            time.sleep(0.02)
        process.send_signal(signal.SIGTERM)
        process.wait(timeout=30)
    finally:
        if process.poll() is None:
            process.kill()
            process.wait()

    assert (run_dir / LOCK_FILE).exists()
    killed_at = load_checkpoint(latest_checkpoint(run_dir)).generation
    assert killed_at >= 3

    resumed = run_evolve(
        small_config(tmp_path, generations=killed_at + 2, workers=1),
        evaluate=shape_area_surrogate(SMALL),
    )
    names = {p.name for p in (resumed / CHECKPOINT_DIR).iterdir()}
    assert f"gen_{killed_at + 1:04d}.json" in names
    assert f"gen_{killed_at + 2:04d}.json" in names
    assert (resumed / FRONT_JSON).exists()
    assert not (resumed / LOCK_FILE).exists()


def test_corrupt_checkpoint_is_reported(tmp_path):
    run_dir = run_evolve(small_config(tmp_path, generations=1), evaluate=shape_area_surrogate(SMALL))
    (run_dir / CHECKPOINT_DIR / "gen_0001.json").write_text("{not json")
    with pytest.raises(ArtifactError):
        run_evolve(small_config(tmp_path, generations=2), evaluate=shape_area_surrogate(SMALL))


def test_three_objective_run_exports_kernel_counts(tmp_path):
    run_dir = run_evolve(
        small_config(tmp_path, mode=Mode.THREE_OBJ, generations=4, mutation_rate=0.3),
        evaluate=shape_area_surrogate(SMALL),
    )
    front = read_front(run_dir)
    assert all(m.mode is Mode.THREE_OBJ for m in front)
    assert min(m.kernel_count for m in front) < SMALL.total_slots


def test_run_retrain_from_reference_point(tmp_path):
    run_dir = run_evolve(small_config(tmp_path, generations=1), evaluate=shape_area_surrogate(SMALL))
    data = make_dataset(30, shape=(1, 28, 28))
    report = run_retrain(RetrainConfig(epochs=1, batch_size=15), run_dir=run_dir, ref="ref3", train_set=data, test_set=data)
    assert report.source.endswith(":ref3")
    assert report.reduction == f"{report.reduction_factor:.2f}x"
    assert (run_dir / "retrain_ref3_mnist.json").exists()


def test_run_retrain_transfers_architecture_to_another_dataset(tmp_path):
    run_dir = run_evolve(small_config(tmp_path, generations=1), evaluate=shape_area_surrogate(SMALL))
    data = make_dataset(24, shape=(3, 32, 32))
    config = RetrainConfig(dataset="cifar10", epochs=1, batch_size=12)
    report = run_retrain(config, run_dir=run_dir, ref="ref1", train_set=data, test_set=data)

    cifar = get_template("lenet5_small", "cifar10")
    genotype = reference_genotype(run_dir, "ref1")
    assert report.dataset == "cifar10"
    assert report.mults == genotype_cost(genotype, cifar).total_conv_mults
    assert report.benchmark_mults == genotype_cost(uniform_genotype(cifar), cifar).total_conv_mults
    assert report.benchmark_mults > genotype_cost(uniform_genotype(SMALL), SMALL).total_conv_mults
    assert (run_dir / "retrain_ref1_cifar10.json").exists()


def test_retrain_report_matches_augmentation_used(tmp_path, monkeypatch):
    calls = []
    real_train = evaluator_module.train

    def recording_train(*args, **kwargs):
        calls.append(kwargs["augment"])
        return real_train(*args, **kwargs)

    monkeypatch.setattr(evaluator_module, "train", recording_train)
    path = tmp_path / "benchmark.txt"
    write_genotype_file(uniform_genotype(get_template("lenet5_small", "cifar10")), path)
    data = make_dataset(16, shape=(3, 32, 32))

    report = run_retrain(
        RetrainConfig(dataset="cifar10", epochs=1, batch_size=16),
        genotype_file=path, template_id="lenet5_small", train_set=data, test_set=data,
    )
    assert calls == [True] and report.augment is True

    calls.clear()
    report = run_retrain(
        RetrainConfig(dataset="cifar10", epochs=1, batch_size=16, augment=False),
        genotype_file=path, template_id="lenet5_small", train_set=data, test_set=data,
    )
    assert calls == [False] and report.augment is False


def test_reference_point_missing_from_front(run_settings, tmp_path):
    run_dir = run_evolve(small_config(tmp_path, generations=1), evaluate=shape_area_surrogate(SMALL))
    points = read_json(run_dir / REFERENCE_JSON)
    points["ref2"]["member_id"] = 999
    write_json(run_dir / REFERENCE_JSON, points)

    with pytest.raises(ArtifactError, match="#999"):
        reference_genotype(run_dir, "ref2")
    data = make_dataset(10, shape=(1, 28, 28))
    with pytest.raises(ArtifactError):
        run_retrain(RetrainConfig(epochs=0), run_dir=run_dir, ref="ref2", train_set=data, test_set=data)
    assert main(["export-kernels", "--run-dir", str(run_dir), "--ref", "ref2"]) == 2


def test_batch_size_default_follows_settings(monkeypatch):
    assert RunConfig().batch_size == settings.DEFAULT_BATCH_SIZE
    monkeypatch.setattr(settings, "DEFAULT_BATCH_SIZE", 32)
    assert RunConfig().batch_size == 32
    assert RetrainConfig().batch_size == 32
    assert RunConfig(batch_size=8).batch_size == 8


# === CLI ===

def test_cli_cost_json(run_settings, capsys):
    assert main(["--json", "cost", "--template", "lenet5", "--dataset", "cifar10", "--all-square", "5x5"]) == 0
    report = orjson.loads(capsys.readouterr().out)
    assert report["total_conv_mults"] == 15_564_800
    assert report["per_layer_mults"] == [2_457_600, 13_107_200]


def test_cli_exit_codes(run_settings, tmp_path, capsys):
    bad = tmp_path / "bad.txt"
    bad.write_text("1 2 x\n")
    assert main(["cost", "--genotype", str(bad)]) == 2
    assert main(["evolve", "--population", "3", "--output-dir", str(tmp_path / "odd")]) == 2
    assert main(["export-front", "--run-dir", str(tmp_path / "empty")]) == 2
    assert main(["--json", "cost", "--all-square", "7x7"]) == 2
    error = orjson.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert error["error"] == "ConfigError"


def test_cli_evolve_reports_missing_data(run_settings, tmp_path):
    args = ["evolve", "--template", "lenet5_small", "--population", "4", "--generations", "0",
            "--data-dir", str(tmp_path / "nowhere"), "--output-dir", str(tmp_path / "run")]
    assert main(args) == 3


def test_cli_export_front_and_kernels(run_settings, tmp_path, capsys):
    run_dir = run_evolve(small_config(tmp_path, generations=2), evaluate=shape_area_surrogate(SMALL))
    (run_dir / FRONT_JSON).unlink()
    assert main(["export-front", "--run-dir", str(run_dir)]) == 0
    assert (run_dir / FRONT_JSON).exists()

    output = tmp_path / "kernels.csv"
    capsys.readouterr()
    assert main(["--json", "export-kernels", "--run-dir", str(run_dir), "--ref", "ref2", "--output", str(output)]) == 0
    rows = orjson.loads(capsys.readouterr().out)
    assert len(rows) == 20
    assert output.read_text().startswith("layer_index,shape_label,count")
