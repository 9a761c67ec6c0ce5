import json

import pytest

from src.engine.errors import ConfigError
from src.harness.models import DatasetSource, RunConfig
from src.training.models import TrainMode
from src.utils.config import default_scale_grid, load_run_config, resolve_threads


def write(tmp_path, doc, name="run.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc) if not isinstance(doc, str) else doc)
    return path


def test_syntax_error_reports_line_and_column(tmp_path):
    path = write(tmp_path, '{\n  "seed": 1,\n  "arch": }\n')
    with pytest.raises(ConfigError, match="line 3, column") as info:
        load_run_config(path)
    assert info.value.field == "config"


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_run_config(tmp_path / "absent.json")


def test_top_level_must_be_object(tmp_path):
    with pytest.raises(ConfigError):
        load_run_config(write(tmp_path, "[1, 2]"))


def test_seed_is_mandatory(tmp_path):
    with pytest.raises(ConfigError) as info:
        load_run_config(write(tmp_path, {"arch": "linear"}))
    assert info.value.field == "seed"


def test_cifar_source_needs_existing_path(tmp_path):
    doc = {"seed": 1, "dataset": {"source": "cifar10", "path": str(tmp_path / "nowhere")}}
    with pytest.raises(ConfigError) as info:
        load_run_config(write(tmp_path, doc))
    assert info.value.field == "dataset.path"

    doc["dataset"].pop("path")
    with pytest.raises(ConfigError) as info:
        load_run_config(write(tmp_path, doc))
    assert info.value.field == "dataset.path"

    doc["dataset"]["path"] = str(tmp_path)
    assert load_run_config(write(tmp_path, doc)).dataset.source is DatasetSource.CIFAR10


def test_master_seed_is_inherited(tmp_path):
    doc = {
        "seed": 11,
        "dataset": {"n_test": 20},
        "train": {"seed": 4},
        "attacks": [{"kind": "fgsm"}, {"kind": "pgd", "seed": 2}],
    }
    cfg = load_run_config(write(tmp_path, doc))
    assert cfg.dataset.seed == 11
    assert cfg.train.seed == 4
    assert [a.seed for a in cfg.attacks] == [11, 2]


def test_default_attack_is_pgd20_with_master_seed():
    cfg = RunConfig(seed=5)
    assert [a.label for a in cfg.attacks] == ["pgd20"]
    assert cfg.attacks[0].seed == 5
    assert cfg.train.mode is TrainMode.STANDARD


def test_overrides_apply_before_validation(tmp_path):
    path = write(tmp_path, {"seed": 1, "subset": 100})
    cfg = load_run_config(path, {"seed": 9, "subset": 10, "threads": None, "output_dir": tmp_path / "out"})
    assert (cfg.seed, cfg.subset, cfg.threads) == (9, 10, None)
    assert cfg.dataset.seed == 9
    assert cfg.output_dir == tmp_path / "out"


def test_output_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("FREQLENS_OUTPUT_DIR", str(tmp_path / "env-out"))
    assert load_run_config(write(tmp_path, {"seed": 1})).output_dir == tmp_path / "env-out"
    pinned = load_run_config(write(tmp_path, {"seed": 1, "output_dir": "runs/x"}))
    assert str(pinned.output_dir) == "runs/x"


@pytest.mark.parametrize(
    "doc,field",
    [
        ({"seed": 1, "scales": [0.5, 0.2]}, "scales"),
        ({"seed": 1, "scales": []}, "scales"),
        ({"seed": 1, "attacks": []}, "attacks"),
        ({"seed": 1, "attacks": [{"kind": "cw", "norm": "inf"}]}, "attacks.0"),
        ({"seed": 1, "train": {"mode": "adversarial", "inner_attack": {"kind": "fgsm"}}}, "train"),
        ({"seed": 1, "threads": 0}, "threads"),
    ],
)
def test_validation_errors_name_the_field(tmp_path, doc, field):
    with pytest.raises(ConfigError) as info:
        load_run_config(write(tmp_path, doc))
    assert info.value.field == field


def test_thread_resolution_order(monkeypatch):
    monkeypatch.delenv("FREQLENS_THREADS", raising=False)
    assert resolve_threads() == 1
    monkeypatch.setenv("FREQLENS_THREADS", "3")
    assert resolve_threads() == 3
    assert resolve_threads(None, 2) == 2
    assert resolve_threads(5, 2) == 5
    with pytest.raises(ConfigError):
        resolve_threads(0)


def test_malformed_thread_count_in_environment(monkeypatch):
    monkeypatch.setenv("FREQLENS_THREADS", "many")
    with pytest.raises(ConfigError) as info:
        resolve_threads()
    assert info.value.field == "FREQLENS_THREADS"


def test_default_scale_grid():
    grid = default_scale_grid()
    assert len(grid) == 21
    assert grid[0] == 0.0 and grid[-1] == 1.0
    assert all(b > a for a, b in zip(grid, grid[1:]))
