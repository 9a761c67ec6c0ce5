import json
import logging

import numpy as np
import pytest

from src.attacks.models import AttackConfig
from src.harness.export import write_spectrum_report
from src.harness.spectrum_report import clamp_sample_n, spectrum_report
from src.spectral.export import read_grid_csv
from src.spectral.statistics import mean_log_amplitude


def test_zero_budget_gives_zero_difference(convnet_model, small_dataset):
    report = spectrum_report(convnet_model, None, small_dataset, AttackConfig.fgsm(epsilon=0.0), sample_n=16)
    np.testing.assert_array_equal(report.diff_std, np.zeros((8, 8)))
    assert report.annulus_means_std == [0.0] * 4
    assert report.single_model
    assert report.sample_n == 16


def test_natural_map_uses_leading_samples(linear_model, small_dataset):
    report = spectrum_report(linear_model, None, small_dataset, AttackConfig.fgsm(), sample_n=10)
    np.testing.assert_array_equal(report.natural, mean_log_amplitude(small_dataset.images[:10]))
    assert report.attack == "fgsm"


def test_two_model_mode(linear_model, convnet_model, small_dataset):
    report = spectrum_report(convnet_model, linear_model, small_dataset, AttackConfig.fgsm(), sample_n=12, annulus_count=3)
    assert not report.single_model
    assert report.diff_adv.shape == (8, 8)
    assert len(report.annulus_means_adv) == 3
    assert not np.array_equal(report.diff_std, report.diff_adv)


def test_sample_n_is_clamped(small_dataset, caplog):
    with caplog.at_level(logging.WARNING, logger="freqlens"):
        assert clamp_sample_n(500, small_dataset) == len(small_dataset)
    assert "exceeds dataset size" in caplog.text
    assert clamp_sample_n(10, small_dataset) == 10


def test_report_files(tmp_path, linear_model, small_dataset):
    report = spectrum_report(linear_model, None, small_dataset, AttackConfig.fgsm(), sample_n=8)
    paths = write_spectrum_report(report, tmp_path / "spectrum")
    names = sorted(p.name for p in paths)
    assert names == [
        "adversarial_std.csv",
        "adversarial_std.tiff",
        "diff_std.csv",
        "diff_std.tiff",
        "natural.csv",
        "natural.tiff",
        "summary.json",
    ]

    summary = json.loads((tmp_path / "spectrum" / "summary.json").read_text())
    assert summary["sample_n"] == 8
    assert summary["annulus_means_adv"] is None
    assert summary["annulus_means_std"] == pytest.approx(report.annulus_means_std)


def test_two_model_report_writes_every_map(tmp_path, linear_model, convnet_model, small_dataset):
    report = spectrum_report(convnet_model, linear_model, small_dataset, AttackConfig.fgsm(), sample_n=8)
    write_spectrum_report(report, tmp_path / "spectrum")
    stems = sorted(p.stem for p in (tmp_path / "spectrum").glob("*.csv"))
    assert stems == ["adversarial_adv", "adversarial_std", "diff_adv", "diff_std", "natural"]
    written = read_grid_csv(tmp_path / "spectrum" / "adversarial_std.csv")
    np.testing.assert_allclose(written, report.adversarial_std, rtol=1e-5, atol=1e-6)


def test_report_bytes_are_reproducible(tmp_path, linear_model, small_dataset):
    cfg = AttackConfig.pgd(iterations=2, step_size=0.01, seed=4)
    for name in ("a", "b"):
        write_spectrum_report(spectrum_report(linear_model, None, small_dataset, cfg, sample_n=8), tmp_path / name)
    for path in sorted((tmp_path / "a").iterdir()):
        assert path.read_bytes() == (tmp_path / "b" / path.name).read_bytes()
