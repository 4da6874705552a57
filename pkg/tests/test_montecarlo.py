"""Monte Carlo reproduction of the published simulation summaries."""

import pytest

from fpcca.models import SimConfig
from fpcca.runner import ExperimentRunner, run_replication

pytestmark = pytest.mark.slow


@pytest.fixture(scope="module")
def runner():
    return ExperimentRunner(m=9, mode="covariance")


def test_cca_n250(runner):
    report = runner.montecarlo(SimConfig(n=250, seed=0), replications=100)
    assert report.mean_first == pytest.approx(0.7248, abs=0.03)
    assert report.mean_second == pytest.approx(0.0777, abs=0.02)
    assert 0.04 <= report.sd_first <= 0.17


def test_cca_n500(runner):
    report = runner.montecarlo(SimConfig(n=500, seed=0), replications=100)
    assert report.mean_first == pytest.approx(0.7147, abs=0.03)
    assert report.mean_second == pytest.approx(0.055, abs=0.02)


def test_pcca_n250(runner):
    cfg = SimConfig(n=250, seed=0, model="pcca_triple")
    report = runner.montecarlo(cfg, replications=100)
    assert report.mean_first == pytest.approx(0.7107, abs=0.03)
    assert report.mean_second == pytest.approx(0.0818, abs=0.02)


def test_pcca_n500(runner):
    cfg = SimConfig(n=500, seed=0, model="pcca_triple")
    report = runner.montecarlo(cfg, replications=100)
    assert report.mean_first == pytest.approx(0.7141, abs=0.03)
    assert report.mean_second == pytest.approx(0.0553, abs=0.02)


def test_replication_matches_run(runner):
    cfg = SimConfig(n=250, seed=5)
    report = runner.montecarlo(cfg, replications=3)
    r, first, second = run_replication(cfg, 2, 9, "covariance")
    assert (report.first[r], report.second[r]) == (first, second)
