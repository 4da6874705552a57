"""Pipeline orchestration: datasets in, JSON-ready reports out."""

import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Tuple, Union

import numpy as np

from .errors import DataError
from .estimators import estimate_cca, estimate_pcca, fpca_summary
from .fpca import run_fpca
from .models import (
    CcaEstimate,
    FunctionalDataset,
    McReport,
    SimConfig,
    VerificationReport,
)
from .parser import FLOAT_FORMAT, DatasetParser
from .simulate import (
    CCA_PAIR,
    PCCA_TRIPLE,
    simulate,
    simulate_cca_pair,
    simulate_pcca_triple,
)
from .utils import CORRELATION, DEFAULT_HARMONICS, SCHEMA_VERSION
from .verify import run_verification

logger = logging.getLogger(__name__)

Report = Dict[str, Any]

MC_MODELS = {"cca": CCA_PAIR, "pcca": PCCA_TRIPLE}


def _second(correlations: np.ndarray) -> float:
    return float(correlations[1]) if correlations.size > 1 else 0.0


def run_replication(
    cfg: SimConfig, replication: int, m: int, mode: str
) -> Tuple[int, float, float]:
    """First and second estimated correlations of one simulated replication."""
    bound = cfg.for_replication(replication)
    if cfg.model == CCA_PAIR:
        x1, x2 = simulate_cca_pair(bound)
        estimate: CcaEstimate = estimate_cca(x1, x2, m, mode)
    else:
        cond, x2, x3 = simulate_pcca_triple(bound)
        # the conditioning paths are Z cos(pi t), a rank-one process
        estimate = estimate_pcca(cond, x2, x3, m, mode, m_cond=1)
    d = estimate.correlations
    return replication, float(d[0]), _second(d)


def _replication_task(args: Tuple[SimConfig, int, int, str]) -> Tuple[int, float, float]:
    return run_replication(*args)


def _format_float(value: float) -> str:
    if not np.isfinite(value):
        raise DataError(f"non-finite value {value!r} in report")
    text = format(value, FLOAT_FORMAT)
    return text if any(c in text for c in ".e") else text + ".0"


class ReportEncoder(json.JSONEncoder):
    """JSON encoder writing every float with 17 significant digits."""

    def iterencode(self, o: Any, _one_shot: bool = False) -> Iterator[str]:
        encode = json.encoder.encode_basestring_ascii
        if not self.ensure_ascii:
            encode = json.encoder.encode_basestring
        return json.encoder._make_iterencode(  # type: ignore[attr-defined]
            {} if self.check_circular else None,
            self.default,
            encode,
            self.indent,
            _format_float,
            self.key_separator,
            self.item_separator,
            self.sort_keys,
            self.skipkeys,
            _one_shot,
        )(o, 0)


def _matrix_columns(matrix: np.ndarray) -> List[List[float]]:
    return [column.tolist() for column in np.asarray(matrix).T]


class ExperimentRunner:
    """Runs the pipeline steps behind the command-line subcommands."""

    def __init__(self, m: int = DEFAULT_HARMONICS, mode: str = CORRELATION):
        """Initialize the runner.

        Args:
            m: Harmonics retained by FPCA
            mode: ``correlation`` or ``covariance`` estimation
        """
        self.m = m
        self.mode = mode
        self.parser = DatasetParser()

    def load(self, path: Union[str, Path]) -> FunctionalDataset:
        logger.info(f"Reading {path}")
        return self.parser.read(path)

    def simulate_to(self, cfg: SimConfig, out_dir: Union[str, Path]) -> List[Path]:
        """Simulate a model and write one CSV per process into ``out_dir``.

        Returns:
            Paths of the written files, x1.csv, x2.csv[, x3.csv]
        """
        datasets = simulate(cfg)
        directory = Path(out_dir)
        directory.mkdir(parents=True, exist_ok=True)
        written = []
        for k, ds in enumerate(datasets, start=1):
            path = directory / f"x{k}.csv"
            self.parser.write(ds, path)
            written.append(path)
        logger.info(f"Wrote {len(written)} datasets of {cfg.n} paths to {directory}")
        return written

    def fpca_report(self, ds: FunctionalDataset) -> Report:
        result = run_fpca(ds, self.m)
        eigenvalues, variances = fpca_summary(result)
        return {
            "schema": SCHEMA_VERSION,
            "command": "fpca",
            "n": ds.n,
            "m": result.eigensystem.m,
            "grid": ds.grid.points.tolist(),
            "eigenvalues": eigenvalues.tolist(),
            "score_variances": variances.tolist(),
            "eigenfunctions": _matrix_columns(result.eigensystem.eigenfunctions),
            "mean_curve": result.mean_curve.tolist(),
        }

    @staticmethod
    def _estimate_fields(estimate: CcaEstimate) -> Report:
        return {
            "correlations": estimate.correlations.tolist(),
            "left_coefficients": _matrix_columns(estimate.left_coeffs),
            "right_coefficients": _matrix_columns(estimate.right_coeffs),
            "grid": estimate.left.eigensystem.grid.points.tolist(),
            "left_weight_functions": _matrix_columns(estimate.left_weights),
            "right_weight_functions": _matrix_columns(estimate.right_weights),
        }

    def cca_report(self, ds1: FunctionalDataset, ds2: FunctionalDataset) -> Report:
        estimate = estimate_cca(ds1, ds2, self.m, self.mode)
        report: Report = {
            "schema": SCHEMA_VERSION,
            "command": "cca",
            "mode": self.mode,
            "m": self.m,
            "n": ds1.n,
        }
        report.update(self._estimate_fields(estimate))
        return report

    def pcca_report(
        self,
        cond: FunctionalDataset,
        ds2: FunctionalDataset,
        ds3: FunctionalDataset,
    ) -> Report:
        estimate = estimate_pcca(cond, ds2, ds3, self.m, self.mode)
        report: Report = {
            "schema": SCHEMA_VERSION,
            "command": "pcca",
            "mode": self.mode,
            "m": self.m,
            "m_cond": estimate.cond.eigensystem.m,
            "n": ds2.n,
        }
        report.update(self._estimate_fields(estimate))
        return report

    def montecarlo(
        self,
        cfg: SimConfig,
        replications: int,
        workers: int = 1,
    ) -> McReport:
        """Replicate simulate-then-estimate ``replications`` times.

        Replication r draws from stream (seed, r); results are ordered by r
        whatever the number of workers.
        """
        if replications < 2:
            raise DataError("a Monte Carlo run needs at least two replications")
        if workers < 1:
            raise DataError("workers must be at least 1")

        logger.info(
            f"Running {replications} replications of {cfg.model} with n={cfg.n}, "
            f"m={self.m}, mode={self.mode}"
        )
        tasks = [(cfg, r, self.m, self.mode) for r in range(replications)]
        start = time.perf_counter()
        if workers == 1:
            results = [_replication_task(task) for task in tasks]
        else:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(_replication_task, tasks))
        runtime = time.perf_counter() - start
        results.sort(key=lambda item: item[0])

        report = McReport(
            model=cfg.model,
            n=cfg.n,
            m=self.m,
            mode=self.mode,
            seed=cfg.seed,
            replications=replications,
            first=[first for _, first, _ in results],
            second=[second for _, _, second in results],
            runtime=runtime,
        )
        logger.info(f"Monte Carlo finished in {runtime:.1f}s")
        return report

    @staticmethod
    def montecarlo_report(report: McReport, timing: bool = False) -> Report:
        document: Report = {
            "schema": SCHEMA_VERSION,
            "command": "montecarlo",
            "model": report.model,
            "n": report.n,
            "m": report.m,
            "mode": report.mode,
            "seed": report.seed,
            "replications": report.replications,
            "mean_first": report.mean_first,
            "sd_first": report.sd_first,
            "mean_second": report.mean_second,
            "sd_second": report.sd_second,
            "first": list(report.first),
            "second": list(report.second),
        }
        if timing:
            document["runtime_seconds"] = report.runtime
        return document

    @staticmethod
    def verify(
        trials: int,
        dim: int,
        seed: int,
        tol: float,
        oracle_tol: float,
        inject_fault: Optional[str] = None,
    ) -> VerificationReport:
        logger.info(f"Verifying operator identities on {trials} random instances")
        return run_verification(
            trials=trials,
            dim=dim,
            seed=seed,
            tol=tol,
            oracle_tol=oracle_tol,
            inject_fault=inject_fault,
        )

    @staticmethod
    def verify_report(report: VerificationReport) -> Report:
        return {
            "schema": SCHEMA_VERSION,
            "command": "verify",
            "trials": report.trials,
            "dim": report.dim,
            "seed": report.seed,
            "passed": report.passed,
            "checks": [
                {
                    "name": check.name,
                    "max_error": check.max_error,
                    "tol": check.tol,
                    "passed": check.passed,
                }
                for check in report.checks
            ],
        }

    @staticmethod
    def dumps(document: Report) -> str:
        """JSON text with a trailing newline; field order is insertion order."""
        return json.dumps(document, indent=2, cls=ReportEncoder) + "\n"

    def save(self, document: Report, output_file: Union[str, Path]) -> None:
        with open(output_file, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(self.dumps(document))
        logger.info(f"Results saved to {output_file}")