# pra_radar/runner.py

import logging
import threading
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime
from typing import Dict, Optional, Sequence

from . import config
from .benchmarks import BenchmarkSuite, SchemeResult, warm_start_designs
from .schemas import SchemeId

logger = logging.getLogger(__name__)


class ExperimentRunner:
    """
    Worker pool for scheme evaluations over one shared, read-only scene.

    The proposed scheme runs after the other schemes because it is
    warm-started from the SPRA and CPA solutions.
    """

    def __init__(self, max_workers: int = config.MAX_WORKERS):
        self.max_workers = max_workers
        self._lock = threading.Lock()
        self.jobs_submitted = 0
        self.jobs_finished = 0
        self.jobs_failed = 0
        self.last_run: Optional[datetime] = None

    def _count(self, field: str) -> None:
        with self._lock:
            setattr(self, field, getattr(self, field) + 1)

    def _solve(self, suite: BenchmarkSuite, scheme: SchemeId, warm_starts=()) -> SchemeResult:
        try:
            result = suite.solve(scheme, warm_starts=warm_starts)
        except Exception as e:
            self._count("jobs_failed")
            logger.error(f"Scheme {scheme.value} failed: {e}")
            raise
        self._count("jobs_finished")
        logger.info(f"Scheme {scheme.value} finished: objective {result.objective:.10g}, bcrb {result.bcrb:.6g}")
        return result

    def run_schemes(self, suite: BenchmarkSuite, schemes: Sequence[SchemeId]) -> Dict[SchemeId, SchemeResult]:
        """Solve every scheme; returned in the requested order"""
        schemes = [SchemeId(s) for s in schemes]
        results: Dict[SchemeId, SchemeResult] = {}

        with ThreadPoolExecutor(max_workers=self.max_workers) as pool:
            futures = {}
            for scheme in suite.prerequisites(schemes):
                self._count("jobs_submitted")
                futures[scheme] = pool.submit(self._solve, suite, scheme)
            # Reihenfolge ist deterministisch, egal welcher Job zuerst fertig wird
            for scheme, future in futures.items():
                results[scheme] = future.result()

        if SchemeId.PROPOSED_PRA in schemes:
            self._count("jobs_submitted")
            results[SchemeId.PROPOSED_PRA] = self._solve(
                suite, SchemeId.PROPOSED_PRA, warm_starts=warm_start_designs(results)
            )

        with self._lock:
            self.last_run = datetime.now()
        return {scheme: results[scheme] for scheme in schemes}

    def get_status(self) -> dict:
        """Counters of the runner since startup"""
        with self._lock:
            return {
                "max_workers": self.max_workers,
                "jobs_submitted": self.jobs_submitted,
                "jobs_finished": self.jobs_finished,
                "jobs_failed": self.jobs_failed,
                "last_run": self.last_run.isoformat() if self.last_run else None,
            }


# Global runner instance
runner_instance = ExperimentRunner()
