import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .config import Settings, resolve
from .eigensolver import verify_bound
from .errors import PoincareError
from .models import Scenario, VerificationReport

log = logging.getLogger("poincare-bound")


@dataclass
class SuiteOutcome:
    reports: list[VerificationReport] = field(default_factory=list)
    failures: list[tuple[str, str]] = field(default_factory=list)

    @property
    def passed(self) -> int:
        return sum(1 for r in self.reports if r.passed)

    @property
    def exit_code(self) -> int:
        if self.failures or any(not r.passed for r in self.reports):
            return 1
        return 0


def _run_one(scenario: Scenario, settings: Settings) -> VerificationReport | tuple[str, str]:
    try:
        return verify_bound(scenario, settings)
    except PoincareError as e:
        log.error("scenario %s failed: %s", scenario.scenario_id, e)
        return scenario.scenario_id, f"{type(e).__name__}: {e}"
    except Exception as e:
        log.exception("scenario %s raised unexpectedly", scenario.scenario_id)
        return scenario.scenario_id, f"{type(e).__name__}: {e}"


def run_suite(
    scenarios: list[Scenario], parallelism: int | None = None, settings: Settings | None = None
) -> SuiteOutcome:
    """
    verify_bound for every scenario; reports keep config order whatever the
    completion order, and a failing scenario is recorded, never raised.
    """
    s = resolve(settings)
    jobs = max(1, parallelism if parallelism is not None else s.jobs)
    outcome = SuiteOutcome()
    if not scenarios:
        return outcome

    log.info("running %d scenarios with %d workers", len(scenarios), jobs)
    if jobs == 1:
        results = [_run_one(sc, s) for sc in scenarios]
    else:
        with ThreadPoolExecutor(max_workers=jobs, thread_name_prefix="scenario") as pool:
            results = list(pool.map(lambda sc: _run_one(sc, s), scenarios))

    for res in results:
        if isinstance(res, VerificationReport):
            outcome.reports.append(res)
        else:
            outcome.failures.append(res)

    log.info(
        "suite finished: %d/%d passed, %d failed to run",
        outcome.passed,
        len(outcome.reports),
        len(outcome.failures),
    )
    return outcome
