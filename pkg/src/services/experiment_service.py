"""Suite-level ablations: FAC against the baseline, memory length, components."""
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from src.evaluation.metrics import MetricsReport, aggregate_reports
from src.services.tracking_service import TrackingService
from src.synth.generator import generate
from src.synth.scenario import ScenarioConfig
from src.tracker.tracker_config import TrackerConfig

logger = logging.getLogger(__name__)

BASELINE = "no-fac"
FAC = "fac"
MEMORY_LENGTHS = (3, 10, None)


def memory_variant(length: Optional[int]) -> str:
    return f"memory-{length if length is not None else 'all'}"


def ablation_variants(base: TrackerConfig) -> Dict[str, TrackerConfig]:
    """
    Named tracker configurations compared by the ablation.

    The component rows switch features on one at a time: IoU only, then
    cosine appearance, then camera-motion compensation, then FAC.
    """
    variants = {
        BASELINE: base.model_copy(update={"use_fac": False}),
        FAC: base.model_copy(update={"use_fac": True, "memory_length": None}),
    }
    for length in MEMORY_LENGTHS:
        variants[memory_variant(length)] = base.model_copy(update={"use_fac": True, "memory_length": length})
    variants["iou-only"] = base.model_copy(update={"use_fac": False, "use_cosine": False, "use_cmc": False})
    variants["+cosine"] = base.model_copy(update={"use_fac": False, "use_cosine": True, "use_cmc": False})
    variants["+cmc"] = base.model_copy(update={"use_fac": False, "use_cosine": True, "use_cmc": True})
    variants["+fac"] = base.model_copy(update={"use_fac": True, "use_cosine": True, "use_cmc": True})
    return variants


def run_scenario(scenario: ScenarioConfig, cfg: TrackerConfig) -> MetricsReport:
    """Generate one scenario and score one tracker configuration on it."""
    seq = generate(scenario)
    return TrackingService(cfg).run(seq.frames(), gt=seq.gt).metrics


def _run_job(job: Tuple[str, int, ScenarioConfig, TrackerConfig]) -> Tuple[str, int, MetricsReport]:
    name, index, scenario, cfg = job
    return name, index, run_scenario(scenario, cfg)


@dataclass
class AblationResult:
    per_scenario: Dict[str, List[MetricsReport]]
    summary: Dict[str, MetricsReport] = field(init=False)

    def __post_init__(self):
        self.summary = {name: aggregate_reports(reports) for name, reports in self.per_scenario.items()}

    def total_idsw(self, name: str) -> int:
        return self.summary[name].idsw

    def mean_idf1(self, name: str) -> float:
        return self.summary[name].idf1

    def fac_beats_baseline(self, min_reduction: float = 0.3) -> bool:
        """FAC has strictly fewer ID switches, strictly higher mean IDF1 and the required IDSW reduction."""
        base, fac = self.total_idsw(BASELINE), self.total_idsw(FAC)
        if base == 0:
            return False
        return fac < base and self.mean_idf1(FAC) > self.mean_idf1(BASELINE) and (base - fac) / base >= min_reduction

    def memory_is_monotone(self) -> bool:
        """Suite IDF1 never drops as the memory window grows and unlimited memory beats the shortest window."""
        scores = [self.mean_idf1(memory_variant(length)) for length in MEMORY_LENGTHS]
        return all(a <= b for a, b in zip(scores, scores[1:])) and scores[0] < scores[-1]


class ExperimentService:
    """Runs every ablation variant over a scenario suite."""

    def __init__(self, base: TrackerConfig, jobs: int = 1):
        self.variants = ablation_variants(base)
        self.jobs = max(1, jobs)

    def run(self, suite: Sequence[ScenarioConfig], variants: Optional[Sequence[str]] = None) -> AblationResult:
        """
        Score the chosen variants (all by default) on every scenario.

        Scenarios run in a process pool when ``jobs > 1``; each job owns an
        independent tracker, so results do not depend on the job count.
        """
        names = list(variants) if variants is not None else list(self.variants)
        jobs = [(name, i, scenario, self.variants[name]) for name in names for i, scenario in enumerate(suite)]
        logger.info(f"Running {len(names)} variants over {len(suite)} scenarios ({len(jobs)} jobs, {self.jobs} workers)")

        if self.jobs == 1:
            outcomes = [_run_job(job) for job in jobs]
        else:
            with ProcessPoolExecutor(max_workers=self.jobs) as pool:
                outcomes = list(pool.map(_run_job, jobs))

        per_scenario: Dict[str, List[MetricsReport]] = {name: [None] * len(suite) for name in names}
        for name, index, report in outcomes:
            per_scenario[name][index] = report
            logger.debug(f"{name} scenario {index}: IDF1={report.idf1:.4f} IDSW={report.idsw}")
        return AblationResult(per_scenario=per_scenario)
