"""
Performance Monitoring
Time every similarity metric over a plan set and generate reports
"""

import json
import random
import statistics
import time
from datetime import datetime
from itertools import combinations
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from plandiv.planning.ground_sim import all_groundings, random_walk
from plandiv.planning.metrics import MetricId, MetricSpec, compute
from plandiv.planning.pddl_core import Plan, PlanningTask, load_plan_file, load_task_files
from plandiv.planning.selection import pairwise_matrix
from plandiv.utils.logger import get_logger, setup_logging

logger = get_logger(__name__)


def _stats(samples: Sequence[float]) -> Dict[str, float]:
    """Milliseconds summary of a list of durations in seconds"""
    if not samples:
        return {"count": 0, "average": 0.0, "median": 0.0, "p95": 0.0, "maximum": 0.0}
    ordered = sorted(sample * 1000.0 for sample in samples)
    return {
        "count": len(ordered),
        "average": statistics.mean(ordered),
        "median": statistics.median(ordered),
        "p95": ordered[min(len(ordered) - 1, int(len(ordered) * 0.95))],
        "maximum": ordered[-1],
    }


class MetricPerformanceMonitor:
    """Per-pair and full-matrix timings of the similarity metrics"""

    def __init__(self, task: PlanningTask, plans: Sequence[Plan], workers: int = 1):
        self.task = task
        self.plans = list(plans)
        self.workers = workers

    @classmethod
    def with_random_plans(cls, task: PlanningTask, count: int, seed: int = 0, max_steps: int = 60,
                          workers: int = 1, attempts: int = 50) -> "MetricPerformanceMonitor":
        """Plans from seeded random walks; walks that miss the goal are retried"""
        rng = random.Random(seed)
        groundings = all_groundings(task.domain, task.problem)
        plans: List[Plan] = []
        for index in range(count):
            for _ in range(attempts):
                plan = random_walk(task.domain, task.problem, rng, max_steps,
                                   source=f"random-{index:03d}", groundings=groundings)
                if plan is not None:
                    plans.append(plan)
                    break
        logger.info(f"Generated {len(plans)}/{count} random plans (seed {seed})")
        return cls(task, plans, workers)

    def measure_metric(self, metric: MetricId, max_pairs: int = 200) -> Dict[str, Any]:
        """Time `compute` on up to `max_pairs` plan pairs, validation included"""
        pairs = list(combinations(self.plans, 2))[:max_pairs]
        times = [compute(metric, pa, pb, self.task).compute_time for pa, pb in pairs]
        return {"metric": metric.value, "pair_ms": _stats(times)}

    def measure_matrix(self, metric: MetricId) -> Dict[str, Any]:
        start = time.perf_counter()
        matrix = pairwise_matrix(self.plans, self.task, MetricSpec.single(metric), self.workers)
        elapsed = time.perf_counter() - start
        n = len(matrix)
        cells = [float(matrix.timings[i, j]) for i in range(n) for j in range(n) if i != j]
        return {"metric": metric.value, "plans": n, "seconds": elapsed, "cell_ms": _stats(cells)}

    def run_comprehensive_test(self, max_pairs: int = 200) -> Dict[str, Any]:
        logger.info(f"Timing {len(MetricId)} metrics over {len(self.plans)} plans...")
        total_start = time.perf_counter()
        pair_results = [self.measure_metric(metric, max_pairs) for metric in MetricId]
        matrix_results = [self.measure_matrix(metric) for metric in MetricId]
        lengths = [len(plan) for plan in self.plans]
        return {
            "overall_metrics": {
                "test_duration": time.perf_counter() - total_start,
                "plans": len(self.plans),
                "max_plan_length": max(lengths) if lengths else 0,
                "matrix_seconds_all_metrics": sum(result["seconds"] for result in matrix_results),
                "timestamp": datetime.now().isoformat(),
            },
            "pair_results": pair_results,
            "matrix_results": matrix_results,
            "test_configuration": {"max_pairs": max_pairs, "workers": self.workers,
                                   "problem": self.task.problem.name},
        }

    def generate_report(self, results: Dict[str, Any]) -> str:
        overall = results["overall_metrics"]
        report = f"""
# plandiv Metric Performance Report
Generated: {overall['timestamp']}

## Overall
- **Problem**: {results['test_configuration']['problem']}
- **Plans**: {overall['plans']} (longest {overall['max_plan_length']} steps)
- **Workers**: {results['test_configuration']['workers']}
- **All six matrices**: {overall['matrix_seconds_all_metrics']:.2f}s
- **Test Duration**: {overall['test_duration']:.2f}s

## Per-pair computation (ms, validation included)

| metric | pairs | average | median | p95 | max |
|---|---|---|---|---|---|
"""
        for result in results["pair_results"]:
            s = result["pair_ms"]
            report += (f"| {result['metric']} | {s['count']} | {s['average']:.3f} | {s['median']:.3f} "
                       f"| {s['p95']:.3f} | {s['maximum']:.3f} |\n")

        report += "\n## Full matrix\n\n| metric | seconds | cell p95 (ms) |\n|---|---|---|\n"
        for result in results["matrix_results"]:
            report += f"| {result['metric']} | {result['seconds']:.3f} | {result['cell_ms']['p95']:.3f} |\n"
        return report

    def save_results(self, results: Dict[str, Any], filename: Optional[str] = None,
                     output_dir: str = "monitoring") -> Path:
        if filename is None:
            timestamp = datetime.now().strftime('%Y%m%d_%H%M%S')
            filename = f"metric_performance_{timestamp}.json"

        directory = Path(output_dir)
        directory.mkdir(parents=True, exist_ok=True)
        filepath = directory / filename
        filepath.write_text(json.dumps(results, indent=2))
        logger.info(f"Performance results saved to {filepath}")

        report_filepath = filepath.with_suffix(".md")
        report_filepath.write_text(self.generate_report(results))
        logger.info(f"Performance report saved to {report_filepath}")
        return filepath


def main():
    import argparse

    parser = argparse.ArgumentParser(description="plandiv metric performance monitor")
    parser.add_argument("--domain", required=True, help="Domain PDDL file")
    parser.add_argument("--problem", required=True, help="Problem PDDL file")
    parser.add_argument("--plans", nargs="*", default=[], help="Plan files")
    parser.add_argument("--random", type=int, default=0, help="Add N random-walk plans")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--max-steps", type=int, default=60, help="Random-walk length limit")
    parser.add_argument("--max-pairs", type=int, default=200, help="Pairs timed per metric")
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--output", help="Output filename")
    parser.add_argument("--output-dir", default="monitoring")
    args = parser.parse_args()

    setup_logging("INFO")
    task = load_task_files(args.domain, args.problem)
    plans = [load_plan_file(path, task) for path in sorted(args.plans)]
    if args.random:
        generated = MetricPerformanceMonitor.with_random_plans(task, args.random, args.seed, args.max_steps)
        plans.extend(generated.plans)
    monitor = MetricPerformanceMonitor(task, plans, args.workers)

    results = monitor.run_comprehensive_test(args.max_pairs)

    overall = results["overall_metrics"]
    print("\nMetric Performance Results:")
    for result in results["pair_results"]:
        print(f"{result['metric']:>10}: {result['pair_ms']['average']:.3f} ms/pair (p95 {result['pair_ms']['p95']:.3f})")
    print(f"All matrices: {overall['matrix_seconds_all_metrics']:.2f}s over {overall['plans']} plans")

    monitor.save_results(results, args.output, args.output_dir)


if __name__ == "__main__":
    main()
