"""Detector error model, Monte Carlo sweeps, and scaling measurements.

The closed-form rates model imperfect photon detectors: measuring one
qubit involves two detectors, so a chain of ``L`` measured qubits survives
with probability ``f**(2L)`` at per-detector fidelity ``f``.  First-order
detector faults can be corrected by guessing one of two by-products, which
halves the resulting node error rate.

The sweep harness reruns generation + renormalization over seed lists and
aggregates output error rates, path-length statistics and wall times
(generation excluded) per configuration.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import StatsError
from .lattice import GenModel, ModelKind, generate_faulty
from .renormalize import output_error_rate, renormalize

# Loss tolerance of the coarse lattice's error correction: adaptive
# basis switching tolerates 14.5% missing bonds, statically treating both
# endpoints of a missing bond as lost tolerates about 6.5%.
ADAPTIVE_LOSS_THRESHOLD = 0.145
STATIC_LOSS_THRESHOLD = 0.065

# Bond-failure rate above which no spanning cluster survives.
PERCOLATION_FAILURE_THRESHOLD = 0.373

DEFAULT_FUSION_FAILURE = 0.25

# Single-core reference wall time for box size 20 on a 5x5x3 box grid,
# reported alongside timing results for context only (never asserted).
BASELINE_SECONDS_B20 = 1.34


@dataclass(frozen=True)
class ErrorModelParams:
    """Inputs of the closed-form detector error model.

    ``fidelity`` is the per-detector-event fidelity, ``mean_length`` the
    mean path length in edges, and ``halving`` enables the random
    by-product correction of first-order detector faults.
    """

    fidelity: float
    mean_length: float
    halving: bool = False

    def __post_init__(self):
        if not 0.0 <= self.fidelity <= 1.0:
            raise StatsError(f"fidelity must be in [0, 1], got {self.fidelity}")
        if self.mean_length <= 0:
            raise StatsError(f"mean length must be positive, got {self.mean_length}")


def path_error_rate(params: ErrorModelParams) -> float:
    """Accumulated error probability of one purified bond: 1 - f**(2*L)."""
    return 1.0 - params.fidelity ** (2.0 * params.mean_length)


def node_error_rate(params: ErrorModelParams) -> float:
    """Error probability attributed to one purified node.

    A node owns half of each of its four paths, i.e. ``4 * (L / 2) = 2 L``
    qubits, each read out by two detectors.  With the halving flag set the
    random first-order correction divides the rate by two.
    """
    qubits = 2.0 * params.mean_length
    rate = 1.0 - params.fidelity ** (2.0 * qubits)
    return rate / 2.0 if params.halving else rate


def required_fidelity(target_node_error: float, mean_length: float) -> float:
    """Detector fidelity needed to reach a halved node error rate.

    Closed-form inverse of :func:`node_error_rate` with halving enabled.
    """
    if not 0.0 < target_node_error < 0.5:
        raise StatsError(
            f"halved node error rate is confined to (0, 0.5); "
            f"target {target_node_error} is unattainable"
        )
    if mean_length <= 0:
        raise StatsError(f"mean length must be positive, got {mean_length}")
    return (1.0 - 2.0 * target_node_error) ** (1.0 / (4.0 * mean_length))


@dataclass(frozen=True)
class SweepRecord:
    """Aggregated outcome of one (p_fail, box size) configuration."""

    p_fail: float
    box_size: int
    seeds: tuple[int, ...]
    rates: tuple[float, ...]          # output error rate per seed
    input_fractions: tuple[float, ...]  # realized bond-failure fraction per seed
    length_counts: dict[int, int]     # pooled realized path lengths
    wall_s: float                     # mean renormalization seconds per instance

    @property
    def mean_out(self) -> float:
        return float(np.mean(self.rates))

    @property
    def stderr_out(self) -> float | None:
        if len(self.rates) < 2:
            return None
        return float(np.std(self.rates, ddof=1) / math.sqrt(len(self.rates)))

    @property
    def mean_input(self) -> float:
        return float(np.mean(self.input_fractions))

    @property
    def path_count(self) -> int:
        return sum(self.length_counts.values())

    @property
    def mean_len(self) -> float | None:
        if self.path_count == 0:
            return None
        total = sum(length * n for length, n in self.length_counts.items())
        return total / self.path_count

    @property
    def stderr_len(self) -> float | None:
        n = self.path_count
        if n < 2:
            return None
        mean = self.mean_len
        var = sum(cnt * (length - mean) ** 2 for length, cnt in self.length_counts.items())
        return math.sqrt(var / (n - 1)) / math.sqrt(n)

    @property
    def below_adaptive_threshold(self) -> bool:
        return self.mean_out < ADAPTIVE_LOSS_THRESHOLD

    @property
    def below_static_threshold(self) -> bool:
        return self.mean_out < STATIC_LOSS_THRESHOLD


CSV_HEADER = "p_fail,B,seeds,mean_out,stderr_out,mean_len,stderr_len,wall_s"


@dataclass(frozen=True)
class SweepReport:
    """Records of one sweep plus the metadata to reproduce it."""

    kind: str  # "box_size" or "input_error"
    records: tuple[SweepRecord, ...]
    model_kind: ModelKind
    coarse_dims: tuple[int, int, int]
    seed_list: tuple[int, ...]

    def to_csv(self) -> str:
        def fmt(x):
            return "" if x is None else f"{x:.6g}"

        lines = [CSV_HEADER]
        for r in self.records:
            lines.append(",".join([
                fmt(r.p_fail), str(r.box_size), str(len(r.seeds)),
                fmt(r.mean_out), fmt(r.stderr_out),
                fmt(r.mean_len), fmt(r.stderr_len), fmt(r.wall_s),
            ]))
        return "\n".join(lines) + "\n"

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "model": self.model_kind.value,
            "coarse_dims": list(self.coarse_dims),
            "seeds": list(self.seed_list),
            "records": [
                {
                    "p_fail": r.p_fail,
                    "box_size": r.box_size,
                    "seeds": list(r.seeds),
                    "rates": list(r.rates),
                    "mean_out": r.mean_out,
                    "stderr_out": r.stderr_out,
                    "mean_input": r.mean_input,
                    "mean_len": r.mean_len,
                    "stderr_len": r.stderr_len,
                    "wall_s": r.wall_s,
                    "below_adaptive_threshold": r.below_adaptive_threshold,
                    "below_static_threshold": r.below_static_threshold,
                    "length_histogram": {str(k): v for k, v in sorted(r.length_counts.items())},
                }
                for r in self.records
            ],
        }

    def improvement_region(self) -> list[dict]:
        """Per configuration: does the output error beat the input error?

        The boundary is never a point claim; each entry carries the margin
        and its standard error so callers can quote an interval.
        """
        out = []
        for r in self.records:
            margin = r.p_fail - r.mean_out
            out.append({
                "p_fail": r.p_fail,
                "box_size": r.box_size,
                "mean_out": r.mean_out,
                "stderr_out": r.stderr_out,
                "improved": margin > 0,
                "margin": margin,
            })
        return out


def _run_one(task):
    p_fail, box_size, seed, coarse_dims, kind_value, q_skip = task
    model = GenModel(kind=ModelKind(kind_value), p_fail=p_fail, q_skip=q_skip, seed=seed)
    dims = tuple(d * box_size for d in coarse_dims)
    instance = generate_faulty(dims, model, box_size=box_size)
    start = time.perf_counter()
    purified, _plan = renormalize(instance, box_size)
    wall = time.perf_counter() - start
    rate = output_error_rate(purified)
    input_frac = instance.failed_bonds / instance.ideal_bonds
    return rate, purified.realized_lengths(), wall, input_frac


def _run_config(p_fail, box_size, seeds, coarse_dims, model_kind, q_skip, jobs):
    tasks = [(p_fail, box_size, s, coarse_dims, model_kind.value, q_skip) for s in seeds]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_one, tasks))
    else:
        results = [_run_one(t) for t in tasks]
    counts: dict[int, int] = {}
    for _, lengths, _, _ in results:
        for length in lengths:
            counts[length] = counts.get(length, 0) + 1
    return SweepRecord(
        p_fail=p_fail,
        box_size=box_size,
        seeds=tuple(seeds),
        rates=tuple(r for r, _, _, _ in results),
        input_fractions=tuple(f for _, _, _, f in results),
        length_counts=counts,
        wall_s=float(np.mean([w for _, _, w, _ in results])),
    )


def sweep_box_size(p_fail: float, box_sizes: Sequence[int], seeds: Sequence[int],
                   coarse_dims=(5, 5, 3), model_kind=ModelKind.INDEPENDENT_BOND,
                   q_skip: float = 0.1, jobs: int = 1) -> SweepReport:
    """Output error rate as a function of the box size at fixed ``p_fail``."""
    records = tuple(
        _run_config(p_fail, b, seeds, tuple(coarse_dims), model_kind, q_skip, jobs)
        for b in box_sizes
    )
    return SweepReport("box_size", records, model_kind, tuple(coarse_dims), tuple(seeds))


def sweep_input_error(p_fails: Sequence[float], box_size: int, seeds: Sequence[int],
                      coarse_dims=(5, 5, 3), model_kind=ModelKind.INDEPENDENT_BOND,
                      q_skip: float = 0.1, jobs: int = 1) -> SweepReport:
    """Output error rate as a function of the fusion failure rate at fixed B."""
    records = tuple(
        _run_config(p, box_size, seeds, tuple(coarse_dims), model_kind, q_skip, jobs)
        for p in p_fails
    )
    return SweepReport("input_error", records, model_kind, tuple(coarse_dims), tuple(seeds))


@dataclass(frozen=True)
class LengthHistogram:
    counts: dict[int, int]
    total: int
    mean: float
    stderr: float


def path_length_histogram(report: SweepReport, box_size: int | None = None) -> LengthHistogram:
    """Pooled integer-binned path-length distribution of a sweep.

    Restricts to one box size when given.  Raises when the selection holds
    no realized path at all.
    """
    counts: dict[int, int] = {}
    for r in report.records:
        if box_size is not None and r.box_size != box_size:
            continue
        for length, n in r.length_counts.items():
            counts[length] = counts.get(length, 0) + n
    total = sum(counts.values())
    if total == 0:
        raise StatsError("no realized paths: length statistics undefined")
    mean = sum(k * v for k, v in counts.items()) / total
    if total > 1:
        var = sum(v * (k - mean) ** 2 for k, v in counts.items()) / (total - 1)
        stderr = math.sqrt(var / total)
    else:
        stderr = 0.0
    return LengthHistogram(dict(sorted(counts.items())), total, mean, stderr)


@dataclass(frozen=True)
class TimingReport:
    box_sizes: tuple[int, ...]
    seconds: tuple[float, ...]      # mean renormalization wall time per box size
    exponent: float                 # fitted log-log slope
    prefactor: float
    max_residual_frac: float        # worst |fit - measured| / measured
    reference_seconds: float = BASELINE_SECONDS_B20

    def fitted(self, box_size: float) -> float:
        return self.prefactor * box_size ** self.exponent


def timing_scaling(box_sizes: Sequence[int], seeds: Sequence[int] = (0, 1, 2),
                   coarse_dims=(5, 5, 3), p_fail: float = DEFAULT_FUSION_FAILURE) -> TimingReport:
    """Wall time of the structures+paths phase versus box size.

    Lattice generation is excluded from the timing.  Fits a power law in
    log-log space and reports the worst relative deviation of the fit.
    """
    times = []
    for b in box_sizes:
        walls = []
        for seed in seeds:
            model = GenModel(p_fail=p_fail, seed=seed)
            instance = generate_faulty(tuple(d * b for d in coarse_dims), model, box_size=b)
            start = time.perf_counter()
            renormalize(instance, b)
            walls.append(time.perf_counter() - start)
        times.append(float(np.mean(walls)))
    log_b = np.log(np.asarray(box_sizes, dtype=float))
    log_t = np.log(np.asarray(times))
    slope, intercept = np.polyfit(log_b, log_t, 1)
    fitted = np.exp(intercept) * np.asarray(box_sizes, dtype=float) ** slope
    resid = float(np.max(np.abs(fitted - np.asarray(times)) / np.asarray(times)))
    return TimingReport(tuple(box_sizes), tuple(times), float(slope),
                        float(np.exp(intercept)), resid)
