"""A small end-to-end scaling study: error rates, lengths, wall time.

Sweeps the box size at fixed fusion failure rate and the failure rate at
fixed box size, pools path-length histograms, and fits the runtime power
law.  Results are written as CSV plus JSON next to this script; a PNG of
the histogram is saved too when matplotlib is importable.

This is deliberately smaller than the acceptance-grade runs (fewer seeds,
smaller boxes) so it finishes in well under a minute; crank the seed lists
up for paper-grade statistics.
"""

import json
from pathlib import Path

from raussim import path_length_histogram, sweep_box_size, sweep_input_error, timing_scaling

OUT = Path(__file__).resolve().parent
SEEDS = list(range(6))

print("== output error rate vs box size (p_fail = 0.25, 4x4x2 boxes) ==")
box_report = sweep_box_size(0.25, [8, 12, 16, 20], SEEDS, coarse_dims=(4, 4, 2))
for rec in box_report.records:
    flag = "below adaptive threshold" if rec.below_adaptive_threshold else "above threshold"
    print(f"  B={rec.box_size:2d}: {rec.mean_out:.4f} +- {rec.stderr_out:.4f}  ({flag})")

(OUT / "sweep_box.csv").write_text(box_report.to_csv())
(OUT / "sweep_box.json").write_text(json.dumps(box_report.to_json(), indent=2) + "\n")
print(f"  wrote {OUT / 'sweep_box.csv'} and .json")

print("\n== output vs input error rate (B = 12) ==")
input_report = sweep_input_error([0.15, 0.25, 0.35, 0.45], 12, SEEDS, coarse_dims=(4, 4, 2))
for entry in input_report.improvement_region():
    verdict = "improves" if entry["improved"] else "does not improve"
    print(f"  p_fail={entry['p_fail']:.2f}: output {entry['mean_out']:.4f}  ({verdict})")

print("\n== path-length histogram (B = 16) ==")
hist = path_length_histogram(box_report, box_size=16)
print(f"  {hist.total} paths, mean {hist.mean:.2f} +- {hist.stderr:.2f}")
peak = max(hist.counts.values())
for length, count in hist.counts.items():
    print(f"  {length:3d} | {'#' * max(1, round(40 * count / peak))} {count}")

print("\n== runtime scaling (structures + paths only) ==")
timing = timing_scaling([8, 12, 16, 20], seeds=(0, 1), coarse_dims=(4, 4, 2))
for b, t in zip(timing.box_sizes, timing.seconds):
    print(f"  B={b:2d}: {t * 1e3:7.1f} ms  (fit {timing.fitted(b) * 1e3:7.1f} ms)")
print(f"  fitted exponent {timing.exponent:.2f}; "
      f"single-core reference {timing.reference_seconds} s at B=20 on 5x5x3")

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar(list(hist.counts), list(hist.counts.values()), width=0.9)
    ax.set_xlabel("path length (edges)")
    ax.set_ylabel("count")
    ax.set_title("realized path lengths, B=16, p_fail=0.25")
    fig.tight_layout()
    fig.savefig(OUT / "path_lengths.png", dpi=150)
    print(f"\nwrote {OUT / 'path_lengths.png'}")
except ImportError:
    print("\nmatplotlib not available; skipped the histogram figure")
