"""A full LEDRO run with the offline halving oracle, compared against BO-1200.

Both runs share the same 200 calibration evaluations.  The baseline takes the
best of five repeats, as in the usual protocol, so expect about a minute on
one CPU.  Run with ``python demos/ledro_vs_baseline.py [seed]``.
"""
import sys

from ledro.orchestrator import RunConfig, compare_runs, run_baseline, run_ledro

seed = int(sys.argv[1]) if len(sys.argv) > 1 else 0
config = RunConfig(
    bounds={"gain": 85.0, "ugbw": 100e6, "phase_margin": 70.0, "supply_current": 5e-6},
    seed=seed,
)

ledro = run_ledro(config)
print("LEDRO rounds:")
for t, r in zip(ledro.transcripts, ledro.rounds):
    width = t["region"]["nfin_in"]
    print(f"  round {r['round']:>2}: {r['class']:<8} good={r['good_count']:<3} best FoM {r['best_fom']:+.4f}"
          f"  nfin_in range {width[0]}..{width[1]}")

baseline = run_baseline(config, steps=1200)
print("BO-1200 repeat finals:", ", ".join(f"{r['final_best']:+.4f}" for r in baseline.repeats))

m = compare_runs(ledro, baseline)
print(f"LEDRO best {m['ledro_best']:+.4f} vs BO-1200 best {m['baseline_best']:+.4f} "
      f"({m['boost_percent']:+.1f}%)")
print(f"steps to reach {m['target']:+.4f}: LEDRO {m['steps_to_target_ledro']}, "
      f"BO-1200 {m['steps_to_target_baseline']}")
