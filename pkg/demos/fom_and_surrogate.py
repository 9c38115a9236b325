"""Score a hand-picked two-stage design under both spec presets.

Run with ``python demos/fom_and_surrogate.py``.
"""
from ledro import CircuitEvaluator, DesignPoint, load_benchmark
from ledro.fom import HIGH_COMPLEXITY_BOUNDS, LOW_COMPLEXITY_BOUNDS

bench = load_benchmark("two_stage")
point = DesignPoint.from_mapping(bench.defs, dict(
    nfin_in=12, l_in=20, nfin_load=40, l_load=40, nfin_tail=36, l_tail=40, nfin_cs=44, l_cs=30,
    nfin_sink=33, l_sink=80, ibias=3.5e-6, vcm=0.4, cc=1.1e-12,
))

for label, bounds in (("low", LOW_COMPLEXITY_BOUNDS), ("high", HIGH_COMPLEXITY_BOUNDS)):
    rec = CircuitEvaluator(bench, bounds).evaluate(point)
    s = rec.specs
    print(f"{label:>4} preset: FoM {rec.fom:+.4f}  gain {s.gain:.1f} dB  UGBW {s.ugbw / 1e6:.2f} MHz  "
          f"PM {s.phase_margin:.1f} deg  I {s.supply_current * 1e6:.2f} uA")

print("operating regions:", ", ".join(f"{d} {r}" for d, r in rec.regions().items()))
