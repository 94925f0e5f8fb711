"""Why instance-level line metrics undersell incomplete rail predictions."""
import numpy as np

from raileval import LineEvalConfig, LineEvalFrame, Polyline, chamfer_ap, culane_f1, line_ap
from raileval.line_metrics import tusimple_breakdown

cfg = LineEvalConfig()

# One straight rail across a 1000 px wide image
gt = Polyline.from_points([(0, 400), (1000, 150)])

# The detector found the near half only, but found it exactly
half = Polyline.from_points([(0, 400), (500, 275)], score=0.9)
frame = LineEvalFrame("half", 1000, 600, [gt], [half])

res = line_ap([frame], cfg, 0.5)
print("LineAP@0.5:", round(res.ap, 4))
print("  segments tp/fp/fn:", res.final.tp, res.final.fp, res.final.fn)

# Chamfer distance compares whole curves, so the missing half dominates
for t in cfg.chamfer_rel_thresholds:
    print(f"ChamferAP@{t:g}:", chamfer_ap([frame], cfg, t).ap)

b = tusimple_breakdown([frame], cfg, 0.2)
print("TuSimple Acc@0.2:", round(b.accuracy, 3), f"({b.matched_points}/{b.total_points} rows)")
print("CULane F1@0.5:", culane_f1([frame], cfg, 0.5))

# Sweep the covered fraction and watch LineAP follow it smoothly
print("\ncoverage  LineAP  ChamferAP@5")
for frac in np.linspace(0.1, 1.0, 10):
    end = np.array([0, 400]) + frac * np.array([1000, -250])
    pred = Polyline.from_points([(0, 400), tuple(end)], score=0.9)
    f = LineEvalFrame("sweep", 1000, 600, [gt], [pred])
    print(f"{frac:8.1f}  {line_ap([f], cfg, 0.5).ap:6.3f}  {chamfer_ap([f], cfg, 5).ap:6.3f}")
