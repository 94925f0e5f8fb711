"""Score groups are matched one after another, highest confidence first."""
import numpy as np

from raileval import LineEvalConfig, LineEvalFrame, Polyline, line_ap

t = np.linspace(0, 1, 40)
left = np.column_stack([700 + 150 * t, 1080 - 600 * t])
right = np.column_stack([1100 - 80 * t, 1080 - 600 * t])

# Two rails; the confident prediction hugs the left one, the weaker one the right
gts = [Polyline.from_points(left), Polyline.from_points(right)]
preds = [
    Polyline.from_points(left + [2.0, 0.0], score=0.95),
    Polyline.from_points(right + [-3.0, 1.0], score=0.7),
    # a stray 0.7 line competing for the same GT as the second prediction
    Polyline.from_points(right + [4.5, 0.0], score=0.7),
]

# Thresholds in pixels rather than percent of the width
cfg = LineEvalConfig(threshold_mode="absolute", rel_dist_thresholds=(6,),
                     orientation_threshold=10, rel_seg_len=10)
res = line_ap([LineEvalFrame("demo", 1920, 1080, gts, preds)], cfg, 6)

for r in res.trace:
    print(f"score {r.score}: {r.n_pred} predicted segments, {r.n_gt_free} GT free, "
          f"{r.n_matched} matched, total distance {r.matched_cost:.1f} px")

# Within the 0.7 group the closer line wins its segments; the other becomes FP
print("\nAP:", round(res.ap, 4))
print("PR points:", [(p.score_threshold, p.tp, p.fp) for p in res.curve])
