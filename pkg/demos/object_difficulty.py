import numpy as np

from raileval.detection_metrics import (
    DEFAULT_DIFFICULTIES, DetectionFrame, GtBox, PredBox, evaluate_class, map_summary,
)

rng = np.random.default_rng(0)

# A handful of frames: large clear trains, small distant people, one crowd
frames = []
for i in range(20):
    gts = [
        GtBox("train", 100, 200, 400, 250, occlusion=0.0),
        GtBox("person", 900 + 10 * i, 500, 12, 30, occlusion=0.3),
        GtBox("person", 1200, 400, 200, 150, iscrowd=True),
    ]
    preds = [
        PredBox("train", 100 + rng.normal(0, 6), 200 + rng.normal(0, 6), 400, 250, 0.9),
        PredBox("person", 900 + 10 * i + rng.normal(0, 2), 500, 12, 30, 0.6),
        # detections inside the crowd box are neither hits nor misses
        PredBox("person", 1250, 420, 20, 50, 0.8),
    ]
    frames.append(DetectionFrame(f"f{i}", gts, preds))

for d in DEFAULT_DIFFICULTIES:
    print(d.name, d.to_dict())

summary = map_summary(frames)
print()
for row in summary.rows():
    if row.value is not None:
        print(f"{row.metric:22s} {row.threshold:9s} {100 * row.value:5.1f}")

# The small people never pass the easy gate; there they are neutral, not misses
print()
for d in DEFAULT_DIFFICULTIES:
    res = evaluate_class(frames, "person", 0.5, d)
    print(f"person @{d.name}: {res.final.tp + res.final.fn} counted, "
          f"{res.final.tp + res.final.fp} scored predictions")
