import numpy as np

from raileval.segmentation_metrics import IGNORE_LABEL, LabelMask, accumulate, class_iou

# 0 background, 1 low vegetation, 2 high vegetation, 255 unlabeled
gt = np.zeros((60, 80), dtype=np.uint8)
gt[35:, :] = 1
gt[:20, 50:] = 2
gt[20:35, :5] = IGNORE_LABEL

# The prediction bleeds low vegetation two rows upward and misses a tree corner
pred = np.where(gt == IGNORE_LABEL, 0, gt).astype(np.uint8)
pred[33:35, :] = 1
pred[:5, 50:60] = 0

acc = accumulate(LabelMask(gt), LabelMask(pred))
print("confusion matrix [gt, pred]:\n", acc.counts)

scores = class_iou(acc)
for name, v in scores.per_class.items():
    print(f"{name:16s} {v:.4f}")
print("mean (vegetation only):", round(scores.mean, 4))

# Whatever is predicted on unlabeled pixels does not matter
pred2 = pred.copy()
pred2[gt == IGNORE_LABEL] = 2
print("unchanged under ignore scribbles:",
      class_iou(accumulate(LabelMask(gt), LabelMask(pred2))) == scores)
