"""Synthetic scenes shared by the test modules."""

from __future__ import annotations

import numpy as np

from raileval.detection_metrics import CLASSES, DetectionFrame, GtBox, PredBox
from raileval.geometry import Polygon, Polyline
from raileval.line_metrics import LineEvalFrame, line_ap

from oracles import line_ap_rounds

SIZES = ((1920, 1080), (1280, 720), (2560, 1440))


def rail_points(rng, width, height, curved):
    x0 = rng.uniform(0.2, 0.8) * width
    x1 = x0 + rng.uniform(-0.15, 0.15) * width
    y0, y1 = height * rng.uniform(0.95, 1.0), height * rng.uniform(0.35, 0.55)
    t = np.linspace(0.0, 1.0, 25 if curved else 2)
    bend = rng.uniform(-0.12, 0.12) * width if curved else 0.0
    xs = (1 - t) * x0 + t * x1 + bend * 4 * t * (1 - t)
    ys = (1 - t) * y0 + t * y1
    return np.column_stack([xs, ys])


def rail_frame(rng, frame_id, n_rails=None, with_ignore=True, copy_predictions=True):
    width, height = SIZES[rng.integers(len(SIZES))]
    n_rails = int(rng.integers(1, 5)) if n_rails is None else n_rails
    gts = [Polyline.from_points(rail_points(rng, width, height, curved=bool(i % 2)))
           for i in range(n_rails)]
    regions = []
    if with_ignore:
        # top band stays clear of every rail (rails stop at >= 0.35 * height)
        h = 0.2 * height
        x = rng.uniform(0, 0.6) * width
        regions.append(Polygon.from_points([[x, 0], [x + 0.3 * width, 0],
                                            [x + 0.3 * width, h], [x, h]]))
    preds = [g.with_score(1.0) for g in gts] if copy_predictions else []
    return LineEvalFrame(frame_id, width, height, gts, preds, regions)


def random_pred_rails(rng, frame: LineEvalFrame, noise_frac=0.004, n_scores=4):
    """Noisy, partly truncated copies of the GT plus some clutter, with random scores."""
    w, h = frame.image_width, frame.image_height
    scores = np.round(rng.uniform(0.05, 1.0, n_scores), 3)
    preds = []
    for g in frame.gt_lines:
        if rng.random() < 0.2:
            continue
        pts = g.points + rng.normal(0, noise_frac * w, g.points.shape)
        if rng.random() < 0.4 and len(pts) > 3:
            pts = pts[: max(2, int(len(pts) * rng.uniform(0.3, 0.9)))]
        preds.append(Polyline.from_points(np.clip(pts, 0, [w, h]), float(rng.choice(scores))))
    for _ in range(int(rng.integers(0, 3))):
        preds.append(Polyline.from_points(rail_points(rng, w, h, bool(rng.integers(2))),
                                          float(rng.choice(scores))))
    return LineEvalFrame(frame.frame_id, w, h, frame.gt_lines, preds, frame.ignore_regions)


def gt_box(rng, width, height, label, occlusion=None, iscrowd=False, ignore=False):
    w = float(rng.uniform(15, 300))
    h = float(rng.uniform(15, 300))
    x = float(rng.uniform(0, width - w))
    y = float(rng.uniform(0, height - h))
    occ = float(rng.choice([0.0, 0.1, 0.3, 0.6, 0.9])) if occlusion is None else occlusion
    return GtBox(label, x, y, w, h, occ, iscrowd, ignore)


def object_frame(rng, frame_id, width=1920, height=1080, n_boxes=8):
    boxes = [gt_box(rng, width, height, CLASSES[i % len(CLASSES)]) for i in range(n_boxes)]
    preds = [PredBox(b.class_label, b.x, b.y, b.w, b.h, 1.0) for b in boxes]
    return DetectionFrame(frame_id, boxes, preds, width, height)


def label_mask(rng, width=64, height=48, ignore_frac=0.05):
    labels = rng.integers(0, 3, size=(height, width)).astype(np.uint8)
    labels[rng.random((height, width)) < ignore_frac] = 255
    return labels


def write_dataset(directory, rng, n_frames=10, perfect=True):
    """Write GT and prediction files for all three challenges.

    Returns {challenge: (gt_path, pred_path)}. With ``perfect`` the
    predictions copy the ground truth; otherwise they are perturbed.
    """
    from pathlib import Path

    from PIL import Image

    from raileval.dataset_io import (
        EvalSet, ObjectFrame, ObjectPrediction, PredictionSet, RailFrame, RailPrediction,
        VegetationFrame, VegetationPrediction, dumps_ground_truth, dumps_predictions,
    )

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    out = {}

    rail_gt, rail_pred = {}, {}
    for i in range(n_frames):
        f = rail_frame(rng, f"r{i:03d}")
        if not perfect:
            f = random_pred_rails(rng, f)
        rail_gt[f.frame_id] = RailFrame(f.frame_id, f.image_width, f.image_height,
                                        f.gt_lines, f.ignore_regions)
        rail_pred[f.frame_id] = RailPrediction(f.frame_id, f.pred_lines)

    obj_gt, obj_pred = {}, {}
    for i in range(n_frames):
        f = object_frame(rng, f"o{i:03d}")
        preds = f.pred_boxes
        if not perfect:
            preds = tuple(PredBox(b.class_label, b.x + rng.normal(0, 3), b.y + rng.normal(0, 3),
                                  b.w, b.h, round(float(rng.random()), 3))
                          for b in preds if rng.random() < 0.8)
            preds = tuple(PredBox(b.class_label, min(max(b.x, 0), 1920 - b.w),
                                  min(max(b.y, 0), 1080 - b.h), b.w, b.h, b.score) for b in preds)
        obj_gt[f.frame_id] = ObjectFrame(f.frame_id, f.image_width, f.image_height, f.gt_boxes)
        obj_pred[f.frame_id] = ObjectPrediction(f.frame_id, preds)

    veg_gt, veg_pred = {}, {}
    mask_dir = directory / "masks"
    mask_dir.mkdir(exist_ok=True)
    for i in range(n_frames):
        fid = f"v{i:03d}"
        labels = label_mask(rng)
        pred = np.where(labels == 255, 0, labels).astype(np.uint8)
        if not perfect:
            flip = rng.random(pred.shape) < 0.2
            pred[flip] = rng.integers(0, 3, int(flip.sum()))
        Image.fromarray(labels, mode="L").save(mask_dir / f"{fid}_gt.png")
        Image.fromarray(pred, mode="L").save(mask_dir / f"{fid}_pred.png")
        h, w = labels.shape
        veg_gt[fid] = VegetationFrame(fid, w, h, f"masks/{fid}_gt.png")
        veg_pred[fid] = VegetationPrediction(fid, f"masks/{fid}_pred.png")

    for name, gt, pred in (("rail", rail_gt, rail_pred), ("object", obj_gt, obj_pred),
                           ("vegetation", veg_gt, veg_pred)):
        gp, pp = directory / f"{name}_gt.jsonl", directory / f"{name}_pred.jsonl"
        gp.write_text(dumps_ground_truth(EvalSet(name, gt)))
        pp.write_text(dumps_predictions(PredictionSet(name, pred)))
        out[name] = (gp, pp)
    return out


def single_segment_frame(rng, seg_len, n_gt, n_pred, scores):
    def seg():
        c = rng.uniform(100, 400, 2)
        ang = rng.uniform(0, np.pi)
        half = rng.uniform(0.3, 0.5) * seg_len
        d = half * np.array([np.cos(ang), np.sin(ang)])
        return (tuple(c - d), tuple(c + d))

    gts = [seg() for _ in range(n_gt)]
    # predictions are jittered GT copies so edges are common
    preds = []
    for _ in range(n_pred):
        a, b = gts[rng.integers(n_gt)] if n_gt and rng.random() < 0.8 else seg()
        j = rng.normal(0, 1.5, 4)
        preds.append(((a[0] + j[0], a[1] + j[1]), (b[0] + j[2], b[1] + j[3]),
                      float(rng.choice(scores))))
    return gts, preds


def line_ap_oracle_case(rng, cfg, rel_dist, width=1000, height=500):
    """Random single-segment frame; returns (implementation rounds, oracle rounds)."""
    seg_len = cfg.px(cfg.rel_seg_len, width)
    n_gt = int(rng.integers(0, 11))
    n_pred = int(rng.integers(0, 21 - n_gt))
    gts, preds = single_segment_frame(rng, seg_len, n_gt, n_pred, [0.9, 0.6, 0.3])
    f = LineEvalFrame("s", width, height, [Polyline.from_points([a, b]) for a, b in gts],
                      [Polyline.from_points([a, b], s) for a, b, s in preds])
    got = [(r.score, r.n_matched, r.matched_cost)
           for r in line_ap([f], cfg, rel_dist).trace]
    want = line_ap_rounds(gts, preds, cfg.px(rel_dist, width), cfg.orientation_threshold)
    return got, want
