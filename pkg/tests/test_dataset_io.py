import json

import numpy as np
import pytest
from PIL import Image

from malformed import CASES, OBJ_HDR, RAIL_HDR, RAIL_OK, jl, pred_header, valid_pair, write_masks
from raileval.dataset_io import (
    FormatError,
    PairingError,
    dumps_ground_truth,
    dumps_predictions,
    load_ground_truth,
    load_predictions,
    loads_ground_truth,
    loads_predictions,
    object_eval_frames,
    rail_eval_frames,
    records_of,
    validate_pairing,
    vegetation_mask_pairs,
)


def rail_gt(*frames):
    return loads_ground_truth(jl(RAIL_HDR, *frames))


@pytest.fixture
def masks(tmp_path):
    write_masks(tmp_path)
    return tmp_path


# ------------------------------------------------------------ happy paths


def test_minimal_rail_file():
    es = rail_gt(RAIL_OK)
    assert es.challenge == "rail" and list(es.frames) == ["f1"]
    f = es.frames["f1"]
    assert f.rails[0].points.tolist() == [[10, 50], [20, 0]]
    assert es.warnings == ()


def test_consecutive_duplicate_points_are_dropped():
    es = rail_gt({**RAIL_OK, "rails": [{"points": [[1, 1], [1, 1], [5, 5]]}]})
    assert es.frames["f1"].rails[0].points.tolist() == [[1, 1], [5, 5]]


def test_repeated_point_rail_is_rejected():
    with pytest.raises(FormatError, match="polyline requires >= 2 points"):
        rail_gt({**RAIL_OK, "rails": [{"points": [[1, 1], [1, 1]]}]})


def test_small_excursions_are_clamped_with_warning():
    es = rail_gt({**RAIL_OK, "rails": [{"points": [[-1.5, 51], [20, 0]]}]})
    assert es.frames["f1"].rails[0].points.tolist() == [[0, 50], [20, 0]]
    assert len(es.warnings) == 1 and "clamped" in es.warnings[0] and "f1" in es.warnings[0]


def test_occlusion_bins_map_to_fractions():
    box = {"label": "person", "bbox": [0, 0, 5, 5], "occlusion_bin": 75}
    es = loads_ground_truth(jl(OBJ_HDR, {"frame_id": "a", "width": 10, "height": 10,
                                         "boxes": [box]}))
    assert es.frames["a"].boxes[0].occlusion == 0.75


def test_occlusion_needs_one_form_only():
    box = {"label": "person", "bbox": [0, 0, 5, 5], "occlusion_bin": 75, "occlusion": 0.75}
    with pytest.raises(FormatError):
        loads_ground_truth(jl(OBJ_HDR, {"frame_id": "a", "width": 10, "height": 10,
                                        "boxes": [box]}))


def test_missing_scores_default_to_one_with_warning():
    es = rail_gt(RAIL_OK)
    ps = loads_predictions(jl(pred_header("rail"), {"frame_id": "f1",
                                                    "rails": [{"points": [[1, 1], [2, 2]]}]}), es)
    assert ps.frames["f1"].rails[0].score == 1.0
    assert any("defaulted to 1.0" in w for w in ps.warnings)


def test_score_out_of_range_is_rejected():
    es = rail_gt(RAIL_OK)
    with pytest.raises(FormatError, match="outside"):
        loads_predictions(jl(pred_header("rail"), {"frame_id": "f1", "rails": [
            {"points": [[1, 1], [2, 2]], "score": 1.5}]}), es)


def test_partial_and_empty_prediction_files():
    es = rail_gt(RAIL_OK, {**RAIL_OK, "frame_id": "f2"})
    empty = loads_predictions(jl(pred_header("rail")), es)
    assert empty.frames == {}
    assert validate_pairing(es, empty) == ["2/2 frames have no predictions"]
    frames = rail_eval_frames(es, empty)
    assert [f.pred_lines for f in frames] == [(), ()]


def test_coverage_warning_counts():
    recs = [{**RAIL_OK, "frame_id": f"f{i}"} for i in range(500)]
    es = rail_gt(*recs)
    preds = [{"frame_id": f"f{i}", "rails": []} for i in range(50)]
    ps = loads_predictions(jl(pred_header("rail"), *preds), es)
    assert validate_pairing(es, ps) == ["450/500 frames have no predictions"]


def test_matched_pair_has_no_warnings():
    gt, pred = valid_pair("rail")
    es = loads_ground_truth(gt)
    assert validate_pairing(es, loads_predictions(pred, es)) == []


def test_challenge_mismatch_is_fatal():
    es = loads_ground_truth(valid_pair("object")[0])
    ps = loads_predictions(valid_pair("rail")[1], es)
    with pytest.raises(PairingError, match="challenge mismatch"):
        validate_pairing(es, ps)


def test_gt_challenge_check():
    with pytest.raises(FormatError, match="expected 'object'"):
        loads_ground_truth(valid_pair("rail")[0], challenge="object")


def test_foreign_class_is_a_warning():
    gt, _ = valid_pair("object")
    es = loads_ground_truth(gt)
    pred = jl(pred_header("object"), {"frame_id": "f1", "boxes": [
        {"label": "bicycle", "bbox": [0, 0, 5, 5], "score": 0.5}]})
    assert validate_pairing(es, loads_predictions(pred, es)) == [
        "class 'bicycle' is predicted but absent from the ground truth"]


def test_object_frames_conversion():
    gt, pred = valid_pair("object")
    es = loads_ground_truth(gt)
    (f,) = object_eval_frames(es, loads_predictions(pred, es))
    assert f.gt_boxes[0].xywh == (1, 1, 20, 20) and f.pred_boxes[0].score == 0.9


def test_vegetation_masks_resolve_relative_to_file(masks):
    gt, pred = valid_pair("vegetation")
    (masks / "gt.jsonl").write_text(gt)
    (masks / "pred.jsonl").write_text(pred)
    es = load_ground_truth(masks / "gt.jsonl", "vegetation")
    ps = load_predictions(masks / "pred.jsonl", es)
    ((g, p),) = list(vegetation_mask_pairs(es, ps))
    assert g.labels.shape == (3, 4) and p.labels[2, 0] == 0


def test_mask_validation(masks):
    Image.fromarray(np.zeros((3, 4, 3), dtype=np.uint8)).save(masks / "rgb.png")
    Image.fromarray(np.zeros((5, 5), dtype=np.uint8)).save(masks / "big.png")
    hdr = {"schema_version": "1.0", "challenge": "vegetation", "kind": "ground_truth"}
    for name, msg in (("rgb.png", "single-channel"), ("big.png", "5x5")):
        with pytest.raises(FormatError, match=msg):
            loads_ground_truth(jl(hdr, {"frame_id": "v", "width": 4, "height": 3, "mask": name}),
                               base_dir=masks)


def test_missing_file_raises_os_error(tmp_path):
    with pytest.raises(OSError):
        load_ground_truth(tmp_path / "absent.jsonl")


def test_empty_file_is_rejected():
    with pytest.raises(FormatError, match="header"):
        loads_ground_truth("")


def test_infinity_is_rejected():
    with pytest.raises(FormatError, match="non-finite"):
        loads_ground_truth(jl(RAIL_HDR, '{"frame_id": "x", "width": Infinity, "height": 5}'))


def test_blank_lines_are_skipped():
    es = loads_ground_truth(jl(RAIL_HDR) + "\n\n" + json.dumps(RAIL_OK) + "\n")
    assert list(es.frames) == ["f1"]


# ------------------------------------------------------ malformed corpus


@pytest.mark.parametrize("case", CASES, ids=[c[0] for c in CASES])
def test_malformed_fixture_is_located(case, masks):
    name, challenge, side, text, fid, field = case
    gt, _ = valid_pair(challenge)
    with pytest.raises(FormatError) as info:
        if side == "gt":
            loads_ground_truth(text, source="gt.jsonl", base_dir=masks)
        else:
            es = loads_ground_truth(gt, base_dir=masks)
            loads_predictions(text, es, source="pred.jsonl", base_dir=masks)
    err = info.value
    assert err.frame_id == fid
    assert field in err.field
    msg = str(err)
    assert f"frame {fid!r}" in msg and field in msg and ".jsonl:" in msg


# ----------------------------------------------------------- round trips


def _rich_rail_text():
    return jl(RAIL_HDR, {
        "frame_id": "b", "width": 640.5, "height": 480,
        "rails": [{"points": [[0.25, 480], [100, 240], [120.125, 0]]},
                  {"points": [[600, 480], [590, 100]]}],
        "ignore_regions": [{"points": [[0, 0], [50, 0], [50, 20]]}],
    }, {**RAIL_OK, "frame_id": "a"})


def test_ground_truth_round_trip():
    for text in (_rich_rail_text(), valid_pair("object")[0]):
        es = loads_ground_truth(text)
        again = loads_ground_truth(dumps_ground_truth(es))
        assert records_of(again) == records_of(es)
        assert dumps_ground_truth(again) == dumps_ground_truth(es)
        assert list(again.frames) == list(es.frames)


def test_prediction_round_trip():
    for challenge in ("rail", "object"):
        gt, pred = valid_pair(challenge)
        es = loads_ground_truth(gt)
        ps = loads_predictions(pred, es)
        text = dumps_predictions(ps)
        assert dumps_predictions(loads_predictions(text, es)) == text


def test_loading_is_deterministic():
    text = _rich_rail_text()
    assert dumps_ground_truth(loads_ground_truth(text)) == dumps_ground_truth(loads_ground_truth(text))


def test_sets_are_read_only():
    es = rail_gt(RAIL_OK)
    with pytest.raises(AttributeError):
        es.challenge = "object"
    with pytest.raises(TypeError):
        es.frames["x"] = None
