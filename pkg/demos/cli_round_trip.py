"""Write a tiny rail submission to disk and score it with the command-line tool."""
import json
import subprocess
import sys
import tempfile
from pathlib import Path

work = Path(tempfile.mkdtemp(prefix="raileval-demo-"))

header = {"schema_version": "1.0", "challenge": "rail"}
gt = [
    {**header, "kind": "ground_truth"},
    {"frame_id": "0001", "width": 1920, "height": 1080,
     "rails": [{"points": [[800, 1080], [900, 600], [930, 450]]},
               {"points": [[1150, 1080], [1050, 600], [1020, 450]]}],
     "ignore_regions": [{"points": [[0, 0], [1920, 0], [1920, 300], [0, 300]]}]},
    {"frame_id": "0002", "width": 1920, "height": 1080,
     "rails": [{"points": [[600, 1080], [700, 500]]}], "ignore_regions": []},
]
pred = [
    {**header, "kind": "predictions"},
    {"frame_id": "0001", "rails": [
        {"points": [[802, 1080], [901, 600], [931, 450]], "score": 0.92},
        {"points": [[1149, 1080], [1080, 750]], "score": 0.55},
        {"points": [[100, 50], [300, 250]], "score": 0.99}]},
]
for name, records in (("gt.jsonl", gt), ("pred.jsonl", pred)):
    (work / name).write_text("".join(json.dumps(r) + "\n" for r in records))

cmd = [sys.executable, "-m", "raileval", "eval", "rail",
       "--gt", str(work / "gt.jsonl"), "--pred", str(work / "pred.jsonl")]
print(subprocess.run(cmd, capture_output=True, text=True).stdout)

# The machine format keeps full precision and is byte-stable across runs
out = subprocess.run(cmd + ["--format", "machine", "--threads", "4"],
                     capture_output=True, text=True).stdout
doc = json.loads(out)
print({r["metric"] + "@" + r["threshold"]: round(r["value"], 4) for r in doc["results"]})

# A broken file is refused with its location, and nothing is written
(work / "bad.jsonl").write_text(json.dumps(pred[0]) + "\n"
                                + '{"frame_id": "0002", "rails": [{"points": [[1, 1]]}]}\n')
bad = subprocess.run(cmd[:-1] + [str(work / "bad.jsonl"), "--out", str(work / "r.txt")],
                     capture_output=True, text=True)
print("exit", bad.returncode, "|", bad.stderr.strip())
print("report written:", (work / "r.txt").exists())
