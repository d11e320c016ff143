#!/usr/bin/env python3
"""Regenerates fixtures/bundled: 8 input pairs, 6 hypotheses, T=3 fixture bank.

Output is deterministic; rerunning overwrites the committed files byte-for-byte.
"""
import json
import math
import os
import random
import sys

HYPOTHESES = ["effusion", "pneumothorax", "consolidation", "cardiomegaly", "nodule", "atelectasis"]
INPUTS = [f"case{i:02d}" for i in range(1, 9)]
SIZE = 16
TIMESTEPS = 3
VARIANTS = 3


def write_grid(path, grid):
    os.makedirs(os.path.dirname(path), exist_ok=True)
    with open(path, "w", newline="\n") as f:
        f.write(f"{len(grid)} {len(grid[0])}\n")
        for row in grid:
            f.write(" ".join(f"{v:.4f}" for v in row) + "\n")


def blob_map(rng, blobs, peak_cap):
    grid = [[0.0] * SIZE for _ in range(SIZE)]
    for _ in range(blobs):
        cr, cc = rng.uniform(2, SIZE - 3), rng.uniform(2, SIZE - 3)
        radius = rng.uniform(1.0, 3.0)
        peak = rng.uniform(0.6, 1.0) * peak_cap
        for r in range(SIZE):
            for c in range(SIZE):
                d2 = (r - cr) ** 2 + (c - cc) ** 2
                grid[r][c] = max(grid[r][c], peak * math.exp(-d2 / (2 * radius * radius)))
    return [[min(1.0, max(0.0, v)) for v in row] for row in grid]


def main(root):
    rng = random.Random(20240917)
    os.makedirs(root, exist_ok=True)
    with open(os.path.join(root, "hypotheses.json"), "w", newline="\n") as f:
        json.dump({"hypotheses": [{"id": h, "heatmap": f"{h}.txt"} for h in HYPOTHESES]}, f, indent=2)
        f.write("\n")
    inputs = []
    for idx, case in enumerate(INPUTS):
        question = [rng.randrange(64) for _ in range(rng.randint(3, 6))] + [idx]
        inputs.append({"id": case, "question": question})
        image = [[round(rng.uniform(0.0, 1.0), 4) for _ in range(SIZE)] for _ in range(SIZE)]
        write_grid(os.path.join(root, "images", f"{case}.txt"), image)
        for h_idx, hyp in enumerate(HYPOTHESES):
            # Roughly one inert hypothesis per input: its map never reaches tau.
            inert = (idx + h_idx) % 5 == 0
            grid = blob_map(rng, rng.randint(1, 3), 0.45 if inert else 1.0)
            write_grid(os.path.join(root, "heatmaps", case, f"{hyp}.txt"), grid)
    with open(os.path.join(root, "inputs.json"), "w", newline="\n") as f:
        json.dump({"inputs": inputs}, f, indent=2)
        f.write("\n")

    lines = [json.dumps({"format": "regcot-fixture-bank", "version": 1})]
    for hyp in HYPOTHESES:
        for t in range(TIMESTEPS):
            variants = []
            for v in range(VARIANTS):
                tokens = [rng.randrange(64) for _ in range(rng.randint(4, 8))]
                variants.append({"response_id": f"{hyp}.t{t}.v{v}", "tokens": tokens})
            lines.append(json.dumps({"kind": "generation", "hypothesis_id": hyp, "timestep": t,
                                     "payload": {"variants": variants}}))
    # A few pinned evaluator scores; everything else falls back to the seeded hash.
    for hyp in HYPOTHESES[:3]:
        for t in range(TIMESTEPS):
            for ev in ("evaluator_1", "evaluator_2"):
                score = round(rng.uniform(0.05, 0.95), 3)
                lines.append(json.dumps({"kind": "evaluation", "evaluator": ev, "response_id": f"{hyp}.t{t}.v0",
                                         "history_len": t, "payload": {"score": score}}))
    with open(os.path.join(root, "bank.jsonl"), "w", newline="\n") as f:
        f.write("\n".join(lines) + "\n")

    config = {
        "timesteps": 3, "pairs_per_step": 2, "rounds": 4, "gamma": 0.3, "beta": 0.1, "margin_scale": 1.0,
        "tau": 0.5, "min_area": 1, "j_samples": 2, "batch_size": 4, "epochs": 3, "learning_rate": 1.0,
        "seed": 7, "pinned_reference": False,
        "ablations": {"naive_dpo": False, "no_iteration": False, "gamma_zero": False, "single_evaluator": False},
        "paths": {"hypotheses": "hypotheses.json", "inputs": "inputs.json", "heatmaps_dir": "heatmaps",
                  "images_dir": "images", "fixture_bank": "bank.jsonl", "output_dir": "out"},
    }
    with open(os.path.join(root, "config.json"), "w", newline="\n") as f:
        json.dump(config, f, indent=2)
        f.write("\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else os.path.join(os.path.dirname(__file__), "..", "fixtures", "bundled"))
