"""Command-line front end: detect, synth, eval, bench.

All detection defaults match the library defaults, so a bare `detect`
run needs no tuning flags. Outputs are deterministic for a fixed seed;
the eval report pins elapsed to 0 for that reason.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .baselines import EvmConfig, RhtConfig, evm_detect, rht_detect
from .csa import ArcRecord, CsaConfig, absorb_thick_pixels, detect, records_to_json
from .curves import CurveSegment
from .digigeom import RealPoint
from .metrics import (
    GroundTruth,
    compute_metrics,
    detection_mask,
    load_ground_truth,
    match_primitives,
    save_ground_truth,
    synth_scene,
)
from .raster import BinaryImage, Pixel, load_binary, save_binary

_PALETTE = ("#d62728", "#1f77b4", "#2ca02c", "#9467bd",
            "#ff7f0e", "#17becf", "#e377c2", "#8c564b")


@dataclass
class RunConfig:
    command: str
    algorithm: str = "csa"
    input: Optional[str] = None
    output: Optional[str] = None
    overlay: Optional[str] = None
    truth: Optional[str] = None
    spec_path: Optional[str] = None
    image: Optional[str] = None
    scenes: Optional[str] = None
    seed: int = 0
    threshold: int = 128
    csa: CsaConfig = field(default_factory=CsaConfig)
    rht: RhtConfig = field(default_factory=RhtConfig)
    evm: EvmConfig = field(default_factory=EvmConfig)


def _build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="arcscan",
        description="Circle and circular-arc detection on binary raster images.",
    )
    sub = top.add_subparsers(dest="command", required=True)
    fmt = argparse.ArgumentDefaultsHelpFormatter

    def algo_flags(p: argparse.ArgumentParser) -> None:
        p.add_argument("--algo", choices=("csa", "rht", "evm"), default="csa",
                       help="detection algorithm")
        p.add_argument("--seed", type=int, default=0, help="random seed")
        p.add_argument("--tau-h", type=int, default=2,
                       help="straightness area tolerance")
        p.add_argument("--tau-c", type=int, default=7,
                       help="minimum certified segment length")
        p.add_argument("--delta-phi", type=float, default=math.pi / 18.0,
                       help="chord-angle constancy tolerance (radians)")
        p.add_argument("--budget", type=int, default=2000,
                       help="restricted Hough triple budget")
        p.add_argument("--tr", type=float, default=0.46,
                       help="RHT support-rate threshold")
        p.add_argument("--nt", type=int, default=2,
                       help="RHT votes before verification")
        p.add_argument("--te", type=float, default=0.5,
                       help="EVM existing-rate threshold")

    p = sub.add_parser("detect", formatter_class=fmt,
                       help="detect arcs in one binary image")
    p.add_argument("--in", dest="input", required=True, help="input PBM/PNG image")
    p.add_argument("--out", dest="output", required=True, help="arcs JSON path")
    p.add_argument("--overlay", default=None, help="optional SVG overlay path")
    p.add_argument("--threshold", type=int, default=128,
                   help="gray levels below this are object pixels")
    algo_flags(p)

    p = sub.add_parser("synth", formatter_class=fmt,
                       help="render a synthetic scene with ground truth")
    p.add_argument("--spec", dest="spec_path", required=True, help="scene spec JSON")
    p.add_argument("--out", dest="output", required=True, help="output image (PBM/PNG)")
    p.add_argument("--truth", required=True, help="ground-truth JSON path")
    p.add_argument("--seed", type=int, default=0, help="noise seed")

    p = sub.add_parser("eval", formatter_class=fmt,
                       help="score a detection against ground truth")
    p.add_argument("--in", dest="input", required=True,
                   help="arcs JSON from detect, or a detected-mask image")
    p.add_argument("--truth", required=True, help="ground-truth JSON path")
    p.add_argument("--image", default=None,
                   help="original input image (required with arcs JSON)")
    p.add_argument("--out", dest="output", default=None,
                   help="report path, .json or .csv (default: stdout JSON)")
    p.add_argument("--threshold", type=int, default=128,
                   help="gray levels below this are object pixels")

    p = sub.add_parser("bench", formatter_class=fmt,
                       help="run algorithms over a scene list, write CSV")
    p.add_argument("--scenes", required=True, help="scene list JSON")
    p.add_argument("--out", dest="output", required=True, help="CSV path")
    p.add_argument("--seed", type=int, default=0, help="random seed")
    p.add_argument("--algo", default="csa,rht,evm",
                   help="comma-separated algorithms to run")
    return top


def _run_config(ns: argparse.Namespace) -> RunConfig:
    rc = RunConfig(command=ns.command)
    for name in ("algorithm", "input", "output", "overlay", "truth",
                 "spec_path", "image", "scenes", "seed", "threshold"):
        src = "algo" if name == "algorithm" else name
        if hasattr(ns, src):
            setattr(rc, name, getattr(ns, src))
    if hasattr(ns, "tau_h"):
        rc.csa = CsaConfig(tau_h=ns.tau_h, tau_c=ns.tau_c, delta_phi=ns.delta_phi,
                           hough_triple_budget=ns.budget, rng_seed=ns.seed)
        rc.rht = RhtConfig(n_t=ns.nt, T_r=ns.tr, rng_seed=ns.seed)
        rc.evm = EvmConfig(T_e=ns.te, rng_seed=ns.seed)
    return rc


def _detect_records(img: BinaryImage, rc: RunConfig) -> List[ArcRecord]:
    if rc.algorithm == "rht":
        return rht_detect(img, rc.rht)
    if rc.algorithm == "evm":
        return evm_detect(img, rc.evm)
    return detect(img, rc.csa)


def _svg_arc(rec: ArcRecord, color: str) -> str:
    cx, cy, r = rec.center.x, rec.center.y, rec.radius
    if rec.segment.closed or len(rec.segment) < 2:
        return (f'<circle cx="{cx:.2f}" cy="{cy:.2f}" r="{r:.2f}" '
                f'fill="none" stroke="{color}" stroke-width="1.5"/>')
    a, b = rec.segment.endpoints
    mid = rec.segment.pixels[len(rec.segment) // 2]
    two_pi = 2.0 * math.pi
    ta = math.atan2(a.y - cy, a.x - cx)
    tb = math.atan2(b.y - cy, b.x - cx)
    tm = math.atan2(mid.y - cy, mid.x - cx)
    fwd = (tb - ta) % two_pi
    # sweep=1 follows increasing angle, which is clockwise on screen
    if (tm - ta) % two_pi <= fwd:
        sweep, span = 1, fwd
    else:
        sweep, span = 0, two_pi - fwd
    large = 1 if span > math.pi else 0
    return (f'<path d="M {a.x:.2f} {a.y:.2f} A {r:.2f} {r:.2f} 0 {large} {sweep} '
            f'{b.x:.2f} {b.y:.2f}" fill="none" stroke="{color}" stroke-width="1.5"/>')


def write_overlay(path: str, img: BinaryImage, records: List[ArcRecord]) -> None:
    """Input pixels in gray, each detected arc colored, centers crossed."""
    w, h = img.width, img.height
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" '
        f'viewBox="0 0 {w} {h}">',
        f'<rect width="{w}" height="{h}" fill="white"/>',
        '<g fill="#999999">',
    ]
    bits = img.bits
    for y in range(h):
        xs = np.nonzero(bits[y])[0]
        i = 0
        while i < len(xs):
            j = i
            while j + 1 < len(xs) and xs[j + 1] == xs[j] + 1:
                j += 1
            parts.append(f'<rect x="{int(xs[i])}" y="{y}" '
                         f'width="{int(xs[j]) - int(xs[i]) + 1}" height="1"/>')
            i = j + 1
    parts.append("</g>")
    for k, rec in enumerate(records):
        color = _PALETTE[k % len(_PALETTE)]
        parts.append(_svg_arc(rec, color))
        cx, cy = rec.center.x, rec.center.y
        parts.append(f'<path d="M {cx - 4:.2f} {cy:.2f} H {cx + 4:.2f} '
                     f'M {cx:.2f} {cy - 4:.2f} V {cy + 4:.2f}" '
                     f'stroke="{color}" stroke-width="1"/>')
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts) + "\n")


def _records_from_json(path: str, img: BinaryImage) -> List[ArcRecord]:
    """Rebuild skeletal records from an arcs JSON for mask reconstruction.

    The JSON does not carry pixel lists, so each record is reseeded with
    the object pixels lying within one pixel of its circle.
    """
    with open(path, "r", encoding="utf-8") as fh:
        items = json.load(fh)
    ys, xs = np.nonzero(img.bits)
    records = []
    for item in items:
        cx, cy = float(item["center"][0]), float(item["center"][1])
        r = float(item["radius"])
        sel = np.abs(np.hypot(xs - cx, ys - cy) - r) <= 1.0
        seeds = [Pixel(int(x), int(y)) for x, y in zip(xs[sel], ys[sel])]
        records.append(ArcRecord(
            segment=CurveSegment(seeds, closed=bool(item.get("closed", False))),
            center=RealPoint(cx, cy),
            radius=r,
            source="hough-refined" if item.get("source") == "hough" else "sagitta",
        ))
    return records


def _cmd_detect(rc: RunConfig) -> int:
    img = load_binary(rc.input, rc.threshold)
    records = _detect_records(img, rc)
    with open(rc.output, "w", encoding="utf-8") as fh:
        fh.write(records_to_json(records))
    if rc.overlay:
        write_overlay(rc.overlay, img, records)
    return 0


def _cmd_synth(rc: RunConfig) -> int:
    with open(rc.spec_path, "r", encoding="utf-8") as fh:
        spec = json.load(fh)
    img, truth = synth_scene(spec, rc.seed)
    save_binary(img, rc.output)
    save_ground_truth(truth, rc.truth)
    return 0


def _cmd_eval(rc: RunConfig) -> int:
    truth = load_ground_truth(rc.truth)
    if rc.input.lower().endswith(".json"):
        if not rc.image:
            raise ValueError("--image is required when --in is an arcs JSON")
        img = load_binary(rc.image, rc.threshold)
        records = _records_from_json(rc.input, img)
        mask = detection_mask(records, img)
    else:
        mask = load_binary(rc.input, rc.threshold)
    report = compute_metrics(mask, truth)
    if rc.output and rc.output.lower().endswith(".csv"):
        text = report.as_csv()
    else:
        text = json.dumps(report.as_dict(), indent=2) + "\n"
    if rc.output:
        with open(rc.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _bench_one(entry: Dict, index: int, algo: str, seed: int) -> Dict:
    name = entry.get("name", f"scene{index}")
    if "spec" in entry:
        img, truth = synth_scene(entry["spec"], seed)
    else:
        img = load_binary(entry["image"])
        truth = load_ground_truth(entry["truth"])
    rc = RunConfig(command="bench", algorithm=algo, seed=seed,
                   csa=CsaConfig(rng_seed=seed),
                   rht=RhtConfig(rng_seed=seed),
                   evm=EvmConfig(rng_seed=seed))
    t0 = time.perf_counter()
    records = _detect_records(img, rc)
    elapsed = time.perf_counter() - t0
    report = compute_metrics(detection_mask(records, img), truth, elapsed)
    counts = match_primitives(records, truth)
    return {
        "scene": name, "algo": algo, "seed": seed,
        "n_pixels": int(img.bits.sum()), "time_s": elapsed,
        "E1": report.e1, "E2": report.e2, "AD": report.ad,
        "matched": counts["matched"], "missed": counts["missed"],
        "spurious": counts["spurious"],
    }


def _cmd_bench(rc: RunConfig) -> int:
    with open(rc.scenes, "r", encoding="utf-8") as fh:
        scenes = json.load(fh)
    algos = [a.strip() for a in rc.algorithm.split(",") if a.strip()]
    for a in algos:
        if a not in ("csa", "rht", "evm"):
            raise ValueError(f"unknown algorithm {a!r}")
    jobs = [(entry, i, algo) for i, entry in enumerate(scenes) for algo in algos]
    workers = max(1, int(os.environ.get("ARCSCAN_THREADS", "1")))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        rows = list(pool.map(
            lambda job: _bench_one(job[0], job[1], job[2], rc.seed), jobs))
    fields = ["scene", "algo", "seed", "n_pixels", "time_s",
              "E1", "E2", "AD", "matched", "missed", "spurious"]
    with open(rc.output, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        for row in rows:
            row["time_s"] = f"{row['time_s']:.4f}"
            for key in ("E1", "E2", "AD"):
                row[key] = f"{row[key]:.3f}"
            writer.writerow(row)
    return 0


def run(argv: Sequence[str]) -> int:
    ns = _build_parser().parse_args(list(argv))
    rc = _run_config(ns)
    handler = {"detect": _cmd_detect, "synth": _cmd_synth,
               "eval": _cmd_eval, "bench": _cmd_bench}[rc.command]
    return handler(rc)


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        return run(sys.argv[1:] if argv is None else argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    except FileNotFoundError as exc:
        print(f"arcscan: no such file: {exc.filename}", file=sys.stderr)
        return 1
    except (ValueError, KeyError, json.JSONDecodeError, OSError) as exc:
        print(f"arcscan: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
