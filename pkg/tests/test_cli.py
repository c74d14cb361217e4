"""Command-line front end, exercised through run()/main() in-process."""

import hashlib
import json
import math
import os

import pytest

from arcscan.cli import main, run


@pytest.fixture
def scene_spec_path(tmp_path):
    spec = {"size": [300, 300],
            "circles": [{"center": [100, 110], "radius": 45, "span": None},
                        {"center": [210, 190], "radius": 38,
                         "span": [0.5, 0.5 + 1.2 * math.pi]}],
            "lines": [[[20, 270], [280, 250]]],
            "noise": 0.0}
    path = tmp_path / "scene.json"
    path.write_text(json.dumps(spec))
    return str(path)


def _synth(tmp_path, scene_spec_path, seed="7"):
    img = str(tmp_path / "scene.pbm")
    gt = str(tmp_path / "gt.json")
    assert run(["synth", "--spec", scene_spec_path, "--out", img,
                "--truth", gt, "--seed", seed]) == 0
    return img, gt


class TestSynth:
    def test_writes_image_and_truth(self, tmp_path, scene_spec_path):
        img, gt = _synth(tmp_path, scene_spec_path)
        assert os.path.exists(img)
        doc = json.loads(open(gt).read())
        assert len(doc["primitives"]) == 2
        assert os.path.exists(str(tmp_path / "gt_arcs.pbm"))
        assert os.path.exists(str(tmp_path / "gt_curves.pbm"))


class TestDetect:
    def test_arcs_json(self, tmp_path, scene_spec_path):
        img, _ = _synth(tmp_path, scene_spec_path)
        out = str(tmp_path / "arcs.json")
        assert run(["detect", "--in", img, "--out", out]) == 0
        items = json.loads(open(out).read())
        assert len(items) == 2
        for item in items:
            assert set(item) == {"center", "radius", "endpoints",
                                 "closed", "n_pixels", "source"}

    def test_overlay_svg(self, tmp_path, scene_spec_path):
        img, _ = _synth(tmp_path, scene_spec_path)
        out = str(tmp_path / "arcs.json")
        svg = str(tmp_path / "overlay.svg")
        assert run(["detect", "--in", img, "--out", out, "--overlay", svg]) == 0
        text = open(svg).read()
        assert text.startswith("<svg")
        assert "<circle" in text or "<path" in text

    def test_algo_selector(self, tmp_path, scene_spec_path):
        img, _ = _synth(tmp_path, scene_spec_path)
        for algo in ("csa", "rht", "evm"):
            out = str(tmp_path / f"arcs_{algo}.json")
            assert run(["detect", "--in", img, "--out", out,
                        "--algo", algo, "--seed", "1"]) == 0
            assert isinstance(json.loads(open(out).read()), list)


class TestEval:
    def test_closed_loop_on_truth_mask_gives_ad_one(self, tmp_path, scene_spec_path):
        _synth(tmp_path, scene_spec_path)
        gt = str(tmp_path / "gt.json")
        rep = str(tmp_path / "rep.json")
        assert run(["eval", "--in", str(tmp_path / "gt_arcs.pbm"),
                    "--truth", gt, "--out", rep]) == 0
        doc = json.loads(open(rep).read())
        assert doc["AD"] == 1.0
        assert doc["E1"] == 0.0
        assert doc["E2"] == 0.0

    def test_arcs_json_input(self, tmp_path, scene_spec_path):
        img, gt = _synth(tmp_path, scene_spec_path)
        arcs = str(tmp_path / "arcs.json")
        rep = str(tmp_path / "rep.json")
        assert run(["detect", "--in", img, "--out", arcs]) == 0
        assert run(["eval", "--in", arcs, "--truth", gt,
                    "--image", img, "--out", rep]) == 0
        doc = json.loads(open(rep).read())
        assert doc["AD"] >= 0.9
        assert doc["elapsed"] == 0.0

    def test_csv_output(self, tmp_path, scene_spec_path):
        _synth(tmp_path, scene_spec_path)
        gt = str(tmp_path / "gt.json")
        rep = str(tmp_path / "rep.csv")
        assert run(["eval", "--in", str(tmp_path / "gt_arcs.pbm"),
                    "--truth", gt, "--out", rep]) == 0
        lines = open(rep).read().splitlines()
        assert lines[0] == "N_c,N_g,N_p,N_fa,N_fr,E1,E2,AD,elapsed"
        assert len(lines) == 2

    def test_json_input_requires_image(self, tmp_path, scene_spec_path):
        _, gt = _synth(tmp_path, scene_spec_path)
        arcs = str(tmp_path / "arcs.json")
        open(arcs, "w").write("[]")
        assert main(["eval", "--in", arcs, "--truth", gt]) == 1


class TestBench:
    def test_csv_schema(self, tmp_path, scene_spec_path):
        scenes = str(tmp_path / "scenes.json")
        spec = json.loads(open(scene_spec_path).read())
        open(scenes, "w").write(json.dumps(
            [{"name": "s0", "spec": spec}]))
        out = str(tmp_path / "bench.csv")
        assert run(["bench", "--scenes", scenes, "--out", out,
                    "--algo", "csa,rht", "--seed", "3"]) == 0
        lines = open(out).read().splitlines()
        assert lines[0] == ("scene,algo,seed,n_pixels,time_s,"
                            "E1,E2,AD,matched,missed,spurious")
        assert len(lines) == 3
        assert lines[1].startswith("s0,csa,3,")
        assert lines[2].startswith("s0,rht,3,")

    def test_unknown_algorithm(self, tmp_path, scene_spec_path):
        scenes = str(tmp_path / "scenes.json")
        spec = json.loads(open(scene_spec_path).read())
        open(scenes, "w").write(json.dumps([{"name": "s0", "spec": spec}]))
        assert main(["bench", "--scenes", scenes,
                     "--out", str(tmp_path / "b.csv"), "--algo", "csa,bogus"]) == 1


class TestDeterminism:
    def test_identical_seeds_identical_bytes(self, tmp_path, scene_spec_path):
        def loop():
            img, gt = _synth(tmp_path, scene_spec_path, seed="42")
            arcs = str(tmp_path / "arcs.json")
            repj = str(tmp_path / "rep.json")
            repc = str(tmp_path / "rep.csv")
            assert run(["detect", "--in", img, "--out", arcs, "--seed", "42"]) == 0
            assert run(["eval", "--in", arcs, "--truth", gt,
                        "--image", img, "--out", repj]) == 0
            assert run(["eval", "--in", arcs, "--truth", gt,
                        "--image", img, "--out", repc]) == 0
            digests = {}
            for name in ("scene.pbm", "gt.json", "gt_arcs.pbm",
                         "gt_curves.pbm", "arcs.json", "rep.json", "rep.csv"):
                digests[name] = hashlib.sha256(
                    (tmp_path / name).read_bytes()).hexdigest()
            return digests
        assert loop() == loop()


class TestErrors:
    def test_missing_input_file(self, tmp_path):
        code = main(["detect", "--in", str(tmp_path / "nope.pbm"),
                     "--out", str(tmp_path / "arcs.json")])
        assert code == 1

    def test_bad_subcommand_exits_nonzero(self):
        assert main(["frobnicate"]) != 0
