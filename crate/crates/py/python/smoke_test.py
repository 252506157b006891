"""Smoke test for the rgbdt Python module.

Build and install first, e.g. ``maturin develop -m crates/py/Cargo.toml``,
then run ``python crates/py/python/smoke_test.py``.
"""

import math
import sys
import tempfile
from pathlib import Path

import rgbdt


def check_cues():
    r, g = rgbdt.to_chromaticity(100, 50, 50)
    assert math.isclose(r, 0.5) and math.isclose(g, 0.25)
    assert rgbdt.to_chromaticity(0, 0, 0) == (1 / 3, 1 / 3)
    assert rgbdt.normalize_depth(0, 8000.0) is None
    assert rgbdt.normalize_depth(4000, 8000.0) == 0.5
    assert rgbdt.normalize_thermal(255, 8) == 1.0


def check_config():
    cfg = rgbdt.PipelineConfig()
    assert cfg.window_n == 100
    cfg.window_n = 1
    try:
        cfg.validate()
    except ValueError as err:
        assert "window_n" in str(err)
    else:
        raise AssertionError("window_n = 1 accepted")


def check_density():
    bw = rgbdt.Bandwidths(1.0, 1.0, 1.0, 1.0)
    peak = rgbdt.kde_density((0.3, 0.3, 0.5, 0.5), [(0.3, 0.3, 0.5, 0.5)], bw)
    assert math.isclose(peak, 1 / (4 * math.pi**2), rel_tol=1e-12)


def check_postprocess():
    w = h = 12
    bits = [False] * (w * h)
    for y in range(2, 7):
        for x in range(2, 7):
            bits[y * w + x] = True
    bits[10 * w + 10] = True
    mask = rgbdt.Mask(w, h, bits)
    opened = rgbdt.open_mask(mask, 1)
    assert opened.count() == 25
    labels, n = rgbdt.connected_components(mask)
    assert n == 2 and labels[2 * w + 2] == 1
    rois = rgbdt.extract_rois(opened, 10)
    assert len(rois) == 1 and rois[0].bbox() == (2, 2, 6, 6)
    assert rgbdt.roi_match(rois, [(2, 2, 6, 6)], 0.5) == [True]
    assert rgbdt.mask_metrics(opened, opened) == (1.0, 1.0, 1.0)


def check_pipeline():
    frames, gt = rgbdt.synth("moving-square", seed=3)
    cfg = rgbdt.PipelineConfig.for_synthetic()
    bw = rgbdt.estimate_bandwidths(frames[: cfg.window_n], cfg)
    pipe = rgbdt.Pipeline(frames[0].width, frames[0].height, bw, cfg)
    scores = []
    for frame, truth in zip(frames, gt):
        _, mask, _ = pipe.process(frame)
        if truth.count():
            scores.append(rgbdt.mask_metrics(mask, truth)[2])
    mean_f = sum(scores) / len(scores)
    print(f"moving-square: mean F over {len(scores)} frames = {mean_f:.3f}")
    assert mean_f > 0.9


def check_disk_round_trip():
    with tempfile.TemporaryDirectory() as tmp:
        seq, out = Path(tmp) / "seq", Path(tmp) / "out"
        assert rgbdt.write_synthetic("static", seq, seed=1) == 200
        report = rgbdt.run_sequence(seq, out, rgbdt.PipelineConfig.load(seq / "config.toml"))
        assert report["frames_processed"] == 200
        assert report["mean_foreground_fraction"] < 0.005
        mask = rgbdt.Mask.load(out / "masks" / "000199.png")
        assert (mask.width, mask.height) == (64, 64)


def main():
    for check in (check_cues, check_config, check_density, check_postprocess, check_pipeline, check_disk_round_trip):
        check()
        print(f"ok  {check.__name__}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
