#!/usr/bin/env python3
"""Smoke test for the pycnf extension module.

Builds the cdylib if needed, imports it, and exercises the main surface:
grid math, model evaluation, checkpoint round-trips, PSNR and a tiny
continual training run.

Usage: python3 python/smoke_test.py
"""

import os
import shutil
import subprocess
import sys
import tempfile

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def build_module():
    subprocess.run(
        ["cargo", "build", "--release", "-p", "pycnf"], cwd=ROOT, check=True
    )
    src = os.path.join(ROOT, "target", "release", "libpycnf.so")
    dst = os.path.join(ROOT, "python", "pycnf.so")
    shutil.copyfile(src, dst)


def main():
    build_module()
    sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))
    import pycnf

    # grid resolutions: geometric spacing, endpoints pinned
    res = pycnf.level_resolutions(16, 2**17, 2, 16, 512, 3)
    assert res[0] == 16 and res[-1] == 512 and len(res) == 16, res
    assert all(a <= b for a, b in zip(res, res[1:])), res

    # hashing stays inside the table and is deterministic
    idx = pycnf.hash_index([1, 2, 3], 2**10, 3)
    assert 0 <= idx < 2**10
    assert idx == pycnf.hash_index([1, 2, 3], 2**10, 3)

    # model evaluation is pure and in range
    model = pycnf.FieldModel.hash(2, seed=7)
    sigma, rgb = model.eval([0.3, 0.6])
    assert sigma >= 0.0
    assert all(0.0 <= c <= 1.0 for c in rgb)
    assert model.eval([0.3, 0.6]) == (sigma, rgb)

    # checkpoint round trip is bit-exact
    with tempfile.TemporaryDirectory() as d:
        path = os.path.join(d, "model.cnf1")
        model.save(path)
        restored = pycnf.FieldModel.load(path)
        assert restored.param_hash() == model.param_hash()
        assert restored.param_count() == model.param_count()

    # psnr basics
    assert abs(pycnf.psnr_db([1.0] * 12, [0.0] * 12)) < 1e-12
    assert pycnf.psnr_db([0.5] * 12, [0.5] * 12) == 99.0

    # a small continual run: replay retains the first strip, naive does not
    img = pycnf.test_image(96, 96)
    _, naive = pycnf.train_image2d(img, 96, 96, 4, "naive", steps_per_task=150)
    _, replay = pycnf.train_image2d(img, 96, 96, 4, "replay", steps_per_task=150)
    print(f"naive  per-task PSNR: {[round(p, 2) for p in naive]}")
    print(f"replay per-task PSNR: {[round(p, 2) for p in replay]}")
    assert replay[0] > naive[0], (replay[0], naive[0])

    print("smoke test passed")


if __name__ == "__main__":
    main()
