"""Smoke test for the `dimsurgery` extension module.

Build and run from the repository root:

    cargo build --release -p dimsurgery-py --features extension-module
    cp target/release/libdimsurgery.so python/dimsurgery.so
    python3 python/smoke_test.py
"""

import math
import os
import random
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import dimsurgery as ds  # noqa: E402


def h(p):
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def main():
    for y in (0.0, 0.1, 0.5, 0.9, 1.0):
        assert abs(h(ds.entropy_inv(y)) - y) < 1e-12
    assert ds.entropy_inv(1.0) == 0.5
    assert abs(ds.entropy(0.11) - h(0.11)) < 1e-15

    naive, raise_, lower = ds.bound_curves(0.5, 1.0)
    assert abs(raise_ - 0.390) < 1e-3 and naive == lower
    assert ds.case_select(0.1, 0.3) == "case1"
    assert ds.case_select(0.5, 0.8) == "case2"

    assert ds.ball_volume(20, 3) == 1351
    assert ds.ball_volume(200, 100) > 2**190
    assert [ds.chunk_boundary(j) for j in range(1, 5)] == [0, 1, 5, 14]

    checked, failures = ds.verify_harper(6, 500, 1)
    assert checked == 500 and failures == 0
    assert len(ds.greedy_cover(8, 2)) > 0

    rng = random.Random(4)
    p = ds.entropy_inv(0.5)
    x = "".join("1" if rng.random() < p else "0" for _ in range(200_000))
    assert abs(ds.sequence_dim(x) - 0.5) < 0.02
    y, report = ds.surgery(x, "randomize", seed=3)
    report = dict(report)
    assert len(y) == len(x)
    assert report["dim_after"] > 0.98
    assert abs(report["distance"] - (0.5 - p)) < 0.03

    _, report = ds.surgery(x, "raise", s=0.5, t=0.5)
    assert dict(report)["distance"] == 0.0

    z = "".join(rng.choice("01") for _ in range(500))
    dup = "".join(b + b for b in z)
    noisy = "".join(b if rng.random() > 0.1 else "10"[int(b)] for b in dup)
    assert ds.duplication_length(noisy, dup) <= 2 * len(dup)

    for bad in (lambda: ds.entropy_inv(1.5), lambda: ds.surgery("012"), lambda: ds.case_select(0.6, 0.5)):
        try:
            bad()
        except ValueError:
            pass
        else:
            raise AssertionError("expected ValueError")
    print("smoke test passed")


if __name__ == "__main__":
    main()
