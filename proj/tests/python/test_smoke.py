import math

import pytest

import mps2nn


@pytest.fixture(scope="module")
def small_instance():
    mps = mps2nn.gen_mps(n=4, d=2, chi=2, seed=7)
    nn = mps2nn.compile_mps(mps, scheme="parallel", epsilon=5e-2,
                            empirical_f_min=True)
    return mps, nn


def test_gen_shape():
    mps = mps2nn.gen_mps(n=5, d=3, chi=2, seed=1)
    assert mps["n"] == 5 and mps["d"] == 3 and mps["chi"] == 2
    assert len(mps["sites"]) == 5
    assert mps["sites"][0]["shape"][0] == 1
    assert mps["sites"][-1]["shape"][2] == 1


def test_compile_and_verify(small_instance):
    mps, nn = small_instance
    report = mps2nn.verify(mps, nn, exhaustive=True)
    assert report["pass"] is True
    assert report["included"] > 0
    assert report["max_err"] < 5e-2


def test_eval_matches_exact(small_instance):
    mps, nn = small_instance
    state = [0, 1, 0, 1]
    g1, g2 = mps2nn.eval_nn(nn, state)
    r1, r2 = mps2nn.log_amplitude(mps, state)
    dphi = (g2 - r2 + math.pi) % (2.0 * math.pi) - math.pi
    assert math.hypot(g1 - r1, dphi) < 5e-2


def test_verify_detects_corruption(small_instance):
    mps, nn = small_instance
    bad = {k: v for k, v in nn.items()}
    bad["nodes"] = [dict(nd) for nd in nn["nodes"]]
    # knock the final output bias: every state shifts by 0.5
    root = bad["roots"][0] - len(bad["inputs"])
    bad["nodes"][root]["bias"] = bad["nodes"][root]["bias"] + 0.5
    report = mps2nn.verify(mps, bad, exhaustive=True)
    assert report["pass"] is False
