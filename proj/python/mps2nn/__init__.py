"""Compile matrix-product-state contractions into softplus networks.

Thin dict-level wrappers over the C++ core; all heavy lifting happens there.
"""

import json

from ._core import (  # noqa: F401
    compile_json,
    eval_nn_json,
    gen_mps_json,
    log_amplitude_json,
    scaling_csv,
    verify_json,
)

__all__ = [
    "gen_mps",
    "compile_mps",
    "verify",
    "eval_nn",
    "log_amplitude",
    "scaling_csv",
]


def gen_mps(n, d=2, chi=4, seed=42, scale=0.0):
    """Sample a random open-boundary tensor chain, returned as a dict."""
    return json.loads(gen_mps_json(n, d, chi, seed, scale))


def compile_mps(mps, scheme="parallel", epsilon=1e-2, f_min=0.0,
                empirical_f_min=False, strict_softplus=False):
    """Compile a tensor chain (dict) into a network (dict) computing
    g1 + i*g2 = log of the contracted amplitude."""
    return json.loads(compile_json(json.dumps(mps), scheme, epsilon, f_min,
                                   empirical_f_min, strict_softplus))


def verify(mps, nn, exhaustive=False, sample=256, seed=1234, epsilon=0.0):
    """Check a compiled network against exact contraction; returns the
    report as a dict (report["pass"] is the verdict)."""
    return json.loads(verify_json(json.dumps(mps), json.dumps(nn),
                                  exhaustive, sample, seed, epsilon))


def eval_nn(nn, state):
    """Evaluate a compiled network on one basis state -> (g1, g2)."""
    return eval_nn_json(json.dumps(nn), list(state))


def log_amplitude(mps, state):
    """Exact (log|amplitude|, phase) of one basis state."""
    return log_amplitude_json(json.dumps(mps), list(state))
