"""Resonance index and spectral flow for finite-rank perturbation models."""

import json

from ._resflow import (
    IndexReport,
    Model,
    ResflowError,
    construct_finite_example,
    embedded_example,
    example_names,
    finite_pencil,
    load_model,
    op_A,
    parse_model,
    point_order,
    real_resonance_points,
    resonance_index,
    rigged_pencil,
    spectral_flow_oracle,
    ssf_counting,
    total_resonance_index,
)
from . import _resflow

__all__ = [
    "IndexReport",
    "Model",
    "ResflowError",
    "analyze",
    "check_example",
    "construct_finite_example",
    "embedded_example",
    "example_names",
    "finite_pencil",
    "load_model",
    "op_A",
    "parse_model",
    "point_order",
    "real_resonance_points",
    "resonance_index",
    "rigged_pencil",
    "spectral_flow_oracle",
    "ssf_counting",
    "total_resonance_index",
    "verify",
]


def analyze(model, lam, interval=None, at=None, strict=False, classify=True):
    """Full report as a dict (same layout as the CLI's JSON output)."""
    if interval is not None:
        interval = (float(interval[0]), float(interval[1]))
    return json.loads(_resflow._analyze_json(model, lam, interval, at, strict, classify))


def check_example(name):
    return json.loads(_resflow._example_json(name))


def verify(seed=42, trials=10, dim_lo=2, dim_hi=6):
    """Run the randomized property suite; returns (all_passed, summary_text)."""
    return _resflow._verify_text(seed, trials, dim_lo, dim_hi)
