"""Weak Aggregating Algorithm: experiment runner and core checks."""

import json

from . import _waa

__all__ = [
    "run",
    "verify",
    "replay",
    "normalize_config",
    "loss_eval",
    "loss_bound",
    "lemma5_bound",
    "mean_comparison",
    "build_clipping",
    "clip_point",
    "clip_measure",
    "format_double",
]


def run(config):
    """Run one experiment. Returns (summary dict, trace CSV text)."""
    summary, trace = _waa.run(json.dumps(config))
    return json.loads(summary), trace


def verify(config):
    return json.loads(_waa.verify(json.dumps(config)))


def replay(trace_csv):
    return json.loads(_waa.replay(trace_csv))


def normalize_config(config):
    """Config with every default filled in."""
    return json.loads(_waa.normalize_config(json.dumps(config)))


def clip_measure(kind, obs_center, obs_radius, gamma0, measure):
    """measure: [{"point": [..], "mass": m}, ...]"""
    return json.loads(_waa.clip_measure(kind, obs_center, obs_radius, gamma0, json.dumps(measure)))


loss_eval = _waa.loss_eval
loss_bound = _waa.loss_bound
lemma5_bound = _waa.lemma5_bound
mean_comparison = _waa.mean_comparison
build_clipping = _waa.build_clipping
clip_point = _waa.clip_point
format_double = _waa.format_double
