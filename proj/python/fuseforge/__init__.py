"""Partitioned agent simulation with compile-time message optimizations."""

from ._core import (
    Error,
    Graph,
    IoError,
    ParameterError,
    ParseError,
    UsageError,
    erm,
    load_graph,
    mode_names,
    oracle_reduce,
    partition,
    run,
    sbm,
    setting_keys,
    simulate,
    star,
    torus2d,
    workload_names,
)

__all__ = [
    "Error",
    "Graph",
    "IoError",
    "ParameterError",
    "ParseError",
    "UsageError",
    "erm",
    "load_graph",
    "mode_names",
    "oracle_reduce",
    "partition",
    "run",
    "sbm",
    "setting_keys",
    "simulate",
    "star",
    "torus2d",
    "workload_names",
]
