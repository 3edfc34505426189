"""Power grid cases, bounds on the AC-OPF and their QCQP form."""

import json as _json

from ._core import (
    Case,
    DimensionError,
    Error,
    FlowLimit,
    InfeasibleBoundError,
    ModelError,
    ParseError,
    Qcqp,
    Representation,
    StructureError,
    UndefinedGapError,
    UnsupportedFormatError,
    admittance,
    build_qcqp,
    check_point,
    dcopf_bound,
    gap_percent,
    load_case,
    local_acopf,
    parse_case,
    parse_qcqp,
    power_flow,
    real_candidate,
    stats,
)
from ._core import run_pipeline as _run_pipeline


def run_pipeline(paths, **options):
    """Run the batch over `paths`.

    Returns (ledger, tables, exit_status) where ledger is the decoded JSON
    document with "cases" and "errors".
    """
    text, tables, status = _run_pipeline([str(p) for p in paths], **options)
    return _json.loads(text), tables, status


__all__ = [name for name in dir() if not name.startswith("_")]
