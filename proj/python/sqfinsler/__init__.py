"""Python front end to the sqfinsler verification engine.

    >>> import sqfinsler
    >>> report = sqfinsler.verify(family="square-scalar", mu=1.0, k=0.3, a=[0.1, 0.2, 0.05], samples=8)
    >>> report["summary"]["pass"]
    True
"""

import json

from ._core import (
    FamilyParams,
    SqfinslerError,
    default_tolerances,
    report_rows,
    rigidity_bounds,
)
from . import _core

__all__ = [
    "FamilyParams",
    "SqfinslerError",
    "curvature",
    "default_tolerances",
    "report_rows",
    "rigidity_bounds",
    "verify",
    "verify_text",
]


def _config(config, overrides):
    merged = dict(config or {})
    merged.update(overrides)
    return json.dumps(merged)


def verify(config=None, **overrides):
    """Run the suite; `config` uses the same keys as the CLI config file."""
    return json.loads(_core.verify_json(_config(config, overrides)))


def verify_text(config=None, **overrides):
    return _core.verify_text(_config(config, overrides))


def curvature(x, y, config=None, **overrides):
    """Single-point curvature summary at (x, y)."""
    return json.loads(_core.curvature_json(_config(config, overrides), list(x), list(y)))
