"""Python bindings for the maskfuse segmentation toolkit.

Masks are 2-D uint8 arrays (nonzero is foreground), probability maps 2-D float32
arrays, clicks (x, y) tuples. `run` drives a subcommand in-process with the
oracle or HTTP providers named in the config.
"""

import json

from ._core import (
    ClickBudgetError,
    ClickParseError,
    ConfigError,
    ManifestError,
    MaskfuseError,
    ProviderError,
    class_iou,
    confusion,
    distance_transform,
    fg_iou,
    generate_clicks,
    grid_clicks,
    iou,
    miou,
    parse_clicks,
    plan_tiles,
    plan_windows,
    select_masks,
    serialize_clicks,
)
from . import _core

__all__ = [
    "ClickBudgetError",
    "ClickParseError",
    "ConfigError",
    "ManifestError",
    "MaskfuseError",
    "ProviderError",
    "class_iou",
    "confusion",
    "default_config",
    "distance_transform",
    "fg_iou",
    "generate_clicks",
    "grid_clicks",
    "iou",
    "miou",
    "parse_clicks",
    "plan_tiles",
    "plan_windows",
    "run",
    "select_masks",
    "serialize_clicks",
]


def default_config():
    return json.loads(_core.default_config())


def run(command, manifest, **config):
    """Run `ovss`, `refer`, `clickgen` or `eval`; returns (exit_code, report, log)."""
    code, report, log = _core._run(command, str(manifest), json.dumps(config))
    return code, json.loads(report), log
