"""Continuous space-time displacement fields for thin-shell cloth.

The heavy lifting lives in the compiled extension ``_neuralshell``; this
package re-exports its functions and adds a small pure-Python convenience
layer on top of the JSON scenario descriptions.
"""

import json as _json

from ._neuralshell import (
    benchmark,
    builtin_scenarios,
    checkpoint_info,
    evaluate,
    export_meshes,
    scenario_json,
    train,
)

__all__ = [
    "benchmark",
    "builtin_scenarios",
    "checkpoint_info",
    "evaluate",
    "export_meshes",
    "scenario",
    "scenario_json",
    "train",
]


def scenario(name_or_path):
    """Scenario description (builtin name or config file path) as a dict."""
    return _json.loads(scenario_json(name_or_path))
