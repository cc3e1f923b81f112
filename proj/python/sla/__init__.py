"""Bounded checker and interpreter for separation-logic types with frame rules."""

import json

from . import _sla
from ._sla import SlaError, normalize_heap

__all__ = ["SlaError", "check", "run", "harness", "is_precise", "normalize_heap"]

_DEFAULTS = dict(loc_max=3, val_min=0, val_max=3, fix_budget=16)


def check(source, mode="precise", **universe):
    """Type-check program text; returns the derivation dump as a dict."""
    return json.loads(_sla.check(source, mode, **{**_DEFAULTS, **universe}))


def run(source, heap, env="", def_name="", mode="precise", **universe):
    """Run the goal (or def_name) on a heap literal; returns (outcomes, approximate)."""
    return _sla.run(source, heap, env, def_name, mode, **{**_DEFAULTS, **universe})


def harness(suite, corpus="", mode="precise", imprecise_demo=False, **universe):
    """Run a harness suite; returns (reports, exit_code)."""
    text, code = _sla.harness(suite, corpus, mode, imprecise_demo, **{**_DEFAULTS, **universe})
    return [json.loads(line) for line in text.splitlines()], code


def is_precise(assertion, preds="", loc_max=3, val_min=0, val_max=3):
    """Precision of an assertion; returns (precise, witness_heap, subheaps)."""
    return _sla.is_precise(assertion, preds, loc_max, val_min, val_max)
