"""Bethe free energy, graph zeta functions and loopy belief propagation.

Models are JSON documents (see docs/model-format.md). Every function accepts
either the document text, a dict, or a path to a file.
"""

import csv
import io
import json
import os

from . import _core
from ._core import InputError, NumericalError, SCHEMA_VERSION

__all__ = [
    "InputError",
    "NumericalError",
    "SCHEMA_VERSION",
    "Result",
    "canonical_model",
    "lbp_run",
    "verify",
    "zeta_info",
    "experiment_grid",
    "experiment_wn",
    "experiment_trajectory",
]


class Result:
    """Exit code, parsed payload and the one-line summary of a command."""

    def __init__(self, out, kind):
        self.exit_code = out.exit_code
        self.text = out.text
        self.message = out.message
        if kind == "json":
            self.data = json.loads(out.text)
        else:
            rows = list(csv.DictReader(io.StringIO(out.text)))
            self.data = [{k: _number(v) for k, v in r.items()} for r in rows]

    @property
    def ok(self):
        return self.exit_code == 0

    def __repr__(self):
        return f"Result(exit_code={self.exit_code}, message={self.message!r})"


def _number(v):
    try:
        return int(v)
    except ValueError:
        return float(v)


def _text(model):
    if isinstance(model, dict):
        return json.dumps(model)
    if isinstance(model, os.PathLike) or (isinstance(model, str) and not model.lstrip().startswith("{")):
        with open(model, encoding="utf-8") as f:
            return f.read()
    return model


def canonical_model(model):
    return json.loads(_core.canonical_model(_text(model)))


def lbp_run(model, **kw):
    return Result(_core.lbp_run(_text(model), **kw), "json")


def verify(model, which, **kw):
    return Result(_core.verify(_text(model), which, **kw), "csv")


def zeta_info(model, **kw):
    return Result(_core.zeta_info(_text(model), **kw), "json")


def experiment_grid(**kw):
    return Result(_core.experiment_grid(**kw), "csv")


def experiment_wn(**kw):
    return Result(_core.experiment_wn(**kw), "csv")


def experiment_trajectory(model, **kw):
    return Result(_core.experiment_trajectory(_text(model), **kw), "csv")
