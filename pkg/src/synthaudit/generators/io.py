"""Versioned JSON serialization for fitted generators.

Floats are written with ``repr`` precision by the json module, so parameters
round-trip exactly.
"""

from __future__ import annotations

import json

from ..errors import Unsupported
from .gan import GanGenerator
from .gmm import GmmClassSampler

FORMAT = "synthaudit.generator"
VERSION = 1
_KINDS = {"gan": GanGenerator, "gmm": GmmClassSampler}


def generator_to_dict(model) -> dict:
    return {"format": FORMAT, "version": VERSION, "kind": model.kind, "model": model.to_dict()}


def generator_from_dict(d: dict):
    if d.get("format") != FORMAT:
        raise Unsupported("not a synthaudit generator file")
    if d.get("version") != VERSION:
        raise Unsupported(f"unsupported generator file version {d.get('version')!r}")
    try:
        cls = _KINDS[d["kind"]]
    except KeyError:
        raise Unsupported(f"unknown generator kind {d.get('kind')!r}") from None
    return cls.from_dict(d["model"])


def save_generator(model, path):
    with open(path, "w") as fh:
        json.dump(generator_to_dict(model), fh, sort_keys=True)
        fh.write("\n")


def load_generator(path):
    with open(path) as fh:
        return generator_from_dict(json.load(fh))
