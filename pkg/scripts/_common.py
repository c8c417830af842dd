"""Shared helpers for the experiment scripts: dataclass configs from argv."""

from __future__ import annotations

import argparse
import dataclasses
import json
from pathlib import Path


def parse_config(cls, argv=None, description: str = ""):
    """Build an argparse front end from a dataclass and return an instance."""
    p = argparse.ArgumentParser(description=description)
    for f in dataclasses.fields(cls):
        default = f.default if f.default is not dataclasses.MISSING else f.default_factory()
        flag = "--" + f.name.replace("_", "-")
        if isinstance(default, bool):
            p.add_argument(flag, action="store_true", default=default)
        elif isinstance(default, (list, tuple)):
            kind = type(default[0]) if default else str
            p.add_argument(flag, nargs="+", type=kind, default=list(default))
        else:
            p.add_argument(flag, type=type(default) if default is not None else str, default=default)
    ns = p.parse_args(argv)
    return cls(**vars(ns))


def write_json(path, payload: dict) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=1, sort_keys=True, default=str) + "\n")
