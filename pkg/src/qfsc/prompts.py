"""Prompt templates shipped as package data.

Templates are UTF-8 text files named ``<lang>_<kind>_<version>.txt``.
Leading lines starting with ``#`` are comments and are dropped on load.
Placeholders look like ``{query}`` and are filled in a single pass, so
placeholder-like text inside the inserted values is left alone.
"""
from __future__ import annotations

import re
from functools import lru_cache
from importlib import resources

TEMPLATE_VERSION = "v1"
DEFAULT_LANGUAGE = "sl"

_PLACEHOLDER = re.compile(r"\{(\w+)\}")


@lru_cache(maxsize=None)
def load_template(kind: str, lang: str = DEFAULT_LANGUAGE, version: str = TEMPLATE_VERSION) -> str:
    name = f"{lang}_{kind}_{version}.txt"
    raw = resources.files("qfsc").joinpath("templates", name).read_text(encoding="utf-8")
    lines = raw.splitlines(keepends=True)
    while lines and lines[0].startswith("#"):
        lines.pop(0)
    return "".join(lines)


def render(template: str, **values: str) -> str:
    def fill(m: re.Match) -> str:
        key = m.group(1)
        if key not in values:
            raise KeyError(f"template placeholder {{{key}}} has no value")
        return values[key]

    return _PLACEHOLDER.sub(fill, template)
