"""Access to the data files bundled with the package.

Everything here is plain JSON under ``voicegate/data``; the helpers exist so
callers never have to know the on-disk layout, and so defaults are parsed
once per process.
"""

from __future__ import annotations

from functools import lru_cache
from importlib import resources
from pathlib import Path

from .taxonomy import GeneratorSpec, Platform, TaxonomyInventory

_GENERATOR_FILES = {
    Platform.ALEXA: "generator_alexa.json",
    Platform.GOOGLE_HOME: "generator_google.json",
}

_POLICY_FILES = {
    Platform.ALEXA: "policy_alexa_default.json",
    Platform.GOOGLE_HOME: "policy_google_default.json",
}


def data_path(name: str) -> Path:
    path = resources.files("voicegate").joinpath("data", name)
    return Path(str(path))


@lru_cache(maxsize=1)
def default_inventory() -> TaxonomyInventory:
    return TaxonomyInventory.from_file(data_path("inventory.json"))


def default_generator_spec(platform: Platform) -> GeneratorSpec:
    return GeneratorSpec.from_file(data_path(_GENERATOR_FILES[platform]))


def default_policy_path(platform: Platform) -> Path:
    return data_path(_POLICY_FILES[platform])
