"""Bundled reference domains and sample problems."""

from importlib import resources


def read_text(name: str) -> str:
    return resources.files(__name__).joinpath(name).read_text()


def names() -> list:
    return sorted(p.name for p in resources.files(__name__).iterdir()
                  if p.name.endswith(".pddl"))
