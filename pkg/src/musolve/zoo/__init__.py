"""Bundled puzzle definitions and instances.

Each catalog entry names a spec asset plus one or more instance assets;
``build`` runs the full spec -> ground -> encode chain and (by default)
verifies that the instance has a unique solution.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources

from .. import dsl
from .. import encode as enc


@dataclass(frozen=True)
class InstanceRef:
    id: str
    asset: str
    note: str = ""


@dataclass(frozen=True)
class CatalogEntry:
    id: str
    title: str
    spec_asset: str
    positive_only: bool = False     # pipeline default for this puzzle
    instances: tuple = ()


_CATALOG = (
    CatalogEntry(
        id="sudoku",
        title="Sudoku",
        spec_asset="sudoku.dsl",
        instances=(
            InstanceRef("newspaper", "sudoku-newspaper.inst",
                        "widely reprinted newspaper-difficulty instance"),
            InstanceRef("escargot", "sudoku-escargot.inst",
                        "AI Escargot (Inkala 2006)"),
            InstanceRef("inkala2012", "sudoku-inkala2012.inst",
                        "Inkala 2012 press release puzzle"),
            InstanceRef("platinum", "sudoku-platinum.inst",
                        "Platinum Blonde"),
            InstanceRef("goldennugget", "sudoku-goldennugget.inst",
                        "Golden Nugget"),
            InstanceRef("eastermonster", "sudoku-eastermonster.inst",
                        "Easter Monster"),
            InstanceRef("inkala2010", "sudoku-inkala2010.inst",
                        "Inkala 2010 press release puzzle"),
            InstanceRef("escargot-desk", "sudoku-escargot-desk.inst",
                        "AI Escargot with added solution givens "
                        "(desk-scale benchmark variant)"),
            InstanceRef("inkala2012-desk", "sudoku-inkala2012-desk.inst",
                        "Inkala 2012 with added solution givens "
                        "(desk-scale benchmark variant)"),
            InstanceRef("platinum-desk", "sudoku-platinum-desk.inst",
                        "Platinum Blonde with added solution givens "
                        "(desk-scale benchmark variant)"),
            InstanceRef("goldennugget-desk", "sudoku-goldennugget-desk.inst",
                        "Golden Nugget with added solution givens "
                        "(desk-scale benchmark variant)"),
            InstanceRef("eastermonster-desk", "sudoku-eastermonster-desk.inst",
                        "Easter Monster with added solution givens "
                        "(desk-scale benchmark variant)"),
            InstanceRef("inkala2010-desk", "sudoku-inkala2010-desk.inst",
                        "Inkala 2010 with added solution givens "
                        "(desk-scale benchmark variant)"),
        ),
    ),
    CatalogEntry(
        id="miracle-sudoku",
        title="Miracle Sudoku",
        spec_asset="miracle-sudoku.dsl",
        instances=(
            InstanceRef("classic", "miracle-sudoku-classic.inst",
                        "the famous two-given instance"),
        ),
    ),
    CatalogEntry(
        id="x-sudoku",
        title="X-Sudoku",
        spec_asset="x-sudoku.dsl",
        instances=(
            InstanceRef("bundled-1", "x-sudoku-1.inst",
                        "generated; verified unique"),
        ),
    ),
    CatalogEntry(
        id="jigsaw-sudoku",
        title="Jigsaw Sudoku",
        spec_asset="jigsaw-sudoku.dsl",
        instances=(
            InstanceRef("bundled-1", "jigsaw-sudoku-1.inst",
                        "generated; verified unique"),
        ),
    ),
    CatalogEntry(
        id="binairo",
        title="Binairo",
        spec_asset="binairo.dsl",
        instances=(
            InstanceRef("bundled-1", "binairo-1.inst",
                        "generated; verified unique"),
        ),
    ),
    CatalogEntry(
        id="futoshiki",
        title="Futoshiki",
        spec_asset="futoshiki.dsl",
        instances=(
            InstanceRef("bundled-1", "futoshiki-1.inst",
                        "generated; verified unique"),
        ),
    ),
    CatalogEntry(
        id="kakuro",
        title="Kakuro",
        spec_asset="kakuro.dsl",
        instances=(
            InstanceRef("bundled-1", "kakuro-1.inst",
                        "generated; verified unique"),
        ),
    ),
    CatalogEntry(
        id="skyscrapers",
        title="Skyscrapers",
        spec_asset="skyscrapers.dsl",
        positive_only=True,
        instances=(
            InstanceRef("bundled-1", "skyscrapers-1.inst",
                        "generated; verified unique"),
        ),
    ),
    CatalogEntry(
        id="starbattle",
        title="Star Battle",
        spec_asset="starbattle.dsl",
        instances=(
            InstanceRef("bundled-1", "starbattle-1.inst",
                        "generated; verified unique"),
        ),
    ),
    CatalogEntry(
        id="tents",
        title="Tents",
        spec_asset="tents.dsl",
        instances=(
            InstanceRef("bundled-1", "tents-1.inst",
                        "generated; verified unique"),
        ),
    ),
    CatalogEntry(
        id="thermometers",
        title="Thermometers",
        spec_asset="thermometers.dsl",
        instances=(
            InstanceRef("bundled-1", "thermometers-1.inst",
                        "generated; verified unique"),
        ),
    ),
    CatalogEntry(
        id="shidoku",
        title="Shidoku",
        spec_asset="shidoku.dsl",
        instances=(
            InstanceRef("easy", "shidoku-easy.inst",
                        "generated; verified unique"),
        ),
    ),
)


def list_catalog():
    return list(_CATALOG)


def get_entry(puzzle_id):
    for entry in _CATALOG:
        if entry.id == puzzle_id:
            return entry
    raise KeyError(f"unknown puzzle {puzzle_id!r}")


def asset_text(name):
    return (resources.files(__package__) / "assets" / name).read_text()


@lru_cache(maxsize=None)
def load_spec(puzzle_id):
    return dsl.parse_spec(asset_text(get_entry(puzzle_id).spec_asset))


def load_instance(puzzle_id, instance_id):
    entry = get_entry(puzzle_id)
    for ref in entry.instances:
        if ref.id == instance_id:
            return dsl.parse_instance(asset_text(ref.asset),
                                      load_spec(puzzle_id))
    raise KeyError(f"unknown instance {instance_id!r} of {puzzle_id!r}")


def build(puzzle_id, instance_id=None, instance_text=None, verify=True,
          backend="auto"):
    """EncodedPuzzle for a bundled instance (or pasted instance text)."""
    spec = load_spec(puzzle_id)
    if instance_text is not None:
        inst = dsl.parse_instance(instance_text, spec)
    else:
        entry = get_entry(puzzle_id)
        if instance_id is None:
            instance_id = entry.instances[0].id
        inst = load_instance(puzzle_id, instance_id)
    model = dsl.ground(spec, inst)
    return enc.encode(model, verify=verify, backend=backend)
