"""Puzzle description language: parsing, grounding, templates.

Oracles: counts forced by combinatorics [TRIVIAL], the published row
template rendering [PAPER], and structural round-trips.
"""

import pytest
from hypothesis import given, settings, strategies as st

from musolve import dsl, zoo


def spec_text(pid):
    return zoo.asset_text(zoo.get_entry(pid).spec_asset)


# -- parse_spec -------------------------------------------------------------

def test_sudoku_spec_shape():
    spec = dsl.parse_spec(spec_text("sudoku"))
    var_decls = [d for d in spec.decls if d.kind == "VAR"]
    con_decls = [d for d in spec.decls if d.kind == "CON"]
    assert [d.name for d in var_decls] == ["grid"]
    con_ad = next(d for d in con_decls if d.name == "con_ad")
    assert len(con_ad.shape) == 4


def test_missing_annotation_is_an_error():
    src = "puzzle p\nfind x : [1..2] of 1..2\n"
    with pytest.raises(dsl.DslError, match="annotation"):
        dsl.parse_spec(src)


def test_empty_file_is_an_error():
    with pytest.raises(dsl.DslError):
        dsl.parse_spec("")


def test_all_specs_parse():
    for entry in zoo.list_catalog():
        spec = dsl.parse_spec(spec_text(entry.id))
        assert spec.name


# -- parse_instance ---------------------------------------------------------

def test_shape_mismatch_rejected():
    spec = dsl.parse_spec(
        "puzzle p\nparam fixed : [1..2, 1..2] of 0..2\n"
        "@VAR find grid : [1..2, 1..2] of 1..2\n")
    bad = "instance p\nparam fixed = [[0, 0, 0], [0, 0, 0]]\n"
    with pytest.raises(dsl.DslError):
        dsl.parse_instance(bad, spec)


def test_out_of_range_value_rejected():
    spec = dsl.parse_spec(
        "puzzle p\nparam fixed : [1..2, 1..2] of 0..2\n"
        "@VAR find grid : [1..2, 1..2] of 1..2\n")
    bad = "instance p\nparam fixed = [[0, 9], [0, 0]]\n"
    with pytest.raises(dsl.DslError):
        dsl.parse_instance(bad, spec)


def test_all_zero_instance_is_valid():
    spec = dsl.parse_spec(spec_text("sudoku"))
    text = ("instance sudoku\nparam fixed = [\n" +
            ",\n".join("  [0,0,0,0,0,0,0,0,0]" for _ in range(9)) + "\n]\n")
    inst = dsl.parse_instance(text, spec)
    assert inst.bindings["fixed"][0][0] == 0


def test_missing_param_rejected():
    spec = dsl.parse_spec(spec_text("sudoku"))
    with pytest.raises(dsl.DslError):
        dsl.parse_instance("instance sudoku\n", spec)


# -- ground -----------------------------------------------------------------

def test_sudoku_row_family_count_is_2916():
    # [TRIVIAL] 9 rows * C(9,2)=36 column pairs * 9 values
    spec = dsl.parse_spec(spec_text("sudoku"))
    inst = dsl.parse_instance(
        zoo.asset_text("sudoku-newspaper.inst"), spec)
    model = dsl.ground(spec, inst)
    assert sum(1 for g in model.cons if g.family == "con_ad") == 2916


def test_template_rendering_row_pair():
    # [PAPER] the published row-constraint template text
    template = ("cells ({a[0]},{a[1]}) and ({a[0]},{a[2]}) cannot both be "
                "{a[3]} as they are in the same column")
    out = dsl._render(template, (1, 2, 3, 5), {})
    assert out == ("cells (1,2) and (1,3) cannot both be 5 "
                   "as they are in the same column")


def test_everywhere_false_guard_grounds_to_nothing():
    spec = dsl.parse_spec(
        "puzzle p\n"
        "@VAR find grid : [1..2] of 1..2\n"
        "@CON find c : [1..2, 1..2] of bool\n"
        "template c \"never ({a[0]},{a[1]})\"\n"
        "such that forall i : 1..2, j : 1..2 where i > 9 . "
        "c[i, j] -> grid[i] != grid[j]\n")
    inst = dsl.parse_instance("instance p\n", spec)
    model = dsl.ground(spec, inst)
    assert sum(1 for g in model.cons if g.family == "c") == 0


def test_grounding_is_deterministic():
    spec = dsl.parse_spec(spec_text("tents"))
    inst = dsl.parse_instance(zoo.asset_text("tents-1.inst"), spec)
    m1 = dsl.ground(spec, inst)
    m2 = dsl.ground(spec, inst)
    assert [(g.family, g.index, g.description, g.formula)
            for g in m1.cons] == \
           [(g.family, g.index, g.description, g.formula)
            for g in m2.cons]


def test_descriptions_fully_rendered():
    # index/param placeholders resolve at grounding; only the
    # alldifferent passthrough slots may remain for the encoder
    passthrough = ("{c1}", "{c2}", "{d}", "{cells}")
    for entry in zoo.list_catalog():
        spec = dsl.parse_spec(spec_text(entry.id))
        inst = dsl.parse_instance(
            zoo.asset_text(entry.instances[0].asset), spec)
        model = dsl.ground(spec, inst)
        for g in model.cons:
            rest = g.description
            for p in passthrough:
                rest = rest.replace(p, "")
            assert "{" not in rest, (entry.id, g.description)


# -- pretty round-trip ------------------------------------------------------

def test_pretty_round_trip_all_specs():
    for entry in zoo.list_catalog():
        spec = dsl.parse_spec(spec_text(entry.id))
        again = dsl.parse_spec(dsl.pretty(spec))
        assert again == spec, entry.id


@st.composite
def tiny_specs(draw):
    n = draw(st.integers(2, 4))
    vmax = draw(st.integers(2, 3))
    guard = draw(st.sampled_from(["i < j", "i != j", "i > j"]))
    return (
        f"puzzle t\n"
        f"@VAR find grid : [1..{n}] of 1..{vmax}\n"
        f"@CON find c : [1..{n}, 1..{n}] of bool\n"
        f"template c \"pair ({{a[0]}},{{a[1]}})\"\n"
        f"such that forall i, j : 1..{n} where {guard} . "
        f"c[i, j] -> grid[i] != grid[j]\n")


@settings(max_examples=30, deadline=None)
@given(tiny_specs())
def test_pretty_round_trip_random(src):
    spec = dsl.parse_spec(src)
    assert dsl.parse_spec(dsl.pretty(spec)) == spec
