import dataclasses
import json

import numpy as np
import pytest

from arraycode import Code, encode, random_info
from arraycode.analysis import (
    default_partition,
    evenodd_bandwidth,
    exact_union_bandwidth,
    rdp_bandwidth,
    star_symmetry_saving,
    xcode_bandwidth_bound,
)
from arraycode.core import Coord, ParameterError, ParityGroupId, PlanError
from arraycode.planner import (
    execute_plan,
    plan_evenodd_single,
    plan_extended_single,
    plan_rdp_single,
    plan_star_double,
    plan_to_json,
    plan_xcode_single,
    recovered_column,
)

RNG = np.random.default_rng(2024)


def run_and_verify(code, plan, block_size=4):
    """Execute against a fresh random encode; every recovered cell must
    match the ground truth."""
    grid = encode(code, random_info(code, block_size, RNG))
    recovered = execute_plan(plan, grid)
    for coord, value in recovered.items():
        assert np.array_equal(value, grid.cell(coord)), coord
    column = recovered_column(plan, recovered, block_size)
    for row in range(1, code.rows + 1):
        assert np.array_equal(column[row - 1],
                              grid.cell(Coord(row, plan.recover_col)))
    return plan.gamma


# -- evenodd ----------------------------------------------------------------

def test_evenodd_worked_example():
    """p=5, column 1, two flat groups: 16 blocks, four of them shared."""
    plan = plan_evenodd_single(5, 1, 2)
    assert plan.gamma == 16
    assert plan.sum_count() == 2
    assert plan.parity_block_count() == 4
    assert len(plan.raw_cells()) == 10
    flat = [g for g in plan.groups if g.group.slope == 0]
    sloped = [g for g in plan.groups if g.group.slope == 1]
    shared = ({m for g in flat for m in g.members}
              & {m for g in sloped for m in g.members})
    assert shared == {Coord(1, 3), Coord(1, 4), Coord(2, 2), Coord(2, 3)}
    run_and_verify(Code.evenodd(5), plan)


@pytest.mark.parametrize("p", [3, 5, 7])
def test_evenodd_gamma_formula_and_execution(p):
    code = Code.evenodd(p)
    for erased in range(1, p + 1):
        for x in range(p):
            plan = plan_evenodd_single(p, erased, x)
            gamma = run_and_verify(code, plan, 2)
            expected = evenodd_bandwidth(p, x)
            if x == 0 and erased != 1:
                # the row on the index-0 diagonal repairs through the
                # adjuster, which stores no parity block
                assert gamma == expected - 1
            else:
                assert gamma == expected


def test_evenodd_default_x_is_balanced():
    plan = plan_evenodd_single(11, 4)
    assert plan.x == 5


def test_evenodd_plan_validation():
    with pytest.raises(ParameterError):
        plan_evenodd_single(5, 0)
    with pytest.raises(ParameterError):
        plan_evenodd_single(5, 6)
    with pytest.raises(ParameterError):
        plan_evenodd_single(5, 1, x=5)
    with pytest.raises(ParameterError):
        plan_evenodd_single(5, 1, code=Code.rdp(5))


def test_special_row_prefers_flat():
    """With erased column e, row <1-e> has an unusable index-0 slope-1
    line and must sort into the flat half."""
    for p in (5, 7):
        for erased in range(2, p + 1):
            plan = plan_evenodd_single(p, erased)
            special = (1 - erased) % p
            if special == 0:
                continue
            assert special in plan.horizontal_rows


# -- rdp --------------------------------------------------------------------

@pytest.mark.parametrize("p", [3, 5, 7, 11])
def test_rdp_gamma_exact(p):
    code = Code.rdp(p)
    for erased in range(1, p):
        plan = plan_rdp_single(p, erased)
        assert run_and_verify(code, plan, 2) == rdp_bandwidth(p)


def test_rdp_shares_through_row_parity_cell():
    """A diagonal group's line passes through the horizontal parity
    column, so one shipped parity block can serve both group kinds."""
    plan = plan_rdp_single(5, 2)
    parity_coords = {t.coord for t in plan.transmissions if t.kind == "parity"}
    member_cells = {m for g in plan.groups for m in g.members}
    assert parity_coords & member_cells
    assert plan.gamma == 12


def test_rdp_no_sums():
    assert plan_rdp_single(7, 3).sum_count() == 0


# -- xcode ------------------------------------------------------------------

@pytest.mark.parametrize("p", [5, 7, 11])
def test_xcode_within_bound_and_exact(p):
    code = Code.xcode(p)
    for erased in range(1, p + 1):
        plan = plan_xcode_single(p, erased)
        gamma = run_and_verify(code, plan, 2)
        assert gamma <= xcode_bandwidth_bound(p)


def test_xcode_parity_rows_force_own_groups():
    plan = plan_xcode_single(7, 4)
    targets = {g.target for g in plan.groups}
    assert Coord(6, 4) in targets and Coord(7, 4) in targets
    own = [g for g in plan.groups if g.target.row >= 6]
    assert all(g.parity_coord is None for g in own)


# -- extended ---------------------------------------------------------------

@pytest.mark.parametrize("p,r", [(5, 3), (7, 3), (7, 4), (7, 5), (11, 4)])
def test_extended_execution_and_union_count(p, r):
    code = Code.evenodd_ext(p, r)
    for erased in (1, 2, p):
        plan = plan_extended_single(p, r, erased)
        gamma = run_and_verify(code, plan, 2)
        if erased == 1:
            assert gamma == exact_union_bandwidth(p, r)
    assert plan_extended_single(p, r, 1).sum_count() == r


def test_extended_two_slopes_matches_flat_split():
    """With r=2 the residue partition reduces to a flat/sloped split of
    size |M_0|, and the transmission counts agree."""
    for p in (5, 7, 11):
        x = len(default_partition(p, 2)[0])
        assert (plan_extended_single(p, 2, 1).gamma
                == evenodd_bandwidth(p, x))


def test_extended_custom_partition():
    part = (frozenset({1, 2}), frozenset({3}), frozenset({4}))
    plan = plan_extended_single(5, 3, 1, partition=part)
    assert plan.gamma == exact_union_bandwidth(5, 3, part)
    run_and_verify(Code.evenodd_ext(5, 3), plan, 2)


def test_extended_rejects_bad_partition():
    with pytest.raises(ParameterError):
        plan_extended_single(5, 3, 1, partition=(frozenset({1}),) * 3)
    with pytest.raises(ParameterError):
        plan_extended_single(5, 3, 1,
                             partition=(frozenset({1, 2}), frozenset({3}),
                                        frozenset({5})))


# -- star -------------------------------------------------------------------

def test_star_frozen_pair():
    plan = plan_star_double(5, (1, 2))
    assert plan.gamma == 18
    assert {(g.group.slope, g.group.index) for g in plan.groups} == {
        (-1, 0), (0, 1), (1, 2), (-1, 2), (0, 3), (1, 4)}
    assert plan.meta["parity_values"] == 6
    assert plan.meta["savings"] == 2
    assert not plan.meta["fallback"]
    assert plan.sum_count() == 3
    unsent = ({Coord(r, c) for r in range(1, 5) for c in range(3, 6)}
              - plan.raw_cells())
    assert unsent == {Coord(2, 4), Coord(2, 5)}


def test_star_pseudo_group_uses_adjuster():
    plan = plan_star_double(5, (1, 2))
    pseudo = [g for g in plan.groups if g.parity_coord is None]
    assert len(pseudo) == 1
    assert pseudo[0].group == ParityGroupId(-1, 0)
    assert pseudo[0].adjuster_slope == -1


@pytest.mark.parametrize("p", [5, 7, 11])
def test_star_all_pairs_recover(p):
    code = Code.star(p)
    for c in range(1, p + 1):
        for other in range(1, p + 1):
            if other == c:
                continue
            plan = plan_star_double(p, (c, other))
            assert not plan.meta["fallback"]
            assert plan.meta["parity_values"] == 3 * (p - 1) // 2
            assert plan.meta["savings"] == star_symmetry_saving(p)
            run_and_verify(code, plan, 2)


def test_star_single_erasure_via_flat_sloped_split():
    code = Code.star(7)
    plan = plan_evenodd_single(7, 3, code=code)
    assert run_and_verify(code, plan, 2) == evenodd_bandwidth(7, 3)


def test_star_rejects_degenerate_pair():
    with pytest.raises(ParameterError):
        plan_star_double(5, (2, 2))
    with pytest.raises(ParameterError):
        plan_star_double(5, (0, 3))


# -- execution and serialization -------------------------------------------

def test_execute_flags_missing_transmission():
    plan = plan_evenodd_single(5, 1, 2)
    raws = [t for t in plan.transmissions if t.kind == "raw"]
    broken = dataclasses.replace(
        plan, transmissions=tuple(t for t in plan.transmissions
                                  if t != raws[-1]))
    code = Code.evenodd(5)
    grid = encode(code, random_info(code, 2, RNG))
    with pytest.raises(PlanError):
        execute_plan(broken, grid)


def test_execute_refuses_source_in_erased_column():
    plan = plan_evenodd_single(5, 1, 2)
    bad = dataclasses.replace(plan, erased=(1, plan.transmissions[-1].source))
    code = Code.evenodd(5)
    grid = encode(code, random_info(code, 2, RNG))
    with pytest.raises(PlanError):
        execute_plan(bad, grid)


def test_plan_json_schema():
    plan = plan_star_double(5, (1, 2))
    doc = plan_to_json(plan)
    text = json.dumps(doc)
    parsed = json.loads(text)
    assert parsed["family"] == "star"
    assert parsed["p"] == 5 and parsed["r"] == 3
    assert parsed["erased"] == [1, 2]
    assert parsed["gamma"] == 18 == len(parsed["transmissions"])
    assert len(parsed["groups"]) == 6
    kinds = {t["kind"] for t in parsed["transmissions"]}
    assert kinds == {"sum", "parity", "raw"}
    for t in parsed["transmissions"]:
        if t["kind"] == "sum":
            assert t["row"] is None and t["col"] is None
        else:
            assert 1 <= t["row"] and 1 <= t["col"]
        assert 1 <= t["source"] <= 8


def test_transmission_sources_never_erased():
    for p in (5, 7):
        for erased in range(1, p + 1):
            plan = plan_evenodd_single(p, erased)
            assert all(t.source != erased for t in plan.transmissions)
    plan = plan_star_double(7, (2, 5))
    assert all(t.source not in (2, 5) for t in plan.transmissions)
