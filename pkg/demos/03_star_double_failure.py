"""Walk through a two-column failure on a star code step by step.

Double erasures cannot be fixed one parity line at a time: the plan
chains triples of parity groups so each step exposes exactly the cells
the next one needs. This script prints the chain for p=7 with columns
1 and 3 gone, then replays it against a real encode and checks every
recovered byte.
"""

import numpy as np

from arraycode import Code, encode, random_info
from arraycode.core import Coord
from arraycode.planner import execute_plan, plan_star_double, recovered_column

P = 7
ERASED = (1, 3)


def main():
    code = Code.star(P)
    plan = plan_star_double(P, ERASED)
    print(f"star p={P}, erased columns {ERASED} "
          f"(gap x={plan.meta['x']})")
    print(f"chain of {len(plan.groups)} parity groups:")
    for use in plan.groups:
        tag = "pseudo" if use.parity_coord is None else \
            f"parity@{tuple(use.parity_coord)}"
        print(f"  slope {use.group.slope:+d} index {use.group.index}  "
              f"-> recovers {tuple(use.target)}  [{tag}]")
    print(f"parity-group values consumed: {plan.meta['parity_values']}")
    print(f"blocks saved by pairing mirrored groups: {plan.meta['savings']}")
    print(f"total transfer: {plan.gamma} blocks "
          f"(naive would move {code.k * code.rows})")

    grid = encode(code, random_info(code, 16, np.random.default_rng(3)))
    recovered = execute_plan(plan, grid)
    column = recovered_column(plan, recovered, 16)
    ok = all(
        np.array_equal(column[row - 1], grid.cell(Coord(row, ERASED[0])))
        for row in range(1, code.rows + 1)
    )
    print(f"first erased column rebuilt bit-exactly: {ok}")


if __name__ == "__main__":
    main()
