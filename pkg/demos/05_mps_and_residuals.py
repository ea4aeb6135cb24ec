"""External instances: MPS round trip, clamping, and a residual-driven loop.

Reads an LP from MPS text, clamps it into the regime the online passes
assume (strictly positive rhs, capped upper bounds), and then doubles the
duplication factor until the combined primal-infeasibility / duality-gap
residual drops below a target, the same loop `onlinelp solve --until-eps`
runs.
"""

import io

import numpy as np

from onlinelp import (
    RunConfig,
    netlib_modify,
    parse_mps,
    solve_online,
    stopping_residual,
    write_mps,
)
from onlinelp.instances import MkpParams, generate_mkp

# a tiny LP written by hand: max x1 + x2 s.t. x1 + x2 <= 0.5
TOY = """\
NAME          TOYHALF
OBJSENSE
    MAX
ROWS
 N  COST
 L  CAP
COLUMNS
    X1  COST  1.0  CAP  1.0
    X2  COST  1.0  CAP  1.0
RHS
    RHS  CAP  0.5
BOUNDS
 UP BND  X1  1.0
 UP BND  X2  1.0
ENDATA
"""

toy = parse_mps(io.StringIO(TOY))
sol = solve_online(toy, RunConfig(method="implicit", stepsize=0.005,
                                  enforce_feasibility=True))
print(f"toy LP from MPS: implicit pass objective {sol.objective} (optimum 0.5)")

# write/parse round trip keeps the structure bit-for-bit
buf = io.StringIO()
write_mps(toy, buf)
again = parse_mps(io.StringIO(buf.getvalue()))
print(f"round trip structural match: {np.array_equal(toy.rhs, again.rhs)}")

# clamping: zero rhs entries and unbounded columns leave the supported regime
raw = parse_mps(io.StringIO(TOY.replace("RHS  CAP  0.5", "RHS  CAP  0.0")))
fixed = netlib_modify(raw)
print(f"netlib-style clamp: rhs {raw.rhs} -> {fixed.rhs}")

# residual-driven duplication doubling on a generated instance; feasibility
# is left unenforced here, the residual itself accounts for violations
instance = generate_mkp(MkpParams(m=5, n=200, tightness=0.3, seed=6))
target = 0.5
k = 1
while True:
    sol = solve_online(instance, RunConfig(method="implicit", duplication=k, seed=6))
    resid = stopping_residual(instance, sol.x_hat, np.maximum(sol.y_final, 0.0))
    print(f"K = {k:>3}: objective {sol.objective:9.3f}, "
          f"violation {sol.violation:7.3f}, residual {resid:.4f}")
    if resid <= target or k >= 64:
        break
    k *= 2
print(f"stopped with residual {'<=' if resid <= target else '>'} {target}; "
      "tighter targets keep doubling K until the cap "
      "(`onlinelp solve --until-eps EPS --max-k 5000` reports the cap case).")
