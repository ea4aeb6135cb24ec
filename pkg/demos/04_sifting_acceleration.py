"""Exact solving with a warm-started sifting loop.

For n >> m, most columns never enter the optimal basis.  Sifting solves a
small working problem exactly, prices the remaining columns against its
dual, and grows the working set until nothing prices in.  The online pass
supplies both the initial working set (columns with a high estimate) and a
fixed dual anchor that damps pricing oscillation.
"""

from onlinelp import MkpParams, RunConfig, SiftConfig, generate_mkp, run_duplicated, sift, solve_lp

params = MkpParams(m=50, n=20_000, tightness=0.05, density=0.1, seed=12)
instance = generate_mkp(params)
print(f"instance {params.label()}: {instance.num_rows} rows, "
      f"{instance.num_cols} columns")

# online pre-pass per the sifting recipe: explicit update, two copies
prepass = run_duplicated(instance, RunConfig(method="explicit", duplication=2,
                                             seed=12, start="ones", lazy=True))

for label, config in (
    ("anchored (alpha = 0.4)", SiftConfig(stabilization_alpha=0.4)),
    ("no anchor", SiftConfig(use_online_anchor=False)),
):
    result = sift(instance, prepass, config)
    print(f"\nsift, {label}:")
    print(f"  rounds {result.rounds}, final working set "
          f"{result.final_working_set.size} of {instance.num_cols} columns")
    print(f"  initial set kept {result.rdc:.2%} of columns "
          f"(acc vs exact basis: {result.acc:.2%})")
    print(f"  objective {result.objective:.4f}")
    for r in result.trace:
        print(f"    round {r.round}: |W| = {r.working_size:>5}, "
              f"priced in {r.priced:>4}, objective {r.objective:.4f}")

direct = solve_lp(instance)
print(f"\ndirect simplex on all columns: {direct.obj:.4f} "
      f"({direct.iterations} pivots). Sifting reaches the same optimum "
      "while only ever factorizing small working problems.")
