# %% [markdown]
# # Exact checks on tiny models
#
# For small orders and light-tailed innovations the joint law of two cells
# can be enumerated outright: convolve, site by site, the exact law of the
# thinnings that reach either cell.  No pgf formula is involved.

# %%
import numpy as np

import inmafield as inma

tiny = inma.InmaModel([[0.5], [0.5]], inma.Deterministic(1))
pmf, err = inma.enumerate_marginal_pmf(tiny)
print("marginal pmf:", pmf.round(6), "error bound", err)

# %%
m = inma.InmaModel([[0.3, 0.2], [0.1, 0.35]], inma.Poisson(0.6), "spread")
joint, err = inma.enumerate_bivariate_pmf(m, (1, 1), inma.EnumerationBudget.for_model(m, tail=1e-15))
print("joint table shape", joint.shape, "missing mass at most", err)
for u1, u2 in [(0.0, 0.0), (0.3, 0.8), (0.9, 0.5)]:
    print(f"u=({u1},{u2})  enumerated {inma.pmf_pgf(joint, u1, u2):.12f}"
          f"  closed form {inma.bivariate_pgf(m, u1, u2, (1, 1)):.12f}")
print("covariance", round(inma.pmf_covariance(joint), 10), "vs", round(inma.acvf(m, (1, 1)), 10))

# %% [markdown]
# The budget guards against blow-ups; exceeding it is an error, not a
# silent truncation.

# %%
big = inma.InmaModel(np.full((3, 3), 0.5), inma.Poisson(4.0))
try:
    inma.enumerate_bivariate_pmf(big, (1, 1), inma.EnumerationBudget.for_model(big, state_limit=1000))
except inma.ResourceError as exc:
    print("refused:", exc)

# %% [markdown]
# The whole field is linear in the thinning outputs: X = B Y with a 0/1
# matrix B.  For a 2x2 window of an order-(1,1) model:

# %%
B = inma.build_assembly_matrix(2, 2, 1, 1).toarray()
for row in B:
    print(" ".join("".join(map(str, row[i:i + 4])) for i in range(0, 36, 4)))

# %%
model = inma.InmaModel([[0.3, 0.6], [0.2, 0.4]], inma.Poisson(3.0))
th = inma.draw_thinnings(model, 4, 5, seed=11)
x = inma.assemble_from_y(inma.build_assembly_matrix(4, 5, 1, 1), inma.stack_thinnings(th.y))
print("B @ Y equals the simulator:",
      np.array_equal(x.reshape(4, 5), inma.simulate_grid(model, 4, 5, seed=11).values))
