# %% [markdown]
# # One-call verification
#
# `verify` simulates a grid and compares means, variances, the ACF over
# the lag box, bivariate pgfs, the pmf and (for Poisson models) the jump
# law and the conditional-mean line with their closed forms.  Small models
# are also checked against exhaustive enumeration.

# %%
import inmafield as inma

model = inma.InmaModel([[0.5, 0.5], [0.5, 0.5]], inma.Poisson(2.0))
report = inma.verify(model, 500, 500, seed=2024)
print(report.table())

# %% [markdown]
# A threshold of 1e-4 standard errors turns ordinary noise into failures,
# which is how the pass flag is wired.

# %%
strict = inma.verify(model, 100, 100, seed=1, checks=("mean", "variance"), z_threshold=1e-4)
print("passed:", strict.passed, "| failing checks:", [c.check for c in strict.failures()])

# %% [markdown]
# The same runs from the command line, driven by a YAML file
# (see `standard.yaml` next to this script):
#
#     inmafield simulate --config demos/standard.yaml
#     inmafield analyze  --config demos/standard.yaml
#     inmafield verify   --config demos/standard.yaml --grid out/grid.csv
#     inmafield oracle   --config demos/standard.yaml
