# %% [markdown]
# # Lagrangian hierarchy, recursion operator and Hamiltonians
#
# Start from the first-order Lagrangian one-form of the n = 2 lattice and
# push it along ``eta1``.  Each level gives an antisymmetric bracket matrix
# ``sigma``; consecutive levels give the recursion operator ``Lambda`` and a
# new conserved Hamiltonian.

# %%
from fractions import Fraction

from toda.hierarchy import downward_chain, downward_level, poisson_jacobi_exact, upward
from toda.lattice import flow_derivative, flow_field

levels = upward(2, eta_kind=1, levels=3)
for lev in levels:
    print(f"k={lev.k}  H = {lev.H.to_text()}")

# %%
print(levels[1].sigma)
print(levels[1].lambda_op)

# %% [markdown]
# The second operator is a multiple of the first.

# %%
print(levels[2].lambda_op == levels[1].lambda_op * Fraction(3, 2))

# %% [markdown]
# Every Hamiltonian is conserved by the flow, and the Poisson matrices built
# from the first brackets satisfy the Jacobi identity exactly.

# %%
f = flow_field(2)
print([flow_derivative(lev.H, f).is_zero() for lev in levels])
print([poisson_jacobi_exact(lev.sigma) == [] for lev in levels[:2]])

# %% [markdown]
# Going down with ``eta3`` returns the lower structures scaled by 3, and one
# more step through ``Lambda`` gives a rational bracket whose Hamiltonian is
# the total momentum.

# %%
down, report = downward_chain(levels[:3])
for entry in report:
    print(entry["relation"], entry["status"], "scale", entry["scale"])
low = downward_level(levels[1].lambda_op, levels[0].sigma)
print(low.H.to_text())
print(low.sigma[0, 1].to_text())
