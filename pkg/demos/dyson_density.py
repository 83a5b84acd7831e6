# %% [markdown]
# # Eigenvalue density of a diffusing equidistant spectrum
#
# Start from the equidistant matrix diag(-k+1, ..., k-1) and add a GUE
# increment of strength sigma_c sqrt(t).  The local density near the centre
# depends on one number, the width-to-spacing ratio w = sigma_c sqrt(t) / s.
# Small w keeps sharp peaks at the integers.  Large w washes them out.
#
# Run with `python demos/dyson_density.py`; it takes well under a minute.

# %%
import numpy as np

from rmtdyn import RngStream, additive_shortcut, compare, equidistant_initial, histogram
from rmtdyn import hermitian_eigenvalues, kernel_Kt

n, samples = 101, 1000
k = (n + 1) // 2
a0 = equidistant_initial(k, 1.0)

# %% [markdown]
# One shortcut draw per sample replaces a long random walk: the sum of many
# small GUE steps is again a GUE matrix.

# %%
for w in (0.125, 0.25, 0.5, 1.0):
    ev = hermitian_eigenvalues(additive_shortcut(a0, 1.0, w * w, RngStream(1), size=samples))
    hist = histogram(ev, -2.5, 2.5, 50)
    rep = compare(hist, lambda x: kernel_Kt(x, x, 1.0, w))
    peak, valley = kernel_Kt(0.0, 0.0, 1.0, w), kernel_Kt(0.5, 0.5, 1.0, w)
    print(f"w={w:<6g} density at 0: {peak:8.4f}  at 1/2: {valley:8.4f}  "
          f"MC chi2/bin={rep.chi2_per_bin:5.2f}")

# %% [markdown]
# For w of order one the ripple is already small.  Its leading part is
# exactly cos(2 pi x) / (2 pi^2 w^2), so at w = 5 the density still
# deviates from 1 by about 2e-3.

# %%
x = np.linspace(-0.5, 0.5, 5)
print(kernel_Kt(x, x, 1.0, 5.0) - 1)
print(np.cos(2 * np.pi * x) / (2 * np.pi**2 * 25))
