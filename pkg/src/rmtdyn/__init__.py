"""Random-matrix dynamics: Dyson walks, Lyapunov spectra and their kernels."""
from .exceptions import ConditioningError, ConvergenceError, DomainError
from .specfun import digamma, erfi, log_gamma_complex, trigamma
from .ensembles import (ENTRY_LAWS, RngStream, hermitian_eigenvalues, sample_entries,
                        sample_ginibre, sample_gue)
from .additive import (AdditiveConfig, Trajectory, additive_shortcut, additive_walk,
                       coulomb_gas_walk, equidistant_initial, hypothetical_spacing, wsr_additive)
from .multiplicative import (LyapunovSpectrum, ProductConfig, deterministic_positions,
                             peak_width, product_spectrum, product_spectrum_graded,
                             product_spectrum_qr, product_spectrum_svd, unfold_u,
                             wsr_lyapunov)
from .kernels import (correlation_Rk, density_Kw, density_Rhat, duality_report, kernel_Khat, kernel_Kp, kernel_Kt,
                      kernel_Kw, make_kernel, sine_kernel)
from .finite import FiniteKernel, FiniteKernelConfig, kernel_KL, kernel_KY, kernel_Ku
from .stats import Histogram, compare, histogram, spacing_distribution, unfold_by_rank, zoom_local

__version__ = "0.1.0"
