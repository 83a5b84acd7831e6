"""Special functions used by the analytic kernels.

Only the four functions the kernels need are provided: digamma, trigamma,
the principal-branch complex log-gamma and the imaginary error function.
All functions accept scalars or numpy arrays and are pure.
"""
import numpy as np
from scipy.special import wofz

from .exceptions import DomainError

__all__ = ["digamma", "trigamma", "log_gamma_complex", "erfi", "erfi_real_scaled"]

_SHIFT = 10.0
_STIRLING_SHIFT = 12.0

# B_{2k} / (2k), k = 1..7, for the digamma asymptotic series
_PSI_COEF = np.array([1 / 12, -1 / 120, 1 / 252, -1 / 240, 1 / 132, -691 / 32760, 1 / 12])
# B_{2k}, k = 1..7, for the trigamma asymptotic series
_TRI_COEF = np.array([1 / 6, -1 / 30, 1 / 42, -1 / 30, 5 / 66, -691 / 2730, 7 / 6])
# B_{2k} / (2k (2k-1)), k = 1..8, for the Stirling series of log Gamma
_STIRLING_COEF = np.array([
    1 / 12, -1 / 360, 1 / 1260, -1 / 1680, 1 / 1188,
    -691 / 360360, 1 / 156, -3617 / 122400,
])
_HALF_LOG_2PI = 0.5 * np.log(2 * np.pi)


def _positive_real(x, name):
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise DomainError(f"{name} requires x > 0")
    return x


def _unwrap(out, like):
    return out.item() if np.ndim(like) == 0 else out


def digamma(x):
    """Digamma function psi(x) = d/dx log Gamma(x) for real x > 0.

    The argument is shifted upward with psi(x) = psi(x + 1) - 1/x until it
    reaches 10, then the asymptotic series is summed.
    """
    x0 = x
    x = _positive_real(x, "digamma").copy()
    acc = np.zeros_like(x)
    while True:
        low = x < _SHIFT
        if not low.any():
            break
        acc[low] -= 1.0 / x[low]
        x[low] += 1.0
    inv2 = 1.0 / (x * x)
    series = np.zeros_like(x)
    for c in _PSI_COEF[::-1]:
        series = (series + c) * inv2
    out = acc + np.log(x) - 0.5 / x - series
    return _unwrap(out, x0)


def trigamma(x):
    """Trigamma function psi'(x) for real x > 0."""
    x0 = x
    x = _positive_real(x, "trigamma").copy()
    acc = np.zeros_like(x)
    while True:
        low = x < _SHIFT
        if not low.any():
            break
        acc[low] += 1.0 / (x[low] * x[low])
        x[low] += 1.0
    inv = 1.0 / x
    inv2 = inv * inv
    series = np.zeros_like(x)
    for c in _TRI_COEF[::-1]:
        series = (series + c) * inv2
    out = acc + inv + 0.5 * inv2 + series * inv
    return _unwrap(out, x0)


def log_gamma_complex(z):
    """Principal branch of log Gamma(z) for complex z.

    Uses the Stirling series after shifting Re z above 12 with
    log Gamma(z) = log Gamma(z + n) - sum_k log(z + k).  Summing principal
    logarithms keeps the result continuous off the negative real axis, so
    the imaginary part is not reduced modulo 2*pi.

    Raises
    ------
    DomainError
        If any element is a non-positive integer.
    """
    z0 = z
    z = np.array(z, dtype=complex)
    if not np.all(np.isfinite(z)):
        raise DomainError("log_gamma_complex requires finite input")
    pole = (z.imag == 0) & (z.real <= 0) & (z.real == np.round(z.real))
    if pole.any():
        raise DomainError("log Gamma has poles at non-positive integers")
    acc = np.zeros_like(z)
    n_shift = np.maximum(0, np.ceil(_STIRLING_SHIFT - z.real)).astype(int)
    for k in range(int(n_shift.max(initial=0))):
        sel = n_shift > k
        acc[sel] -= np.log(z[sel] + k)
    w = z + n_shift
    inv = 1.0 / w
    inv2 = inv * inv
    series = np.zeros_like(w)
    for c in _STIRLING_COEF[::-1]:
        series = series * inv2 + c
    out = acc + (w - 0.5) * np.log(w) - w + _HALF_LOG_2PI + series * inv
    return _unwrap(out, z0)


_TAYLOR_RADIUS = 1.5
_TAYLOR_TERMS = 40
_MAX_EXPONENT = 709.0


def _erfi_taylor(z):
    # 2/sqrt(pi) * sum z^(2k+1) / (k! (2k+1))
    z2 = z * z
    term = z.copy()
    total = z.copy()
    for k in range(1, _TAYLOR_TERMS):
        term = term * z2 / k
        total = total + term / (2 * k + 1)
    return 2.0 / np.sqrt(np.pi) * total


def erfi(z):
    """Imaginary error function erfi(z) = -i erf(i z).

    Real input returns real output.  Small arguments use the Taylor series,
    larger ones the Faddeeva function via erfi(z) = i - i exp(z^2) w(z) for
    Im z >= 0 and conjugate symmetry below the real axis.

    Raises
    ------
    OverflowError
        When exp(Re z^2) is not representable in double precision.
    """
    z0 = z
    real_input = np.isrealobj(np.asarray(z))
    z = np.array(z, dtype=complex)
    z2 = z * z
    if np.any(z2.real > _MAX_EXPONENT):
        raise OverflowError("erfi overflows for Re(z^2) > 709")
    lower = z.imag < 0
    zu = np.where(lower, z.conj(), z)
    small = np.abs(zu) <= _TAYLOR_RADIUS
    out = np.empty_like(zu)
    if small.any():
        out[small] = _erfi_taylor(zu[small])
    big = ~small
    if big.any():
        zb = zu[big]
        out[big] = 1j - 1j * np.exp(zb * zb) * wofz(zb)
    out = np.where(lower, out.conj(), out)
    if real_input:
        out = out.real
    return _unwrap(out, z0)


def erfi_real_scaled(z):
    """Return v with Re erfi(z) = exp(Re(z^2)) * v.

    The large factor exp(Re z^2) is left out so that callers can combine it
    with other exponentials in log space.  The constant +-i part of erfi
    for large |Im z| drops out exactly, leaving only the decaying piece.
    """
    z0 = z
    z = np.array(z, dtype=complex)
    s = np.where(z.imag < 0, -1.0, 1.0)
    v = s * np.imag(np.exp(1j * (z * z).imag) * wofz(s * z))
    return _unwrap(v, z0)
