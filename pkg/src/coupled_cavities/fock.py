"""Truncated two-mode Fock space.

Every two-mode object lives on ``{|n_A, n_B> : 0 <= n_A, n_B <= n_max}`` with
A-major ordering, i.e. ``|n_A, n_B>`` sits at index ``n_A * (n_max + 1) + n_B``.
Single-mode objects have dimension ``n_max + 1``.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from .errors import CutoffTooSmall, NotAState

__all__ = [
    "basis_index",
    "check_density_matrix",
    "coherent_state_vector",
    "default_cutoff",
    "displacement_elements",
    "displacement_matrix",
    "fock_ket",
    "infer_cutoff",
    "ket_to_dm",
    "linear_entropy",
    "mode_operator",
    "partial_trace",
]

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-8
POSITIVITY_TOL = 1e-8


def _check_cutoff(n_max: int) -> int:
    n_max = int(n_max)
    if n_max < 1:
        raise CutoffTooSmall(f"n_max must be >= 1, got {n_max}")
    return n_max


def default_cutoff(alpha_max: float) -> int:
    """Per-mode cutoff keeping Poisson tails negligible for amplitudes up to `alpha_max`."""
    a = abs(alpha_max)
    return int(math.ceil(a * a + 6.0 * a + 10.0))


def infer_cutoff(rho: np.ndarray) -> int:
    """Recover ``n_max`` from the shape of a two-mode matrix or vector."""
    dim = rho.shape[0]
    side = math.isqrt(dim)
    if side * side != dim:
        raise NotAState(f"dimension {dim} is not a perfect square")
    return side - 1


def basis_index(n_a: int, n_b: int, n_max: int) -> int:
    return n_a * (n_max + 1) + n_b


def fock_ket(n_a: int, n_b: int, n_max: int) -> np.ndarray:
    """Two-mode number state ``|n_a, n_b>`` as a dense vector."""
    n_max = _check_cutoff(n_max)
    if not (0 <= n_a <= n_max and 0 <= n_b <= n_max):
        raise CutoffTooSmall(f"|{n_a},{n_b}> not representable at n_max={n_max}")
    v = np.zeros((n_max + 1) ** 2, dtype=complex)
    v[basis_index(n_a, n_b, n_max)] = 1.0
    return v


def ket_to_dm(psi: np.ndarray) -> np.ndarray:
    return np.outer(psi, psi.conj())


def _annihilation(n_max: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, n_max + 1, dtype=float)), k=1).astype(complex)


def mode_operator(kind: str, mode: str, n_max: int) -> np.ndarray:
    """Ladder or number operator of one mode, tensored with identity on the other.

    Parameters
    ----------
    kind : {"annihilate", "create", "number"}
    mode : {"A", "B"}
    n_max : int
        Highest retained Fock level per mode.
    """
    n_max = _check_cutoff(n_max)
    a = _annihilation(n_max)
    if kind == "annihilate":
        op = a
    elif kind == "create":
        op = a.conj().T
    elif kind == "number":
        op = np.diag(np.arange(n_max + 1, dtype=float)).astype(complex)
    else:
        raise ValueError(f"unknown operator kind {kind!r}")
    eye = np.eye(n_max + 1, dtype=complex)
    if mode == "A":
        return np.kron(op, eye)
    if mode == "B":
        return np.kron(eye, op)
    raise ValueError(f"unknown mode {mode!r}")


def coherent_state_vector(alpha: complex, n_max: int, full_output: bool = False):
    """Truncated coherent state ``|alpha>``, renormalized to unit norm.

    With ``full_output=True`` the squared-norm deficit of the raw truncated
    amplitudes is returned as a second value.
    """
    n_max = _check_cutoff(n_max)
    alpha = complex(alpha)
    if abs(alpha) ** 2 > n_max / 2:
        raise CutoffTooSmall(f"|alpha|^2={abs(alpha) ** 2:.3g} exceeds n_max/2={n_max / 2}")
    n = np.arange(1, n_max + 1)
    c = np.empty(n_max + 1, dtype=complex)
    c[0] = math.exp(-0.5 * abs(alpha) ** 2)
    c[1:] = c[0] * np.cumprod(alpha / np.sqrt(n))
    deficit = 1.0 - float(np.vdot(c, c).real)
    c /= np.linalg.norm(c)
    if full_output:
        return c, deficit
    return c


@njit(cache=True)
def _displacement_batch(alphas, n_max):
    dim = n_max + 1
    out = np.zeros((alphas.size, dim, dim), dtype=np.complex128)
    lfact = np.zeros(dim)
    for j in range(1, dim):
        lfact[j] = lfact[j - 1] + math.log(j)
    lag = np.zeros(dim)
    for p in range(alphas.size):
        a = alphas[p]
        r2 = a.real * a.real + a.imag * a.imag
        if r2 == 0.0:
            for j in range(dim):
                out[p, j, j] = 1.0
            continue
        logr = 0.5 * math.log(r2)
        phase = a / math.sqrt(r2)
        for k in range(dim):
            # generalized Laguerre L_j^(k)(r2), j = 0 .. n_max - k, by forward recurrence
            lag[0] = 1.0
            if dim - k > 1:
                lag[1] = 1.0 + k - r2
            for j in range(1, dim - k - 1):
                lag[j + 1] = ((2 * j + 1 + k - r2) * lag[j] - (j + k) * lag[j - 1]) / (j + 1)
            up = phase**k
            down = (-phase.conjugate()) ** k
            for j in range(dim - k):
                pre = math.exp(0.5 * (lfact[j] - lfact[j + k]) + k * logr - 0.5 * r2) * lag[j]
                out[p, j + k, j] = pre * up
                if k > 0:
                    out[p, j, j + k] = pre * down
    return out


def displacement_elements(alpha, n_max: int) -> np.ndarray:
    """Matrix elements ``<m|D(alpha)|n>`` for ``0 <= m, n <= n_max``.

    The elements are those of the untruncated operator,
    ``sqrt(n!/m!) alpha^(m-n) exp(-|alpha|^2/2) L_n^(m-n)(|alpha|^2)`` for
    ``m >= n`` (and the conjugate-symmetric form above the diagonal), with the
    prefactor taken in log space so large displacements neither overflow nor
    lose precision. ``alpha`` may be an array; the result then has shape
    ``alpha.shape + (n_max + 1, n_max + 1)``.
    """
    alpha = np.asarray(alpha, dtype=complex)
    out = _displacement_batch(np.ascontiguousarray(alpha.ravel()), int(n_max))
    return out.reshape(alpha.shape + (n_max + 1, n_max + 1))


def displacement_matrix(alpha: complex, n_max: int) -> np.ndarray:
    """Single-mode displacement operator restricted to the retained Fock levels."""
    n_max = _check_cutoff(n_max)
    if abs(alpha) ** 2 > n_max / 4:
        raise CutoffTooSmall(f"|alpha|^2={abs(alpha) ** 2:.3g} exceeds n_max/4={n_max / 4}")
    return displacement_elements(complex(alpha), n_max)


def partial_trace(rho: np.ndarray, keep: str) -> np.ndarray:
    """Reduced single-mode density matrix of mode `keep` ("A" or "B")."""
    dim = infer_cutoff(rho) + 1
    t = rho.reshape(dim, dim, dim, dim)
    if keep == "A":
        return np.einsum("ijkj->ik", t)
    if keep == "B":
        return np.einsum("ijil->jl", t)
    raise ValueError(f"unknown mode {keep!r}")


def linear_entropy(rho: np.ndarray) -> float:
    """Mixedness ``1 - Tr(rho^2)`` of a density matrix."""
    return float(1.0 - np.einsum("ij,ji->", rho, rho).real)


def check_density_matrix(
    rho: np.ndarray,
    hermitian_tol: float = HERMITIAN_TOL,
    trace_tol: float = TRACE_TOL,
    positivity_tol: float = POSITIVITY_TOL,
) -> np.ndarray:
    """Raise `NotAState` unless `rho` is Hermitian, unit-trace and positive."""
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise NotAState(f"expected a square matrix, got shape {rho.shape}")
    herm = np.max(np.abs(rho - rho.conj().T))
    if herm > hermitian_tol:
        raise NotAState(f"not Hermitian (max deviation {herm:.3g})")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > trace_tol:
        raise NotAState(f"trace {tr:.12g} differs from 1")
    lam = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0]
    if lam < -positivity_tol:
        raise NotAState(f"negative eigenvalue {lam:.3g}")
    return rho
