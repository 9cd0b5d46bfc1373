"""Concurrence, entanglement of formation and the two-qubit view of cat-state evolution."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateBranch, OutOfRange, QutritRegime
from .evolution import CatTrajectory, ModelParams
from .fock import basis_index, check_density_matrix, coherent_state_vector, infer_cutoff

__all__ = [
    "EffectiveTwoQubitState",
    "binary_entropy",
    "cat_concurrence",
    "closed_form_concurrence",
    "coherent_overlap",
    "effective_two_qubit",
    "eof_from_concurrence",
    "pure_state_concurrence",
    "qubit_block",
    "wootters_concurrence",
]

_SIGMA_YY = np.array(
    [[0, 0, 0, -1], [0, 0, 1, 0], [0, 1, 0, 0], [-1, 0, 0, 0]],
    dtype=complex,
)


def _psd_sqrt(rho: np.ndarray) -> np.ndarray:
    lam, vec = np.linalg.eigh(0.5 * (rho + rho.conj().T))
    return (vec * np.sqrt(np.clip(lam, 0.0, None))) @ vec.conj().T


def wootters_concurrence(rho4: np.ndarray, check: bool = True) -> float:
    """Concurrence of a two-qubit density matrix.

    The spin-flip ``(sigma_y x sigma_y) rho* (sigma_y x sigma_y)`` uses complex
    conjugation in the basis the matrix is written in. The decreasing square
    roots of the eigenvalues of ``rho rho_tilde`` are obtained as singular values
    of ``sqrt(rho) Y sqrt(rho)*``, which avoids a non-Hermitian eigenproblem.
    """
    rho4 = np.asarray(rho4, dtype=complex)
    if rho4.shape != (4, 4):
        raise ValueError(f"expected a 4x4 matrix, got {rho4.shape}")
    if check:
        check_density_matrix(rho4)
    s = _psd_sqrt(rho4)
    lam = np.linalg.svd(s @ _SIGMA_YY @ s.conj(), compute_uv=False)
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def binary_entropy(x: float) -> float:
    if x <= 0.0 or x >= 1.0:
        return 0.0
    return -x * math.log2(x) - (1.0 - x) * math.log2(1.0 - x)


def eof_from_concurrence(c: float) -> float:
    """Entanglement of formation h(1/2 + sqrt(1 - C^2)/2) of a two-qubit state."""
    if not (0.0 <= c <= 1.0):
        if -1e-12 < c < 0.0 or 1.0 < c < 1.0 + 1e-12:
            c = min(max(c, 0.0), 1.0)
        else:
            raise OutOfRange(f"concurrence {c} outside [0, 1]")
    return binary_entropy(0.5 + 0.5 * math.sqrt(1.0 - c * c))


def closed_form_concurrence(
    scenario: str,
    params: ModelParams,
    t: float,
    *,
    theta: float = 0.0,
    index: int | None = None,
) -> float:
    """Analytic concurrence for the Fock-state initial conditions.

    scenario is one of ``"single_photon"``, ``"superposition"`` (uses `theta`)
    or ``"bell"`` (uses `index`).
    """
    eta = math.exp(-2.0 * params.k * t)
    s2 = math.sin(2.0 * params.gamma * t)
    if scenario == "single_photon":
        return abs(eta * s2)
    if scenario == "superposition":
        return abs(eta * math.cos(theta / 2) ** 2 * s2)
    if scenario == "bell":
        if index in (1, 2):
            if params.gamma != 0:
                raise QutritRegime(f"Bell state {index} with gamma != 0 is a two-qutrit state")
            return eta * eta
        if index in (3, 4):
            return eta
        raise ValueError(f"Bell index must be 1..4, got {index}")
    raise ValueError(f"unknown scenario {scenario!r}")


def qubit_block(rho: np.ndarray) -> np.ndarray:
    """Restrict a two-mode Fock matrix to span{|0>,|1>} x span{|0>,|1>}."""
    n_max = infer_cutoff(rho)
    idx = [basis_index(a, b, n_max) for a in (0, 1) for b in (0, 1)]
    return rho[np.ix_(idx, idx)]


def pure_state_concurrence(psi: np.ndarray) -> float:
    """Concurrence sqrt(2 (1 - Tr rho_A^2)) of a pure two-mode state from its Schmidt coefficients."""
    d = infer_cutoff(psi) + 1
    sv = np.linalg.svd(psi.reshape(d, d), compute_uv=False)
    p = sv**2 / np.sum(sv**2)
    return float(math.sqrt(max(0.0, 2.0 * (1.0 - np.sum(p**2)))))


def coherent_overlap(a: complex, b: complex) -> complex:
    """<a|b> for untruncated coherent states."""
    return complex(np.exp(-0.5 * abs(a) ** 2 - 0.5 * abs(b) ** 2 + np.conj(a) * b))


@dataclass(frozen=True)
class EffectiveTwoQubitState:
    """Cat-state evolution written on a qubit x qubit basis.

    Each mode's qubit basis is built by Gram-Schmidt from its two coherent
    branches, seeded by ``branches[0]``. ``overlap_a``/``overlap_b`` are
    ``<first|second>``; a mode whose branches coincide is flagged degenerate.
    """

    matrix: np.ndarray
    branches_a: tuple[complex, complex]
    branches_b: tuple[complex, complex]
    overlap_a: complex
    overlap_b: complex
    degenerate_a: bool = False
    degenerate_b: bool = False

    def fock_basis(self, mode: str, n_max: int) -> tuple[np.ndarray, np.ndarray]:
        """The two orthonormal basis vectors of `mode` realized at cutoff `n_max`."""
        first, second = self.branches_a if mode == "A" else self.branches_b
        s = self.overlap_a if mode == "A" else self.overlap_b
        if (self.degenerate_a if mode == "A" else self.degenerate_b):
            raise DegenerateBranch(f"mode {mode} is one-dimensional")
        e0 = coherent_state_vector(first, n_max)
        e1 = coherent_state_vector(second, n_max) - s * e0
        return e0, e1 / math.sqrt(1.0 - abs(s) ** 2)


def _branch_coords(first: complex, second: complex, tol: float):
    s = coherent_overlap(first, second)
    r2 = 1.0 - abs(s) ** 2
    degenerate = r2 < tol
    u = np.array([1.0, 0.0], dtype=complex)
    v = np.array([s, math.sqrt(max(r2, 0.0))], dtype=complex)
    return u, v, s, degenerate


def effective_two_qubit(
    traj: CatTrajectory,
    first: str = "plus",
    strict: bool = True,
    degeneracy_tol: float = 1e-12,
) -> EffectiveTwoQubitState:
    """Express the evolved cat state as a 4x4 density matrix.

    With ``strict=False`` a mode with coinciding branches is kept as a
    (numerically) one-dimensional factor and flagged instead of raising
    `DegenerateBranch`.
    """
    if first == "plus":
        ba = (traj.alpha_plus, traj.alpha_minus)
        bb = (traj.beta_plus, traj.beta_minus)
    elif first == "minus":
        ba = (traj.alpha_minus, traj.alpha_plus)
        bb = (traj.beta_minus, traj.beta_plus)
    else:
        raise ValueError(f"first must be 'plus' or 'minus', got {first!r}")
    ua, va, sa, dega = _branch_coords(*ba, degeneracy_tol)
    ub, vb, sb, degb = _branch_coords(*bb, degeneracy_tol)
    if strict and (dega or degb):
        raise DegenerateBranch("coherent branches coincide in mode " + ("A" if dega else "B"))
    w0 = np.kron(ua, ub)
    w1 = np.kron(va, vb)
    if first == "plus":
        vp, vm = w0, w1
    else:
        vp, vm = w1, w0
    cross = traj.xi * np.outer(vp, vm.conj())
    rho = np.outer(vp, vp.conj()) + np.outer(vm, vm.conj()) + cross + cross.conj().T
    rho = rho / np.trace(rho).real
    return EffectiveTwoQubitState(
        matrix=rho,
        branches_a=ba,
        branches_b=bb,
        overlap_a=sa,
        overlap_b=sb,
        degenerate_a=dega,
        degenerate_b=degb,
    )


def cat_concurrence(traj: CatTrajectory, first: str = "plus") -> float:
    """Concurrence of the evolved cat state; zero when either mode is one-dimensional."""
    eff = effective_two_qubit(traj, first=first, strict=False)
    if eff.degenerate_a or eff.degenerate_b:
        return 0.0
    return wootters_concurrence(eff.matrix)
