"""Time evolution of two coupled cavity modes under zero-temperature damping.

The generator is

    d rho/dt = -i[H, rho] + k * sum_{c in (a, b)} (2 c rho c^+ - c^+ c rho - rho c^+ c),
    H = omega (a^+ a + b^+ b) + gamma (a^+ b + b^+ a).

Three routes are provided: a fixed-step RK4 integrator of the generator (the
brute-force reference), the operator-sum (Kraus) solution, and closed-form
density matrices for the initial conditions of interest.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numba import njit

from .errors import (
    DegenerateCat,
    NotAState,
    PositivityLost,
    QutritRegime,
    SeriesNotConverged,
)
from .fock import basis_index, coherent_state_vector, default_cutoff, fock_ket, infer_cutoff, ket_to_dm

__all__ = [
    "CatSpec",
    "CatTrajectory",
    "ModelParams",
    "QutritRegimeWarning",
    "SuperpositionSpec",
    "bell_state_vector",
    "cat_density_matrix",
    "cat_initial_state",
    "cat_normalization",
    "cat_reduced_state",
    "cat_trajectory",
    "closed_form_bell_state",
    "closed_form_single_photon",
    "closed_form_superposition",
    "coupling_unitary",
    "default_time_step",
    "evolved_bell_state",
    "kraus_evolve",
    "lindblad_step_integrate",
    "lindblad_trajectory",
    "superposition_initial_state",
]


class QutritRegimeWarning(UserWarning):
    """Issued when an evolved Bell state leaves the two-qubit subspace."""


@dataclass(frozen=True)
class ModelParams:
    """Cavity frequency `omega`, amplitude decay constant `k`, mode coupling `gamma`."""

    omega: float = 0.0
    k: float = 1.0
    gamma: float = 0.0

    def __post_init__(self):
        for name in ("omega", "k", "gamma"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.k < 0:
            raise ValueError(f"decay constant must be non-negative, got {self.k}")


@dataclass(frozen=True)
class SuperpositionSpec:
    """Mode A starts in cos(theta/2)|1> + sin(theta/2) e^{i tau}|0> (pure) or the
    corresponding diagonal mixture (mixed); mode B starts in vacuum."""

    theta: float
    tau: float = 0.0
    kind: str = "pure"

    def __post_init__(self):
        if self.kind not in ("pure", "mixed"):
            raise ValueError(f"kind must be 'pure' or 'mixed', got {self.kind!r}")


@dataclass(frozen=True)
class CatSpec:
    """Mode A starts in N (|alpha e^{i phi}> + e^{i theta} |alpha e^{-i phi}>)."""

    alpha: complex
    phi: float = math.pi / 2
    theta: float = 0.0


@dataclass(frozen=True)
class CatTrajectory:
    alpha_plus: complex
    alpha_minus: complex
    beta_plus: complex
    beta_minus: complex
    xi: complex
    norm_const: float

    @property
    def max_amplitude(self) -> float:
        return max(abs(self.alpha_plus), abs(self.alpha_minus), abs(self.beta_plus), abs(self.beta_minus))


# ---------------------------------------------------------------------------
# RK4 integration of the master equation


@njit(cache=True, fastmath=True)
def _rhs(p, sq, omega, kappa, gamma, out):
    # p is rho zero-padded by one on every axis; out has the unpadded shape
    d = out.shape[0]
    for i in range(d):
        for j in range(d):
            for k in range(d):
                for l in range(d):
                    c0 = -(1j * omega + kappa) * (i + j) + (1j * omega - kappa) * (k + l)
                    v = c0 * p[i + 1, j + 1, k + 1, l + 1]
                    v += 2.0 * kappa * (
                        sq[i + 1] * sq[k + 1] * p[i + 2, j + 1, k + 2, l + 1]
                        + sq[j + 1] * sq[l + 1] * p[i + 1, j + 2, k + 1, l + 2]
                    )
                    # (a^+ b + b^+ a) rho - rho (a^+ b + b^+ a)
                    c = (
                        sq[i] * sq[j + 1] * p[i, j + 2, k + 1, l + 1]
                        + sq[i + 1] * sq[j] * p[i + 2, j, k + 1, l + 1]
                        - sq[k + 1] * sq[l] * p[i + 1, j + 1, k + 2, l]
                        - sq[k] * sq[l + 1] * p[i + 1, j + 1, k, l + 2]
                    )
                    out[i, j, k, l] = v - 1j * gamma * c


@njit(cache=True, fastmath=True)
def _axpy_padded(p, rho, kk, h):
    d = rho.shape[0]
    for i in range(d):
        for j in range(d):
            for k in range(d):
                for l in range(d):
                    p[i + 1, j + 1, k + 1, l + 1] = rho[i, j, k, l] + h * kk[i, j, k, l]


@njit(cache=True)
def _rk4(rho, omega, kappa, gamma, dt, nsteps):
    d = rho.shape[0]
    sq = np.zeros(d + 2)
    for n in range(d + 2):
        sq[n] = math.sqrt(n)
    # entries with index d (padding) must stay zero, and sq[d] multiplies only those
    p = np.zeros((d + 2, d + 2, d + 2, d + 2), dtype=np.complex128)
    zero = np.zeros_like(rho)
    k1 = np.empty_like(rho)
    k2 = np.empty_like(rho)
    k3 = np.empty_like(rho)
    k4 = np.empty_like(rho)
    rho = rho.copy()
    for _ in range(nsteps):
        _axpy_padded(p, rho, zero, 0.0)
        _rhs(p, sq, omega, kappa, gamma, k1)
        _axpy_padded(p, rho, k1, 0.5 * dt)
        _rhs(p, sq, omega, kappa, gamma, k2)
        _axpy_padded(p, rho, k2, 0.5 * dt)
        _rhs(p, sq, omega, kappa, gamma, k3)
        _axpy_padded(p, rho, k3, dt)
        _rhs(p, sq, omega, kappa, gamma, k4)
        for i in range(d):
            for j in range(d):
                for k in range(d):
                    for l in range(d):
                        rho[i, j, k, l] += (dt / 6.0) * (
                            k1[i, j, k, l] + 2.0 * k2[i, j, k, l] + 2.0 * k3[i, j, k, l] + k4[i, j, k, l]
                        )
    return rho


def default_time_step(params: ModelParams) -> float:
    """Largest RK4 step used when none is given: 1e-3 of the fastest time scale."""
    candidates = [1e-3 / max(abs(params.omega), 1.0)]
    if params.k > 0:
        candidates.append(1e-3 / params.k)
    if params.gamma != 0:
        candidates.append(1e-3 / abs(params.gamma))
    return min(candidates)


def lindblad_trajectory(rho0: np.ndarray, params: ModelParams, times, dt_max: float | None = None) -> list[np.ndarray]:
    """Integrate the master equation with fixed-step RK4, sampling at `times`.

    Each interval between consecutive sample times is split into equal steps no
    longer than `dt_max`. Returns one density matrix per requested time, in the
    order given.
    """
    times = np.asarray(times, dtype=float)
    if np.any(times < 0):
        raise ValueError("times must be non-negative")
    if dt_max is None:
        dt_max = default_time_step(params)
    if dt_max <= 0:
        raise ValueError("dt_max must be positive")
    n_max = infer_cutoff(rho0)
    d = n_max + 1
    order = np.argsort(times, kind="stable")
    state = np.ascontiguousarray(rho0, dtype=complex).reshape(d, d, d, d)
    results: list[np.ndarray | None] = [None] * len(times)
    t_now = 0.0
    for idx in order:
        span = times[idx] - t_now
        if span > 0:
            nsteps = int(math.ceil(span / dt_max - 1e-12))
            state = _rk4(state, params.omega, params.k, params.gamma, span / nsteps, nsteps)
            t_now = times[idx]
        rho = state.reshape(d * d, d * d)
        rho = 0.5 * (rho + rho.conj().T)
        lam = np.linalg.eigvalsh(rho)[0]
        if lam < -1e-6:
            raise PositivityLost(f"smallest eigenvalue {lam:.3g} at t={t_now:.6g}; refine dt or raise the cutoff")
        results[idx] = rho
    return results


def lindblad_step_integrate(rho0: np.ndarray, params: ModelParams, t: float, dt_max: float | None = None) -> np.ndarray:
    """Density matrix at time `t` from fixed-step RK4 integration of the master equation."""
    return lindblad_trajectory(rho0, params, [t], dt_max)[0]


# ---------------------------------------------------------------------------
# Operator-sum solution


@lru_cache(maxsize=16)
def _hopping_eigh(n_max: int):
    # a^+ b + b^+ a on the truncated space; real symmetric
    d = n_max + 1
    x = np.zeros((d * d, d * d))
    for i in range(d):
        for j in range(d):
            col = basis_index(i, j, n_max)
            if i + 1 < d and j >= 1:
                x[basis_index(i + 1, j - 1, n_max), col] = math.sqrt((i + 1) * j)
            if j + 1 < d and i >= 1:
                x[basis_index(i - 1, j + 1, n_max), col] = math.sqrt(i * (j + 1))
    lam, vec = np.linalg.eigh(x)
    return lam, vec


def coupling_unitary(params: ModelParams, t: float, n_max: int) -> np.ndarray:
    """exp[-i t (omega (a^+ a + b^+ b) + gamma (a^+ b + b^+ a))] on the truncated space."""
    lam, vec = _hopping_eigh(n_max)
    d = n_max + 1
    u = (vec * np.exp(-1j * params.gamma * t * lam)) @ vec.T
    total = np.add.outer(np.arange(d), np.arange(d)).ravel()
    return np.exp(-1j * params.omega * t * total)[:, None] * u


def _damping_weights(eta: float, d: int) -> np.ndarray:
    # w[i, n] = sqrt(C(i+n, n) (1-eta)^n eta^i): amplitude of |i+n> -> |i> after n jumps
    w = np.zeros((d, d))
    for n in range(d):
        for i in range(d - n):
            if n > 0 and eta == 1.0:
                continue
            if i > 0 and eta == 0.0:
                continue
            logw = math.lgamma(i + n + 1) - math.lgamma(i + 1) - math.lgamma(n + 1)
            if n > 0:
                logw += n * math.log1p(-eta)
            if i > 0:
                logw += i * math.log(eta)
            w[i, n] = math.exp(0.5 * logw)
    return w


def kraus_evolve(rho0: np.ndarray, params: ModelParams, t: float, full_output: bool = False):
    """Evolve `rho0` to time `t` through the operator-sum solution.

    The double series over jump numbers ``n1`` (mode A) and ``n2`` (mode B) with
    weights ``(1 - e^{-2kt})^{n1+n2} / (n1! n2!)``, the damping factor
    ``U2 = exp[-kt(a^+a + b^+b)]`` and the coupling unitary ``U1`` is evaluated
    one mode at a time: the series factorizes because ``a`` and ``b`` act on
    different modes, and every term with more jumps than retained quanta
    vanishes. With ``full_output=True`` the trace deficit is returned too.
    """
    if t < 0:
        raise ValueError("t must be non-negative")
    n_max = infer_cutoff(rho0)
    d = n_max + 1
    eta = math.exp(-2.0 * params.k * t)
    w = _damping_weights(eta, d)
    r = np.asarray(rho0, dtype=complex).reshape(d, d, d, d)
    # mode A jumps
    out = np.zeros_like(r)
    for n in range(d):
        wn = w[: d - n, n]
        out[: d - n, :, : d - n, :] += (wn[:, None, None, None] * wn[None, None, :, None]) * r[n:, :, n:, :]
    r = out
    # mode B jumps
    out = np.zeros_like(r)
    for n in range(d):
        wn = w[: d - n, n]
        out[:, : d - n, :, : d - n] += (wn[None, :, None, None] * wn[None, None, None, :]) * r[:, n:, :, n:]
    rho = out.reshape(d * d, d * d)
    if t > 0 and (params.gamma != 0 or params.omega != 0):
        u = coupling_unitary(params, t, n_max)
        rho = u @ rho @ u.conj().T
    deficit = abs(np.trace(rho).real - np.trace(rho0).real)
    if deficit > 1e-8:
        raise SeriesNotConverged(f"trace deficit {deficit:.3g}")
    if full_output:
        return rho, deficit
    return rho


# ---------------------------------------------------------------------------
# Closed forms


def _psi(params: ModelParams, t: float, n_max: int) -> np.ndarray:
    g = params.gamma * t
    return math.cos(g) * fock_ket(1, 0, n_max) - 1j * math.sin(g) * fock_ket(0, 1, n_max)


def closed_form_single_photon(params: ModelParams, t: float, n_max: int = 1) -> np.ndarray:
    """Evolved |1,0>: (1 - e^{-2kt})|00><00| + e^{-2kt}|psi><psi|,
    |psi> = cos(gamma t)|10> - i sin(gamma t)|01>."""
    eta = math.exp(-2.0 * params.k * t)
    vac = fock_ket(0, 0, n_max)
    return (1.0 - eta) * ket_to_dm(vac) + eta * ket_to_dm(_psi(params, t, n_max))


def superposition_initial_state(spec: SuperpositionSpec, n_max: int = 1) -> np.ndarray:
    c, s = math.cos(spec.theta / 2), math.sin(spec.theta / 2)
    one, vac = fock_ket(1, 0, n_max), fock_ket(0, 0, n_max)
    if spec.kind == "mixed":
        return c * c * ket_to_dm(one) + s * s * ket_to_dm(vac)
    return ket_to_dm(c * one + s * np.exp(1j * spec.tau) * vac)


def closed_form_superposition(spec: SuperpositionSpec, params: ModelParams, t: float, n_max: int = 1) -> np.ndarray:
    c2 = math.cos(spec.theta / 2) ** 2
    eta = math.exp(-2.0 * params.k * t)
    vac = fock_ket(0, 0, n_max)
    psi = _psi(params, t, n_max)
    rho = (1.0 - eta * c2) * ket_to_dm(vac) + c2 * eta * ket_to_dm(psi)
    if spec.kind == "pure":
        amp = 0.5 * math.sin(spec.theta) * math.exp(-params.k * t)
        cross = amp * np.exp(-1j * (params.omega * t + spec.tau)) * np.outer(psi, vac.conj())
        rho = rho + cross + cross.conj().T
    return rho


def bell_state_vector(i: int, n_max: int = 2) -> np.ndarray:
    """The four two-mode Bell states built from |0> and |1>."""
    k11, k00 = fock_ket(1, 1, n_max), fock_ket(0, 0, n_max)
    k10, k01 = fock_ket(1, 0, n_max), fock_ket(0, 1, n_max)
    vecs = {1: k11 + k00, 2: k11 - k00, 3: k10 + k01, 4: k10 - k01}
    if i not in vecs:
        raise ValueError(f"Bell index must be 1..4, got {i}")
    return vecs[i] / math.sqrt(2.0)


def evolved_bell_state(i: int, params: ModelParams, t: float, n_max: int = 2) -> np.ndarray:
    """Kraus evolution of |B^i><B^i|.

    For i in (1, 2) with nonzero coupling the state spreads onto two-photon
    levels; the matrix is still returned but a `QutritRegimeWarning` is issued.
    """
    if i in (1, 2) and params.gamma != 0:
        warnings.warn(f"Bell state {i} with gamma != 0 evolves outside the two-qubit space", QutritRegimeWarning, stacklevel=2)
    return kraus_evolve(ket_to_dm(bell_state_vector(i, n_max)), params, t)


def closed_form_bell_state(i: int, params: ModelParams, t: float, n_max: int = 2) -> np.ndarray:
    """Evolved |B^i><B^i| in closed form.

    For i in (3, 4) the state stays in the one-photon sector, on which the
    coupling only adds a global phase: eta |B^i><B^i| + (1 - eta) |00><00|.
    For i in (1, 2) each mode decays independently, which requires gamma = 0.
    """
    if i in (1, 2) and params.gamma != 0:
        raise QutritRegime(f"no two-qubit closed form for Bell state {i} with gamma != 0")
    eta = math.exp(-2.0 * params.k * t)
    vac = ket_to_dm(fock_ket(0, 0, n_max))
    if i in (3, 4):
        return eta * ket_to_dm(bell_state_vector(i, n_max)) + (1.0 - eta) * vac
    if i not in (1, 2):
        raise ValueError(f"Bell index must be 1..4, got {i}")
    sign = 1.0 if i == 1 else -1.0
    k11, k00 = fock_ket(1, 1, n_max), fock_ket(0, 0, n_max)
    k10, k01 = fock_ket(1, 0, n_max), fock_ket(0, 1, n_max)
    rho = eta * eta * ket_to_dm(k11) + eta * (1.0 - eta) * (ket_to_dm(k10) + ket_to_dm(k01))
    rho = rho + ((1.0 - eta) ** 2 + 1.0) * vac
    coh = sign * eta * np.exp(-2j * params.omega * t) * np.outer(k11, k00)
    return 0.5 * (rho + coh + coh.conj().T)


# ---------------------------------------------------------------------------
# Cat states


def cat_normalization(spec: CatSpec) -> float:
    a2 = abs(spec.alpha) ** 2
    denom = 2.0 + 2.0 * math.cos(spec.theta - a2 * math.sin(2 * spec.phi)) * math.exp(a2 * math.cos(2 * spec.phi) - a2)
    if denom < 1e-12:
        raise DegenerateCat(f"normalization denominator {denom:.3g} underflows")
    return denom ** -0.5


def cat_trajectory(spec: CatSpec, params: ModelParams, t: float) -> CatTrajectory:
    """Branch amplitudes and coherence factor of the evolved cat state."""
    alpha = complex(spec.alpha)
    norm = cat_normalization(spec)
    kt = params.k * t
    g = params.gamma * t
    base = np.exp(-1j * params.omega * t - kt)
    ap = alpha * np.exp(1j * spec.phi) * base
    am = alpha * np.exp(-1j * spec.phi) * base
    xi = np.exp(-1j * spec.theta) * np.exp(-math.expm1(-2 * kt) * (np.exp(2j * spec.phi) - 1) * abs(alpha) ** 2)
    return CatTrajectory(
        alpha_plus=complex(ap * math.cos(g)),
        alpha_minus=complex(am * math.cos(g)),
        beta_plus=complex(-1j * ap * math.sin(g)),
        beta_minus=complex(-1j * am * math.sin(g)),
        xi=complex(xi),
        norm_const=norm,
    )


def cat_density_matrix(traj: CatTrajectory, n_max: int | None = None, full_output: bool = False):
    """Fock-space density matrix of the evolved cat state.

    Two coherent-product blocks plus the xi-weighted cross terms, renormalized to
    unit trace. The deficit before renormalization is returned when
    ``full_output`` is set; a deficit above 1e-6 signals an inconsistent
    trajectory and raises.
    """
    if n_max is None:
        n_max = default_cutoff(traj.max_amplitude)
    vp = np.kron(coherent_state_vector(traj.alpha_plus, n_max), coherent_state_vector(traj.beta_plus, n_max))
    vm = np.kron(coherent_state_vector(traj.alpha_minus, n_max), coherent_state_vector(traj.beta_minus, n_max))
    cross = traj.xi * np.outer(vp, vm.conj())
    rho = traj.norm_const**2 * (ket_to_dm(vp) + ket_to_dm(vm) + cross + cross.conj().T)
    tr = np.trace(rho).real
    deficit = abs(1.0 - tr)
    if deficit > 1e-6:
        raise NotAState(f"cat density matrix trace {tr:.9g}; trajectory inconsistent with its normalization")
    rho = rho / tr
    if full_output:
        return rho, deficit
    return rho


def cat_reduced_state(traj: CatTrajectory, mode: str, n_max: int | None = None, full_output: bool = False):
    """Single-mode reduced density matrix of the evolved cat state.

    Equals ``partial_trace(cat_density_matrix(traj, n_max), mode)`` without
    forming the two-mode matrix; the other mode enters only through the overlap
    of its two branches. ``full_output`` also returns the same trace deficit as
    `cat_density_matrix`.
    """
    if n_max is None:
        n_max = default_cutoff(traj.max_amplitude)
    pa = coherent_state_vector(traj.alpha_plus, n_max)
    ma = coherent_state_vector(traj.alpha_minus, n_max)
    pb = coherent_state_vector(traj.beta_plus, n_max)
    mb = coherent_state_vector(traj.beta_minus, n_max)
    if mode == "A":
        keep_p, keep_m, other = pa, ma, np.vdot(mb, pb)
    elif mode == "B":
        keep_p, keep_m, other = pb, mb, np.vdot(ma, pa)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    cross = traj.xi * other * np.outer(keep_p, keep_m.conj())
    rho = traj.norm_const**2 * (ket_to_dm(keep_p) + ket_to_dm(keep_m) + cross + cross.conj().T)
    tr = np.trace(rho).real
    deficit = abs(1.0 - tr)
    if deficit > 1e-6:
        raise NotAState(f"cat density matrix trace {tr:.9g}; trajectory inconsistent with its normalization")
    rho = rho / tr
    if full_output:
        return rho, deficit
    return rho


def cat_initial_state(spec: CatSpec, n_max: int | None = None) -> np.ndarray:
    return cat_density_matrix(cat_trajectory(spec, ModelParams(k=0.0), 0.0), n_max)

