"""Displaced-parity Bell-CHSH test in phase space.

The observable is the two-mode displaced parity

    Pi(mu, nu) = D_A(mu) D_B(nu) (P_A x P_B) D_A(mu)^+ D_B(nu)^+,

with P the photon-number parity of one mode. Its expectation equals
(pi^2 / 4) W(mu, nu), W being the two-mode Wigner function. Because
D(mu) P D(mu)^+ = D(2 mu) P, the matrix of one factor is
``<m|D(2 mu)|n> (-1)^n``, whose elements are computed exactly (no truncation of
intermediate sums), so the only approximation left is the cutoff of the state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.stats import qmc

from .errors import CutoffTooSmall
from .evolution import CatTrajectory
from .fock import displacement_elements, infer_cutoff

__all__ = [
    "BellResult",
    "BellSettings",
    "CatWignerEvaluator",
    "ParityEvaluator",
    "bell_measure",
    "bell_terms",
    "characteristic_function",
    "displaced_parity_expectation",
    "grid_search_bell",
    "maximize_bell",
    "wigner_cat_analytic",
    "wigner_discrepancy",
    "wigner_numeric",
]

TSIRELSON = 2.0 * math.sqrt(2.0)
_HALVING_BATCH = 10
WIGNER_SCALE = 4.0 / math.pi**2

Evaluator = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class BellSettings:
    mu: complex = 0j
    nu: complex = 0j
    mu_prime: complex = 0j
    nu_prime: complex = 0j


@dataclass(frozen=True)
class BellResult:
    value: float
    settings: BellSettings
    iterations: int
    converged: bool


def _parity_factor(x: np.ndarray, n_max: int) -> np.ndarray:
    """Matrices of D(x) P D(x)^+ for an array of displacements x."""
    signs = (-1.0) ** np.arange(n_max + 1)
    return displacement_elements(2.0 * np.asarray(x, dtype=complex), n_max) * signs


class ParityEvaluator:
    """Displaced-parity expectation values of a two-mode density matrix.

    The state is stored as ``sum_r w_r |psi_r><psi_r|`` with each eigenvector
    Schmidt-decomposed, ``psi_r = sum_s sigma_s u_s (x) v_s``. Then

        Tr[rho O_A x O_B] = sum_r w_r sum_{s,s'} sigma_s sigma_s' (u_s^+ O_A u_s') (v_s^+ O_B v_s'),

    so a pair of settings costs O(K^2) with K the total Schmidt rank kept.
    Eigenvalues below ``rank_tol`` (relative) and Schmidt weights below
    ``schmidt_tol`` are dropped; both bound the error of every expectation value.
    The displacement elements are exact at any amplitude, so settings are
    unrestricted unless ``max_displacement`` is given, in which case larger
    ones raise `CutoffTooSmall`.

    Calling the evaluator with broadcastable arrays ``mu`` and ``nu`` returns the
    real array ``Tr[rho Pi(mu, nu)]``; `table` returns the full outer table.
    """

    def __init__(
        self,
        rho: np.ndarray,
        rank_tol: float = 1e-14,
        schmidt_tol: float = 1e-24,
        max_displacement: float | None = None,
    ):
        self.n_max = infer_cutoff(rho)
        d = self.n_max + 1
        lam, vec = np.linalg.eigh(0.5 * (rho + rho.conj().T))
        keep = np.abs(lam) > rank_tol * np.max(np.abs(lam))
        us, vs, blocks = [], [], []
        for w, psi in zip(lam[keep], vec[:, keep].T):
            u, sig, vh = np.linalg.svd(psi.reshape(d, d))
            n = int(np.count_nonzero(sig**2 > schmidt_tol))
            us.append(u[:, :n])
            vs.append(vh[:n].T)
            blocks.append(w * np.outer(sig[:n], sig[:n]))
        self.basis_a = np.concatenate(us, axis=1)
        self.basis_b = np.concatenate(vs, axis=1)
        k = self.basis_a.shape[1]
        self.weights = np.zeros((k, k))
        pos = 0
        for b in blocks:
            n = b.shape[0]
            self.weights[pos : pos + n, pos : pos + n] = b
            pos += n
        self.max_displacement = max_displacement

    @property
    def schmidt_rank(self) -> int:
        return self.basis_a.shape[1]

    def _guard(self, x: np.ndarray) -> None:
        if self.max_displacement is not None and x.size and np.max(np.abs(x)) > self.max_displacement:
            raise CutoffTooSmall(f"displacement {np.max(np.abs(x)):.3g} beyond guard {self.max_displacement:.3g}")

    def _reduced(self, x: np.ndarray, basis: np.ndarray) -> np.ndarray:
        # basis^+ (D(2x) P) basis, shape x.shape + (K, K)
        op = _parity_factor(x, self.n_max)
        return basis.conj().T @ op @ basis

    def __call__(self, mu, nu) -> np.ndarray:
        mu, nu = np.broadcast_arrays(np.asarray(mu, dtype=complex), np.asarray(nu, dtype=complex))
        shape = mu.shape
        mu, nu = mu.ravel(), nu.ravel()
        self._guard(mu)
        self._guard(nu)
        mu_u, mu_inv = np.unique(mu, return_inverse=True)
        nu_u, nu_inv = np.unique(nu, return_inverse=True)
        ga = self._reduced(mu_u, self.basis_a) * self.weights
        gb = self._reduced(nu_u, self.basis_b)
        total = (ga[mu_inv.ravel()] * gb[nu_inv.ravel()]).sum(axis=(1, 2))
        return total.real.reshape(shape)

    def table(self, mu, nu) -> np.ndarray:
        """``Tr[rho Pi(mu_i, nu_j)]`` for every pair of the 1-d arrays `mu`, `nu`."""
        mu = np.asarray(mu, dtype=complex).ravel()
        nu = np.asarray(nu, dtype=complex).ravel()
        self._guard(mu)
        self._guard(nu)
        ga = (self._reduced(mu, self.basis_a) * self.weights).reshape(mu.size, -1)
        gb = self._reduced(nu, self.basis_b).reshape(nu.size, -1)
        return (ga @ gb.T).real


def displaced_parity_expectation(rho: np.ndarray, mu: complex, nu: complex) -> float:
    """``Tr[rho Pi(mu, nu)]`` for a two-mode density matrix."""
    return float(ParityEvaluator(rho)(mu, nu))


def wigner_numeric(rho: np.ndarray, mu, nu):
    """Two-mode Wigner function from the displaced-parity trace."""
    return WIGNER_SCALE * ParityEvaluator(rho)(mu, nu)


def characteristic_function(rho: np.ndarray, eta: complex, zeta: complex) -> complex:
    """``Tr[rho D_A(eta) D_B(zeta)]``; kept as a cross-check utility."""
    n_max = infer_cutoff(rho)
    d = n_max + 1
    op = np.kron(displacement_elements(eta, n_max), displacement_elements(zeta, n_max))
    return complex(np.einsum("ij,ji->", rho.reshape(d * d, d * d), op))


# ---------------------------------------------------------------------------
# Analytic Wigner function of the evolved cat state


def _coherent_cross(x, a: complex, b: complex):
    # <b| D(2x) P |a> = exp(-2i Im(x a*)) <b|2x - a>
    x = np.asarray(x, dtype=complex)
    y = 2.0 * x - a
    return np.exp(-2j * (x * np.conj(a)).imag - 0.5 * abs(b) ** 2 - 0.5 * np.abs(y) ** 2 + np.conj(b) * y)


def _expanded_cross(x, a: complex, b: complex):
    x = np.asarray(x, dtype=complex)
    return np.exp(
        1j * (x * np.conj(a) - x * np.conj(b)).imag
        - 0.5 * np.abs(x + a) ** 2
        - 0.5 * np.abs(x + b) ** 2
        - (x + a) * (np.conj(x) + np.conj(b))
    )


def wigner_cat_analytic(traj: CatTrajectory, mu, nu, form: str = "derived"):
    """Closed-form two-mode Wigner function of the evolved cat state.

    Two Gaussian peaks at (alpha_pm, beta_pm) plus the xi-weighted interference
    term and its conjugate. ``form="derived"`` writes the interference factor
    per mode as ``exp(-2i Im(mu a*)) <b|2 mu - a>``, which matches the numeric
    parity trace everywhere. ``form="expanded"`` keeps an alternative
    expanded exponent; it coincides with the derived form only for
    ``phi = pi/2`` and ``theta`` in {0, pi}, and is kept so the mismatch can be
    quantified with `wigner_discrepancy`.
    """
    mu = np.asarray(mu, dtype=complex)
    nu = np.asarray(nu, dtype=complex)
    ap, am, bp, bm = traj.alpha_plus, traj.alpha_minus, traj.beta_plus, traj.beta_minus
    peaks = np.exp(-2 * np.abs(mu - ap) ** 2 - 2 * np.abs(nu - bp) ** 2) + np.exp(
        -2 * np.abs(mu - am) ** 2 - 2 * np.abs(nu - bm) ** 2
    )
    cross_fn = {"derived": _coherent_cross, "expanded": _expanded_cross}[form]
    cross = traj.xi * cross_fn(mu, ap, am) * cross_fn(nu, bp, bm)
    w = WIGNER_SCALE * traj.norm_const**2 * (peaks + 2.0 * cross.real)
    return w


class CatWignerEvaluator:
    """Parity evaluator backed by the closed-form cat-state Wigner function."""

    def __init__(self, traj: CatTrajectory, form: str = "derived"):
        self.traj = traj
        self.form = form

    def __call__(self, mu, nu) -> np.ndarray:
        return wigner_cat_analytic(self.traj, mu, nu, self.form) / WIGNER_SCALE


def wigner_discrepancy(traj: CatTrajectory, rho: np.ndarray, mu_grid, nu_grid) -> dict[str, float]:
    """Largest deviation of each analytic Wigner form from the numeric parity trace on a grid."""
    mu, nu = np.meshgrid(np.asarray(mu_grid, dtype=complex), np.asarray(nu_grid, dtype=complex), indexing="ij")
    ref = wigner_numeric(rho, mu, nu)
    return {form: float(np.max(np.abs(wigner_cat_analytic(traj, mu, nu, form) - ref))) for form in ("derived", "expanded")}


# ---------------------------------------------------------------------------
# Bell measure


def bell_terms(evaluator: Evaluator, mu, nu, mu_p, nu_p) -> np.ndarray:
    """Signed CHSH combination <Pi(mu,nu)> + <Pi(mu,nu')> + <Pi(mu',nu)> - <Pi(mu',nu')>."""
    mu, nu, mu_p, nu_p = np.broadcast_arrays(*(np.asarray(z, dtype=complex) for z in (mu, nu, mu_p, nu_p)))
    p = evaluator(np.stack([mu, mu, mu_p, mu_p], -1), np.stack([nu, nu_p, nu, nu_p], -1))
    return p[..., 0] + p[..., 1] + p[..., 2] - p[..., 3]


def bell_measure(evaluator: Evaluator, s: BellSettings) -> float:
    return float(abs(bell_terms(evaluator, s.mu, s.nu, s.mu_prime, s.nu_prime)))


def _unpack(x: np.ndarray, free: bool):
    z = x[..., 0::2] + 1j * x[..., 1::2]
    if free:
        return z[..., 0], z[..., 1], z[..., 2], z[..., 3]
    zero = np.zeros(z.shape[:-1], dtype=complex)
    return zero, zero, z[..., 0], z[..., 1]


def _objective(evaluator: Evaluator, x: np.ndarray, free: bool) -> np.ndarray:
    try:
        return np.abs(bell_terms(evaluator, *_unpack(x, free)))
    except CutoffTooSmall:
        if x.ndim == 1:
            return np.array(-np.inf)
        return np.array([_objective(evaluator, xi, free) for xi in x], dtype=float)


def _starts(n_params: int, n_starts: int, radius: float, inner_radius: float, seed: int) -> np.ndarray:
    # zero vector, then quasi-random points alternating between the inner and outer disks
    x = np.zeros((n_starts, n_params))
    if n_starts > 1:
        u = qmc.Halton(d=n_params, scramble=True, seed=seed).random(n_starts - 1)
        rad = np.where(np.arange(n_starts - 1) % 2 == 0, min(inner_radius, radius), radius)
        r = rad[:, None] * np.sqrt(u[:, 0::2])
        ang = 2 * np.pi * u[:, 1::2]
        x[1:, 0::2] = r * np.cos(ang)
        x[1:, 1::2] = r * np.sin(ang)
    return x


def maximize_bell(
    evaluator: Evaluator,
    constraint: str = "fixed",
    *,
    n_starts: int = 32,
    radius: float = 1.0,
    inner_radius: float = 1.0,
    seed: int = 1,
    fd_step: float = 1e-5,
    grad_tol: float = 1e-7,
    max_iter: int = 500,
    initial_step: float = 0.1,
    max_halvings: int = 40,
) -> BellResult:
    """Maximize |B| by multistart steepest ascent.

    constraint="fixed" keeps mu = nu = 0 and optimizes Re/Im of mu', nu';
    constraint="free" optimizes all four complex settings. Gradients are central
    finite differences. Starts are the zero vector plus quasi-random points in
    the disk of radius `radius` (per complex setting), every other one drawn
    from the smaller disk of radius `inner_radius`, where violating settings of
    near-vacuum states sit. Each ascent step starts from twice the last accepted
    step length (`initial_step` on the first iteration) and is halved until the
    objective improves. Starts run in lockstep so every iteration is a single
    batched evaluator call per stage.
    """
    if constraint not in ("fixed", "free"):
        raise ValueError(f"constraint must be 'fixed' or 'free', got {constraint!r}")
    free = constraint == "free"
    n_params = 8 if free else 4
    x = _starts(n_params, n_starts, radius, inner_radius, seed)
    f = _objective(evaluator, x, free)
    step = np.full(n_starts, initial_step / 2)
    iters = np.zeros(n_starts, dtype=int)
    active = np.isfinite(f)
    converged = np.zeros(n_starts, dtype=bool)
    eye = np.eye(n_params) * fd_step

    for _ in range(max_iter):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        xa = x[idx]
        probes = np.concatenate([xa[:, None, :] + eye, xa[:, None, :] - eye], axis=1)
        fp = _objective(evaluator, probes, free)
        g = (fp[:, :n_params] - fp[:, n_params:]) / (2 * fd_step)
        gnorm = np.max(np.abs(g), axis=1)
        done = gnorm < grad_tol
        converged[idx[done]] = True
        active[idx[done]] = False
        keep = ~done
        idx, xa, g = idx[keep], xa[keep], g[keep]
        if idx.size == 0:
            break
        iters[idx] += 1
        # candidate lengths s, s/2, s/4, ... tried in batches; the longest improving one wins
        s0 = 2.0 * step[idx]
        accepted = np.zeros(idx.size, dtype=bool)
        for j0 in range(0, max_halvings, _HALVING_BATCH):
            todo = np.flatnonzero(~accepted)
            if todo.size == 0:
                break
            scale = 0.5 ** np.arange(j0, min(j0 + _HALVING_BATCH, max_halvings))
            lengths = s0[todo, None] * scale
            trial = xa[todo, None, :] + lengths[..., None] * g[todo, None, :]
            ft = _objective(evaluator, trial, free)
            better = ft > f[idx[todo], None]
            hit = better.any(axis=1)
            first = np.argmax(better, axis=1)
            rows = todo[hit]
            cols = first[hit]
            x[idx[rows]] = trial[hit, cols]
            f[idx[rows]] = ft[hit, cols]
            step[idx[rows]] = lengths[hit, cols]
            accepted[rows] = True
        # no improvement at any step length: stationary to working precision
        active[idx[~accepted]] = False

    best = int(np.argmax(f))
    mu, nu, mu_p, nu_p = (complex(z) for z in _unpack(x[best], free))
    return BellResult(
        value=float(f[best]),
        settings=BellSettings(mu, nu, mu_p, nu_p),
        iterations=int(iters[best]),
        converged=bool(converged.any()),
    )


def grid_search_bell(evaluator: Evaluator, lo: float = -1.0, hi: float = 1.0, step: float = 0.05, complex_settings: bool = True):
    """Brute-force max of |B| with mu = nu = 0 on a square grid.

    With ``complex_settings`` both real and imaginary parts of mu' and nu' range
    over ``[lo, hi]`` (a four-dimensional grid); otherwise mu', nu' are real.
    Returns the maximum and the achieving settings.
    """
    axis = np.arange(lo, hi + 0.5 * step, step)
    if complex_settings:
        re, im = np.meshgrid(axis, axis, indexing="ij")
        pts = (re + 1j * im).ravel()
    else:
        pts = axis.astype(complex)
    zero = np.zeros(1, dtype=complex)
    if hasattr(evaluator, "table"):
        tab = evaluator.table(pts, pts)
        p0v = evaluator.table(zero, pts)[0]
        pu0 = evaluator.table(pts, zero)[:, 0]
        p00 = evaluator.table(zero, zero)[0, 0]
    else:
        tab = evaluator(pts[:, None], pts[None, :])
        p0v = evaluator(zero, pts)
        pu0 = evaluator(pts, zero)
        p00 = float(evaluator(zero, zero)[0])
    vals = np.abs(p00 + p0v[None, :] + pu0[:, None] - tab)
    i, j = np.unravel_index(np.argmax(vals), vals.shape)
    return float(vals[i, j]), BellSettings(0j, 0j, complex(pts[i]), complex(pts[j]))
