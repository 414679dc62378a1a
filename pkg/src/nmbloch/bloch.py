"""Non-Markovian optical Bloch equations in the dressed basis.

The Bloch vector obeys ``dR/dt = [D(t) + D'(t)] R + d(t) + d'(t)`` where the
unprimed pieces come from the secular dissipator and the primed ones from the
nonsecular terms. Bloch vectors are plain ``(3,)`` arrays ``(x, y, z)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import integrate
from scipy.linalg import expm

from . import pauli
from .dressed import DressedBasis, SystemParams, to_bare_frame
from .exceptions import IntegrationError, NMBlochError
from .rates import RateFunction, RateSample, _check_grid
from .spectral import regime_params

RTOL = 1e-9
ATOL = 1e-12
STIFF_P = 1e3


@dataclass(frozen=True)
class GeneratorMatrices:
    d_sec: np.ndarray
    d_nonsec: np.ndarray
    drift_sec: np.ndarray
    drift_nonsec: np.ndarray

    def total(self):
        return self.d_sec + self.d_nonsec, self.drift_sec + self.drift_nonsec

    def affine(self) -> np.ndarray:
        """4x4 matrix acting on ``(1, x, y, z)``; equals the Pauli transfer matrix of the generator."""
        m, b = self.total()
        out = np.zeros((4, 4))
        out[1:, 0] = b
        out[1:, 1:] = m
        return out


def build_generator(basis: DressedBasis, sample: RateSample, secular_only: bool = False,
                    lamb_shift: bool = False) -> GeneratorMatrices:
    """Damping matrices and drift vectors for one set of rate values.

    The nonsecular entries carrying Lamb coefficients have the sign produced by
    applying the master equation to the Pauli basis (see
    :func:`generator_from_master_equation`). ``lamb_shift`` adds the Lamb-shift
    Hamiltonian, which renormalises the precession frequency; it is off by default.
    """
    cp, cm, c0 = basis.c_plus, basis.c_minus, basis.c_zero
    gm, g0, gp = sample.gamma
    lm, l0, lp = sample.lamb
    w = basis.omega
    if lamb_shift:
        w = w + lp * cp * cp - lm * cm * cm
    rel = cp * cp * gp + cm * cm * gm
    deph = 0.5 * (rel + 4 * c0 * c0 * g0)
    d_sec = np.array([[-deph, -w, 0.0], [w, -deph, 0.0], [0.0, 0.0, -rel]])
    drift_sec = np.array([0.0, 0.0, cm * cm * gm - cp * cp * gp])
    if secular_only:
        return GeneratorMatrices(d_sec, np.zeros((3, 3)), drift_sec, np.zeros(3))
    pm = cp * cm
    d_nonsec = np.array([
        [0.5 * pm * (gp + gm), pm * (lm - lp), c0 * (cm * gm + cp * gp)],
        [pm * (lm - lp), -0.5 * pm * (gp + gm), 2 * c0 * (cm * lm - cp * lp)],
        [c0 * (cp + cm) * g0, 2 * c0 * (cp - cm) * l0, 0.0],
    ])
    drift_nonsec = np.array([
        c0 * (cp * (g0 + gp) - cm * (g0 + gm)),
        2 * c0 * (cp * (l0 - lp) + cm * (l0 - lm)),
        0.0,
    ])
    return GeneratorMatrices(d_sec, d_nonsec, drift_sec, drift_nonsec)


def secular_dissipator(basis: DressedBasis, sample: RateSample):
    cp, cm, c0 = basis.c_plus, basis.c_minus, basis.c_zero
    gm, g0, gp = sample.gamma
    parts = [pauli.lindblad(pauli.SM, cp * cp * gp),
             pauli.lindblad(pauli.SP, cm * cm * gm),
             pauli.lindblad(pauli.SZ, c0 * c0 * g0)]
    return lambda rho: sum(p(rho) for p in parts)


def nonsecular_dissipator(basis: DressedBasis, sample: RateSample):
    cp, cm, c0 = basis.c_plus, basis.c_minus, basis.c_zero
    gm, g0, gp = sample.gamma
    lm, l0, lp = sample.lamb
    sp_, sm, sz = pauli.SP, pauli.SM, pauli.SZ

    def apply(rho):
        e = (gm / 2 - 1j * lm) * (cm * c0 * (sp_ @ rho @ sz - sz @ sp_ @ rho)
                                  + cp * cm * (sp_ @ rho @ sp_ - sp_ @ sp_ @ rho))
        e = e + (gp / 2 - 1j * lp) * (cp * c0 * (sm @ rho @ sz - sz @ sm @ rho)
                                      + cp * cm * (sm @ rho @ sm - sm @ sm @ rho))
        e = e + (g0 / 2 - 1j * l0) * (cm * c0 * (sz @ rho @ sm - sm @ sz @ rho)
                                      + cp * c0 * (sz @ rho @ sp_ - sp_ @ sz @ rho))
        return e + e.conj().T
    return apply


def generator_from_master_equation(basis: DressedBasis, sample: RateSample) -> GeneratorMatrices:
    """Bloch generator obtained by applying the master equation to the Pauli basis.

    Independent of :func:`build_generator`: the free commutator and both
    dissipators are written as operators on 2x2 matrices and projected with
    ``L_ij = Tr[s_i L(s_j)] / 2``.
    """
    h = 0.5 * basis.omega * pauli.SZ
    unitary = pauli.commutator(h)
    sec = secular_dissipator(basis, sample)
    sec_l = pauli.transfer_matrix(lambda r: unitary(r) + sec(r))
    non_l = pauli.transfer_matrix(nonsecular_dissipator(basis, sample))
    return GeneratorMatrices(sec_l[1:, 1:], non_l[1:, 1:], sec_l[1:, 0], non_l[1:, 0])


# --- trajectories -----------------------------------------------------------

@dataclass(frozen=True)
class BlochTrajectory:
    """Integrated dressed-basis Bloch vectors plus the accumulated exponents.

    ``Gamma`` and ``Lambda`` integrate ``(C+^2 g+ + C-^2 g- + 4 C0^2 g0) / 2`` and
    ``C+^2 g+ + C-^2 g-``; ``int_gamma0`` integrates ``g0``.
    """

    grid: np.ndarray
    states: np.ndarray  # (N, 3)
    Gamma: np.ndarray
    Lambda: np.ndarray
    int_gamma0: np.ndarray
    basis: DressedBasis
    secular_only: bool
    time_scale: float = 1.0
    r0: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, 1.0]))

    @property
    def T(self):
        return self.time_scale * self.grid

    @property
    def bare_states(self):
        return to_bare_frame(self.states, self.basis)

    def columns(self) -> dict:
        bare = self.bare_states
        return {
            "t": self.grid, "T_dimensionless": self.T,
            "Rx": self.states[:, 0], "Ry": self.states[:, 1], "Rz": self.states[:, 2],
            "Rx_bare": bare[:, 0], "Ry_bare": bare[:, 1], "Rz_bare": bare[:, 2],
            "Gamma": self.Gamma, "Lambda": self.Lambda,
        }


def _exponent_rates(basis, g):
    cp2, cm2, c02 = basis.c_plus ** 2, basis.c_minus ** 2, basis.c_zero ** 2
    rel = cp2 * g[2] + cm2 * g[0]
    return 0.5 * (rel + 4 * c02 * g[1]), rel, g[1]


def _augmented(gen: GeneratorMatrices, basis, gamma) -> np.ndarray:
    """7x7 constant-coefficient generator on ``(x, y, z, Gamma, Lambda, int g0, 1)``."""
    m, b = gen.total()
    a = np.zeros((7, 7))
    a[:3, :3] = m
    a[:3, 6] = b
    a[3:6, 6] = _exponent_rates(basis, gamma)
    return a


def integrate_bloch(rates: RateFunction, r0, grid, secular_only: bool = False,
                    lamb_shift: bool = False, rtol: float = RTOL, atol: float = ATOL,
                    max_step: Optional[float] = None) -> BlochTrajectory:
    """Integrate the Bloch equations for a prepared :class:`RateFunction`.

    Uses the DOP853 embedded Runge-Kutta pair with dense output on ``grid``.
    Once the rates have settled to their Markov values to double precision
    (Lorentzian, ``width * t >= 40``) the remaining grid is propagated exactly
    with the matrix exponential of the constant generator.
    """
    grid = _check_grid(grid)
    basis = rates.basis
    r0 = np.asarray(r0, dtype=float)
    if r0.shape != (3,) or not np.all(np.isfinite(r0)):
        raise ValueError("initial Bloch vector must be three finite numbers")
    if max_step is None:
        max_step = math.inf
        if basis.omega / rates.time_scale >= STIFF_P:
            max_step = 2 * math.pi / (20 * basis.omega)

    def rhs(t, y):
        g, lam = rates(t)
        gen = build_generator(basis, RateSample(t, g, lam), secular_only, lamb_shift)
        m, b = gen.total()
        out = np.empty(6)
        out[:3] = m @ y[:3] + b
        out[3:] = _exponent_rates(basis, g)
        return out

    t_end = grid[-1]
    settle = rates.settle_time
    split = t_end if settle is None or settle >= t_end else settle
    ode_grid = grid[grid <= split]
    y = np.zeros((grid.size, 6))
    y[0, :3] = r0
    if split > 0:
        try:
            sol = integrate.solve_ivp(rhs, (0.0, split), y[0], method="DOP853", t_eval=ode_grid,
                                      rtol=rtol, atol=atol, max_step=max_step, dense_output=True)
        except NMBlochError as exc:
            raise IntegrationError(f"rate evaluation failed during integration: {exc}") from exc
        if sol.status != 0:
            raise IntegrationError(f"ODE integration failed: {sol.message}")
        y[:ode_grid.size] = sol.y.T
        if split < t_end:
            y_split = sol.sol(split)
    if split < t_end:
        g, lam = rates(split)
        a = _augmented(build_generator(basis, RateSample(split, g, lam), secular_only,
                                       lamb_shift), basis, g)
        state = np.append(y_split, 1.0)
        t_prev = split
        cache = {}
        for k in range(ode_grid.size, grid.size):
            dt = grid[k] - t_prev
            key = round(dt / t_end, 12)
            if key not in cache:
                cache[key] = expm(a * dt)
            state = cache[key] @ state
            y[k] = state[:6]
            t_prev = grid[k]
    return BlochTrajectory(grid, y[:, :3].copy(), y[:, 3].copy(), y[:, 4].copy(),
                           y[:, 5].copy(), basis, secular_only, rates.time_scale, r0)


def integrate_trajectory(model, basis: DressedBasis, params: SystemParams, r0, grid,
                         secular_only: bool = False, **kw) -> BlochTrajectory:
    """Integrate for a spectral ``model``; see :func:`integrate_bloch` for options."""
    return integrate_bloch(RateFunction(model, basis, params), r0, grid, secular_only, **kw)


# --- analytic solutions -----------------------------------------------------

GL_NODES = 16
_GL_X, _GL_W = np.polynomial.legendre.leggauss(GL_NODES)


def _running_matrix():
    # Q[i, j] = int_{-1}^{x_i} l_j(x) dx for the Lagrange basis on the Gauss nodes
    v = np.polynomial.legendre.legvander(_GL_X, GL_NODES - 1)
    anti = np.empty((GL_NODES, GL_NODES))
    for k in range(GL_NODES):
        c = np.zeros(GL_NODES)
        c[k] = 1.0
        anti[:, k] = np.polynomial.legendre.legval(_GL_X, np.polynomial.legendre.legint(c, lbnd=-1))
    return anti @ np.linalg.inv(v)


_GL_Q = _running_matrix()


@dataclass(frozen=True)
class SecularSolution:
    grid: np.ndarray
    states: np.ndarray
    Gamma: np.ndarray
    Lambda: np.ndarray


def secular_solution(grid, rates: RateFunction, r0, panel_phase: float = 2.0) -> SecularSolution:
    """Closed-form secular Bloch vector on ``grid``.

    ``x, y`` precess at ``omega`` under the envelope ``exp(-Gamma)``; ``z`` is
    ``exp(-Lambda(t)) [z0 + int_0^t exp(Lambda(s)) (C-^2 g-(s) - C+^2 g+(s)) ds]``.
    The quadratures use composite 16-point Gauss-Legendre panels no wider than
    ``panel_phase / rates.bandwidth``; running integrals inside a panel come from
    the exact polynomial integration matrix on the same nodes. Nothing here
    shares code with the ODE path.
    """
    grid = _check_grid(grid)
    basis = rates.basis
    x0, y0, z0 = np.asarray(r0, dtype=float)
    cp2, cm2, c02 = basis.c_plus ** 2, basis.c_minus ** 2, basis.c_zero ** 2
    Gam = np.zeros(grid.size)
    Lam = np.zeros(grid.size)
    z = np.full(grid.size, z0)
    for k in range(1, grid.size):
        a, b = grid[k - 1], grid[k]
        pieces = max(1, int(math.ceil((b - a) * rates.bandwidth / panel_phase)))
        edges = np.linspace(a, b, pieces + 1)
        half = 0.5 * np.diff(edges)
        nodes = (0.5 * (edges[:-1] + edges[1:]))[:, None] + half[:, None] * _GL_X
        g = rates(nodes.ravel())[0].reshape(3, pieces, GL_NODES)
        rel = cp2 * g[2] + cm2 * g[0]
        deph = 0.5 * (rel + 4 * c02 * g[1])
        drift = cm2 * g[0] - cp2 * g[2]
        # Lambda at each node measured from the panel start, then offset by earlier panels
        run = half[:, None] * (rel @ _GL_Q.T)
        totals = half * (rel @ _GL_W)
        offsets = np.concatenate([[0.0], np.cumsum(totals)[:-1]])
        lam_nodes = run + offsets[:, None]
        lam_end = offsets[-1] + totals[-1]
        inner = np.sum(half[:, None] * _GL_W * np.exp(lam_nodes - lam_end) * drift)
        Gam[k] = Gam[k - 1] + np.sum(half * (deph @ _GL_W))
        Lam[k] = Lam[k - 1] + lam_end
        z[k] = math.exp(-lam_end) * z[k - 1] + inner
    wt = basis.omega * grid
    env = np.exp(-Gam)
    states = np.column_stack([
        env * (x0 * np.cos(wt) - y0 * np.sin(wt)),
        env * (y0 * np.cos(wt) + x0 * np.sin(wt)),
        z,
    ])
    return SecularSolution(grid, states, Gam, Lam)


@dataclass(frozen=True)
class MarkovSummary:
    """Markovian time scales. ``tau_R`` governs ``z``, ``tau_D`` the transverse components."""

    tau_R: float
    tau_D: float
    z_inf: float


def markov_summary(basis: DressedBasis, markov_gamma) -> MarkovSummary:
    gm, g0, gp = markov_gamma
    cp2, cm2, c02 = basis.c_plus ** 2, basis.c_minus ** 2, basis.c_zero ** 2
    rel = cp2 * gp + cm2 * gm
    deph = 0.5 * (rel + 4 * c02 * g0)
    tau_r = math.inf if rel == 0 else 1.0 / rel
    tau_d = math.inf if deph == 0 else 1.0 / deph
    z_inf = math.nan if rel == 0 else (cm2 * gm - cp2 * gp) / rel
    return MarkovSummary(tau_r, tau_d, z_inf)


def markov_solution(t, summary: MarkovSummary, basis: DressedBasis, r0) -> np.ndarray:
    """Markovian Bloch vector(s) at time(s) ``t``; shape ``(3,)`` or ``(N, 3)``."""
    if math.isnan(summary.z_inf):
        raise NMBlochError("no relaxation channel (C-^2 g-^M + C+^2 g+^M = 0): z_inf undefined")
    t = np.asarray(t, dtype=float)
    x0, y0, z0 = np.asarray(r0, dtype=float)
    wt = basis.omega * t
    env = np.exp(-t / summary.tau_D)
    z = np.exp(-t / summary.tau_R) * (z0 - summary.z_inf) + summary.z_inf
    return np.stack([env * (x0 * np.cos(wt) - y0 * np.sin(wt)),
                     env * (y0 * np.cos(wt) + x0 * np.sin(wt)), z], axis=-1)


def steady_state(rates: RateFunction, secular_only: bool = False,
                 lamb_shift: bool = False) -> np.ndarray:
    """Stationary Bloch vector of the generator with all coefficients at their Markov values."""
    sample = RateSample(math.inf, rates.markov_gamma, rates.markov_lamb)
    m, b = build_generator(rates.basis, sample, secular_only, lamb_shift).total()
    return np.linalg.solve(m, -b)


def regime_of(model, basis, params):
    return regime_params(model, basis, params)
