"""Quadratic photon fluctuations around a mean-field configuration.

Eliminating the rotated spins to second order leaves a bilinear photon
Hamiltonian, encoded as a 6x6 Hermitian matrix M in the ordered basis
{a1, a2, a3, a1^dag, a2^dag, a3^dag}. Diagonalization must preserve the
bosonic commutators, i.e. the transformation T is paraunitary:
T^dag Lam T = Lam with Lam = diag(1, 1, 1, -1, -1, -1).

The solver follows Colpa's recipe on the doubled matrix Hd = 2M:
Cholesky Hd = C^dag C, then the Hermitian C Lam C^dag is diagonalized by a
unitary; its spectrum is (-e3, -e2, -e1, e1, e2, e3) and back-substitution
yields T column by column. A Cholesky failure means Hd is not positive
definite, which is how both dynamical instability and the critical point
announce themselves; the two are told apart by the eigenvalues of Lam*Hd.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import (CriticalPointError, DegeneracyWarning, DomainError,
                     InstabilityError)
from .meanfield import MeanFieldSolution
from .model import ModelParams

_LAMBDA = np.diag([1.0, 1.0, 1.0, -1.0, -1.0, -1.0])


@dataclass(frozen=True, eq=False)
class QuadraticForm:
    m: np.ndarray   # 6x6 complex Hermitian


@dataclass(frozen=True, eq=False)
class ParaunitarySolution:
    t: np.ndarray             # 6x6 complex paraunitary
    eps: np.ndarray           # 3 excitation energies, ascending
    para_residual: float      # max |T^dag Lam T - Lam|
    diag_residual: float      # max off-diag of T^-1 (Lam Hd) T


@dataclass(frozen=True, eq=False)
class SrObservables:
    photon_number: np.ndarray   # per site, condensate included
    var_x: np.ndarray
    var_p: np.ndarray
    ground_energy: float


def build_m_matrix(params: ModelParams, mf: MeanFieldSolution) -> QuadraticForm:
    """Bilinear form M: diagonal omega/2 - lambda_n^2/Delta_n, hopping
    J e^{-i theta}/2 along the ring, anomalous -lambda_n^2/Delta_n."""
    w, j, th = params.omega, params.j_hop, params.theta
    kap = mf.lambda_n ** 2 / mf.delta_n   # lambda_n^2 / Delta_n per site
    m = np.zeros((6, 6), dtype=complex)
    eith = complex(math.cos(th), math.sin(th))
    for n in range(3):
        p, q = (n + 1) % 3, (n - 1) % 3
        m[n, n] = 0.5 * w - kap[n]
        m[3 + n, 3 + n] = 0.5 * w - kap[n]
        m[n, p] += 0.5 * j / eith
        m[n, q] += 0.5 * j * eith
        m[3 + n, 3 + p] += 0.5 * j * eith
        m[3 + n, 3 + q] += 0.5 * j / eith
        m[n, 3 + n] = -kap[n]
        m[3 + n, n] = -kap[n]
    return QuadraticForm(m=m)


def _raise_nonpositive(hd: np.ndarray, scale: float) -> None:
    evals = np.linalg.eigvals(_LAMBDA @ hd)
    if float(np.max(np.abs(evals.imag))) > 1e-8 * scale:
        raise InstabilityError(
            "Lam*Hd has complex eigenvalues; the expansion point is "
            "dynamically unstable (wrong phase branch)")
    raise CriticalPointError(
        "quadratic form is not positive definite; a mode energy has "
        "reached zero (critical point)")


def diagonalize_paraunitary(qf: QuadraticForm) -> ParaunitarySolution:
    """Paraunitary T and positive excitation energies of the form qf.

    Raises CriticalPointError when a mode energy collapses to zero (the
    Bogoliubov normalization is singular there) and InstabilityError when
    the spectrum of Lam*Hd leaves the real axis (expansion around an
    unstable configuration).
    """
    m = np.asarray(qf.m, dtype=complex)
    if m.shape != (6, 6):
        raise DomainError(f"expected a 6x6 matrix, got {m.shape}")
    scale = float(np.max(np.abs(m)))
    if scale == 0.0:
        raise CriticalPointError("zero quadratic form")
    if float(np.max(np.abs(m - m.conj().T))) > 1e-10 * scale:
        raise DomainError("quadratic form must be Hermitian")
    hd = 2.0 * m
    # an exact zero mode leaves Hd positive semidefinite; Cholesky can then
    # still succeed on rounding noise and return sqrt(eps_machine)-scale
    # energies, so test definiteness explicitly first
    if float(np.linalg.eigvalsh(hd)[0]) <= 1e-12 * scale:
        _raise_nonpositive(hd, scale)
    try:
        c = sla.cholesky(hd, lower=False)   # hd = c^dag c
    except np.linalg.LinAlgError:
        _raise_nonpositive(hd, scale)
    w = c @ _LAMBDA @ c.conj().T
    evals, u = np.linalg.eigh(w)    # ascending: -e3,-e2,-e1,e1,e2,e3
    eps = evals[3:].copy()
    if eps[0] <= 1e-12 * scale:
        raise CriticalPointError(
            f"soft mode energy {eps[0]:.3e} is numerically zero")
    gaps = [abs(eps[0] - eps[1]), abs(eps[1] - eps[2]), abs(eps[0] - eps[2])]
    if min(gaps) < 1e-10:
        warnings.warn("near-degenerate excitation energies; T columns are "
                      "basis-dependent within the degenerate subspace",
                      DegeneracyWarning, stacklevel=2)
    t = np.zeros((6, 6), dtype=complex)
    for k in range(3):
        vec = sla.solve_triangular(c, u[:, 3 + k] * math.sqrt(eps[k]),
                                   lower=False)
        # deterministic phase: largest-modulus component real positive
        imax = int(np.argmax(np.abs(vec)))
        ph = vec[imax] / abs(vec[imax])
        vec = vec / ph
        t[:, k] = vec
        t[:3, 3 + k] = np.conj(vec[3:])
        t[3:, 3 + k] = np.conj(vec[:3])
    para = float(np.max(np.abs(t.conj().T @ _LAMBDA @ t - _LAMBDA)))
    rec = np.linalg.solve(t, _LAMBDA @ hd @ t)
    rec -= np.diag(np.concatenate([eps, -eps]))
    diag = float(np.max(np.abs(rec)))
    return ParaunitarySolution(t=t, eps=eps, para_residual=para,
                               diag_residual=diag)


def local_photon_sr(ps: ParaunitarySolution, mf: MeanFieldSolution) -> np.ndarray:
    """Per-site photon number: fluctuation part plus |alpha_n|^2."""
    t = ps.t
    fluct = np.sum(np.abs(t[:3, 3:]) ** 2, axis=1)
    return fluct + mf.disp.a ** 2 + mf.disp.b ** 2


def variance_x_sr(ps: ParaunitarySolution) -> np.ndarray:
    """(Delta x_n)^2 for x = a + a^dag; displacement-independent."""
    t = ps.t
    return np.array([
        sum(abs(t[n, i] + np.conj(t[n, i + 3])) ** 2 for i in range(3))
        for n in range(3)])


def variance_p_sr(ps: ParaunitarySolution) -> np.ndarray:
    """(Delta p_n)^2 for p = i(a^dag - a); displacement-independent."""
    t = ps.t
    return np.array([
        sum(abs(np.conj(t[n, i + 3]) - t[n, i]) ** 2 for i in range(3))
        for n in range(3)])


def ground_energy_fluct(params: ModelParams, ps: ParaunitarySolution,
                        mf: MeanFieldSolution) -> float:
    """Mean-field energy plus the zero-point shift sum_k (eps_k - omega)/2."""
    return mf.energy + float(np.sum(ps.eps - params.omega)) / 2.0


def observables_sr(params: ModelParams, ps: ParaunitarySolution,
                   mf: MeanFieldSolution) -> SrObservables:
    return SrObservables(
        photon_number=local_photon_sr(ps, mf),
        var_x=variance_x_sr(ps),
        var_p=variance_p_sr(ps),
        ground_energy=ground_energy_fluct(params, ps, mf),
    )
