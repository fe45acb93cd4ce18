"""Gibbs and ground states by exact diagonalization, covariances and correlation scans."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .densekit import precision as pr
from .densekit.config import TOL
from .densekit.linalg import dagger, embed, herm_eig, mat_exp, op_norm, trace
from .errors import Degenerate, DimensionMismatch
from .hamiltonian import PAULI


@dataclass(frozen=True)
class GibbsState:
    rho: np.ndarray
    beta: float
    logZ: float
    energies: np.ndarray
    vectors: np.ndarray


@dataclass(frozen=True)
class GroundState:
    energy: float
    vector: np.ndarray
    gap: float


def gibbs(H, beta) -> GibbsState:
    """e^{-beta H}/Z from the eigendecomposition, with energies shifted by the minimum."""
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    eig = herm_eig(H)
    lam = eig.values
    U = eig.vectors
    ext = pr.is_extended(U)
    if ext:
        b = pr.scalar(beta, U) if not pr.is_extended(beta) else beta
        w = np.array([pr.exp(-b * (l - lam[0])) for l in lam], dtype=object)
        Zs = sum(w)
        logZ = float(-b * lam[0] + pr.log(Zs))
    else:
        w = np.exp(-beta * (lam - lam[0]))
        Zs = w.sum()
        logZ = float(-beta * lam[0] + math.log(Zs))
    p = w / Zs
    rho = (U * p) @ dagger(U)
    return GibbsState(rho, float(beta), logZ, lam, U)


def _fix_phase(v: np.ndarray) -> np.ndarray:
    mags = pr.abs_array(v)
    k = int(np.argmax([float(m) for m in np.ravel(mags)]))
    return v * (abs(v[k]) / v[k])


def ground(H, degeneracy_tol: float | None = None) -> GroundState:
    """Lowest eigenpair with gap; raises Degenerate if the gap is below tolerance."""
    eig = herm_eig(H)
    vals = eig.values
    if len(vals) < 2:
        return GroundState(float(vals[0]), _fix_phase(eig.vectors[:, 0]), math.inf)
    gap = vals[1] - vals[0]
    if degeneracy_tol is None:
        degeneracy_tol = TOL.degeneracy * (1 + max(abs(float(vals[0])), abs(float(vals[-1]))))
    if float(gap) < degeneracy_tol:
        raise Degenerate(f"ground-state gap {float(gap):.3e} below tolerance {degeneracy_tol:.3e}")
    return GroundState(float(vals[0]), _fix_phase(eig.vectors[:, 0]), float(gap))


def ground_projector(H, tol: float | None = None) -> tuple[np.ndarray, float, int]:
    """Projector onto the lowest eigenspace, the gap above it, and its dimension."""
    eig = herm_eig(H)
    vals = pr.real_values(eig.values)
    if tol is None:
        tol = TOL.degeneracy * (1 + np.abs(vals).max())
    k = int(np.sum(vals - vals[0] <= tol))
    V = eig.vectors[:, :k]
    gap = float(vals[k] - vals[k - 1]) if k < len(vals) else math.inf
    return V @ dagger(V), gap, k


def _as_rho(state) -> np.ndarray:
    if isinstance(state, GibbsState):
        return state.rho
    if isinstance(state, GroundState):
        v = state.vector
        return np.outer(v, np.conj(v))
    a = np.asarray(state)
    if a.ndim == 1:
        return np.outer(a, np.conj(a))
    return a


def expect(O, state) -> float:
    """tr[O rho] (or <psi|O|psi>), real part; the imaginary residue is checked."""
    O = np.asarray(O)
    if isinstance(state, GroundState) or np.asarray(state).ndim == 1:
        v = state.vector if isinstance(state, GroundState) else np.asarray(state)
        if O.shape[0] != v.shape[0]:
            raise DimensionMismatch("operator and state dimensions differ")
        val = np.conj(v) @ (O @ v)
    else:
        rho = _as_rho(state)
        if O.shape != rho.shape:
            raise DimensionMismatch("operator and state dimensions differ")
        val = np.sum(O * rho.T)
    val = complex(val)
    scale = 1 + op_norm(pr.to_double(O)) if O.shape[0] <= 64 else 1 + float(pr.fro_norm(O))
    if abs(val.imag) > 1e-10 * scale:
        raise ValueError(f"expectation has imaginary part {val.imag:.3e}")
    return val.real


def cov(rho, X, Y) -> float:
    """1/2 tr[rho {X, Y}] - tr[rho X] tr[rho Y]."""
    rho = _as_rho(rho)
    X = np.asarray(X)
    Y = np.asarray(Y)
    if X.shape != rho.shape or Y.shape != rho.shape:
        raise DimensionMismatch("covariance operands have mismatched dimensions")
    sym = 0.5 * complex(np.sum((X @ Y + Y @ X) * rho.T))
    return sym.real - expect(X, rho) * expect(Y, rho)


@dataclass(frozen=True)
class CorrelationProfile:
    distances: np.ndarray
    values: np.ndarray
    K: float
    xi: float


def correlation_scan(rho, lattice, probes=("Z", "X"), floor: float = 1e-12) -> CorrelationProfile:
    """Per-distance maximum of |Cov(M_i, N_j)| / (||M|| ||N||) over single-site probes.

    A least-squares fit of log values against distance gives an empirical
    (K, xi); it is reported only.  Values at or below ``floor`` are rounding
    noise and stay out of the fit.
    """
    rho = _as_rho(rho)
    mats = [PAULI[p] if isinstance(p, str) else np.asarray(p) for p in probes]
    norms = [op_norm(m) for m in mats]
    emb = {(i, a): embed(m, [i], lattice) for i in range(lattice.n) for a, m in enumerate(mats)}
    exp1 = {k: expect(v, rho) for k, v in emb.items()}
    best: dict = {}
    for i, j in itertools.combinations(range(lattice.n), 2):
        d = lattice.dist(i, j)
        for a, b in itertools.product(range(len(mats)), repeat=2):
            X, Y = emb[(i, a)], emb[(j, b)]
            c = 0.5 * complex(np.sum((X @ Y + Y @ X) * rho.T)).real - exp1[(i, a)] * exp1[(j, b)]
            val = abs(c) / (norms[a] * norms[b])
            best[d] = max(best.get(d, 0.0), val)
    ds = np.array(sorted(best))
    vs = np.array([best[d] for d in ds])
    K, xi = math.nan, math.inf
    mask = vs > floor
    if mask.sum() >= 2:
        slope, icpt = np.polyfit(ds[mask], np.log(vs[mask]), 1)
        K = float(math.exp(icpt))
        xi = float(-1.0 / slope) if slope < 0 else math.inf
    return CorrelationProfile(ds, vs, K, xi)


def trace_ratio(X, Y) -> tuple[float, float, float]:
    """omega = |tr e^{X+Y}| / tr e^X with the bounds (2 - e^{||Y||}, e^{||Y||})."""
    X = np.asarray(X, dtype=complex)
    Y = np.asarray(Y, dtype=complex)
    eX = herm_eig(X).values
    shift = eX[-1]
    n = X.shape[0]
    num = abs(complex(trace(mat_exp(X + Y - shift * np.eye(n)))))
    den = float(np.sum(np.exp(eX - shift)))
    y = op_norm(Y)
    return num / den, 2 - math.exp(y), math.exp(y)


def perturbed_expectation(H, V0, O, beta, z) -> complex:
    """f(z) = tr[O e^{-beta(H + z V0)}] / tr[e^{-beta(H + z V0)}], complex z allowed."""
    H = np.asarray(H, dtype=complex)
    A = -beta * (H + z * np.asarray(V0, dtype=complex))
    shift = herm_eig(H).values[0] * -beta
    E = mat_exp(A - shift * np.eye(H.shape[0]))
    return complex(np.trace(np.asarray(O) @ E) / np.trace(E))
