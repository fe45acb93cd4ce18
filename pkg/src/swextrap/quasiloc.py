"""Quasi-locality probes: Heisenberg evolution, commutator light cones, belief
propagation and spectral-flow filters, ball truncation and local-indistinguishability scans."""
from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .densekit.linalg import dagger, embed, herm_eig, op_norm, partial_trace, trace_norm
from .errors import QuadratureFailure
from .hamiltonian import PAULI, LocalOperator, ParamFamily, PartitionedFamily, assemble
from .lattice import Lattice, ball
from .states import gibbs, ground


def heisenberg(O, H, t: float) -> np.ndarray:
    """e^{iHt} O e^{-iHt} through the eigenbasis of H."""
    eig = herm_eig(H)
    U = eig.vectors
    ph = np.exp(1j * eig.values * t)
    Ob = dagger(U) @ np.asarray(O, dtype=complex) @ U
    return U @ (ph[:, None] * Ob * ph.conj()[None, :]) @ dagger(U)


@dataclass(frozen=True)
class LRProfile:
    times: np.ndarray
    distances: np.ndarray
    norms: np.ndarray
    decay_rates: np.ndarray


def lr_profile(H: LocalOperator, A, O_A, sites_B, times) -> LRProfile:
    """||[O_A(t), Z_B]|| for each probe site B and time t.

    A straight-line fit of log norms against distance at each time gives an
    empirical decay rate; it is reported, not asserted.
    """
    lat = H.lattice
    Hm = assemble(H)
    eig = herm_eig(Hm)
    U = eig.vectors
    OA = embed(np.asarray(O_A, dtype=complex), list(A), lat)
    OAb = dagger(U) @ OA @ U
    probes = [embed(PAULI["Z"], [b], lat) for b in sites_B]
    dists = np.array([lat.set_dist(A, [b]) for b in sites_B])
    norms = np.zeros((len(times), len(sites_B)))
    for i, t in enumerate(times):
        ph = np.exp(1j * eig.values * t)
        Ot = U @ (ph[:, None] * OAb * ph.conj()[None, :]) @ dagger(U)
        for j, P in enumerate(probes):
            C = Ot @ P - P @ Ot
            norms[i, j] = op_norm(1j * C)
    rates = np.full(len(times), np.nan)
    for i in range(len(times)):
        mask = norms[i] > 1e-300
        if mask.sum() >= 2 and len(set(dists[mask])) >= 2:
            rates[i] = -np.polyfit(dists[mask], np.log(norms[i][mask]), 1)[0]
    return LRProfile(np.asarray(times, dtype=float), dists, norms, rates)


# belief propagation ------------------------------------------------------

@dataclass(frozen=True)
class FilterSpec:
    """Filter for the belief-propagation or spectral-flow operator."""

    kind: str = "qbp"
    beta: float = 1.0
    gamma: float = 1.0
    tail: float = 1e-12

    @property
    def cutoff(self) -> float:
        """Time cutoff T with (4 / pi beta) / (e^{pi T / beta} - 1) <= tail."""
        return (self.beta / math.pi) * math.log1p(4.0 / (math.pi * self.beta * self.tail))


def qbp_kernel(t, beta: float):
    """kappa_beta(t) = (2 / pi beta) log((e^{pi|t|/beta} + 1) / (e^{pi|t|/beta} - 1))."""
    a = np.pi * np.abs(np.asarray(t, dtype=float)) / beta
    with np.errstate(divide="ignore"):
        return (2.0 / (np.pi * beta)) * np.log1p(2.0 / np.expm1(a))


@functools.lru_cache(maxsize=200_000)
def _khat_cached(key: int, beta: float, T: float) -> float:
    return _khat_quad(key * 1e-12, beta, T)


def _khat_quad(w: float, beta: float, T: float) -> float:
    """2 int_0^T kappa(t) cos(w t) dt with the log singularity at 0 handled by a weighted rule."""
    c = 2.0 / (np.pi * beta)
    t1 = min(T, beta)

    def smooth(t):
        # kappa(t) + c log t, regular at t = 0
        if t == 0.0:
            return -c * math.log(math.pi / (2 * beta))
        return c * math.log(t / math.tanh(math.pi * t / (2 * beta)))

    def tail(t):
        return float(qbp_kernel(t, beta))

    head = [0.0, t1 / 8, t1 / 4, t1 / 2, t1]
    edges = [t1] + [e for e in (2 * beta, 4 * beta, 8 * beta) if t1 < e < T] + [T]
    w = abs(w)
    opts = dict(weight="cos", wvar=w) if w else {}

    def pieces(f, pts):
        return [integrate.quad(f, lo, hi, epsabs=1e-13, epsrel=1e-13, limit=200, **opts)
                for lo, hi in zip(pts[:-1], pts[1:])]

    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            parts = pieces(smooth, head) + pieces(tail, edges)
        except integrate.IntegrationWarning as exc:
            raise QuadratureFailure(f"kernel transform at omega = {w}: {exc}") from exc
    # int_0^t1 log(t) cos(w t) dt in closed form
    if w == 0.0:
        b = t1 * math.log(t1) - t1
    else:
        b = (math.sin(w * t1) * math.log(t1) - special.sici(w * t1)[0]) / w
    total = sum(p[0] for p in parts) - c * b
    err = sum(p[1] for p in parts)
    if not np.isfinite(total) or 2 * err > 1e-10:
        raise QuadratureFailure(f"kernel transform at omega = {w} has error estimate {2 * err:.2e}")
    return 2 * total


def qbp_transform(w: float, beta: float, spec: FilterSpec | None = None) -> float:
    """Fourier transform of kappa_beta truncated at the filter's cutoff (cached per 1e-12 of omega)."""
    spec = spec or FilterSpec("qbp", beta)
    return _khat_cached(int(round(abs(w) * 1e12)), float(beta), spec.cutoff)


def _gap_filter(H, X, fn) -> np.ndarray:
    eig = herm_eig(H)
    U = eig.vectors
    E = eig.values
    Xb = dagger(U) @ np.asarray(X, dtype=complex) @ U
    W = np.empty_like(Xb)
    n = len(E)
    for a in range(n):
        for b in range(n):
            W[a, b] = fn(E[a] - E[b])
    return U @ (Xb * W) @ dagger(U)


def qbp_operator(H, X, beta: float, spec: FilterSpec | None = None) -> np.ndarray:
    """Phi_H(X): entries X_ab scaled by the kernel transform at E_a - E_b."""
    spec = spec or FilterSpec("qbp", beta)
    cache: dict = {}

    def fn(w):
        k = int(round(abs(w) * 1e12))
        if k not in cache:
            cache[k] = _khat_cached(k, float(beta), spec.cutoff)
        return cache[k]

    return _gap_filter(H, X, fn)


def _central_difference(fn, x0, h):
    return (fn(x0 + h) - fn(x0 - h)) / (2 * h)


def qbp_derivative_rhs(family: ParamFamily, x0, beta: float) -> np.ndarray:
    H = assemble(family.eval(x0))
    dH = assemble(family.derivative(x0))
    rho = gibbs(H, beta).rho
    Phi = qbp_operator(H, dH, beta)
    return -0.5 * beta * (rho @ Phi + Phi @ rho) + beta * rho * np.trace(rho @ Phi)


def qbp_derivative_check(family: ParamFamily, x0, beta: float, fd_step: float) -> float:
    """Trace-norm residual between the finite-difference Gibbs derivative and the kernel formula."""
    fd = _central_difference(lambda x: gibbs(assemble(family.eval(x)), beta).rho, x0, fd_step)
    return trace_norm(fd - qbp_derivative_rhs(family, x0, beta))


# spectral flow -----------------------------------------------------------

def sf_filter(w: float, gamma: float) -> complex:
    """(w_hat(omega) - 1) / (i omega) for the triangular window of half-width gamma."""
    if w == 0.0:
        return 0.0
    if abs(w) <= gamma:
        return 1j * math.copysign(1.0, w) / gamma
    return 1j / w


def spectral_flow_operator(H, X, gamma: float) -> np.ndarray:
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    return _gap_filter(H, X, lambda w: sf_filter(w, gamma))


def sf_derivative_check(family: ParamFamily, x0, fd_step: float, gamma: float | None = None) -> float:
    """Residual of the ground-state derivative identity on the excited-space component."""
    H = assemble(family.eval(x0))
    gs = ground(H)
    if gamma is None:
        gamma = 0.5 * gs.gap
    if gs.gap <= gamma:
        raise ValueError("the filter width must be below the spectral gap")
    psi0 = gs.vector

    def aligned(x):
        v = ground(assemble(family.eval(x))).vector
        ov = np.vdot(psi0, v)
        return v * (abs(ov) / ov) if ov != 0 else v

    fd = _central_difference(aligned, x0, fd_step)
    rhs = 1j * spectral_flow_operator(H, assemble(family.derivative(x0)), gamma) @ psi0
    Q = np.eye(len(psi0)) - np.outer(psi0, psi0.conj())
    return float(np.linalg.norm(Q @ (fd - rhs)))


# truncation and indistinguishability --------------------------------------

def truncate_to_ball(O, lattice: Lattice, A, r: float) -> np.ndarray:
    """(1/d_out) I_out tensor tr_out[O], keeping the sites of B_r(A)."""
    keep = sorted(ball(lattice, A, r))
    if len(keep) == lattice.n:
        return np.asarray(O).copy()
    out_dims = [lattice.local_dims[s] for s in range(lattice.n) if s not in keep]
    red = partial_trace(O, lattice, keep) / int(np.prod(out_dims))
    return embed(red, keep, lattice)


@dataclass(frozen=True)
class GALIScan:
    radii: tuple
    differences: tuple
    decay_rate: float


def gali_scan(family: ParamFamily, A, O_A, mode: str, x, radii=(1, 2, 3), beta: float = 1.0) -> GALIScan:
    """|f(x, x) - f(0, x)| where the parameter is switched off outside B_{r0}(A)."""
    lat = family.lattice
    O = embed(np.asarray(O_A, dtype=complex), list(A), lat)

    def value(H):
        if mode == "gibbs":
            rho = gibbs(assemble(H), beta).rho
            return float(np.real(np.trace(O @ rho)))
        if mode == "ground":
            v = ground(assemble(H)).vector
            return float(np.real(np.vdot(v, O @ v)))
        raise ValueError(f"unknown mode {mode!r}")

    f_xx = value(family.eval(x))
    diffs = []
    for r0 in radii:
        region = frozenset(lat.sites) - ball(lat, A, r0)
        p = PartitionedFamily(family, region)
        diffs.append(abs(f_xx - value(p.eval2(0.0, x))))
    rate = math.nan
    d = np.array(diffs)
    if (d > 0).sum() >= 2:
        rate = float(-np.polyfit(np.array(radii)[d > 0], np.log(d[d > 0]), 1)[0])
    return GALIScan(tuple(radii), tuple(diffs), rate)
