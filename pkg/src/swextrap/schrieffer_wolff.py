"""Local Schrieffer-Wolff series for H(x) = H^(0) + sum_alpha x^alpha H^(alpha).

H^(0) is a sum of rank-1 ancilla penalties, Delta (1 - P_{0,i}).  The
generator T^(q) is assembled term by term from the exact-support Pauli
decomposition of V^(q) through the superoperator

    L_A(X) = Delta G_A Q_A X P_A - P_A X Q_A Delta G_A,

where Delta G_A is the pseudo-inverse of H^(0)|_A / Delta on its excited
space.  Two interchangeable strategies are provided: ``"local"`` keeps every
operator as a sum of local terms and takes commutators term-pairwise;
``"dense"`` works with full matrices and regroups only to build T^(q).  Both
give the same grouped series.
"""
from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .densekit import precision as pr
from .densekit.config import TOL
from .densekit.linalg import dagger, embed, hermiticity_defect, mat_exp, op_norm, trace_norm
from .errors import NotAGadget, TruncationOverflow
from .hamiltonian import (
    LocalHamiltonian,
    LocalOperator,
    assemble,
    canonicalize,
    commutator,
    f_norm,
    pauli_decompose,
)
from .lattice import FFunction, Lattice, f_constants, normalize
from .states import gibbs, ground_projector

KET0 = np.array([1.0, 0.0], dtype=complex)


def compositions(total: int, parts: int):
    """Ordered tuples of ``parts`` positive integers summing to ``total``, lexicographic."""
    if parts == 1:
        if total >= 1:
            yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in compositions(total - first, parts - 1):
            yield (first,) + rest


class SWContext:
    """Ancilla partition, penalty, local ground states and perturbation ladder H^(1..d)."""

    def __init__(self, lattice: Lattice, anc_sites, ladder, penalty: float = 1.0,
                 local_ground=None, F: FFunction | None = None):
        if penalty <= 0:
            raise ValueError("penalty must be strictly positive")
        self.lattice = lattice
        self.anc_sites = tuple(sorted(int(a) for a in anc_sites))
        lattice.check_sites(self.anc_sites)
        self.eff_sites = tuple(s for s in lattice.sites if s not in self.anc_sites)
        self.penalty = float(penalty)
        ladder = [L if isinstance(L, LocalHamiltonian) else
                  L.as_hamiltonian() if isinstance(L, LocalOperator) else LocalHamiltonian(lattice, L)
                  for L in ladder]
        # symmetrize so that every consumer sees the same exactly Hermitian ladder
        self.ladder = [LocalHamiltonian._from_dict(lattice, {k: (m + dagger(m)) / 2 for k, m in L.terms.items()})
                       for L in ladder]
        self.extended = any(L.is_extended for L in self.ladder)
        grounds = {}
        for a in self.anc_sites:
            v = KET0 if local_ground is None or a not in local_ground else np.asarray(local_ground[a], dtype=complex)
            v = v / np.linalg.norm(v)
            grounds[a] = v
        self.local_ground = grounds
        self.F = F if F is not None else normalize(FFunction("exp", lattice.dim_D, 1.0), lattice)
        self.normF, self.C_F = f_constants(self.F, lattice)
        self.J = max((f_norm(L, self.F) for L in self.ladder), default=0.0)
        self.theta = 64.0 * (1.0 + 4.0 * self.J / self.penalty) ** 2
        self.x_star = 1.0 / (self.theta * (2.0 + self.normF))
        self._cache: dict = {}

    # basic pieces -------------------------------------------------------
    @property
    def degree(self) -> int:
        return len(self.ladder)

    @property
    def eff_lattice(self) -> Lattice:
        return self.lattice.sublattice(self.eff_sites)

    def _like(self):
        return pr.to_extended(np.zeros(1)) if self.extended else np.zeros(1, dtype=complex)

    def _cast(self, M):
        return pr.to_extended(M) if self.extended else np.asarray(M, dtype=complex)

    def ground_proj(self, site: int) -> np.ndarray:
        v = self.local_ground[site]
        return self._cast(np.outer(v, v.conj()))

    def ladder_term(self, alpha: int) -> LocalOperator | None:
        if alpha == 0:
            return self.h0()
        if 1 <= alpha <= self.degree:
            return self.ladder[alpha - 1]
        return None

    def h0(self) -> LocalHamiltonian:
        key = "h0"
        if key not in self._cache:
            terms = {}
            for a in self.anc_sites:
                terms[(a,)] = pr.scalar(self.penalty, self._like()) * (pr.eye(2, self._like()) - self.ground_proj(a))
            self._cache[key] = LocalHamiltonian._from_dict(self.lattice, terms)
        return self._cache[key]

    def with_precision(self, bits: int | None) -> "SWContext":
        """A copy whose ladder is stored in double (``None``) or extended arithmetic."""
        conv = (lambda L: L.to_extended()) if bits else (lambda L: L.to_double())
        ctx = SWContext(self.lattice, self.anc_sites, [conv(L) for L in self.ladder], self.penalty,
                        self.local_ground, self.F)
        return ctx

    def summary(self) -> dict:
        return {"J": self.J, "Delta": self.penalty, "J_over_Delta": self.J / self.penalty,
                "theta": self.theta, "x_star": self.x_star, "normF": self.normF, "degree": self.degree,
                "n_anc": len(self.anc_sites)}


def projectors(ctx: SWContext, A) -> tuple[np.ndarray, np.ndarray]:
    """P_A = tensor of P_{0,i} over ancillas in A (identity elsewhere in A) and Q_A = 1 - P_A."""
    A = tuple(sorted(A))
    key = ("P", A, ctx.extended)
    if key not in ctx._cache:
        like = ctx._like()
        P = pr.eye(1, like)
        for s in A:
            f = ctx.ground_proj(s) if s in ctx.anc_sites else pr.eye(ctx.lattice.local_dims[s], like)
            P = np.kron(P, f)
        ctx._cache[key] = (P, pr.eye(P.shape[0], like) - P)
    return ctx._cache[key]


def _delta_g(ctx: SWContext, A: tuple) -> np.ndarray:
    """Delta times the pseudo-inverse of H^(0)|_A: sum over excited patterns of 1/(#excited)."""
    key = ("G", A, ctx.extended)
    if key not in ctx._cache:
        like = ctx._like()
        anc = [s for s in A if s in ctx.anc_sites]
        d = int(np.prod([ctx.lattice.local_dims[s] for s in A])) if A else 1
        G = pr.zeros((d, d), like)
        for pattern in itertools.product((0, 1), repeat=len(anc)):
            k = sum(pattern)
            if k == 0:
                continue
            M = pr.eye(1, like)
            flags = dict(zip(anc, pattern))
            for s in A:
                if s in flags:
                    P = ctx.ground_proj(s)
                    M = np.kron(M, pr.eye(2, like) - P if flags[s] else P)
                else:
                    M = np.kron(M, pr.eye(ctx.lattice.local_dims[s], like))
            G = G + M / k
        ctx._cache[key] = G
    return ctx._cache[key]


def _l_apply(ctx: SWContext, A: tuple, X: np.ndarray) -> np.ndarray:
    P, _ = projectors(ctx, A)
    G = _delta_g(ctx, A)
    return G @ X @ P - P @ X @ G


def offdiag(ctx: SWContext, A: tuple, X: np.ndarray) -> np.ndarray:
    P, Q = projectors(ctx, A)
    return P @ X @ Q + Q @ X @ P


def ondiag(ctx: SWContext, A: tuple, X: np.ndarray) -> np.ndarray:
    P, Q = projectors(ctx, A)
    return P @ X @ P + Q @ X @ Q


@dataclass(frozen=True)
class LReport:
    contraction: float
    support_leak: float
    intertwining: float


def l_super(ctx: SWContext, support, X, check: bool = True):
    """L_A applied to a term on ``support``; with ``check`` the three structural properties are verified.

    Returns the image (a matrix on the same support) and, when checked, an
    :class:`LReport` of the residuals: ||L(X)|| - ||X||, the norm of any part
    acting outside the support, and ||[H0, L(X)] - Delta offdiag(X)||.
    """
    A = tuple(sorted(support))
    X = ctx._cast(X)
    Y = _l_apply(ctx, A, X)
    if not check:
        return Y, None
    xd, yd = pr.to_double(X), pr.to_double(Y)
    contraction = op_norm(yd) - op_norm(xd)
    H0 = pr.to_double(_h0_on(ctx, A))
    lhs = H0 @ yd - yd @ H0
    rhs = ctx.penalty * pr.to_double(offdiag(ctx, A, X))
    inter = op_norm(lhs - rhs)
    leak = _support_leak(ctx, A, Y)
    return Y, LReport(contraction, leak, inter)


def _h0_on(ctx: SWContext, A: tuple) -> np.ndarray:
    like = ctx._like()
    d = int(np.prod([ctx.lattice.local_dims[s] for s in A])) if A else 1
    out = pr.zeros((d, d), like)
    dims = [ctx.lattice.local_dims[s] for s in A]
    for i, s in enumerate(A):
        if s in ctx.anc_sites:
            loc = pr.scalar(ctx.penalty, like) * (pr.eye(2, like) - ctx.ground_proj(s))
            out = out + embed(loc, [i], dims)
    return out


def _support_leak(ctx: SWContext, A: tuple, Y: np.ndarray) -> float:
    """Distance of the full-lattice image from (its partial trace onto A) tensor identity."""
    if ctx.lattice.dim > 256 or len(A) == ctx.lattice.n:
        return 0.0
    from .densekit.linalg import partial_trace
    full = embed(pr.to_double(Y), list(A), ctx.lattice)
    rest = [s for s in ctx.lattice.sites if s not in A]
    drest = int(np.prod([ctx.lattice.local_dims[s] for s in rest]))
    red = partial_trace(full, ctx.lattice, A) / drest
    return float(np.abs(full - embed(red, list(A), ctx.lattice)).max())


# the series -----------------------------------------------------------

@dataclass
class SWSeries:
    q_max: int
    V: list
    T: list
    Heff_coeffs: list
    leak: dict
    dropped: dict
    strategy: str
    extended: bool

    def v(self, q: int) -> LocalOperator:
        return self.V[q - 1]

    def t(self, q: int) -> LocalOperator:
        return self.T[q - 1]


def _generator(ctx: SWContext, V: LocalOperator) -> LocalOperator:
    """T = sum_A L_A(V_A) / Delta over the exact-support terms of V."""
    out = {}
    inv = 1 / pr.scalar(ctx.penalty, ctx._like()) if ctx.penalty != 1.0 else None
    for A, m in V.terms.items():
        if not A or not any(s in ctx.anc_sites for s in A):
            continue
        Y = _l_apply(ctx, A, m)
        if inv is not None:
            Y = Y * inv
        out[A] = Y
    return LocalOperator._from_dict(ctx.lattice, out)


def _prune_threshold(ctx: SWContext) -> float:
    scale = pr.epsilon(ctx._like()) / np.finfo(float).eps if ctx.extended else 1.0
    return TOL.sw_prune * ctx.penalty * scale


def _prune(ctx: SWContext, op: LocalOperator, dropped: list) -> LocalOperator:
    thr = _prune_threshold(ctx)
    keep = {}
    for k, v in op.terms.items():
        nrm = float(pr.fro_norm(v))
        if nrm >= thr:
            keep[k] = v
        else:
            dropped.append(nrm)
    if len(keep) > TOL.term_cap:
        raise TruncationOverflow(f"{len(keep)} terms exceed the cap of {TOL.term_cap}")
    return type(op)._from_dict(op.lattice, keep)


def sw_expand(ctx: SWContext, q_max: int | None = None, strategy: str = "auto") -> SWSeries:
    """Compute V^(1..q_max), T^(1..q_max) and the effective-Hamiltonian coefficients."""
    d = ctx.degree
    q_max = d + 3 if q_max is None else int(q_max)
    if q_max < 1:
        raise ValueError("q_max must be at least 1")
    if strategy == "auto":
        strategy = "dense" if (ctx.extended and ctx.lattice.dim <= 256) else "local"
    if strategy not in ("local", "dense"):
        raise ValueError(f"unknown strategy {strategy!r}")
    if strategy == "local":
        V, T, dropped = _expand_local(ctx, q_max)
    else:
        V, T, dropped = _expand_dense(ctx, q_max)
    leak = {q: _p0_norm(ctx, V[q - 1]) for q in range(1, min(d, q_max + 1))}
    heff = [sandwich(ctx, V[q - 1]) for q in range(d, q_max + 1)]
    return SWSeries(q_max, V, T, heff, leak, dropped, strategy, ctx.extended)


def _order_sum(ctx, q, nested, H_terms, zero, add, scale):
    """Right-hand side of the V^(q) recursion for q >= 2; ``scale(op, n)`` divides by n."""
    d = ctx.degree
    acc = H_terms[q] if q <= d else zero
    for r in range(2, q + 1):
        for comp in compositions(q, r):
            acc = add(acc, scale(nested(comp, 0), math.factorial(r)))
    for alpha in range(1, min(q - 1, d) + 1):
        for r in range(1, q - alpha + 1):
            for comp in compositions(q - alpha, r):
                acc = add(acc, scale(nested(comp, alpha), math.factorial(r)))
    return acc


def _expand_local(ctx: SWContext, q_max: int):
    lat = ctx.lattice
    H_terms = {a: ctx.ladder_term(a).canonical() for a in range(0, ctx.degree + 1)}
    V, T, dropped = [], [], {}
    memo: dict = {}

    def nested(comp, alpha):
        if not comp:
            return H_terms[alpha]
        key = (comp, alpha)
        if key not in memo:
            memo[key] = commutator(T[comp[0] - 1], nested(comp[1:], alpha))
        return memo[key]

    zero = LocalOperator(lat)
    like = ctx._like()

    def scale(op, n):
        return op.scaled(1 / pr.scalar(n, like)) if ctx.extended else op.scaled(1.0 / n)

    for q in range(1, q_max + 1):
        if q == 1:
            acc = H_terms[1] if ctx.degree >= 1 else zero
        else:
            acc = _order_sum(ctx, q, nested, H_terms, zero, lambda a, b: a + b, scale)
        drops: list = []
        Vq = _prune(ctx, canonicalize(acc.as_operator()), drops)
        Vq = LocalHamiltonian._from_dict(lat, Vq.terms)
        Tq = _prune(ctx, _generator(ctx, Vq), drops)
        V.append(Vq)
        T.append(Tq)
        dropped[q] = float(sum(drops))
    return V, T, dropped


def _expand_dense(ctx: SWContext, q_max: int):
    lat = ctx.lattice
    like = ctx._like()
    H_full = {a: assemble(ctx.ladder_term(a), like) for a in range(0, ctx.degree + 1)}
    Z = pr.zeros((lat.dim, lat.dim), like)
    V, T, Tf, dropped = [], [], [], {}
    memo: dict = {}

    def nested(comp, alpha):
        if not comp:
            return H_full[alpha]
        key = (comp, alpha)
        if key not in memo:
            inner = nested(comp[1:], alpha)
            t = Tf[comp[0] - 1]
            memo[key] = t @ inner - inner @ t
        return memo[key]

    def scale(M, n):
        return M / n

    for q in range(1, q_max + 1):
        if q == 1:
            acc = H_full[1] if ctx.degree >= 1 else Z
        else:
            acc = _order_sum(ctx, q, nested, H_full, Z, lambda a, b: a + b, scale)
        drops: list = []
        Vq = _prune(ctx, pauli_decompose((acc + dagger(acc)) / 2, lat), drops)
        Tq = _prune(ctx, _generator(ctx, Vq), drops)
        V.append(Vq)
        T.append(Tq)
        Tf.append(assemble(Tq, like))
        dropped[q] = float(sum(drops))
    return V, T, dropped


# effective Hamiltonian -------------------------------------------------

def sandwich(ctx: SWContext, V: LocalOperator) -> LocalOperator:
    """<0_anc| V |0_anc> term by term, as an operator on the effective lattice."""
    eff = ctx.eff_lattice
    index = {s: i for i, s in enumerate(ctx.eff_sites)}
    like = ctx._like()
    out: dict = {}
    for A, m in V.terms.items():
        W = pr.eye(1, like)
        for s in A:
            if s in ctx.anc_sites:
                W = np.kron(W, ctx._cast(ctx.local_ground[s].reshape(2, 1)))
            else:
                W = np.kron(W, pr.eye(ctx.lattice.local_dims[s], like))
        me = dagger(W) @ m @ W
        key = tuple(index[s] for s in A if s not in ctx.anc_sites)
        out[key] = out[key] + me if key in out else me
    res = LocalOperator._from_dict(eff, out)
    if eff.is_qubit and eff.n:
        res = canonicalize(res)
    if all(hermiticity_defect(v) <= 1e-9 for v in res.terms.values()):
        return LocalHamiltonian._from_dict(eff, res.terms)
    return res


def _p0_norm(ctx: SWContext, V: LocalOperator) -> float:
    """||P0 V P0||_op via the sandwiched operator on the effective lattice."""
    S = sandwich(ctx, V)
    if not S.terms:
        return 0.0
    return op_norm(pr.to_double(assemble(S)))


def effective_hamiltonian(ctx: SWContext, series: SWSeries, x) -> LocalOperator:
    """H_eff(x) = sum_{q=0}^{q_max-d} x^q H_eff^(q)."""
    tol = TOL.gadget * ctx.penalty
    bad = {q: v for q, v in series.leak.items() if v > tol}
    if bad:
        raise NotAGadget(f"||P0 V^(q) P0|| exceeds {tol:g} at orders {sorted(bad)}")
    xs = pr.scalar(x, ctx._like()) if ctx.extended else x
    out = LocalOperator(ctx.eff_lattice)
    for q, H in enumerate(series.Heff_coeffs):
        out = out + H.scaled(xs ** q)
    return out


# full-space checks ----------------------------------------------------

def _full_H(ctx: SWContext, x):
    like = ctx._like()
    xs = pr.scalar(x, like) if ctx.extended else x
    H = assemble(ctx.h0(), like)
    for a in range(1, ctx.degree + 1):
        H = H + assemble(ctx.ladder[a - 1], like) * xs ** a
    return H


def _full_T(ctx: SWContext, series: SWSeries, x, q_max: int):
    like = ctx._like()
    xs = pr.scalar(x, like) if ctx.extended else x
    Tm = pr.zeros((ctx.lattice.dim, ctx.lattice.dim), like)
    for q in range(1, q_max + 1):
        Tm = Tm + assemble(series.t(q), like) * xs ** q
    return Tm


def global_p0(ctx: SWContext) -> np.ndarray:
    like = ctx._like()
    P = pr.eye(ctx.lattice.dim, like)
    for a in ctx.anc_sites:
        P = P @ embed(ctx.ground_proj(a), [a], ctx.lattice)
    return P


def _rotated(ctx, series, x, q_max):
    q_max = series.q_max if q_max is None else q_max
    Tm = _full_T(ctx, series, x, q_max)
    # T is anti-Hermitian, so e^{-T} is the adjoint of e^{T}
    U = mat_exp(Tm)
    Ui = dagger(U)
    return U @ _full_H(ctx, x) @ Ui, U, Ui


def block_residual(ctx: SWContext, series: SWSeries, x, q_max: int | None = None) -> float:
    """||P0 e^{T(x)} H(x) e^{-T(x)} (1 - P0)||_op for the unrescaled H(x)."""
    if x > ctx.x_star:
        warnings.warn(f"x = {x:g} exceeds x_* = {ctx.x_star:g}", RuntimeWarning, stacklevel=2)
    R, _, _ = _rotated(ctx, series, x, q_max)
    P = global_p0(ctx)
    Q = pr.eye(P.shape[0], P) - P
    return op_norm(P @ R @ Q)


def block_diagonal_part(ctx: SWContext, series: SWSeries, x, q_max: int | None = None) -> LocalOperator:
    """sum_{q<=q_max} x^q sum_A ondiag_A(V_A^(q)), the truncated rotated perturbation."""
    q_max = series.q_max if q_max is None else q_max
    like = ctx._like()
    xs = pr.scalar(x, like) if ctx.extended else x
    out: dict = {}
    for q in range(1, q_max + 1):
        for A, m in series.v(q).terms.items():
            piece = ondiag(ctx, A, m) * xs ** q
            out[A] = out[A] + piece if A in out else piece
    return LocalHamiltonian._from_dict(ctx.lattice, out)


def remainder_norm(ctx: SWContext, series: SWSeries, x, q_max: int | None = None) -> float:
    """||e^{T} H e^{-T} - (H^(0) + truncated block-diagonal part)||_op."""
    R, _, _ = _rotated(ctx, series, x, q_max)
    like = ctx._like()
    Hbd = assemble(ctx.h0(), like) + assemble(block_diagonal_part(ctx, series, x, q_max), like)
    return op_norm(R - Hbd)


def _log_deficit_bound(c: float, beta_gap: float) -> float:
    """log(1 - exp(-c e^{-beta_gap})) evaluated without underflow."""
    lu = math.log(c) - beta_gap
    if lu < -30:
        return lu
    return math.log(-math.expm1(-math.exp(lu)))


def _logsumexp_neg(beta, energies) -> float:
    """log sum exp(-beta E) for mpfr or float energies."""
    e0 = min(energies)
    s = sum(pr.exp(-beta * (e - e0)) for e in energies)
    return float(-beta * e0 + pr.log(s))


def subspace_checks(ctx: SWContext, series: SWSeries, x, beta: float,
                    ground_tol: float | None = None) -> dict:
    """Gibbs and ground-projector statements for the rescaled simulator at ``x``.

    The Gibbs distance is compared with its bound both literally and after
    adding the rigorous effect of truncating the series at q_max, which is
    2 beta x^-d ||remainder||.  The ground-block weight bound is checked on the
    truncated rotated Hamiltonian, whose perturbation is exactly
    block-diagonal, in log form so that deficits far below machine range
    remain comparable.
    """
    d = ctx.degree
    like = ctx._like()
    xs = pr.scalar(x, like) if ctx.extended else x
    scale = xs ** (-d)
    n_anc = len(ctx.anc_sites)
    c = 1.0 * n_anc  # (local dimension - 1) per ancilla, qubits
    H = _full_H(ctx, x) * scale
    R, U, Ui = _rotated(ctx, series, x, None)
    P0 = global_p0(ctx)
    Heff = effective_hamiltonian(ctx, series, x)
    Heff_full = assemble(Heff, like)

    # Gibbs statement
    rho = gibbs(H, beta).rho
    rho_eff = gibbs(Heff_full, beta).rho
    target = Ui @ (_eff_to_full(ctx, rho_eff) @ P0) @ U
    lhs = trace_norm(rho - target)
    log_bound = math.log(2 * c) - beta * ctx.penalty * float(scale) / 2
    bound = math.exp(log_bound) if log_bound > -700 else 0.0
    rem = remainder_norm(ctx, series, x)
    trunc = 2 * beta * float(scale) * rem
    out = {
        "x": float(x), "beta": beta,
        "gibbs_distance": lhs, "gibbs_bound": bound, "gibbs_log_bound": log_bound,
        "truncation_tolerance": trunc, "remainder_norm": rem,
        "gibbs_strict_pass": lhs <= bound, "gibbs_pass": lhs <= bound + trunc,
    }

    # restriction lemma on the block-diagonal truncated model at beta x^-d
    Vbd = block_diagonal_part(ctx, series, x)
    vF = f_norm(Vbd, ctx.F)
    beta_eff = beta * float(scale)
    Hbd = assemble(ctx.h0(), like) + assemble(Vbd, like)
    Qm = pr.eye(P0.shape[0], P0) - P0
    eP = _block_energies(Hbd, P0)
    eQ = _block_energies(Hbd, Qm)
    b = pr.scalar(beta_eff, like) if ctx.extended else beta_eff
    LP, LQ = _logsumexp_neg(b, eP), _logsumexp_neg(b, eQ)
    log_deficit = LQ - (max(LP, LQ) + math.log1p(math.exp(-abs(LP - LQ))))
    gap_eff = ctx.penalty - 3 * vF * ctx.normF
    log_def_bound = _log_deficit_bound(c, beta_eff * gap_eff)
    out.update({
        "V_fnorm": vF, "beta_eff": beta_eff,
        "p0_log_deficit": log_deficit, "p0_log_deficit_bound": log_def_bound,
        "p0_trace": -math.expm1(log_deficit) if log_deficit > -700 else 1.0,
        "p0_lower_bound": math.exp(-c * math.exp(-beta_eff * gap_eff)) if beta_eff * gap_eff < 700 else 1.0,
        "restriction_pass": log_deficit <= log_def_bound,
        "model_gibbs_log_distance": math.log(2) + log_deficit,
        "model_gibbs_pass": math.log(2) + log_deficit <= log_bound,
    })

    # ground projector statement
    hscale = 1.0 + op_norm(pr.to_double(Heff_full))
    tol = (ground_tol if ground_tol is not None else 1e-9) * hscale
    Pp, gap_p, kp = ground_projector(H, tol)
    Pe, gap_e, ke = ground_projector(Heff_full, tol)
    rotated = Ui @ (_eff_to_full(ctx, Pe) @ P0) @ U
    dist = op_norm(Pp - rotated)
    res = block_residual(ctx, series, x) if x <= ctx.x_star else _quiet_residual(ctx, series, x)
    tol3 = 10 * float(scale) * res / gap_e if gap_e > 0 else math.inf
    out.update({
        "projector_distance": dist, "projector_tolerance": tol3, "block_residual": res,
        "gap_eff": gap_e, "ground_dim": ke, "ground_dim_full": kp,
        "projector_pass": (dist <= tol3) and kp == ke,
    })
    return out


def _quiet_residual(ctx, series, x):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return block_residual(ctx, series, x)


def _block_energies(H, P) -> list:
    """Eigenvalues of H restricted to the range of the (diagonal-basis) projector P."""
    from .densekit.linalg import herm_eig
    eig = herm_eig(P, check=False)
    vals = pr.real_values(eig.values)
    B = eig.vectors[:, vals > 0.5]
    sub = dagger(B) @ H @ B
    return list(herm_eig((sub + dagger(sub)) / 2, check=False).values)


def _eff_to_full(ctx: SWContext, M: np.ndarray) -> np.ndarray:
    """Embed an operator on the effective sites into the full lattice (identity on ancillas)."""
    return embed(M, list(ctx.eff_sites), ctx.lattice)


def series_bounds(ctx: SWContext, series: SWSeries) -> list[dict]:
    """Per-order F-norms of V^(q), T^(q) against Delta theta^q / 16 and theta^q / 16."""
    rows = []
    for q in range(1, series.q_max + 1):
        vF = f_norm(series.v(q), ctx.F)
        tF = f_norm(series.t(q), ctx.F)
        vb = ctx.penalty * ctx.theta ** q / 16
        tb = ctx.theta ** q / 16
        rows.append({"q": q, "V_fnorm": vF, "V_bound": vb, "T_fnorm": tF, "T_bound": tb,
                     "pass": vF <= vb and tF <= tb, "dropped": series.dropped.get(q, 0.0)})
    return rows


def structural_checks(ctx: SWContext, series: SWSeries) -> dict:
    """Hermiticity of V^(q), anti-Hermiticity of T^(q), block-diagonality of V + [T, H0], locality."""
    kp = max((max((len(s) for s in L.terms), default=0) for L in ctx.ladder), default=1)
    worst_v = worst_t = worst_bd = 0.0
    locality_ok = True
    H0 = ctx.h0()
    for q in range(1, series.q_max + 1):
        V, T = series.v(q), series.t(q)
        for m in V.terms.values():
            worst_v = max(worst_v, hermiticity_defect(m))
        for m in T.terms.values():
            md = pr.to_double(m)
            nrm = float(np.linalg.norm(md))
            if nrm:
                worst_t = max(worst_t, float(np.abs(md + md.conj().T).max()) / nrm)
        S = (V + commutator(T, H0, canonical=False)).as_operator()
        for A, m in S.terms.items():
            if not A:
                continue
            od = pr.to_double(offdiag(ctx, A, m))
            worst_bd = max(worst_bd, float(np.abs(od).max()) / (ctx.penalty * ctx.theta ** q))
        if V.max_support() > q * (kp - 1) + 1:
            locality_ok = False
    return {"V_hermiticity": worst_v, "T_antihermiticity": worst_t,
            "block_diagonality": worst_bd, "locality": locality_ok}
