"""Seeded property suites over every module; each check row is (name, value, bound, pass)."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import UnknownSuite

SIZES = {
    "minimal": {"draws": 20, "eig_dim": 32, "pairs": 10, "trace": 200, "chain": 6, "sw_terms": 30, "combos": 2},
    "default": {"draws": 100, "eig_dim": 256, "pairs": 50, "trace": 200, "chain": 8, "sw_terms": 100, "combos": 5},
}


@dataclass
class InvariantReport:
    suite: str
    seed: int
    rows: list = field(default_factory=list)
    seconds: float = 0.0

    def add(self, name: str, value, bound, ok=None) -> None:
        value = float(value) if value is not None else None
        bound = float(bound) if bound is not None else None
        if ok is None:
            ok = value is not None and bound is not None and value <= bound
        self.rows.append({"name": name, "value": value, "bound": bound, "pass": bool(ok)})

    @property
    def passed(self) -> bool:
        return all(r["pass"] for r in self.rows)

    @property
    def counts(self) -> tuple[int, int]:
        return sum(r["pass"] for r in self.rows), len(self.rows)

    def to_dict(self) -> dict:
        ok, n = self.counts
        return {"suite": self.suite, "seed": self.seed, "passed": ok, "total": n, "rows": self.rows}


def _herm(rng, n, scale=1.0):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return scale * (a + a.conj().T) / 2


# suites ---------------------------------------------------------------

def suite_linalg(rep: InvariantReport, rng, sz) -> None:
    from .densekit.linalg import embed, herm_eig, mat_exp, op_norm, partial_trace, trace_norm
    from .lattice import chain
    for i in range(sz["draws"]):
        n = int(rng.integers(1, sz["eig_dim"] + 1))
        H = _herm(rng, n)
        e = herm_eig(H)
        U = e.vectors
        r = op_norm(U @ np.diag(e.values) @ U.conj().T - H)
        rep.add(f"eig_reconstruction[{n}]", r, 1e-9 * (1 + op_norm(H)))
    for i in range(sz["draws"]):
        n = int(rng.integers(1, 9))
        A = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        A *= rng.uniform(0, 5) / op_norm(A)
        rep.add(f"exp_inverse[{n}]", op_norm(mat_exp(A) @ mat_exp(-A) - np.eye(n)), 1e-9)
    lat = chain(4)
    for i in range(sz["draws"] // 2):
        A = sorted(rng.choice(4, size=int(rng.integers(1, 3)), replace=False).tolist())
        t = _herm(rng, 2 ** len(A))
        R = _herm(rng, 16)
        rho = R @ R
        rho /= np.trace(rho)
        lhs = np.trace(embed(t, A, lat) @ rho)
        rhs = np.trace(t @ partial_trace(rho, lat, A))
        rep.add(f"partial_trace_duality{A}", abs(lhs - rhs), 1e-10)
    for i in range(sz["draws"]):
        n = int(rng.integers(1, 33))
        X = _herm(rng, n, rng.uniform(0.1, 2))
        Y = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        Y *= rng.uniform(0, 2) / op_norm(Y)
        lhs = trace_norm(mat_exp(X + Y))
        rhs = math.exp(op_norm(Y)) * float(np.real(np.trace(mat_exp(X))))
        rep.add(f"exp_trace_norm_bound[{n}]", lhs / rhs, 1 + 1e-10)


def suite_fnorm(rep: InvariantReport, rng, sz) -> None:
    from .hamiltonian import LocalHamiltonian, assemble, commutator, f_norm, pauli_decompose
    from .lattice import FFunction, ball, chain, f_constants, grid, normalize, ring
    for lat in (chain(6), ring(5), grid(2, 3)):
        ok = True
        for i in lat.sites:
            sizes = [len(ball(lat, [i], r)) for r in range(0, int(lat.diameter) + 2)]
            ok &= all(a <= b for a, b in zip(sizes, sizes[1:]))
        rep.add(f"ball_monotone[n={lat.n}]", None, None, ok)
        kD = lat.k_D()
        worst = max(len(ball(lat, [i], r)) / (kD * r ** lat.dim_D)
                    for i in lat.sites for r in range(1, int(lat.diameter) + 2))
        rep.add(f"ball_growth[n={lat.n}]", worst, 1 + 1e-12)
        for F in (FFunction("exp", lat.dim_D, 1.0), FFunction("power", lat.dim_D, 3.0)):
            _, C_F = f_constants(F, lat)
            rep.add(f"C_F_ge_F0[{F.kind}]", F(0) - C_F, 1e-12)

    def random_2local(lat):
        terms = {}
        for i in lat.sites:
            terms[(i,)] = _herm(rng, 2)
            if i + 1 < lat.n and rng.random() < 0.8:
                terms[(i, i + 1)] = _herm(rng, 4)
        return LocalHamiltonian(lat, terms)

    for k in range(sz["pairs"]):
        n = int(rng.integers(2, 7))
        lat = chain(n)
        F = normalize(FFunction("exp", 1, float(rng.uniform(0.5, 2))), lat)
        X, Y = random_2local(lat), random_2local(lat)
        C = commutator(X, Y)
        rep.add(f"commutator_fnorm[n={n}]", f_norm(C, F) / (4 * f_norm(X, F) * f_norm(Y, F)), 1.0)
        rep.add(f"fnorm_subadditive[n={n}]", f_norm(X + Y, F) - f_norm(X, F) - f_norm(Y, F), 1e-10)
        back = pauli_decompose(assemble(X), lat)
        rep.add(f"pauli_roundtrip[n={n}]", np.abs(assemble(back) - assemble(X)).max(), 1e-12)


def suite_traceineq(rep: InvariantReport, rng, sz) -> None:
    from .densekit.linalg import op_norm
    from .states import expect, gibbs, perturbed_expectation, trace_ratio
    for k in range(sz["trace"]):
        n = int(rng.integers(1, 33))
        X = _herm(rng, n, rng.uniform(0.1, 3))
        Y = _herm(rng, n)
        Y *= rng.uniform(0, math.log(2)) / op_norm(Y)
        w, lo, hi = trace_ratio(X, Y)
        rep.add(f"trace_ratio[{n}]", None, None, lo - 1e-12 <= w <= hi + 1e-12)
    for k in range(max(2, sz["draws"] // 10)):
        n = int(rng.integers(2, 17))
        H = _herm(rng, n)
        b, h = float(rng.uniform(0.2, 3)), 1e-4
        dlogZ = (gibbs(H, b + h).logZ - gibbs(H, b - h).logZ) / (2 * h)
        E = expect(H, gibbs(H, b))
        rep.add(f"dlogZ_dbeta[{n}]", abs(dlogZ + E) / max(1.0, abs(E)), 1e-6)
    for k in range(max(2, sz["draws"] // 10)):
        n = int(rng.integers(2, 33))
        H = _herm(rng, n)
        beta = float(rng.uniform(0.3, 3))
        V0 = _herm(rng, n)
        O = _herm(rng, n)
        R = math.log(1.5) / (beta * op_norm(V0))
        worst = max(abs(perturbed_expectation(H, V0, O, beta, z)) for z in np.linspace(0, R, 5))
        rep.add(f"small_perturbation_bound[{n}]", worst / op_norm(O), 3.0)


def suite_qbp(rep: InvariantReport, rng, sz) -> None:
    from .densekit.linalg import op_norm
    from .models import qubit_family, tfim_family
    from .quasiloc import qbp_derivative_check, qbp_operator, qbp_transform
    for beta in (0.5, 1.0, 2.0, 5.0):
        rep.add(f"khat0[beta={beta}]", abs(qbp_transform(0.0, beta) - 1), 1e-8)
        w = rng.uniform(0, 20, size=5)
        x = beta * w / 2
        dev = max(abs(qbp_transform(wi, beta) - math.tanh(xi) / xi) for wi, xi in zip(w, x))
        rep.add(f"khat_closed_form[beta={beta}]", dev, 1e-9)
    H = _herm(rng, 8)
    X = _herm(rng, 8)
    P = qbp_operator(H, X, 1.0)
    rep.add("qbp_hermitian", op_norm(P - P.conj().T), 1e-10)
    rep.add("qbp_identity", op_norm(qbp_operator(H, np.eye(8), 1.0) - np.eye(8)), 1e-8)
    rep.add("qbp_commuting", op_norm(qbp_operator(H, H @ H, 1.0) - H @ H), 1e-8 * op_norm(H @ H))
    for name, fam, x0 in (("qubit", qubit_family(), 0.0), ("tfim4", tfim_family(4, hx=0.7), 0.3)):
        r1 = qbp_derivative_check(fam, x0, 1.0, 1e-3)
        r2 = qbp_derivative_check(fam, x0, 1.0, 5e-4)
        rep.add(f"qbp_derivative[{name}]", r1, 1e-5)
        rep.add(f"qbp_derivative_halving[{name}]", r2 / r1, 1 / 3.5)


def suite_spectralflow(rep: InvariantReport, rng, sz) -> None:
    from .densekit.linalg import op_norm
    from .models import qubit_family, tfim_family
    from .quasiloc import sf_derivative_check, sf_filter, spectral_flow_operator
    gamma = float(rng.uniform(0.2, 2))
    ws = rng.normal(scale=3, size=50)
    odd = max(abs(sf_filter(w, gamma) + sf_filter(-w, gamma)) for w in ws)
    rep.add("filter_odd", odd, 1e-15)
    rep.add("filter_bounded", max(abs(sf_filter(w, gamma)) for w in ws) * gamma, 1 + 1e-12)
    H = _herm(rng, 6)
    rep.add("sf_identity", op_norm(spectral_flow_operator(H, np.eye(6), gamma)), 1e-12)
    for name, fam, x0, g in (("qubit", qubit_family(), 0.0, 1.0), ("tfim5", tfim_family(5, hx=0.5, hz=0.3), 0.2, None)):
        r1 = sf_derivative_check(fam, x0, 1e-3, g)
        r2 = sf_derivative_check(fam, x0, 5e-4, g)
        rep.add(f"sf_derivative[{name}]", r1, 1e-5)
        rep.add(f"sf_derivative_halving[{name}]", r2 / r1, 1 / 3.5)


def _monotone_decreasing(v, allowed: int = 0, strict: bool = False) -> bool:
    bad = sum(1 for a, b in zip(v, v[1:]) if (b >= a if strict else b > a))
    return bad <= allowed


def suite_lr(rep: InvariantReport, rng, sz) -> None:
    from .densekit.linalg import embed, op_norm
    from .hamiltonian import PAULI, assemble
    from .lattice import chain
    from .models import ising
    from .quasiloc import heisenberg, lr_profile, qbp_operator, truncate_to_ball
    H = _herm(rng, 8)
    O = _herm(rng, 8)
    Ot = heisenberg(O, H, float(rng.uniform(0, 3)))
    rep.add("heisenberg_spectrum", np.abs(np.linalg.eigvalsh(Ot) - np.linalg.eigvalsh(O)).max(), 1e-9)
    t = math.pi / 2 * rng.uniform()
    Xt = heisenberg(PAULI["X"], PAULI["Z"], t)
    ref = math.cos(2 * t) * PAULI["X"] - math.sin(2 * t) * PAULI["Y"]
    rep.add("heisenberg_two_level", op_norm(Xt - ref), 1e-10)
    n = sz["chain"]
    lat = chain(n)
    Hs = ising(lat, 1.0, 1.0, 0.0)
    prof = lr_profile(Hs, [0], PAULI["X"], list(range(1, n)), [0.25, 0.5, 1.0])
    for i, tt in enumerate(prof.times):
        rep.add(f"lr_monotone[t={tt}]", None, None, _monotone_decreasing(list(prof.norms[i])))
    rep.add("lr_bound", float(prof.norms.max()), 2.0 + 1e-10)
    nt = min(n, 6)
    lt = chain(nt)
    Hm = assemble(ising(lt, 1.0, 0.8, 0.2))
    Phi = qbp_operator(Hm, embed(PAULI["Z"], [0], lt), 1.0)
    errs = [op_norm(Phi - truncate_to_ball(Phi, lt, [0], r)) for r in range(nt)]
    rep.add("truncation_decreasing", None, None, _monotone_decreasing(errs, allowed=1))
    R = _herm(rng, 2 ** nt)
    rep.add("truncation_contraction", op_norm(truncate_to_ball(R, lt, [0], 2)) - op_norm(R), 1e-10)


def suite_gali(rep: InvariantReport, rng, sz) -> None:
    from .hamiltonian import PAULI
    from .models import tfim_family
    from .quasiloc import gali_scan
    n = sz["chain"]
    fam = tfim_family(n, hx=0.8, hz=0.2, probe="Z")
    g = gali_scan(fam, [0], PAULI["Z"], "gibbs", 0.3, (1, 2, 3), beta=1.0)
    rep.add("gali_gibbs_decreasing", None, None, _monotone_decreasing(list(g.differences), strict=True))
    fam = tfim_family(n, hx=1.5, hz=0.0, probe="Z")
    g = gali_scan(fam, [0], PAULI["Z"], "ground", 0.3, (1, 2, 3))
    rep.add("gali_ground_decreasing", None, None, _monotone_decreasing(list(g.differences), strict=True))
    g = gali_scan(fam, [0], PAULI["Z"], "gibbs", 0.0, (1, 2))
    rep.add("gali_zero", max(g.differences), 1e-12)


def _random_local_context(rng, n_anc: int):
    from .hamiltonian import LocalHamiltonian
    from .lattice import complete
    from .schrieffer_wolff import SWContext
    lat = complete(n_anc + 2)
    anc = list(range(2, 2 + n_anc))
    grounds = {}
    for a in anc:
        v = rng.normal(size=2) + 1j * rng.normal(size=2)
        grounds[a] = v / np.linalg.norm(v)
    return SWContext(lat, anc, [LocalHamiltonian(lat, {})], float(rng.uniform(0.5, 2)), grounds)


def check_l_super(rng, count: int) -> list[tuple]:
    """(name, relative residual) triples for the three structural properties of L_A."""
    from .densekit.linalg import op_norm
    from .schrieffer_wolff import l_super
    out = []
    for k in range(count):
        ctx = _random_local_context(rng, int(rng.integers(1, 4)))
        size = int(rng.integers(1, min(3, ctx.lattice.n) + 1))
        A = sorted(rng.choice(ctx.lattice.n, size=size, replace=False).tolist())
        d = 2 ** len(A)
        X = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        nx = op_norm(X)
        _, rep = l_super(ctx, A, X, check=True)
        out.append((f"L_contraction{A}", rep.contraction / nx))
        out.append((f"L_support{A}", rep.support_leak / nx))
        out.append((f"L_intertwining{A}", rep.intertwining / nx))
    return out


def suite_sw(rep: InvariantReport, rng, sz) -> None:
    from .gadgets import random_hermitian, three_to_two
    from .schrieffer_wolff import series_bounds, structural_checks, sw_expand
    for name, r in check_l_super(rng, sz["sw_terms"]):
        rep.add(name, r, 1e-10)
    g = three_to_two(*(random_hermitian(rng) for _ in range(3)))
    s = sw_expand(g.ctx, 5 if sz["draws"] < 100 else 6)
    for row in series_bounds(g.ctx, s):
        q = row["q"]
        rep.add(f"V_fnorm[q={q}]", row["V_fnorm"], row["V_bound"])
        rep.add(f"T_fnorm[q={q}]", row["T_fnorm"], row["T_bound"])
    st = structural_checks(g.ctx, s)
    rep.add("V_hermitian", st["V_hermiticity"], 1e-10)
    rep.add("T_antihermitian", st["T_antihermiticity"], 1e-10)
    rep.add("block_diagonal", st["block_diagonality"], 1e-10)
    rep.add("locality", None, None, st["locality"])


def suite_gadgets(rep: InvariantReport, rng, sz) -> None:
    from .densekit.linalg import op_norm
    from .gadgets import (combine, locality_floor, random_hermitian, simulator_eval, three_to_two,
                          three_to_two_ladder, validate, GadgetSpec)
    from .hamiltonian import assemble
    from .lattice import complete
    from .schrieffer_wolff import SWContext
    hs = [random_hermitian(rng) for _ in range(3)]
    g = three_to_two(*hs)
    v = validate(g)
    rep.add("leak", max(v.leaks.values()), 1e-9)
    rep.add("target", v.target_error, 1e-8)
    rep.add("two_local", max(len(s) for L in g.ctx.ladder for s in L.terms), 2)
    rep.add("locality_floor", None, None, locality_floor(3, 2) == 2 <= g.degree)
    x = g.ctx.x_star * rng.uniform(0.1, 1)
    ev = simulator_eval(g, x)
    pert = sum(assemble(g.ctx.ladder[a - 1]) * x ** (a - g.degree) for a in range(1, g.degree + 1))
    rep.add("simulator_lower_bound", -float(np.linalg.eigvalsh(ev.matrix)[0]) - op_norm(pert), 1e-6 * op_norm(pert))
    for k in range(sz["combos"]):
        lat = complete(6)
        specs = []
        for eff, anc in (((0, 1, 2), 4), ((1, 2, 3), 5)):
            ladder, tar = three_to_two_ladder(lat, eff, anc, *(random_hermitian(rng) for _ in range(3)))
            specs.append(GadgetSpec(SWContext(lat, [anc], ladder, 1.0), tar))
        vc = validate(combine(specs))
        rep.add(f"combination_target[{k}]", vc.target_error, 1e-8)


def suite_extrap(rep: InvariantReport, rng, sz) -> None:
    from .extrapolation import chebyshev_nodes, condition_closed_form, richardson, uniform_noise
    for m in range(1, 65):
        p = chebyshev_nodes(m, 1.0)
        rep.add(f"alpha_closed_form[m={m}]", abs(p.alpha - condition_closed_form(m)), 1e-10)
        if m >= 2:
            rep.add(f"alpha_log_bound[m={m}]", p.alpha, 3 * math.log(m))
        rep.add(f"weights_sum[m={m}]", abs(p.weights.sum() - 1), 1e-10)
    for m in range(2, 21):
        p = chebyshev_nodes(m, float(rng.uniform(0.1, 2)))
        c = rng.normal(size=m)
        f = np.polyval(c[::-1], p.nodes)
        rep.add(f"lagrange_exact[m={m}]", abs(richardson(p, f).c0_hat - c[0]) / max(1, np.abs(c).max()), 1e-10)
    m, x_max, delta = 10, 0.4, 1e-4
    p = chebyshev_nodes(m, x_max)
    fx = 1 / (1 + p.nodes)
    bound = (2 * delta + 2.0 ** (-m) * 2) * 3 * math.log(m)
    worst = 0.0
    for trial in range(100):
        nu = uniform_noise(m, delta, int(rng.integers(0, 2 ** 31)))
        worst = max(worst, abs(richardson(p, fx + nu).c0_hat - 1))
    rep.add("noise_robustness", worst, bound)


SUITES = {
    "linalg": suite_linalg, "fnorm": suite_fnorm, "traceineq": suite_traceineq, "qbp": suite_qbp,
    "spectralflow": suite_spectralflow, "lr": suite_lr, "gali": suite_gali, "sw": suite_sw,
    "gadgets": suite_gadgets, "extrap": suite_extrap,
}


def run_invariants(suite: str, seed: int = 0, sizes="default") -> InvariantReport:
    """Run one suite (or ``all``) deterministically from ``seed``."""
    sz = SIZES[sizes] if isinstance(sizes, str) else {**SIZES["default"], **sizes}
    names = list(SUITES) if suite == "all" else [suite]
    for n in names:
        if n not in SUITES:
            raise UnknownSuite(f"unknown suite {suite!r}; choose from {sorted(SUITES)} or 'all'")
    rep = InvariantReport(suite, seed)
    t0 = time.perf_counter()
    for n in names:
        sub = InvariantReport(n, seed)
        SUITES[n](sub, np.random.default_rng([seed, list(SUITES).index(n)]), sz)
        for r in sub.rows:
            rep.rows.append({**r, "name": f"{n}.{r['name']}" if suite == "all" else r["name"]})
    rep.seconds = time.perf_counter() - t0
    return rep
