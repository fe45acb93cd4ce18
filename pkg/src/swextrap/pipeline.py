"""End-to-end runs: sample a gadget simulator at Chebyshev nodes, extrapolate to
x = 0 and compare with the target computed from the validated effective Hamiltonian."""
from __future__ import annotations

import csv
import json
import math
import time
import warnings
from dataclasses import dataclass, field

import gmpy2
import numpy as np

from .densekit import precision as pr
from .densekit.config import TOL
from .densekit.linalg import dagger, embed, herm_eig, partial_trace
from .errors import Degenerate, NotAGadget, TooLarge
from .extrapolation import chebyshev_nodes, plan as plan_nodes, richardson, uniform_noise
from .gadgets import GadgetSpec, random_hermitian, simulator_eval, spec_from_json, validate
from .hamiltonian import PAULI, pauli_word
from .states import correlation_scan, gibbs

MAX_DIM = 4096


@dataclass
class ExperimentConfig:
    """Parsed experiment description; see the README for the JSON layout."""

    gadget: dict
    mode: str = "ground"
    beta: float = 1.0
    degenerate: str = "average"
    observable: list = field(default_factory=lambda: [((0,), "Z", 1.0)])
    extensive: bool = False
    m: int | None = 6
    x_max: float | None = None
    x_max_frac: float | None = 0.5
    epsilon: float | None = None
    M: float | None = None
    R: float | None = None
    noise_delta: float = 0.0
    noise_seed: int = 0
    q_max: int | None = None
    precision: object = "auto"
    tolerance: float | None = None
    invariants: list = field(default_factory=list)
    seed: int = 0

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        if "gadget" not in d:
            raise ValueError("config needs a 'gadget' entry")
        mode = d.get("mode", {"kind": "ground"})
        if isinstance(mode, str):
            mode = {"kind": mode}
        kind = mode.get("kind", "ground")
        if kind not in ("ground", "gibbs"):
            raise ValueError(f"unknown mode {kind!r}")
        obs = d.get("observable", {"terms": [{"sites": [0], "pauli": "Z"}]})
        extensive = "extensive" in obs
        if extensive:
            sites = obs.get("sites")
            terms = [("extensive", obs["extensive"], float(obs.get("coeff", 1.0)), sites)]
        else:
            terms = [(tuple(t["sites"]), t["pauli"], float(t.get("coeff", 1.0))) for t in obs["terms"]]
            for sites, word, _ in terms:
                if len(word) != len(sites):
                    raise ValueError(f"Pauli word {word!r} does not match sites {list(sites)}")
        p = d.get("plan", {"m": 6, "x_max_frac": 0.5})
        noise = d.get("noise", {"kind": "none"})
        delta = float(noise.get("delta", 0.0)) if noise.get("kind", "none") == "uniform" else 0.0
        cfg = cls(
            gadget=d["gadget"], mode=kind, beta=float(mode.get("beta", 1.0)),
            degenerate=mode.get("degenerate", "average"), observable=terms, extensive=extensive,
            m=p.get("m"), x_max=p.get("x_max"), x_max_frac=p.get("x_max_frac"),
            epsilon=p.get("epsilon"), M=p.get("M"), R=p.get("R"),
            noise_delta=delta, noise_seed=int(noise.get("seed", d.get("seed", 0))),
            q_max=d.get("q_max"), precision=d.get("precision", "auto"),
            tolerance=d.get("tolerance"), invariants=list(d.get("invariants", [])),
            seed=int(d.get("seed", 0)),
        )
        if cfg.degenerate not in ("average", "strict"):
            raise ValueError("degenerate must be 'average' or 'strict'")
        if cfg.m is None and cfg.epsilon is None:
            raise ValueError("plan needs either m or epsilon, M, R")
        return cfg

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


@dataclass
class Report:
    data: dict
    timing: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(v is not False for v in self.data.get("pass", {}).values())

    def to_dict(self, timing: bool = True) -> dict:
        out = dict(self.data)
        if timing:
            out["timing"] = dict(self.timing)
        return out

    def to_json(self, timing: bool = True) -> str:
        return json.dumps(self.to_dict(timing), indent=2, sort_keys=True)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x_k", "f_prime", "noise", "max_strength"])
            for row in self.data["nodes"]:
                w.writerow([repr(row["x_k"]), repr(row["f_prime"]), repr(row["noise"]), repr(row["max_strength"])])
            for key in ("extrapolated", "exact", "abs_error", "budget", "M_emp", "alpha", "delta"):
                w.writerow([key, repr(self.data[key]), "", ""])
            w.writerow(["direct_abs_error", repr(self.data["direct"]["abs_error"]), "", ""])


# building blocks ---------------------------------------------------------

def _resolve_h(entry):
    if isinstance(entry, str):
        return entry
    if isinstance(entry, dict) and "random" in entry:
        return random_hermitian(np.random.default_rng(int(entry["random"])))
    a = np.asarray(entry, dtype=float)
    if a.shape == (2, 2, 2):
        return a[..., 0] + 1j * a[..., 1]
    return a


def build_gadget(gdata: dict, bits: int | None) -> GadgetSpec:
    gdata = dict(gdata)
    if "h" in gdata:
        gdata["h"] = [_resolve_h(h) for h in gdata["h"]]
    return spec_from_json(gdata, bits=bits)


def observable_terms(cfg: ExperimentConfig, spec: GadgetSpec) -> list:
    """(support on the full lattice, matrix, coefficient) for each observable term."""
    out = []
    for t in cfg.observable:
        if t[0] == "extensive":
            _, word, c, sites = t
            sites = spec.eff_sites if sites is None else tuple(sites)
            out.extend(((s,), PAULI[word], c) for s in sites)
        else:
            sites, word, c = t
            out.append((tuple(sites), pauli_word(word), c))
    eff = set(spec.eff_sites)
    for sites, _, _ in out:
        spec.lattice.check_sites(sites)
        if not set(sites) <= eff:
            raise ValueError(f"observable support {list(sites)} touches ancilla sites")
    return out


def _bits_for(precision, max_strength: float) -> int | None:
    if precision == "double":
        return None
    if precision == "auto":
        if max_strength * np.finfo(float).eps < 1e-12:
            return None
        return max(pr.DEFAULT_BITS, int(math.ceil(math.log2(max_strength))) + 160)
    return int(precision)


def zero_temperature_state(H, strict: bool = False, rel_tol: float | None = None):
    """Normalized projector onto the lowest eigenspace, and its dimension.

    Levels count as degenerate when they sit within ``rel_tol (1 + |E0|)`` of
    the ground energy, measured against the low-energy scale rather than the
    full operator norm (which the penalty blows up).
    """
    eig = herm_eig(H)
    vals = eig.values
    rel_tol = TOL.degeneracy if rel_tol is None else rel_tol
    e0 = vals[0]
    tol = rel_tol * (1 + abs(float(e0)))
    k = 1
    while k < len(vals) and float(vals[k] - e0) <= tol:
        k += 1
    if strict and k > 1:
        raise Degenerate(f"ground space of dimension {k}")
    V = eig.vectors[:, :k]
    like = V
    rho = V @ dagger(V)
    rho = rho / (pr.scalar(k, like) if pr.is_extended(like) else k)
    return rho, k


def _state(H, cfg: ExperimentConfig):
    if cfg.mode == "gibbs":
        return gibbs(H, cfg.beta).rho, None
    return zero_temperature_state(H, strict=cfg.degenerate == "strict")


def _expectation(O, rho):
    v = np.trace(O @ rho)
    return pr.real(v) if pr.is_extended(rho) else float(np.real(v))


def _to_float(v) -> float:
    return float(v)


def _finite_or_none(v):
    return float(v) if math.isfinite(v) else None


def _correlation_grid(rho_target, node_states, nodes, elat) -> dict:
    """Empirical (K, xi) of the target state and of each node state on the effective sites.

    Reported only: uniform decay constants over a family cannot be certified
    from a finite grid, so the worst fit is recorded alongside each point.
    """
    grid = []
    for x, rho in [(0.0, pr.to_double(rho_target))] + list(zip(map(float, nodes), node_states)):
        prof = correlation_scan(rho, elat)
        grid.append({"x": x, "K": _finite_or_none(prof.K), "xi": _finite_or_none(prof.xi),
                     "max_cov": float(prof.values.max()) if len(prof.values) else 0.0})
    Ks = [g["K"] for g in grid if g["K"] is not None]
    xis = [g["xi"] for g in grid if g["xi"] is not None]
    return {"grid": grid, "worst_K": max(Ks) if Ks else None, "worst_xi": max(xis) if xis else None,
            "note": "empirical fit, reported only"}


# experiment --------------------------------------------------------------

def run_experiment(cfg: ExperimentConfig) -> Report:
    """Sample f'(x_k) on the simulator, extrapolate and compare with the target value."""
    t_start = time.perf_counter()
    timing = {}
    probe = build_gadget(cfg.gadget, None)
    if probe.lattice.dim > MAX_DIM:
        raise TooLarge(f"Hilbert dimension {probe.lattice.dim} exceeds {MAX_DIM}")
    x_star = probe.ctx.x_star
    d = probe.degree
    Delta = probe.ctx.penalty

    # node plan
    if cfg.m is not None:
        m = int(cfg.m)
        x_max = float(cfg.x_max) if cfg.x_max is not None else float(cfg.x_max_frac) * x_star
        delta = cfg.noise_delta
    else:
        pl = plan_nodes(float(cfg.epsilon), float(cfg.M), float(cfg.R))
        m, x_max = pl.m, float(cfg.R) / 2
        delta = cfg.noise_delta if cfg.noise_delta else pl.delta
    clamped = False
    if x_max > x_star:
        warnings.warn(f"x_max = {x_max:.3e} exceeds x_* = {x_star:.3e}; clamping", stacklevel=2)
        x_max, clamped = x_star, True
    base = chebyshev_nodes(m, x_max)
    bits = _bits_for(cfg.precision, Delta * float(base.nodes[0]) ** (-d))

    def body():
        spec = build_gadget(cfg.gadget, bits) if bits else probe
        t0 = time.perf_counter()
        val = validate(spec, cfg.q_max)
        timing["validate"] = time.perf_counter() - t0
        if not val.is_gadget:
            raise NotAGadget(f"ancilla ground-space leak {max(val.leaks.values()):.3e}")
        plan = chebyshev_nodes(m, x_max, exact=bool(bits))
        terms = observable_terms(cfg, spec)
        like = spec.ctx._like()
        cast = (lambda M: pr.to_extended(M)) if bits else (lambda M: np.asarray(M, dtype=complex))
        lat = spec.lattice
        Os = [embed(cast(M), list(s), lat) for s, M, _ in terms]
        coeffs = [c for _, _, c in terms]
        noise = uniform_noise(m, delta, cfg.noise_seed) if delta > 0 else np.zeros(m)

        t0 = time.perf_counter()
        per_term = [[] for _ in terms]
        samples, rows, node_states = [], [], []
        xs = plan.exact_nodes if bits else plan.nodes
        for k in range(m):
            ev = simulator_eval(spec, xs[k])
            rho, _ = _state(ev.matrix, cfg)
            node_states.append(partial_trace(pr.to_double(rho), lat, spec.ctx.eff_sites))
            vals = [_expectation(O, rho) for O in Os]
            for j, v in enumerate(vals):
                per_term[j].append(v)
            f = sum((c * v for c, v in zip(coeffs, vals)), gmpy2.mpfr(0) if bits else 0.0)
            f = f + (gmpy2.mpfr(float(noise[k])) if bits else float(noise[k]))
            samples.append(f)
            rows.append({"x_k": float(plan.nodes[k]), "f_prime": _to_float(f),
                         "noise": float(noise[k]), "max_strength": float(Delta * float(plan.nodes[k]) ** (-d))})
        timing["sampling"] = time.perf_counter() - t0

        est = richardson(plan, samples, delta=delta)
        c0 = est.c0_exact if est.c0_exact is not None else est.c0_hat

        # reference from the validated effective Hamiltonian at x = 0
        from .hamiltonian import assemble
        ctx = spec.ctx
        Htar = assemble(val.H_tar, like)
        index = {s: i for i, s in enumerate(ctx.eff_sites)}
        elat = ctx.eff_lattice
        rho_t, kdeg = _state(Htar, cfg)
        exact = sum((c * _expectation(embed(cast(M), [index[s] for s in sup], elat), rho_t)
                     for (sup, M, c) in terms), gmpy2.mpfr(0) if bits else 0.0)
        err = abs(c0 - exact)
        direct_err = abs(samples[0] - exact)
        correlations = _correlation_grid(rho_t, node_states, plan.nodes, elat)

        # rounding of the arithmetic itself, amplified by the weights
        eps = 2.0 ** (-bits) if bits else float(np.finfo(float).eps)
        roundoff = 1e4 * plan.alpha * eps * (1 + max(abs(r["f_prime"]) for r in rows))
        out = {
            "m": m, "x_max": x_max, "x_star": x_star, "clamped": clamped, "degree": d,
            "precision_bits": bits or 53, "mode": cfg.mode,
            "beta": cfg.beta if cfg.mode == "gibbs" else None,
            "alpha": plan.alpha, "delta": delta,
            "nodes": rows,
            "extrapolated": est.c0_hat, "exact": _to_float(exact), "abs_error": _to_float(err),
            "budget": est.budget, "roundoff": roundoff, "M_emp": est.M,
            "M_note": "heuristic: four times the largest sampled magnitude",
            "direct": {"x": rows[0]["x_k"], "max_strength": rows[0]["max_strength"],
                       "f_prime": rows[0]["f_prime"], "abs_error": _to_float(direct_err)},
            "target_ground_dim": kdeg,
            "correlations": correlations,
            "validation": {"is_gadget": val.is_gadget, "target_error": val.target_error,
                           "leaks": {str(q): float(v) for q, v in sorted(val.leaks.items())}},
        }
        passes = {
            "gadget": bool(val.is_gadget),
            "within_budget": bool(_to_float(err) <= est.budget + roundoff),
            "noise_bounded": bool(np.all(np.abs(noise) <= delta)),
        }
        if cfg.tolerance is not None:
            passes["within_tolerance"] = bool(_to_float(err) <= float(cfg.tolerance))
        if len(terms) > 1:
            parts = [richardson(plan, [c * v for v in vs], delta=0.0) for c, vs in zip(coeffs, per_term)]
            part_sum = sum((p.c0_exact if p.c0_exact is not None else p.c0_hat for p in parts),
                           gmpy2.mpfr(0) if bits else 0.0)
            noiseless = richardson(plan, [s - (gmpy2.mpfr(float(n)) if bits else float(n))
                                          for s, n in zip(samples, noise)])
            whole = noiseless.c0_exact if noiseless.c0_exact is not None else noiseless.c0_hat
            dev = _to_float(abs(part_sum - whole))
            out["linearity"] = {"per_term": [p.c0_hat for p in parts], "sum": _to_float(part_sum),
                                "whole": _to_float(whole), "deviation": dev}
            passes["linearity"] = bool(dev <= 1e-10)
        out["pass"] = passes
        return out

    if bits:
        with pr.extended(bits):
            data = body()
    else:
        data = body()

    if cfg.invariants:
        from .invariants import run_invariants
        inv = {}
        for name in cfg.invariants:
            r = run_invariants(name, cfg.seed, sizes="minimal")
            inv[name] = r.to_dict()
            data["pass"][f"invariants_{name}"] = r.passed
        data["invariants"] = inv
    timing["total"] = time.perf_counter() - t_start
    return Report(data, timing)


def run_config_file(path, out=None, csv_path=None) -> Report:
    report = run_experiment(ExperimentConfig.load(path))
    if out:
        with open(out, "w") as fh:
            fh.write(report.to_json())
    if csv_path:
        report.write_csv(csv_path)
    return report
