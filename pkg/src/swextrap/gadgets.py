"""Gadget constructors, validation, combination and simulator assembly."""
from __future__ import annotations

import math
from dataclasses import dataclass

import gmpy2
import numpy as np

from .densekit import precision as pr
from .densekit.linalg import check_hermitian, mat_exp, op_norm
from .errors import AncillaCollision, DegreeTooHigh, InvalidArity, NonPositiveX
from .hamiltonian import PAULI, LocalHamiltonian, LocalOperator, assemble
from .lattice import FFunction, Lattice, complete
from .schrieffer_wolff import SWContext, SWSeries, _full_T, sw_expand


@dataclass
class GadgetSpec:
    """A simulator ladder with its ancilla partition and an optional claimed target.

    The target is stored on the full lattice with support inside the effective sites.
    """

    ctx: SWContext
    target: LocalOperator | None = None

    @property
    def eff_sites(self) -> tuple:
        return self.ctx.eff_sites

    @property
    def degree(self) -> int:
        return self.ctx.degree

    @property
    def lattice(self) -> Lattice:
        return self.ctx.lattice

    def target_on_eff(self) -> LocalOperator | None:
        return None if self.target is None else to_eff(self.ctx, self.target)

    def with_precision(self, bits: int | None) -> "GadgetSpec":
        return GadgetSpec(self.ctx.with_precision(bits), self.target)


def to_eff(ctx: SWContext, op: LocalOperator) -> LocalOperator:
    """Re-index an operator supported on effective sites onto the effective lattice."""
    index = {s: i for i, s in enumerate(ctx.eff_sites)}
    out = {}
    for A, m in op.terms.items():
        if any(s not in index for s in A):
            raise ValueError(f"support {A} touches ancilla sites")
        out[tuple(index[s] for s in A)] = m
    return type(op)._from_dict(ctx.eff_lattice, out)


def _hermitian_2x2(h, name) -> np.ndarray:
    h = PAULI[h] if isinstance(h, str) else np.asarray(h, dtype=complex)
    if h.shape != (2, 2):
        raise ValueError(f"{name} must be a 2x2 matrix")
    check_hermitian(h)
    return h


def random_hermitian(rng, max_norm: float = 1.0) -> np.ndarray:
    """Random 2x2 Hermitian matrix with operator norm in [max_norm / 4, max_norm]."""
    a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    h = (a + a.conj().T) / 2
    return h * (rng.uniform(0.25, 1.0) * max_norm / np.abs(np.linalg.eigvalsh(h)).max())


def three_to_two_ladder(lattice: Lattice, eff: tuple, anc: int, h1, h2, h3, bits: int | None = None):
    """H^(1), H^(2), H^(3) of the 3-to-2 gadget on effective sites ``eff`` and ancilla ``anc``.

    With penalty Delta = 1 on |1><1| of the ancilla, the ladder is
    H1 = (-h1 X + h2 X)/sqrt2 on the ancilla couplings minus h3 |1><1|,
    H2 = (h1^2 + h2^2)/2 - h1 h2 and H3 = (h1^2 + h2^2) h3 / 2.
    """
    a, b, c = eff
    hs = [_hermitian_2x2(h, f"h{i + 1}") for i, h in enumerate((h1, h2, h3))]
    if bits:
        hs = [pr.to_extended(h) for h in hs]
        like = hs[0]
        s2 = 1 / gmpy2.sqrt(gmpy2.mpfr(2))
        cast = pr.to_extended
    else:
        like = hs[0]
        s2 = 1 / math.sqrt(2)
        cast = lambda m: np.asarray(m, dtype=complex)
    h1, h2, h3 = hs
    X = cast(PAULI["X"])
    P1 = cast(np.diag([0.0, 1.0]))
    half = pr.scalar(0.5, like) if bits else 0.5
    H1 = {(a, anc): -np.kron(h1, X) * s2, (b, anc): np.kron(h2, X) * s2, (c, anc): -np.kron(h3, P1)}
    H2 = {(a,): h1 @ h1 * half, (b,): h2 @ h2 * half, (a, b): -np.kron(h1, h2)}
    H3 = {(a, c): np.kron(h1 @ h1, h3) * half, (b, c): np.kron(h2 @ h2, h3) * half}
    target = {(a, b, c): np.kron(np.kron(h1, h2), h3)}
    return ([LocalHamiltonian(lattice, H) for H in (H1, H2, H3)], LocalHamiltonian(lattice, target))


def three_to_two(h1, h2, h3, bits: int | None = None, F: FFunction | None = None) -> GadgetSpec:
    """Single 3-to-2 gadget: effective qubits 0, 1, 2 and ancilla 3 on a unit-distance lattice."""
    lat = complete(4)
    ladder, target = three_to_two_ladder(lat, (0, 1, 2), 3, h1, h2, h3, bits)
    return GadgetSpec(SWContext(lat, [3], ladder, 1.0, F=F), target)


@dataclass
class Validation:
    is_gadget: bool
    H_tar: LocalOperator
    eta: float
    leaks: dict
    target_error: float | None
    series: SWSeries

    def to_dict(self) -> dict:
        from .hamiltonian import to_json_terms
        return {"is_gadget": self.is_gadget, "eta": self.eta,
                "leaks": {str(k): v for k, v in self.leaks.items()},
                "target_error": self.target_error, "H_tar": to_json_terms(self.H_tar)}


def validate(spec: GadgetSpec, q_max: int | None = None, strategy: str = "auto") -> Validation:
    """Check P0 V^(q) P0 = 0 below the degree and recompute H_eff(0)."""
    from .densekit.config import TOL
    ctx = spec.ctx
    q_max = ctx.degree if q_max is None else q_max
    if q_max < ctx.degree:
        raise ValueError("q_max must be at least the degree")
    series = sw_expand(ctx, q_max, strategy)
    tol = TOL.gadget * ctx.penalty
    ok = all(v <= tol for v in series.leak.values())
    H_tar = series.Heff_coeffs[0]
    x_ref = ctx.x_star / 4
    Tm = pr.to_double(_full_T(ctx, series, x_ref, q_max))
    eta = op_norm(mat_exp(-Tm) - np.eye(Tm.shape[0]))
    err = None
    if spec.target is not None:
        claimed = to_eff(ctx, spec.target)
        err = op_norm(pr.to_double(assemble(H_tar.as_operator() - claimed.as_operator())))
    return Validation(ok, H_tar, eta, dict(series.leak), err, series)


def combine(specs, background: LocalOperator | None = None) -> GadgetSpec:
    """Sum ladders of gadgets on a shared lattice; the background joins the top order."""
    specs = list(specs)
    if not specs:
        raise ValueError("nothing to combine")
    lat = specs[0].lattice
    d = specs[0].degree
    if d > 3:
        raise DegreeTooHigh(f"combination is only guaranteed for degree <= 3, got {d}")
    anc: list = []
    grounds = {}
    for s in specs:
        if s.lattice is not lat:
            raise ValueError("gadgets must share one lattice object")
        if s.degree != d:
            raise ValueError("gadgets must have equal degree")
        if s.ctx.penalty != specs[0].ctx.penalty:
            raise ValueError("gadgets must share the penalty")
        if set(anc) & set(s.ctx.anc_sites):
            raise AncillaCollision(f"ancilla sites overlap: {sorted(set(anc) & set(s.ctx.anc_sites))}")
        anc.extend(s.ctx.anc_sites)
        grounds.update(s.ctx.local_ground)
    ladder = []
    for alpha in range(1, d + 1):
        acc = LocalOperator(lat)
        for s in specs:
            acc = acc + s.ctx.ladder[alpha - 1]
        if alpha == d and background is not None:
            acc = acc + background
        ladder.append(LocalHamiltonian._from_dict(lat, acc.terms))
    target = None
    if all(s.target is not None for s in specs):
        target = LocalOperator(lat)
        for s in specs:
            target = target + s.target
        if background is not None:
            target = target + background
        target = LocalHamiltonian._from_dict(lat, target.terms)
    ctx = SWContext(lat, anc, ladder, specs[0].ctx.penalty, grounds, specs[0].ctx.F)
    for a in anc:
        if background is not None and any(a in A for A in background.terms):
            raise ValueError("background must act on effective sites only")
    return GadgetSpec(ctx, target)


def locality_floor(k: int, k_prime: int) -> int:
    """Smallest degree allowed for reducing k-local targets to k'-local interactions."""
    if k_prime < 2:
        raise InvalidArity("k' must be at least 2")
    if k < 1:
        raise InvalidArity("k must be at least 1")
    return -(-(k - 1) // (k_prime - 1))


@dataclass(frozen=True)
class SimulatorEval:
    x: float
    matrix: np.ndarray
    max_strength: float


def simulator_eval(spec: GadgetSpec, x) -> SimulatorEval:
    """H'(x) = x^-d (H^(0) + sum_alpha x^alpha H^(alpha)) as a dense matrix."""
    if not x > 0:
        raise NonPositiveX(f"x must be positive, got {x}")
    ctx = spec.ctx
    like = ctx._like()
    xs = pr.scalar(x, like) if ctx.extended else x
    H = assemble(ctx.h0(), like)
    for a in range(1, ctx.degree + 1):
        H = H + assemble(ctx.ladder[a - 1], like) * xs ** a
    H = H * xs ** (-ctx.degree)
    return SimulatorEval(float(x), H, ctx.penalty * float(x) ** (-ctx.degree))


# serialization ------------------------------------------------------

def spec_to_json(spec: GadgetSpec) -> dict:
    from .hamiltonian import to_json_terms
    ctx = spec.ctx
    out = {
        "lattice": ctx.lattice.to_dict(),
        "anc": list(ctx.anc_sites),
        "penalty": ctx.penalty,
        "degree": ctx.degree,
        "ladder": [to_json_terms(L) for L in ctx.ladder],
        "local_ground": {str(a): [[z.real, z.imag] for z in v] for a, v in ctx.local_ground.items()},
        "F": ctx.F.to_dict(),
    }
    if spec.target is not None:
        out["target"] = to_json_terms(spec.target)
    return out


def spec_from_json(data: dict, bits: int | None = None) -> GadgetSpec:
    """Read a gadget from its JSON form or from a named constructor entry."""
    from .hamiltonian import from_json_terms
    from .lattice import from_config
    if data.get("constructor") == "three_to_two":
        return three_to_two(*data["h"], bits=bits)
    if data.get("constructor") == "three_to_two_chain":
        return three_to_two_chain(int(data["n_eff"]), data["h"], bits=bits)
    lat = from_config(data["lattice"])
    ladder = [from_json_terms(rows, lat, extended=bool(bits)) for rows in data["ladder"]]
    if "degree" in data and int(data["degree"]) != len(ladder):
        raise ValueError("degree does not match the ladder length")
    grounds = None
    if "local_ground" in data:
        grounds = {int(k): np.array([complex(a, b) for a, b in v]) for k, v in data["local_ground"].items()}
    F = None
    if "F" in data:
        F = FFunction(**data["F"])
    ctx = SWContext(lat, data["anc"], ladder, float(data.get("penalty", 1.0)), grounds, F)
    target = from_json_terms(data["target"], lat) if "target" in data else None
    return GadgetSpec(ctx, target)


def three_to_two_chain(n_eff: int, h, bits: int | None = None, F: FFunction | None = None) -> GadgetSpec:
    """3-to-2 gadgets on every consecutive triple of an effective chain, one ancilla each.

    Effective sites are 0..n_eff-1 with chain distance; the ancilla of triple
    (i, i+1, i+2) is site n_eff + i at distance 1 from the three.
    """
    from .lattice import from_graph
    if n_eff < 3:
        raise ValueError("need at least three effective sites")
    n_g = n_eff - 2
    edges = [(i, i + 1) for i in range(n_eff - 1)]
    for g in range(n_g):
        edges += [(n_eff + g, g + j) for j in range(3)]
    lat = from_graph(n_eff + n_g, edges)
    specs = []
    for g in range(n_g):
        ladder, target = three_to_two_ladder(lat, (g, g + 1, g + 2), n_eff + g, *h, bits=bits)
        specs.append(GadgetSpec(SWContext(lat, [n_eff + g], ladder, 1.0, F=F), target))
    return combine(specs) if n_g > 1 else specs[0]
