"""Richardson extrapolation to x = 0 on Chebyshev nodes."""
from __future__ import annotations

import math
from dataclasses import dataclass

import gmpy2
import numpy as np

from .errors import Infeasible, LengthMismatch


@dataclass(frozen=True)
class NodePlan:
    m: int
    x_max: float
    nodes: np.ndarray
    weights: np.ndarray
    alpha: float
    # gmpy2 copies of nodes and weights when the plan was built exactly
    exact_nodes: np.ndarray | None = None
    exact_weights: np.ndarray | None = None

    def to_dict(self) -> dict:
        return {"m": self.m, "x_max": self.x_max, "nodes": self.nodes.tolist(),
                "weights": self.weights.tolist(), "alpha": self.alpha}


@dataclass(frozen=True)
class Estimate:
    c0_hat: float
    budget: float
    inputs: tuple
    M: float = float("nan")
    delta: float = 0.0
    c0_exact: object = None

    def to_dict(self) -> dict:
        return {"c0_hat": self.c0_hat, "budget": self.budget, "M": self.M, "delta": self.delta,
                "inputs": list(self.inputs)}


def lagrange_weights_at_zero(nodes) -> np.ndarray:
    """w_k = prod_{j != k} x_j / (x_j - x_k).

    For more than 20 nodes the product is accumulated as a sum of logs with a
    separate sign to keep intermediate factors from overflowing.
    """
    x = np.asarray(nodes, dtype=float)
    m = len(x)
    w = np.empty(m)
    for k in range(m):
        others = np.delete(x, k)
        ratios = others / (others - x[k])
        if m <= 20:
            w[k] = np.prod(ratios)
        else:
            sign = np.prod(np.sign(ratios))
            w[k] = sign * math.exp(np.sum(np.log(np.abs(ratios))))
    return w


def _exact_plan(m: int, x_max: float):
    """Nodes and weights in the active gmpy2 precision."""
    pi = gmpy2.const_pi()
    xm = gmpy2.mpfr(x_max)
    nodes = [xm * gmpy2.sin((2 * k - 1) * pi / (4 * m)) ** 2 for k in range(1, m + 1)]
    weights = []
    for k, xk in enumerate(nodes):
        w = gmpy2.mpfr(1)
        for j, xj in enumerate(nodes):
            if j != k:
                w = w * xj / (xj - xk)
        weights.append(w)
    return np.array(nodes, dtype=object), np.array(weights, dtype=object)


def chebyshev_nodes(m: int, x_max: float, exact: bool = False) -> NodePlan:
    """x_k = x_max sin^2((2k-1) pi / 4m), k = 1..m, with Lagrange-at-zero weights.

    ``exact`` also builds gmpy2 nodes and weights at the active precision so
    samples far below double resolution can be combined without rounding.
    """
    if m < 1:
        raise ValueError("need at least one node")
    if x_max <= 0:
        raise ValueError("x_max must be positive")
    k = np.arange(1, m + 1)
    nodes = x_max * np.sin((2 * k - 1) * np.pi / (4 * m)) ** 2
    w = lagrange_weights_at_zero(nodes)
    alpha = float(np.sum(np.abs(w)))
    if m >= 2 and alpha > 3 * math.log(m):
        raise ArithmeticError(f"condition number {alpha} exceeds 3 log m for m = {m}")
    xn, xw = _exact_plan(m, x_max) if exact else (None, None)
    return NodePlan(m, float(x_max), nodes, w, alpha, xn, xw)


def condition_closed_form(m: int) -> float:
    """(1/m) sum_k cot((2k-1) pi / 4m)."""
    k = np.arange(1, m + 1)
    return float(np.sum(1.0 / np.tan((2 * k - 1) * np.pi / (4 * m))) / m)


def error_budget(delta: float, M: float, m: int) -> float:
    """(delta + 2^-m M) 3 log m."""
    if delta < 0 or M < 0:
        raise ValueError("delta and M must be nonnegative")
    if m < 2:
        raise ValueError("the budget formula needs m >= 2")
    return (delta + 2.0 ** (-m) * M) * 3 * math.log(m)


def empirical_M(samples) -> float:
    """Heuristic analyticity bound: four times the largest sampled magnitude."""
    return 4.0 * float(np.max(np.abs(samples))) if len(samples) else 0.0


def richardson(plan: NodePlan, samples, delta: float = 0.0, M: float | None = None) -> Estimate:
    """c0 = sum_k w_k f(x_k); the budget uses ``M`` or the empirical proxy.

    Samples held as gmpy2 numbers are combined with the plan's exact weights.
    """
    raw = list(samples)
    if len(raw) != plan.m:
        raise LengthMismatch(f"expected {plan.m} samples, got {len(raw)}")
    f = np.array([float(v) for v in raw])
    exact = None
    if plan.exact_weights is not None and any(isinstance(v, type(gmpy2.mpfr(0))) for v in raw):
        exact = sum((w * gmpy2.mpfr(v) for w, v in zip(plan.exact_weights, raw)), gmpy2.mpfr(0))
        c0 = float(exact)
    else:
        c0 = float(np.dot(plan.weights, f))
    M = empirical_M(f) if M is None else float(M)
    budget = error_budget(delta, M, plan.m) if plan.m >= 2 else float("inf")
    return Estimate(c0, budget, tuple(float(v) for v in f), M, float(delta), exact)


@dataclass(frozen=True)
class Plan:
    m: int
    delta: float
    x_min: float
    budget: float


def plan(epsilon: float, M: float, R: float, m_limit: int = 4096) -> Plan:
    """Smallest m whose budget with delta = epsilon / (6 log m) is within epsilon."""
    if epsilon <= 0 or R <= 0 or M < epsilon:
        raise ValueError("need epsilon > 0, M >= epsilon and R > 0")
    for m in range(2, m_limit + 1):
        delta = epsilon / (6 * math.log(m))
        b = error_budget(delta, M, m)
        if b <= epsilon:
            return Plan(m, delta, R / 2 * math.sin(math.pi / (4 * m)) ** 2, b)
    raise Infeasible(f"no m <= {m_limit} meets epsilon = {epsilon}")


def uniform_noise(m: int, delta: float, seed: int) -> np.ndarray:
    """Seeded noise uniform on [-delta, delta]."""
    rng = np.random.default_rng(seed)
    return rng.uniform(-delta, delta, size=m)
