"""Local operators with explicit supports, Pauli grouping, F-norms and parameter families.

A term is stored as a matrix on its support with tensor factors in ascending
site order.  The empty support ``()`` holds the identity component as a 1x1
matrix so traces stay exact and F-norms can ignore it.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .densekit import precision as pr
from .densekit.config import TOL
from .densekit.linalg import dagger, embed, hermiticity_defect, op_norm
from .errors import DimensionMismatch, NonHermitian, NonQubit, OutOfDomain
from .lattice import FFunction, Lattice, f_constants

PAULI = {
    "I": np.array([[1, 0], [0, 1]], dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
_LETTERS = "IXYZ"

# (i, j) flattened as 2i + j  ->  Pauli index, and back
_TO_PAULI = np.array([[0.5, 0, 0, 0.5],
                      [0, 0.5, 0.5, 0],
                      [0, 0.5j, -0.5j, 0],
                      [0.5, 0, 0, -0.5]], dtype=complex)
_FROM_PAULI = np.array([[1, 0, 0, 1],
                        [0, 1, -1j, 0],
                        [0, 1, 1j, 0],
                        [1, 0, 0, -1]], dtype=complex)


def pauli_word(word: str) -> np.ndarray:
    out = np.array([[1.0 + 0j]])
    for ch in word:
        out = np.kron(out, PAULI[ch])
    return out


@dataclass(frozen=True)
class LocalTerm:
    support: tuple
    matrix: np.ndarray


def _drop_scale(like) -> float:
    """Relative threshold scaled to the arithmetic in use."""
    if pr.is_extended(like):
        return TOL.pauli_drop * pr.epsilon(like) / np.finfo(float).eps
    return TOL.pauli_drop


def _apply_axiswise(T: np.ndarray, W: np.ndarray) -> np.ndarray:
    if T.dtype == object:
        W = pr.to_extended(W)
    for q in range(T.ndim):
        T = np.moveaxis(np.tensordot(W, T, axes=([1], [q])), 0, q)
    return T


def pauli_coefficients(M: np.ndarray) -> np.ndarray:
    """Coefficient tensor c[p_0, ..., p_{k-1}] with M = sum c_w sigma_w (k qubits)."""
    D = M.shape[0]
    k = D.bit_length() - 1
    if 2 ** k != D:
        raise NonQubit(f"dimension {D} is not a power of two")
    if k == 0:
        return M.reshape(())
    T = M.reshape((2,) * (2 * k))
    order = [a for q in range(k) for a in (q, q + k)]
    T = T.transpose(order).reshape((4,) * k)
    return _apply_axiswise(T, _TO_PAULI)


def from_pauli_coefficients(C: np.ndarray) -> np.ndarray:
    k = C.ndim
    if k == 0:
        return C.reshape(1, 1)
    T = _apply_axiswise(C, _FROM_PAULI).reshape((2,) * (2 * k))
    inv = list(range(0, 2 * k, 2)) + list(range(1, 2 * k, 2))
    return T.transpose(inv).reshape(2 ** k, 2 ** k)


def _split_by_support(M: np.ndarray, support: tuple, threshold: float, out: dict) -> None:
    """Pauli-decompose ``M`` on ``support`` and add each exact-support piece into ``out``."""
    C = pauli_coefficients(M)
    k = len(support)
    mags = pr.abs_array(C)
    for mask in range(1 << k):
        sel = [q for q in range(k) if mask >> q & 1]
        idx = tuple(slice(1, 4) if (mask >> q & 1) else 0 for q in range(k))
        sub = C[idx] if k else C
        if k:
            smag = mags[idx]
            keep = np.array([float(v) > threshold for v in np.ravel(smag)]).reshape(np.shape(smag))
            if not keep.any():
                continue
            sub = np.where(keep, sub, 0 * sub)
        elif float(mags) <= threshold:
            continue
        padded = pr.zeros((4,) * len(sel), M) if sel else None
        if sel:
            padded[(slice(1, 4),) * len(sel)] = sub
            mat = from_pauli_coefficients(padded)
        else:
            mat = np.asarray(sub).reshape(1, 1)
        key = tuple(support[q] for q in sel)
        out[key] = out[key] + mat if key in out else mat


class LocalOperator:
    """Sum of terms on explicit supports of a lattice (no Hermiticity requirement)."""

    def __init__(self, lattice: Lattice, terms=None):
        self.lattice = lattice
        self.terms: dict = {}
        if terms is None:
            return
        items = terms.items() if isinstance(terms, dict) else ((t.support, t.matrix) for t in terms)
        for support, mat in items:
            self._add_term(support, mat)

    def _add_term(self, support, mat) -> None:
        support = tuple(int(s) for s in support)
        self.lattice.check_sites(support)
        mat = np.asarray(mat)
        if mat.dtype != object:
            mat = mat.astype(complex)
        if len(set(support)) != len(support):
            raise DimensionMismatch(f"repeated site in support {support}")
        order = sorted(range(len(support)), key=lambda i: support[i])
        if order != list(range(len(support))):
            dims = [self.lattice.local_dims[s] for s in support]
            mat = _permute(mat, support, dims)
            support = tuple(sorted(support))
        d = int(np.prod([self.lattice.local_dims[s] for s in support])) if support else 1
        if mat.shape != (d, d):
            raise DimensionMismatch(f"term on {support} has shape {mat.shape}, expected {(d, d)}")
        if support in self.terms:
            self.terms[support] = self.terms[support] + mat
        else:
            self.terms[support] = mat

    # construction helpers -------------------------------------------------
    @classmethod
    def _from_dict(cls, lattice, terms: dict):
        obj = cls.__new__(cls)
        obj.lattice = lattice
        obj.terms = terms
        return obj

    def copy(self):
        return type(self)._from_dict(self.lattice, dict(self.terms))

    def as_operator(self) -> "LocalOperator":
        return LocalOperator._from_dict(self.lattice, dict(self.terms))

    def as_hamiltonian(self, tol: float | None = None) -> "LocalHamiltonian":
        return LocalHamiltonian(self.lattice, self.terms, tol=tol)

    # algebra --------------------------------------------------------------
    def __add__(self, other):
        if other is None or other == 0:
            return self.copy()
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out[k] + v if k in out else v
        return _result_type(self, other)._from_dict(self.lattice, out)

    __radd__ = __add__

    def __neg__(self):
        return self.scaled(-1)

    def __sub__(self, other):
        return self + (-other)

    def scaled(self, c):
        cls = type(self) if np.isreal(complex(c)) else LocalOperator
        return cls._from_dict(self.lattice, {k: v * c for k, v in self.terms.items()})

    def __mul__(self, c):
        return self.scaled(c)

    __rmul__ = __mul__

    def dagger(self):
        return type(self)._from_dict(self.lattice, {k: dagger(v) for k, v in self.terms.items()})

    # inspection -----------------------------------------------------------
    @property
    def supports(self) -> list:
        return sorted(self.terms, key=lambda s: (len(s), s))

    def __iter__(self):
        for s in self.supports:
            yield LocalTerm(s, self.terms[s])

    def __len__(self) -> int:
        return len(self.terms)

    @property
    def identity_coeff(self):
        m = self.terms.get(())
        return m[0, 0] if m is not None else 0.0

    @property
    def is_extended(self) -> bool:
        return any(pr.is_extended(m) for m in self.terms.values())

    def max_support(self) -> int:
        return max((len(s) for s in self.terms), default=0)

    def term_norms(self) -> dict:
        return {s: op_norm(pr.to_double(m)) for s, m in self.terms.items()}

    def assemble(self, like=None) -> np.ndarray:
        return assemble(self, like)

    def to_double(self):
        return type(self)._from_dict(self.lattice, {k: pr.to_double(v) for k, v in self.terms.items()})

    def to_extended(self):
        return type(self)._from_dict(self.lattice, {k: pr.to_extended(v) for k, v in self.terms.items()})

    def canonical(self, threshold: float | None = None):
        """Regroup by exact Pauli support (qubit lattices only)."""
        return canonicalize(self, threshold)

    def pruned(self, threshold: float):
        """Drop terms whose Frobenius norm (an upper bound on the op norm) is below ``threshold``."""
        keep = {k: v for k, v in self.terms.items() if float(pr.fro_norm(v)) >= threshold}
        return type(self)._from_dict(self.lattice, keep)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(n={self.lattice.n}, supports={self.supports})"


class LocalHamiltonian(LocalOperator):
    """Local operator whose terms are Hermitian."""

    def __init__(self, lattice: Lattice, terms=None, tol: float | None = None):
        super().__init__(lattice, terms)
        tol = TOL.hermitian if tol is None else tol
        for s, m in self.terms.items():
            defect = hermiticity_defect(m)
            if defect > tol:
                raise NonHermitian(f"term on {s} has Hermiticity defect {defect:.3e}")


def _result_type(a, b):
    return type(a) if type(a) is type(b) else LocalOperator


def _permute(mat: np.ndarray, support, dims) -> np.ndarray:
    """Reorder tensor factors of ``mat`` (given in ``support`` order) to ascending sites."""
    k = len(support)
    order = sorted(range(k), key=lambda i: support[i])
    T = mat.reshape(list(dims) + list(dims))
    T = T.transpose(order + [k + i for i in order])
    return T.reshape(mat.shape)


def lift(mat: np.ndarray, support: tuple, target: tuple, lattice: Lattice) -> np.ndarray:
    """Embed a term on ``support`` into the larger ascending support ``target``."""
    if support == target:
        return mat
    pos = [target.index(s) for s in support]
    return embed(mat, pos, [lattice.local_dims[s] for s in target])


def assemble(H: LocalOperator, like=None) -> np.ndarray:
    """Dense matrix of ``H`` on the full lattice."""
    lat = H.lattice
    ext = H.is_extended or (like is not None and pr.is_extended(like))
    proto = pr.to_extended(np.zeros(1)) if ext else np.zeros(1, dtype=complex)
    out = pr.zeros((lat.dim, lat.dim), proto)
    for s, m in H.terms.items():
        if ext and not pr.is_extended(m):
            m = pr.to_extended(m)
        if s == ():
            out = out + m[0, 0] * pr.eye(lat.dim, proto)
        else:
            out = out + embed(m, list(s), lat)
    return out


def pauli_decompose(M, lattice: Lattice) -> LocalHamiltonian:
    """Group the Pauli expansion of a full-lattice matrix by exact support."""
    if not lattice.is_qubit:
        raise NonQubit("Pauli decomposition needs every local dimension to be 2")
    M = np.asarray(M)
    if M.dtype != object:
        M = M.astype(complex)
    if M.shape != (lattice.dim, lattice.dim):
        raise DimensionMismatch(f"matrix shape {M.shape} does not match lattice dimension {lattice.dim}")
    scale = op_norm(pr.to_double(M)) if M.size else 0.0
    out: dict = {}
    _split_by_support(M, tuple(range(lattice.n)), _drop_scale(M) * scale, out)
    return LocalHamiltonian(lattice, out)


def canonicalize(H: LocalOperator, threshold: float | None = None):
    """Re-express every term through its exact Pauli support.

    Coefficients below ``threshold`` (default: the drop tolerance times a
    lower bound on each term's operator norm) are discarded.
    """
    if not H.lattice.is_qubit:
        raise NonQubit("Pauli regrouping needs every local dimension to be 2")
    out: dict = {}
    for s, m in H.terms.items():
        if threshold is None:
            fro = float(pr.fro_norm(m))
            thr = _drop_scale(m) * fro / np.sqrt(m.shape[0])
        else:
            thr = threshold
        _split_by_support(m, s, thr, out)
    return type(H)._from_dict(H.lattice, out)


def commutator(X: LocalOperator, Y: LocalOperator, canonical: bool = True) -> LocalOperator:
    """[X, Y] computed term by term on unions of overlapping supports."""
    lat = X.lattice
    out: dict = {}
    for A, xa in X.terms.items():
        if not A:
            continue
        sA = set(A)
        for B, yb in Y.terms.items():
            if not B or sA.isdisjoint(B):
                continue
            U = tuple(sorted(sA.union(B)))
            xu = lift(xa, A, U, lat)
            yu = lift(yb, B, U, lat)
            c = xu @ yu - yu @ xu
            out[U] = out[U] + c if U in out else c
    res = LocalOperator._from_dict(lat, out)
    return canonicalize(res) if canonical and lat.is_qubit else res


def f_norm(H: LocalOperator, F: FFunction) -> float:
    """sup over site pairs (including i = j) of sum_{A containing i,j} ||H_A|| / F(dist(i,j))."""
    lat = H.lattice
    S = np.zeros((lat.n, lat.n))
    for s, nrm in H.term_norms().items():
        if not s:
            continue
        idx = np.array(s)
        S[np.ix_(idx, idx)] += nrm
    if lat.n == 0:
        return 0.0
    return float((S / F(lat.metric)).max())


def restrict(H: LocalOperator, region, F: FFunction):
    """Keep terms supported inside ``region``; return it with the restriction error bound."""
    region = set(region)
    H.lattice.check_sites(region)
    kept = {s: m for s, m in H.terms.items() if set(s) <= region}
    normF, _ = f_constants(F, H.lattice)
    bound = (H.lattice.n - len(region)) * f_norm(H, F) * normF
    return type(H)._from_dict(H.lattice, kept), bound


# parameter families ------------------------------------------------------

@dataclass
class ParamFamily:
    """Terms whose matrices are polynomials in x: support -> [c0, c1, ...]."""

    lattice: Lattice
    coeffs: dict
    domain: tuple = (-np.inf, np.inf)

    def __post_init__(self):
        clean = {}
        for s, cs in self.coeffs.items():
            s = tuple(s)
            self.lattice.check_sites(s)
            mats = [np.asarray(c, dtype=complex) if not pr.is_extended(np.asarray(c)) else np.asarray(c)
                    for c in cs]
            for m in mats:
                if hermiticity_defect(m) > TOL.hermitian:
                    raise NonHermitian(f"coefficient on {s} is not Hermitian")
            clean[s] = mats
        self.coeffs = clean

    @property
    def degree(self) -> int:
        return max((len(c) - 1 for c in self.coeffs.values()), default=0)

    def _check(self, x) -> None:
        lo, hi = self.domain
        if not (lo <= x <= hi):
            raise OutOfDomain(f"x = {x} outside [{lo}, {hi}]")

    def term(self, support, x):
        out = 0
        for k, c in enumerate(self.coeffs[support]):
            out = out + c * x ** k
        return out

    def eval(self, x) -> LocalHamiltonian:
        self._check(x)
        return LocalHamiltonian._from_dict(self.lattice, {s: self.term(s, x) for s in self.coeffs})

    def derivative(self, x) -> LocalHamiltonian:
        self._check(x)
        out = {}
        for s, cs in self.coeffs.items():
            acc = 0 * cs[0]
            for k in range(1, len(cs)):
                acc = acc + k * cs[k] * x ** (k - 1)
            out[s] = acc
        return LocalHamiltonian._from_dict(self.lattice, out)

    def coefficient(self, k: int) -> LocalHamiltonian:
        """The matrix coefficient of x^k as a LocalHamiltonian."""
        out = {s: cs[k] for s, cs in self.coeffs.items() if len(cs) > k}
        return LocalHamiltonian._from_dict(self.lattice, out)

    @classmethod
    def linear(cls, H0: LocalOperator, V: LocalOperator, domain=(-np.inf, np.inf)) -> "ParamFamily":
        coeffs = {}
        for s in set(H0.terms) | set(V.terms):
            d = int(np.prod([H0.lattice.local_dims[i] for i in s])) if s else 1
            zero = np.zeros((d, d), dtype=complex)
            coeffs[s] = [H0.terms.get(s, zero), V.terms.get(s, zero)]
        return cls(H0.lattice, coeffs, domain)


@dataclass
class PartitionedFamily:
    """Terms inside ``region`` take parameter x, all others take y."""

    base: ParamFamily
    region: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        self.region = frozenset(self.region)

    def eval2(self, x, y) -> LocalHamiltonian:
        self.base._check(x)
        self.base._check(y)
        out = {}
        for s in self.base.coeffs:
            out[s] = self.base.term(s, x if set(s) <= self.region else y)
        return LocalHamiltonian._from_dict(self.base.lattice, out)


def eval_family(family: ParamFamily, x) -> LocalHamiltonian:
    return family.eval(x)


def eval2(p: PartitionedFamily, x, y) -> LocalHamiltonian:
    return p.eval2(x, y)


# serialization -----------------------------------------------------------

def _fmt(v) -> float:
    return float(v)


def to_json_terms(H: LocalOperator, dense: bool = False) -> list:
    """Term list as JSON-ready dicts: Pauli words on qubit lattices, dense matrices otherwise."""
    rows = []
    for s in H.supports:
        m = H.terms[s]
        if H.lattice.is_qubit and not dense:
            C = pauli_coefficients(m)
            words = []
            for idx in itertools.product(range(4), repeat=len(s)):
                c = complex(C[idx]) if len(s) else complex(C)
                if abs(c) > 0:
                    entry = {"word": "".join(_LETTERS[i] for i in idx), "coeff": c.real}
                    if abs(c.imag) > 0:
                        entry["coeff_imag"] = c.imag
                    words.append(entry)
            rows.append({"support": list(s), "pauli_terms": words})
        else:
            md = pr.to_double(m)
            rows.append({"support": list(s), "dense": [[[z.real, z.imag] for z in row] for row in md]})
    return rows


def from_json_terms(rows, lattice: Lattice, hermitian: bool = True, extended: bool = False) -> LocalOperator:
    """Inverse of :func:`to_json_terms`; Pauli words may span the support or the whole lattice."""
    terms: dict = {}
    for row in rows:
        support = tuple(int(s) for s in row["support"])
        if "pauli_terms" in row:
            d = 2 ** len(support)
            mat = np.zeros((d, d), dtype=complex)
            if extended:
                mat = pr.to_extended(mat)
            for pt in row["pauli_terms"]:
                word = pt["word"]
                if len(word) == lattice.n and len(word) != len(support):
                    word = "".join(word[s] for s in support)
                if len(word) != len(support):
                    raise DimensionMismatch(f"word {pt['word']!r} does not fit support {support}")
                c = complex(pt["coeff"], pt.get("coeff_imag", 0.0))
                P = pauli_word(word)
                mat = mat + (pr.to_extended(P) * pr.scalar(c, mat) if extended else c * P)
        else:
            mat = np.array([[complex(a, b) for a, b in r] for r in row["dense"]], dtype=complex)
            if extended:
                mat = pr.to_extended(mat)
        key = support
        tmp = LocalOperator(lattice, {key: mat})
        for k, v in tmp.terms.items():
            terms[k] = terms[k] + v if k in terms else v
    cls = LocalHamiltonian if hermitian else LocalOperator
    return cls(lattice, terms) if hermitian else cls._from_dict(lattice, terms)
