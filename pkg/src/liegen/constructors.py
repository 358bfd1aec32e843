"""Builders for the classical real semisimple Lie algebras.

Every family is built from a fixed matrix basis whose entries are small
Gaussian integers.  Commutators are expanded in that basis by exact rational
elimination, so the structure constants are exact rationals (converted to
floats once).  Each algebra carries a :class:`~liegen.seed.CartanSeed`.

Matrix bases (``E_ij`` elementary, ``h_k = E_kk - E_{k+1,k+1}``):

``sl_real:n``       ``E_ij`` (i != j, row-major), then ``h_1 .. h_{n-1}``;
                    ``theta(X) = -X^T``.
``su:n``            per pair i<j: ``E_ij - E_ji``, ``i(E_ij + E_ji)``; then ``i h_k``;
                    ``theta = id``.
``su_pq:p,q``       as ``su`` but cross-block pairs use ``E_ij + E_ji``, ``i(E_ij - E_ji)``;
                    ``theta = Ad(I_pq)``.
``so:n``            ``E_ij - E_ji`` (i<j); ``theta = id``.
``so_pq:p,q``       same-block ``E_ij - E_ji``, cross-block ``E_ij + E_ji``;
                    ``theta = Ad(I_pq)``.
``sp:n``            compact ``sp(n)`` in ``u(2n)``: ``diag(A, conj A)`` for the ``u(n)``
                    basis, then ``[[0, S], [-S, 0]]`` and ``[[0, iS], [iS, 0]]`` for
                    symmetric ``S``; ``theta = id``.
``sl_complex_as_real:n``  ``sl(n,C)`` basis ``b`` as in ``sl_real``, then ``i b``;
                    ``J`` multiplies by ``i``; ``theta(X) = -X^*``.

In every family with a diagonal torus the first torus element is
``-i diag(n-1, n-3, ..., 1-n)``, regular on all roots, so the positive system
built from it is the standard one (roots ``e_j - e_k``, ``j < k``).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .errors import InputError, NumericalDegeneracyError, PreconditionError
from .lie_core import COMPLEX_AS_REAL, REAL, LieAlgebra, brackets
from .linalg import orthonormal_basis, span_residual
from .seed import CartanSeed

MAX_CLI_DIM = 32

FAMILIES = (
    "sl_real",
    "su",
    "so",
    "sp",
    "su_pq",
    "so_pq",
    "sl_complex_as_real",
    "compact_form_of",
    "split_form_of",
    "direct_sum",
)


@dataclass(frozen=True)
class AlgebraSpec:
    family: str
    params: tuple

    def __str__(self):
        if self.family == "direct_sum":
            return "sum:" + "+".join(str(p) for p in self.params)
        if self.family in ("compact_form_of", "split_form_of"):
            return f"{self.family}:{self.params[0]}"
        return f"{self.family}:" + ",".join(str(p) for p in self.params)


_ALIASES = {"sum": "direct_sum", "sl": "sl_real", "sl_complex": "sl_complex_as_real"}


def parse_spec(text: str) -> AlgebraSpec:
    """Parse the ``family:params`` grammar, e.g. ``su_pq:2,1`` or ``sum:su:2+sl_real:2``."""
    if isinstance(text, AlgebraSpec):
        return text
    text = text.strip()
    family, sep, rest = text.partition(":")
    family = _ALIASES.get(family, family)
    if not sep or family not in FAMILIES:
        raise InputError(f"cannot parse algebra spec {text!r}")
    if family == "direct_sum":
        parts = [p for p in rest.split("+") if p.strip()]
        if not parts:
            raise InputError("direct sum needs at least one summand")
        return AlgebraSpec(family, tuple(parse_spec(p) for p in parts))
    if family in ("compact_form_of", "split_form_of"):
        return AlgebraSpec(family, (parse_spec(rest),))
    try:
        params = tuple(int(p) for p in rest.split(","))
    except ValueError:
        raise InputError(f"non-integer parameters in {text!r}") from None
    spec = AlgebraSpec(family, params)
    _validate(spec)
    return spec


def _validate(spec: AlgebraSpec):
    f, p = spec.family, spec.params
    one = {"sl_real": 2, "su": 2, "so": 3, "sp": 1, "sl_complex_as_real": 2}
    if f in one:
        if len(p) != 1 or p[0] < one[f]:
            raise InputError(f"{f} needs one integer parameter >= {one[f]}")
    elif f == "su_pq":
        if len(p) != 2 or p[0] < 1 or p[1] < 1:
            raise InputError("su_pq needs p >= 1 and q >= 1")
    elif f == "so_pq":
        if len(p) != 2 or p[0] < 1 or p[1] < 1 or p[0] + p[1] < 3:
            raise InputError("so_pq needs p, q >= 1 and p + q >= 3")


# --- exact coordinates -----------------------------------------------------

def _int_vec(M: np.ndarray) -> np.ndarray:
    v = np.concatenate([M.real.ravel(), M.imag.ravel()])
    r = np.rint(v)
    if np.max(np.abs(v - r), initial=0.0) > 0:
        raise InputError("basis matrices must have Gaussian-integer entries")
    return r.astype(np.int64)


class _Coordinates:
    """Exact coordinates in a basis of Gaussian-integer matrices."""

    def __init__(self, mats: np.ndarray):
        self.mats = mats
        B = np.stack([_int_vec(M) for M in mats], axis=1)  # (R, d)
        self.B = B
        d = B.shape[1]
        # greedily pick d independent rows by exact elimination
        echelon: list[tuple[int, list[Fraction]]] = []
        rows = []
        for r in range(B.shape[0]):
            v = [Fraction(int(x)) for x in B[r]]
            for piv, e in echelon:
                if v[piv]:
                    f = v[piv] / e[piv]
                    v = [a - f * b for a, b in zip(v, e)]
            nz = next((i for i, x in enumerate(v) if x), None)
            if nz is not None:
                echelon.append((nz, v))
                rows.append(r)
                if len(rows) == d:
                    break
        if len(rows) != d:
            raise InputError("basis matrices are linearly dependent")
        self.rows = rows
        inv = _fraction_inverse([[Fraction(int(x)) for x in B[r]] for r in rows])
        D = 1
        for row in inv:
            for x in row:
                D = D * x.denominator // math.gcd(D, x.denominator)
        self.D = D
        self.N = np.array([[int(x * D) for x in row] for row in inv], dtype=np.int64)

    def numerators(self, M: np.ndarray) -> np.ndarray:
        v = _int_vec(M)
        num = self.N @ v[self.rows]
        if not np.array_equal(self.B @ num, self.D * v):
            raise InputError("matrix is not in the span of the basis")
        return num

    def coords(self, M: np.ndarray) -> np.ndarray:
        return self.numerators(M) / self.D

    def operator(self, f: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
        return np.stack([self.coords(f(M)) for M in self.mats], axis=1)


def _fraction_inverse(A):
    n = len(A)
    M = [row[:] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(A)]
    for col in range(n):
        piv = next(r for r in range(col, n) if M[r][col] != 0)
        M[col], M[piv] = M[piv], M[col]
        p = M[col][col]
        M[col] = [x / p for x in M[col]]
        for r in range(n):
            if r != col and M[r][col] != 0:
                f = M[r][col]
                M[r] = [a - f * b for a, b in zip(M[r], M[col])]
    return [row[n:] for row in M]


def _structure_constants(coords: _Coordinates) -> np.ndarray:
    mats = coords.mats
    d = len(mats)
    c = np.zeros((d, d, d))
    for i in range(d):
        for j in range(i + 1, d):
            v = coords.coords(mats[i] @ mats[j] - mats[j] @ mats[i])
            c[i, j] = v
            c[j, i] = -v
    return c


def _E(n, i, j):
    M = np.zeros((n, n), dtype=complex)
    M[i, j] = 1
    return M


def _h(n, k):
    return _E(n, k, k) - _E(n, k + 1, k + 1)


def _rho(n):
    return np.diag(np.arange(n - 1, -n, -2)).astype(complex)


def _from_matrices(label, mats, theta_fn, torus, split, field=REAL, J=None) -> LieAlgebra:
    mats = np.array(mats, dtype=complex)
    co = _Coordinates(mats)
    c = _structure_constants(co)
    theta = co.operator(theta_fn)
    cartan = [co.coords(M) for M in list(torus) + list(split)]
    nt = len(torus)
    seed = CartanSeed(
        theta=theta,
        cartan_basis=np.array(cartan),
        compact=tuple(range(nt)),
        noncompact=tuple(range(nt, len(cartan))),
    )
    return LieAlgebra(c, label=label, field=field, complex_structure=J, seed=seed,
                      matrices=mats, rational=True)


def _sl_basis(n):
    mats = [_E(n, i, j) for i in range(n) for j in range(n) if i != j]
    mats += [_h(n, k) for k in range(n - 1)]
    return mats


def sl_real(n: int) -> LieAlgebra:
    mats = _sl_basis(n)
    m = n // 2
    torus = [_E(n, 2 * k, 2 * k + 1) - _E(n, 2 * k + 1, 2 * k) for k in range(m)]

    def block(k):
        return _E(n, 2 * k, 2 * k) + _E(n, 2 * k + 1, 2 * k + 1)

    if n % 2 == 0:
        split = [block(k) - block(k + 1) for k in range(m - 1)]
    else:
        split = [block(k) - 2 * _E(n, n - 1, n - 1) for k in range(m)]
    return _from_matrices(f"sl({n},R)", mats, lambda X: -X.T, torus, split)


def _unitary_basis(n, signs):
    """Basis of su(p,q) (all signs +1 gives su(n)); ``signs`` is the diagonal of I_pq."""
    mats = []
    for i in range(n):
        for j in range(i + 1, n):
            if signs[i] == signs[j]:
                mats.append(_E(n, i, j) - _E(n, j, i))
                mats.append(1j * (_E(n, i, j) + _E(n, j, i)))
            else:
                mats.append(_E(n, i, j) + _E(n, j, i))
                mats.append(1j * (_E(n, i, j) - _E(n, j, i)))
    mats += [1j * _h(n, k) for k in range(n - 1)]
    return mats


def _diagonal_torus(n):
    return [-1j * _rho(n)] + [1j * _h(n, k) for k in range(n - 2)]


def su(n: int) -> LieAlgebra:
    return _from_matrices(f"su({n})", _unitary_basis(n, [1] * n), lambda X: X,
                          _diagonal_torus(n), [])


def su_pq(p: int, q: int) -> LieAlgebra:
    n = p + q
    signs = [1] * p + [-1] * q
    I = np.diag(signs).astype(complex)
    return _from_matrices(f"su({p},{q})", _unitary_basis(n, signs), lambda X: I @ X @ I,
                          _diagonal_torus(n), [])


def _rotation(n, a, b):
    return _E(n, a, b) - _E(n, b, a)


def so(n: int) -> LieAlgebra:
    mats = [_rotation(n, i, j) for i in range(n) for j in range(i + 1, n)]
    torus = [_rotation(n, 2 * k, 2 * k + 1) for k in range(n // 2)]
    return _from_matrices(f"so({n})", mats, lambda X: X, torus, [])


def so_pq(p: int, q: int) -> LieAlgebra:
    n = p + q
    mats = []
    for i in range(n):
        for j in range(i + 1, n):
            same = (i < p) == (j < p)
            mats.append(_rotation(n, i, j) if same else _E(n, i, j) + _E(n, j, i))
    I = np.diag([1] * p + [-1] * q).astype(complex)
    torus = [_rotation(n, 2 * k, 2 * k + 1) for k in range(p // 2)]
    torus += [_rotation(n, p + 2 * k, p + 2 * k + 1) for k in range(q // 2)]
    split = []
    if p % 2 and q % 2:
        split = [_E(n, p - 1, n - 1) + _E(n, n - 1, p - 1)]
    return _from_matrices(f"so({p},{q})", mats, lambda X: I @ X @ I, torus, split)


def _block(A, B, C, D):
    return np.block([[A, B], [C, D]])


def sp(n: int) -> LieAlgebra:
    """Compact symplectic algebra sp(n) inside u(2n)."""
    Z = np.zeros((n, n), dtype=complex)
    mats = []
    for i in range(n):
        for j in range(i + 1, n):
            A = _E(n, i, j) - _E(n, j, i)
            mats.append(_block(A, Z, Z, A))
            A = 1j * (_E(n, i, j) + _E(n, j, i))
            mats.append(_block(A, Z, Z, A.conj()))
    diag = [_block(1j * _E(n, k, k), Z, Z, -1j * _E(n, k, k)) for k in range(n)]
    mats += diag
    for i in range(n):
        for j in range(i, n):
            S = _E(n, i, j) + _E(n, j, i) if i != j else _E(n, i, i)
            mats.append(_block(Z, S, -S, Z))
            mats.append(_block(Z, 1j * S, 1j * S, Z))
    return _from_matrices(f"sp({n})", mats, lambda X: X, diag, [])


def sp_real(n: int) -> LieAlgebra:
    """Split symplectic algebra sp(2n, R)."""
    Z = np.zeros((n, n), dtype=complex)
    mats = [_block(_E(n, i, j), Z, Z, -_E(n, j, i)) for i in range(n) for j in range(n)]
    sym = [_E(n, i, j) + _E(n, j, i) if i != j else _E(n, i, i)
           for i in range(n) for j in range(i, n)]
    mats += [_block(Z, S, Z, Z) for S in sym]
    mats += [_block(Z, Z, S, Z) for S in sym]
    torus = [_block(Z, _E(n, k, k), -_E(n, k, k), Z) for k in range(n)]
    return _from_matrices(f"sp({2 * n},R)", mats, lambda X: -X.T, torus, [])


def standard_complex_structure(m: int) -> np.ndarray:
    """``J`` on coordinates ``(x, y)`` of ``x + i y``: ``(x, y) -> (-y, x)``."""
    J = np.zeros((2 * m, 2 * m))
    J[m:, :m] = np.eye(m)
    J[:m, m:] = -np.eye(m)
    return J


def sl_complex_as_real(n: int) -> LieAlgebra:
    base = _sl_basis(n)
    mats = base + [1j * M for M in base]
    D = _rho(n)
    hs = [_h(n, k) for k in range(n - 2)]
    torus = [-1j * D] + [-1j * H for H in hs]
    split = [D] + hs
    return _from_matrices(f"sl({n},C)_R", mats, lambda X: -X.conj().T, torus, split,
                          field=COMPLEX_AS_REAL, J=standard_complex_structure(len(base)))


def direct_sum(Ls: Sequence[LieAlgebra]) -> LieAlgebra:
    """Block-diagonal direct sum; seeds, involutions and matrix bases are concatenated."""
    Ls = list(Ls)
    if not Ls:
        raise InputError("direct sum of an empty list")
    if len(Ls) == 1:
        return Ls[0]
    dims = [L.dim for L in Ls]
    d = sum(dims)
    offs = np.cumsum([0] + dims)
    c = np.zeros((d, d, d))
    for L, o in zip(Ls, offs):
        s = slice(o, o + L.dim)
        c[s, s, s] = L.constants
    seed = None
    if all(L.seed is not None for L in Ls):
        theta = np.zeros((d, d))
        t_rows, a_rows = [], []
        for L, o in zip(Ls, offs):
            theta[o:o + L.dim, o:o + L.dim] = L.seed.theta
            for rows, idx in ((t_rows, L.seed.compact), (a_rows, L.seed.noncompact)):
                for i in idx:
                    v = np.zeros(d)
                    v[o:o + L.dim] = L.seed.cartan_basis[i]
                    rows.append(v)
        seed = CartanSeed(theta, np.array(t_rows + a_rows), tuple(range(len(t_rows))),
                          tuple(range(len(t_rows), len(t_rows) + len(a_rows))))
    J = None
    field = REAL
    if all(L.complex_structure is not None for L in Ls):
        J = np.zeros((d, d))
        for L, o in zip(Ls, offs):
            J[o:o + L.dim, o:o + L.dim] = L.complex_structure
        field = COMPLEX_AS_REAL
    mats = None
    if all(L.matrices is not None for L in Ls):
        sizes = [L.matrices.shape[1] for L in Ls]
        N = sum(sizes)
        mats = np.zeros((d, N, N), dtype=complex)
        mo = np.cumsum([0] + sizes)
        for L, o, m in zip(Ls, offs, mo):
            k = L.matrices.shape[1]
            mats[o:o + L.dim, m:m + k, m:m + k] = L.matrices
    return LieAlgebra(c, label="+".join(L.label for L in Ls), field=field,
                      complex_structure=J, seed=seed, matrices=mats,
                      rational=all(L.rational for L in Ls),
                      meta={"summand_dims": tuple(dims)})


def complexify_then_realify(L: LieAlgebra) -> LieAlgebra:
    """Realification of ``L (x) C`` on the basis ``(b_1..b_d, i b_1..i b_d)``.

    The result carries the complex structure ``J``; when ``L`` has a seed, the
    result gets the lifted seed whose involution is the compact conjugation
    ``theta o sigma`` (``sigma`` = conjugation fixing ``L``), and ``meta``
    records ``real_form``, ``sigma`` and the complex-linear extension of
    ``theta`` under ``theta_c``.
    """
    d = L.dim
    c = L.constants
    C = np.zeros((2 * d, 2 * d, 2 * d))
    C[:d, :d, :d] = c
    C[:d, d:, d:] = c
    C[d:, :d, d:] = c
    C[d:, d:, :d] = -c
    J = standard_complex_structure(d)
    Z = np.zeros((d, d))
    I = np.eye(d)
    meta = {"real_form": L, "sigma": np.block([[I, Z], [Z, -I]])}
    seed = None
    if L.seed is not None:
        th = L.seed.theta
        meta["theta_c"] = np.block([[th, Z], [Z, th]])
        tau = np.block([[th, Z], [Z, -th]])
        emb = np.hstack([L.seed.cartan_basis, np.zeros_like(L.seed.cartan_basis)])
        Jemb = emb @ J.T
        t, a = list(L.seed.compact), list(L.seed.noncompact)
        rows = np.vstack([emb[t], Jemb[a], emb[a], Jemb[t]])
        nc = len(t) + len(a)
        seed = CartanSeed(tau, rows, tuple(range(nc)), tuple(range(nc, 2 * nc)))
    mats = None
    if L.matrices is not None:
        mats = np.concatenate([L.matrices, 1j * L.matrices])
    return LieAlgebra(C, label=f"({L.label})_C", field=COMPLEX_AS_REAL,
                      complex_structure=J, seed=seed, matrices=mats,
                      rational=L.rational, meta=meta)


_COMPACT_OF = {
    "sl_real": lambda p: ("su", (p[0],)),
    "su": lambda p: ("su", p),
    "su_pq": lambda p: ("su", (p[0] + p[1],)),
    "sl_complex_as_real": lambda p: ("su", p),
    "so": lambda p: ("so", p),
    "so_pq": lambda p: ("so", (p[0] + p[1],)),
    "sp": lambda p: ("sp", p),
}

_SPLIT_OF = {
    "su": lambda p: ("sl_real", p),
    "sl_real": lambda p: ("sl_real", p),
    "su_pq": lambda p: ("sl_real", (p[0] + p[1],)),
    "so": lambda p: ("so_pq", (p[0] // 2, p[0] - p[0] // 2)),
    "so_pq": lambda p: ("so_pq", ((p[0] + p[1]) // 2, p[0] + p[1] - (p[0] + p[1]) // 2)),
    "sp": lambda p: ("sp_real", p),
}


def _build(spec: AlgebraSpec) -> LieAlgebra:
    f, p = spec.family, spec.params
    simple = {"sl_real": sl_real, "su": su, "so": so, "sp": sp, "su_pq": su_pq,
              "so_pq": so_pq, "sl_complex_as_real": sl_complex_as_real, "sp_real": sp_real}
    if f in simple:
        return simple[f](*p)
    if f == "direct_sum":
        return direct_sum([build(s) for s in p])
    inner = p[0]
    table = _COMPACT_OF if f == "compact_form_of" else _SPLIT_OF
    if inner.family not in table:
        raise InputError(f"{f} is not defined for family {inner.family}")
    fam, params = table[inner.family](inner.params)
    return simple[fam](*params)


@lru_cache(maxsize=128)
def _build_cached(text: str) -> LieAlgebra:
    return _build(parse_spec(text))


def build(spec) -> LieAlgebra:
    """Build the algebra for a spec string or :class:`AlgebraSpec` (cached, immutable)."""
    return _build_cached(str(parse_spec(spec)))


def classical_dim(spec) -> int:
    """Dimension from the classical formulas, used as an independent check."""
    s = parse_spec(spec)
    f, p = s.family, s.params
    if f == "direct_sum":
        return sum(classical_dim(x) for x in p)
    if f in ("compact_form_of", "split_form_of"):
        return classical_dim(p[0])
    n = p[0]
    return {
        "sl_real": n * n - 1,
        "su": n * n - 1,
        "so": n * (n - 1) // 2,
        "sp": n * (2 * n + 1),
        "sl_complex_as_real": 2 * (n * n - 1),
        "su_pq": (sum(p)) ** 2 - 1,
        "so_pq": sum(p) * (sum(p) - 1) // 2,
    }[f]


def compact_form(L: LieAlgebra, rd=None) -> LieAlgebra:
    """Compact real form of a realified complex semisimple algebra.

    Spanned by ``J h_a``, ``e_a - e_{-a}`` and ``J (e_a + e_{-a})`` over the
    positive roots, plus ``J`` times the Cartan, with the normalization of
    :func:`liegen.cartan.root_datum`.  The result has ``theta = id`` and the
    Cartan ``J h_a`` for the simple roots.
    """
    from .cartan import root_datum
    from .vogan import simple_roots

    J = L.complex_structure
    if J is None:
        raise PreconditionError("compact_form needs an algebra with a complex structure")
    if rd is None:
        rd = root_datum(L)
    if rd.ambient is not L:
        raise PreconditionError("root datum was computed for a different algebra")
    gens = []
    for i in rd.positive_indices():
        e, f, h = rd.sl2_triple(i)
        gens += [J @ h, e - f, J @ (e + f)]
    Q = orthonormal_basis(np.stack(gens, axis=1))
    if 2 * Q.shape[1] != L.dim:
        raise PreconditionError("root datum is inconsistent with the algebra")
    B = brackets(L, Q, Q)
    coef, *_ = np.linalg.lstsq(Q, B, rcond=None)
    if span_residual(Q, B) > 1e-8 * L.bracket_scale:
        raise NumericalDegeneracyError("compact form is not bracket-closed")
    m = Q.shape[1]
    c = coef.reshape(m, m, m).transpose(1, 2, 0)
    c = 0.5 * (c - c.transpose(1, 0, 2))
    cartan = np.array([Q.T @ (J @ rd.h(i)) for i in simple_roots(rd)])
    seed = CartanSeed(np.eye(m), cartan, tuple(range(len(cartan))), ())
    return LieAlgebra(c, label=f"compact({L.label})", seed=seed)
