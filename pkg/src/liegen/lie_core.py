"""Real Lie algebras given by structure constants.

A :class:`LieAlgebra` stores ``c[i, j, k]`` with ``[b_i, b_j] = sum_k c[i, j, k] b_k``.
Elements are plain coordinate vectors (``numpy`` arrays of length ``dim``) and
operators are ``dim x dim`` matrices acting on those coordinates.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field as dc_field
from functools import cached_property
from typing import Any, Optional, Sequence

import numpy as np

from .errors import InputError, NumericalDegeneracyError, PreconditionError
from .linalg import (
    RANK_RTOL,
    extend_basis,
    null_space,
    orthonormal_basis,
    span_residual,
)

ANTISYM_TOL = 1e-12
JACOBI_RTOL = 1e-9
INVARIANCE_TOL = 1e-8
IDEAL_RETRIES = 5

REAL = "real"
COMPLEX_AS_REAL = "complex-as-real"


@dataclass(frozen=True, eq=False)
class LieAlgebra:
    constants: np.ndarray
    label: str = ""
    field: str = REAL
    # complex structure J (J @ J = -I) for realified complex algebras
    complex_structure: Optional[np.ndarray] = None
    # CartanSeed declared by the constructor (see ``cartan``)
    seed: Any = None
    # defining matrix basis, shape (dim, n, n), complex
    matrices: Optional[np.ndarray] = None
    rational: bool = False
    meta: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        c = np.asarray(self.constants, dtype=float)
        if c.ndim != 3 or not (c.shape[0] == c.shape[1] == c.shape[2]) or c.shape[0] < 1:
            raise InputError(f"structure constants must have shape (n, n, n), got {c.shape}")
        defect = np.max(np.abs(c + c.transpose(1, 0, 2)))
        if defect > ANTISYM_TOL * max(1.0, np.max(np.abs(c))):
            raise InputError(f"structure constants are not antisymmetric (defect {defect:.3g})")
        c = c.copy()
        c.flags.writeable = False
        object.__setattr__(self, "constants", c)
        if self.complex_structure is not None:
            J = np.array(self.complex_structure, dtype=float)
            if J.shape != (self.dim, self.dim):
                raise InputError("complex structure has the wrong shape")
            J.flags.writeable = False
            object.__setattr__(self, "complex_structure", J)

    @property
    def dim(self) -> int:
        return self.constants.shape[0]

    @cached_property
    def ad_basis(self) -> np.ndarray:
        """``ad_basis[i]`` is the matrix of ``ad_{b_i}``."""
        a = np.ascontiguousarray(self.constants.transpose(0, 2, 1))
        a.flags.writeable = False
        return a

    @cached_property
    def killing_gram(self) -> np.ndarray:
        c = self.constants
        K = np.einsum("ajk,bkj->ab", c, c)
        K = 0.5 * (K + K.T)
        K.flags.writeable = False
        return K

    @cached_property
    def bracket_scale(self) -> float:
        """Upper bound for ``|[u, v]|`` over unit vectors; sets absolute rank thresholds."""
        return max(float(np.linalg.norm(self.constants)), 1e-300)

    def basis(self, i: int) -> np.ndarray:
        e = np.zeros(self.dim)
        e[i] = 1.0
        return e

    def __repr__(self):
        return f"LieAlgebra({self.label!r}, dim={self.dim})"


@dataclass(frozen=True, eq=False)
class Subalgebra:
    """Linear subspace of a Lie algebra, as an orthonormal column basis.

    ``closed`` records whether the span is known to be bracket-closed; the
    same type doubles as a plain subspace when it is ``False``.
    """

    basis: np.ndarray
    closed: bool = False

    def __post_init__(self):
        B = np.asarray(self.basis, dtype=float)
        if B.ndim != 2:
            raise InputError("subspace basis must be a 2-d array")
        B = B.copy()
        B.flags.writeable = False
        object.__setattr__(self, "basis", B)

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.T

    def contains(self, vectors, tol=INVARIANCE_TOL) -> bool:
        W = np.asarray(vectors, dtype=float)
        if W.ndim == 1:
            W = W[:, None]
        scale = max(1.0, float(np.max(np.linalg.norm(W, axis=0))) if W.size else 1.0)
        return span_residual(self.basis, W) <= tol * scale


def _check_element(L: LieAlgebra, x, name="x") -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (L.dim,):
        raise InputError(f"{name} has shape {x.shape}, expected ({L.dim},)")
    return x


def subspace(L: LieAlgebra, vectors, closed=False) -> Subalgebra:
    """Orthonormalized span of the given coordinate vectors (columns or a list)."""
    W = _as_columns(L, vectors)
    return Subalgebra(orthonormal_basis(W), closed=closed)


def _as_columns(L: LieAlgebra, vectors) -> np.ndarray:
    if isinstance(vectors, Subalgebra):
        return vectors.basis
    if isinstance(vectors, np.ndarray) and vectors.ndim == 2:
        W = np.asarray(vectors, dtype=float)
    else:
        vecs = [np.asarray(v, dtype=float) for v in vectors]
        W = np.stack(vecs, axis=1) if vecs else np.zeros((L.dim, 0))
    if W.shape[0] != L.dim:
        raise InputError(f"vectors have length {W.shape[0]}, expected {L.dim}")
    return W


def bracket(L: LieAlgebra, x, y) -> np.ndarray:
    x = _check_element(L, x, "x")
    y = _check_element(L, y, "y")
    return np.einsum("i,j,ijk->k", x, y, L.constants)


def brackets(L: LieAlgebra, U: np.ndarray, V: np.ndarray) -> np.ndarray:
    """All brackets ``[U[:, a], V[:, b]]`` as columns of a ``dim x (a*b)`` matrix."""
    T = np.tensordot(U, L.constants, axes=([0], [0]))  # (a, j, k)
    T = np.tensordot(T, V, axes=([1], [0]))  # (a, k, b)
    return T.transpose(1, 0, 2).reshape(L.dim, -1)


def ad(L: LieAlgebra, x) -> np.ndarray:
    x = _check_element(L, x)
    return np.tensordot(x, L.ad_basis, axes=1)


def killing_form(L: LieAlgebra, x, y) -> float:
    x = _check_element(L, x, "x")
    y = _check_element(L, y, "y")
    return float(x @ L.killing_gram @ y)


def is_semisimple(L: LieAlgebra, rtol=RANK_RTOL) -> bool:
    """Cartan's criterion: the Killing form is nondegenerate."""
    s = np.linalg.svd(L.killing_gram, compute_uv=False)
    if s[0] == 0.0:
        return False
    return bool(np.all(s > rtol * s[0]))


def jacobi_residual(L: LieAlgebra) -> float:
    """Max Jacobi defect over basis triples, relative to ``max|c|**2``."""
    c = L.constants
    t1 = np.einsum("jlk,ikm->ijlm", c, c)
    t2 = np.einsum("lik,jkm->ijlm", c, c)
    t3 = np.einsum("ijk,lkm->ijlm", c, c)
    cmax = np.max(np.abs(c))
    if cmax == 0:
        return 0.0
    return float(np.max(np.abs(t1 + t2 + t3)) / cmax**2)


def antisymmetry_defect(L: LieAlgebra) -> float:
    c = L.constants
    return float(np.max(np.abs(c + c.transpose(1, 0, 2))))


def lie_closure(L: LieAlgebra, S) -> Subalgebra:
    """Smallest bracket-closed subspace containing span(S).

    Each pass brackets the directions found in the previous pass against the
    whole current basis; the loop ends after a pass that adds nothing.
    """
    W = _as_columns(L, S)
    Q = orthonormal_basis(W)
    frontier = Q
    scale = L.bracket_scale
    while frontier.shape[1] and Q.shape[1] < L.dim:
        Q, added = extend_basis(Q, brackets(L, frontier, Q), scale)
        frontier = Q[:, Q.shape[1] - added:]
    return Subalgebra(Q, closed=True)


def is_bracket_closed(L: LieAlgebra, V: Subalgebra, tol=INVARIANCE_TOL) -> bool:
    B = V.basis
    if B.shape[1] == 0:
        return True
    return span_residual(B, brackets(L, B, B)) <= tol * L.bracket_scale


def is_invariant(L: LieAlgebra, V: Subalgebra, ops: Sequence[np.ndarray], tol=INVARIANCE_TOL) -> bool:
    """True iff every operator maps span(V) into itself."""
    B = V.basis
    if B.shape[0] != L.dim:
        raise InputError("subspace does not live in this algebra")
    for op in ops:
        op = np.asarray(op, dtype=float)
        if op.shape != (L.dim, L.dim):
            raise InputError(f"operator has shape {op.shape}, expected {(L.dim, L.dim)}")
        if B.shape[1] == 0:
            continue
        image = op @ B
        scale = max(1.0, float(np.max(np.linalg.norm(image, axis=0))))
        if span_residual(B, image) > tol * scale:
            return False
    return True


def commutant(mats: Sequence[np.ndarray], rtol=RANK_RTOL) -> np.ndarray:
    """Basis ``(m, d, d)`` of matrices commuting with every matrix in ``mats``."""
    d = mats[0].shape[0]
    eye = np.eye(d)
    # row-major vec: vec(M T) = (M kron I) vec T, vec(T M) = (I kron M^T) vec T
    K = np.vstack([np.kron(M, eye) - np.kron(eye, M.T) for M in mats])
    N = null_space(K, rtol=rtol)
    return np.real_if_close(N.T).reshape(-1, d, d)


def _cluster(values, tol):
    """Single-linkage clusters of complex numbers (conjugates merged)."""
    pts = [complex(v.real, abs(v.imag)) for v in values]
    order = sorted(range(len(pts)), key=lambda i: (pts[i].real, pts[i].imag))
    clusters: list[list[int]] = []
    for i in order:
        for cl in clusters:
            if any(abs(pts[i] - pts[j]) <= tol for j in cl):
                cl.append(i)
                break
        else:
            clusters.append([i])
    # a single pass can leave chains split; merge until stable
    merged = True
    while merged:
        merged = False
        for a in range(len(clusters)):
            for b in range(a + 1, len(clusters)):
                if any(abs(pts[i] - pts[j]) <= tol for i in clusters[a] for j in clusters[b]):
                    clusters[a].extend(clusters.pop(b))
                    merged = True
                    break
            if merged:
                break
    return clusters


def _ideal_sort_key(Q: np.ndarray):
    P = Q @ Q.T
    return tuple(np.round(P.ravel(), 6))


def simple_ideal_decomposition(L: LieAlgebra, rng=None, seed: int = 0) -> list[Subalgebra]:
    """Split a semisimple algebra into its simple ideals.

    A random element of the centroid (the commutant of ``ad(L)``) acts on every
    simple ideal by a real scalar, or by ``a + bJ`` on complex simple ideals;
    its real eigen-blocks are therefore the simple ideals.  The count of those
    blocks is cross-checked against the centroid dimension and every block is
    checked to be ad-invariant.  Ideals are returned in a canonical order that
    does not depend on the random draws.
    """
    if not is_semisimple(L):
        raise PreconditionError(f"{L.label or 'algebra'} is not semisimple")
    rng = np.random.default_rng(seed) if rng is None else rng
    d = L.dim
    for _ in range(IDEAL_RETRIES):
        x, y = rng.standard_normal(d), rng.standard_normal(d)
        if lie_closure(L, [x, y]).dim != d:
            continue
        cent = commutant([ad(L, x), ad(L, y)])
        T = np.tensordot(rng.standard_normal(len(cent)), cent, axes=1)
        w, V = np.linalg.eig(T)
        tol = 1e-6 * max(1.0, float(np.max(np.abs(w))))
        ideals = []
        field_dims = 0
        ok = True
        for cl in _cluster(w, tol):
            is_real = all(abs(w[i].imag) <= tol for i in cl)
            Vc = V[:, cl]
            Q = orthonormal_basis(np.hstack([Vc.real, Vc.imag]))
            if Q.shape[1] != len(cl):
                ok = False
                break
            if not is_invariant(L, Subalgebra(Q), L.ad_basis):
                ok = False
                break
            field_dims += 1 if is_real else 2
            ideals.append(Q)
        if not ok or field_dims != len(cent) or sum(q.shape[1] for q in ideals) != d:
            continue
        ideals.sort(key=_ideal_sort_key, reverse=True)
        return [Subalgebra(q, closed=True) for q in ideals]
    raise NumericalDegeneracyError("ideal decomposition did not stabilize after retries")


def ideal_coordinates(ideals: Sequence[Subalgebra]) -> np.ndarray:
    """Matrix mapping an element to its stacked coordinates in the ideal bases.

    The ideals are a direct-sum decomposition but need not be Euclidean
    orthogonal, so projections go through the inverse of the stacked basis.
    """
    S = np.hstack([I.basis for I in ideals])
    return np.linalg.inv(S)


def ideal_projection(ideals: Sequence[Subalgebra], index: int) -> np.ndarray:
    """Projection onto ``ideals[index]`` along the remaining ideals."""
    Sinv = ideal_coordinates(ideals)
    start = sum(I.dim for I in ideals[:index])
    stop = start + ideals[index].dim
    return ideals[index].basis @ Sinv[start:stop]


# --- serialization ---------------------------------------------------------

def to_json_dict(L: LieAlgebra) -> dict:
    c = L.constants
    entries = []
    for i in range(L.dim):
        for j in range(i + 1, L.dim):
            for k in range(L.dim):
                v = float(c[i, j, k])
                if v != 0.0:
                    entries.append([i, j, k, v])
    return {"label": L.label, "dim": L.dim, "constants": entries}


def dumps(L: LieAlgebra, indent=None) -> str:
    return json.dumps(to_json_dict(L), indent=indent)


def from_json_dict(data: dict, check_jacobi=True) -> LieAlgebra:
    try:
        n = int(data["dim"])
        entries = data["constants"]
        label = str(data.get("label", ""))
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed structure-constant document: {exc}") from None
    if n < 1:
        raise InputError("dim must be positive")
    c = np.zeros((n, n, n))
    seen = {}
    for entry in entries:
        if len(entry) != 4:
            raise InputError(f"constant entry {entry!r} is not [i, j, k, value]")
        i, j, k = (int(t) for t in entry[:3])
        v = float(entry[3])
        if not all(0 <= t < n for t in (i, j, k)):
            raise InputError(f"index out of range in {entry!r}")
        if i == j:
            if v != 0.0:
                raise InputError(f"antisymmetry violated: nonzero c[{i}][{i}][{k}]")
            continue
        a, b, s = (i, j, 1.0) if i < j else (j, i, -1.0)
        key = (a, b, k)
        if key in seen and abs(seen[key] - s * v) > ANTISYM_TOL * max(1.0, abs(v)):
            raise InputError(f"antisymmetry violated at {key}")
        seen[key] = s * v
        c[a, b, k] = s * v
        c[b, a, k] = -s * v
    L = LieAlgebra(c, label=label)
    if check_jacobi:
        r = jacobi_residual(L)
        if r > JACOBI_RTOL:
            raise InputError(f"Jacobi identity violated (relative residual {r:.3g})")
    return L


def loads(text: str, check_jacobi=True) -> LieAlgebra:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON: {exc}") from None
    return from_json_dict(data, check_jacobi=check_jacobi)
