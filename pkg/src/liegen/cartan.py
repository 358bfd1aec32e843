"""Cartan involutions, root data and the torus-module decomposition.

Roots are computed in a complex model of the algebra: complex coordinates
``z`` together with complex structure constants.  Two situations are handled:

* ``L`` is a real form (no complex structure): the model is ``L (x) C`` with
  the same constants; the compact conjugation is ``tau(z) = theta(conj z)``
  and ``theta`` extends complex-linearly.
* ``L`` carries a complex structure ``J``: the model is ``L`` itself as a
  complex algebra, read off through a complex frame; ``seed.theta`` must then
  be antilinear (a compact conjugation).

In both cases ``tau`` maps the root space of ``alpha`` onto that of ``-alpha``,
which fixes the normalization ``e_{-alpha} = -tau(e_alpha)`` and makes every
``h_alpha = [e_alpha, e_{-alpha}]`` satisfy ``alpha(h_alpha) = 2``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InputError, NumericalDegeneracyError, PreconditionError
from .lie_core import LieAlgebra, Subalgebra, _cluster, ad
from .linalg import RANK_RTOL, null_space, numerical_rank, orthonormal_basis
from .seed import CartanSeed

AUTOMORPHISM_TOL = 1e-9
INVOLUTION_TOL = 1e-10
EIG_SEPARATION = 1e-6
FREQ_TOL = 1e-6
ROOT_RETRIES = 5

__all__ = [
    "CartanSeed",
    "CartanDecomposition",
    "Root",
    "RootDatum",
    "TorusModuleDecomposition",
    "IsotypicComponent",
    "automorphism_defect",
    "verify_cartan_involution",
    "cartan_decomposition",
    "check_seed",
    "root_datum",
    "positive_system",
    "torus_module_decomposition",
]


def _theta_form(L: LieAlgebra, theta) -> np.ndarray:
    G = -L.killing_gram @ theta
    return 0.5 * (G + G.T)


def automorphism_defect(L: LieAlgebra, theta) -> float:
    """Max over basis pairs of ``|theta[b_i, b_j] - [theta b_i, theta b_j]|``, relative to ``max|c|``."""
    c = L.constants
    lhs = np.einsum("ijk,lk->ijl", c, theta)
    rhs = np.einsum("ai,bj,abk->ijk", theta, theta, c)
    return float(np.max(np.abs(lhs - rhs)) / max(np.max(np.abs(c)), 1e-300))


def _check_operator(L, theta):
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (L.dim, L.dim):
        raise InputError(f"operator has shape {theta.shape}, expected {(L.dim, L.dim)}")
    return theta


def verify_cartan_involution(L: LieAlgebra, theta) -> bool:
    """True iff ``theta`` is an involution with ``-B(x, theta y)`` positive definite.

    Raises :class:`PreconditionError` when ``theta`` is not an automorphism.
    """
    theta = _check_operator(L, theta)
    if automorphism_defect(L, theta) > AUTOMORPHISM_TOL:
        raise PreconditionError("theta is not a Lie algebra automorphism")
    scale = max(1.0, float(np.max(np.abs(theta))))
    if np.max(np.abs(theta @ theta - np.eye(L.dim))) > INVOLUTION_TOL * scale:
        return False
    w = np.linalg.eigvalsh(_theta_form(L, theta))
    return bool(w[0] > RANK_RTOL * max(abs(w[-1]), 1e-300))


@dataclass(frozen=True, eq=False)
class CartanDecomposition:
    k: Subalgebra
    p: Subalgebra

    @property
    def dims(self) -> tuple:
        return (self.k.dim, self.p.dim)


def cartan_decomposition(L: LieAlgebra, theta) -> CartanDecomposition:
    theta = _check_operator(L, theta)
    if not verify_cartan_involution(L, theta):
        raise PreconditionError("theta is not a Cartan involution")
    eye = np.eye(L.dim)
    k = orthonormal_basis(0.5 * (eye + theta))
    p = orthonormal_basis(0.5 * (eye - theta))
    return CartanDecomposition(Subalgebra(k, closed=True), Subalgebra(p))


def check_seed(L: LieAlgebra, seed: CartanSeed) -> dict:
    """Check every seed invariant; returns ``{name: bool}``."""
    d = L.dim
    th = seed.theta
    H = seed.cartan_basis
    out = {"shape": th.shape == (d, d) and H.shape[1] == d}
    if not out["shape"]:
        return out
    out["involution"] = bool(np.max(np.abs(th @ th - np.eye(d))) <= INVOLUTION_TOL * max(1.0, np.max(np.abs(th))))
    probe = np.random.default_rng(0).standard_normal((20, d))
    q = np.einsum("ri,ij,rj->r", probe, _theta_form(L, th), probe)
    out["positive"] = bool(np.all(q > 0))
    ab = max((float(np.max(np.abs(ad(L, x) @ y))) for x in H for y in H), default=0.0)
    out["abelian"] = ab <= 1e-9 * L.bracket_scale
    cent = null_space(np.vstack([ad(L, x) for x in H])).shape[1]
    out["self_centralizing"] = cent == numerical_rank(H.T) == seed.rank
    out["theta_stable"] = all(
        np.allclose(th @ H[i], H[i], atol=1e-9) for i in seed.compact
    ) and all(np.allclose(th @ H[i], -H[i], atol=1e-9) for i in seed.noncompact)
    out["partition"] = sorted(seed.compact + seed.noncompact) == list(range(seed.rank))
    return out


# --- complex model ---------------------------------------------------------

def _complex_frame(J: np.ndarray) -> np.ndarray:
    """Real basis ``[U, JU]`` adapted to ``J``, so ``x = U Re z + JU Im z``."""
    d = J.shape[0]
    cols = []
    Q = np.zeros((d, 0))
    for i in range(d):
        e = np.zeros(d)
        e[i] = 1.0
        cand = np.stack([e, J @ e], axis=1)
        R = cand - Q @ (Q.T @ cand)
        if np.linalg.norm(R[:, 0]) > 1e-6:
            cols.append(e)
            Q = orthonormal_basis(np.hstack([Q, cand]))
        if len(cols) * 2 == d:
            break
    U = np.stack(cols, axis=1)
    return np.hstack([U, J @ U])


class _ComplexModel:
    """Complex coordinates, complex constants and conjugations for root computations."""

    def __init__(self, L: LieAlgebra, seed: CartanSeed, use_complex_structure: bool):
        self.L = L
        self.seed = seed
        if L.complex_structure is not None and use_complex_structure:
            self.complex_path = True
            J = L.complex_structure
            P = _complex_frame(J)
            n = L.dim // 2
            Pinv = np.linalg.inv(P)
            self.P = P
            self.to_c = Pinv[:n] + 1j * Pinv[n:]
            # [u_a, u_b] in complex coordinates, u_a = P[:, a]
            U = P[:, :n]
            c = L.constants
            brk = np.einsum("ia,jb,ijk->abk", U, U, c)
            self.C = np.einsum("abk,nk->abn", brk, self.to_c)
            self.n = n
            if automorphism_defect(L, seed.theta) > AUTOMORPHISM_TOL:
                raise PreconditionError("seed involution is not an automorphism")
            if np.max(np.abs(seed.theta @ J + J @ seed.theta)) > 1e-9:
                raise PreconditionError("on a complex algebra the seed involution must be antilinear")
        else:
            from .constructors import complexify_then_realify

            self.complex_path = False
            self.n = L.dim
            self.to_c = np.eye(L.dim, dtype=complex)
            self.C = L.constants.astype(complex)
            self._ambient = None
            self._complexify = complexify_then_realify
        self.adC = np.ascontiguousarray(self.C.transpose(0, 2, 1))

    @property
    def ambient_algebra(self) -> LieAlgebra:
        if self.complex_path:
            return self.L
        if self._ambient is None:
            self._ambient = self._complexify(self.L)
        return self._ambient

    def realify(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        w = np.concatenate([z.real, z.imag])
        return self.P @ w if self.complex_path else w

    def tau(self, z) -> np.ndarray:
        th = self.seed.theta
        if self.complex_path:
            return self.to_c @ (th @ self.realify(z))
        return th @ np.conj(z)

    def theta_c(self, z) -> Optional[np.ndarray]:
        if self.complex_path:
            return None
        return self.seed.theta @ z

    def ad(self, z) -> np.ndarray:
        return np.tensordot(z, self.adC, axes=1)

    def bracket(self, u, v) -> np.ndarray:
        return np.einsum("i,j,ijk->k", u, v, self.C)


@dataclass(frozen=True, eq=False)
class Root:
    """One root: values on the seed's Cartan rows and a normalized sl2 pair (complex coordinates)."""

    value: np.ndarray
    e_c: np.ndarray
    h_c: np.ndarray


@dataclass(frozen=True, eq=False)
class RootDatum:
    seed: CartanSeed
    model: _ComplexModel
    roots: tuple
    positive: tuple
    negative_of: tuple
    theta_perm: Optional[tuple]
    theta_scalar: Optional[tuple]

    @property
    def cartan_dim(self) -> int:
        """Complex dimension of the Cartan subalgebra of the complex model."""
        return self.model.n - len(self.roots)

    @property
    def ambient(self) -> LieAlgebra:
        """The realified complex algebra in which root vectors live."""
        return self.model.ambient_algebra

    def e(self, i) -> np.ndarray:
        return self.model.realify(self.roots[i].e_c)

    def h(self, i) -> np.ndarray:
        return self.model.realify(self.roots[i].h_c)

    def sl2_triple(self, i):
        """``(e, f, h)`` for root ``i`` as elements of :attr:`ambient`."""
        j = self.negative_of[i]
        return self.e(i), self.e(j), self.h(i)

    def positive_indices(self) -> list:
        return [i for i, p in enumerate(self.positive) if p]

    def value_matrix(self) -> np.ndarray:
        return np.array([r.value for r in self.roots])


def _value_vectors(model: _ComplexModel, rows_c, E) -> np.ndarray:
    """``V[r, j]`` = eigenvalue of ``ad(rows_c[j])`` on column ``E[:, r]``."""
    nrm = np.sum(np.abs(E) ** 2, axis=0)
    vals = []
    for z in rows_c:
        AE = model.ad(z) @ E
        vals.append(np.sum(E.conj() * AE, axis=0) / nrm)
    return np.array(vals).T


def _refine(model, rows_c, values, e) -> np.ndarray:
    """Joint eigenvector of the Cartan action for the given values (SVD null vector)."""
    M = np.vstack([model.ad(z) - v * np.eye(model.n) for z, v in zip(rows_c, values)])
    _, _, Vh = np.linalg.svd(M)
    f = Vh[-1].conj()
    return f * (np.vdot(f, e) / abs(np.vdot(f, e)))


def _eval_sequence(seed: CartanSeed, value) -> np.ndarray:
    """Root values on ``(i t_1, ..., a_1, ...)``; real for a maximally compact Cartan."""
    it = [1j * value[j] for j in seed.compact]
    a = [value[j] for j in seed.noncompact]
    return np.real(np.array(it + a))


def _phase_fix(e: np.ndarray) -> np.ndarray:
    k = int(np.argmax(np.abs(e) > 0.5 * np.max(np.abs(e))))
    return e * (abs(e[k]) / e[k])


def root_datum(L: LieAlgebra, seed: Optional[CartanSeed] = None, rng=None,
               use_complex_structure: bool = True) -> RootDatum:
    """Roots, normalized root vectors and coroots relative to ``seed``.

    The Cartan action is diagonalized through a random real combination ``h0``
    of the seed's Cartan rows; on an eigenvalue collision (within 1e-6) a fresh
    ``h0`` is drawn, up to five times.  The result carries the positive system
    of :func:`positive_system`.
    """
    seed = L.seed if seed is None else seed
    if seed is None:
        raise PreconditionError("algebra has no Cartan seed")
    rng = np.random.default_rng(0) if rng is None else rng
    model = _ComplexModel(L, seed, use_complex_structure)
    rows_c = [model.to_c @ r for r in seed.cartan_basis]
    m = _complex_rank(np.array(rows_c).T)
    n_roots = model.n - m
    scale = L.bracket_scale
    for _ in range(ROOT_RETRIES):
        r = rng.standard_normal(len(rows_c))
        h0 = sum(ri * z for ri, z in zip(r, rows_c))
        w, V = np.linalg.eig(model.ad(h0))
        wscale = max(1.0, float(np.max(np.abs(w))))
        nz = np.abs(w) > EIG_SEPARATION * wscale
        if int(nz.sum()) != n_roots:
            continue
        wr = w[nz]
        gaps = np.abs(wr[:, None] - wr[None, :])
        np.fill_diagonal(gaps, np.inf)
        if len(wr) and np.min(gaps) <= EIG_SEPARATION * wscale:
            continue
        E = V[:, nz]
        vals = _value_vectors(model, rows_c, E)
        E = np.stack([_refine(model, rows_c, vals[k], E[:, k]) for k in range(E.shape[1])], axis=1)
        vals = _value_vectors(model, rows_c, E)
        break
    else:
        raise NumericalDegeneracyError("no generic Cartan element found after retries")
    if n_roots == 0:
        return RootDatum(seed, model, (), (), (), () if not model.complex_path else None,
                         () if not model.complex_path else None)
    return _assemble(model, seed, rows_c, vals, E, scale)


def _complex_rank(R: np.ndarray) -> int:
    _, s, _ = np.linalg.svd(R)
    return int(np.sum(s > RANK_RTOL * max(s[0], 1e-300)))


def _match(vals, target, tol):
    d = np.max(np.abs(vals - target[None, :]), axis=1)
    k = int(np.argmin(d))
    return k if d[k] <= tol else None


def _assemble(model, seed, rows_c, vals, E, scale) -> RootDatum:
    nr = len(vals)
    vscale = max(1.0, float(np.max(np.abs(vals))))
    tol = EIG_SEPARATION * vscale
    positive = []
    for v in vals:
        seq = _eval_sequence(seed, v)
        nzs = np.nonzero(np.abs(seq) > 1e-9 * vscale)[0]
        if len(nzs) == 0:
            raise NumericalDegeneracyError("a root vanishes on the whole Cartan")
        positive.append(bool(seq[nzs[0]] > 0))
    neg = []
    for v in vals:
        k = _match(vals, -v, tol)
        if k is None:
            raise NumericalDegeneracyError("roots do not come in +- pairs")
        neg.append(k)
    e_c = [None] * nr
    h_c = [None] * nr
    for i in range(nr):
        if not positive[i]:
            continue
        e = _phase_fix(E[:, i])
        f = -model.tau(e)
        hp = model.bracket(e, f)
        a_hp = np.vdot(e, model.ad(hp) @ e) / np.vdot(e, e)
        if abs(a_hp.imag) > 1e-6 * abs(a_hp) or a_hp.real <= 0:
            raise NumericalDegeneracyError("compact conjugation does not pair root spaces")
        s = np.sqrt(2.0 / a_hp.real)
        e_c[i] = s * e
        e_c[neg[i]] = s * f
        h_c[i] = s * s * hp
        h_c[neg[i]] = -h_c[i]
    if any(x is None for x in e_c):
        raise NumericalDegeneracyError("positive system is not a half of the roots")
    # canonical order: positives first, then by rounded evaluation sequence
    keys = []
    for i, v in enumerate(vals):
        seq = np.round(_eval_sequence(seed, v), 6) + 0.0
        keys.append((not positive[i], tuple(-seq)))
    order = sorted(range(nr), key=lambda i: keys[i])
    inv = {old: new for new, old in enumerate(order)}
    roots = tuple(Root(vals[i], e_c[i], h_c[i]) for i in order)
    pos = tuple(positive[i] for i in order)
    negs = tuple(inv[neg[i]] for i in order)
    theta_perm = theta_scalar = None
    if not model.complex_path:
        theta_perm, theta_scalar = _theta_action(model, seed, roots, tol)
    return RootDatum(seed, model, roots, pos, negs, theta_perm, theta_scalar)


def _theta_action(model, seed, roots, tol):
    vals = np.array([r.value for r in roots])
    sign = np.ones(seed.rank)
    sign[list(seed.noncompact)] = -1
    perm, scalars = [], []
    for r in roots:
        k = _match(vals, r.value * sign, tol)
        if k is None:
            raise NumericalDegeneracyError("theta does not permute the roots")
        te = model.theta_c(r.e_c)
        tgt = roots[k].e_c
        s = np.vdot(tgt, te) / np.vdot(tgt, tgt)
        if np.linalg.norm(te - s * tgt) > 1e-6 * np.linalg.norm(te):
            raise NumericalDegeneracyError("theta does not map root spaces to root spaces")
        perm.append(k)
        scalars.append(complex(s))
    return tuple(perm), tuple(scalars)


def positive_system(rd: RootDatum, seed: Optional[CartanSeed] = None) -> RootDatum:
    """Positive flags from the first nonzero value on ``(i t, a)`` (already set by :func:`root_datum`).

    Recomputes the flags for ``seed`` (default: the seed of ``rd``) and checks
    that they form a positive system: exactly one of each ``+-`` pair.
    """
    seed = rd.seed if seed is None else seed
    vscale = max(1.0, float(np.max(np.abs(rd.value_matrix())))) if rd.roots else 1.0
    flags = []
    for r in rd.roots:
        seq = _eval_sequence(seed, r.value)
        nzs = np.nonzero(np.abs(seq) > 1e-9 * vscale)[0]
        if len(nzs) == 0:
            raise NumericalDegeneracyError("a root vanishes on the evaluation basis")
        flags.append(bool(seq[nzs[0]] > 0))
    for i, j in enumerate(rd.negative_of):
        if flags[i] == flags[j]:
            raise NumericalDegeneracyError("positivity is not antisymmetric")
    return RootDatum(seed, rd.model, rd.roots, tuple(flags), rd.negative_of,
                     rd.theta_perm, rd.theta_scalar)


# --- torus module ----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class IsotypicComponent:
    frequency: np.ndarray
    summands: tuple

    @property
    def multiplicity(self) -> int:
        return len(self.summands)


@dataclass(frozen=True, eq=False)
class TorusModuleDecomposition:
    trivial_part: Subalgebra
    components: tuple

    @property
    def multiplicities(self) -> list:
        return [c.multiplicity for c in self.components]

    @property
    def summands(self) -> list:
        return [s for c in self.components for s in c.summands]


def _canonical_sign(f, tol):
    nz = np.nonzero(np.abs(f) > tol)[0]
    return -1.0 if len(nz) and f[nz[0]] < 0 else 1.0


def torus_module_decomposition(L: LieAlgebra, seed: Optional[CartanSeed] = None,
                               rng=None) -> TorusModuleDecomposition:
    """Split ``L = h + V`` into 2-dimensional irreducibles of the compact torus ``t``.

    In coordinates orthonormal for ``-B(x, theta y)`` every ``ad_t`` is skew, so
    ``S = ad_{t0}^2`` for a random ``t0`` in ``t`` is symmetric; its zero space
    is the centralizer of ``t`` and each nonzero eigenspace splits into planes
    ``span{v, ad_{t0} v}``.  The frequency vector of a plane lists the rotation
    speeds of the torus rows on it (sign fixed so the first nonzero entry is
    positive).  Planes with matching frequencies (within 1e-6) form one
    isotypic component.
    """
    seed = L.seed if seed is None else seed
    if seed is None:
        raise PreconditionError("algebra has no Cartan seed")
    rng = np.random.default_rng(0) if rng is None else rng
    T = seed.torus
    H = seed.cartan_basis
    if max((float(np.max(np.abs(ad(L, x) @ y))) for x in T for y in T), default=0.0) > 1e-9 * L.bracket_scale:
        raise PreconditionError("torus rows do not commute")
    G = _theta_form(L, seed.theta)
    try:
        R = np.linalg.cholesky(G).T  # G = R^T R
    except np.linalg.LinAlgError:
        raise PreconditionError("seed involution is not a Cartan involution") from None
    Rinv = np.linalg.inv(R)
    A = [R @ ad(L, t) @ Rinv for t in T]
    skew = max((float(np.max(np.abs(a + a.T))) for a in A), default=0.0)
    if skew > 1e-8 * L.bracket_scale:
        raise PreconditionError("torus does not act by theta-skew operators")
    d = L.dim
    Hy = orthonormal_basis(R @ H.T)
    for _ in range(ROOT_RETRIES):
        r = rng.standard_normal(len(A))
        A0 = sum(ri * a for ri, a in zip(r, A)) if A else np.zeros((d, d))
        S = A0 @ A0
        lam, W = np.linalg.eigh(0.5 * (S + S.T))
        lscale = max(1.0, float(np.max(np.abs(lam))))
        zero = np.abs(lam) <= EIG_SEPARATION * lscale
        Z = W[:, zero]
        if Z.shape[1] != H.shape[0] or np.linalg.norm(Z - Hy @ (Hy.T @ Z)) > 1e-6:
            if Z.shape[1] > H.shape[0]:
                raise PreconditionError("centralizer of the torus is larger than the Cartan")
            continue
        idx = np.nonzero(~zero)[0]
        clusters = _cluster(-lam[idx] + 0j, EIG_SEPARATION * lscale)
        planes = []
        ok = True
        for cl in clusters:
            Wc = W[:, idx[cl]]
            if Wc.shape[1] % 2:
                ok = False
                break
            omega = np.sqrt(np.mean(-lam[idx[cl]]))
            freqs = []
            rest = Wc
            while rest.shape[1]:
                v = rest[:, 0]
                u = A0 @ v / omega
                u -= v * (v @ u)
                u /= np.linalg.norm(u)
                f = np.array([u @ (a @ v) for a in A])
                s = _canonical_sign(f, FREQ_TOL)
                f = s * f + 0.0
                u = s * u
                freqs.append(f)
                planes.append((f, np.stack([v, u], axis=1)))
                P = np.stack([v, u], axis=1)
                rest = rest - P @ (P.T @ rest)
                rest = orthonormal_basis(rest, scale=1.0)
            fr = np.array(freqs)
            if np.max(np.abs(fr - fr[0])) > FREQ_TOL * max(1.0, np.max(np.abs(fr))):
                ok = False  # two characters share |<f, r>|: resample t0
                break
        if not ok:
            continue
        groups: list[list] = []
        for f, P in planes:
            for g in groups:
                if np.max(np.abs(g[0] - f)) <= FREQ_TOL * max(1.0, np.max(np.abs(f))):
                    g[1].append(P)
                    break
            else:
                groups.append([f, [P]])
        groups.sort(key=lambda g: tuple(np.round(g[0], 6)))
        comps = []
        for f, Ps in groups:
            subs = tuple(Subalgebra(orthonormal_basis(Rinv @ P)) for P in Ps)
            comps.append(IsotypicComponent(np.asarray(f), subs))
        triv = Subalgebra(orthonormal_basis(H.T), closed=True)
        return TorusModuleDecomposition(triv, tuple(comps))
    raise NumericalDegeneracyError("could not separate torus characters after retries")

