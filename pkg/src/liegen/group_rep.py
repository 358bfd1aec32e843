"""Element-level experiments in compact matrix groups.

Non-finiteness certificate.  If every finite subgroup of ``G`` has a normal
abelian subgroup of index at most ``C``, then in a finite subgroup every
element ``w`` has ``w^N`` in that abelian subgroup whenever ``N`` is a common
multiple of ``1..C`` (the image of ``w`` in the quotient has order at most
``C``).  So a pair of words with non-commuting ``N``-th powers shows that
``<g, h>`` is infinite.  We use ``N = lcm(1..C)``, far smaller than ``C!``.

Powers with such ``N`` are numerically ill-conditioned (angles are multiplied
by ``N``), so certificates are evidence, never proofs: a word whose ``m``-th
power is the identity to 1e-8 for some ``m <= C`` is treated as having order
``m`` (its ``N``-th power is then exactly the identity), and certificates can
be re-checked in extended precision with :func:`verify_certificate`.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import reduce
from typing import Optional

import numpy as np
import scipy.linalg as spla

from .errors import InputError, PreconditionError
from .generation import GenerationReport
from .lie_core import lie_closure
from .linalg import expm, polar_orthogonal

SO3 = "SO(3)"
SU2 = "SU(2)-realified"
SLR = "SL(n,R)"
ORTHOGONAL_TAGS = (SO3, SU2)
COMPACT_GROUPS = {"so3": SO3, "su2": SU2}
DEFAULT_JORDAN = {SO3: 60, SU2: 60}

RELATION_TOL = 1e-9
COMMUTATOR_TOL = 1e-4
ORDER_TOL = 1e-8
REORTH_EVERY = 32
LETTERS = "ghGH"
_INVERSE = {"g": "G", "G": "g", "h": "H", "H": "h"}


@dataclass(frozen=True, eq=False)
class GroupElement:
    matrix: np.ndarray
    tag: str

    def __post_init__(self):
        M = np.array(self.matrix, dtype=float)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise InputError("group element must be a square matrix")
        if self.tag in ORTHOGONAL_TAGS:
            if np.max(np.abs(M.T @ M - np.eye(len(M)))) > RELATION_TOL:
                raise InputError("matrix is not orthogonal")
        if abs(np.linalg.det(M) - 1.0) > RELATION_TOL * max(1, len(M)):
            raise InputError("matrix does not have unit determinant")
        if self.tag == SU2 and M.shape != (4, 4):
            raise InputError("realified SU(2) elements are 4x4")
        if self.tag == SO3 and M.shape != (3, 3):
            raise InputError("SO(3) elements are 3x3")
        M.flags.writeable = False
        object.__setattr__(self, "matrix", M)

    def inverse_matrix(self) -> np.ndarray:
        if self.tag in ORTHOGONAL_TAGS:
            return self.matrix.T
        return np.linalg.inv(self.matrix)


@dataclass(frozen=True)
class Word:
    """Letters over ``g, h`` with capitals for inverses, e.g. ``"ghGH"``."""

    letters: str

    def __post_init__(self):
        if any(c not in LETTERS for c in self.letters):
            raise InputError(f"word {self.letters!r} uses letters outside {LETTERS!r}")
        for a, b in zip(self.letters, self.letters[1:]):
            if _INVERSE[a] == b:
                raise InputError(f"word {self.letters!r} is not freely reduced")

    @classmethod
    def parse(cls, text: str) -> "Word":
        """Accepts ``"ghGH"`` or ``"g h g^-1 h^-1"``."""
        toks = text.replace("^-1", "'").split() if " " in text or "^" in text else list(text)
        out = []
        for t in toks:
            if t in ("g'", "h'"):
                out.append(t[0].upper())
            else:
                out.extend(t)
        return cls("".join(out))

    def __len__(self):
        return len(self.letters)

    def __str__(self):
        return self.letters

    def inverse(self) -> "Word":
        return Word("".join(_INVERSE[c] for c in reversed(self.letters)))


def _check_pair(g: GroupElement, h: GroupElement):
    if g.tag != h.tag or g.matrix.shape != h.matrix.shape:
        raise InputError("group elements have incompatible tags")


def _letter_mats(g: GroupElement, h: GroupElement) -> dict:
    return {"g": g.matrix, "G": g.inverse_matrix(), "h": h.matrix, "H": h.inverse_matrix()}


def word_eval(g: GroupElement, h: GroupElement, w) -> GroupElement:
    _check_pair(g, h)
    w = w if isinstance(w, Word) else Word(w)
    mats = _letter_mats(g, h)
    M = reduce(lambda A, c: A @ mats[c], w.letters, np.eye(len(g.matrix)))
    if g.tag in ORTHOGONAL_TAGS and len(w) > 64:
        M = polar_orthogonal(M)
    return GroupElement(M, g.tag)


def reduced_words(max_len: int):
    """Freely reduced words, by length, lexicographic in the order ``g, h, G, H``."""
    order = "ghGH"
    level = [""]
    for _ in range(max_len):
        level = [w + c for w in level for c in order if not (w and _INVERSE[w[-1]] == c)]
        yield from level


def jordan_exponent(C: int) -> int:
    if C < 1:
        raise InputError("Jordan constant must be at least 1")
    return math.lcm(*range(1, C + 1))


def matrix_power(M: np.ndarray, N: int, orthogonal: bool = True) -> np.ndarray:
    """``M^N`` by binary exponentiation; polar re-orthogonalization every 32 squarings."""
    R = np.eye(len(M))
    B = np.array(M, dtype=float)
    k = 0
    while N:
        if N & 1:
            R = R @ B
        N >>= 1
        if N:
            B = B @ B
            k += 1
            if orthogonal and k % REORTH_EVERY == 0:
                B = polar_orthogonal(B)
                R = polar_orthogonal(R)
    return polar_orthogonal(R) if orthogonal else R


def _small_order(M: np.ndarray, C: int) -> Optional[int]:
    P = np.eye(len(M))
    for m in range(1, C + 1):
        P = P @ M
        if np.max(np.abs(P - np.eye(len(M)))) <= ORDER_TOL:
            return m
    return None


def _power_N(M, C, N):
    if _small_order(M, C) is not None:
        return np.eye(len(M))
    return matrix_power(M, N)


def group_commutator(A, B):
    return A @ B @ A.T @ B.T


@dataclass
class Certificate:
    kind: str
    exponent: int = 0
    w1: Optional[Word] = None
    w2: Optional[Word] = None
    deviation: float = 0.0
    coverage: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        d = {"kind": self.kind}
        if self.kind == "nonfinite_jordan":
            d.update(w1=str(self.w1), w2=str(self.w2), exponent=str(self.exponent),
                     deviation=self.deviation)
        else:
            d["coverage"] = self.coverage
        return d


def jordan_certificate(g: GroupElement, h: GroupElement, C: int = 60, max_len: int = 4) -> Optional[Certificate]:
    """First word pair, in enumeration order, whose ``N``-th powers do not commute.

    ``None`` is inconclusive; it never asserts that ``<g, h>`` is finite.
    """
    _check_pair(g, h)
    if g.tag not in ORTHOGONAL_TAGS:
        raise PreconditionError("certificates are only defined for compact groups")
    N = jordan_exponent(C)
    mats = _letter_mats(g, h)
    powers = []
    words = []
    n = len(g.matrix)
    for w in reduced_words(max_len):
        M = reduce(lambda A, c: A @ mats[c], w, np.eye(n))
        P = _power_N(M, C, N)
        for v, Q in zip(words, powers):
            dev = float(np.linalg.norm(group_commutator(Q, P) - np.eye(n), 2))
            if dev > COMMUTATOR_TOL:
                return Certificate("nonfinite_jordan", N, Word(v), Word(w), dev)
        words.append(w)
        powers.append(P)
    return None


def verify_certificate(g: GroupElement, h: GroupElement, cert: Certificate, C: int = 60,
                       dps: int = 60) -> float:
    """Recompute the certificate's commutator deviation in ``dps``-digit arithmetic.

    Inputs are first projected onto the orthogonal group at full precision, then
    powered by repeated squaring with periodic Newton polar steps.
    """
    import mpmath

    old = mpmath.mp.dps
    mpmath.mp.dps = dps
    try:
        def to_mp(M):
            return mpmath.matrix([[mpmath.mpf(float(x)) for x in row] for row in M])

        def polar(X):
            for _ in range(8):
                X = (X + (X ** -1).T) / 2
            return X

        G = polar(to_mp(g.matrix))
        H = polar(to_mp(h.matrix))
        mats = {"g": G, "G": G.T, "h": H, "H": H.T}
        n = len(g.matrix)
        eye = mpmath.eye(n)

        def ev(w):
            M = eye
            for c in w.letters:
                M = M * mats[c]
            return M

        def power(M, N):
            R, B, k = eye, M, 0
            while N:
                if N & 1:
                    R = R * B
                N >>= 1
                if N:
                    B = B * B
                    k += 1
                    if k % REORTH_EVERY == 0:
                        B = polar(B)
            return R

        def pw(w):
            M = ev(w)
            if _small_order(np.array(M.tolist(), dtype=float), C) is not None:
                return eye
            return power(M, cert.exponent)

        P1, P2 = pw(cert.w1), pw(cert.w2)
        D = P1 * P2 * P1.T * P2.T - eye
        return float(np.linalg.norm(np.array(D.tolist(), dtype=float), 2))
    finally:
        mpmath.mp.dps = old


# --- epsilon nets ----------------------------------------------------------

def _op_norm_dist(stack: np.ndarray, target: np.ndarray) -> np.ndarray:
    D = stack - target
    return np.linalg.norm(D, ord=2, axis=(-2, -1))


def _algebra_basis(tag: str) -> np.ndarray:
    from .constructors import build

    if tag == SO3:
        return build("so:3").matrices.real
    if tag == SU2:
        M = build("su:2").matrices
        return np.array([np.block([[m.real, -m.imag], [m.imag, m.real]]) for m in M])
    raise PreconditionError(f"no compact algebra basis for {tag}")


def _ball_samples(tag, radius, n, rng) -> np.ndarray:
    """Exponentials of random algebra elements, uniform in a norm ball with ``|exp - I| <= radius``."""
    B = _algebra_basis(tag)
    k = len(B)
    tmax = 2 * math.asin(min(1.0, radius / 2))
    out = []
    for _ in range(n):
        A = np.tensordot(rng.standard_normal(k), B, axes=1)
        A /= np.linalg.norm(A, 2)
        t = tmax * rng.uniform() ** (1.0 / k)
        out.append(expm(t * A))
    return np.array(out)


def word_levels(g: GroupElement, h: GroupElement, max_words: int):
    """Yield ``(length, matrices)`` for the reduced words, level by level, ``max_words`` in total.

    Matrices within a level follow :func:`reduced_words` order.
    """
    order = "ghGH"
    L = _letter_mats(g, h)
    Ls = np.array([L[c] for c in order])
    inv_idx = np.array([order.index(_INVERSE[c]) for c in order])
    level = np.eye(len(g.matrix))[None]
    last = np.array([-1])
    done = length = 0
    while done < max_words:
        # children of each word: word-major, then letter, which is lexicographic
        kids = np.einsum("mij,cjk->mcik", level, Ls)
        mask = np.ones((len(level), 4), bool)
        if length:
            mask[np.arange(len(level)), inv_idx[last]] = False
        level = kids[mask]
        last = np.broadcast_to(np.arange(4), mask.shape)[mask]
        length += 1
        room = max_words - done
        if len(level) > room:
            level, last = level[:room], last[:room]
        done += len(level)
        yield length, level


def epsilon_net_evidence(g: GroupElement, h: GroupElement, radius: float = 0.5, eps: float = 0.15,
                         max_words: int = 200_000, rng=None, seed: int = 0,
                         n_samples: int = 200) -> Certificate:
    """Coverage of the ``radius``-ball around the identity by short words, at scale ``eps``.

    Words are evaluated breadth-first (in :func:`reduced_words` order) up to
    ``max_words`` matrices; those within ``radius`` of the identity (operator
    norm) are kept, and the certificate records the fraction of ``n_samples``
    random points of the ball lying within ``eps`` of a kept word.
    """
    _check_pair(g, h)
    if eps <= 0:
        raise InputError("eps must be positive")
    if radius <= 0:
        raise InputError("radius must be positive")
    rng = np.random.default_rng(seed) if rng is None else rng
    n = len(g.matrix)
    eye = np.eye(n)
    kept = []
    evaluated = length = 0
    for length, level in word_levels(g, h, max_words):
        evaluated += len(level)
        fro = np.linalg.norm(level - eye, axis=(1, 2))
        cand = level[fro <= radius * math.sqrt(n)]
        if len(cand):
            kept.append(cand[_op_norm_dist(cand, eye) <= radius])
    K = np.concatenate(kept) if kept else np.zeros((0, n, n))
    S = _ball_samples(g.tag, radius, n_samples, rng)
    covered = 0
    for s in S:
        if len(K):
            fro = np.linalg.norm(K - s, axis=(1, 2))
            near = K[fro <= eps * math.sqrt(n)]
            if len(near) and np.min(_op_norm_dist(near, s)) <= eps:
                covered += 1
    cov = {
        "evaluated": evaluated,
        "max_length": length,
        "kept": int(len(K)),
        "samples": n_samples,
        "covered": covered,
        "coverage": covered / n_samples,
        "radius": radius,
        "eps": eps,
    }
    return Certificate("epsilon_net", coverage=cov)


# --- Monte Carlo over element pairs ---------------------------------------

def random_element(tag: str, rng, sigma: float = 1.0) -> GroupElement:
    B = _algebra_basis(tag)
    A = np.tensordot(sigma * rng.standard_normal(len(B)), B, axes=1)
    return GroupElement(polar_orthogonal(expm(A)), tag)


def _log_coordinates(M: np.ndarray, B: np.ndarray) -> np.ndarray:
    X = spla.logm(M)
    X = np.real(X)
    coef, *_ = np.linalg.lstsq(B.reshape(len(B), -1).T, X.ravel(), rcond=None)
    return coef


def infinitesimal_probe(g: GroupElement, h: GroupElement) -> bool:
    """Lie closure of the logarithms of ``g, h, gh, gH`` is the whole algebra."""
    from .constructors import build

    L = build("so:3" if g.tag == SO3 else "su:2")
    B = _algebra_basis(g.tag)
    logs = [_log_coordinates(word_eval(g, h, w).matrix, B) for w in ("g", "h", "gh", "gH")]
    return lie_closure(L, np.array(logs).T).dim == L.dim


def _pair_worker(args):
    tag, seed, C, max_len, sigma, indices = args
    out = []
    for i in indices:
        rng = np.random.default_rng([seed, i])
        g = random_element(tag, rng, sigma)
        h = random_element(tag, rng, sigma)
        cert = jordan_certificate(g, h, C, max_len)
        probe = infinitesimal_probe(g, h)
        rec = {"trial": i, "certificate": cert.to_json_dict() if cert else None, "probe": probe}
        if not (cert and probe):
            rec["g"] = g.matrix.tolist()
            rec["h"] = h.matrix.tolist()
        out.append(rec)
    return out


def element_pair_montecarlo(group: str, trials: int, seed: int, C: Optional[int] = None,
                            max_len: int = 4, sigma: float = 1.0, workers: int = 1) -> GenerationReport:
    """Success = non-finiteness certificate found and the infinitesimal probe is full."""
    if group not in COMPACT_GROUPS:
        raise InputError(f"group must be one of {sorted(COMPACT_GROUPS)}")
    if seed is None or int(seed) < 0:
        raise InputError("an explicit nonnegative seed is required")
    if trials < 0 or max_len < 1 or workers < 1:
        raise InputError("trials >= 0, max_len >= 1 and workers >= 1 are required")
    tag = COMPACT_GROUPS[group]
    C = DEFAULT_JORDAN[tag] if C is None else int(C)
    jordan_exponent(C)
    from .generation import _chunks

    jobs = [(tag, int(seed), C, int(max_len), float(sigma), idx)
            for idx in _chunks(trials, workers)] if trials else []
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            recs = [r for chunk in ex.map(_pair_worker, jobs) for r in chunk]
    else:
        recs = [r for job in jobs for r in _pair_worker(job)]
    recs.sort(key=lambda r: r["trial"])
    ok = [r for r in recs if r["certificate"] and r["probe"]]
    failures = [r for r in recs if not (r["certificate"] and r["probe"])]
    cfg = {"group": group, "jordan_c": C, "max_word_len": int(max_len), "sigma": float(sigma)}
    records = [{"trial": r["trial"], "w1": r["certificate"]["w1"], "w2": r["certificate"]["w2"]}
               for r in ok]
    return GenerationReport(int(seed), int(trials), len(ok), failures, cfg, records=records)
