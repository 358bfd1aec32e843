"""Generation of semisimple Lie algebras by conjugated subalgebras.

Group-level statements about closed subgroups are tested through their Lie
algebras: a family of connected subgroups generates a dense subgroup of ``G``
exactly when the Lie closure of their Lie algebras is all of ``g``.  Random
conjugators are ``exp(ad x)`` with Gaussian ``x``.
"""
from __future__ import annotations

import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .cartan import RootDatum, cartan_decomposition, root_datum
from .errors import InputError, NumericalDegeneracyError, PreconditionError
from .lie_core import (
    LieAlgebra,
    Subalgebra,
    ad,
    brackets,
    ideal_coordinates,
    is_bracket_closed,
    lie_closure,
    simple_ideal_decomposition,
)
from .linalg import expm, numerical_rank, orthonormal_basis

REGULARITY_RTOL = 1e-8
TORUS_TOL = 1e-9
GRAPH_TOL = 1e-7
SCHEMA = "genreport/1"

_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


@dataclass(frozen=True, eq=False)
class CircleSpec:
    """A circle subgroup, given by a generator of its Lie algebra in the compact torus."""

    generator: np.ndarray

    def __post_init__(self):
        g = np.array(self.generator, dtype=float)
        if g.ndim != 1 or not np.any(g):
            raise InputError("circle generator must be a nonzero vector")
        g.flags.writeable = False
        object.__setattr__(self, "generator", g)

    def subalgebra(self) -> Subalgebra:
        v = self.generator
        return Subalgebra((v / np.linalg.norm(v))[:, None], closed=True)


def _torus_coefficients(rd: RootDatum, X) -> np.ndarray:
    T = rd.seed.torus
    X = np.asarray(X, dtype=float)
    if X.shape != (T.shape[1],):
        raise InputError(f"element has shape {X.shape}, expected ({T.shape[1]},)")
    if T.shape[0] == 0:
        if np.any(X):
            raise PreconditionError("algebra has a trivial compact torus")
        return np.zeros(0)
    a, *_ = np.linalg.lstsq(T.T, X, rcond=None)
    if np.linalg.norm(T.T @ a - X) > TORUS_TOL * max(1.0, np.linalg.norm(X)):
        raise PreconditionError("element does not lie in the compact Cartan part")
    return a


def _torus_functionals(rd: RootDatum) -> np.ndarray:
    """Distinct restrictions of the roots to ``t`` as functionals on coordinates."""
    T = rd.seed.torus
    V = rd.value_matrix()[:, list(rd.seed.compact)]
    F = V @ np.linalg.pinv(T.T)
    out = []
    scale = max(1.0, float(np.max(np.abs(F)))) if len(F) else 1.0
    for f in F:
        if not any(np.max(np.abs(f - g)) <= 1e-6 * scale for g in out):
            out.append(f)
    return np.array(out)


def is_strongly_regular(rd: RootDatum, X) -> bool:
    """No root vanishes on ``X`` and distinct roots take distinct values on ``X``.

    Roots are compared through their restrictions to the compact torus ``t``;
    roots that agree on ``t`` (a root and its theta-conjugate) define the same
    torus character and are not required to differ.
    """
    _torus_coefficients(rd, X)
    X = np.asarray(X, dtype=float)
    F = _torus_functionals(rd)
    if len(F) == 0:
        return bool(np.any(X))
    vals = F @ X
    thr = REGULARITY_RTOL * np.linalg.norm(X) * float(np.max(np.linalg.norm(F, axis=1)))
    if thr == 0.0 or np.min(np.abs(vals)) <= thr:
        return False
    gaps = np.abs(vals[:, None] - vals[None, :])
    np.fill_diagonal(gaps, np.inf)
    return bool(np.min(gaps) > thr) if len(vals) > 1 else True


def default_circle(L: LieAlgebra, rd: Optional[RootDatum] = None, shift: int = 0) -> CircleSpec:
    """Strongly regular circle ``sum_j sqrt(p_j) t_j`` over the torus rows (primes from ``shift``)."""
    rd = root_datum(L) if rd is None else rd
    T = rd.seed.torus
    coef = np.sqrt(np.array(_PRIMES[shift:shift + T.shape[0]], dtype=float))
    X = coef @ T
    if not is_strongly_regular(rd, X):
        raise NumericalDegeneracyError("default circle is not strongly regular")
    return CircleSpec(X)


def adjoint_conjugate(L: LieAlgebra, x, V: Subalgebra) -> Subalgebra:
    """``exp(ad x) V``, re-orthonormalized; ``exp`` is scaling and squaring with Pade."""
    g = expm(ad(L, x))
    W = g @ V.basis
    if W.shape[1] == 0:
        return V
    Q, _ = np.linalg.qr(W)
    return Subalgebra(Q, closed=V.closed)


def generates(L: LieAlgebra, parts: Sequence[Subalgebra]) -> bool:
    if not parts:
        raise InputError("generates needs at least one part")
    B = np.hstack([p.basis for p in parts])
    return lie_closure(L, B).dim == L.dim


def _check_circle(rd, c: CircleSpec, name):
    if not is_strongly_regular(rd, c.generator):
        raise PreconditionError(f"{name} is not strongly regular")


def _trial(L, s1: Subalgebra, s2: Subalgebra, rng, sigma):
    x = sigma * rng.standard_normal(L.dim)
    return generates(L, [s1, adjoint_conjugate(L, x, s2)]), x


def strreggen_trial(L: LieAlgebra, rd: RootDatum, c1: CircleSpec, c2: CircleSpec, rng,
                    sigma: float = 1.0) -> bool:
    """One draw: does ``span c1`` together with a random conjugate of ``span c2`` generate ``L``?"""
    _check_circle(rd, c1, "circle 1")
    _check_circle(rd, c2, "circle 2")
    ok, _ = _trial(L, c1.subalgebra(), c2.subalgebra(), rng, sigma)
    return ok


@dataclass
class GenerationConfig:
    algebra: str
    seed: int
    trials: int = 1000
    sigma: float = 1.0
    circle1: Optional[Sequence[float]] = None
    circle2: Optional[Sequence[float]] = None
    workers: int = 1

    def validate(self):
        if self.seed is None:
            raise InputError("an explicit seed is required")
        if int(self.seed) < 0:
            raise InputError("seed must be nonnegative")
        if int(self.trials) < 0:
            raise InputError("trials must be nonnegative")
        if not (self.sigma > 0 and math.isfinite(self.sigma)):
            raise InputError("sigma must be positive")
        if int(self.workers) < 1:
            raise InputError("workers must be at least 1")


@dataclass
class GenerationReport:
    seed: int
    trials: int
    successes: int
    failures: list = field(default_factory=list)
    config: dict = field(default_factory=dict)
    elapsed: Optional[float] = None
    records: list = field(default_factory=list)

    @property
    def rate(self) -> Optional[float]:
        return self.successes / self.trials if self.trials else None

    def to_json_dict(self, include_timing: bool = False) -> dict:
        d = {
            "schema": SCHEMA,
            "seed": self.seed,
            "trials": self.trials,
            "successes": self.successes,
            "rate": self.rate,
            "rate_defined": self.trials > 0,
            "failures": self.failures,
            "config": self.config,
            "records": self.records,
        }
        if include_timing:
            d["elapsed_seconds"] = self.elapsed
        return d

    def dumps(self, include_timing: bool = False) -> str:
        return json.dumps(self.to_json_dict(include_timing), indent=2, sort_keys=True)


def _chunk_worker(args):
    spec, c1, c2, sigma, seed, indices = args
    from .constructors import build

    L = build(spec)
    s1 = CircleSpec(c1).subalgebra()
    s2 = CircleSpec(c2).subalgebra()
    out = []
    for i in indices:
        ok, x = _trial(L, s1, s2, np.random.default_rng([seed, i]), sigma)
        out.append((i, ok, None if ok else x.tolist()))
    return out


def _chunks(n, workers):
    k = max(1, workers * 4)
    size = max(1, -(-n // k))
    return [list(range(s, min(n, s + size))) for s in range(0, n, size)]


def monte_carlo_generation(config: GenerationConfig) -> GenerationReport:
    """Seeded Monte Carlo of :func:`strreggen_trial`.

    Trial ``i`` draws from ``default_rng([seed, i])``, so results do not depend
    on the worker count; failing conjugators are recorded in full.
    """
    from .constructors import build

    config.validate()
    t0 = time.perf_counter()
    L = build(config.algebra)
    rd = root_datum(L)
    c1 = CircleSpec(config.circle1) if config.circle1 is not None else default_circle(L, rd)
    c2 = CircleSpec(config.circle2) if config.circle2 is not None else default_circle(L, rd, shift=1)
    for c in (c1, c2):
        if c.generator.shape != (L.dim,):
            raise InputError(f"circle generator must have length {L.dim}")
    _check_circle(rd, c1, "circle 1")
    _check_circle(rd, c2, "circle 2")
    n = int(config.trials)
    jobs = [(str(config.algebra), c1.generator.tolist(), c2.generator.tolist(), float(config.sigma),
             int(config.seed), idx) for idx in _chunks(n, int(config.workers))] if n else []
    if int(config.workers) > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=int(config.workers)) as ex:
            results = [r for chunk in ex.map(_chunk_worker, jobs) for r in chunk]
    else:
        results = [r for job in jobs for r in _chunk_worker(job)]
    results.sort(key=lambda r: r[0])
    successes = sum(1 for _, ok, _ in results if ok)
    failures = [{"trial": i, "conjugator": x} for i, ok, x in results if not ok]
    cfg = {
        "algebra": str(config.algebra),
        "sigma": float(config.sigma),
        "circle1": c1.generator.tolist(),
        "circle2": c2.generator.tolist(),
    }
    return GenerationReport(int(config.seed), n, successes, failures, cfg,
                            elapsed=time.perf_counter() - t0)


def replay_failure(config: GenerationConfig, trial: int) -> bool:
    """Re-run one trial of a report bit-exactly (returns the generation verdict)."""
    from .constructors import build

    L = build(config.algebra)
    rd = root_datum(L)
    c1 = CircleSpec(config.circle1) if config.circle1 is not None else default_circle(L, rd)
    c2 = CircleSpec(config.circle2) if config.circle2 is not None else default_circle(L, rd, shift=1)
    ok, _ = _trial(L, c1.subalgebra(), c2.subalgebra(),
                   np.random.default_rng([int(config.seed), trial]), float(config.sigma))
    return ok


def perturbation_stability(L: LieAlgebra, parts: Sequence[Subalgebra], delta: float,
                           trials: int, rng=None, seed: Optional[int] = None) -> float:
    """Fraction of Gaussian perturbations (relative size ``delta``) that still generate."""
    if not generates(L, parts):
        raise PreconditionError("the unperturbed parts do not generate")
    if delta < 0:
        raise InputError("delta must be nonnegative")
    if trials <= 0:
        raise InputError("trials must be positive")
    if rng is None:
        if seed is None:
            raise InputError("pass rng or seed")
        rng = np.random.default_rng(seed)
    ok = 0
    for _ in range(trials):
        moved = []
        for p in parts:
            B = p.basis
            N = rng.standard_normal(B.shape)
            N *= delta * np.linalg.norm(B) / np.linalg.norm(N)
            Q, _ = np.linalg.qr(B + N)
            moved.append(Subalgebra(Q))
        ok += generates(L, moved)
    return ok / trials


# --- structure of subalgebras relative to the simple ideals ----------------

def _ideals(L, ideals):
    return simple_ideal_decomposition(L) if ideals is None else list(ideals)


def _ideal_blocks(ideals):
    Sinv = ideal_coordinates(ideals)
    blocks, start = [], 0
    for I in ideals:
        blocks.append(Sinv[start:start + I.dim])
        start += I.dim
    return blocks


def _check_index_set(I, r):
    I = sorted(set(int(i) for i in I))
    if not I or I[0] < 0 or I[-1] >= r:
        raise InputError(f"index set must be a nonempty subset of 0..{r - 1}")
    return I


def is_thin(L: LieAlgebra, h: Subalgebra, I, ideals=None) -> bool:
    """``h`` maps onto each ``s_i`` (``i`` in ``I``) but onto a proper subalgebra of their sum.

    Indices are 0-based positions in :func:`simple_ideal_decomposition`.
    """
    ideals = _ideals(L, ideals)
    I = _check_index_set(I, len(ideals))
    blocks = _ideal_blocks(ideals)
    if h.dim == 0:
        return False
    for i in I:
        if numerical_rank(blocks[i] @ h.basis, scale=1.0) < ideals[i].dim:
            return False
    joint = np.vstack([blocks[i] for i in I]) @ h.basis
    return numerical_rank(joint, scale=1.0) < sum(ideals[i].dim for i in I)


@dataclass(frozen=True, eq=False)
class GraphPair:
    """``h`` projects onto the graph of ``iso: s_j -> s_k`` (0-based ideal indices).

    ``iso`` is an operator on ``L`` coordinates: it maps ``s_j`` onto ``s_k``
    and kills the other ideals.
    """

    j: int
    k: int
    iso: np.ndarray
    residual: float


def graph_pair_search(L: LieAlgebra, h: Subalgebra, ideals=None):
    """Like :func:`find_graph_pair` but returns ``(result, reason)``."""
    if h.dim >= L.dim:
        return None, "h is not proper"
    if not is_bracket_closed(L, h):
        return None, "h is not bracket-closed"
    ideals = _ideals(L, ideals)
    blocks = _ideal_blocks(ideals)
    for i, I in enumerate(ideals):
        if numerical_rank(blocks[i] @ h.basis, scale=1.0) < I.dim:
            return None, f"h does not surject onto ideal {i}"
    for j in range(len(ideals)):
        for k in range(j + 1, len(ideals)):
            m = ideals[j].dim
            if ideals[k].dim != m:
                continue
            A = np.vstack([blocks[j], blocks[k]]) @ h.basis
            W = orthonormal_basis(A, scale=1.0)
            if W.shape[1] != m:
                continue
            Wj, Wk = W[:m], W[m:]
            if numerical_rank(Wj, scale=1.0) < m or numerical_rank(Wk, scale=1.0) < m:
                continue
            phi = Wk @ np.linalg.inv(Wj)
            iso = ideals[k].basis @ phi @ blocks[j]
            res = _bracket_defect(L, iso, ideals[j].basis)
            if res <= GRAPH_TOL:
                return GraphPair(j, k, iso, res), ""
    return None, "no pair of ideals carries a graph"


def find_graph_pair(L: LieAlgebra, h: Subalgebra, ideals=None) -> Optional[GraphPair]:
    """First pair ``(j, k)``, lexicographically, on which ``h`` is the graph of an isomorphism."""
    return graph_pair_search(L, h, ideals)[0]


def _bracket_defect(L, iso, B) -> float:
    """``max |iso[x, y] - [iso x, iso y]|`` over basis pairs of span(B), relative to ``|c|``."""
    lhs = iso @ brackets(L, B, B)
    IB = iso @ B
    rhs = brackets(L, IB, IB)
    scale = L.bracket_scale * max(1.0, float(np.linalg.norm(iso, 2))) ** 2
    return float(np.max(np.abs(lhs - rhs)) / scale)


def helly_check(L: LieAlgebra, h: Subalgebra, ideals=None) -> bool:
    """If ``h`` maps onto every sum of two simple ideals then ``h = L``.

    Returns ``False`` only when the implication is falsified.  For a simple
    algebra the hypothesis reads "``h`` maps onto ``L``".
    """
    if h.dim == L.dim:
        return True
    if not is_bracket_closed(L, h):
        raise PreconditionError("h is not bracket-closed")
    ideals = _ideals(L, ideals)
    blocks = _ideal_blocks(ideals)
    r = len(ideals)
    pairs = [(i, j) for i in range(r) for j in range(i + 1, r)] if r > 1 else [(0,)]
    for pair in pairs:
        P = np.vstack([blocks[i] for i in pair]) @ h.basis
        if numerical_rank(P, scale=1.0) < sum(ideals[i].dim for i in pair):
            return True  # hypothesis fails
    return h.dim == L.dim


def characteristic_index(L: LieAlgebra, theta=None) -> int:
    """``dim g - dim k``, the ``r`` with ``G`` homeomorphic to ``K x R^r``."""
    if theta is None:
        if L.seed is None:
            raise PreconditionError("no Cartan involution given")
        theta = L.seed.theta
    cd = cartan_decomposition(L, theta)
    return L.dim - cd.k.dim


def random_closed_subalgebra(L: LieAlgebra, rng, n_elements: int = 2) -> Subalgebra:
    """Lie closure of ``n_elements`` Gaussian elements."""
    return lie_closure(L, rng.standard_normal((L.dim, n_elements)))
