"""Dynkin and Vogan diagrams from a root datum."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .cartan import RootDatum, root_datum
from .errors import NumericalDegeneracyError, PreconditionError
from .lie_core import LieAlgebra
from .seed import CartanSeed

SUM_TOL = 1e-6
INTEGRALITY_TOL = 1e-4
PAINT_TOL = 1e-6
INFORMATIONAL = ("painted_at_most_one",)


@dataclass(frozen=True, eq=False)
class DynkinDiagram:
    """``roots[i]`` is the root-datum index of vertex ``i``."""

    roots: tuple
    cartan_matrix: np.ndarray
    edges: tuple  # (i, j, multiplicity) with i < j

    @property
    def rank(self) -> int:
        return len(self.roots)

    def components(self) -> list:
        return _components(self.cartan_matrix)


@dataclass(frozen=True, eq=False)
class VoganDiagram:
    diagram: DynkinDiagram
    involution: tuple
    painted: tuple

    def orbits(self) -> list:
        seen, out = set(), []
        for i, j in enumerate(self.involution):
            if i not in seen:
                orb = sorted({i, j})
                seen.update(orb)
                out.append(tuple(orb))
        return out

    def render(self) -> str:
        A = self.diagram.cartan_matrix
        lines = [f"vertices: {' '.join(str(i) for i in range(self.diagram.rank))}"]
        lines.append("cartan matrix:")
        lines += ["  " + " ".join(f"{int(x):3d}" for x in row) for row in A]
        lines.append("edges: " + (" ".join(f"{i}-{j}x{m}" for i, j, m in self.diagram.edges) or "none"))
        arcs = [o for o in self.orbits() if len(o) == 2]
        lines.append("involution: " + (" ".join(f"{a}<->{b}" for a, b in arcs) or "trivial"))
        lines.append("painted: " + (" ".join(str(i) for i in self.painted) or "none"))
        return "\n".join(lines)

    def to_json_dict(self) -> dict:
        return {
            "vertices": list(range(self.diagram.rank)),
            "cartan_matrix": [[int(x) for x in row] for row in self.diagram.cartan_matrix],
            "edges": [list(e) for e in self.diagram.edges],
            "involution": list(self.involution),
            "painted": list(self.painted),
        }


def _components(A) -> list:
    n = len(A)
    seen, comps = set(), []
    for s in range(n):
        if s in seen:
            continue
        stack, comp = [s], []
        seen.add(s)
        while stack:
            i = stack.pop()
            comp.append(i)
            for j in range(n):
                if j not in seen and (A[i][j] != 0 or A[j][i] != 0):
                    seen.add(j)
                    stack.append(j)
        comps.append(sorted(comp))
    return comps


def simple_roots(rd: RootDatum) -> list:
    """Positive roots that are not a sum of two positive roots (datum indices, datum order)."""
    pos = rd.positive_indices()
    V = rd.value_matrix()
    scale = max(1.0, float(np.max(np.abs(V)))) if len(V) else 1.0
    P = V[pos]
    out = []
    for a in pos:
        diff = V[a][None, :] - P  # alpha - beta for every positive beta
        is_sum = False
        for row in diff:
            if np.min(np.max(np.abs(P - row[None, :]), axis=1)) <= SUM_TOL * scale:
                is_sum = True
                break
        if not is_sum:
            out.append(a)
    return out


def killing_pairing(rd: RootDatum) -> np.ndarray:
    """Killing-induced inner products ``(alpha, beta)`` of all roots."""
    model = rd.model
    R = np.array([model.to_c @ r for r in rd.seed.cartan_basis]).T  # n x r
    AR = np.tensordot(R.T, model.adC, axes=1)  # r x n x n
    Kh = np.einsum("aij,bji->ab", AR, AR)
    V = rd.value_matrix()
    return V @ np.linalg.pinv(Kh) @ V.T


def _walk_order(A, verts) -> list:
    """Vertices of each component, starting at an end vertex and walking outward."""
    sub = [[A[i][j] for j in verts] for i in verts]
    order = []
    for comp in _components(sub):
        deg = {i: sum(1 for j in comp if j != i and sub[i][j] != 0) for i in comp}
        start = min(comp, key=lambda i: (deg[i] > 1, -i))
        seen, frontier = {start}, [start]
        while frontier:
            i = frontier.pop(0)
            order.append(i)
            for j in comp:
                if j not in seen and sub[i][j] != 0:
                    seen.add(j)
                    frontier.append(j)
    return [verts[i] for i in order]


def dynkin_diagram(rd: RootDatum) -> DynkinDiagram:
    """Simple roots and the Cartan matrix ``A_ij = 2 (a_i, a_j) / (a_j, a_j)``."""
    if not any(rd.positive):
        raise PreconditionError("root datum has no positive system")
    simple = simple_roots(rd)
    G = killing_pairing(rd)
    A0 = np.array([[2 * G[i, j] / G[j, j] for j in simple] for i in simple])
    Ai = np.rint(A0.real)
    if np.max(np.abs(A0 - Ai), initial=0.0) > INTEGRALITY_TOL:
        raise NumericalDegeneracyError("Cartan matrix entries are not integers")
    order = _walk_order(Ai.astype(int).tolist(), list(range(len(simple))))
    Ai = Ai[np.ix_(order, order)].astype(int)
    roots = tuple(simple[i] for i in order)
    edges = tuple((i, j, int(Ai[i, j] * Ai[j, i]))
                  for i in range(len(roots)) for j in range(i + 1, len(roots)) if Ai[i, j] != 0)
    return DynkinDiagram(roots, Ai, edges)


def vogan_diagram(L: LieAlgebra, seed: Optional[CartanSeed] = None,
                  rd: Optional[RootDatum] = None) -> VoganDiagram:
    """Dynkin diagram of ``L (x) C`` with the involution induced by theta and painted roots.

    A theta-fixed simple root is painted when theta acts by ``-1`` on its root
    space, i.e. the root space lies in ``p (x) C``.
    """
    seed = L.seed if seed is None else seed
    if rd is None:
        rd = root_datum(L, seed, use_complex_structure=False)
    if rd.theta_perm is None:
        raise PreconditionError("Vogan diagrams need the root datum of the complexified real form")
    D = dynkin_diagram(rd)
    pos_of = {r: i for i, r in enumerate(D.roots)}
    inv = []
    for r in D.roots:
        img = rd.theta_perm[r]
        if img not in pos_of:
            raise NumericalDegeneracyError("positive system is not theta-stable")
        inv.append(pos_of[img])
    painted = []
    for i, r in enumerate(D.roots):
        if inv[i] != i:
            continue
        s = rd.theta_scalar[r]
        if abs(s + 1) <= PAINT_TOL:
            painted.append(i)
        elif abs(s - 1) > PAINT_TOL:
            raise NumericalDegeneracyError("imaginary root space straddles k and p")
    return VoganDiagram(D, tuple(inv), tuple(painted))


@dataclass
class VoganReport:
    checks: dict = field(default_factory=dict)
    orbit_count: int = 0
    compact_rank: int = 0
    painted_count: int = 0

    @property
    def ok(self) -> bool:
        return all(v for k, v in self.checks.items() if k not in INFORMATIONAL)


def validate_vogan(v: VoganDiagram, L: LieAlgebra, seed: Optional[CartanSeed] = None) -> VoganReport:
    """Structural checks plus ``rank(K) == number of involution orbits``.

    ``painted_at_most_one`` is informational: the diagram is reported as
    computed and never repainted.
    """
    seed = L.seed if seed is None else seed
    A = v.diagram.cartan_matrix
    s = v.involution
    n = len(s)
    rep = VoganReport()
    rep.orbit_count = len(v.orbits())
    rep.compact_rank = len(seed.compact)
    rep.painted_count = len(v.painted)
    rep.checks["involution_order"] = all(s[s[i]] == i for i in range(n))
    rep.checks["diagram_automorphism"] = all(A[s[i], s[j]] == A[i, j] for i in range(n) for j in range(n))
    rep.checks["painted_fixed"] = all(s[i] == i for i in v.painted)
    rep.checks["rank_equals_orbits"] = rep.orbit_count == rep.compact_rank
    rep.checks["painted_at_most_one"] = rep.painted_count <= 1
    return rep
