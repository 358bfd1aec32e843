import json
from importlib import resources

import jsonschema
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from liegen import InputError, PreconditionError
from liegen.cartan import root_datum, torus_module_decomposition
from liegen.constructors import build, direct_sum, su
from liegen.generation import (
    CircleSpec, GenerationConfig, adjoint_conjugate, characteristic_index, default_circle,
    find_graph_pair, generates, helly_check, is_strongly_regular, is_thin,
    monte_carlo_generation, perturbation_stability, random_closed_subalgebra, replay_failure,
    strreggen_trial,
)
from liegen.lie_core import Subalgebra, bracket, lie_closure, simple_ideal_decomposition


def _matrix_coords(L, X):
    flat = np.concatenate([L.matrices.reshape(L.dim, -1).real, L.matrices.reshape(L.dim, -1).imag], 1).T
    rhs = np.concatenate([X.real.ravel(), X.imag.ravel()])
    c, *_ = np.linalg.lstsq(flat, rhs, rcond=None)
    assert np.allclose(flat @ c, rhs)
    return c


def test_regularity_examples_su3():
    L = build("su:3")
    rd = root_datum(L)
    assert not is_strongly_regular(rd, _matrix_coords(L, np.diag([1j, 1j, -2j])))
    assert not is_strongly_regular(rd, np.zeros(8))
    # distinct root values i(a_j - a_k) need a_1 - a_2 != a_2 - a_3 etc.
    assert not is_strongly_regular(rd, _matrix_coords(L, np.diag([1j, 0, -1j])))
    assert is_strongly_regular(rd, _matrix_coords(L, np.diag([3j, 1j, -4j])))


def test_regularity_rejects_non_torus():
    L = build("su:3")
    rd = root_datum(L)
    with pytest.raises(PreconditionError):
        is_strongly_regular(rd, np.ones(8))
    with pytest.raises(InputError):
        is_strongly_regular(rd, np.ones(3))


@pytest.mark.parametrize("spec", ["su:2", "su:3", "sl_real:2", "su_pq:2,1", "sl_complex:2",
                                  "sl_complex:3", "sl_real:3"])
def test_default_circles_regular(spec):
    L = build(spec)
    rd = root_datum(L)
    for shift in (0, 1):
        assert is_strongly_regular(rd, default_circle(L, rd, shift).generator)


def test_circle_spec_validation():
    with pytest.raises(InputError):
        CircleSpec(np.zeros(3))
    with pytest.raises(InputError):
        CircleSpec(np.ones((2, 2)))


def test_generation_small_cases():
    L = build("su:2")
    e = np.eye(3)
    assert generates(L, [Subalgebra(e[:, :1]), Subalgebra(e[:, 1:2])])
    assert not generates(L, [Subalgebra(e[:, :1])])
    with pytest.raises(InputError):
        generates(L, [])


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2 ** 31))
def test_generates_monotone_and_equivariant(seed):
    L = build("su_pq:2,1")
    rng = np.random.default_rng(seed)
    parts = [Subalgebra(np.linalg.qr(rng.standard_normal((L.dim, 1)))[0]) for _ in range(2)]
    if rng.random() < 0.5:
        parts[1] = Subalgebra(parts[0].basis)
    verdict = generates(L, parts)
    extra = Subalgebra(np.linalg.qr(rng.standard_normal((L.dim, 1)))[0])
    if verdict:
        assert generates(L, parts + [extra])
    x = rng.standard_normal(L.dim)
    assert generates(L, [adjoint_conjugate(L, x, p) for p in parts]) == verdict


@pytest.mark.parametrize("spec", ["su:3", "su_pq:2,1", "sl_real:3"])
def test_scale_robust_density(spec):
    L = build(spec)
    rd = root_datum(L)
    c1, c2 = default_circle(L, rd), default_circle(L, rd, 1)
    for sigma in (1.0, 0.5):
        rng = np.random.default_rng(5)
        rate = np.mean([strreggen_trial(L, rd, c1, c2, rng, sigma) for _ in range(100)])
        assert rate >= 0.95


def test_multiplicity_link_su21():
    L = build("su_pq:2,1")
    rd = root_datum(L)
    tm = torus_module_decomposition(L)
    c2 = default_circle(L, rd, 1).subalgebra()
    blocks = [tm.trivial_part.basis] + [S.basis for S in tm.summands]
    B = np.hstack(blocks)
    edges = np.cumsum([0] + [b.shape[1] for b in blocks])
    rng = np.random.default_rng(17)
    hits = 0
    n = 200
    for _ in range(n):
        v = adjoint_conjugate(L, rng.standard_normal(L.dim), c2).basis[:, 0]
        coef = np.linalg.solve(B, v)
        parts = [np.linalg.norm(coef[edges[i]:edges[i + 1]]) for i in range(1, len(blocks))]
        hits += min(parts) > 1e-8
    assert hits / n >= 0.99


def test_monte_carlo_report_and_schema():
    cfg = GenerationConfig("su:2", seed=3, trials=20)
    rep = monte_carlo_generation(cfg)
    assert rep.rate == 1.0
    doc = json.loads(rep.dumps())
    schema = json.loads(resources.files("liegen").joinpath("schemas/genreport.schema.json").read_text())
    jsonschema.validate(doc, schema)
    assert "elapsed_seconds" not in doc
    assert "elapsed_seconds" in rep.to_json_dict(include_timing=True)


def test_monte_carlo_worker_independence():
    a = monte_carlo_generation(GenerationConfig("su:3", seed=11, trials=24, workers=1)).dumps()
    b = monte_carlo_generation(GenerationConfig("su:3", seed=11, trials=24, workers=3)).dumps()
    assert a == b


def test_failure_is_replayable():
    # same circle twice, never generates su(3); every trial fails and is recorded
    L = build("su:3")
    c = default_circle(L).generator.tolist()
    cfg = GenerationConfig("su:3", seed=2, trials=3, circle1=c, circle2=c, sigma=1e-9)
    rep = monte_carlo_generation(cfg)
    assert len(rep.failures) == rep.trials - rep.successes
    for f in rep.failures:
        assert replay_failure(cfg, f["trial"]) is False


@pytest.mark.parametrize("kw", [dict(seed=None), dict(seed=-1), dict(trials=-1), dict(sigma=0.0),
                                dict(workers=0)])
def test_config_validation(kw):
    base = dict(algebra="su:2", seed=1)
    base.update(kw)
    with pytest.raises(InputError):
        GenerationConfig(**base).validate()


def test_perturbation_stability():
    L = build("su:3")
    rd = root_datum(L)
    parts = [default_circle(L, rd).subalgebra(),
             adjoint_conjugate(L, np.random.default_rng(0).standard_normal(8), default_circle(L, rd, 1).subalgebra())]
    assert perturbation_stability(L, parts, 1e-3, 30, seed=1) == 1.0
    with pytest.raises(PreconditionError):
        perturbation_stability(L, parts[:1], 1e-3, 5, seed=1)
    with pytest.raises(InputError):
        perturbation_stability(L, parts, 1e-3, 5)


def _su2_squared():
    L = direct_sum([su(2), su(2)])
    return L, simple_ideal_decomposition(L)


def _twisted_diagonal(L, ideals, rng):
    # graph of x -> exp(ad y) x from the first copy to the second
    from scipy.linalg import expm
    from liegen.lie_core import ad

    S2 = build("su:2")
    g = expm(ad(S2, rng.standard_normal(3)))
    B = np.vstack([np.eye(3), g])
    return Subalgebra(np.linalg.qr(B)[0], closed=True), g


def test_diagonal_is_thin_and_graph():
    L, ideals = _su2_squared()
    h, _ = _twisted_diagonal(L, ideals, np.random.default_rng(0))
    assert is_thin(L, h, [0, 1], ideals)
    assert not is_thin(L, h, [0], ideals)
    assert not generates(L, [h])
    gp = find_graph_pair(L, h, ideals)
    assert gp is not None and (gp.j, gp.k) == (0, 1)
    assert gp.residual <= 1e-7


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2 ** 31))
def test_graph_iso_preserves_brackets(seed):
    L, ideals = _su2_squared()
    rng = np.random.default_rng(seed)
    h, _ = _twisted_diagonal(L, ideals, rng)
    gp = find_graph_pair(L, h, ideals)
    P0 = ideals[0].basis @ ideals[0].basis.T
    x, y = P0 @ rng.standard_normal(6), P0 @ rng.standard_normal(6)
    lhs = gp.iso @ bracket(L, x, y)
    rhs = bracket(L, gp.iso @ x, gp.iso @ y)
    assert np.linalg.norm(lhs - rhs) <= 1e-7 * (1 + np.linalg.norm(x) * np.linalg.norm(y))


def test_graph_pair_none_cases():
    L, ideals = _su2_squared()
    assert find_graph_pair(L, Subalgebra(np.eye(6)[:, :3]), ideals) is None
    assert find_graph_pair(L, Subalgebra(np.eye(6)[:, :2]), ideals) is None


def test_index_set_validation():
    L, ideals = _su2_squared()
    h, _ = _twisted_diagonal(L, ideals, np.random.default_rng(0))
    for bad in ([], [2], [-1]):
        with pytest.raises(InputError):
            is_thin(L, h, bad, ideals)


def test_helly_on_random_subalgebras():
    L = direct_sum([su(2)] * 3)
    ideals = simple_ideal_decomposition(L)
    rng = np.random.default_rng(8)
    for _ in range(30):
        assert helly_check(L, random_closed_subalgebra(L, rng), ideals)
    assert helly_check(L, lie_closure(L, np.eye(9)[:, :1]), ideals)
    with pytest.raises(PreconditionError):
        helly_check(L, Subalgebra(np.eye(9)[:, :2]), ideals)


@pytest.mark.parametrize("spec,r", [("su:2", 0), ("su:3", 0), ("su:4", 0), ("sl_real:2", 2),
                                    ("sum:sl_real:2+sl_real:2", 4), ("sl_real:3", 5),
                                    ("su_pq:2,1", 4), ("sl_complex:2", 3)])
def test_characteristic_index(spec, r):
    assert characteristic_index(build(spec)) == r
