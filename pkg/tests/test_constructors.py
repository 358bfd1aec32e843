import numpy as np
import pytest

from conftest import FAMILIES
from liegen import InputError
from liegen.cartan import check_seed, verify_cartan_involution
from liegen.constructors import (
    MAX_CLI_DIM, build, classical_dim, compact_form, complexify_then_realify, direct_sum,
    parse_spec, sl_complex_as_real, sp_real, su,
)
from liegen.lie_core import bracket, is_semisimple, jacobi_residual

EXTRA = ["sp:1", "sp:2", "so_pq:2,1", "so_pq:2,2", "so_pq:3,1", "su_pq:3,1", "su:4", "so:6",
         "sl_real:4", "split_form_of:sp:2", "compact_form_of:sl_real:3", "sum:su:2+sl_real:2"]


@pytest.mark.parametrize("spec", FAMILIES + EXTRA)
def test_dimension_and_seed(spec):
    L = build(spec)
    assert L.dim == classical_dim(spec)
    assert jacobi_residual(L) <= 1e-9
    assert all(check_seed(L, L.seed).values())
    assert verify_cartan_involution(L, L.seed.theta)


@pytest.mark.parametrize("text", ["su", "su:", "su:1", "sl_real:a", "nope:3", "su_pq:0,2",
                                  "so_pq:1,1", "sum:", "so:2"])
def test_parse_rejects(text):
    with pytest.raises(InputError):
        parse_spec(text)


def test_parse_aliases_and_roundtrip():
    s = parse_spec("sum:su:2+sl:2")
    assert str(s) == "sum:su:2+sl_real:2"
    assert parse_spec(str(s)) == s
    assert str(parse_spec("sl_complex:3")) == "sl_complex_as_real:3"


def test_build_is_cached_and_immutable():
    assert build("su:3") is build("su:3")
    with pytest.raises(ValueError):
        build("su:3").constants[0, 0, 0] = 1.0


def test_rank_and_torus():
    # (rank, compact rank) of the maximally compact Cartan
    expect = {"su:3": (2, 2), "sl_real:3": (2, 1), "su_pq:2,1": (2, 2), "sl_real:2": (1, 1),
              "su_pq:1,1": (1, 1), "sl_complex:3": (4, 2), "so:5": (2, 2), "sp:2": (2, 2),
              "sl_real:5": (4, 2), "sl_real:4": (3, 2)}
    for spec, (r, t) in expect.items():
        seed = build(spec).seed
        assert (seed.rank, len(seed.compact)) == (r, t), spec


def test_direct_sum_blocks():
    L = direct_sum([su(2), build("sl_real:2")])
    assert L.dim == 6
    assert np.abs(L.constants[:3, 3:]).max() == 0
    assert tuple(L.meta["summand_dims"]) == (3, 3)
    assert L.seed.rank == 2


def test_complex_structure_identities():
    L = sl_complex_as_real(2)
    J = L.complex_structure
    assert np.allclose(J @ J, -np.eye(L.dim))
    rng = np.random.default_rng(1)
    x, y = rng.standard_normal((2, L.dim))
    assert np.allclose(bracket(L, J @ x, y), J @ bracket(L, x, y))


def _signature(L):
    w = np.linalg.eigvalsh(L.killing_gram)
    return int(np.sum(w > 1e-9)), int(np.sum(w < -1e-9))


def test_complexify_su2_matches_sl2c():
    A = complexify_then_realify(su(2))
    B = sl_complex_as_real(2)
    assert A.dim == B.dim == 6
    assert _signature(A) == _signature(B) == (3, 3)
    J = A.complex_structure
    assert np.allclose(J @ J, -np.eye(6))
    assert is_semisimple(A)
    assert all(check_seed(A, A.seed).values())


@pytest.mark.parametrize("n", [2, 3])
def test_compact_form_of_complex(n):
    K = compact_form(sl_complex_as_real(n))
    assert K.dim == n * n - 1
    assert np.linalg.eigvalsh(K.killing_gram).max() < 0
    assert jacobi_residual(K) <= 1e-9


def test_compact_form_of_spec():
    K = build("compact_form_of:sl_real:3")
    assert np.linalg.eigvalsh(K.killing_gram).max() < 0


def test_sp_real_is_equal_rank():
    L = sp_real(2)
    assert L.dim == 10
    assert L.seed.rank == 2 and len(L.seed.compact) == 2
    w = np.linalg.eigvalsh(L.killing_gram)
    assert (np.sum(w > 0), np.sum(w < 0)) == (6, 4)


def test_cli_cap():
    assert MAX_CLI_DIM == 32
    assert classical_dim("su:4") == 15
