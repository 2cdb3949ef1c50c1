import numpy as np
import pytest

from cqhoare import linalg as la


def layout(*names):
    return la.RegisterLayout(tuple((la.system_id(n), 2) for n in names))


H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
X = np.array([[0, 1], [1, 0]], dtype=complex)
CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0],
                 [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)


def test_layout_basics():
    lay = layout("a", "b", "c")
    assert lay.dim == 8
    assert la.system_id("b") in lay
    assert lay.index(la.system_id("c")) == 2
    with pytest.raises(la.LayoutError):
        la.RegisterLayout(((la.system_id("a"), 2), (la.system_id("a"), 2)))


def test_embed_on_first_factor_is_kron_with_identity():
    lay = layout("a", "b")
    got = la.embed(X, [la.system_id("a")], lay)
    assert np.allclose(got, np.kron(X, np.eye(2)))
    got = la.embed(X, [la.system_id("b")], lay)
    assert np.allclose(got, np.kron(np.eye(2), X))


def test_embed_permuted_targets():
    lay = layout("a", "b")
    # CNOT with control b, target a: flips a when b is 1
    got = la.embed(CNOT, [la.system_id("b"), la.system_id("a")], lay)
    v = np.zeros(4)
    v[0b01] = 1.0  # a=0, b=1
    out = got @ v
    assert abs(out[0b11] - 1.0) < 1e-12


def test_embed_missing_target():
    lay = layout("a")
    with pytest.raises(la.LayoutError):
        la.embed(X, [la.system_id("zzz")], lay)


def test_permute_vector_roundtrip():
    lay = layout("a", "b", "c")
    rng = np.random.default_rng(0)
    v = rng.standard_normal(8) + 1j * rng.standard_normal(8)
    ids = list(lay.ids)
    w = la.embed_vector(v, ids[::-1], lay)
    back = la.embed_vector(w, ids, la.RegisterLayout(
        tuple((s, 2) for s in ids[::-1])))
    assert np.allclose(back, v)


def test_predicates_on_matrices():
    assert la.is_hermitian(H)
    assert la.is_unitary(H)
    assert la.is_psd(np.eye(2))
    assert not la.is_psd(np.diag([1.0, -0.1]))
    assert la.is_effect(np.diag([0.5, 1.0]))
    assert not la.is_effect(np.diag([0.5, 1.5]))


def test_density_operator_validation():
    lay = layout("a")
    la.DensityOperator(lay, np.diag([0.5, 0.5])).validate()
    with pytest.raises(ValueError):
        la.DensityOperator(lay, np.diag([0.9, 0.9])).validate()  # trace > 1
    with pytest.raises(ValueError):
        la.DensityOperator(
            lay, np.array([[0, 1], [0, 0]], dtype=complex)).validate()
    with pytest.raises(la.LayoutError):
        la.DensityOperator(lay, np.eye(3))


def test_apply_and_trace_product():
    lay = layout("a")
    rho = la.pure_state(la.basis_vector(0, 2), lay)
    out = rho.apply(H, [la.system_id("a")])
    assert abs(la.trace_product(np.diag([1.0, 0.0]), out.mat) - 0.5) < 1e-12
    assert abs(out.trace() - 1.0) < 1e-12


def test_union_layout_is_ordered_superset():
    a = layout("a", "c")
    b = layout("b", "c")
    u = la.union_layout(a, b, lambda s: s)
    assert [s[0] for s in u.ids] == ["a", "b", "c"]
