import numpy as np
import pytest

from cqhoare import classical as cl
from cqhoare import linalg as la
from cqhoare import qsyntax as qs
from cqhoare import structures as st
from cqhoare import assertions as asrt
from cqhoare.assertions import (Atomic, StateProj, Neg, PTensor, Kraus,
                                CqAssertion, Domain)
from cqhoare.qsyntax import QVar

from conftest import subst_interp, random_predicate, random_expr


def interp2():
    interp = st.default_interpretation()
    interp.declare_classical("x", cl.IntType(0, 3))
    interp.declare_quantum("q1", 2)
    interp.declare_quantum("q2", 2)
    return interp


SIGMA = cl.ClassicalState({"x": 0, "y": 0})


def evp(a, interp, sigma=SIGMA):
    return asrt.eval_predicate(sigma, a, interp)


# ---------------------------------------------------------------------------
# Formal states


def test_state_evaluation():
    interp = interp2()
    s = asrt.parse_state("|0>_q1 |1>_q2")
    vec, layout = asrt.eval_state(SIGMA, s, interp)
    assert layout.dim == 4
    assert abs(vec[0b01] - 1.0) < 1e-12


def test_state_tensor_order_is_canonical():
    interp = interp2()
    a = asrt.parse_state("|0>_q1 |1>_q2")
    b = asrt.parse_state("|1>_q2 |0>_q1")
    va, la_ = asrt.eval_state(SIGMA, a, interp)
    vb, lb = asrt.eval_state(SIGMA, b, interp)
    assert la_.ids == lb.ids
    assert np.allclose(va, vb)


def test_superposition_norm_gate():
    interp = interp2()
    ok = asrt.parse_state("(1/sqrt(2)) * (|0>_q1) + (1/sqrt(2)) * (|1>_q1)")
    asrt.eval_state(SIGMA, ok, interp)
    bad = asrt.parse_state("(1/2) * (|0>_q1) + (1/2) * (|1>_q1)")
    with pytest.raises(asrt.NotWellDefined):
        asrt.eval_state(SIGMA, bad, interp)


def test_superposition_requires_matching_signatures():
    interp = interp2()
    s = asrt.parse_state("(1/sqrt(2)) * (|0>_q1) + (1/sqrt(2)) * (|1>_q2)")
    with pytest.raises(asrt.NotWellDefined):
        asrt.eval_state(SIGMA, s, interp)


def test_overlapping_tensor_not_well_defined():
    interp = interp2()
    s = asrt.parse_state("|0>_q1 |1>_q1")
    with pytest.raises(asrt.NotWellDefined):
        asrt.eval_state(SIGMA, s, interp)


def test_gate_application():
    interp = interp2()
    s = asrt.parse_state("H[q1] (|0>_q1)")
    vec, _ = asrt.eval_state(SIGMA, s, interp)
    assert np.allclose(vec, np.array([1, 1]) / np.sqrt(2))


def test_ket_value_out_of_range():
    interp = interp2()
    s = asrt.Ket(cl.Lit(3), QVar("q1"))
    with pytest.raises(asrt.NotWellDefined):
        asrt.eval_state(SIGMA, s, interp)


# ---------------------------------------------------------------------------
# Predicates


def test_atomic_and_negation():
    interp = interp2()
    r = evp(Atomic("P0", (), (QVar("q1"),)), interp)
    assert r.well_defined
    assert np.allclose(r.op, np.diag([1.0, 0.0]))
    r = evp(Neg(Atomic("P0", (), (QVar("q1"),))), interp)
    assert np.allclose(r.op, np.diag([0.0, 1.0]))


def test_tensor_of_predicates():
    interp = interp2()
    a = PTensor(Atomic("P0", (), (QVar("q1"),)),
                Atomic("P1", (), (QVar("q2"),)))
    r = evp(a, interp)
    assert r.layout.dim == 4
    assert abs(la.trace_product(r.op, np.diag([0, 1.0, 0, 0]))) > 0.99


def test_overlapping_tensor_predicate_nwd():
    interp = interp2()
    a = PTensor(Atomic("P0", (), (QVar("q1"),)),
                Atomic("P1", (), (QVar("q1"),)))
    r = evp(a, interp)
    assert not r.well_defined


def test_kraus_application_is_heisenberg_adjoint():
    interp = interp2()
    # F_H applied to |0><0| gives |+><+|
    a = Kraus("F_H", (), (QVar("q1"),), (Atomic("P0", (), (QVar("q1"),)),))
    r = evp(a, interp)
    plus = np.array([1, 1]) / np.sqrt(2)
    assert np.allclose(r.op, np.outer(plus, plus))


def test_scalar_kraus_scales():
    interp = interp2()
    a = Kraus("WSUM1", (cl.Lit(0.5),), (), (Atomic("ID1", (), (QVar("q1"),)),))
    r = evp(a, interp)
    assert np.allclose(r.op, 0.5 * np.eye(2))


def test_predicate_evaluations_are_effects():
    interp = subst_interp()
    rng = np.random.default_rng(0)
    sigmas = list(cl.iter_states(
        {"x": cl.IntType(0, 3), "y": cl.IntType(0, 3)}, {"x", "y"}))
    checked = 0
    for _ in range(60):
        a = random_predicate(rng)
        sigma = sigmas[int(rng.integers(len(sigmas)))]
        r = asrt.eval_predicate(sigma, a, interp)
        if r.well_defined:
            assert la.is_effect(r.op, 1e-9)
            checked += 1
    assert checked > 20


def test_substitution_lemma_randomized():
    """sigma(A[e/x]) == (sigma[x := sigma(e)])(A), including agreement of
    the well-definedness verdicts."""
    interp = subst_interp()
    rng = np.random.default_rng(42)
    sigmas = list(cl.iter_states(
        {"x": cl.IntType(0, 3), "y": cl.IntType(0, 3)}, {"x", "y"}))
    for _ in range(150):
        a = random_predicate(rng)
        e = cl.BinOp("%", random_expr(rng), cl.Lit(4))
        x = "xy"[int(rng.integers(2))]
        sigma = sigmas[int(rng.integers(len(sigmas)))]
        lhs = asrt.eval_predicate(sigma, asrt.subst_predicate(a, e, x), interp)
        shifted = sigma.update(x, cl.eval_expr(sigma, e))
        rhs = asrt.eval_predicate(shifted, a, interp)
        assert lhs.well_defined == rhs.well_defined
        if lhs.well_defined:
            assert lhs.layout.ids == rhs.layout.ids
            assert np.max(np.abs(lhs.op - rhs.op)) < 1e-12


# ---------------------------------------------------------------------------
# Entailment


def test_entailment_holds_and_fails():
    interp = interp2()
    dom = Domain({"x": cl.IntType(0, 3)})
    p0 = Atomic("P0", (), (QVar("q1"),))
    id1 = Atomic("ID1", (), (QVar("q1"),))
    assert asrt.entails(cl.TRUE, p0, id1, dom, interp).holds
    v = asrt.entails(cl.TRUE, id1, p0, dom, interp)
    assert v.status == "fails"
    # conditioned on an unsatisfiable formula everything holds
    assert asrt.entails(cl.FALSE, id1, p0, dom, interp).holds


def test_entailment_across_different_signatures():
    interp = interp2()
    dom = Domain({})
    p0 = Atomic("P0", (), (QVar("q1"),))
    both = PTensor(p0, Atomic("ID1", (), (QVar("q2"),)))
    assert asrt.entails(cl.TRUE, p0, both, dom, interp).status == "holds"


def test_entailment_inconclusive_without_domain():
    interp = interp2()
    dom = Domain({})
    p0 = Atomic("P0", (), (QVar("q1"),))
    v = asrt.entails(cl.BinOp("=", cl.Var("w"), cl.Lit(0)), p0, p0, dom, interp)
    assert v.status == "inconclusive"


def test_cq_entails_checks_classical_side():
    interp = interp2()
    dom = Domain({"x": cl.IntType(0, 3)})
    p0 = Atomic("P0", (), (QVar("q1"),))
    pre = CqAssertion(cl.BinOp("=", cl.Var("x"), cl.Lit(1)), p0)
    post = CqAssertion(cl.BinOp("<=", cl.Lit(1), cl.Var("x")), p0)
    assert asrt.cq_entails(pre, post, dom, interp).holds
    assert asrt.cq_entails(post, pre, dom, interp).status == "fails"


def test_wd_disagreement_fails_entailment():
    interp = interp2()
    dom = Domain({})
    ok = Atomic("P0", (), (QVar("q1"),))
    nwd = PTensor(ok, ok)  # overlapping, never well-defined
    assert asrt.entails(cl.TRUE, ok, nwd, dom, interp).status == "fails"


# ---------------------------------------------------------------------------
# Serialization


def test_predicate_json_roundtrip():
    rng = np.random.default_rng(9)
    for _ in range(30):
        a = random_predicate(rng)
        b = asrt.pred_from_json(asrt.pred_to_json(a))
        assert asrt.pred_equal(a, b)


def test_state_text_roundtrip():
    rng = np.random.default_rng(10)
    for src in ("|0>_q1", "|x + 1>_a[2]", "H[q1] (|0>_q1)",
                "(1/sqrt(2)) * (|0>_q1) + (1/sqrt(2)) * (|1>_q1)",
                "|0>_q1 |1>_q2 |0>_a[0]"):
        s = asrt.parse_state(src)
        assert asrt.parse_state(asrt.format_state(s)) == s


def test_assertion_json_roundtrip():
    a = CqAssertion(qs.parse_formula("x = 1 and y < 2"),
                    Kraus("F_H", (), (QVar("q1"),),
                          (Atomic("P0", (), (QVar("q1"),)),)))
    b = asrt.assertion_from_json(asrt.assertion_to_json(a))
    assert cl.formula_equal(a.phi, b.phi)
    assert asrt.pred_equal(a.a, b.a)
