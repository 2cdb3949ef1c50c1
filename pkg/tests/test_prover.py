import json

import numpy as np
import pytest

from cqhoare import classical as cl
from cqhoare import qsyntax as qs
from cqhoare import structures as st
from cqhoare import assertions as asrt
from cqhoare import prover as pv
from cqhoare import harness as hz
from cqhoare.assertions import Atomic, StateProj, Kraus, CqAssertion
from cqhoare.qsyntax import QVar


@pytest.fixture()
def corpus():
    return hz.build_corpus()


def check(script, interp):
    return pv.check_script(script, interp)


def test_every_rule_has_an_accepted_script(corpus):
    interp, accepted, _ = corpus
    rules_seen = set()

    def collect(node):
        rules_seen.add(node.rule)
        for p in node.premises:
            collect(p)

    for name, script in accepted.items():
        report = check(script, interp)
        assert report.accepted, (name, report.to_json())
        collect(script)
    assert rules_seen >= set(pv.RULES)


def test_mutants_rejected(corpus):
    interp, _, mutants = corpus
    for name, script in mutants.items():
        assert check(script, interp).status == "rejected", name


def test_skip_requires_identical_assertions(corpus):
    interp, _, _ = corpus
    p0 = Atomic("P0", (), (QVar("q1"),))
    good = pv.ProofNode("Skip", pv.HoareTriple(
        CqAssertion(cl.TRUE, p0), qs.Skip(), CqAssertion(cl.TRUE, p0)))
    assert pv.check_node(good, interp).accepted
    bad = pv.ProofNode("Skip", pv.HoareTriple(
        CqAssertion(cl.TRUE, p0), qs.Skip(),
        CqAssertion(cl.BinOp("=", cl.Var("x"), cl.Lit(0)), p0)))
    assert pv.check_node(bad, interp).status == "rejected"


def test_assignment_axiom_shape(corpus):
    interp, accepted, _ = corpus
    node = accepted["assign"]
    assert pv.check_node(node, interp).accepted
    # wrong precondition formula
    broken = pv.ProofNode("Ass", pv.HoareTriple(
        CqAssertion(cl.TRUE, node.conclusion.pre.a),
        node.conclusion.program, node.conclusion.post))
    assert pv.check_node(broken, interp).status == "rejected"


def test_meas_axiom_freshness(corpus):
    interp, accepted, mutants = corpus
    assert pv.check_node(accepted["measure"], interp).accepted
    v = pv.check_node(mutants["measure_stale"], interp)
    assert v.status == "rejected" and "fresh" in v.reason


def test_meas_axiom_requires_outcome_conjunct(corpus):
    interp, accepted, _ = corpus
    node = accepted["measure"]
    broken = pv.ProofNode("Meas", pv.HoareTriple(
        node.conclusion.pre, node.conclusion.program,
        CqAssertion(cl.TRUE, node.conclusion.post.a)),
        witnesses={"y": "y"})
    assert pv.check_node(broken, interp).status == "rejected"


def test_conseq_uses_entailment(corpus):
    interp, accepted, _ = corpus
    skip = accepted["skip"]  # {true, P0} skip {true, P0}
    q1 = QVar("q1")
    weaker = CqAssertion(cl.TRUE, Atomic("ID1", (), (q1,)))
    good = pv.ProofNode("Conseq", pv.HoareTriple(
        skip.conclusion.pre, qs.Skip(), weaker), (skip,))
    assert pv.check_node(good, interp).accepted
    # strengthening the postcondition is not sound
    stronger = CqAssertion(cl.BinOp("=", cl.Var("x"), cl.Lit(0)),
                           skip.conclusion.post.a)
    bad = pv.ProofNode("Conseq", pv.HoareTriple(
        skip.conclusion.pre, qs.Skip(), stronger), (skip,))
    assert pv.check_node(bad, interp).status == "rejected"


def test_conseq_inconclusive_without_enumerable_domain(corpus):
    interp, accepted, _ = corpus
    interp.declare_classical("r", cl.RealType())
    skip_r = pv.ProofNode("Skip", pv.HoareTriple(
        CqAssertion(cl.BinOp("<", cl.Var("r"), cl.Lit(1)),
                    Atomic("P0", (), (QVar("q1"),))),
        qs.Skip(),
        CqAssertion(cl.BinOp("<", cl.Var("r"), cl.Lit(1)),
                    Atomic("P0", (), (QVar("q1"),)))))
    node = pv.ProofNode("Conseq", pv.HoareTriple(
        skip_r.conclusion.pre, qs.Skip(),
        CqAssertion(cl.TRUE, Atomic("ID1", (), (QVar("q1"),)))), (skip_r,))
    assert pv.check_node(node, interp).status == "inconclusive"


def test_loop_rules_respect_mode(corpus):
    interp, accepted, _ = corpus
    par = accepted["loop"]
    wrong_mode = pv.ProofNode("LoopPar", pv.HoareTriple(
        par.conclusion.pre, par.conclusion.program, par.conclusion.post,
        "total"), par.premises)
    assert pv.check_node(wrong_mode, interp).status == "rejected"


def test_loop_total_variant_conditions(corpus):
    interp, accepted, _ = corpus
    tot = accepted["loop_total"]
    assert pv.check_node(tot, interp).accepted
    # a non-fresh ranking variable is rejected
    stale = pv.ProofNode("LoopTot", tot.conclusion, tot.premises,
                         witnesses={"t": cl.Var("x"), "z": "x"})
    assert pv.check_node(stale, interp).status == "rejected"
    # a variant that can be negative is rejected
    interp.declare_classical("w", cl.IntType(-2, 2))
    neg = pv.ProofNode(
        "LoopTot", tot.conclusion, tot.premises,
        witnesses={"t": cl.BinOp("-", cl.Var("x"), cl.Lit(1)), "z": "z"})
    assert pv.check_node(neg, interp).status == "rejected"


def test_accum1_proportionality_direction(corpus):
    interp, accepted, _ = corpus
    node = accepted["accumulate_scaled"]
    assert pv.check_node(node, interp).accepted
    # swapping the symbols breaks domination (0.7 is not <= 0.5)
    t = node.conclusion
    swapped = pv.ProofNode("Accum1", pv.HoareTriple(
        CqAssertion(t.pre.phi, Kraus("SCALEB", (), (), t.pre.a.branches)),
        t.program,
        CqAssertion(t.post.phi, Kraus("SCALEA", (), (), t.post.a.branches))),
        node.premises)
    assert pv.check_node(swapped, interp).status == "rejected"


def test_accum_rules_reject_touched_targets(corpus):
    interp, accepted, _ = corpus
    node = accepted["accumulate_branches"]
    t = node.conclusion
    prog = qs.Gate("H", (), (QVar("q1"),))
    premises = tuple(
        pv.ProofNode("Uni", pv.HoareTriple(
            CqAssertion(cl.TRUE, Kraus("F_H", (), (QVar("q1"),), (b,))),
            prog, CqAssertion(cl.TRUE, b)))
        for b in t.pre.a.branches)
    touched = pv.ProofNode("Accum2", pv.HoareTriple(
        CqAssertion(cl.TRUE, Kraus("FB2", (), (QVar("q1"),),
                                   tuple(p.conclusion.pre.a for p in premises))),
        prog,
        CqAssertion(cl.TRUE, Kraus("FB2", (), (QVar("q1"),),
                                   t.post.a.branches))), premises)
    v = pv.check_node(touched, interp)
    assert v.status == "rejected"


def test_convex_weight_validation(corpus):
    interp, accepted, _ = corpus
    node = accepted["convex_mix"]
    bad = pv.ProofNode("Convex2", node.conclusion, node.premises,
                       witnesses={"weights": [0.9, 0.9]})
    assert pv.check_node(bad, interp).status == "rejected"


def test_convex1_max_weight(corpus):
    interp, accepted, _ = corpus
    node = accepted["convex_max"]
    t = node.conclusion
    wrong_max = pv.ProofNode("Convex1", pv.HoareTriple(
        t.pre, t.program,
        CqAssertion(t.post.phi, Kraus("WSUM1", (cl.Lit(0.25),), (),
                                      t.post.a.branches))),
        node.premises, witnesses={"weights": [0.5]})
    assert pv.check_node(wrong_max, interp).status == "rejected"


# ---------------------------------------------------------------------------
# check_proportional


def sym(name, ops):
    return st.KrausSymbol(name, len(ops), (), (2,), lambda: ops)


def test_proportional_scalar_multiples():
    interp = st.default_interpretation()
    half = sym("FHALF", [np.eye(2) * 0.5, np.eye(2) * 0.5])
    ident = sym("FID", [np.eye(2)])
    assert pv.check_proportional(half, ident, (), interp).holds
    assert pv.check_proportional(ident, ident, (), interp).holds


def test_proportional_refuted():
    interp = st.default_interpretation()
    x = sym("FX", [np.array([[0, 1], [1, 0]], dtype=complex)])
    halfi = sym("FHALFI", [np.eye(2) * 0.5])
    v = pv.check_proportional(x, halfi, (), interp)
    assert v.status == "fails"


def test_proportional_non_multiple_refuted():
    interp = st.default_interpretation()
    # dominated in norm but not a scalar multiple: refuted on a pure state
    f = sym("FDIAG", [np.diag([0.5, 0.25]).astype(complex)])
    ident = sym("FID2", [np.eye(2)])
    v = pv.check_proportional(f, ident, (), interp)
    assert v.status == "fails"


def test_proportional_inconclusive_on_degenerate_symbol():
    interp = st.default_interpretation()
    # the zero family is trivially dominated but the least-squares tier
    # cannot certify it, and sampling finds no refutation
    zero = sym("FZERO", [np.zeros((2, 2), dtype=complex)])
    v = pv.check_proportional(zero, zero, (), interp)
    assert v.status == "inconclusive"


def test_rule_locality(corpus):
    """A node's verdict depends only on its conclusion, the premises'
    conclusions, and witnesses; swapping a premise subtree for a different
    one with the same conclusion changes nothing."""
    interp, accepted, _ = corpus
    node = accepted["consequence"]
    premise = node.premises[0]
    fake = pv.ProofNode("TotallyBogusRule", premise.conclusion)
    replaced = pv.ProofNode(node.rule, node.conclusion, (fake,),
                            node.witnesses)
    assert (pv.check_node(replaced, interp).status
            == pv.check_node(node, interp).status)


def test_script_json_roundtrip(corpus):
    interp, accepted, mutants = corpus
    for name, script in list(accepted.items()) + list(mutants.items()):
        doc = json.loads(json.dumps(pv.node_to_json(script)))
        back = pv.node_from_json(doc, measurements=set(interp.measurements))
        assert (pv.check_script(back, interp).status
                == pv.check_script(script, interp).status), name
