"""Shared helpers: small interpretations and random generators used by both
the unit tests and the acceptance suite."""

import numpy as np

from cqhoare import classical as cl
from cqhoare import linalg as la
from cqhoare import qsyntax as qs
from cqhoare import structures as st
from cqhoare import semantics as sem


def small_interp():
    """Two classical Int(0..3) variables, three qubits, the builtin
    computational measurement."""
    interp = st.default_interpretation()
    interp.declare_classical("x", cl.IntType(0, 3))
    interp.declare_classical("y", cl.IntType(0, 3))
    interp.declare_quantum("q1", 2)
    interp.declare_quantum("q2", 2)
    interp.declare_quantum("q3", 2)
    return interp


QUBITS = ("q1", "q2", "q3")


def random_expr(rng):
    r = int(rng.integers(5))
    if r == 0:
        return cl.Lit(int(rng.integers(4)))
    if r == 1:
        return cl.Var("x")
    if r == 2:
        return cl.Var("y")
    if r == 3:
        return cl.BinOp("%", cl.BinOp("+", cl.Var("x"), cl.Lit(1)), cl.Lit(4))
    return cl.BinOp("%", cl.BinOp("+", cl.Var("x"), cl.Var("y")), cl.Lit(4))


def random_cond(rng):
    r = int(rng.integers(4))
    if r == 0:
        return cl.BinOp("=", cl.Var("x"), cl.Lit(int(rng.integers(4))))
    if r == 1:
        return cl.BinOp("<", cl.Var("x"), cl.Var("y"))
    if r == 2:
        return cl.BinOp("<=", cl.Var("y"), cl.Lit(int(rng.integers(4))))
    return cl.TRUE


def random_command(rng, budget):
    """One command using at most `budget` atomic commands; returns
    (command, used)."""
    kinds = 7 if budget >= 3 else 6
    r = int(rng.integers(kinds))
    q = qs.QVar(QUBITS[int(rng.integers(3))])
    if r == 0:
        return qs.Skip(), 1
    if r == 1:
        return qs.Assign("xy"[int(rng.integers(2))], random_expr(rng)), 1
    if r == 2:
        return qs.Init(q), 1
    if r == 3:
        name = ("H", "X", "Z")[int(rng.integers(3))]
        return qs.Gate(name, (), (q,)), 1
    if r == 4:
        i, j = rng.permutation(3)[:2]
        return qs.Gate("CNOT", (), (qs.QVar(QUBITS[i]), qs.QVar(QUBITS[j]))), 1
    if r == 5:
        return qs.Measure("xy"[int(rng.integers(2))], "M", (q,)), 1
    t, ut = random_command(rng, 1)
    e, ue = random_command(rng, 1)
    return qs.If(random_cond(rng), t, e), 1 + ut + ue


def random_loop_free(rng, max_cmds=5):
    budget = int(rng.integers(1, max_cmds + 1))
    cmds = []
    used = 0
    while used < budget:
        c, u = random_command(rng, budget - used)
        if used + u > budget:
            break
        cmds.append(c)
        used += u
    return qs.seq_all(cmds) if cmds else qs.Skip()


def random_sigma(rng):
    return cl.ClassicalState({"x": int(rng.integers(4)),
                              "y": int(rng.integers(4))})


def random_density(rng, layout, rank=None):
    d = layout.dim
    rank = rank or int(rng.integers(1, d + 1))
    g = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    m = g @ g.conj().T
    return la.DensityOperator(layout, m / np.trace(m).real)


def random_input(rng, interp):
    layout = interp.make_layout(interp.all_systems())
    return sem.CqState(random_sigma(rng), random_density(rng, layout))


def subst_interp():
    """Interpretation for substitution-lemma tests: two simple qubits plus a
    small qubit array whose subscripts can mention classical variables."""
    interp = st.default_interpretation()
    interp.declare_classical("x", cl.IntType(0, 3))
    interp.declare_classical("y", cl.IntType(0, 3))
    interp.declare_quantum("q1", 2)
    interp.declare_quantum("q2", 2)
    interp.declare_quantum("a", 2, (cl.IntType(0, 3),))
    return interp


def random_qvar(rng):
    r = int(rng.integers(4))
    if r == 0:
        return qs.QVar("q1")
    if r == 1:
        return qs.QVar("q2")
    if r == 2:
        return qs.QVar("a", (random_expr(rng),))
    return qs.QVar("a", (cl.BinOp("%", cl.Var("x"), cl.Lit(4)),))


def random_predicate(rng, depth=2):
    from cqhoare import assertions as asrt
    atoms = ("P0", "P1", "PPLUS", "ID1", "HALF1")
    r = int(rng.integers(6 if depth > 0 else 2))
    if r == 0:
        return asrt.Atomic(atoms[int(rng.integers(5))], (), (random_qvar(rng),))
    if r == 1:
        return asrt.StateProj(asrt.Ket(
            cl.BinOp("%", random_expr(rng), cl.Lit(2)), random_qvar(rng)))
    if r == 2:
        return asrt.Neg(random_predicate(rng, depth - 1))
    if r == 3:
        return asrt.PTensor(random_predicate(rng, depth - 1),
                            random_predicate(rng, depth - 1))
    if r == 4:
        return asrt.Kraus("WSUM1", (cl.Lit(0.5),), (),
                          (random_predicate(rng, depth - 1),))
    return asrt.Kraus("F_H", (), (random_qvar(rng),),
                      (random_predicate(rng, depth - 1),))
