import numpy as np
import pytest

from cqhoare import classical as cl
from cqhoare import linalg as la
from cqhoare import qsyntax as qs
from cqhoare import semantics as sem

from conftest import (small_interp, random_loop_free, random_input,
                      random_density)


def prog(src):
    return qs.parse_program(src, measurements={"M"})


def basis_input(interp, sigma=None, index=0):
    layout = interp.make_layout(interp.all_systems())
    rho = la.pure_state(la.basis_vector(index, layout.dim), layout)
    return sem.CqState(sigma or cl.ClassicalState({"x": 0, "y": 0}), rho)


def test_assignment_and_skip():
    interp = small_interp()
    out = sem.run(prog("skip; x := y + 1"), basis_input(
        interp, cl.ClassicalState({"x": 0, "y": 2})), 0, interp)
    assert len(out.items) == 1
    assert out.items[0].sigma["x"] == 3


def test_assignment_out_of_declared_range():
    interp = small_interp()
    with pytest.raises(sem.SemanticsError):
        sem.run(prog("x := 7"), basis_input(interp), 0, interp)


def test_init_channel_resets_to_zero():
    interp = small_interp()
    st = basis_input(interp)
    # put q1 into |1> then reset it
    out = sem.run(prog("X[q1]; q1 := |0>"), st, 0, interp)
    assert len(out.items) == 1
    rho = out.items[0].rho
    ref = basis_input(interp).rho
    assert np.allclose(rho.mat, ref.mat, atol=1e-12)


def test_measurement_branches_are_unnormalized():
    interp = small_interp()
    out = sem.run(prog("H[q1]; x := M[q1]"), basis_input(interp), 0, interp)
    assert len(out.items) == 2
    traces = sorted(round(it.trace(), 12) for it in out.items)
    assert traces == [0.5, 0.5]
    outcomes = sorted(it.sigma["x"] for it in out.items)
    assert outcomes == [0, 1]


def test_conditional_follows_guard():
    interp = small_interp()
    st = basis_input(interp, cl.ClassicalState({"x": 1, "y": 0}))
    out = sem.run(prog("if x = 1 then y := 3 else y := 2 fi"), st, 0, interp)
    assert out.items[0].sigma["y"] == 3


def test_failed_distinctness_blocks():
    interp = small_interp()
    interp.declare_quantum("q", 2, (cl.IntType(0, 3),))
    p = qs.parse_program("CNOT[q[x], q[y]]")
    st = basis_input(interp, cl.ClassicalState({"x": 1, "y": 1}))
    out = sem.run(p, st, 0, interp)
    assert out.items == [] and abs(out.blocked_trace - 1.0) < 1e-12


def test_while_true_never_terminates():
    interp = small_interp()
    for fuel in (0, 3, 7):
        out = sem.run(prog("while true do skip od"), basis_input(interp),
                      fuel, interp)
        assert out.items == []
        assert abs(out.residual_trace() - 1.0) < 1e-12


def test_fuel_counts_loop_unrollings_only():
    interp = small_interp()
    # straight-line code costs no fuel
    out = sem.run(prog("H[q1]; H[q1]; x := 1"), basis_input(interp), 0, interp)
    assert len(out.items) == 1
    p = prog("while x < 3 do x := x + 1 od")
    st = basis_input(interp)
    assert sem.run(p, st, 2, interp).items == []
    assert len(sem.run(p, st, 3, interp).items) == 1


def test_trace_non_increase_and_fuel_monotone():
    interp = small_interp()
    rng = np.random.default_rng(11)
    p = prog("x := M[q1]; while x = 1 do H[q1]; x := M[q1] od")
    st = random_input(rng, interp)
    prev_items = -1.0
    for fuel in range(5):
        out = sem.run(p, st, fuel, interp)
        total = out.items_trace() + out.residual_trace() + out.blocked_trace \
            + out.pruned_trace
        assert total <= st.trace() + 1e-12
        assert out.items_trace() >= prev_items - 1e-12
        prev_items = out.items_trace()


def test_run_matches_structural_semantics_randomized():
    interp = small_interp()
    rng = np.random.default_rng(5)
    for _ in range(40):
        p = random_loop_free(rng)
        st = random_input(rng, interp)
        a = sem.run(p, st, 3, interp)
        b = sem.structural_sem(p, st, 3, interp)
        assert sem.multiset_equal(a.items, b.items, tol=1e-12)


def test_structural_semantics_on_loops():
    interp = small_interp()
    p = prog("x := M[q1]; while x = 1 do H[q1]; x := M[q1] od")
    rng = np.random.default_rng(7)
    st = random_input(rng, interp)
    for fuel in range(4):
        a = sem.run(p, st, fuel, interp)
        b = sem.structural_sem(p, st, fuel, interp)
        assert sem.multiset_equal(a.items, b.items, tol=1e-12)
        assert abs(a.residual_trace() - b.residual_trace()) < 1e-12


def test_theta_of_and_normalize():
    interp = small_interp()
    out = sem.run(prog("H[q1]; x := M[q1]; x := 0"), basis_input(interp),
                  0, interp)
    sigma = out.items[0].sigma
    assert len(out.items) == 2  # same sigma reached on two paths, kept apart
    theta = sem.theta_of(out, sigma)
    assert abs(theta.trace() - 1.0) < 1e-12
    norm = sem.normalize(out)
    assert len(norm) == 1


def test_normalize_merges_per_sigma():
    interp = small_interp()
    out = sem.run(prog("H[q1]; x := M[q1]; x := 0"), basis_input(interp),
                  0, interp)
    norm = sem.normalize(out)
    assert len(norm) == 1


def test_equivalence_reflexive_and_skip_unit():
    interp = small_interp()
    rng = np.random.default_rng(3)
    inputs = [random_input(rng, interp) for _ in range(3)]
    p = prog("H[q1]; x := M[q1]")
    assert sem.equivalent(p, p, inputs, 4, interp).equal is True
    p2 = prog("skip; H[q1]; x := M[q1]")
    assert sem.equivalent(p, p2, inputs, 4, interp).equal is True
    p3 = prog("X[q1]; x := M[q1]")
    assert sem.equivalent(p, p3, inputs, 4, interp).equal is False


def test_equivalence_inconclusive_on_nontermination():
    interp = small_interp()
    inputs = [basis_input(interp)]
    p = prog("while true do skip od")
    v = sem.equivalent(p, p, inputs, 2, interp)
    assert v.equal is None


def test_nt_lower_bound_geometric():
    interp = small_interp()
    layout = interp.make_layout(interp.all_systems())
    plus = np.zeros(layout.dim)
    plus[0] = plus[layout.dim // 2] = 1 / np.sqrt(2)  # |+> on q1
    st = sem.CqState(cl.ClassicalState({"x": 1, "y": 0}),
                     la.pure_state(plus, layout))
    p = prog("while x = 1 do x := M[q1]; H[q1] od")
    for k in range(1, 6):
        assert abs(sem.nt_lower_bound(p, st, k, interp) - 2.0 ** -k) < 1e-12
