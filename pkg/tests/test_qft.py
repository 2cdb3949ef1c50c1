import numpy as np
import pytest

from cqhoare import classical as cl
from cqhoare import linalg as la
from cqhoare import qsyntax as qs
from cqhoare import semantics as sem
from cqhoare import assertions as asrt
from cqhoare import prover as pv
from cqhoare import harness as hz
from cqhoare import qft


def dft_matrix(n):
    """Textbook transform: |j> -> (1/sqrt(N)) sum_k e^{2 pi i jk/N} |k>."""
    dim = 2 ** n
    w = np.exp(2j * np.pi / dim)
    return np.array([[w ** (j * k) for j in range(dim)]
                     for k in range(dim)]) / np.sqrt(dim)


def bits_of(j, n):
    return cl.Bits(1, tuple((j >> (n - 1 - i)) & 1 for i in range(n)))


def test_program_text_n2():
    prog = qft.generate_qft_program(2)
    assert qs.pretty(prog) == "H[q[1]]; CR(2)[q[2], q[1]]; H[q[2]]; REVERSE2[q[1], q[2]]"


def test_circuit_matches_dft_matrix():
    for n in (1, 2, 3):
        interp = qft.qft_interpretation(n)
        prog = qft.generate_qft_program(n)
        layout = interp.make_layout(interp.all_systems())
        dim = 2 ** n
        f = dft_matrix(n)
        for j in range(dim):
            sigma = cl.ClassicalState({"j": bits_of(j, n), "n": n})
            rho = la.pure_state(la.basis_vector(j, dim), layout)
            out = sem.run(prog, sem.CqState(sigma, rho), 0, interp)
            assert len(out.items) == 1
            expect = np.outer(f[:, j], f[:, j].conj())
            assert np.max(np.abs(out.items[0].rho.mat - expect)) < 1e-9


def test_recursive_form_equivalent_to_flat():
    n = 3
    interp = qft.qft_interpretation(n)
    flat = qft.generate_qft_program(n)
    rec = qft.generate_qft_recursive(n)
    layout = interp.make_layout(interp.all_systems())
    rng = np.random.default_rng(0)
    inputs = []
    for j in (0, 5):
        sigma = cl.ClassicalState({"j": bits_of(j, n), "n": n})
        inputs.append(sem.CqState(
            sigma, la.pure_state(la.basis_vector(j, 8), layout)))
        v = rng.standard_normal(8) + 1j * rng.standard_normal(8)
        inputs.append(sem.CqState(
            sigma, la.pure_state(v / np.linalg.norm(v), layout)))
    assert sem.equivalent(flat, rec, inputs, 2, interp).equal is True


def test_scripts_accepted():
    for n in (1, 2, 3):
        interp = qft.qft_interpretation(n)
        _, script = qft.generate_qft(n)
        report = pv.check_script(script, interp)
        assert report.accepted, (n, [x for x in report.nodes
                                     if not x[2].accepted])


def test_script_conclusion_shape():
    _, script = qft.generate_qft(2)
    t = script.conclusion
    assert cl.formula_equal(t.pre.phi,
                            cl.BinOp("<=", cl.Lit(1), cl.Var("n")))
    assert cl.formula_equal(t.post.phi, cl.TRUE)
    assert isinstance(t.pre.a, asrt.StateProj)
    assert isinstance(t.post.a, asrt.StateProj)


def test_perturbed_script_rejected():
    for n in (1, 2):
        interp = qft.qft_interpretation(n)
        _, bad = qft.perturbed_qft_script(n)
        assert pv.check_script(bad, interp).status == "rejected"


def test_fuzz_conclusion_consistent():
    interp = qft.qft_interpretation(2)
    _, script = qft.generate_qft(2)
    r = hz.fuzz_triple(script.conclusion, interp,
                       hz.RunConfig(fuel=2, samples=4, seed=0))
    assert r.verdict == "consistent"
    assert r.worst_margin >= -1e-9


def test_output_state_phases():
    # at n=2, wire 2 after the transform carries the full fraction 0.j1j2
    interp = qft.qft_interpretation(2)
    sigma = cl.ClassicalState({"j": bits_of(3, 2), "n": 2})
    vec, _ = asrt.eval_state(sigma, qft.output_state(2), interp)
    f = dft_matrix(2)
    assert abs(abs(np.vdot(vec, f[:, 3])) - 1.0) < 1e-9


def test_n_out_of_range():
    with pytest.raises(ValueError):
        qft.generate_qft(0)
    with pytest.raises(ValueError):
        qft.generate_qft(qft.MAX_N + 1)
