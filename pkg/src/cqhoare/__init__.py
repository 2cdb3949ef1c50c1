"""Quantum Hoare logic with classical variables: a while-language with
quantum arrays and parameterized gates, its cq-state simulator, an
assertion language with formal states and quantum predicates, a proof
checker for partial and total correctness, and a soundness fuzzer."""

__version__ = "0.1.0"
