"""Formal quantum states, quantum predicate formulas and cq-assertions.

Evaluation is per classical state sigma and partial: an evaluation either
yields an effect on the Hilbert space of the resolved signature or is
"not well-defined" (overlapping signatures, failed distinctness, or a
formal state of norm other than 1; never silently renormalized).
"""

from dataclasses import dataclass
import itertools

import numpy as np

from . import classical as cl
from . import linalg as la
from . import qsyntax as qs
from .qsyntax import QVar, _Parser, ParseError, format_expr, format_qvar


class AssertionError_(ValueError):
    pass


class NotWellDefined(Exception):
    def __init__(self, reason):
        self.reason = reason
        super().__init__(reason)


# ---------------------------------------------------------------------------
# ASTs


@dataclass(frozen=True)
class Ket:
    value: object  # ClassicalExpr selecting the basis element
    qvar: QVar


@dataclass(frozen=True)
class STensor:
    left: object
    right: object


@dataclass(frozen=True)
class Superpose:
    c1: object
    s1: object
    c2: object
    s2: object


@dataclass(frozen=True)
class GateApp:
    gate: str
    params: tuple
    targets: tuple
    state: object


@dataclass(frozen=True)
class Atomic:
    name: str
    params: tuple
    targets: tuple


@dataclass(frozen=True)
class StateProj:
    state: object


@dataclass(frozen=True)
class Neg:
    arg: object


@dataclass(frozen=True)
class PTensor:
    left: object
    right: object


@dataclass(frozen=True)
class Kraus:
    name: str
    params: tuple
    targets: tuple
    branches: tuple


@dataclass(frozen=True)
class CqAssertion:
    phi: object  # classical Formula
    a: object  # PredicateFormula


def tensor_all(states):
    states = list(states)
    out = states[0]
    for s in states[1:]:
        out = STensor(out, s)
    return out


def scaled(coeff, state):
    """coeff * state, encoded as a superposition with a zero branch."""
    if isinstance(coeff, cl.Lit) and coeff.value == 1:
        return state
    return Superpose(coeff, state, cl.Lit(0), state)


def superpose_sum(terms):
    """Fold a list of (coeff, state) into nested binary superpositions."""
    terms = list(terms)
    if len(terms) == 1:
        return scaled(terms[0][0], terms[0][1])
    out = Superpose(terms[0][0], terms[0][1], terms[1][0], terms[1][1])
    for c, s in terms[2:]:
        out = Superpose(cl.Lit(1), out, c, s)
    return out


# ---------------------------------------------------------------------------
# Signatures and classical variables


def sig_state(s):
    if isinstance(s, Ket):
        return frozenset([s.qvar])
    if isinstance(s, STensor):
        return sig_state(s.left) | sig_state(s.right)
    if isinstance(s, Superpose):
        return sig_state(s.s1) | sig_state(s.s2)
    if isinstance(s, GateApp):
        return sig_state(s.state)
    raise AssertionError_("unknown formal state node %r" % (s,))


def sig(a):
    if isinstance(a, Atomic):
        return frozenset(a.targets)
    if isinstance(a, StateProj):
        return sig_state(a.state)
    if isinstance(a, Neg):
        return sig(a.arg)
    if isinstance(a, PTensor):
        return sig(a.left) | sig(a.right)
    if isinstance(a, Kraus):
        out = frozenset()
        for b in a.branches:
            out |= sig(b)
        return out
    raise AssertionError_("unknown predicate node %r" % (a,))


def _qvar_vars(q):
    out = set()
    for s in q.subs:
        out |= cl.free_vars(s)
    return out


def cv_state(s):
    if isinstance(s, Ket):
        return cl.free_vars(s.value) | _qvar_vars(s.qvar)
    if isinstance(s, STensor):
        return cv_state(s.left) | cv_state(s.right)
    if isinstance(s, Superpose):
        return (cl.free_vars(s.c1) | cl.free_vars(s.c2)
                | cv_state(s.s1) | cv_state(s.s2))
    if isinstance(s, GateApp):
        out = cv_state(s.state)
        for e in s.params:
            out |= cl.free_vars(e)
        for q in s.targets:
            out |= _qvar_vars(q)
        return out
    raise AssertionError_("unknown formal state node %r" % (s,))


def cv(a):
    """Classical variables occurring in a predicate formula."""
    if isinstance(a, Atomic):
        out = set()
        for e in a.params:
            out |= cl.free_vars(e)
        for q in a.targets:
            out |= _qvar_vars(q)
        return out
    if isinstance(a, StateProj):
        return cv_state(a.state)
    if isinstance(a, Neg):
        return cv(a.arg)
    if isinstance(a, PTensor):
        return cv(a.left) | cv(a.right)
    if isinstance(a, Kraus):
        out = set()
        for e in a.params:
            out |= cl.free_vars(e)
        for q in a.targets:
            out |= _qvar_vars(q)
        for b in a.branches:
            out |= cv(b)
        return out
    raise AssertionError_("unknown predicate node %r" % (a,))


# ---------------------------------------------------------------------------
# Evaluation


def _to_index(v, dim, what):
    if isinstance(v, bool):
        v = int(v)
    if isinstance(v, complex):
        if abs(v.imag) > 1e-9:
            raise NotWellDefined("%s is not an integer" % what)
        v = v.real
    if isinstance(v, float):
        if abs(v - round(v)) > 1e-9:
            raise NotWellDefined("%s is not an integer" % what)
        v = int(round(v))
    if isinstance(v, cl.Bits):
        v = v.as_int()
    if not isinstance(v, int):
        raise NotWellDefined("%s is not a basis label" % what)
    if not 0 <= v < dim:
        raise NotWellDefined("%s out of range" % what)
    return v


def _resolve_distinct(interp, sigma, targets, what):
    sids = [interp.resolve(sigma, q) for q in targets]
    if len(set(sids)) != len(sids):
        raise NotWellDefined("distinctness fails for %s" % what)
    return sids


def _eval_state(sigma, s, interp):
    """Returns (vector, layout); raises NotWellDefined."""
    if isinstance(s, Ket):
        sid = interp.resolve(sigma, s.qvar)
        dim = interp.dim_of(sid)
        idx = _to_index(cl.eval_expr(sigma, s.value), dim, "ket label")
        layout = la.RegisterLayout(((sid, dim),))
        return la.basis_vector(idx, dim), layout
    if isinstance(s, STensor):
        v1, l1 = _eval_state(sigma, s.left, interp)
        v2, l2 = _eval_state(sigma, s.right, interp)
        if set(l1.ids) & set(l2.ids):
            raise NotWellDefined("overlapping signatures in tensor")
        layout = la.union_layout(l1, l2, interp.order_key)
        vec = np.kron(v1, v2)
        vec = la.embed_vector(vec, list(l1.ids) + list(l2.ids), layout)
        return vec, layout
    if isinstance(s, Superpose):
        a1 = complex(cl.eval_expr(sigma, s.c1))
        a2 = complex(cl.eval_expr(sigma, s.c2))
        v1, l1 = _eval_state(sigma, s.s1, interp)
        v2, l2 = _eval_state(sigma, s.s2, interp)
        if set(l1.ids) != set(l2.ids):
            raise NotWellDefined("superposed states have different signatures")
        v2 = la.embed_vector(v2, list(l2.ids), l1)
        return a1 * v1 + a2 * v2, l1
    if isinstance(s, GateApp):
        v, layout = _eval_state(sigma, s.state, interp)
        gate = interp.gate(s.gate)
        sids = _resolve_distinct(interp, sigma, s.targets, "gate targets")
        for sid in sids:
            if sid not in layout:
                raise NotWellDefined("gate target outside the state signature")
        params = tuple(cl.eval_expr(sigma, e) for e in s.params)
        u = gate.matrix(params, interp.tolerances)
        return la.embed(u, sids, layout) @ v, layout
    raise AssertionError_("unknown formal state node %r" % (s,))


def eval_state(sigma, s, interp, norm_tol=1e-9):
    """Evaluate a formal state; well-defined only at norm 1."""
    vec, layout = _eval_state(sigma, s, interp)
    n = float(np.linalg.norm(vec))
    if abs(n - 1.0) > norm_tol:
        raise NotWellDefined("state norm %.6g differs from 1" % n)
    return vec, layout


@dataclass
class EvalResult:
    well_defined: bool
    op: object = None
    layout: object = None
    reason: str = ""


def _eval_pred(sigma, a, interp):
    """Returns (op, layout); raises NotWellDefined."""
    if isinstance(a, Atomic):
        fam = interp.predicate(a.name)
        params = tuple(cl.eval_expr(sigma, e) for e in a.params)
        k = fam.matrix(params, interp.tolerances)
        sids = _resolve_distinct(interp, sigma, a.targets, "predicate targets")
        layout = interp.make_layout(sids)
        dims = tuple(layout.dim_of(s) for s in sids)
        if dims != tuple(fam.dims):
            raise AssertionError_(
                "predicate %s dimension mismatch" % a.name)
        return la.embed(k, sids, layout), layout
    if isinstance(a, StateProj):
        vec, layout = eval_state(sigma, a.state, interp)
        return np.outer(vec, vec.conj()), layout
    if isinstance(a, Neg):
        op, layout = _eval_pred(sigma, a.arg, interp)
        return np.eye(layout.dim, dtype=complex) - op, layout
    if isinstance(a, PTensor):
        o1, l1 = _eval_pred(sigma, a.left, interp)
        o2, l2 = _eval_pred(sigma, a.right, interp)
        if set(l1.ids) & set(l2.ids):
            raise NotWellDefined("overlapping signatures in predicate tensor")
        layout = la.union_layout(l1, l2, interp.order_key)
        return la.embed(o1, list(l1.ids), layout) @ la.embed(o2, list(l2.ids), layout), layout
    if isinstance(a, Kraus):
        sym = interp.kraus_symbol(a.name)
        if len(a.branches) != sym.rank:
            raise AssertionError_(
                "kraus symbol %s expects %d branches" % (a.name, sym.rank))
        params = tuple(cl.eval_expr(sigma, e) for e in a.params)
        ops = sym.operators(params, interp.tolerances)
        evs = [_eval_pred(sigma, b, interp) for b in a.branches]
        layout = evs[0][1]
        for _, l in evs[1:]:
            layout = la.union_layout(layout, l, interp.order_key)
        mats = [la.embed(o, list(l.ids), layout) for o, l in evs]
        if sym.dims is None:
            out = np.zeros((layout.dim, layout.dim), dtype=complex)
            for c, b in zip(ops, mats):
                out += (abs(c) ** 2) * b
            return out, layout
        sids = _resolve_distinct(interp, sigma, a.targets, "kraus targets")
        for sid in sids:
            if sid not in layout:
                raise NotWellDefined("kraus target outside branch signature")
        dims = tuple(layout.dim_of(s) for s in sids)
        if dims != tuple(sym.dims):
            raise AssertionError_("kraus symbol %s dimension mismatch" % a.name)
        out = np.zeros((layout.dim, layout.dim), dtype=complex)
        for f, b in zip(ops, mats):
            big = la.embed(f, sids, layout)
            out += big @ b @ big.conj().T
        return out, layout
    raise AssertionError_("unknown predicate node %r" % (a,))


def eval_predicate(sigma, a, interp):
    try:
        op, layout = _eval_pred(sigma, a, interp)
    except NotWellDefined as e:
        return EvalResult(False, reason=e.reason)
    return EvalResult(True, op=op, layout=layout)


# ---------------------------------------------------------------------------
# Substitution (componentwise everywhere, including tensor and projectors)


def _subst_qvar(q, e, x):
    return QVar(q.name, tuple(cl.subst(s, e, x) for s in q.subs))


def subst_state(s, e, x):
    if isinstance(s, Ket):
        return Ket(cl.subst(s.value, e, x), _subst_qvar(s.qvar, e, x))
    if isinstance(s, STensor):
        return STensor(subst_state(s.left, e, x), subst_state(s.right, e, x))
    if isinstance(s, Superpose):
        return Superpose(
            cl.subst(s.c1, e, x), subst_state(s.s1, e, x),
            cl.subst(s.c2, e, x), subst_state(s.s2, e, x))
    if isinstance(s, GateApp):
        return GateApp(
            s.gate,
            tuple(cl.subst(p, e, x) for p in s.params),
            tuple(_subst_qvar(q, e, x) for q in s.targets),
            subst_state(s.state, e, x))
    raise AssertionError_("unknown formal state node %r" % (s,))


def subst_predicate(a, e, x):
    if isinstance(a, Atomic):
        return Atomic(
            a.name,
            tuple(cl.subst(p, e, x) for p in a.params),
            tuple(_subst_qvar(q, e, x) for q in a.targets))
    if isinstance(a, StateProj):
        return StateProj(subst_state(a.state, e, x))
    if isinstance(a, Neg):
        return Neg(subst_predicate(a.arg, e, x))
    if isinstance(a, PTensor):
        return PTensor(subst_predicate(a.left, e, x), subst_predicate(a.right, e, x))
    if isinstance(a, Kraus):
        return Kraus(
            a.name,
            tuple(cl.subst(p, e, x) for p in a.params),
            tuple(_subst_qvar(q, e, x) for q in a.targets),
            tuple(subst_predicate(b, e, x) for b in a.branches))
    raise AssertionError_("unknown predicate node %r" % (a,))


# ---------------------------------------------------------------------------
# Structural equality up to expression normalization


def _norm_qvar(q):
    return QVar(q.name, tuple(cl.normalize(s) for s in q.subs))


def normalize_state(s):
    if isinstance(s, Ket):
        return Ket(cl.normalize(s.value), _norm_qvar(s.qvar))
    if isinstance(s, STensor):
        return STensor(normalize_state(s.left), normalize_state(s.right))
    if isinstance(s, Superpose):
        return Superpose(cl.normalize(s.c1), normalize_state(s.s1),
                         cl.normalize(s.c2), normalize_state(s.s2))
    if isinstance(s, GateApp):
        return GateApp(s.gate, tuple(cl.normalize(p) for p in s.params),
                       tuple(_norm_qvar(q) for q in s.targets),
                       normalize_state(s.state))
    raise AssertionError_("unknown formal state node %r" % (s,))


def normalize_pred(a):
    if isinstance(a, Atomic):
        return Atomic(a.name, tuple(cl.normalize(p) for p in a.params),
                      tuple(_norm_qvar(q) for q in a.targets))
    if isinstance(a, StateProj):
        return StateProj(normalize_state(a.state))
    if isinstance(a, Neg):
        return Neg(normalize_pred(a.arg))
    if isinstance(a, PTensor):
        return PTensor(normalize_pred(a.left), normalize_pred(a.right))
    if isinstance(a, Kraus):
        return Kraus(a.name, tuple(cl.normalize(p) for p in a.params),
                     tuple(_norm_qvar(q) for q in a.targets),
                     tuple(normalize_pred(b) for b in a.branches))
    raise AssertionError_("unknown predicate node %r" % (a,))


def pred_equal(a, b):
    return normalize_pred(a) == normalize_pred(b)


# ---------------------------------------------------------------------------
# Entailment


@dataclass
class Verdict:
    status: str  # "holds" | "fails" | "inconclusive"
    witness: object = None
    reason: str = ""

    @property
    def holds(self):
        return self.status == "holds"


class Domain:
    """Enumerable classical state space for entailment decisions."""

    def __init__(self, typing, cap=cl.DOMAIN_CAP):
        self.typing = dict(typing)
        self.cap = cap

    @staticmethod
    def from_interp(interp, names):
        typing = {}
        missing = []
        for n in sorted(names):
            t = interp.classical_vars.get(n)
            if t is None or t.values() is None:
                missing.append(n)
            else:
                typing[n] = t
        return Domain(typing), missing

    def states(self, names):
        return cl.iter_states(self.typing, names, cap=self.cap)

    def to_json(self):
        return {n: cl.type_to_json(t) for n, t in self.typing.items()}


def _comparable(ra, rb, interp):
    """Embed two well-defined results into their union layout."""
    layout = la.union_layout(ra.layout, rb.layout, interp.order_key)
    oa = la.embed(ra.op, list(ra.layout.ids), layout)
    ob = la.embed(rb.op, list(rb.layout.ids), layout)
    return oa, ob


def entails(phi, a, b, domain, interp):
    """phi |= A <= B by exhaustive enumeration of the domain."""
    names = cl.free_vars(phi) | cv(a) | cv(b)
    missing = [n for n in sorted(names) if n not in domain.typing]
    if missing:
        return Verdict("inconclusive",
                       reason="no enumerable domain for %s" % ", ".join(missing))
    try:
        states = list(domain.states(names))
    except cl.EvalError as e:
        return Verdict("inconclusive", reason=str(e))
    checked = 0
    for sigma in states:
        if not cl.satisfies(sigma, phi):
            continue
        checked += 1
        ra = eval_predicate(sigma, a, interp)
        rb = eval_predicate(sigma, b, interp)
        if ra.well_defined != rb.well_defined:
            return Verdict("fails", witness=sigma,
                           reason="well-definedness disagrees")
        if not ra.well_defined:
            continue
        oa, ob = _comparable(ra, rb, interp)
        if not la.is_psd(ob - oa, interp.tolerances.psd):
            return Verdict("fails", witness=sigma, reason="Loewner order fails")
    return Verdict("holds", reason="%d states checked" % checked)


def classical_entails(phi, psi, domain):
    names = cl.free_vars(phi) | cl.free_vars(psi)
    missing = [n for n in sorted(names) if n not in domain.typing]
    if missing:
        return Verdict("inconclusive",
                       reason="no enumerable domain for %s" % ", ".join(missing))
    try:
        states = list(domain.states(names))
    except cl.EvalError as e:
        return Verdict("inconclusive", reason=str(e))
    for sigma in states:
        if cl.satisfies(sigma, phi) and not cl.satisfies(sigma, psi):
            return Verdict("fails", witness=sigma, reason="classical entailment fails")
    return Verdict("holds")


def cq_entails(pre, post, domain, interp):
    """(phi, A) |= (psi, B): classical entailment plus Loewner entailment."""
    c = classical_entails(pre.phi, post.phi, domain)
    if c.status != "holds":
        return c
    return entails(pre.phi, pre.a, post.a, domain, interp)


# ---------------------------------------------------------------------------
# Concrete syntax for formal states


class _StateParser(_Parser):
    def fstate(self):
        terms = [self.fproduct()]
        while self.at_sym("+") or self.at_sym("-"):
            op = self.take().text
            c, s = self.fproduct()
            if op == "-":
                c = cl.UnOp("-", c)
            terms.append((c, s))
        if len(terms) == 1:
            return scaled(*terms[0])
        return superpose_sum(terms)

    def fproduct(self):
        # A coefficient is a unary-level expression (parenthesize anything
        # containing '*') followed by an explicit '*'; parsing at the
        # multiplicative level would swallow the separating star.
        coeff = cl.Lit(1)
        save = self.pos
        try:
            e = self.unary()
            self.expect("SYM", "*")
            coeff = e
        except ParseError:
            self.pos = save
        factors = [self.fapp()]
        while self.at_sym("|") or self.at_sym("(") or self._at_gate():
            factors.append(self.fapp())
        return coeff, tensor_all(factors)

    def _at_gate(self):
        return self.at("IDENT") and (self.at_sym("(", 1) or self.at_sym("[", 1))

    def fapp(self):
        if self._at_gate():
            name = self.take().text
            params = ()
            if self.at_sym("("):
                self.take()
                params = tuple(self.expr_list())
                self.expect("SYM", ")")
            self.expect("SYM", "[")
            targets = tuple(self.qvar_list())
            self.expect("SYM", "]")
            return GateApp(name, params, targets, self.fapp())
        return self.fatom()

    def fatom(self):
        if self.at_sym("|"):
            self.take()
            value = self.additive()
            self.expect("SYM", ">")
            t = self.peek()
            if t.kind == "IDENT" and len(t.text) > 1 and t.text[0] == "_":
                # the lexer glues "_name" into one identifier
                self.toks[self.pos] = type(t)(t.kind, t.text[1:], t.line,
                                              t.col + 1)
            else:
                self.expect("SYM", "_")
            q = self.qvar()
            if len(q) != 1:
                self.fail("a ket names a single system")
            return Ket(value, q[0])
        if self.at_sym("("):
            self.take()
            s = self.fstate()
            self.expect("SYM", ")")
            return s
        self.fail("expected a formal state")


def parse_state(text):
    p = _StateParser(text)
    s = p.fstate()
    p.done()
    return s


def format_state(s):
    if isinstance(s, Ket):
        return "|%s>_%s" % (format_expr(s.value), format_qvar(s.qvar))
    if isinstance(s, STensor):
        def part(x):
            t = format_state(x)
            return "(%s)" % t if isinstance(x, (Superpose,)) else t
        return "%s %s" % (part(s.left), part(s.right))
    if isinstance(s, Superpose):
        return "(%s) * (%s) + (%s) * (%s)" % (
            format_expr(s.c1), format_state(s.s1),
            format_expr(s.c2), format_state(s.s2))
    if isinstance(s, GateApp):
        ps = "(%s)" % ", ".join(format_expr(e) for e in s.params) if s.params else ""
        return "%s%s[%s] (%s)" % (
            s.gate, ps, ", ".join(format_qvar(q) for q in s.targets),
            format_state(s.state))
    raise AssertionError_("unknown formal state node %r" % (s,))


# ---------------------------------------------------------------------------
# JSON serialization


def _qvar_to_json(q):
    return format_qvar(q)


def _qvar_from_json(text):
    p = _Parser(text)
    qv = p.qvar()
    p.done()
    if len(qv) != 1:
        raise ParseError("expected a single quantum variable")
    return qv[0]


def pred_to_json(a):
    if isinstance(a, Atomic):
        return {"kind": "atomic", "name": a.name,
                "params": [format_expr(e) for e in a.params],
                "targets": [_qvar_to_json(q) for q in a.targets]}
    if isinstance(a, StateProj):
        return {"kind": "proj", "state": format_state(a.state)}
    if isinstance(a, Neg):
        return {"kind": "neg", "arg": pred_to_json(a.arg)}
    if isinstance(a, PTensor):
        return {"kind": "tensor", "left": pred_to_json(a.left),
                "right": pred_to_json(a.right)}
    if isinstance(a, Kraus):
        return {"kind": "kraus", "name": a.name,
                "params": [format_expr(e) for e in a.params],
                "targets": [_qvar_to_json(q) for q in a.targets],
                "branches": [pred_to_json(b) for b in a.branches]}
    raise AssertionError_("unknown predicate node %r" % (a,))


def pred_from_json(d):
    kind = d["kind"]
    if kind == "atomic":
        return Atomic(d["name"],
                      tuple(qs.parse_expr(e) for e in d.get("params", [])),
                      tuple(_qvar_from_json(q) for q in d["targets"]))
    if kind == "proj":
        return StateProj(parse_state(d["state"]))
    if kind == "neg":
        return Neg(pred_from_json(d["arg"]))
    if kind == "tensor":
        return PTensor(pred_from_json(d["left"]), pred_from_json(d["right"]))
    if kind == "kraus":
        return Kraus(d["name"],
                     tuple(qs.parse_expr(e) for e in d.get("params", [])),
                     tuple(_qvar_from_json(q) for q in d.get("targets", [])),
                     tuple(pred_from_json(b) for b in d["branches"]))
    raise AssertionError_("unknown predicate kind %r" % kind)


def assertion_to_json(ca):
    return {"phi": format_expr(ca.phi), "a": pred_to_json(ca.a)}


def assertion_from_json(d):
    return CqAssertion(qs.parse_formula(d["phi"]), pred_from_json(d["a"]))
