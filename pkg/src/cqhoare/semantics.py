"""Operational and structural semantics for cq-states.

A configuration's fuel counts loop unrollings: every transition that
expands `while b do P` with the guard true consumes one unit, all other
transitions are free.  With that convention a run always terminates, the
items reached with fuel n are exactly the outputs available within n
unrollings, and the nontermination lower bound after fuel n is the trace
still sitting in unfinished loops.
"""

from dataclasses import dataclass, field

import numpy as np

from . import classical as cl
from . import linalg as la
from . import qsyntax as qs
from .linalg import DensityOperator
from .structures import ResolutionError

BRANCH_CAP = 10 ** 6


class SemanticsError(ValueError):
    pass


@dataclass
class CqState:
    sigma: cl.ClassicalState
    rho: DensityOperator

    def trace(self):
        return self.rho.trace()


@dataclass
class Configuration:
    program: object  # Program or None when terminated
    state: CqState

    @property
    def terminated(self):
        return self.program is None


@dataclass
class OutcomeMultiset:
    items: list
    residual: list  # of Configuration
    blocked_trace: float = 0.0
    pruned_trace: float = 0.0
    input_trace: float = 0.0

    def items_trace(self):
        return sum(s.trace() for s in self.items)

    def residual_trace(self):
        return sum(c.state.trace() for c in self.residual)


def _resolve_targets(interp, sigma, targets):
    return [interp.resolve(sigma, q) for q in targets]


def _dist_ok(sids):
    return len(set(sids)) == len(sids)


def _init_channel(rho, sid, interp):
    d = rho.layout.dim_of(sid)
    out = np.zeros_like(rho.mat)
    for n in range(d):
        e = np.outer(la.basis_vector(0, d), la.basis_vector(n, d).conj())
        big = la.embed(e, [sid], rho.layout)
        out += big @ rho.mat @ big.conj().T
    return DensityOperator(rho.layout, out)


def _check_gate_dims(interp, gate, sids, layout):
    dims = tuple(layout.dim_of(s) for s in sids)
    if dims != tuple(gate.dims):
        raise SemanticsError(
            "gate %s expects dimensions %s, got %s" % (gate.name, gate.dims, dims))


@dataclass
class _Succ:
    program: object
    state: CqState
    loop_step: bool = False


@dataclass
class StepResult:
    successors: list
    blocked: bool = False


def step(config, interp):
    """One small-step transition; zero successors with blocked=True when a
    distinctness premise fails."""
    p, s = config.program, config.state
    if p is None:
        raise SemanticsError("configuration already terminated")
    if isinstance(p, qs.Skip):
        return StepResult([_Succ(None, s)])
    if isinstance(p, qs.Assign):
        v = cl.eval_expr(s.sigma, p.expr)
        t = interp.classical_vars.get(p.var)
        if t is not None and not t.contains(v):
            raise SemanticsError(
                "assignment of %r to %s leaves its declared type" % (v, p.var))
        return StepResult([_Succ(None, CqState(s.sigma.update(p.var, v), s.rho))])
    if isinstance(p, qs.Init):
        sid = interp.resolve(s.sigma, p.qvar)
        return StepResult([_Succ(None, CqState(s.sigma, _init_channel(s.rho, sid, interp)))])
    if isinstance(p, qs.Gate):
        gate = interp.gate(p.name)
        sids = _resolve_targets(interp, s.sigma, p.targets)
        if not _dist_ok(sids):
            return StepResult([], blocked=True)
        _check_gate_dims(interp, gate, sids, s.rho.layout)
        params = tuple(cl.eval_expr(s.sigma, e) for e in p.params)
        u = gate.matrix(params, interp.tolerances)
        return StepResult([_Succ(None, CqState(s.sigma, s.rho.apply(u, sids)))])
    if isinstance(p, qs.Measure):
        meas = interp.measurement(p.meas)
        sids = _resolve_targets(interp, s.sigma, p.targets)
        if not _dist_ok(sids):
            return StepResult([], blocked=True)
        succ = []
        for m, op in meas.operators.items():
            rho2 = s.rho.apply(op, sids)
            succ.append(_Succ(None, CqState(s.sigma.update(p.var, m), rho2)))
        return StepResult(succ)
    if isinstance(p, qs.Seq):
        inner = step(Configuration(p.first, s), interp)
        succ = []
        for t in inner.successors:
            nxt = p.second if t.program is None else qs.Seq(t.program, p.second)
            succ.append(_Succ(nxt, t.state, t.loop_step))
        return StepResult(succ, blocked=inner.blocked)
    if isinstance(p, qs.If):
        branch = p.then if cl.satisfies(s.sigma, p.cond) else p.orelse
        return StepResult([_Succ(branch, s)])
    if isinstance(p, qs.While):
        if cl.satisfies(s.sigma, p.cond):
            return StepResult([_Succ(qs.Seq(p.body, p), s, loop_step=True)])
        return StepResult([_Succ(None, s)])
    raise SemanticsError("unknown program node %r" % (p,))


def run(program, state, fuel, interp, branch_cap=BRANCH_CAP, prune=None):
    """Breadth-first closure of step with a loop-unrolling budget."""
    prune = interp.tolerances.prune if prune is None else prune
    out = OutcomeMultiset([], [], input_trace=state.trace())
    queue = [(program, state, fuel)]
    while queue:
        if len(queue) + len(out.items) > branch_cap:
            raise SemanticsError("branch cap exceeded")
        nxt = []
        for prog, st, f in queue:
            tr = st.trace()
            if tr < prune:
                out.pruned_trace += max(tr, 0.0)
                continue
            if prog is None:
                out.items.append(st)
                continue
            res = step(Configuration(prog, st), interp)
            if res.blocked:
                out.blocked_trace += tr
                continue
            for t in res.successors:
                if t.loop_step:
                    if f == 0:
                        out.residual.append(Configuration(prog, st))
                    else:
                        nxt.append((t.program, t.state, f - 1))
                else:
                    nxt.append((t.program, t.state, f))
        queue = nxt
    return out


# ---------------------------------------------------------------------------
# Structural (denotational) semantics — independent of `step`


def _seq_residual(cfg, second):
    prog = second if cfg.program is None else qs.Seq(cfg.program, second)
    return Configuration(prog, cfg.state)


def _ssem(program, state, fuel, interp, prune):
    """Returns (list of (CqState, fuel_left), residual, blocked, pruned)."""
    sigma, rho = state.sigma, state.rho
    tr = state.trace()
    if tr < prune:
        return [], [], 0.0, max(tr, 0.0)
    if isinstance(program, qs.Skip):
        return [(state, fuel)], [], 0.0, 0.0
    if isinstance(program, qs.Assign):
        v = cl.eval_expr(sigma, program.expr)
        t = interp.classical_vars.get(program.var)
        if t is not None and not t.contains(v):
            raise SemanticsError(
                "assignment of %r to %s leaves its declared type" % (v, program.var))
        return [(CqState(sigma.update(program.var, v), rho), fuel)], [], 0.0, 0.0
    if isinstance(program, qs.Init):
        sid = interp.resolve(sigma, program.qvar)
        return [(CqState(sigma, _init_channel(rho, sid, interp)), fuel)], [], 0.0, 0.0
    if isinstance(program, qs.Gate):
        gate = interp.gate(program.name)
        sids = _resolve_targets(interp, sigma, program.targets)
        if not _dist_ok(sids):
            return [], [], tr, 0.0
        _check_gate_dims(interp, gate, sids, rho.layout)
        params = tuple(cl.eval_expr(sigma, e) for e in program.params)
        u = gate.matrix(params, interp.tolerances)
        return [(CqState(sigma, rho.apply(u, sids)), fuel)], [], 0.0, 0.0
    if isinstance(program, qs.Measure):
        meas = interp.measurement(program.meas)
        sids = _resolve_targets(interp, sigma, program.targets)
        if not _dist_ok(sids):
            return [], [], tr, 0.0
        items, pruned = [], 0.0
        for m, op in meas.operators.items():
            st = CqState(sigma.update(program.var, m), rho.apply(op, sids))
            if st.trace() < prune:
                pruned += max(st.trace(), 0.0)
            else:
                items.append((st, fuel))
        return items, [], 0.0, pruned
    if isinstance(program, qs.Seq):
        i1, r1, b1, p1 = _ssem(program.first, state, fuel, interp, prune)
        items, residual = [], [_seq_residual(c, program.second) for c in r1]
        blocked, pruned = b1, p1
        for st, f in i1:
            i2, r2, b2, p2 = _ssem(program.second, st, f, interp, prune)
            items.extend(i2)
            residual.extend(r2)
            blocked += b2
            pruned += p2
        return items, residual, blocked, pruned
    if isinstance(program, qs.If):
        branch = program.then if cl.satisfies(sigma, program.cond) else program.orelse
        return _ssem(branch, state, fuel, interp, prune)
    if isinstance(program, qs.While):
        if not cl.satisfies(sigma, program.cond):
            return [(state, fuel)], [], 0.0, 0.0
        if fuel == 0:
            return [], [Configuration(program, state)], 0.0, 0.0
        ib, rb, bb, pb = _ssem(program.body, state, fuel - 1, interp, prune)
        items = []
        residual = [_seq_residual(c, program) for c in rb]
        blocked, pruned = bb, pb
        for st, f in ib:
            i2, r2, b2, p2 = _ssem(program, st, f, interp, prune)
            items.extend(i2)
            residual.extend(r2)
            blocked += b2
            pruned += p2
        return items, residual, blocked, pruned
    raise SemanticsError("unknown program node %r" % (program,))


def structural_sem(program, state, fuel, interp, prune=None):
    """Denotational multiset by structural recursion; oracle for run."""
    prune = interp.tolerances.prune if prune is None else prune
    items, residual, blocked, pruned = _ssem(program, state, fuel, interp, prune)
    out = OutcomeMultiset(
        [st for st, _ in items], residual,
        blocked_trace=blocked, pruned_trace=pruned,
        input_trace=state.trace())
    return out


def nt_lower_bound(program, state, fuel, interp):
    """tr(rho) minus the terminated mass reachable within `fuel` unrollings."""
    out = run(program, state, fuel, interp)
    return state.trace() - out.items_trace()


# ---------------------------------------------------------------------------
# Multisets, Theta, equivalence


def theta_of(outcome, sigma):
    """Sum of the quantum parts of all items at the given classical state."""
    layout = None
    acc = None
    for st in outcome.items:
        if layout is None:
            layout = st.rho.layout
        elif st.rho.layout != layout:
            raise SemanticsError("items do not share a layout")
        if st.sigma == sigma:
            acc = st.rho.mat if acc is None else acc + st.rho.mat
    if layout is None:
        raise SemanticsError("empty outcome has no layout")
    if acc is None:
        acc = np.zeros((layout.dim, layout.dim), dtype=complex)
    return DensityOperator(layout, acc)


def normalize(outcome, prune=1e-14):
    """Merge items per classical state, dropping (near-)zero entries."""
    by_sigma = {}
    for st in outcome.items:
        key = st.sigma.key()
        if key in by_sigma:
            prev = by_sigma[key]
            by_sigma[key] = CqState(st.sigma, DensityOperator(
                prev.rho.layout, prev.rho.mat + st.rho.mat))
        else:
            by_sigma[key] = CqState(st.sigma, st.rho.copy())
    return [st for st in by_sigma.values() if st.trace() >= prune]


def multiset_equal(items1, items2, tol=1e-12):
    """Equality up to permutation: classical parts exact, quantum parts
    within tol elementwise."""
    if len(items1) != len(items2):
        return False
    rest = list(items2)
    for a in items1:
        hit = None
        for i, b in enumerate(rest):
            if a.sigma == b.sigma and a.rho.layout == b.rho.layout and \
                    np.max(np.abs(a.rho.mat - b.rho.mat)) <= tol:
                hit = i
                break
        if hit is None:
            return False
        rest.pop(hit)
    return True


@dataclass
class EquivVerdict:
    equal: object  # True / False / None (inconclusive)
    reason: str = ""
    witness: object = None


def equivalent(p1, p2, inputs, fuel, interp, tol=1e-9):
    """Test-input equivalence: per input, the per-sigma summed outputs agree
    and both runs terminate (tiny residual)."""
    for st in inputs:
        o1 = run(p1, st, fuel, interp)
        o2 = run(p2, st, fuel, interp)
        if o1.residual_trace() > tol or o2.residual_trace() > tol:
            return EquivVerdict(None, "residual trace at finite fuel", st.sigma)
        n1 = {s.sigma.key(): s for s in normalize(o1)}
        n2 = {s.sigma.key(): s for s in normalize(o2)}
        for key in set(n1) | set(n2):
            a, b = n1.get(key), n2.get(key)
            if a is None or b is None:
                m = (a or b).rho.mat
                if np.max(np.abs(m)) > tol:
                    return EquivVerdict(False, "output only on one side", key)
                continue
            if a.rho.layout != b.rho.layout:
                return EquivVerdict(False, "layout mismatch", key)
            if np.max(np.abs(a.rho.mat - b.rho.mat)) > tol:
                return EquivVerdict(False, "quantum outputs differ", key)
    return EquivVerdict(True)
