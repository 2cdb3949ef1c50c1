"""The interpretation: classical typing, quantum variable declarations,
gate/measurement families, Kraus operator symbols and atomic predicates.

Kraus symbols act on predicates as A -> sum_i F_i A F_i^dagger and must be
sub-normalized: sum_i F_i F_i^dagger <= I.  The designated symbols are:

  initialization  FB<d>   operators |n><0| for the d basis states
  gate U          F_<U>   single operator U(params)^dagger
  measurement M   F_<M>   parameterized by outcome m, operator M_m^dagger

With these choices the predicate action of each designated symbol is the
adjoint (Heisenberg picture) of the corresponding state transformer, and
sub-normalization holds for all three.
"""

from dataclasses import dataclass, field
import math
import threading

import numpy as np

from . import classical as cl
from . import linalg as la
from .linalg import Tolerances
from .qsyntax import QVar


class InterpError(ValueError):
    pass


class ResolutionError(InterpError):
    """Subscript evaluation failed or fell outside the declared range."""


def _key_of(params):
    out = []
    for p in params:
        if isinstance(p, float):
            out.append(("f", round(p, 14)))
        elif isinstance(p, complex):
            out.append(("c", round(p.real, 14), round(p.imag, 14)))
        else:
            out.append(("v", p))
    return tuple(out)


@dataclass
class GateFamily:
    name: str
    param_types: tuple
    dims: tuple
    make: object  # params tuple -> unitary matrix

    def __post_init__(self):
        self._cache = {}
        self._lock = threading.Lock()

    @property
    def dim(self):
        d = 1
        for k in self.dims:
            d *= k
        return d

    def matrix(self, params, tol=Tolerances()):
        key = _key_of(params)
        with self._lock:
            if key in self._cache:
                return self._cache[key]
        u = np.asarray(self.make(*params), dtype=complex)
        if u.shape != (self.dim, self.dim):
            raise InterpError("gate %s: wrong matrix shape" % self.name)
        if not la.is_unitary(u, tol.unitary):
            raise InterpError(
                "gate %s is not unitary at parameters %r" % (self.name, params))
        with self._lock:
            self._cache[key] = u
        return u


@dataclass
class MeasurementFamily:
    name: str
    outcome_type: object
    dims: tuple
    operators: dict  # outcome -> matrix

    def __post_init__(self):
        self.operators = {k: np.asarray(v, dtype=complex) for k, v in self.operators.items()}
        d = self.dim
        outs = self.outcome_type.values()
        if outs is None:
            raise InterpError("measurement %s: outcome type must be finite" % self.name)
        if set(outs) != set(self.operators):
            raise InterpError("measurement %s: outcomes do not match operators" % self.name)
        total = np.zeros((d, d), dtype=complex)
        for m in self.operators.values():
            if m.shape != (d, d):
                raise InterpError("measurement %s: wrong operator shape" % self.name)
            total += m.conj().T @ m
        if np.max(np.abs(total - np.eye(d))) > 1e-9:
            raise InterpError("measurement %s violates completeness" % self.name)

    @property
    def dim(self):
        d = 1
        for k in self.dims:
            d *= k
        return d


@dataclass
class KrausSymbol:
    """Named operator family; `dims` None means scalar operators that act as
    multiples of the identity on whatever systems they are applied to."""

    name: str
    rank: int
    param_types: tuple
    dims: object  # tuple of dims, or None for scalar symbols
    make: object  # params -> list of matrices (or complex scalars)

    def __post_init__(self):
        self._cache = {}
        self._lock = threading.Lock()

    @property
    def dim(self):
        if self.dims is None:
            return None
        d = 1
        for k in self.dims:
            d *= k
        return d

    def operators(self, params, tol=Tolerances()):
        key = _key_of(params)
        with self._lock:
            if key in self._cache:
                return self._cache[key]
        ops = list(self.make(*params))
        if len(ops) != self.rank:
            raise InterpError("kraus symbol %s: wrong rank" % self.name)
        if self.dims is None:
            ops = [complex(c) for c in ops]
            total = sum(abs(c) ** 2 for c in ops)
            if total > 1 + tol.psd:
                raise InterpError(
                    "kraus symbol %s violates sub-normalization" % self.name)
        else:
            d = self.dim
            ops = [np.asarray(f, dtype=complex) for f in ops]
            total = np.zeros((d, d), dtype=complex)
            for f in ops:
                if f.shape != (d, d):
                    raise InterpError("kraus symbol %s: wrong shape" % self.name)
                total += f @ f.conj().T
            if not la.is_psd(np.eye(d) - total, tol.psd):
                raise InterpError(
                    "kraus symbol %s violates sub-normalization" % self.name)
        ops = tuple(ops)
        with self._lock:
            self._cache[key] = ops
        return ops


@dataclass
class AtomicPredicate:
    name: str
    param_types: tuple
    dims: tuple
    make: object  # params -> effect matrix

    def __post_init__(self):
        self._cache = {}
        self._lock = threading.Lock()

    @property
    def dim(self):
        d = 1
        for k in self.dims:
            d *= k
        return d

    def matrix(self, params, tol=Tolerances()):
        key = _key_of(params)
        with self._lock:
            if key in self._cache:
                return self._cache[key]
        k = np.asarray(self.make(*params), dtype=complex)
        if k.shape != (self.dim, self.dim):
            raise InterpError("predicate %s: wrong matrix shape" % self.name)
        if not la.is_effect(k, tol.psd):
            raise InterpError(
                "predicate %s is not an effect at parameters %r" % (self.name, params))
        with self._lock:
            self._cache[key] = k
        return k


@dataclass(frozen=True)
class QuantumVarDecl:
    name: str
    dim: int
    index_types: object = None  # tuple of finite ClassicalType, or None

    def arity(self):
        return 0 if self.index_types is None else len(self.index_types)


# ---------------------------------------------------------------------------
# Designated symbol derivation


def derive_fb(basis, name="FB"):
    """Initialization symbol for an ordered orthonormal basis.

    The i-th operator is |b_i><b_0|, the adjoint of the basis-notation
    family: conjugating a predicate by these gives the Heisenberg-picture
    action of initialization, and sum_i F_i F_i^dagger = I exactly.
    """
    b = np.asarray(basis, dtype=complex)
    d = b.shape[1]
    if b.shape[0] != d:
        raise InterpError("basis must be square (columns are basis vectors)")
    if np.max(np.abs(b.conj().T @ b - np.eye(d))) > 1e-10:
        raise InterpError("basis is not orthonormal")
    cols = [b[:, i] for i in range(d)]
    ops = [np.outer(cols[i], cols[0].conj()) for i in range(d)]
    return KrausSymbol(name, d, (), (d,), lambda ops=ops: list(ops))


def derive_fu(gate):
    def make(*params):
        return [gate.matrix(params).conj().T]

    return KrausSymbol("F_" + gate.name, 1, gate.param_types, gate.dims, make)


def derive_fm(meas):
    def make(m):
        if m not in meas.operators:
            raise InterpError(
                "measurement %s has no outcome %r" % (meas.name, m))
        return [meas.operators[m].conj().T]

    return KrausSymbol("F_" + meas.name, 1, (meas.outcome_type,), meas.dims, make)


def weighted_sum_symbol(k):
    """Scalar symbol WSUM<k>: operators sqrt(p_i); realizes sum_i p_i A_i."""

    def make(*ps):
        out = []
        for p in ps:
            p = float(p)
            if p < -1e-12:
                raise InterpError("negative weight %r" % p)
            out.append(complex(math.sqrt(max(p, 0.0))))
        return out

    return KrausSymbol("WSUM%d" % k, k, (cl.RealType(),) * k, None, make)


# ---------------------------------------------------------------------------
# Built-in gate library

_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
_SWAP = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)
_CZ = np.diag([1, 1, 1, -1]).astype(complex)


def _rx(theta):
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)


def _ry(theta):
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def _rz(theta):
    return np.diag([np.exp(-1j * theta / 2), np.exp(1j * theta / 2)]).astype(complex)


def _rxx(theta):
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    m = np.eye(4, dtype=complex) * c
    for i in range(4):
        m[i, 3 - i] += -1j * s
    return m


def _phase_r(l):
    return np.diag([1, np.exp(2j * math.pi / 2 ** int(l))]).astype(complex)


def _controlled_r(l):
    """Controlled phase; first target is the control, second the target."""
    m = np.eye(4, dtype=complex)
    m[3, 3] = np.exp(2j * math.pi / 2 ** int(l))
    return m


def _reverse(k):
    d = 2 ** k
    m = np.zeros((d, d), dtype=complex)
    for i in range(d):
        bits = [(i >> (k - 1 - b)) & 1 for b in range(k)]
        j = 0
        for b in reversed(bits):
            j = j * 2 + b
        m[j, i] = 1.0
    return m


_REAL = cl.RealType()
_INT_PARAM = cl.IntType(1, 64)

MAX_REVERSE = 8


def builtin_gates():
    gates = {
        "I1": GateFamily("I1", (), (2,), lambda: np.eye(2, dtype=complex)),
        "H": GateFamily("H", (), (2,), lambda: _H),
        "X": GateFamily("X", (), (2,), lambda: _X),
        "Y": GateFamily("Y", (), (2,), lambda: _Y),
        "Z": GateFamily("Z", (), (2,), lambda: _Z),
        "CNOT": GateFamily("CNOT", (), (2, 2), lambda: _CNOT),
        "SWAP": GateFamily("SWAP", (), (2, 2), lambda: _SWAP),
        "CZ": GateFamily("CZ", (), (2, 2), lambda: _CZ),
        "Rx": GateFamily("Rx", (_REAL,), (2,), _rx),
        "Ry": GateFamily("Ry", (_REAL,), (2,), _ry),
        "Rz": GateFamily("Rz", (_REAL,), (2,), _rz),
        "Rxx": GateFamily("Rxx", (_REAL,), (2, 2), _rxx),
        "R": GateFamily("R", (_INT_PARAM,), (2,), _phase_r),
        "CR": GateFamily("CR", (_INT_PARAM,), (2, 2), _controlled_r),
    }
    for k in range(1, MAX_REVERSE + 1):
        name = "REVERSE%d" % k
        gates[name] = GateFamily(name, (), (2,) * k, lambda k=k: _reverse(k))
    return gates


def computational_measurement(name="M", qubits=1):
    d = 2 ** qubits
    ops = {m: np.outer(la.basis_vector(m, d), la.basis_vector(m, d).conj())
           for m in range(d)}
    return MeasurementFamily(name, cl.IntType(0, d - 1), (2,) * qubits, ops)


def builtin_predicates():
    preds = {
        "P0": AtomicPredicate("P0", (), (2,), lambda: np.diag([1.0, 0.0]).astype(complex)),
        "P1": AtomicPredicate("P1", (), (2,), lambda: np.diag([0.0, 1.0]).astype(complex)),
        "PPLUS": AtomicPredicate(
            "PPLUS", (), (2,), lambda: np.full((2, 2), 0.5, dtype=complex)),
        "ID1": AtomicPredicate("ID1", (), (2,), lambda: np.eye(2, dtype=complex)),
        "ID2": AtomicPredicate("ID2", (), (2, 2), lambda: np.eye(4, dtype=complex)),
        "HALF1": AtomicPredicate(
            "HALF1", (), (2,), lambda: np.eye(2, dtype=complex) / 2),
    }
    return preds


# ---------------------------------------------------------------------------
# Interpretation


@dataclass
class Interpretation:
    classical_vars: dict = field(default_factory=dict)
    quantum_vars: dict = field(default_factory=dict)
    gates: dict = field(default_factory=builtin_gates)
    measurements: dict = field(default_factory=dict)
    kraus: dict = field(default_factory=dict)
    predicates: dict = field(default_factory=builtin_predicates)
    tolerances: Tolerances = field(default_factory=Tolerances)

    def __post_init__(self):
        if "M" not in self.measurements:
            self.measurements.setdefault("M", computational_measurement("M", 1))
        # designated symbols for everything registered
        for g in list(self.gates.values()):
            self.kraus.setdefault("F_" + g.name, derive_fu(g))
        for m in list(self.measurements.values()):
            self.kraus.setdefault("F_" + m.name, derive_fm(m))
        for d in (1, 2, 4, 8, 16):
            self.kraus.setdefault("FB%d" % d, derive_fb(np.eye(d), "FB%d" % d))
        for k in range(1, 9):
            self.kraus.setdefault("WSUM%d" % k, weighted_sum_symbol(k))
        self._order = {name: i for i, name in enumerate(self.quantum_vars)}

    # -- declarations

    def declare_classical(self, name, ctype):
        self.classical_vars[name] = ctype
        return self

    def declare_quantum(self, name, dim=2, index_types=None):
        self.quantum_vars[name] = QuantumVarDecl(
            name, dim, tuple(index_types) if index_types else None)
        self._order = {n: i for i, n in enumerate(self.quantum_vars)}
        return self

    # -- resolution

    def decl_of(self, name):
        d = self.quantum_vars.get(name)
        if d is None:
            raise ResolutionError("undeclared quantum variable %r" % name)
        return d

    def resolve(self, sigma, qvar):
        """Resolve a subscripted occurrence to a concrete system id."""
        decl = self.decl_of(qvar.name)
        if len(qvar.subs) != decl.arity():
            raise ResolutionError(
                "wrong subscript count for %r" % qvar.name)
        vals = []
        for s, t in zip(qvar.subs, decl.index_types or ()):
            v = cl.eval_expr(sigma, s)
            if isinstance(v, float) and abs(v - round(v)) < 1e-9:
                v = int(round(v))
            if not t.contains(v):
                raise ResolutionError(
                    "subscript value %r out of range for %r" % (v, qvar.name))
            vals.append(v)
        return la.system_id(qvar.name, vals)

    def dim_of(self, sid):
        return self.decl_of(sid[0]).dim

    def order_key(self, sid):
        """Canonical global ordering of resolved systems: declaration order,
        then subscript values."""
        name, subs = sid
        return (self._order.get(name, len(self._order)), name, subs)

    def make_layout(self, sids):
        items = sorted(set(sids), key=self.order_key)
        return la.RegisterLayout(tuple((s, self.dim_of(s)) for s in items))

    def all_systems(self, names=None):
        """Every declared concrete system of the given base names."""
        out = []
        for name, decl in self.quantum_vars.items():
            if names is not None and name not in names:
                continue
            if decl.index_types is None:
                out.append(la.system_id(name))
            else:
                import itertools
                doms = [t.values() for t in decl.index_types]
                if any(d is None for d in doms):
                    raise InterpError("array %r has non-finite index type" % name)
                for combo in itertools.product(*doms):
                    out.append(la.system_id(name, combo))
        return out

    # -- registries

    def gate(self, name):
        g = self.gates.get(name)
        if g is None:
            raise InterpError("unknown gate %r" % name)
        return g

    def measurement(self, name):
        m = self.measurements.get(name)
        if m is None:
            raise InterpError("unknown measurement %r" % name)
        return m

    def kraus_symbol(self, name):
        f = self.kraus.get(name)
        if f is None:
            raise InterpError("unknown Kraus symbol %r" % name)
        return f

    def predicate(self, name):
        k = self.predicates.get(name)
        if k is None:
            raise InterpError("unknown atomic predicate %r" % name)
        return k

    def fb_name(self, dim):
        name = "FB%d" % dim
        if name not in self.kraus:
            self.kraus[name] = derive_fb(np.eye(dim), name)
        return name


def default_interpretation():
    return Interpretation()


# ---------------------------------------------------------------------------
# JSON loading


def _mat_from_json(rows):
    def c(e):
        if isinstance(e, (list, tuple)):
            return complex(e[0], e[1])
        return complex(e)

    return np.array([[c(e) for e in row] for row in rows], dtype=complex)


def mat_to_json(m):
    return [[[float(e.real), float(e.imag)] for e in row] for row in np.asarray(m, dtype=complex)]


_GATE_BUILDERS = None


def load_interpretation(doc):
    """Build an Interpretation from its JSON document, starting from the
    built-in registries."""
    interp = Interpretation(tolerances=Tolerances.from_dict(doc.get("tolerances", {})))
    for name, spec in doc.get("classical_vars", {}).items():
        interp.declare_classical(name, cl.type_from_json(spec))
    for name, spec in doc.get("quantum_vars", {}).items():
        idx = spec.get("indices")
        interp.declare_quantum(
            name,
            dim=int(spec.get("dim", 2)),
            index_types=[cl.type_from_json(t) for t in idx] if idx else None,
        )
    for name, spec in doc.get("gates", {}).items():
        if "builder" in spec:
            base = builtin_gates().get(spec["builder"])
            if base is None:
                raise InterpError("unknown gate builder %r" % spec["builder"])
            interp.gates[name] = GateFamily(name, base.param_types, base.dims, base.make)
        else:
            m = _mat_from_json(spec["matrix"])
            k = int(math.log2(m.shape[0])) if m.shape[0] > 1 else 1
            dims = tuple(spec.get("dims", (2,) * k))
            g = GateFamily(name, (), dims, lambda m=m: m)
            g.matrix(())  # eager unitarity check
            interp.gates[name] = g
        interp.kraus["F_" + name] = derive_fu(interp.gates[name])
    for name, spec in doc.get("measurements", {}).items():
        if spec.get("builder") == "computational":
            interp.measurements[name] = computational_measurement(
                name, int(spec.get("qubits", 1)))
        else:
            ops = {}
            for key, rows in spec["operators"].items():
                try:
                    out = int(key)
                except ValueError:
                    out = key
                ops[out] = _mat_from_json(rows)
            otype = cl.type_from_json(spec["outcome"])
            dims = tuple(spec.get("dims", (2,)))
            interp.measurements[name] = MeasurementFamily(name, otype, dims, ops)
        interp.kraus["F_" + name] = derive_fm(interp.measurements[name])
    for name, spec in doc.get("kraus_symbols", {}).items():
        ops = [_mat_from_json(rows) for rows in spec["operators"]]
        dims = tuple(spec.get("dims", (ops[0].shape[0],)))
        sym = KrausSymbol(name, len(ops), (), dims, lambda ops=ops: list(ops))
        sym.operators(())  # eager sub-normalization check
        interp.kraus[name] = sym
    for name, spec in doc.get("atomic_predicates", {}).items():
        m = _mat_from_json(spec["matrix"])
        dims = tuple(spec.get("dims", (m.shape[0],)))
        ap = AtomicPredicate(name, (), dims, lambda m=m: m)
        ap.matrix(())  # eager effect check
        interp.predicates[name] = ap
    return interp
