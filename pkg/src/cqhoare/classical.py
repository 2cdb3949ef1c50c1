"""Classical types, states, expressions and first-order formulas.

Formulas are boolean-typed expressions; quantifiers range over finite
declared types only.  Values: bool, int, float, complex, enum labels (str)
and bit arrays (tuples of 0/1 indexed by a declared integer range).
"""

from dataclasses import dataclass
from fractions import Fraction
import itertools
import math

FLOAT_EQ = 1e-12
DOMAIN_CAP = 10 ** 6


class EvalError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Types


@dataclass(frozen=True)
class BoolType:
    def values(self):
        return [False, True]

    def contains(self, v):
        return isinstance(v, bool)

    def __str__(self):
        return "Bool"


@dataclass(frozen=True)
class IntType:
    lo: int
    hi: int

    def values(self):
        return list(range(self.lo, self.hi + 1))

    def contains(self, v):
        return isinstance(v, int) and not isinstance(v, bool) and self.lo <= v <= self.hi

    def __str__(self):
        return "Int(%d..%d)" % (self.lo, self.hi)


@dataclass(frozen=True)
class EnumType:
    name: str
    labels: tuple

    def values(self):
        return list(self.labels)

    def contains(self, v):
        return v in self.labels

    def __str__(self):
        return "Enum(%s)" % ",".join(self.labels)


@dataclass(frozen=True)
class RealType:
    def values(self):
        return None

    def contains(self, v):
        return isinstance(v, (int, float)) and not isinstance(v, bool)

    def __str__(self):
        return "Real"


@dataclass(frozen=True)
class ComplexType:
    def values(self):
        return None

    def contains(self, v):
        return isinstance(v, (int, float, complex)) and not isinstance(v, bool)

    def __str__(self):
        return "Complex"


@dataclass(frozen=True)
class Bits:
    """A bit-array value; `lo` is the index of the first bit."""

    lo: int
    bits: tuple

    def __getitem__(self, r):
        k = r - self.lo
        if not 0 <= k < len(self.bits):
            raise EvalError("bit index %d out of range" % r)
        return self.bits[k]

    def as_int(self):
        """Big-endian integer reading: first bit is most significant."""
        out = 0
        for b in self.bits:
            out = out * 2 + b
        return out

    def __str__(self):
        return "".join(str(b) for b in self.bits)


@dataclass(frozen=True)
class BitArrayType:
    lo: int
    hi: int

    def __post_init__(self):
        if self.hi < self.lo:
            raise ValueError("empty bit array range")

    def size(self):
        return self.hi - self.lo + 1

    def values(self):
        return [
            Bits(self.lo, bits)
            for bits in itertools.product((0, 1), repeat=self.size())
        ]

    def contains(self, v):
        return (
            isinstance(v, Bits)
            and v.lo == self.lo
            and len(v.bits) == self.size()
            and all(b in (0, 1) for b in v.bits)
        )

    def __str__(self):
        return "BitArray(%d..%d)" % (self.lo, self.hi)


def type_from_json(spec):
    kind = spec["kind"] if isinstance(spec, dict) else spec
    if kind == "bool":
        return BoolType()
    if kind == "int":
        return IntType(int(spec["lo"]), int(spec["hi"]))
    if kind == "enum":
        return EnumType(spec.get("name", "enum"), tuple(spec["labels"]))
    if kind == "real":
        return RealType()
    if kind == "complex":
        return ComplexType()
    if kind == "bits":
        return BitArrayType(int(spec["lo"]), int(spec["hi"]))
    raise ValueError("unknown classical type %r" % (spec,))


def type_to_json(t):
    if isinstance(t, BoolType):
        return {"kind": "bool"}
    if isinstance(t, IntType):
        return {"kind": "int", "lo": t.lo, "hi": t.hi}
    if isinstance(t, EnumType):
        return {"kind": "enum", "name": t.name, "labels": list(t.labels)}
    if isinstance(t, RealType):
        return {"kind": "real"}
    if isinstance(t, ComplexType):
        return {"kind": "complex"}
    if isinstance(t, BitArrayType):
        return {"kind": "bits", "lo": t.lo, "hi": t.hi}
    raise ValueError("unknown type %r" % (t,))


# ---------------------------------------------------------------------------
# Classical states


class ClassicalState:
    """Immutable finite map from variable names to values."""

    __slots__ = ("_b", "_key")

    def __init__(self, bindings=None):
        self._b = dict(bindings or {})
        self._key = None

    def __getitem__(self, name):
        try:
            return self._b[name]
        except KeyError:
            raise EvalError("unbound classical variable %r" % name)

    def get(self, name, default=None):
        return self._b.get(name, default)

    def __contains__(self, name):
        return name in self._b

    def names(self):
        return set(self._b)

    def items(self):
        return self._b.items()

    def update(self, name, value):
        nb = dict(self._b)
        nb[name] = value
        return ClassicalState(nb)

    def key(self):
        """Canonical hashable form; used to group outputs by classical state."""
        if self._key is None:
            self._key = tuple(sorted(self._b.items(), key=lambda kv: kv[0]))
        return self._key

    def __eq__(self, other):
        return isinstance(other, ClassicalState) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return "{%s}" % ", ".join(
            "%s=%r" % (k, v) for k, v in sorted(self._b.items())
        )

    def to_json(self):
        out = {}
        for k, v in sorted(self._b.items()):
            if isinstance(v, Bits):
                out[k] = {"lo": v.lo, "bits": list(v.bits)}
            else:
                out[k] = v
        return out

    @staticmethod
    def from_json(d):
        b = {}
        for k, v in d.items():
            if isinstance(v, dict) and "bits" in v:
                b[k] = Bits(int(v.get("lo", 1)), tuple(int(x) for x in v["bits"]))
            else:
                b[k] = v
        return ClassicalState(b)


# ---------------------------------------------------------------------------
# Expressions


@dataclass(frozen=True)
class Lit:
    value: object


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class UnOp:
    op: str
    arg: object


@dataclass(frozen=True)
class BitIndex:
    """array[index]: one bit of a bit-array variable."""

    array: str
    index: object


@dataclass(frozen=True)
class BinFrac:
    """Binary fraction 0.array[lo]array[lo+1]...array[hi]."""

    array: str
    lo: object
    hi: object


@dataclass(frozen=True)
class Call:
    fn: str
    args: tuple


@dataclass(frozen=True)
class Quant:
    kind: str  # "forall" | "exists"
    var: str
    vartype: object
    body: object


TRUE = Lit(True)
FALSE = Lit(False)

_ARITH = {"+", "-", "*", "/", "%"}
_CMP = {"=", "!=", "<", "<=", ">", ">="}
_BOOL = {"and", "or", "->"}

_FUNCS = {
    "sqrt": lambda x: math.sqrt(x) if not isinstance(x, complex) else x ** 0.5,
    "cos": math.cos,
    "sin": math.sin,
    "abs": abs,
    "floor": math.floor,
    "max": max,
    "min": min,
}


def _num_eq(a, b):
    if isinstance(a, str) or isinstance(b, str):
        return a == b
    if isinstance(a, Bits) or isinstance(b, Bits):
        return a == b
    if isinstance(a, bool) and isinstance(b, bool):
        return a == b
    return abs(complex(a) - complex(b)) <= FLOAT_EQ


def eval_expr(state, expr):
    """Evaluate an expression in a classical state."""
    if isinstance(expr, Lit):
        return expr.value
    if isinstance(expr, Var):
        return state[expr.name]
    if isinstance(expr, BinOp):
        op = expr.op
        if op in _BOOL:
            l = eval_expr(state, expr.left)
            if not isinstance(l, bool):
                raise EvalError("boolean operator on non-boolean value")
            if op == "and":
                return bool(l) and bool(eval_expr(state, expr.right))
            if op == "or":
                return bool(l) or bool(eval_expr(state, expr.right))
            return (not l) or bool(eval_expr(state, expr.right))
        l = eval_expr(state, expr.left)
        r = eval_expr(state, expr.right)
        if op in _CMP:
            if op == "=":
                return _num_eq(l, r)
            if op == "!=":
                return not _num_eq(l, r)
            if isinstance(l, complex) or isinstance(r, complex):
                raise EvalError("order comparison on complex values")
            if op == "<":
                return l < r
            if op == "<=":
                return l <= r or _num_eq(l, r)
            if op == ">":
                return l > r
            return l >= r or _num_eq(l, r)
        if op in _ARITH:
            if isinstance(l, bool):
                l = int(l)
            if isinstance(r, bool):
                r = int(r)
            if op == "+":
                return l + r
            if op == "-":
                return l - r
            if op == "*":
                return l * r
            if op == "%":
                return l % r
            # exact when both integral and divisible, float otherwise
            if isinstance(l, int) and isinstance(r, int):
                if r == 0:
                    raise EvalError("division by zero")
                f = Fraction(l, r)
                return int(f) if f.denominator == 1 else float(f)
            if r == 0:
                raise EvalError("division by zero")
            return l / r
        raise EvalError("unknown operator %r" % op)
    if isinstance(expr, UnOp):
        v = eval_expr(state, expr.arg)
        if expr.op == "-":
            return -(int(v) if isinstance(v, bool) else v)
        if expr.op == "not":
            if not isinstance(v, bool):
                raise EvalError("negation of non-boolean value")
            return not v
        raise EvalError("unknown unary operator %r" % expr.op)
    if isinstance(expr, BitIndex):
        arr = state[expr.array]
        if not isinstance(arr, Bits):
            raise EvalError("%r is not a bit array" % expr.array)
        idx = eval_expr(state, expr.index)
        return arr[int(idx)]
    if isinstance(expr, BinFrac):
        arr = state[expr.array]
        if not isinstance(arr, Bits):
            raise EvalError("%r is not a bit array" % expr.array)
        k = int(eval_expr(state, expr.lo))
        l = int(eval_expr(state, expr.hi))
        if l < k:
            return 0.0
        total = Fraction(0)
        for r in range(k, l + 1):
            total += Fraction(arr[r], 2 ** (r - k + 1))
        return float(total)
    if isinstance(expr, Call):
        if expr.fn == "exp2pi":
            # e^(2 pi i x)
            x = eval_expr(state, expr.args[0])
            if isinstance(x, complex):
                raise EvalError("exp2pi expects a real argument")
            return complex(math.cos(2 * math.pi * x), math.sin(2 * math.pi * x))
        if expr.fn == "pi":
            return math.pi
        fn = _FUNCS.get(expr.fn)
        if fn is None:
            raise EvalError("unknown function %r" % expr.fn)
        return fn(*[eval_expr(state, a) for a in expr.args])
    if isinstance(expr, Quant):
        dom = expr.vartype.values()
        if dom is None:
            raise EvalError("quantifier over non-enumerable type")
        for v in dom:
            r = eval_expr(state.update(expr.var, v), expr.body)
            if not isinstance(r, bool):
                raise EvalError("quantifier body is not boolean")
            if expr.kind == "exists" and r:
                return True
            if expr.kind == "forall" and not r:
                return False
        return expr.kind == "forall"
    raise EvalError("unknown expression node %r" % (expr,))


def satisfies(state, formula):
    v = eval_expr(state, formula)
    if not isinstance(v, bool):
        raise EvalError("formula did not evaluate to a boolean")
    return v


# ---------------------------------------------------------------------------
# Free variables and substitution


def free_vars(expr):
    if isinstance(expr, Lit):
        return set()
    if isinstance(expr, Var):
        return {expr.name}
    if isinstance(expr, BinOp):
        return free_vars(expr.left) | free_vars(expr.right)
    if isinstance(expr, UnOp):
        return free_vars(expr.arg)
    if isinstance(expr, BitIndex):
        return {expr.array} | free_vars(expr.index)
    if isinstance(expr, BinFrac):
        return {expr.array} | free_vars(expr.lo) | free_vars(expr.hi)
    if isinstance(expr, Call):
        out = set()
        for a in expr.args:
            out |= free_vars(a)
        return out
    if isinstance(expr, Quant):
        return free_vars(expr.body) - {expr.var}
    raise EvalError("unknown expression node %r" % (expr,))


_fresh_counter = itertools.count()


def _fresh(base, avoid):
    cand = base
    while cand in avoid:
        cand = "%s_%d" % (base, next(_fresh_counter))
    return cand


def subst(expr, repl, var):
    """expr[repl/var], capture avoiding."""
    if isinstance(expr, Lit):
        return expr
    if isinstance(expr, Var):
        return repl if expr.name == var else expr
    if isinstance(expr, BinOp):
        return BinOp(expr.op, subst(expr.left, repl, var), subst(expr.right, repl, var))
    if isinstance(expr, UnOp):
        return UnOp(expr.op, subst(expr.arg, repl, var))
    if isinstance(expr, BitIndex):
        if expr.array == var:
            if isinstance(repl, Var):
                return BitIndex(repl.name, subst(expr.index, repl, var))
            raise EvalError("cannot substitute a non-variable for bit array %r" % var)
        return BitIndex(expr.array, subst(expr.index, repl, var))
    if isinstance(expr, BinFrac):
        arr = expr.array
        if arr == var:
            if isinstance(repl, Var):
                arr = repl.name
            else:
                raise EvalError("cannot substitute a non-variable for bit array %r" % var)
        return BinFrac(arr, subst(expr.lo, repl, var), subst(expr.hi, repl, var))
    if isinstance(expr, Call):
        return Call(expr.fn, tuple(subst(a, repl, var) for a in expr.args))
    if isinstance(expr, Quant):
        if expr.var == var:
            return expr
        if expr.var in free_vars(repl):
            avoid = free_vars(expr.body) | free_vars(repl) | {var}
            nv = _fresh(expr.var, avoid)
            body = subst(expr.body, Var(nv), expr.var)
            return Quant(expr.kind, nv, expr.vartype, subst(body, repl, var))
        return Quant(expr.kind, expr.var, expr.vartype, subst(expr.body, repl, var))
    raise EvalError("unknown expression node %r" % (expr,))


# ---------------------------------------------------------------------------
# Enumeration of classical states


def iter_states(typing, names=None, base=None, cap=DOMAIN_CAP):
    """Yield all classical states over the given variable names.

    typing: dict name -> ClassicalType.  Raises EvalError when a needed
    domain is not enumerable or the product exceeds the cap.
    """
    names = sorted(typing) if names is None else sorted(names)
    domains = []
    total = 1
    for n in names:
        t = typing.get(n)
        if t is None:
            raise EvalError("no declared type for variable %r" % n)
        vals = t.values()
        if vals is None:
            raise EvalError("type of %r is not enumerable" % n)
        domains.append(vals)
        total *= len(vals)
        if total > cap:
            raise EvalError("state space size exceeds cap %d" % cap)
    base_b = dict(base.items()) if base is not None else {}
    for combo in itertools.product(*domains):
        b = dict(base_b)
        b.update(zip(names, combo))
        yield ClassicalState(b)


def domain_size(typing, names):
    total = 1
    for n in sorted(names):
        t = typing.get(n)
        if t is None or t.values() is None:
            return None
        total *= len(t.values())
    return total


# ---------------------------------------------------------------------------
# Structural normalization (for proof checking)


def _flatten(op, e, out):
    if isinstance(e, BinOp) and e.op == op:
        _flatten(op, e.left, out)
        _flatten(op, e.right, out)
    else:
        out.append(e)


def normalize(expr, bound=None):
    """Canonical form: and/or flattened right-associatively, bound variables
    renamed positionally.  Used for structural formula equality."""
    bound = bound or {}
    if isinstance(expr, Lit):
        return expr
    if isinstance(expr, Var):
        return Var(bound.get(expr.name, expr.name))
    if isinstance(expr, BinOp):
        if expr.op in ("and", "or"):
            parts = []
            _flatten(expr.op, expr, parts)
            parts = [normalize(p, bound) for p in parts]
            out = parts[-1]
            for p in reversed(parts[:-1]):
                out = BinOp(expr.op, p, out)
            return out
        return BinOp(expr.op, normalize(expr.left, bound), normalize(expr.right, bound))
    if isinstance(expr, UnOp):
        return UnOp(expr.op, normalize(expr.arg, bound))
    if isinstance(expr, BitIndex):
        return BitIndex(bound.get(expr.array, expr.array), normalize(expr.index, bound))
    if isinstance(expr, BinFrac):
        return BinFrac(
            bound.get(expr.array, expr.array),
            normalize(expr.lo, bound),
            normalize(expr.hi, bound),
        )
    if isinstance(expr, Call):
        return Call(expr.fn, tuple(normalize(a, bound) for a in expr.args))
    if isinstance(expr, Quant):
        nv = "$b%d" % len(bound)
        nb = dict(bound)
        nb[expr.var] = nv
        return Quant(expr.kind, nv, expr.vartype, normalize(expr.body, nb))
    raise EvalError("unknown expression node %r" % (expr,))


def formula_equal(a, b):
    return normalize(a) == normalize(b)


def conj(*parts):
    parts = [p for p in parts if p != TRUE]
    if not parts:
        return TRUE
    out = parts[-1]
    for p in reversed(parts[:-1]):
        out = BinOp("and", p, out)
    return out


def neg(f):
    return UnOp("not", f)
