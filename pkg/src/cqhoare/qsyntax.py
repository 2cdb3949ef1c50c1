"""Program syntax: AST, parser, pretty printer and static analyses.

Concrete grammar (statements, ';' is right associative and binds weakest):

    skip
    x := e
    q := |0>                    (also q[i,j] := |0>)
    U[q1,...,qn]                gate, optionally U(t1,...,tk)[q1,...,qn]
    x := M[q1,...,qn]           measurement
    if b then P1 else P0 fi
    while b do P od

A right-hand side of the form NAME[...] is read as a measurement when NAME
is in the caller-provided measurement set, or, when none is given, when
NAME starts with an uppercase letter; otherwise it is a bit-array index
expression.
"""

from dataclasses import dataclass
import math

from . import classical as cl
from .classical import (
    BinFrac,
    BinOp,
    BitIndex,
    Call,
    Lit,
    Quant,
    UnOp,
    Var,
)


class ParseError(ValueError):
    def __init__(self, msg, line=None, col=None):
        self.line = line
        self.col = col
        if line is not None:
            msg = "%s (line %d, column %d)" % (msg, line, col)
        super().__init__(msg)


# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class QVar:
    """A possibly subscripted quantum variable occurrence."""

    name: str
    subs: tuple = ()


@dataclass(frozen=True)
class Skip:
    pass


@dataclass(frozen=True)
class Assign:
    var: str
    expr: object


@dataclass(frozen=True)
class Init:
    qvar: QVar


@dataclass(frozen=True)
class Gate:
    name: str
    params: tuple
    targets: tuple  # of QVar


@dataclass(frozen=True)
class Measure:
    var: str
    meas: str
    targets: tuple


@dataclass(frozen=True)
class Seq:
    first: object
    second: object


@dataclass(frozen=True)
class If:
    cond: object
    then: object
    orelse: object


@dataclass(frozen=True)
class While:
    cond: object
    body: object


def seq_all(cmds):
    """Right-associated sequence of a non-empty command list."""
    cmds = list(cmds)
    if not cmds:
        return Skip()
    out = cmds[-1]
    for c in reversed(cmds[:-1]):
        out = Seq(c, out)
    return out


# ---------------------------------------------------------------------------
# Lexer

_KEYWORDS = {
    "skip", "if", "then", "else", "fi", "while", "do", "od",
    "and", "or", "not", "true", "false", "forall", "exists", "in",
}

_SYMBOLS = [":=", "<=", ">=", "!=", "->", "..",
            ";", "(", ")", "[", "]", ",", "<", ">", "|", "=",
            "+", "-", "*", "/", "%", ":", "_", "."]


@dataclass
class Tok:
    kind: str  # NUM IDENT KW SYM EOF
    text: str
    line: int
    col: int


def tokenize(src):
    toks = []
    i, line, col = 0, 1, 1
    n = len(src)
    while i < n:
        c = src[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if c == "#":
            while i < n and src[i] != "\n":
                i += 1
            continue
        if c.isdigit():
            j = i
            while j < n and src[j].isdigit():
                j += 1
            isfloat = False
            if j < n and src[j] == "." and j + 1 < n and src[j + 1].isdigit():
                isfloat = True
                j += 1
                while j < n and src[j].isdigit():
                    j += 1
            if j < n and src[j] in "eE":
                k = j + 1
                if k < n and src[k] in "+-":
                    k += 1
                if k < n and src[k].isdigit():
                    isfloat = True
                    j = k
                    while j < n and src[j].isdigit():
                        j += 1
            toks.append(Tok("NUM", src[i:j], line, col))
            col += j - i
            i = j
            continue
        if c.isalpha() or c == "_" and i + 1 < n and src[i + 1].isalnum():
            j = i
            while j < n and (src[j].isalnum() or src[j] == "_"):
                j += 1
            word = src[i:j]
            # a lone underscore is the ket subscript marker, not an ident
            if word == "_":
                toks.append(Tok("SYM", "_", line, col))
            else:
                toks.append(Tok("KW" if word in _KEYWORDS else "IDENT", word, line, col))
            col += j - i
            i = j
            continue
        matched = None
        for s in _SYMBOLS:
            if src.startswith(s, i):
                matched = s
                break
        if matched is None:
            raise ParseError("unexpected character %r" % c, line, col)
        toks.append(Tok("SYM", matched, line, col))
        i += len(matched)
        col += len(matched)
    toks.append(Tok("EOF", "", line, col))
    return toks


# ---------------------------------------------------------------------------
# Parser

class _Parser:
    def __init__(self, src, measurements=None, allow_sections=False):
        self.toks = tokenize(src)
        self.pos = 0
        self.measurements = measurements
        self.allow_sections = allow_sections

    # -- token helpers

    def peek(self, k=0):
        return self.toks[min(self.pos + k, len(self.toks) - 1)]

    def at(self, kind, text=None, k=0):
        t = self.peek(k)
        return t.kind == kind and (text is None or t.text == text)

    def at_sym(self, text, k=0):
        return self.at("SYM", text, k)

    def take(self):
        t = self.toks[self.pos]
        if t.kind != "EOF":
            self.pos += 1
        return t

    def expect(self, kind, text=None):
        t = self.peek()
        if t.kind != kind or (text is not None and t.text != text):
            want = text or kind
            raise ParseError("expected %r, found %r" % (want, t.text or "end of input"),
                             t.line, t.col)
        return self.take()

    def fail(self, msg):
        t = self.peek()
        raise ParseError(msg, t.line, t.col)

    def is_measurement(self, name):
        if self.measurements is not None:
            return name in self.measurements
        return name[:1].isupper()

    # -- programs

    def program(self):
        cmds = [self.command()]
        while self.at_sym(";"):
            self.take()
            cmds.append(self.command())
        return seq_all(cmds)

    def command(self):
        if self.at("KW", "skip"):
            self.take()
            return Skip()
        if self.at("KW", "if"):
            self.take()
            cond = self.expr()
            self.expect("KW", "then")
            p1 = self.program()
            self.expect("KW", "else")
            p0 = self.program()
            self.expect("KW", "fi")
            return If(cond, p1, p0)
        if self.at("KW", "while"):
            self.take()
            cond = self.expr()
            self.expect("KW", "do")
            body = self.program()
            self.expect("KW", "od")
            return While(cond, body)
        if not self.at("IDENT"):
            self.fail("expected a command")
        # lookahead: IDENT [subs]? ':=' is an assignment/init/measurement,
        # anything else is a gate application
        save = self.pos
        name = self.take().text
        subs = None
        if self.at_sym("["):
            try:
                subs = self.subscripts()
            except ParseError:
                self.pos = save
                return self.gate_command()
        if self.at_sym(":="):
            self.take()
            if self.at_sym("|"):
                self.take()
                z = self.expect("NUM")
                if z.text != "0":
                    raise ParseError("initialization must use |0>", z.line, z.col)
                self.expect("SYM", ">")
                return Init(QVar(name, tuple(subs or ())))
            if subs is not None:
                self.fail("only quantum variables may be initialized")
            if self.at("IDENT") and self.at_sym("[", 1) and self.is_measurement(self.peek().text):
                mname = self.take().text
                self.expect("SYM", "[")
                targets = self.qvar_list()
                self.expect("SYM", "]")
                return Measure(name, mname, tuple(targets))
            return Assign(name, self.expr())
        self.pos = save
        return self.gate_command()

    def gate_command(self):
        name = self.expect("IDENT").text
        params = ()
        if self.at_sym("("):
            self.take()
            params = tuple(self.expr_list())
            self.expect("SYM", ")")
        self.expect("SYM", "[")
        targets = self.qvar_list()
        self.expect("SYM", "]")
        return Gate(name, params, tuple(targets))

    def subscripts(self):
        self.expect("SYM", "[")
        subs = self.expr_list()
        self.expect("SYM", "]")
        return subs

    def qvar(self):
        name = self.expect("IDENT").text
        if self.at_sym("["):
            self.take()
            first = self.expr()
            if self.allow_sections and self.at_sym(":"):
                self.take()
                last = self.expr()
                self.expect("SYM", "]")
                lo = _const_int(first)
                hi = _const_int(last)
                if lo is None or hi is None:
                    self.fail("section bounds must be integer literals")
                return [QVar(name, (Lit(i),)) for i in range(lo, hi + 1)]
            subs = [first]
            while self.at_sym(","):
                self.take()
                subs.append(self.expr())
            self.expect("SYM", "]")
            return [QVar(name, tuple(subs))]
        return [QVar(name)]

    def qvar_list(self):
        out = list(self.qvar())
        while self.at_sym(","):
            self.take()
            out.extend(self.qvar())
        return out

    def expr_list(self):
        out = [self.expr()]
        while self.at_sym(","):
            self.take()
            out.append(self.expr())
        return out

    # -- expressions (lowest precedence first)

    def expr(self):
        if self.at("KW", "forall") or self.at("KW", "exists"):
            kind = self.take().text
            var = self.expect("IDENT").text
            self.expect("KW", "in")
            lo = self.expect("NUM")
            self.expect("SYM", "..")
            hi = self.expect("NUM")
            self.expect("SYM", ".")
            body = self.expr()
            return Quant(kind, var, cl.IntType(int(lo.text), int(hi.text)), body)
        return self.implies()

    def implies(self):
        l = self.disjunct()
        if self.at_sym("->"):
            self.take()
            return BinOp("->", l, self.implies())
        return l

    def disjunct(self):
        l = self.conjunct()
        while self.at("KW", "or"):
            self.take()
            l = BinOp("or", l, self.conjunct())
        return l

    def conjunct(self):
        l = self.negation()
        while self.at("KW", "and"):
            self.take()
            l = BinOp("and", l, self.negation())
        return l

    def negation(self):
        if self.at("KW", "not"):
            self.take()
            return UnOp("not", self.negation())
        return self.comparison()

    def comparison(self):
        l = self.additive()
        for op in ("<=", ">=", "!=", "=", "<", ">"):
            if self.at_sym(op):
                self.take()
                return BinOp(op, l, self.additive())
        return l

    def additive(self):
        l = self.multiplicative()
        while self.at_sym("+") or self.at_sym("-"):
            op = self.take().text
            l = BinOp(op, l, self.multiplicative())
        return l

    def multiplicative(self):
        l = self.unary()
        while self.at_sym("*") or self.at_sym("/") or self.at_sym("%"):
            op = self.take().text
            l = BinOp(op, l, self.unary())
        return l

    def unary(self):
        if self.at_sym("-"):
            self.take()
            return UnOp("-", self.unary())
        return self.primary()

    def primary(self):
        t = self.peek()
        if t.kind == "NUM":
            # binary fraction: 0.j[k:l]
            if t.text == "0" and self.at_sym(".", 1) and self.at("IDENT", None, 2):
                self.take()
                self.take()
                arr = self.take().text
                self.expect("SYM", "[")
                lo = self.expr()
                self.expect("SYM", ":")
                hi = self.expr()
                self.expect("SYM", "]")
                return BinFrac(arr, lo, hi)
            self.take()
            if "." in t.text or "e" in t.text or "E" in t.text:
                return Lit(float(t.text))
            return Lit(int(t.text))
        if t.kind == "KW" and t.text in ("true", "false"):
            self.take()
            return Lit(t.text == "true")
        if t.kind == "IDENT":
            self.take()
            if t.text == "pi" and not self.at_sym("("):
                return Lit(math.pi)
            if self.at_sym("("):
                self.take()
                args = () if self.at_sym(")") else tuple(self.expr_list())
                self.expect("SYM", ")")
                return Call(t.text, args)
            if self.at_sym("["):
                self.take()
                idx = self.expr()
                self.expect("SYM", "]")
                return BitIndex(t.text, idx)
            return Var(t.text)
        if self.at_sym("("):
            self.take()
            e = self.expr()
            self.expect("SYM", ")")
            return e
        self.fail("expected an expression")

    def done(self):
        t = self.peek()
        if t.kind != "EOF":
            raise ParseError("unexpected trailing input %r" % t.text, t.line, t.col)


def _const_int(e):
    if isinstance(e, Lit) and isinstance(e.value, int) and not isinstance(e.value, bool):
        return e.value
    if isinstance(e, UnOp) and e.op == "-":
        v = _const_int(e.arg)
        return None if v is None else -v
    return None


def parse_program(src, measurements=None, allow_sections=False):
    p = _Parser(src, measurements, allow_sections)
    prog = p.program()
    p.done()
    return prog


def parse_expr(src):
    p = _Parser(src)
    e = p.expr()
    p.done()
    return e


parse_formula = parse_expr


# ---------------------------------------------------------------------------
# Pretty printing


def format_expr(e, prec=0):
    """Precedence levels: 1 implies, 2 or, 3 and, 4 not, 5 cmp, 6 add,
    7 mul, 8 unary."""
    def wrap(s, lvl):
        return "(" + s + ")" if lvl < prec else s

    if isinstance(e, Lit):
        if isinstance(e.value, bool):
            return "true" if e.value else "false"
        if isinstance(e.value, float) and abs(e.value - math.pi) < 1e-15:
            return "pi"
        return repr(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, BitIndex):
        return "%s[%s]" % (e.array, format_expr(e.index))
    if isinstance(e, BinFrac):
        return "0.%s[%s:%s]" % (e.array, format_expr(e.lo), format_expr(e.hi))
    if isinstance(e, Call):
        return "%s(%s)" % (e.fn, ", ".join(format_expr(a) for a in e.args))
    if isinstance(e, UnOp):
        if e.op == "not":
            return wrap("not " + format_expr(e.arg, 4), 4)
        return wrap("-" + format_expr(e.arg, 8), 8)
    if isinstance(e, BinOp):
        lvl = {"->": 1, "or": 2, "and": 3,
               "=": 5, "!=": 5, "<": 5, "<=": 5, ">": 5, ">=": 5,
               "+": 6, "-": 6, "*": 7, "/": 7, "%": 7}[e.op]
        sep = " %s " % e.op
        if e.op == "->":
            s = format_expr(e.left, lvl + 1) + sep + format_expr(e.right, lvl)
        elif e.op in ("or", "and", "+", "*"):
            s = format_expr(e.left, lvl) + sep + format_expr(e.right, lvl + 1)
        else:
            s = format_expr(e.left, lvl + 1) + sep + format_expr(e.right, lvl + 1)
        return wrap(s, lvl)
    if isinstance(e, Quant):
        if not isinstance(e.vartype, cl.IntType):
            raise ValueError("only integer-range quantifiers have concrete syntax")
        s = "%s %s in %d..%d . %s" % (
            e.kind, e.var, e.vartype.lo, e.vartype.hi, format_expr(e.body))
        return wrap(s, 0) if prec > 0 else s
    raise ValueError("unknown expression node %r" % (e,))


def format_qvar(q):
    if not q.subs:
        return q.name
    return "%s[%s]" % (q.name, ", ".join(format_expr(s) for s in q.subs))


def pretty(p):
    if isinstance(p, Skip):
        return "skip"
    if isinstance(p, Assign):
        return "%s := %s" % (p.var, format_expr(p.expr))
    if isinstance(p, Init):
        return "%s := |0>" % format_qvar(p.qvar)
    if isinstance(p, Gate):
        ps = "(%s)" % ", ".join(format_expr(e) for e in p.params) if p.params else ""
        return "%s%s[%s]" % (p.name, ps, ", ".join(format_qvar(q) for q in p.targets))
    if isinstance(p, Measure):
        return "%s := %s[%s]" % (p.var, p.meas, ", ".join(format_qvar(q) for q in p.targets))
    if isinstance(p, Seq):
        return "%s; %s" % (pretty(p.first), pretty(p.second))
    if isinstance(p, If):
        return "if %s then %s else %s fi" % (
            format_expr(p.cond), pretty(p.then), pretty(p.orelse))
    if isinstance(p, While):
        return "while %s do %s od" % (format_expr(p.cond), pretty(p.body))
    raise ValueError("unknown program node %r" % (p,))


# ---------------------------------------------------------------------------
# Static analyses


def dist_formula(targets):
    """Formula asserting that the target list resolves to pairwise distinct
    systems: occurrences with different base names are always distinct,
    repeated simple variables never are, and same-array occurrences are
    distinct when the subscript tuples differ somewhere."""
    parts = []
    targets = list(targets)
    for i in range(len(targets)):
        for j in range(i + 1, len(targets)):
            a, b = targets[i], targets[j]
            if a.name != b.name:
                continue
            if not a.subs and not b.subs:
                return cl.FALSE
            if len(a.subs) != len(b.subs):
                raise ValueError(
                    "subscript arity mismatch on %r" % a.name)
            disj = None
            for sa, sb in zip(a.subs, b.subs):
                term = BinOp("!=", sa, sb)
                disj = term if disj is None else BinOp("or", disj, term)
            parts.append(disj)
    return cl.conj(*parts)


def _qvar_entry(q):
    vals = []
    for s in q.subs:
        v = _const_int(s)
        if v is None:
            return (q.name, None)
        vals.append(v)
    return (q.name, tuple(vals))


def quantum_vars(p):
    """Map base name -> set of constant subscript tuples, or None when some
    occurrence has a non-constant subscript (whole array)."""
    out = {}

    def add(q):
        name, entry = _qvar_entry(q)
        if entry is None:
            out[name] = None
        elif out.get(name, set()) is not None:
            out.setdefault(name, set()).add(entry)

    def walk(p):
        if isinstance(p, (Skip, Assign)):
            return
        if isinstance(p, Init):
            add(p.qvar)
        elif isinstance(p, (Gate, Measure)):
            for q in p.targets:
                add(q)
        elif isinstance(p, Seq):
            walk(p.first)
            walk(p.second)
        elif isinstance(p, If):
            walk(p.then)
            walk(p.orelse)
        elif isinstance(p, While):
            walk(p.body)

    walk(p)
    return out


def _qvar_free(q):
    out = set()
    for s in q.subs:
        out |= cl.free_vars(s)
    return out


def classical_vars(p):
    """All classical variables occurring in a program."""
    out = set()
    if isinstance(p, Skip):
        return out
    if isinstance(p, Assign):
        return {p.var} | cl.free_vars(p.expr)
    if isinstance(p, Init):
        return _qvar_free(p.qvar)
    if isinstance(p, Gate):
        for e in p.params:
            out |= cl.free_vars(e)
        for q in p.targets:
            out |= _qvar_free(q)
        return out
    if isinstance(p, Measure):
        out = {p.var}
        for q in p.targets:
            out |= _qvar_free(q)
        return out
    if isinstance(p, Seq):
        return classical_vars(p.first) | classical_vars(p.second)
    if isinstance(p, If):
        return cl.free_vars(p.cond) | classical_vars(p.then) | classical_vars(p.orelse)
    if isinstance(p, While):
        return cl.free_vars(p.cond) | classical_vars(p.body)
    raise ValueError("unknown program node %r" % (p,))


def modified_vars(p):
    """Classical variables written by a program."""
    if isinstance(p, Assign):
        return {p.var}
    if isinstance(p, Measure):
        return {p.var}
    if isinstance(p, Seq):
        return modified_vars(p.first) | modified_vars(p.second)
    if isinstance(p, If):
        return modified_vars(p.then) | modified_vars(p.orelse)
    if isinstance(p, While):
        return modified_vars(p.body)
    return set()
