"""Dense linear algebra over ordered tensor products of finite systems.

Operators live on a RegisterLayout: an ordered list of (system id, dimension)
pairs whose order fixes the tensor-factor order.  A system id is a pair
(base name, tuple of resolved subscript values); a plain variable has an
empty subscript tuple.
"""

from dataclasses import dataclass, field
import numpy as np

# System id: (base name, resolved subscripts).  Hashable and orderable
# within one declaration, which is all the canonical ordering needs.
SystemId = tuple

DIM_CAP = 2 ** 14


@dataclass(frozen=True)
class Tolerances:
    hermitian: float = 1e-10
    psd: float = 1e-9
    trace: float = 1e-9
    unitary: float = 1e-9
    completeness: float = 1e-9
    prune: float = 1e-14
    fuzz: float = 1e-7
    float_eq: float = 1e-12

    @staticmethod
    def from_dict(d):
        known = {f for f in Tolerances.__dataclass_fields__}
        return Tolerances(**{k: float(v) for k, v in d.items() if k in known})


def system_id(name, subs=()):
    return (name, tuple(subs))


def format_system(sid):
    name, subs = sid
    if not subs:
        return name
    return "%s[%s]" % (name, ",".join(str(s) for s in subs))


class LayoutError(ValueError):
    pass


@dataclass(frozen=True)
class RegisterLayout:
    """Ordered collection of systems; the order is the kron order."""

    systems: tuple  # tuple of (SystemId, dim)

    def __post_init__(self):
        seen = set()
        for sid, dim in self.systems:
            if sid in seen:
                raise LayoutError("duplicate system %s" % format_system(sid))
            if dim < 1:
                raise LayoutError("dimension must be positive")
            seen.add(sid)
        if self.dim > DIM_CAP:
            raise LayoutError(
                "total dimension %d exceeds cap %d" % (self.dim, DIM_CAP)
            )

    @property
    def dim(self):
        d = 1
        for _, k in self.systems:
            d *= k
        return d

    @property
    def ids(self):
        return tuple(sid for sid, _ in self.systems)

    def dims(self):
        return tuple(k for _, k in self.systems)

    def index(self, sid):
        for i, (s, _) in enumerate(self.systems):
            if s == sid:
                return i
        raise LayoutError("system %s not in layout" % format_system(sid))

    def dim_of(self, sid):
        return self.systems[self.index(sid)][1]

    def __contains__(self, sid):
        return any(s == sid for s, _ in self.systems)

    def restrict(self, sids):
        keep = set(sids)
        return RegisterLayout(tuple(p for p in self.systems if p[0] in keep))


def union_layout(a, b, order_key=None):
    """Merge two layouts; overlapping systems must agree on dimension.

    The result is sorted by order_key when given, otherwise systems of `a`
    keep their order and new systems of `b` are appended.
    """
    pairs = dict(a.systems)
    for sid, d in b.systems:
        if sid in pairs and pairs[sid] != d:
            raise LayoutError("dimension mismatch for %s" % format_system(sid))
        pairs.setdefault(sid, d)
    items = list(pairs.items())
    if order_key is not None:
        items.sort(key=lambda p: order_key(p[0]))
    return RegisterLayout(tuple(items))


def kron_all(mats):
    out = np.array([[1.0 + 0j]])
    for m in mats:
        out = np.kron(out, m)
    return out


def _perm_tensor(mat, dims_src, perm):
    """Reorder the tensor factors of a square matrix.

    dims_src are the factor dimensions of `mat`'s current order; perm[i] is
    the position in the current order of the factor that should end up at
    position i.
    """
    n = len(dims_src)
    if n == 0:
        return mat
    shape = list(dims_src) + list(dims_src)
    t = mat.reshape(shape)
    axes = list(perm) + [n + p for p in perm]
    return t.transpose(axes).reshape(mat.shape)


def permute_vector(vec, dims_src, perm):
    n = len(dims_src)
    if n == 0:
        return vec
    t = vec.reshape(list(dims_src))
    return t.transpose(list(perm)).reshape(-1)


def embed(op, targets, layout):
    """Embed `op`, given on `targets` (in that order), into the full layout.

    Acts as the identity on every system of the layout not in targets.
    """
    ids = list(layout.ids)
    for t in targets:
        if t not in ids:
            raise LayoutError("target %s not in layout" % format_system(t))
    if len(set(targets)) != len(targets):
        raise LayoutError("repeated target system")
    rest = [s for s in ids if s not in targets]
    order = list(targets) + rest
    dims_order = [layout.dim_of(s) for s in order]
    rest_dim = 1
    for s in rest:
        rest_dim *= layout.dim_of(s)
    tdim = 1
    for s in targets:
        tdim *= layout.dim_of(s)
    if op.shape != (tdim, tdim):
        raise LayoutError(
            "operator shape %s does not match target dimension %d"
            % (op.shape, tdim)
        )
    big = np.kron(op, np.eye(rest_dim, dtype=complex))
    # big is in `order`; permute back to layout order
    perm = [order.index(s) for s in ids]
    return _perm_tensor(big, dims_order, perm)


def embed_vector(vec, sources, layout):
    """Reorder/extend a state vector given on `sources` onto `layout`.

    Every system of the layout must appear in sources (no identity padding
    for vectors).
    """
    if set(sources) != set(layout.ids):
        raise LayoutError("vector systems do not match layout")
    dims_src = [layout.dim_of(s) for s in sources]
    perm = [sources.index(s) for s in layout.ids]
    return permute_vector(vec, dims_src, perm)


def is_hermitian(a, eps=1e-10):
    return bool(np.max(np.abs(a - a.conj().T)) <= eps) if a.size else True


def is_psd(a, eps=1e-9):
    """Positive semidefiniteness up to -eps on the smallest eigenvalue."""
    if not is_hermitian(a, max(eps, 1e-8)):
        return False
    h = (a + a.conj().T) / 2
    w = np.linalg.eigvalsh(h)
    return bool(w.min() >= -eps) if w.size else True


def min_eig(a):
    h = (a + a.conj().T) / 2
    w = np.linalg.eigvalsh(h)
    return float(w.min()) if w.size else 0.0


def is_unitary(u, eps=1e-9):
    d = u.shape[0]
    return bool(np.max(np.abs(u.conj().T @ u - np.eye(d))) <= eps)


def is_effect(k, eps=1e-9):
    """0 <= K <= I up to eps."""
    d = k.shape[0]
    return is_psd(k, eps) and is_psd(np.eye(d) - k, eps)


def trace_product(a, rho):
    """Re tr(a @ rho); the imaginary part must be numerical noise."""
    val = np.trace(a @ rho)
    return float(val.real)


@dataclass
class DensityOperator:
    """Partial density operator: PSD with trace <= 1 (up to tolerance)."""

    layout: RegisterLayout
    mat: np.ndarray

    def __post_init__(self):
        self.mat = np.asarray(self.mat, dtype=complex)
        d = self.layout.dim
        if self.mat.shape != (d, d):
            raise LayoutError(
                "matrix shape %s does not match layout dimension %d"
                % (self.mat.shape, d)
            )

    def validate(self, tol=Tolerances()):
        if not is_hermitian(self.mat, tol.hermitian):
            raise ValueError("density matrix is not hermitian")
        if not is_psd(self.mat, tol.psd):
            raise ValueError("density matrix is not positive semidefinite")
        if self.trace() > 1 + tol.trace:
            raise ValueError("density matrix trace exceeds 1")
        return self

    def trace(self):
        return float(np.trace(self.mat).real)

    def apply(self, op, targets):
        """Conjugate by an operator on the given targets: E rho E^dagger."""
        e = embed(op, targets, self.layout)
        return DensityOperator(self.layout, e @ self.mat @ e.conj().T)

    def copy(self):
        return DensityOperator(self.layout, self.mat.copy())


def pure_state(vec, layout):
    v = np.asarray(vec, dtype=complex).reshape(-1)
    return DensityOperator(layout, np.outer(v, v.conj()))


def basis_vector(index, dim):
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v
