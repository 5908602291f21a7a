"""Group elements and their actions on data, outputs, parameters and functions.

Three variants are supported:

* ``affine``: ``g = (L, t)`` acting on ``R^m`` by ``x -> Lx + t``;
* ``ortho_affine``: ``g = (Q, L, t)``, which additionally rotates outputs by ``Q``;
* ``cyclic``: a shift in ``Z_k`` permuting the coordinates of ``R^k``.

Parameter actions dispatch on a :class:`LayerRole`.
"""

import enum
import json
from dataclasses import dataclass, field

import numpy as np

from . import _linalg
from .params import Depth2Param, LayerParam, QuadParam

DET_FLOOR = 1e-8
ORTHO_TOL = 1e-10
VARIANTS = ("affine", "ortho_affine", "cyclic")


class LayerRole(str, enum.Enum):
    FIRST = "first"
    MIDDLE = "middle"
    LAST = "last"
    DEPTH2 = "depth2"
    QUADRATIC = "quadratic"


class SingularElementError(ValueError):
    """The linear part is numerically singular."""


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class GroupElement:
    """Immutable group element with cached inverse and determinant of ``L``.

    Use the constructors :func:`affine`, :func:`ortho_affine`, :func:`cyclic`
    or :func:`identity` rather than instantiating directly.
    """

    variant: str
    L: np.ndarray = None
    t: np.ndarray = None
    Q: np.ndarray = None
    shift: int = 0
    k: int = 0
    Linv: np.ndarray = field(default=None, repr=False)
    det: float = field(default=1.0, repr=False)

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError("unknown variant %r" % (self.variant,))
        if self.variant == "cyclic":
            if self.k < 1:
                raise ValueError("cyclic order k must be >= 1")
            object.__setattr__(self, "shift", int(self.shift) % int(self.k))
            return
        L = _frozen(np.atleast_2d(self.L))
        t = _frozen(np.atleast_1d(self.t))
        m = L.shape[0]
        if L.shape != (m, m) or t.shape != (m,):
            raise ValueError("L must be m x m and t an m-vector")
        det = float(np.linalg.det(L))
        if not abs(det) >= DET_FLOOR:
            raise SingularElementError("|det L| = %g is below %g" % (abs(det), DET_FLOOR))
        object.__setattr__(self, "L", L)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "det", det)
        object.__setattr__(self, "Linv", _frozen(np.linalg.inv(L)))
        if self.variant == "ortho_affine":
            Q = _frozen(np.atleast_2d(self.Q))
            if Q.shape[0] != Q.shape[1]:
                raise ValueError("Q must be square")
            if np.max(np.abs(Q.T @ Q - np.eye(Q.shape[0]))) > ORTHO_TOL:
                raise ValueError("Q is not orthogonal within %g" % ORTHO_TOL)
            object.__setattr__(self, "Q", Q)

    @property
    def dim(self):
        return self.k if self.variant == "cyclic" else self.L.shape[0]

    @property
    def abs_det(self):
        return abs(self.det)

    def to_json(self):
        """Dictionary following the element schema ``{variant, L, t, Q?, shift?, k?}``."""
        if self.variant == "cyclic":
            return {"variant": "cyclic", "shift": self.shift, "k": self.k}
        out = {"variant": self.variant, "L": self.L.tolist(), "t": self.t.tolist()}
        if self.Q is not None:
            out["Q"] = self.Q.tolist()
        return out

    def dumps(self):
        return json.dumps(self.to_json(), sort_keys=True)


def affine(L, t):
    return GroupElement("affine", L=L, t=t)


def ortho_affine(Q, L, t):
    return GroupElement("ortho_affine", L=L, t=t, Q=Q)


def cyclic(shift, k):
    return GroupElement("cyclic", shift=shift, k=k)


def identity(variant, dim):
    """Identity element of the given variant and dimension."""
    if variant == "cyclic":
        return cyclic(0, dim)
    eye, zero = np.eye(dim), np.zeros(dim)
    return affine(eye, zero) if variant == "affine" else ortho_affine(eye, eye, zero)


def from_json(obj):
    """Inverse of :meth:`GroupElement.to_json` (accepts a dict or JSON text)."""
    if isinstance(obj, str):
        obj = json.loads(obj)
    v = obj.get("variant")
    if v == "cyclic":
        return cyclic(obj["shift"], obj["k"])
    if v == "affine":
        return affine(obj["L"], obj["t"])
    if v == "ortho_affine":
        return ortho_affine(obj["Q"], obj["L"], obj["t"])
    raise ValueError("unknown variant %r" % (v,))


def _same_kind(g, h):
    if g.variant != h.variant or g.dim != h.dim:
        raise ValueError("cannot combine %s(%d) with %s(%d)" % (g.variant, g.dim, h.variant, h.dim))


def compose(g, h):
    """Group product ``g h`` (apply ``h`` first)."""
    _same_kind(g, h)
    if g.variant == "cyclic":
        return cyclic(g.shift + h.shift, g.k)
    L = g.L @ h.L
    t = g.L @ h.t + g.t
    if g.variant == "affine":
        return affine(L, t)
    return ortho_affine(g.Q @ h.Q, L, t)


def inverse(g):
    """Group inverse."""
    if g.variant == "cyclic":
        return cyclic(-g.shift, g.k)
    Linv = np.array(g.Linv)
    t = -(Linv @ g.t)
    if g.variant == "affine":
        return affine(Linv, t)
    return ortho_affine(g.Q.T, Linv, t)


def act_on_data(g, x):
    """``Lx + t`` for the affine variants, a cyclic coordinate shift otherwise.

    ``x`` may carry leading batch dimensions.
    """
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != g.dim:
        raise ValueError("data dimension %d does not match element dimension %d" % (x.shape[-1], g.dim))
    if g.variant == "cyclic":
        return np.roll(x, g.shift, axis=-1)
    return _linalg.matvec(g.L, x) + g.t


def act_on_output(g, y):
    """``Qy`` for ``ortho_affine`` elements; identity for ``affine``; shift for ``cyclic``."""
    y = np.asarray(y, dtype=float)
    if g.variant == "affine":
        return y
    if g.variant == "cyclic":
        if y.shape[-1] != g.k:
            raise ValueError("output dimension %d does not match cyclic order %d" % (y.shape[-1], g.k))
        return np.roll(y, g.shift, axis=-1)
    if y.shape[-1] != g.Q.shape[0]:
        raise ValueError("output dimension %d does not match Q of size %d" % (y.shape[-1], g.Q.shape[0]))
    return _linalg.matvec(g.Q, y)


def _require_affine(g, role):
    if g.variant == "cyclic":
        raise ValueError("cyclic elements have no %s parameter action" % role.value)


def act_on_param(g, xi, role):
    """Dual action of ``g`` on a parameter point for the given layer role.

    Parameters
    ----------
    g : GroupElement
    xi : Depth2Param, LayerParam or QuadParam
        Matching the role (``LayerParam`` for first/middle/last).
    role : LayerRole or str

    Returns
    -------
    Same container type as ``xi``.

    Notes
    -----
    depth2: ``(a, b) -> (L^-T a, b + t . L^-T a)``.
    first: ``(A, b, C) -> (A L^-1, b + A L^-1 t, C)``.
    middle: unchanged.
    last: ``(A, b, C) -> (A, b, Q C)`` (``Q = I`` for the affine variant).
    quadratic: ``(A, b, c) -> (L^-T A L^-1, L^-T b - 2 L^-T A L^-1 t,
    c + t^T L^-T A L^-1 t - t^T L^-T b)``, re-symmetrized.
    """
    role = LayerRole(role)
    if role is LayerRole.DEPTH2:
        _require_affine(g, role)
        xi = Depth2Param(*xi)
        a = _linalg.matvec(g.Linv.T, xi.a)
        return Depth2Param(a, np.asarray(xi.b, dtype=float) + _linalg.dot(g.t, a))
    if role is LayerRole.QUADRATIC:
        _require_affine(g, role)
        xi = QuadParam(*xi)
        A = np.asarray(xi.A, dtype=float)
        if not np.all(np.abs(A - np.swapaxes(A, -1, -2)) <= 1e-12 * (1.0 + np.abs(A))):
            raise ValueError("quadratic-role action needs a symmetric A")
        Ap = _linalg.symmetrize(_linalg.matmul(_linalg.matmul(g.Linv.T, A), g.Linv))
        Lb = _linalg.matvec(g.Linv.T, xi.b)
        At = _linalg.matvec(Ap, g.t)
        b = Lb - 2.0 * At
        c = np.asarray(xi.c, dtype=float) + _linalg.dot(g.t, At) - _linalg.dot(g.t, Lb)
        return QuadParam(Ap, b, c)
    xi = LayerParam(*xi)
    if role is LayerRole.MIDDLE:
        return xi
    _require_affine(g, role)
    if role is LayerRole.FIRST:
        A = _linalg.matmul(xi.A, g.Linv)
        return LayerParam(A, np.asarray(xi.b, dtype=float) + _linalg.matvec(A, g.t), xi.C)
    if g.variant == "affine":
        return xi
    return LayerParam(xi.A, xi.b, _linalg.matmul(g.Q, xi.C))


def jacobian_exponent(role, xi):
    """Exponent ``J`` with ``d(g.xi) = |det L|^-J d(xi)`` for Lebesgue measure on the role's coordinates.

    depth2: 1; first: number of rows of ``A``; middle/last: 0;
    quadratic: ``m + 2`` (symmetric ``A`` in upper-triangle coordinates plus ``b``).
    """
    role = LayerRole(role)
    if role is LayerRole.DEPTH2:
        return 1
    if role is LayerRole.FIRST:
        return int(np.shape(xi[0])[-2])
    if role is LayerRole.QUADRATIC:
        return int(np.shape(xi[1])[-1]) + 2
    return 0


def pi_action(g, f, x):
    """Regular representation on functions: ``|det L|^{-1/2} Q f(L^{-1}(x - t))``.

    For a cyclic element this is ``T_g f(T_g^{-1} x)``.  The output action
    (``Q`` or the shift) is applied only when ``f`` is vector-valued, i.e.
    when ``f`` returns an array with the same number of axes as ``x``.
    """
    x = np.asarray(x, dtype=float)
    ginv = inverse(g)
    y = np.asarray(f(act_on_data(ginv, x)), dtype=float)
    vector = y.ndim == x.ndim
    if g.variant == "cyclic":
        return act_on_output(g, y) if vector else y
    y = y * g.abs_det ** -0.5
    if vector and g.variant == "ortho_affine":
        y = act_on_output(g, y)
    return y


def pihat_action(g, gamma, xi, role, modulus_exponent=0.0):
    """Dual representation on parameter functions: ``gamma(g^{-1} . xi)``.

    ``modulus_exponent`` multiplies the value by ``|det L|^{modulus_exponent}``;
    the default 0 is the bare pull-back.
    """
    value = gamma(act_on_param(inverse(g), xi, role))
    if modulus_exponent and g.variant != "cyclic":
        value = np.asarray(value) * g.abs_det ** modulus_exponent
    return value
