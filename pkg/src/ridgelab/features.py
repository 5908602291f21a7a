"""Feature map families and their group bindings.

Every family evaluates ``phi(x, xi)`` with numpy broadcasting between the
leading dimensions of ``x`` (shape ``(..., m)``) and of the parameter
container.  Grids store parameters as flat vectors; :meth:`FeatureMapSpec.unpack`
and :meth:`FeatureMapSpec.pack` convert between the two.

Flat layouts
------------
fc2: ``[a (m), b]``.
fc_layer / fc_stack, per layer: ``[A (p*d, row-major), b (p), C (p*d_out, column by column)]``.
quadratic: ``[A upper triangle (m(m+1)/2, row-major), b (m), c]``.
gconv_lift: the layout of its base stack.
"""

import json
from dataclasses import dataclass, field, replace
from typing import Optional, Tuple

import numpy as np

from . import _linalg, groups
from .groups import LayerRole
from .numerics.activations import ActivationProfile, get_activation
from .params import Depth2Param, LayerParam, QuadParam, check_symmetric, check_unit_columns

FAMILIES = ("fc2", "fc_layer", "fc_stack", "quadratic", "gconv_lift", "lifted_phi0")


# ----------------------------------------------------------------------------
# pointwise operations


def fc2_feature(x, xi, sigma):
    """``sigma(a . x - b)`` (broadcast over leading dimensions)."""
    xi = Depth2Param(*xi)
    return sigma(_linalg.dot(xi.a, x) - np.asarray(xi.b, dtype=float))


def fc_layer_feature(x, xi, sigma):
    """``C sigma(A x - b)``, with ``sigma`` applied componentwise."""
    xi = LayerParam(*xi)
    A = np.asarray(xi.A, dtype=float)
    x = np.asarray(x, dtype=float)
    if A.shape[-1] != x.shape[-1]:
        raise ValueError("layer expects inputs of dimension %d, got %d" % (A.shape[-1], x.shape[-1]))
    if np.shape(xi.C)[-1] != A.shape[-2]:
        raise ValueError("C has %d columns but A has %d rows" % (np.shape(xi.C)[-1], A.shape[-2]))
    h = sigma(_linalg.matvec(A, x) - np.asarray(xi.b, dtype=float))
    return _linalg.matvec(xi.C, h)


def stack_feature(x, xis, sigmas):
    """Composition ``phi_n(., xi_n) o ... o phi_1(x, xi_1)``."""
    if len(xis) != len(sigmas) or not xis:
        raise ValueError("need one activation per layer and at least one layer")
    for xi, s in zip(xis, sigmas):
        x = fc_layer_feature(x, xi, s)
    return x


def quadratic_feature(x, xi, sigma):
    """``sigma(x^T A x + x^T b + c)``."""
    xi = QuadParam(*xi)
    check_symmetric(xi.A)
    x = np.asarray(x, dtype=float)
    quad = _linalg.dot(x, _linalg.matvec(xi.A, x))
    return sigma(quad + _linalg.dot(x, xi.b) + np.asarray(xi.c, dtype=float))


def gconv_feature(x, xi, g, base_spec):
    """``T_g[phi(T_g^{-1} x, xi)]`` for a cyclic element ``g``."""
    if g.variant != "cyclic":
        raise ValueError("G-convolutional lift needs a cyclic element")
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != g.k or base_spec.output_dim != g.k:
        raise ValueError("cyclic order %d must match data and output dimensions" % g.k)
    return np.roll(base_spec.evaluate(np.roll(x, -g.shift, axis=-1), xi), g.shift, axis=-1)


PHI0_CATALOG = {
    "tanh": lambda x: np.tanh(np.asarray(x, dtype=float) - 0.25),
    "radial": lambda x: np.asarray(x, dtype=float) * np.exp(-0.5 * _linalg.dot(x, x))[..., None],
    "const": lambda x: np.full(np.shape(x), 0.5),
}


def lifted_feature_from_phi0(x, h, phi0):
    """``h . phi0(h^{-1} . x)`` with parameter space equal to the group."""
    if isinstance(phi0, str):
        phi0 = PHI0_CATALOG[phi0]
    y = phi0(groups.act_on_data(groups.inverse(h), x))
    return groups.act_on_output(h, y)


# ----------------------------------------------------------------------------
# declarative specs


@dataclass(frozen=True)
class LayerDims:
    """One fully-connected layer: ``hidden`` units and ``out`` output dimension."""

    hidden: int
    out: int


@dataclass(frozen=True, eq=False)
class FeatureMapSpec:
    """Declarative description of a feature map family.

    Attributes
    ----------
    family : str
        One of ``fc2``, ``fc_layer``, ``fc_stack``, ``quadratic``,
        ``gconv_lift``, ``lifted_phi0``.
    input_dim : int
        Data dimension ``m`` (layer input dimension for ``fc_layer``).
    activations : tuple of ActivationProfile
        One per layer (one for the single-layer families).
    layers : tuple of LayerDims
        Layer shapes for ``fc_layer`` and ``fc_stack``.
    variant : str
        Group variant bound to the family.
    role : LayerRole or None
        For ``fc_layer``, the role of the layer in its stack.
    base : FeatureMapSpec or None
        Base stack of a ``gconv_lift``.
    shift : int
        Cyclic shift at which a ``gconv_lift`` is evaluated.
    phi0 : str or None
        Name of the base map for ``lifted_phi0``.
    """

    family: str
    input_dim: int
    activations: Tuple[ActivationProfile, ...] = ()
    layers: Tuple[LayerDims, ...] = ()
    variant: str = "affine"
    role: Optional[LayerRole] = None
    base: Optional["FeatureMapSpec"] = None
    shift: int = 0
    phi0: Optional[str] = None
    _layout: tuple = field(default=None, repr=False)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError("unknown family %r" % (self.family,))
        if self.input_dim < 1:
            raise ValueError("input dimension must be >= 1")
        if self.family in ("fc_layer", "fc_stack"):
            if not self.layers or len(self.activations) != len(self.layers):
                raise ValueError("need one activation per layer")
            if self.family == "fc_layer" and len(self.layers) != 1:
                raise ValueError("fc_layer has exactly one layer")
        if self.family == "gconv_lift":
            if self.base is None or self.base.family != "fc_stack":
                raise ValueError("gconv_lift needs an fc_stack base")
            k = self.base.input_dim
            if self.base.output_dim != k:
                raise ValueError("gconv_lift base must map R^k to R^k")
        if self.family == "lifted_phi0" and self.phi0 not in PHI0_CATALOG:
            raise ValueError("unknown phi0 %r; catalog has %s" % (self.phi0, sorted(PHI0_CATALOG)))
        object.__setattr__(self, "_layout", tuple(self._compute_layout()))

    # -- shapes ---------------------------------------------------------------

    @property
    def depth(self):
        if self.family == "gconv_lift":
            return self.base.depth
        return len(self.layers) if self.layers else 1

    @property
    def layer_inputs(self):
        dims = [self.input_dim]
        for ld in self.layers[:-1]:
            dims.append(ld.out)
        return dims

    @property
    def output_dim(self):
        if self.family in ("fc_layer", "fc_stack"):
            return self.layers[-1].out
        if self.family == "gconv_lift":
            return self.base.output_dim
        if self.family == "lifted_phi0":
            return self.input_dim
        return 1

    @property
    def k(self):
        return self.base.input_dim if self.family == "gconv_lift" else None

    def _compute_layout(self):
        m = self.input_dim
        if self.family == "fc2":
            return [("a", (m,)), ("b", ())]
        if self.family == "quadratic":
            return [("A", (m * (m + 1) // 2,)), ("b", (m,)), ("c", ())]
        if self.family == "gconv_lift":
            return list(self.base._layout)
        if self.family == "lifted_phi0":
            return []
        out = []
        for i, (d, ld) in enumerate(zip(self.layer_inputs, self.layers), start=1):
            out += [("A%d" % i, (ld.hidden, d)), ("b%d" % i, (ld.hidden,)), ("C%d" % i, (ld.hidden, ld.out))]
        return out

    @property
    def param_layout(self):
        """List of ``(name, shape)`` blocks of the flat parameter vector."""
        return list(self._layout)

    @property
    def param_dim(self):
        return int(sum(int(np.prod(s)) for _, s in self._layout))

    # -- packing --------------------------------------------------------------

    def unpack(self, flat):
        """Parameter container(s) from flat vectors of shape ``(..., param_dim)``."""
        if self.family == "lifted_phi0":
            raise ValueError("lifted_phi0 parameters are group elements, not flat vectors")
        flat = np.asarray(flat, dtype=float)
        if flat.shape[-1] != self.param_dim:
            raise ValueError("expected %d parameter coordinates, got %d" % (self.param_dim, flat.shape[-1]))
        lead = flat.shape[:-1]
        blocks, pos = [], 0
        for _, shape in self._layout:
            n = int(np.prod(shape))
            blocks.append(flat[..., pos:pos + n].reshape(lead + tuple(shape)))
            pos += n
        m = self.input_dim
        if self.family == "fc2":
            return Depth2Param(blocks[0], blocks[1])
        if self.family == "quadratic":
            iu = np.triu_indices(m)
            A = np.zeros(lead + (m, m))
            A[..., iu[0], iu[1]] = blocks[0]
            A[..., iu[1], iu[0]] = blocks[0]
            return QuadParam(A, blocks[1], blocks[2])
        layers = tuple(
            LayerParam(blocks[3 * i], blocks[3 * i + 1], np.swapaxes(blocks[3 * i + 2], -1, -2))
            for i in range(len(blocks) // 3))
        return layers[0] if self.family == "fc_layer" else layers

    def pack(self, xi):
        """Inverse of :meth:`unpack`."""
        if self.family == "fc2":
            xi = Depth2Param(*xi)
            return np.concatenate([np.asarray(xi.a, float), np.asarray(xi.b, float)[..., None]], axis=-1)
        if self.family == "quadratic":
            xi = QuadParam(*xi)
            iu = np.triu_indices(self.input_dim)
            A = np.asarray(xi.A, float)
            return np.concatenate([A[..., iu[0], iu[1]], np.asarray(xi.b, float),
                                   np.asarray(xi.c, float)[..., None]], axis=-1)
        if self.family == "lifted_phi0":
            raise ValueError("lifted_phi0 parameters are group elements")
        layers = (xi,) if self.family == "fc_layer" else tuple(xi)
        parts = []
        for lp in layers:
            A, b, C = (np.asarray(v, float) for v in lp)
            lead = A.shape[:-2]
            parts += [A.reshape(lead + (-1,)), b, np.swapaxes(C, -1, -2).reshape(lead + (-1,))]
        return np.concatenate(parts, axis=-1)

    def validate_param(self, xi):
        """Check symmetric ``A`` / unit-norm ``C`` constraints."""
        if self.family == "quadratic":
            check_symmetric(QuadParam(*xi).A)
        elif self.family in ("fc_layer", "fc_stack", "gconv_lift"):
            for lp in ((xi,) if self.family == "fc_layer" else xi):
                check_unit_columns(LayerParam(*lp).C)

    # -- evaluation -----------------------------------------------------------

    def evaluate(self, x, xi):
        """``phi(x, xi)`` with trailing output axis of length :attr:`output_dim`."""
        f = self.family
        if f == "fc2":
            return fc2_feature(x, xi, self.activations[0])[..., None]
        if f == "quadratic":
            return quadratic_feature(x, xi, self.activations[0])[..., None]
        if f == "fc_layer":
            return fc_layer_feature(x, xi, self.activations[0])
        if f == "fc_stack":
            return stack_feature(x, xi, self.activations)
        if f == "gconv_lift":
            return gconv_feature(x, xi, groups.cyclic(self.shift, self.k), self.base)
        return lifted_feature_from_phi0(x, xi, self.phi0)

    def evaluate_flat(self, x, flat):
        return self.evaluate(x, self.unpack(flat))

    # -- group binding --------------------------------------------------------

    @property
    def roles(self):
        """Layer role of each parameter block."""
        f = self.family
        if f == "fc2":
            return [LayerRole.DEPTH2]
        if f == "quadratic":
            return [LayerRole.QUADRATIC]
        if f == "fc_layer":
            return [LayerRole(self.role)]
        if f == "fc_stack":
            n = len(self.layers)
            if n == 1:
                return [(LayerRole.FIRST, LayerRole.LAST)]
            return [LayerRole.FIRST] + [LayerRole.MIDDLE] * (n - 2) + [LayerRole.LAST]
        return []

    def _acts_on_data(self):
        return self.family != "fc_layer" or LayerRole(self.role) is LayerRole.FIRST

    def _acts_on_output(self):
        if self.family == "fc_stack":
            return True
        return self.family == "fc_layer" and LayerRole(self.role) is LayerRole.LAST

    def act_data(self, g, x):
        if self.family == "lifted_phi0" or self._acts_on_data():
            return groups.act_on_data(g, x)
        return np.asarray(x, dtype=float)

    def act_output(self, g, y):
        if self.family == "lifted_phi0" or self._acts_on_output():
            return groups.act_on_output(g, y)
        return np.asarray(y, dtype=float)

    def act_param(self, g, xi):
        """Joint dual action on a parameter container."""
        f = self.family
        if f == "lifted_phi0":
            return groups.compose(g, xi)
        if f in ("fc2", "quadratic", "fc_layer"):
            return groups.act_on_param(g, xi, self.roles[0])
        if f == "fc_stack":
            out = []
            for lp, role in zip(xi, self.roles):
                for r in (role if isinstance(role, tuple) else (role,)):
                    lp = groups.act_on_param(g, lp, r)
                out.append(lp)
            return tuple(out)
        raise ValueError("family %r has no parameter action" % f)

    def act_param_flat(self, g, flat):
        return self.pack(self.act_param(g, self.unpack(flat)))

    def jacobian_exponent(self):
        """``J`` such that the joint parameter action scales Lebesgue measure by ``|det L|^-J``."""
        f = self.family
        if f == "fc2":
            return 1
        if f == "quadratic":
            return self.input_dim + 2
        if f == "fc_layer":
            return self.layers[0].hidden if LayerRole(self.role) is LayerRole.FIRST else 0
        if f == "fc_stack":
            return self.layers[0].hidden
        return 0

    # -- variants -------------------------------------------------------------

    def with_activations(self, activations):
        """Same family and shapes with different activations (e.g. the analysis map)."""
        activations = tuple(activations)
        if self.family == "gconv_lift":
            return replace(self, base=self.base.with_activations(activations))
        if len(activations) != len(self.activations):
            raise ValueError("need %d activations" % len(self.activations))
        return replace(self, activations=activations, _layout=None)

    def at_shift(self, shift):
        """A ``gconv_lift`` evaluated at a different group element."""
        if self.family != "gconv_lift":
            raise ValueError("only gconv_lift specs carry a shift")
        return replace(self, shift=int(shift) % self.k, _layout=None)

    # -- serialization --------------------------------------------------------

    def to_json(self):
        out = {"family": self.family, "input_dim": self.input_dim, "variant": self.variant,
               "param_layout": [[n, list(s)] for n, s in self._layout]}
        if self.family == "gconv_lift":
            out.update(base=self.base.to_json(), shift=self.shift)
            return out
        if self.family == "lifted_phi0":
            out["phi0"] = self.phi0
            return out
        out["activations"] = [a.name for a in self.activations]
        if self.layers:
            out["layers"] = [{"hidden": ld.hidden, "out": ld.out} for ld in self.layers]
        if self.role is not None:
            out["role"] = LayerRole(self.role).value
        return out

    def dumps(self):
        return json.dumps(self.to_json(), sort_keys=True)


def spec_from_json(obj, resolver=None):
    """Rebuild a spec from :meth:`FeatureMapSpec.to_json` output.

    ``resolver(name, input_dim)`` maps activation names to profiles; the
    default only knows the built-in catalog.
    """
    if isinstance(obj, str):
        obj = json.loads(obj)
    resolve = resolver or (lambda name, m: get_activation(name))
    fam, m = obj["family"], int(obj["input_dim"])
    if fam == "gconv_lift":
        return gconv_spec(spec_from_json(obj["base"], resolver), obj.get("shift", 0))
    if fam == "lifted_phi0":
        return lifted_phi0_spec(m, obj["phi0"])
    acts = [resolve(n, m) for n in obj["activations"]]
    if fam == "fc2":
        return fc2_spec(m, acts[0])
    if fam == "quadratic":
        return quadratic_spec(m, acts[0])
    layers = [(ld["hidden"], ld["out"]) for ld in obj["layers"]]
    if fam == "fc_layer":
        (p, d), = layers
        return fc_layer_spec(m, p, d, acts[0], obj["role"])
    return fc_stack_spec(m, layers, acts)


def _profile(a):
    return get_activation(a) if isinstance(a, str) else a


def fc2_spec(m, sigma):
    return FeatureMapSpec("fc2", int(m), (_profile(sigma),), variant="affine")


def quadratic_spec(m, sigma):
    return FeatureMapSpec("quadratic", int(m), (_profile(sigma),), variant="affine")


def fc_layer_spec(d_in, hidden, d_out, sigma, role):
    return FeatureMapSpec("fc_layer", int(d_in), (_profile(sigma),), (LayerDims(int(hidden), int(d_out)),),
                          variant="ortho_affine", role=LayerRole(role))


def fc_stack_spec(m, layers, activations):
    """Depth-n stack; ``layers`` is a list of ``(hidden, out)`` pairs."""
    dims = tuple(LayerDims(int(p), int(d)) for p, d in layers)
    acts = tuple(_profile(a) for a in activations)
    if len(acts) == 1 and len(dims) > 1:
        acts = acts * len(dims)
    return FeatureMapSpec("fc_stack", int(m), acts, dims, variant="ortho_affine")


def gconv_spec(base, shift=0):
    return FeatureMapSpec("gconv_lift", base.input_dim, base=base, variant="cyclic",
                          shift=int(shift) % base.input_dim)


def lifted_phi0_spec(m, phi0):
    return FeatureMapSpec("lifted_phi0", int(m), variant="ortho_affine", phi0=phi0)
