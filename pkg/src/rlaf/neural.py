"""Message-passing policy network over literal-clause graphs, in float64 numpy.

Architecture (all MLPs: Linear -> SiLU -> Linear, hidden width 2d)::

    h0(v)      = Enc(log(deg(v) + 1))                       Enc : 1  -> d
    h'(c)      = Ucls_t([h(c), mean_{l in c} h(l)])         Ucls: 2d -> d
    h'(l)      = Ulit_t([h(l), h(~l), mean_{c ∋ l} h'(c)])  Ulit: 3d -> d
    [mu, rho]  = Dec([hL(x), hL(~x)])                       Dec : 2d -> 2

The last layer of ``Dec`` starts at exactly zero, so a fresh network
outputs mu = rho = 0 everywhere.  Gradients are computed by an explicit
reverse pass; there is no autodiff dependency.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .fgraph import FormulaGraph

CHECKPOINT_FORMAT = 1


def sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def silu(x):
    return x * sigmoid(x)


def silu_grad(x):
    s = sigmoid(x)
    return s * (1.0 + x * (1.0 - s))


def param_shapes(d: int, L: int) -> list[tuple[str, tuple[int, ...]]]:
    """Flat-vector layout: this order, each array in C order."""

    def mlp(prefix, din, dout):
        return [
            (f"{prefix}.w1", (din, 2 * d)),
            (f"{prefix}.b1", (2 * d,)),
            (f"{prefix}.w2", (2 * d, dout)),
            (f"{prefix}.b2", (dout,)),
        ]

    shapes = mlp("enc", 1, d)
    for t in range(L):
        shapes += mlp(f"layer{t}.cls", 2 * d, d)
        shapes += mlp(f"layer{t}.lit", 3 * d, d)
    shapes += mlp("dec", 2 * d, 2)
    return shapes


def num_params(d: int, L: int) -> int:
    return sum(int(np.prod(s)) for _, s in param_shapes(d, L))


class NetParams:
    """Named float64 parameter arrays that are views into one flat vector."""

    def __init__(self, d: int, L: int, flat: Optional[np.ndarray] = None):
        if d < 1 or L < 0:
            raise ValueError(f"invalid architecture d={d}, L={L}")
        self.d, self.L = d, L
        self.shapes = param_shapes(d, L)
        size = num_params(d, L)
        if flat is None:
            flat = np.zeros(size)
        flat = np.asarray(flat, dtype=np.float64)
        if flat.shape != (size,):
            raise ValueError(f"flat vector has shape {flat.shape}, expected ({size},)")
        self.flat = flat
        self.arrays: dict[str, np.ndarray] = {}
        off = 0
        for name, shape in self.shapes:
            k = int(np.prod(shape))
            self.arrays[name] = self.flat[off:off + k].reshape(shape)
            off += k
        self.version = 0

    @classmethod
    def init(cls, d: int, L: int, seed: int = 0) -> "NetParams":
        """Seeded uniform fan-in init; Dec's output layer starts at zero.

        Bounds are sqrt(6/fan_in) for weights feeding a SiLU, sqrt(3/fan_in)
        for the linear output weights and 1/sqrt(fan_in) for biases.  With
        the plain 1/sqrt(fan_in) bound the per-vertex spread of the
        embeddings shrinks ~100x over four layers and every variable ends up
        with nearly the same output.
        """
        p = cls(d, L)
        rng = np.random.default_rng(seed)
        for name, shape in p.shapes:
            if name.startswith("dec.") and name.endswith(("w2", "b2")):
                continue
            layer, kind = name.rsplit(".", 1)
            fan_in = p.arrays[layer + ".w" + kind[-1]].shape[0]
            gain = {"w1": 6.0, "w2": 3.0}.get(kind, 1.0)
            bound = np.sqrt(gain / fan_in)
            p.arrays[name][...] = rng.uniform(-bound, bound, size=shape)
        return p

    def __getitem__(self, name: str) -> np.ndarray:
        return self.arrays[name]

    def copy(self) -> "NetParams":
        return NetParams(self.d, self.L, self.flat.copy())

    def assign(self, flat: np.ndarray) -> None:
        self.flat[...] = flat
        self.version += 1

    def zeros_like(self) -> "NetParams":
        return NetParams(self.d, self.L)


def _mlp_forward(p: NetParams, prefix: str, x: np.ndarray):
    z = x @ p[prefix + ".w1"] + p[prefix + ".b1"]
    a = silu(z)
    out = a @ p[prefix + ".w2"] + p[prefix + ".b2"]
    return out, (x, z, a)


def _mlp_backward(p: NetParams, g: NetParams, prefix: str, cache, dout: np.ndarray, need_dx: bool = True):
    x, z, a = cache
    g[prefix + ".w2"][...] += a.T @ dout
    g[prefix + ".b2"][...] += dout.sum(axis=0)
    dz = (dout @ p[prefix + ".w2"].T) * silu_grad(z)
    g[prefix + ".w1"][...] += x.T @ dz
    g[prefix + ".b1"][...] += dz.sum(axis=0)
    return dz @ p[prefix + ".w1"].T if need_dx else None


@dataclass
class ForwardCache:
    graph: FormulaGraph
    params_id: int
    params_version: int
    enc: tuple = ()
    layers: list = field(default_factory=list)
    dec: tuple = ()


def encode(params: NetParams, g: FormulaGraph, keep_cache: bool = True):
    """Literal embeddings h^L, shape (2n, d), plus a cache for ``encode_backward``."""
    n2 = g.num_literals
    if n2 == 0:
        raise ValueError("graph has no variables")
    deg = np.log(g.degree.astype(np.float64) + 1.0)[:, None]
    h0, enc_cache = _mlp_forward(params, "enc", deg)
    h_lit, h_cls = h0[:n2], h0[n2:]
    pair = g.pair
    layers = []
    for t in range(params.L):
        agg_c = g.clause_mean @ h_lit
        x_c = np.concatenate([h_cls, agg_c], axis=1)
        h_cls_new, c_cache = _mlp_forward(params, f"layer{t}.cls", x_c)
        agg_l = g.literal_mean @ h_cls_new
        x_l = np.concatenate([h_lit, h_lit[pair], agg_l], axis=1)
        h_lit_new, l_cache = _mlp_forward(params, f"layer{t}.lit", x_l)
        if keep_cache:
            layers.append((c_cache, l_cache))
        h_lit, h_cls = h_lit_new, h_cls_new
    if not keep_cache:
        return h_lit, None
    return h_lit, ForwardCache(g, id(params), params.version, enc_cache, layers)


def encode_backward(params: NetParams, g: FormulaGraph, cache: ForwardCache, dh_lit: np.ndarray,
                    grad: NetParams) -> None:
    """Accumulate into ``grad`` the gradient of <dh_lit, encode(params, g)>."""
    _check_cache(params, g, cache)
    d = params.d
    pair = g.pair
    dh_cls = np.zeros((g.num_clauses, d))
    for t in reversed(range(params.L)):
        c_cache, l_cache = cache.layers[t]
        dx_l = _mlp_backward(params, grad, f"layer{t}.lit", l_cache, dh_lit)
        dh_lit_prev = dx_l[:, :d] + dx_l[pair, d:2 * d]
        dh_cls_new = dh_cls + g.literal_mean_T @ dx_l[:, 2 * d:]
        dx_c = _mlp_backward(params, grad, f"layer{t}.cls", c_cache, dh_cls_new)
        dh_cls = dx_c[:, :d]
        dh_lit = dh_lit_prev + g.clause_mean_T @ dx_c[:, d:]
    # new clause embeddings only feed the next layer, so dh_cls here is the grad of h0 for clauses
    dh0 = np.concatenate([dh_lit, dh_cls], axis=0)
    _mlp_backward(params, grad, "enc", cache.enc, dh0, need_dx=False)


def _check_cache(params, g, cache):
    if cache is None or cache.graph is not g or cache.params_id != id(params) \
            or cache.params_version != params.version:
        raise ValueError("stale forward cache: graph or parameters changed since forward()")


def forward(params: NetParams, g: FormulaGraph, keep_cache: bool = True):
    """Return (y, cache) with y of shape (num_vars, 2): columns mu, rho."""
    h_lit, cache = encode(params, g, keep_cache)
    y, dec_cache = _mlp_forward(params, "dec", h_lit.reshape(g.num_vars, 2 * params.d))
    if cache is not None:
        cache.dec = dec_cache
    return y, cache


def backward(params: NetParams, g: FormulaGraph, cache: ForwardCache, dy: np.ndarray) -> NetParams:
    """Gradient of <dy, forward(params, g)> with respect to every parameter."""
    _check_cache(params, g, cache)
    dy = np.asarray(dy, dtype=np.float64)
    if dy.shape != (g.num_vars, 2):
        raise ValueError(f"output gradient has shape {dy.shape}, expected ({g.num_vars}, 2)")
    grad = params.zeros_like()
    dx_dec = _mlp_backward(params, grad, "dec", cache.dec, dy)
    encode_backward(params, g, cache, dx_dec.reshape(g.num_literals, params.d), grad)
    return grad


# ---------------------------------------------------------------- optimizer

@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray
    t: int = 0

    @classmethod
    def zeros(cls, size: int) -> "AdamState":
        return cls(np.zeros(size), np.zeros(size), 0)


@dataclass
class OptimHyper:
    lr: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    weight_decay: float = 0.0
    kind: str = "adam"          # "adam" | "sgd"


class NonFiniteGradient(FloatingPointError):
    pass


def optimizer_step(params: NetParams, grad: NetParams | np.ndarray, state: AdamState,
                   hyper: OptimHyper, lr: Optional[float] = None) -> None:
    """Descent step in place. Callers maximizing an objective pass its negated gradient.

    Weight decay is decoupled (AdamW-style).  ``lr`` overrides ``hyper.lr``
    for warm-up schedules.
    """
    g = grad.flat if isinstance(grad, NetParams) else np.asarray(grad, dtype=np.float64)
    if g.shape != params.flat.shape:
        raise ValueError("gradient and parameter shapes differ")
    if not np.all(np.isfinite(g)):
        raise NonFiniteGradient("non-finite gradient; step rejected")
    lr = hyper.lr if lr is None else lr
    theta = params.flat.copy()
    if hyper.weight_decay:
        theta *= 1.0 - lr * hyper.weight_decay
    if hyper.kind == "sgd":
        theta -= lr * g
    elif hyper.kind == "adam":
        state.t += 1
        state.m[...] = hyper.beta1 * state.m + (1.0 - hyper.beta1) * g
        state.v[...] = hyper.beta2 * state.v + (1.0 - hyper.beta2) * g * g
        m_hat = state.m / (1.0 - hyper.beta1 ** state.t)
        v_hat = state.v / (1.0 - hyper.beta2 ** state.t)
        theta -= lr * m_hat / (np.sqrt(v_hat) + hyper.eps)
    else:
        raise ValueError(f"unknown optimizer {hyper.kind!r}")
    params.assign(theta)


# --------------------------------------------------------------- checkpoints

def save_checkpoint(path, params: NetParams, state: Optional[AdamState] = None,
                    iteration: int = 0, extra: Optional[dict] = None) -> None:
    """npz container: format, d, L, flat params (``param_shapes`` order), Adam moments, iteration."""
    state = state or AdamState.zeros(params.flat.size)
    payload = dict(
        format=np.int64(CHECKPOINT_FORMAT),
        d=np.int64(params.d),
        L=np.int64(params.L),
        params=params.flat,
        adam_m=state.m,
        adam_v=state.v,
        adam_t=np.int64(state.t),
        iteration=np.int64(iteration),
    )
    for k, v in (extra or {}).items():
        payload["extra_" + k] = np.asarray(v)
    with open(path, "wb") as fh:
        np.savez(fh, **payload)


def load_checkpoint(path):
    """Returns (params, adam_state, iteration, extra)."""
    with np.load(path) as z:
        if int(z["format"]) != CHECKPOINT_FORMAT:
            raise ValueError(f"unsupported checkpoint format {int(z['format'])}")
        params = NetParams(int(z["d"]), int(z["L"]), z["params"].copy())
        state = AdamState(z["adam_m"].copy(), z["adam_v"].copy(), int(z["adam_t"]))
        extra = {k[6:]: z[k] for k in z.files if k.startswith("extra_")}
        return params, state, int(z["iteration"]), extra
