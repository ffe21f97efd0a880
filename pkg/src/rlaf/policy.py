"""Factored guidance policy: LogNormal weights and Bernoulli polarities per variable."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .solvers.common import Parameterization

LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


def log_sigmoid(x):
    """log(sigmoid(x)), stable for large |x|."""
    return -np.logaddexp(0.0, -x)


def sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * np.asarray(x, dtype=np.float64)))


@dataclass(frozen=True)
class PolicyDist:
    mu: np.ndarray
    rho: np.ndarray
    sigma: float = 0.1

    def __post_init__(self):
        mu = np.asarray(self.mu, dtype=np.float64).reshape(-1)
        rho = np.asarray(self.rho, dtype=np.float64).reshape(-1)
        if mu.shape != rho.shape:
            raise ValueError("mu and rho differ in length")
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        if not (np.all(np.isfinite(mu)) and np.all(np.isfinite(rho))):
            raise ValueError("mu and rho must be finite")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "rho", rho)

    @classmethod
    def from_output(cls, y: np.ndarray, sigma: float) -> "PolicyDist":
        y = np.asarray(y)
        return cls(y[:, 0], y[:, 1], sigma)

    def __len__(self) -> int:
        return self.mu.size


def _generator(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.PCG64(seed))


def sample_arrays(dist: PolicyDist, count: int, seed) -> tuple[np.ndarray, np.ndarray]:
    """``count`` i.i.d. draws as (weights (count, n), polarities (count, n))."""
    rng = _generator(seed)
    n = len(dist)
    z = rng.standard_normal((count, n))
    u = rng.random((count, n))
    weights = np.exp(dist.mu + dist.sigma * z)
    polarities = (u < sigmoid(dist.rho)).astype(np.int8)
    return weights, polarities


def sample(dist: PolicyDist, seed) -> Parameterization:
    w, p = sample_arrays(dist, 1, seed)
    return Parameterization(w[0], p[0])


def mode(dist: PolicyDist) -> Parameterization:
    """Most probable (w, p): LogNormal mode exp(mu - sigma^2); p = 1 iff rho >= 0."""
    return Parameterization(np.exp(dist.mu - dist.sigma ** 2), (dist.rho >= 0).astype(np.int8))


def expected_weight(dist: PolicyDist) -> np.ndarray:
    return np.exp(dist.mu + 0.5 * dist.sigma ** 2)


def log_prob_terms(dist: PolicyDist, weights: np.ndarray, polarities: np.ndarray) -> np.ndarray:
    """Per-variable log-density terms; broadcasts over leading sample axes."""
    weights = np.asarray(weights, dtype=np.float64)
    if np.any(weights <= 0):
        raise ValueError("weights must be positive")
    p = np.asarray(polarities, dtype=np.float64)
    s = dist.sigma
    lw = np.log(weights)
    lp_w = -lw - math.log(s) - LOG_SQRT_2PI - (lw - dist.mu) ** 2 / (2.0 * s * s)
    lp_p = p * log_sigmoid(dist.rho) + (1.0 - p) * log_sigmoid(-dist.rho)
    return lp_w + lp_p


def log_prob(dist: PolicyDist, params: Parameterization | tuple) -> float | np.ndarray:
    """Joint log-density of a parameterization (or a batch given as arrays)."""
    if isinstance(params, Parameterization):
        w, p = params.weights, params.polarities
    else:
        w, p = params
    return log_prob_terms(dist, w, p).sum(axis=-1)


def log_prob_grad(dist: PolicyDist, weights: np.ndarray, polarities: np.ndarray):
    """d log_prob / d(mu, rho), per variable; same leading axes as the inputs."""
    s2 = dist.sigma ** 2
    d_mu = (np.log(weights) - dist.mu) / s2
    d_rho = np.asarray(polarities, dtype=np.float64) - sigmoid(dist.rho)
    return d_mu, d_rho


def kl_terms(new: PolicyDist, old: PolicyDist) -> np.ndarray:
    if len(new) != len(old):
        raise ValueError("distributions differ in size")
    if new.sigma != old.sigma:
        raise ValueError("closed-form KL assumes a shared sigma")
    kl_w = (new.mu - old.mu) ** 2 / (2.0 * new.sigma ** 2)
    a = sigmoid(new.rho)
    kl_p = a * (log_sigmoid(new.rho) - log_sigmoid(old.rho)) + \
        (1.0 - a) * (log_sigmoid(-new.rho) - log_sigmoid(-old.rho))
    return kl_w + kl_p


def kl(new: PolicyDist, old: PolicyDist, direction: str = "new_old") -> float:
    """KL(new || old) in closed form; ``direction="old_new"`` gives KL(old || new)."""
    if direction == "old_new":
        new, old = old, new
    elif direction != "new_old":
        raise ValueError(f"unknown KL direction {direction!r}")
    return float(kl_terms(new, old).sum())


def kl_grad(new: PolicyDist, old: PolicyDist, direction: str = "new_old"):
    """d KL / d(mu_new, rho_new)."""
    s2 = new.sigma ** 2
    d_mu = (new.mu - old.mu) / s2
    a = sigmoid(new.rho)
    if direction == "new_old":
        # d/drho [a*(rho_n - rho_o) - log(1+e^rho_n) + log(1+e^rho_o)] = a(1-a)(rho_n - rho_o)
        d_rho = a * (1.0 - a) * (new.rho - old.rho)
    elif direction == "old_new":
        d_rho = a - sigmoid(old.rho)
    else:
        raise ValueError(f"unknown KL direction {direction!r}")
    return d_mu, d_rho
