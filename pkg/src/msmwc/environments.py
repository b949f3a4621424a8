"""Synthetic expert-advice streams and online convex losses with known statistics.

Every stream is generated once at construction from a single PCG64 generator
seeded with (seed, kind tag), so a (kind, params, seed) triple always gives
the same sequence bit for bit. Rounds are 1-based.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np

from .numerics import ConfigurationError, ConvexDomain


class CapabilityError(NotImplementedError):
    """Requested statistic has no closed form for this stream kind."""


PEA_KINDS = ("iid_gap", "drifting_leader", "scale_shock", "optimism_quality")
OCO_KINDS = ("linear_drift", "quadratic_drift", "logistic_drift", "sea_sampler")


def _rng(seed: int, kind: str) -> np.random.Generator:
    tag = int.from_bytes(hashlib.sha256(kind.encode()).digest()[:4], "little")
    return np.random.default_rng([int(seed), tag])


def _switch_schedule(T: int, n_switches: int) -> np.ndarray:
    """Phase index (0/1) per round with n_switches evenly spaced flips."""
    n = int(min(max(n_switches, 0), max(T - 1, 0)))
    phase = np.zeros(T, dtype=int)
    if n == 0:
        return phase
    flips = np.floor(np.arange(1, n + 1) * T / (n + 1)).astype(int)
    flips = np.clip(flips, 1, T - 1)
    for f in flips:
        phase[f:] ^= 1
    return phase


def _n_switches(T: int, params: dict) -> int:
    if "switches" in params:
        return int(params["switches"])
    theta = float(params.get("theta", 0.0))
    c = float(params.get("switch_scale", 1.0))
    return int(round(c * T**theta))


# ---------------------------------------------------------------------------
# expert advice
# ---------------------------------------------------------------------------


class PeaStream:
    """Losses and optimism for prediction with expert advice.

    Kinds
    -----
    iid_gap: l_t(i) ~ Bernoulli(1/2 - gap/2) for expert 0 and
        Bernoulli(1/2 + gap/2) for the rest; optimism 0 (or the means with
        optimism="mean").
    drifting_leader: l_t(i) ~ U[0, 1], except the current leader
        ((t-1)//period mod K) which gets U[0, 1] - gap; optimism l_{t-1}.
    scale_shock: l_t(i) ~ U[0, 1) for i < K-1 and l_t(K-1) = 1, so that
        ||l_t - m_t||_inf is exactly 1; optimism 0. From each shock round on,
        losses are multiplied by the shock factor.
    optimism_quality: l_t(i) ~ U[0, 1] with expert 0 shifted by -gap;
        m_t(i) = l_t(i) + noise(i) * N(0, 1), so V(e_i) ~ T noise(i)^2.
    """

    def __init__(self, kind: str, K: int, T: int, seed: int = 0, **params):
        if kind not in PEA_KINDS:
            raise ConfigurationError(f"unknown PEA stream kind {kind!r}")
        if K < 1 or T < 0:
            raise ConfigurationError("need K >= 1 and T >= 0")
        self.kind, self.K, self.T, self.seed = kind, int(K), int(T), int(seed)
        self.params = dict(params)
        rng = _rng(seed, kind)
        K, T = self.K, self.T
        gap = float(params.get("gap", 0.1))
        if kind == "iid_gap":
            mu = np.full(K, 0.5 + gap / 2)
            mu[0] = 0.5 - gap / 2
            L = (rng.random((T, K)) < mu).astype(float)
            M = np.broadcast_to(mu, (T, K)).copy() if params.get("optimism") == "mean" else np.zeros((T, K))
            self.means = mu
        elif kind == "drifting_leader":
            period = int(params.get("period", max(T // 4, 1)))
            L = rng.random((T, K))
            leader = (np.arange(T) // period) % K
            L[np.arange(T), leader] -= gap
            M = np.vstack([np.zeros((1, K)), L[:-1]]) if T else np.zeros((0, K))
        elif kind == "scale_shock":
            L = rng.random((T, K))
            L[:, K - 1] = 1.0
            if K > 1:
                L[:, 0] -= gap
            shocks = params.get("shocks")
            if shocks is None:
                shocks = [(int(params.get("shock_round", max(T // 2, 1))), float(params.get("factor", 1e3)))]
            for tau, fac in shocks:
                if 1 <= tau <= T:
                    L[tau - 1:] *= fac
            self.shocks = [(int(a), float(b)) for a, b in shocks]
            M = np.zeros((T, K))
        else:
            L = rng.random((T, K))
            L[:, 0] -= gap
            noise = np.broadcast_to(np.asarray(params.get("noise", 0.1), dtype=float), (K,))
            self.noise = noise.copy()
            M = L + noise * rng.standard_normal((T, K))
        self.losses = L
        self.optimisms = M

    def next_pea(self, t: int):
        """(m_t, l_t) for round t (1-based)."""
        if not 1 <= t <= self.T:
            raise IndexError(f"round {t} outside 1..{self.T}")
        return self.optimisms[t - 1], self.losses[t - 1]

    def __iter__(self):
        for t in range(1, self.T + 1):
            yield self.next_pea(t)

    def exact_statistics(self) -> dict:
        err2 = (self.losses - self.optimisms) ** 2
        V = err2.sum(axis=0)
        cum = self.losses.sum(axis=0)
        best = int(np.argmin(cum)) if self.T else 0
        return {
            "V_e": V.tolist(),
            "best_expert": best,
            "V_best": float(V[best]) if self.T else 0.0,
            "B_T": float(np.max(np.abs(self.losses - self.optimisms))) if self.T else 0.0,
            "cumulative_losses": cum.tolist(),
        }

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.losses).tobytes())
        h.update(np.ascontiguousarray(self.optimisms).tobytes())
        return h.hexdigest()

    def to_csv(self, path) -> None:
        with open(path, "w", newline="\n") as f:
            cols = [f"m{i}" for i in range(self.K)] + [f"l{i}" for i in range(self.K)]
            f.write(",".join(["t"] + cols) + "\n")
            for t in range(self.T):
                vals = list(self.optimisms[t]) + list(self.losses[t])
                f.write(",".join([str(t + 1)] + [format(v, ".17g") for v in vals]) + "\n")


# ---------------------------------------------------------------------------
# online convex optimisation
# ---------------------------------------------------------------------------


@dataclass
class QueryCounter:
    values: int = 0
    gradients: int = 0


class RoundOracle:
    """Value and gradient access to one round's loss, with shared counters."""

    def __init__(self, stream: "OcoStream", t: int, counter: QueryCounter):
        self.stream, self.t, self.counter = stream, t, counter

    def value(self, x) -> float:
        self.counter.values += 1
        return self.stream.value(self.t, x)

    def gradient(self, x) -> np.ndarray:
        self.counter.gradients += 1
        return self.stream.gradient(self.t, x)

    def value_many(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        self.counter.values += X.shape[0]
        return self.stream.value_batch(self.t, X)

    def gradient_many(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        self.counter.gradients += X.shape[0]
        return self.stream.gradient_batch(self.t, X)


class ZeroOracle:
    """f_0 = 0."""

    t = 0

    def __init__(self, d: int):
        self.d = d

    def value(self, x) -> float:
        return 0.0

    def gradient(self, x) -> np.ndarray:
        return np.zeros(self.d)

    def value_many(self, X) -> np.ndarray:
        return np.zeros(np.atleast_2d(X).shape[0])

    def gradient_many(self, X) -> np.ndarray:
        return np.zeros_like(np.atleast_2d(np.asarray(X, dtype=float)))


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def _log1pexp(z):
    return np.logaddexp(0.0, z)


class OcoStream:
    """Online convex losses on a ball or box.

    Kinds
    -----
    linear_drift: f_t(x) = <g_t, x>, g_t = b + s_t v with s_t = +-1. With
        drift="switch" (default) s_t flips at evenly spaced rounds
        (``switches`` of them, or round(scale T^theta)); with drift="flip"
        it flips independently with probability ``flip_prob`` each round.
        V_T = 4 ||v||^2 * (number of flips).
    quadratic_drift: f_t(x) = ||x - c_t||^2. With drift="switch" c_t
        alternates between two centres at the switch rounds; with
        drift="decay" c_t = c0 + rho u / t, so V_T stays bounded as T grows;
        drift="ramp" c_t = c0 + rho t u (V-term 4 rho^2 ||u||^2 per step).
        V-term 4 ||c_t - c_{t-1}||^2.
    logistic_drift: soft-label logistic loss f_t(x) = log(1 + exp(z)) - q_t z
        with z = <a, x> and target q_t in [0, 1]; q = 1 and q = 0 are the
        usual labels y = +1 and y = -1. With drift="switch" q_t jumps
        between 1 and 0 at switch rounds; with drift="decay"
        q_t = q0 + rho / t. grad f_t - grad f_{t-1} = -(q_t - q_{t-1}) a
        for every x, so the V-term is (q_t - q_{t-1})^2 ||a||^2.
    sea_sampler: f_t(x) = ||x - c_t||^2 + <xi_t, x> with c_t as in
        quadratic_drift (mean drift) and xi_t = sigma * Rademacher(d).
        sigma_t^2 = d sigma^2 exactly.
    """

    def __init__(self, kind: str, d: int, T: int, seed: int = 0, domain: ConvexDomain | None = None, **params):
        if kind not in OCO_KINDS:
            raise ConfigurationError(f"unknown OCO stream kind {kind!r}")
        if d < 1 or T < 0:
            raise ConfigurationError("need d >= 1 and T >= 0")
        self.kind, self.d, self.T, self.seed = kind, int(d), int(T), int(seed)
        self.params = dict(params)
        self.domain = domain or ConvexDomain.ball(np.zeros(d), 1.0)
        if self.domain.dim != d:
            raise ConfigurationError("domain dimension mismatch")
        rng = _rng(seed, kind)
        self.drift = str(params.get("drift", "switch"))
        allowed = {"linear_drift": ("switch", "flip"), "logistic_drift": ("switch", "decay")}.get(kind, ("switch", "decay", "ramp"))
        if self.drift not in allowed:
            raise ConfigurationError(f"drift {self.drift!r} not available for {kind}")
        phase = _switch_schedule(T, _n_switches(T, params))
        self.phase = phase
        rho = float(params.get("rho", 0.5))
        decay = 1.0 / np.arange(1, T + 1)
        D = self.domain.diameter
        if kind == "linear_drift":
            v = np.asarray(params.get("v", rng.standard_normal(d)), dtype=float)
            v = v / max(np.linalg.norm(v), 1e-300) * float(params.get("v_norm", 1.0))
            b = np.asarray(params.get("bias", np.zeros(d)), dtype=float).reshape(d)
            if self.drift == "flip":
                flips = rng.random(T) < float(params.get("flip_prob", 0.5))
                flips[:1] = False
                phase = np.cumsum(flips) % 2
                self.phase = phase
            s = 1.0 - 2.0 * phase
            self.G_seq = b + s[:, None] * v
            self.v, self.b = v, b
            self.truth = {"curvature": "convex", "G": float(np.max(np.linalg.norm(self.G_seq, axis=1))) if T else 0.0,
                          "L": 0.0}
        elif kind in ("quadratic_drift", "sea_sampler"):
            c0 = np.asarray(params.get("c0", self.domain_center + 0.5 * self._inner_radius() * _unit(rng, d)), dtype=float)
            if self.drift in ("decay", "ramp"):
                u = np.asarray(params.get("u", _unit(rng, d)), dtype=float)
                c1 = c0 + rho * u
                steps = decay if self.drift == "decay" else np.arange(1, T + 1, dtype=float)
                self.centres = c0 + steps[:, None] * (rho * u)
            else:
                c1 = np.asarray(params.get("c1", 2 * self.domain_center - c0), dtype=float)
                self.centres = np.where(phase[:, None] == 0, c0, c1)
            self.c0, self.c1 = c0, c1
            cmax = max(np.linalg.norm(c0 - self.domain_center), np.linalg.norm(c1 - self.domain_center))
            if T:
                cmax = max(cmax, float(np.max(np.linalg.norm(self.centres - self.domain_center, axis=1))))
            G = 2.0 * (cmax + D / 2)
            self.truth = {"curvature": "strongly_convex", "mu": 2.0, "L": 2.0}
            if kind == "sea_sampler":
                self.sigma = float(params.get("sigma", 0.5))
                self.xi = self.sigma * (1.0 - 2.0 * (rng.random((T, d)) < 0.5))
                G += self.sigma * math.sqrt(d)
            self.truth["G"] = G
        else:
            a = np.asarray(params.get("a", _unit(rng, d) * float(params.get("a_norm", 1.0))), dtype=float)
            self.a = a
            if self.drift == "decay":
                q0 = float(params.get("q0", 0.6))
                self.q = q0 + min(rho, 1.0 - q0) * decay
            else:
                self.q = 1.0 - phase.astype(float)
            R = float(np.max(np.abs([a @ x for x in self._extreme_points(a)])))
            G = float(np.linalg.norm(a))
            # sigma(1 - sigma) >= exp(-|z|) (sigma - q)^2 for q in [0, 1]
            beta = math.exp(-R)
            alpha = 0.5 * min(1.0 / (4 * G * D), beta)
            self.truth = {"curvature": "exp_concave", "alpha": alpha, "beta": beta, "G": G,
                          "L": float(a @ a) / 4.0}
        self.truth["D"] = D

    # -- geometry helpers
    @property
    def domain_center(self) -> np.ndarray:
        dm = self.domain
        return dm.center if dm.kind == "ball" else 0.5 * (dm.lower + dm.upper)

    def _inner_radius(self) -> float:
        dm = self.domain
        return dm.radius if dm.kind == "ball" else 0.5 * float(np.min(dm.upper - dm.lower))

    def _extreme_points(self, direction):
        dm = self.domain
        u = direction / max(np.linalg.norm(direction), 1e-300)
        if dm.kind == "ball":
            return [dm.center + dm.radius * u, dm.center - dm.radius * u]
        hi = np.where(direction >= 0, dm.upper, dm.lower)
        lo = np.where(direction >= 0, dm.lower, dm.upper)
        return [hi, lo]

    # -- losses
    def value(self, t: int, x) -> float:
        x = np.asarray(x, dtype=float)
        i = t - 1
        if self.kind == "linear_drift":
            return float(self.G_seq[i] @ x)
        if self.kind == "quadratic_drift":
            r = x - self.centres[i]
            return float(r @ r)
        if self.kind == "sea_sampler":
            r = x - self.centres[i]
            return float(r @ r + self.xi[i] @ x)
        z = float(self.a @ x)
        return float(_log1pexp(z) - self.q[i] * z)

    def gradient(self, t: int, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        i = t - 1
        if self.kind == "linear_drift":
            return self.G_seq[i].copy()
        if self.kind == "quadratic_drift":
            return 2.0 * (x - self.centres[i])
        if self.kind == "sea_sampler":
            return 2.0 * (x - self.centres[i]) + self.xi[i]
        return (_sigmoid(self.a @ x) - self.q[i]) * self.a

    def value_batch(self, t: int, X) -> np.ndarray:
        """f_t at each row of X."""
        X = np.asarray(X, dtype=float)
        i = t - 1
        if self.kind == "linear_drift":
            return X @ self.G_seq[i]
        if self.kind in ("quadratic_drift", "sea_sampler"):
            r = X - self.centres[i]
            out = np.einsum("nd,nd->n", r, r)
            return out + X @ self.xi[i] if self.kind == "sea_sampler" else out
        z = X @ self.a
        return _log1pexp(z) - self.q[i] * z

    def gradient_batch(self, t: int, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        i = t - 1
        if self.kind == "linear_drift":
            return np.tile(self.G_seq[i], (X.shape[0], 1))
        if self.kind in ("quadratic_drift", "sea_sampler"):
            out = 2.0 * (X - self.centres[i])
            return out + self.xi[i] if self.kind == "sea_sampler" else out
        return (_sigmoid(X @ self.a) - self.q[i])[:, None] * self.a[None, :]

    def mean_value(self, t: int, x) -> float:
        """F_t(x), the expected loss (differs from f_t only for sea_sampler)."""
        if self.kind != "sea_sampler":
            return self.value(t, x)
        r = np.asarray(x, dtype=float) - self.centres[t - 1]
        return float(r @ r)

    def oracle(self, t: int, counter: QueryCounter) -> RoundOracle:
        if not 1 <= t <= self.T:
            raise IndexError(f"round {t} outside 1..{self.T}")
        return RoundOracle(self, t, counter)

    def values_many(self, X) -> np.ndarray:
        """f_t(x_t) for a (T, d) array of decisions."""
        X = np.asarray(X, dtype=float)
        T = X.shape[0]
        if self.kind == "linear_drift":
            return np.einsum("td,td->t", self.G_seq[:T], X)
        if self.kind in ("quadratic_drift", "sea_sampler"):
            r = X - self.centres[:T]
            out = np.einsum("td,td->t", r, r)
            if self.kind == "sea_sampler":
                out = out + np.einsum("td,td->t", self.xi[:T], X)
            return out
        z = X @ self.a
        return _log1pexp(z) - self.q[:T] * z

    # -- statistics
    def _sup_grad_diff2(self, t: int) -> float:
        """sup_x ||grad f_t(x) - grad f_{t-1}(x)||^2 for t >= 2."""
        if self.kind == "linear_drift":
            dg = self.G_seq[t - 1] - self.G_seq[t - 2]
            return float(dg @ dg)
        if self.kind == "quadratic_drift":
            dc = self.centres[t - 1] - self.centres[t - 2]
            return float(4.0 * dc @ dc)
        if self.kind == "sea_sampler":
            dc = 2.0 * (self.centres[t - 2] - self.centres[t - 1]) + self.xi[t - 1] - self.xi[t - 2]
            return float(dc @ dc)
        dq = self.q[t - 1] - self.q[t - 2]
        return float(dq * dq * (self.a @ self.a))

    def exact_statistics(self) -> dict:
        T = self.T
        V = float(sum(self._sup_grad_diff2(t) for t in range(2, T + 1))) if self.kind != "linear_drift" \
            else float(np.sum(np.diff(self.G_seq, axis=0) ** 2))
        out = {"V_T": V, "F_T": self.comparator_value(), "truth": dict(self.truth)}
        if self.kind == "sea_sampler":
            dc = np.diff(self.centres, axis=0)
            out["sigma2_1T"] = float(T * self.d * self.sigma**2)
            out["Sigma2_1T"] = float(4.0 * np.sum(dc**2))
        return out

    def comparator(self):
        """argmin_x sum_t f_t(x) over the domain."""
        T, dm = self.T, self.domain
        if T == 0:
            return self.domain_center.copy()
        if self.kind == "linear_drift":
            g = self.G_seq.sum(axis=0)
            if not np.any(g):
                return self.domain_center.copy()
            return self._extreme_points(-g)[0]
        if self.kind in ("quadratic_drift", "sea_sampler"):
            target = self.centres.mean(axis=0)
            if self.kind == "sea_sampler":
                target = target - self.xi.sum(axis=0) / (2.0 * T)
            # sum_t ||x - c_t||^2 = T ||x - target||^2 + const, so the projection is exact
            return dm.project(target)
        # the loss sees x only through z = <a, x>; the summed loss is minimised at
        # sigmoid(z) = mean(q), clipped to the range of z over the domain
        hi, lo = self._extreme_points(self.a)
        zl, zh = float(self.a @ lo), float(self.a @ hi)
        qbar = float(np.mean(self.q))
        if qbar <= 0.0:
            z = zl
        elif qbar >= 1.0:
            z = zh
        else:
            z = min(max(math.log(qbar / (1.0 - qbar)), zl), zh)
        if dm.kind == "ball":
            aa = float(self.a @ self.a)
            return dm.project(dm.center + (z - float(self.a @ dm.center)) / aa * self.a)
        # box: walk the segment between the two extreme points
        lam = 0.0 if zh == zl else (z - zl) / (zh - zl)
        return dm.project(lo + lam * (hi - lo))

    def comparator_value(self) -> float:
        if self.T == 0:
            return 0.0
        x = self.comparator()
        return float(np.sum(self.values_many(np.broadcast_to(x, (self.T, self.d)))))

    def regret(self, X) -> float:
        X = np.asarray(X, dtype=float)
        if X.shape[0] == 0:
            return 0.0
        return float(np.sum(self.values_many(X))) - self.comparator_value()

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        for name in ("G_seq", "centres", "xi", "q", "a"):
            if hasattr(self, name):
                h.update(np.ascontiguousarray(getattr(self, name)).tobytes())
        return h.hexdigest()

    def to_csv(self, path) -> None:
        """Per-round parameters: gradient (linear), centre (+ noise) or label."""
        with open(path, "w", newline="\n") as f:
            if self.kind == "linear_drift":
                cols, rows = [f"g{i}" for i in range(self.d)], self.G_seq
            elif self.kind == "quadratic_drift":
                cols, rows = [f"c{i}" for i in range(self.d)], self.centres
            elif self.kind == "sea_sampler":
                cols = [f"c{i}" for i in range(self.d)] + [f"xi{i}" for i in range(self.d)]
                rows = np.hstack([self.centres, self.xi])
            else:
                cols, rows = ["q"], self.q[:, None]
            f.write(",".join(["t"] + cols) + "\n")
            for t in range(self.T):
                f.write(",".join([str(t + 1)] + [format(v, ".17g") for v in rows[t]]) + "\n")


def _unit(rng, d):
    v = rng.standard_normal(d)
    return v / np.linalg.norm(v)


# ---------------------------------------------------------------------------
# curvature checks
# ---------------------------------------------------------------------------


def _random_domain_points(domain: ConvexDomain, n: int, rng) -> np.ndarray:
    d = domain.dim
    if domain.kind == "ball":
        v = rng.standard_normal((n, d))
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        r = domain.radius * rng.random(n) ** (1.0 / d)
        return domain.center + v * r[:, None]
    return domain.lower + (domain.upper - domain.lower) * rng.random((n, d))


def strong_convexity_test(stream: OcoStream, t: int, mu: float, n: int = 1000, seed: int = 0) -> float:
    """Min over random pairs of RHS - LHS in f(x) - f(y) <= <grad f(x), x - y> - mu/2 ||x - y||^2."""
    rng = np.random.default_rng(seed)
    X = _random_domain_points(stream.domain, n, rng)
    Y = _random_domain_points(stream.domain, n, rng)
    worst = math.inf
    for x, y in zip(X, Y):
        lhs = stream.value(t, x) - stream.value(t, y)
        rhs = stream.gradient(t, x) @ (x - y) - 0.5 * mu * np.sum((x - y) ** 2)
        worst = min(worst, rhs - lhs)
    return worst


def exp_concavity_test(stream: OcoStream, t: int, alpha: float, n: int = 1000, seed: int = 0) -> float:
    """Min over random pairs of RHS - LHS in f(x) - f(y) <= <g, x - y> - alpha/2 <g, x - y>^2."""
    rng = np.random.default_rng(seed)
    X = _random_domain_points(stream.domain, n, rng)
    Y = _random_domain_points(stream.domain, n, rng)
    worst = math.inf
    for x, y in zip(X, Y):
        g = stream.gradient(t, x)
        ip = g @ (x - y)
        lhs = stream.value(t, x) - stream.value(t, y)
        worst = min(worst, ip - 0.5 * alpha * ip**2 - lhs)
    return worst


def brute_force_V(stream: OcoStream, resolution: int = 100) -> float:
    """sup_x ||grad f_t - grad f_{t-1}||^2 summed over t, by a grid over the domain (d <= 2)."""
    dm = stream.domain
    if stream.d > 2:
        raise CapabilityError("grid estimate only for d <= 2")
    if dm.kind == "ball":
        lo, hi = dm.center - dm.radius, dm.center + dm.radius
    else:
        lo, hi = dm.lower, dm.upper
    axes = [np.linspace(lo[i], hi[i], resolution + 1) for i in range(stream.d)]
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, stream.d)
    pts = pts[[dm.contains(p, 1e-12) for p in pts]]
    total = 0.0
    for t in range(2, stream.T + 1):
        diff = stream.gradient_batch(t, pts) - stream.gradient_batch(t - 1, pts)
        total += float(np.max(np.einsum("nd,nd->n", diff, diff)))
    return total
