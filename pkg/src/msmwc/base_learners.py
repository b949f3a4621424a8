"""Optimistic OMD base learners for convex, exp-concave and strongly convex losses.

Every learner plays x_t from its previous gradient (the optimism) and then
moves its auxiliary point x'_{t+1} with the gradient it actually receives;
both half-steps start from x'_t. The single-learner classes are the reference
implementation; LearnerBank steps a whole roster at once and must agree with
them to rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .numerics import (
    ConfigurationError,
    ConvexDomain,
    euclidean_omd_step,
    matrix_omd_step,
    matrix_omd_step_many,
)
from .pea_core import ceil_log2


@dataclass(frozen=True)
class LearnerSpec:
    kind: str  # "convex" | "exp_concave" | "strongly_convex"
    gamma: float
    alpha: float = 0.0
    mu: float = 0.0
    surrogate: str = "none"  # single-gradient mode: "linear" | "exp_concave" | "strongly_convex"
    coef: float = 0.0  # alpha_i or mu_i of the surrogate

    def label(self) -> str:
        if self.kind == "convex":
            return f"convex(gamma={self.gamma:g})"
        if self.kind == "exp_concave":
            return f"exp_concave(alpha={self.alpha:g},gamma={self.gamma:g})"
        return f"strongly_convex(mu={self.mu:g},gamma={self.gamma:g})"


# ---------------------------------------------------------------------------
# step-size schedules
# ---------------------------------------------------------------------------


def convex_rate(D: float, Vbar_prev, gamma: float):
    """eta_t = min(D / sqrt(1 + Vbar_{t-1}), 1 / gamma); gamma = 0 means no cap."""
    cap = math.inf if gamma <= 0 else 1.0 / gamma
    return np.minimum(D / np.sqrt(1.0 + np.asarray(Vbar_prev, dtype=float)), cap)


def strongly_convex_rate(gamma, mu, t: int):
    """eta_t = 2 / (gamma + mu t)."""
    return 2.0 / (np.asarray(gamma, dtype=float) + np.asarray(mu, dtype=float) * t)


# ---------------------------------------------------------------------------
# reference single learners
# ---------------------------------------------------------------------------


class ConvexLearner:
    def __init__(self, domain: ConvexDomain, gamma: float):
        if gamma < 0:
            raise ConfigurationError("gamma must be >= 0")
        self.domain, self.gamma = domain, float(gamma)
        self.D = domain.diameter
        c = domain.center if domain.kind == "ball" else 0.5 * (domain.lower + domain.upper)
        self.x = c.copy()
        self.x_prime = c.copy()
        self.g_prev = np.zeros(domain.dim)
        self.Vbar = 0.0
        self.t = 0

    def rate(self) -> float:
        return float(convex_rate(self.D, self.Vbar, self.gamma))

    def step(self, optimism=None) -> np.ndarray:
        self.t += 1
        m = self.g_prev if optimism is None else np.asarray(optimism, dtype=float)
        self.eta = self.rate()
        self.x = euclidean_omd_step(m, self.x_prime, self.eta, self.domain)
        return self.x

    def update(self, g) -> np.ndarray:
        g = np.asarray(g, dtype=float)
        self.x_prime = euclidean_omd_step(g, self.x_prime, self.eta, self.domain)
        self.Vbar += float(np.sum((g - self.g_prev) ** 2))
        self.g_prev = g.copy()
        return self.x_prime


class StronglyConvexLearner(ConvexLearner):
    def __init__(self, domain: ConvexDomain, mu: float, gamma: float = 0.0):
        if mu <= 0:
            raise ConfigurationError("mu must be positive")
        super().__init__(domain, gamma)
        self.mu = float(mu)

    def rate(self) -> float:
        return float(strongly_convex_rate(self.gamma, self.mu, self.t))


class ExpConcaveLearner:
    """Matrix OOMD with U_t = gamma I + (alpha/2) sum_{s<t} (g_s - g_{s-1})(g_s - g_{s-1})^T."""

    def __init__(self, domain: ConvexDomain, alpha: float, gamma: float):
        if alpha <= 0 or gamma <= 0:
            raise ConfigurationError("alpha and gamma must be positive")
        self.domain, self.alpha, self.gamma = domain, float(alpha), float(gamma)
        d = domain.dim
        c = domain.center if domain.kind == "ball" else 0.5 * (domain.lower + domain.upper)
        self.x = c.copy()
        self.x_prime = c.copy()
        self.g_prev = np.zeros(d)
        self.U = self.gamma * np.eye(d)
        self.t = 0

    def step(self, optimism=None) -> np.ndarray:
        self.t += 1
        m = self.g_prev if optimism is None else np.asarray(optimism, dtype=float)
        self.x = matrix_omd_step(m, self.x_prime, self.U, self.domain)
        return self.x

    def update(self, g) -> np.ndarray:
        g = np.asarray(g, dtype=float)
        self.x_prime = matrix_omd_step(g, self.x_prime, self.U, self.domain)
        diff = g - self.g_prev
        # the metric of round t+1 includes s = t
        self.U = self.U + 0.5 * self.alpha * np.outer(diff, diff)
        self.g_prev = g.copy()
        return self.x_prime


def make_learner(spec: LearnerSpec, domain: ConvexDomain):
    if spec.kind == "convex":
        return ConvexLearner(domain, spec.gamma)
    if spec.kind == "strongly_convex":
        return StronglyConvexLearner(domain, spec.mu, spec.gamma)
    if spec.kind == "exp_concave":
        return ExpConcaveLearner(domain, spec.alpha, spec.gamma)
    raise ConfigurationError(f"unknown learner kind {spec.kind!r}")


# ---------------------------------------------------------------------------
# batched roster
# ---------------------------------------------------------------------------


class LearnerBank:
    """A roster of learners stepped together.

    step() returns the (K, d) array of x_{t,i}; update(G) takes the (K, d)
    array of gradients each learner received.
    """

    def __init__(self, specs, domain: ConvexDomain):
        self.specs = list(specs)
        self.domain = domain
        self.K = len(self.specs)
        if self.K == 0:
            raise ConfigurationError("empty roster")
        d = domain.dim
        self.d = d
        self.D = domain.diameter
        c = domain.center if domain.kind == "ball" else 0.5 * (domain.lower + domain.upper)
        self.X = np.tile(c, (self.K, 1))
        self.X_prime = self.X.copy()
        self.G_prev = np.zeros((self.K, d))
        self.t = 0
        kinds = np.array([s.kind for s in self.specs])
        self.idx_cvx = np.nonzero(kinds == "convex")[0]
        self.idx_sc = np.nonzero(kinds == "strongly_convex")[0]
        self.idx_exp = np.nonzero(kinds == "exp_concave")[0]
        if len(self.idx_cvx) + len(self.idx_sc) + len(self.idx_exp) != self.K:
            raise ConfigurationError("unknown learner kind in roster")
        gam = np.array([s.gamma for s in self.specs], dtype=float)
        self.gamma = gam
        self.mu = np.array([s.mu for s in self.specs], dtype=float)
        self.alpha = np.array([s.alpha for s in self.specs], dtype=float)
        if np.any(self.mu[self.idx_sc] <= 0):
            raise ConfigurationError("strongly convex learners need mu > 0")
        if np.any(self.alpha[self.idx_exp] <= 0) or np.any(gam[self.idx_exp] <= 0):
            raise ConfigurationError("exp-concave learners need alpha, gamma > 0")
        self.Vbar = np.zeros(self.K)
        ne = len(self.idx_exp)
        self.U = gam[self.idx_exp, None, None] * np.eye(d)[None] if ne else np.zeros((0, d, d))
        self.eta = np.zeros(self.K)

    def _rates(self) -> np.ndarray:
        eta = np.zeros(self.K)
        if len(self.idx_cvx):
            eta[self.idx_cvx] = [convex_rate(self.D, self.Vbar[i], self.gamma[i]) for i in self.idx_cvx]
        if len(self.idx_sc):
            eta[self.idx_sc] = strongly_convex_rate(self.gamma[self.idx_sc], self.mu[self.idx_sc], self.t)
        return eta

    def _euclid(self, idx, G, eta):
        Y = self.X_prime[idx] - 0.5 * eta[idx, None] * G[idx]
        return self.domain.project_many(Y)

    def step(self, optimism=None) -> np.ndarray:
        self.t += 1
        M = self.G_prev if optimism is None else np.asarray(optimism, dtype=float)
        self.eta = self._rates()
        X = np.empty_like(self.X)
        eu = np.concatenate([self.idx_cvx, self.idx_sc])
        if eu.size:
            X[eu] = self._euclid(eu, M, self.eta)
        if self.idx_exp.size:
            # the metric is fixed for the round, so both half-steps share one eigendecomposition
            self._eig = np.linalg.eigh(self.U)
            X[self.idx_exp] = matrix_omd_step_many(M[self.idx_exp], self.X_prime[self.idx_exp], self.U, self.domain,
                                                   eig=self._eig)
        self.X = X
        return X

    def update(self, G) -> np.ndarray:
        G = np.asarray(G, dtype=float)
        eu = np.concatenate([self.idx_cvx, self.idx_sc])
        Xp = self.X_prime.copy()
        if eu.size:
            Xp[eu] = self._euclid(eu, G, self.eta)
        ie = self.idx_exp
        if ie.size:
            Xp[ie] = matrix_omd_step_many(G[ie], self.X_prime[ie], self.U, self.domain, eig=self._eig)
            diff = G[ie] - self.G_prev[ie]
            self.U = self.U + 0.5 * self.alpha[ie, None, None] * np.einsum("ni,nj->nij", diff, diff)
        self.Vbar += np.sum((G - self.G_prev) ** 2, axis=1)
        self.G_prev = G.copy()
        self.X_prime = Xp
        return Xp


# ---------------------------------------------------------------------------
# surrogate losses of the single-gradient ensemble
# ---------------------------------------------------------------------------


def surrogate_eval(kind: str, g, anchor, x, coef: float = 0.0):
    """Value and gradient of h^c, h^exp or h^sc at x.

    linear:          <g, x>
    exp_concave:     <g, x> + (alpha/2) <g, x - x_t>^2
    strongly_convex: <g, x> + (mu/2) ||x - x_t||^2
    """
    g = np.asarray(g, dtype=float)
    x = np.asarray(x, dtype=float)
    diff = x - np.asarray(anchor, dtype=float)
    base = float(g @ x)
    if kind == "linear":
        return base, g.copy()
    if kind == "exp_concave":
        ip = float(g @ diff)
        return base + 0.5 * coef * ip**2, g + coef * ip * g
    if kind == "strongly_convex":
        return base + 0.5 * coef * float(diff @ diff), g + coef * diff
    raise ConfigurationError(f"unknown surrogate kind {kind!r}")


def surrogate_gradients(specs, g, anchor, X) -> np.ndarray:
    """Row-wise surrogate gradients for a roster at its points X (K, d)."""
    g = np.asarray(g, dtype=float)
    diff = np.asarray(X, dtype=float) - np.asarray(anchor, dtype=float)
    kinds = np.array([s.surrogate for s in specs])
    coef = np.array([s.coef for s in specs], dtype=float)
    out = np.tile(g, (len(specs), 1))
    e = kinds == "exp_concave"
    if np.any(e):
        out[e] += (coef[e] * (diff[e] @ g))[:, None] * g
    s = kinds == "strongly_convex"
    if np.any(s):
        out[s] += coef[s, None] * diff[s]
    return out


# ---------------------------------------------------------------------------
# rosters
# ---------------------------------------------------------------------------


def roster_build(kind: str, T: int, L: float | None = None, G: float | None = None, constants=None) -> list:
    """Learner specs for the ensembles.

    standard: one convex (gamma = L), ceil(log2 T)^2 exp-concave with
        alpha = 2^-k, gamma = max(2L^2, 1 + alpha 4^k'), ceil(log2 T) strongly
        convex with mu = 2^-k, gamma = 0.
    sea: as standard with gamma = max(16L^2, 1 + alpha 4^k').
    single_gradient: one convex learner on h^c, ceil(log2 T) exp-concave
        learners on h^exp_i and ceil(log2 T) strongly convex learners on h^sc_i.
        gammas come from ``constants`` (gamma_convex, gamma_exp).
    """
    if T < 2:
        raise ConfigurationError("roster needs T >= 2")
    n = ceil_log2(T)
    ks = range(1, n + 1)
    if kind in ("standard", "sea"):
        if L is None:
            raise ConfigurationError(f"{kind} roster needs the smoothness constant L")
        floor = (2.0 if kind == "standard" else 16.0) * L**2
        specs = [LearnerSpec("convex", float(L))]
        for k in ks:
            a = 2.0**-k
            for k2 in ks:
                specs.append(LearnerSpec("exp_concave", max(floor, 1.0 + a * 4.0**k2), alpha=a))
        for k in ks:
            specs.append(LearnerSpec("strongly_convex", 0.0, mu=2.0**-k))
        return specs
    if kind == "single_gradient":
        if constants is None:
            raise ConfigurationError("single_gradient roster needs ensemble constants")
        specs = [LearnerSpec("convex", constants.gamma_convex, surrogate="linear")]
        for k in ks:
            a = 2.0**-k
            specs.append(LearnerSpec("exp_concave", constants.gamma_exp, alpha=a, surrogate="exp_concave", coef=a))
        for k in ks:
            m = 2.0**-k
            specs.append(LearnerSpec("strongly_convex", constants.gamma_convex, mu=m,
                                     surrogate="strongly_convex", coef=m))
        return specs
    raise ConfigurationError(f"unknown roster kind {kind!r}")


# ---------------------------------------------------------------------------
# trajectory diagnostics
# ---------------------------------------------------------------------------


def lemma24_check(grads, X, V_T: float, G: float, L: float) -> dict:
    """Empirical gradient variation against 2(V_T + G) + 2L^2 S and the G^2 form.

    grads[t] = grad f_t(x_t) for t = 1..T (f_0 = 0 contributes grad 0).
    """
    grads = np.asarray(grads, dtype=float)
    X = np.asarray(X, dtype=float)
    if grads.shape[0] == 0:
        return {"lhs": 0.0, "rhs_printed": 2 * (V_T + G), "rhs_squared": 2 * (V_T + G**2),
                "printed_holds": True, "squared_holds": True}
    prev = np.vstack([np.zeros((1, grads.shape[1])), grads[:-1]])
    lhs = float(np.sum((grads - prev) ** 2))
    S = float(np.sum(np.diff(X, axis=0) ** 2))
    r1 = 2.0 * (V_T + G) + 2.0 * L**2 * S
    r2 = 2.0 * (V_T + G**2) + 2.0 * L**2 * S
    tol = 1e-9 * max(1.0, lhs)
    return {"lhs": lhs, "rhs_printed": r1, "rhs_squared": r2,
            "printed_holds": bool(lhs <= r1 + tol), "squared_holds": bool(lhs <= r2 + tol)}


def lemma17_bound(D: float, Vbar_T: float, gamma: float, S: float, safety: float = 1.0) -> float:
    """safety * (5 D sqrt(1 + Vbar_T) + D/2 + gamma D^2) - (gamma/4) S, reported only."""
    return safety * (5.0 * D * math.sqrt(1.0 + Vbar_T) + D / 2.0 + gamma * D**2) - gamma / 4.0 * S
