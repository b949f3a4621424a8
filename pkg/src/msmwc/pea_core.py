"""Multi-scale multiplicative weights with correction, over expert x learning-rate pairs.

A session keeps a distribution over (expert, rate) pairs. Before the first
real round it runs one auxiliary round whose loss is zero and whose optimism
is B_1/4 in every coordinate; that round is what lets the grid reach rates of
order T/B_1 without paying log T in the penalty term.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .numerics import (
    ConfigurationError,
    DomainError,
    entropic_omd_solve_full,
    kl_divergence,
    omd_one_step_inequality,
    weighted_entropy_bregman,
)


class RangeError(RuntimeError):
    """Every (expert, rate) pair has been pruned for the current loss range."""


class ProtocolError(RuntimeError):
    """predict/update called out of order."""


def ceil_log2(T: int) -> int:
    if T < 1:
        raise ConfigurationError("horizon must be >= 1")
    return (int(T) - 1).bit_length()


@dataclass(frozen=True)
class LearningRateGrid:
    """Rates 2^k / (32 * base_scale) for k = -n..n with n = ceil(log2 T)."""

    rates: np.ndarray
    base_scale: float
    exponent_range: int

    @classmethod
    def build(cls, T: int, base_scale: float) -> "LearningRateGrid":
        if base_scale <= 0 or not math.isfinite(base_scale):
            raise ConfigurationError("base scale must be positive")
        n = ceil_log2(T)
        ks = np.arange(-n, n + 1)
        rates = np.ldexp(1.0, ks) / (32.0 * base_scale)
        return cls(rates, float(base_scale), n)

    def __len__(self) -> int:
        return int(self.rates.shape[0])


@dataclass
class RoundRecord:
    """What one round of the session looked like, kept for diagnostics."""

    t: int
    optimism: np.ndarray  # K
    loss: np.ndarray  # K (None until update)
    B: float
    active: np.ndarray  # (K, G) bool
    w_prev: np.ndarray  # w'_t, (K, G)
    w: np.ndarray  # w_t
    w_next: np.ndarray | None  # w'_{t+1}
    p: np.ndarray
    log_w_prev: np.ndarray | None = None
    log_w: np.ndarray | None = None
    log_w_next: np.ndarray | None = None


@dataclass
class SessionTrace:
    prior: np.ndarray
    grid: LearningRateGrid
    B1: float
    scale: float
    rounds: list = field(default_factory=list)  # RoundRecord, index 0 is the auxiliary round

    @property
    def T(self) -> int:
        return len(self.rounds) - 1

    def losses(self) -> np.ndarray:
        return np.array([r.loss for r in self.rounds[1:]]).reshape(self.T, -1)

    def optimisms(self) -> np.ndarray:
        return np.array([r.optimism for r in self.rounds[1:]]).reshape(self.T, -1)

    def decisions(self) -> np.ndarray:
        return np.array([r.p for r in self.rounds[1:]]).reshape(self.T, -1)

    def ranges(self) -> np.ndarray:
        return np.array([r.B for r in self.rounds[1:]])


class MsMwC:
    """One session of the optimistic MsMwC learner with the auxiliary round.

    Parameters
    ----------
    prior : K-vector on the simplex (p'_0).
    T : horizon used to size the rate grid.
    B1 : first-round loss range.
    scale : multiplies the base scale of the grid and the pruning threshold.
        1 gives the plain grid; the single-gradient ensemble passes C_0.
    record : keep a per-round trace (needed by the diagnostics).
    """

    def __init__(self, prior, T: int, B1: float, scale: float = 1.0, record: bool = False):
        prior = np.asarray(prior, dtype=float)
        if prior.ndim != 1 or prior.size < 1:
            raise ConfigurationError("prior must be a nonempty vector")
        if np.any(prior < 0) or abs(prior.sum() - 1.0) > 1e-9:
            raise ConfigurationError("prior must lie on the simplex")
        if T < 1:
            raise ConfigurationError("T must be >= 1")
        if not (B1 > 0 and math.isfinite(B1)):
            raise ConfigurationError("B1 must be positive")
        if not (scale > 0):
            raise ConfigurationError("scale must be positive")
        self.K = prior.size
        self.T = int(T)
        self.B1 = float(B1)
        self.scale = float(scale)
        self.prior = prior
        self.grid = LearningRateGrid.build(T, self.scale * self.B1)
        G = len(self.grid)
        self._eta = np.broadcast_to(self.grid.rates, (self.K, G)).copy()
        self._eta_flat = self._eta.ravel()

        w0 = np.repeat(prior[:, None] / G, G, axis=1)
        # auxiliary round: loss 0, optimism B1/4, so a_0 = 32 eta (B1/4)^2 = 2 eta B1^2
        a0 = 2.0 * self._eta * self.B1**2
        sol = entropic_omd_solve_full(a0.ravel(), w0.ravel(), self._eta_flat)
        w1 = sol.weights.reshape(self.K, G)
        self.w_prime = w1
        self.log_w_prime = sol.log_weights.reshape(self.K, G)
        self.t = 0
        self.B = self.B1
        self._pending = None
        self.trace = None
        if record:
            self.trace = SessionTrace(prior.copy(), self.grid, self.B1, self.scale)
            m0 = np.full(self.K, self.B1 / 4.0)
            full = np.ones((self.K, G), dtype=bool)
            # w_0 = w'_0 because a constant optimism vector does not move the simplex solve
            with np.errstate(divide="ignore"):
                lw0 = np.log(w0)
            self.trace.rounds.append(
                RoundRecord(0, m0, np.zeros(self.K), self.B1, full, w0, w0.copy(), w1.copy(), prior.copy(),
                            lw0, lw0.copy(), self.log_w_prime.copy())
            )

    @property
    def rates(self) -> np.ndarray:
        return self.grid.rates

    def active_mask(self, B: float) -> np.ndarray:
        return 32.0 * self.scale * self._eta * B <= 1.0

    def predict(self, optimism, B: float | None = None):
        """Return (p_t, w_t) for optimism m_t and loss range B_t."""
        if self._pending is not None:
            raise ProtocolError("predict called twice without update")
        m = np.asarray(optimism, dtype=float).reshape(self.K)
        if B is None:
            B = self.B
        if B < self.B * (1 - 1e-12):
            raise ConfigurationError("loss range must be non-decreasing within a session")
        B = max(float(B), self.B)
        mask = self.active_mask(B)
        if not np.any(mask):
            raise RangeError(f"all learning rates pruned at B={B:g}")
        cost = np.repeat(m[:, None], len(self.grid), axis=1)
        sol = entropic_omd_solve_full(cost.ravel(), None, self._eta_flat, mask.ravel(),
                                      log_prior=self.log_w_prime.ravel())
        w = sol.weights.reshape(self.K, -1)
        p = w.sum(axis=1)
        self.B = B
        self.t += 1
        self._pending = (m, mask, w, p, sol.log_weights.reshape(self.K, -1))
        return p, w

    def update(self, loss) -> None:
        if self._pending is None:
            raise ProtocolError("update called before predict")
        m, mask, w, p, log_w = self._pending
        loss = np.asarray(loss, dtype=float).reshape(self.K)
        if not np.all(np.isfinite(loss)):
            raise ValueError("non-finite loss")
        err = loss - m
        correction = 32.0 * self._eta * (err**2)[:, None]
        cost = loss[:, None] + correction
        sol = entropic_omd_solve_full(cost.ravel(), None, self._eta_flat, mask.ravel(),
                                      log_prior=self.log_w_prime.ravel())
        w_next = sol.weights.reshape(self.K, -1)
        log_next = sol.log_weights.reshape(self.K, -1)
        if self.trace is not None:
            self.trace.rounds.append(
                RoundRecord(self.t, m, loss.copy(), self.B, mask, self.w_prime, w, w_next, p,
                            self.log_w_prime, log_w, log_next)
            )
        self.w_prime = w_next
        self.log_w_prime = log_next
        self._pending = None


# ---------------------------------------------------------------------------
# diagnostics
# ---------------------------------------------------------------------------


def correction_term(rate, loss, optimism):
    """a(i, eta) = 32 eta (l(i) - m(i))^2."""
    return 32.0 * np.asarray(rate) * (np.asarray(loss) - np.asarray(optimism)) ** 2


def comparator_variance(losses, optimisms, u) -> float:
    """V(u) = sum_t sum_i u(i) (l_t(i) - m_t(i))^2."""
    losses = np.asarray(losses, dtype=float)
    optimisms = np.asarray(optimisms, dtype=float)
    if losses.size == 0:
        return 0.0
    return float(np.sum(((losses - optimisms) ** 2) @ np.asarray(u, dtype=float)))


def regret(losses, decisions, u) -> float:
    losses = np.asarray(losses, dtype=float)
    if losses.size == 0:
        return 0.0
    return float(np.sum(losses * (np.asarray(decisions) - np.asarray(u)[None, :])))


def lift_comparator(u, grid_size: int, rate_index: int) -> np.ndarray:
    """Place a K-simplex comparator on a single rate of the grid."""
    u = np.asarray(u, dtype=float)
    out = np.zeros((u.size, grid_size))
    out[:, rate_index] = u
    return out


def _vertex_penalty(r: RoundRecord, eta: np.ndarray) -> np.ndarray:
    """D(e_j, w'_t) - D(e_j, w'_{t+1}) for every pair j, computed from log-weights."""
    with np.errstate(invalid="ignore"):
        diff = (r.log_w_next - r.log_w_prev) / eta
    return diff + float(np.sum((r.w_prev - r.w_next) / eta))


def round_bound_slacks(trace: SessionTrace, t: int, form: str = "printed") -> np.ndarray:
    """RHS - LHS of the per-round bound for every vertex comparator of the active set.

    <l~_t, w_t - u~> <= D(u~, w'_t) - D(u~, w'_{t+1})
        + 32 sum eta u~ l'^2 - 16 sum eta w_t l'^2
        + sum 1[32 eta |l'| > 1] w_t l'
    with l' = l_t - m_t broadcast over rates. Both sides are affine in u~, so
    the vertices cover the whole restricted simplex. ``form="corrected"``
    keeps the -16 term only on pairs with 32 eta |l'| <= 1; on the other pairs
    the exact stability bound does not produce it. Pruned pairs get +inf.
    """
    r = trace.rounds[t]
    eta = np.broadcast_to(trace.grid.rates, r.w.shape)
    err = np.broadcast_to((r.loss - r.optimism)[:, None], r.w.shape)
    loss = np.broadcast_to(r.loss[:, None], r.w.shape)
    overflow = 32.0 * eta * np.abs(err) > 1.0
    neg_w = r.w if form == "printed" else np.where(overflow, 0.0, r.w)
    if form not in ("printed", "corrected"):
        raise ValueError("form must be 'printed' or 'corrected'")
    lhs = float(np.sum(loss * r.w)) - loss
    rhs = (
        _vertex_penalty(r, eta)
        + 32.0 * eta * err**2
        - 16.0 * float(np.sum(eta * neg_w * err**2))
        + float(np.sum(np.where(overflow, r.w * err, 0.0)))
    )
    return np.where(r.active, rhs - lhs, np.inf)


def check_round_bound(trace: SessionTrace, t: int, u_tilde, form: str = "printed") -> float:
    """Per-round bound slack (RHS - LHS) for an arbitrary comparator on the active set."""
    r = trace.rounds[t]
    u = np.asarray(u_tilde, dtype=float).reshape(r.w.shape)
    if np.any((u > 0) & ~r.active):
        raise DomainError("comparator has mass on pruned pairs")
    slacks = round_bound_slacks(trace, t, form)
    # affine in u: the slack of a mixture is the mixture of vertex slacks
    return float(np.sum(u[u > 0] * slacks[u > 0]))


def overflow_term(trace: SessionTrace, t: int) -> float:
    """sum 1[32 eta |l'| > 1] w_t l' for round t (round 0 is the auxiliary round)."""
    r = trace.rounds[t]
    eta = np.broadcast_to(trace.grid.rates, r.w.shape)
    err = np.broadcast_to((r.loss - r.optimism)[:, None], r.w.shape)
    return float(np.sum(np.where(32.0 * eta * np.abs(err) > 1.0, r.w * err, 0.0)))


def one_step_slacks(trace: SessionTrace, t: int) -> np.ndarray:
    """Slack of the generic one-step OMD inequality for every active vertex comparator.

    The loss is the update cost l~_t + a_t and the optimism is m~_t.
    """
    r = trace.rounds[t]
    eta = np.broadcast_to(trace.grid.rates, r.w.shape)
    err = (r.loss - r.optimism)[:, None]
    cost = r.loss[:, None] + 32.0 * eta * err**2
    opt = np.broadcast_to(r.optimism[:, None], r.w.shape)
    lhs = float(np.sum(cost * r.w)) - cost
    stab = (
        float(np.sum((r.w - r.w_next) * (cost - opt)))
        - weighted_entropy_bregman(r.w_next, r.w, eta, r.log_w_next, r.log_w)
        - weighted_entropy_bregman(r.w, r.w_prev, eta, r.log_w, r.log_w_prev)
    )
    rhs = stab + _vertex_penalty(r, eta)
    return np.where(r.active, rhs - lhs, np.inf)


def check_one_step(trace: SessionTrace, t: int, u_tilde) -> float:
    """Slack of the generic one-step OMD inequality on round t for one comparator."""
    r = trace.rounds[t]
    eta = np.broadcast_to(trace.grid.rates, r.w.shape)
    err = (r.loss - r.optimism)[:, None]
    cost = r.loss[:, None] + 32.0 * eta * err**2
    opt = np.broadcast_to(r.optimism[:, None], r.w.shape)
    logs = {"w_t": r.log_w.ravel(), "w_next": r.log_w_next.ravel(), "w_prev": r.log_w_prev.ravel()}
    _, slack = omd_one_step_inequality(
        cost.ravel(), opt.ravel(), r.w.ravel(), r.w_next.ravel(), r.w_prev.ravel(),
        np.asarray(u_tilde, dtype=float).ravel(), eta.ravel(), logs,
    )
    return slack


def theorem2_rhs(kl: float, grid_size: int, eta_star: float, V: float, B1: float) -> float:
    return (kl + math.log(grid_size)) / eta_star + 32.0 * eta_star * V + 2.0 * eta_star * B1**2


def check_theorem2_bound(trace: SessionTrace, u, tol: float = 1e-6):
    """Realised regret against every admissible rate's end-to-end bound.

    Returns (ok, rows) where rows lists (eta*, regret, rhs) for each rate with
    32 * scale * eta* * B_T <= 1.
    """
    u = np.asarray(u, dtype=float)
    if trace.T == 0:
        return True, []
    losses, opts, dec = trace.losses(), trace.optimisms(), trace.decisions()
    R = regret(losses, dec, u)
    V = comparator_variance(losses, opts, u)
    kl = kl_divergence(u, trace.prior)
    BT = float(trace.ranges().max())
    rows = []
    ok = True
    for eta in trace.grid.rates:
        if 32.0 * trace.scale * eta * BT > 1.0:
            continue
        rhs = theorem2_rhs(kl, len(trace.grid), eta, V, trace.B1)
        rows.append((float(eta), R, rhs))
        ok &= R <= rhs + tol
    return bool(ok), rows


def auxiliary_round_terms(trace: SessionTrace) -> dict:
    """Both sides of the round-0 'cancellation' so runs can report them.

    negative = 16 sum eta w_0 (B1/4)^2 = sum eta w'_0 B1^2,
    positive = sum w'_0 / eta (from expanding D_psi(u~, w'_0)).
    """
    r = trace.rounds[0]
    eta = np.broadcast_to(trace.grid.rates, r.w.shape)
    neg = 16.0 * float(np.sum(eta * r.w * (trace.B1 / 4.0) ** 2))
    pos = float(np.sum(r.w_prev / eta))
    return {"negative_term": neg, "penalty_mass": pos, "overflow_round0": overflow_term(trace, 0)}
