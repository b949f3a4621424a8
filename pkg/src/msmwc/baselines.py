"""Non-adaptive comparison point: Hedge with one fixed learning rate."""

from __future__ import annotations

import math

import numpy as np

from .numerics import ConfigurationError
from .pea_adaptive import PeaTrace
from .pea_core import ProtocolError


def default_eta(K: int, T: int) -> float:
    """sqrt(log K / T), the classic worst-case tuning."""
    return math.sqrt(math.log(max(K, 2)) / max(T, 1))


class HedgeFixedEta:
    """Optimistic Hedge: p_t ~ prior * exp(-eta (L_{t-1} + m_t))."""

    def __init__(self, prior, eta: float, record: bool = True):
        prior = np.asarray(prior, dtype=float)
        if not (eta > 0 and math.isfinite(eta)):
            raise ConfigurationError("eta must be positive and finite")
        if prior.ndim != 1 or np.any(prior < 0) or not math.isclose(prior.sum(), 1.0, rel_tol=1e-9):
            raise ConfigurationError("prior must be a distribution")
        self.prior = prior
        self.eta = float(eta)
        self.cum = np.zeros(prior.size)
        self._logp = np.where(prior > 0, np.log(np.where(prior > 0, prior, 1.0)), -np.inf)
        self._pending = None
        self.trace = PeaTrace(prior.copy()) if record else None

    def predict(self, optimism=None) -> np.ndarray:
        if self._pending is not None:
            raise ProtocolError("predict called twice without update")
        m = np.zeros(self.prior.size) if optimism is None else np.asarray(optimism, dtype=float)
        z = self._logp - self.eta * (self.cum + m)
        z = z - np.max(z)
        p = np.exp(z)
        p /= p.sum()
        self._pending = (m, p)
        return p

    def update(self, loss) -> None:
        if self._pending is None:
            raise ProtocolError("update called before predict")
        m, p = self._pending
        loss = np.asarray(loss, dtype=float)
        self.cum += loss
        if self.trace is not None:
            tr = self.trace
            tr.decisions.append(p)
            tr.losses.append(loss)
            tr.optimisms.append(m)
            tr.B.append(max(tr.B_T, float(np.max(np.abs(loss - m)))))
        self._pending = None


def hedge_fixed_eta(stream, eta: float | None = None, optimistic: bool = True) -> PeaTrace:
    """Run fixed-rate Hedge over a PeaStream (uniform prior)."""
    K, T = stream.K, stream.T
    h = HedgeFixedEta(np.full(K, 1.0 / K), default_eta(K, T) if eta is None else eta)
    for m, loss in stream:
        h.predict(m if optimistic else None)
        h.update(loss)
    return h.trace
