"""Session-level traffic model for small-cell front-haul.

Requests arrive per cell as a Poisson process.  Most sessions carry data
whose volume follows a Pareto law pinned down by two published facts: 80%
of transfers stay under 10 kb, and the top decile of transfers carries 90%
of all bytes.  Data session durations follow a lognormal law pinned by its
0.8 and 0.999 quantiles (11 s and 200 s).  The rest are voice calls at a
fixed codec rate with exponentially distributed holding times.

Fitting happens once; the fitted model is immutable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from statistics import NormalDist

import numpy as np

from .config import SimulationConfig
from .errors import FitError

# feasibility ceiling for the Pareto exponent; the share equation drives
# alpha to infinity as top_share approaches top_q
ALPHA_CEILING = 1e6

_FIT_TOL = 1e-10


@dataclass(frozen=True)
class TrafficModel:
    pareto_alpha: float
    pareto_xm_bits: float
    lognorm_mu: float
    lognorm_sigma: float
    data_fraction: float = 0.97
    voice_rate_bps: float = 128000.0
    voice_mean_duration_s: float = 100.0
    mean_interarrival_s: float = 10.0
    volume_cap_bits: float = 1e9

    @classmethod
    def from_config(cls, config: SimulationConfig) -> "TrafficModel":
        alpha, xm = fit_size_distribution(small_bits=10.0 * config.kb_bits)
        mu, sigma = fit_duration_distribution()
        return cls(
            pareto_alpha=alpha,
            pareto_xm_bits=xm,
            lognorm_mu=mu,
            lognorm_sigma=sigma,
            data_fraction=config.data_fraction,
            voice_rate_bps=config.voice_rate_bps,
            voice_mean_duration_s=config.voice_mean_duration_s,
            mean_interarrival_s=config.mean_interarrival_s,
            volume_cap_bits=config.volume_cap_bits,
        )


@dataclass
class Session:
    cell_id: int
    kind: str  # "data" | "voice"
    start_s: float
    duration_s: float
    rate_bps: float


@lru_cache(maxsize=32)
def fit_size_distribution(
    p_small: float = 0.80,
    small_bits: float = 10_000.0,
    top_q: float = 0.10,
    top_share: float = 0.90,
) -> tuple[float, float]:
    """Fit Pareto (alpha, xm) to a small-size quantile and a Lorenz share.

    alpha solves top_q**(1 - 1/alpha) = top_share (bisection, residual
    below 1e-10); xm then follows from P(V < small_bits) = p_small in
    closed form.
    """
    if not 0.0 < p_small < 1.0:
        raise FitError("p_small must lie in (0, 1), got %r" % p_small)
    if small_bits <= 0.0:
        raise FitError("small_bits must be positive, got %r" % small_bits)
    if not 0.0 < top_q < 1.0:
        raise FitError("top_q must lie in (0, 1), got %r" % top_q)
    if not top_q < top_share < 1.0:
        raise FitError(
            "top_share must lie in (top_q, 1) for a finite-mean Pareto fit, "
            "got top_share=%r with top_q=%r" % (top_share, top_q)
        )

    def residual(alpha: float) -> float:
        return top_q ** (1.0 - 1.0 / alpha) - top_share

    lo, hi = 1.0 + 1e-12, ALPHA_CEILING
    if residual(hi) > 0.0:
        raise FitError("required Pareto exponent exceeds ceiling %g" % ALPHA_CEILING)
    alpha = 0.5 * (lo + hi)
    for _ in range(200):
        alpha = 0.5 * (lo + hi)
        r = residual(alpha)
        if abs(r) <= _FIT_TOL:
            break
        if r > 0.0:
            lo = alpha
        else:
            hi = alpha
    else:
        raise FitError("Pareto exponent search did not converge")

    xm = small_bits * (1.0 - p_small) ** (1.0 / alpha)
    return alpha, xm


@lru_cache(maxsize=32)
def fit_duration_distribution(
    p_short: float = 0.80,
    short_s: float = 11.0,
    p_long: float = 0.001,
    long_s: float = 200.0,
) -> tuple[float, float]:
    """Fit lognormal (mu, sigma) through two quantiles:
    P(D < short_s) = p_short and P(D > long_s) = p_long."""
    if not 0.0 < p_short < 1.0 or not 0.0 < p_long < 1.0:
        raise FitError("quantile probabilities must lie in (0, 1)")
    if short_s <= 0.0 or long_s <= 0.0:
        raise FitError("quantile durations must be positive")

    z_short = NormalDist().inv_cdf(p_short)
    z_long = NormalDist().inv_cdf(1.0 - p_long)
    if z_long <= z_short:
        raise FitError(
            "quantile collision: p_short=%r and p_long=%r pin the same "
            "normal quantile" % (p_short, p_long)
        )
    sigma = (math.log(long_s) - math.log(short_s)) / (z_long - z_short)
    if sigma <= 0.0:
        raise FitError("fitted sigma is not positive (are the quantiles inverted?)")
    mu = math.log(short_s) - z_short * sigma
    return mu, sigma


# ---------------------------------------------------------------------------
# sampling

def sample_interarrival(rng: np.random.Generator, mean_s: float) -> float:
    return float(rng.exponential(mean_s))


def sample_data_volumes(
    rng: np.random.Generator, model: TrafficModel, n: int
) -> np.ndarray:
    """Pareto volumes in bits, clipped at the volume cap."""
    raw = (rng.pareto(model.pareto_alpha, n) + 1.0) * model.pareto_xm_bits
    return np.minimum(raw, model.volume_cap_bits)


def sample_data_durations(
    rng: np.random.Generator, model: TrafficModel, n: int
) -> np.ndarray:
    return rng.lognormal(model.lognorm_mu, model.lognorm_sigma, n)


def sample_voice_durations(
    rng: np.random.Generator, model: TrafficModel, n: int
) -> np.ndarray:
    return rng.exponential(model.voice_mean_duration_s, n)


def sample_session(
    rng: np.random.Generator, model: TrafficModel, cell_id: int, start_s: float
) -> Session:
    """Draw one session: class, then volume/duration for data or holding
    time for voice.  Voice sessions run at exactly the codec rate."""
    if float(rng.random()) < model.data_fraction:
        volume = float(sample_data_volumes(rng, model, 1)[0])
        duration = float(sample_data_durations(rng, model, 1)[0])
        return Session(cell_id, "data", start_s, duration, volume / duration)
    duration = float(sample_voice_durations(rng, model, 1)[0])
    return Session(cell_id, "voice", start_s, duration, model.voice_rate_bps)


def _cell_stream(
    rng: np.random.Generator, model: TrafficModel, horizon_s: float
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Batched per-cell stream: (starts, is_data, durations, rates)."""
    mean = model.mean_interarrival_s
    expect = horizon_s / mean
    chunk = max(16, int(expect + 6.0 * math.sqrt(expect) + 8.0))
    gaps = rng.exponential(mean, chunk)
    arrivals = np.cumsum(gaps)
    while arrivals.size and arrivals[-1] < horizon_s:
        more = np.cumsum(rng.exponential(mean, chunk)) + arrivals[-1]
        arrivals = np.concatenate([arrivals, more])
    starts = arrivals[arrivals < horizon_s]

    n = starts.size
    is_data = rng.random(n) < model.data_fraction
    n_data = int(is_data.sum())
    volumes = sample_data_volumes(rng, model, n_data)
    data_dur = sample_data_durations(rng, model, n_data)
    voice_dur = sample_voice_durations(rng, model, n - n_data)

    durations = np.empty(n)
    rates = np.empty(n)
    durations[is_data] = data_dur
    rates[is_data] = volumes / data_dur
    durations[~is_data] = voice_dur
    rates[~is_data] = model.voice_rate_bps
    return starts, is_data, durations, rates


def generate_cell_sessions(
    rng: np.random.Generator,
    model: TrafficModel,
    cell_id: int,
    horizon_s: float,
) -> list[Session]:
    """All sessions of one cell with arrival times inside [0, horizon)."""
    starts, is_data, durations, rates = _cell_stream(rng, model, horizon_s)
    return [
        Session(
            cell_id,
            "data" if is_data[i] else "voice",
            float(starts[i]),
            float(durations[i]),
            float(rates[i]),
        )
        for i in range(starts.size)
    ]


# ---------------------------------------------------------------------------
# analytic helpers

def expected_data_volume_bits(model: TrafficModel) -> float:
    """E[min(V, cap)] for the fitted Pareto, in closed form."""
    a = model.pareto_alpha
    xm = model.pareto_xm_bits
    cap = model.volume_cap_bits
    body = a / (a - 1.0) * xm * (1.0 - (xm / cap) ** (a - 1.0))
    tail = xm**a * cap ** (1.0 - a)
    return body + tail


def expected_session_volume_bits(model: TrafficModel) -> float:
    """Mean bits per session across both traffic classes."""
    voice = model.voice_rate_bps * model.voice_mean_duration_s
    return (
        model.data_fraction * expected_data_volume_bits(model)
        + (1.0 - model.data_fraction) * voice
    )
