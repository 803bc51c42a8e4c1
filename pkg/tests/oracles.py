"""Independent reference implementations used only to check the package.

Everything here is deliberately written with different tools than the
library code (heapq Dijkstra instead of accumulation during growth,
closed-form / brentq fits instead of bisection, scipy quadrature instead
of closed-form means) so that agreement between the two routes is
meaningful.
"""

from __future__ import annotations

import heapq
import math

from scipy import integrate, optimize, stats


def dijkstra_from_hub(n_nodes: int, edges, hub: int = 0) -> dict[int, float]:
    """Shortest path lengths from the hub over an undirected edge list."""
    adj: dict[int, list[tuple[int, float]]] = {i: [] for i in range(n_nodes)}
    for a, b, w in edges:
        adj[a].append((b, w))
        adj[b].append((a, w))
    dist = {hub: 0.0}
    heap = [(0.0, hub)]
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist.get(u, math.inf):
            continue
        for v, w in adj[u]:
            nd = d + w
            if nd < dist.get(v, math.inf):
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return dist


def pareto_alpha_closed_form(top_q: float = 0.1, top_share: float = 0.9) -> float:
    """Shape for which the top q of a Pareto mass carries `top_share`."""
    return 1.0 / (1.0 - math.log(top_share) / math.log(top_q))


def pareto_alpha_brentq(top_q: float = 0.1, top_share: float = 0.9) -> float:
    f = lambda a: top_q ** (1.0 - 1.0 / a) - top_share
    return optimize.brentq(f, 1.0 + 1e-12, 50.0, xtol=1e-14)


def pareto_xm(alpha: float, small_bits: float = 10_000.0, p_small: float = 0.80) -> float:
    return small_bits * (1.0 - p_small) ** (1.0 / alpha)


def lognorm_two_quantile(
    q1: float = 0.8, x1_kb: float = 11.0, q2: float = 0.999, x2_kb: float = 200.0
) -> tuple[float, float]:
    z1 = stats.norm.ppf(q1)
    z2 = stats.norm.ppf(q2)
    sigma = (math.log(x2_kb) - math.log(x1_kb)) / (z2 - z1)
    mu = math.log(x1_kb) - z1 * sigma
    return mu, sigma


def clipped_pareto_mean_quad(alpha: float, xm: float, cap: float) -> float:
    """E[min(V, cap)] for V ~ Pareto(alpha, xm), by quadrature."""
    pdf = lambda x: alpha * xm**alpha / x ** (alpha + 1.0)
    body, _ = integrate.quad(pdf, xm, cap, points=[xm])
    weighted, _ = integrate.quad(lambda x: x * pdf(x), xm, cap, limit=200)
    tail = (xm / cap) ** alpha
    return weighted + cap * tail


def expected_session_volume_quad(
    alpha: float,
    xm: float,
    cap: float,
    data_fraction: float = 0.97,
    voice_rate_bps: float = 128_000.0,
    voice_mean_s: float = 100.0,
) -> float:
    data = clipped_pareto_mean_quad(alpha, xm, cap)
    voice = voice_rate_bps * voice_mean_s
    return data_fraction * data + (1.0 - data_fraction) * voice
