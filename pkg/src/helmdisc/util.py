"""Small shared helpers."""
import numpy as np


def pairwise_sum(values):
    """Deterministic pairwise reduction (order-independent of thread count)."""
    vals = list(values)
    if not vals:
        return 0.0
    while len(vals) > 1:
        nxt = []
        for i in range(0, len(vals) - 1, 2):
            nxt.append(vals[i] + vals[i + 1])
        if len(vals) % 2 == 1:
            nxt.append(vals[-1])
        vals = nxt
    return vals[0]


def gauss_legendre_panels(a, b, n_panels, nodes_per_panel):
    """Composite Gauss-Legendre nodes/weights on [a, b]."""
    x, w = np.polynomial.legendre.leggauss(nodes_per_panel)
    edges = np.linspace(a, b, n_panels + 1)
    nodes = []
    weights = []
    for i in range(n_panels):
        lo, hi = edges[i], edges[i + 1]
        half = 0.5 * (hi - lo)
        nodes.append(half * x + 0.5 * (hi + lo))
        weights.append(half * w)
    return np.concatenate(nodes), np.concatenate(weights)
