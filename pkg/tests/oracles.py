"""Independent reference implementations used by the test suite.

These stay dumb plain-Python loops on purpose: they are the oracles the
vectorized library code is checked against, so they must not share any code
with it.
"""


def naive_fuse(cnn, affordance, prior):
    """Product, divide by prior where positive, normalize, argmax (low tie).

    Returns (posterior list, decision index, fallback flag); an all-zero
    product falls back to the affordance argmax.
    """
    k = len(cnn)
    raw = [cnn[i] * affordance[i] for i in range(k)]
    raw = [r / prior[i] if r > 0 else 0.0 for i, r in enumerate(raw)]
    total = sum(raw)
    if total == 0.0:
        best = max(affordance)
        decision = next(i for i, a in enumerate(affordance) if a == best)
        return list(affordance), decision, True
    posterior = [r / total for r in raw]
    best = max(posterior)
    decision = next(i for i, p in enumerate(posterior) if p == best)
    return posterior, decision, False


def population_std(values):
    """Divide-by-m standard deviation of a plain list."""
    m = len(values)
    mean = sum(values) / m
    return (sum((v - mean) ** 2 for v in values) / m) ** 0.5
