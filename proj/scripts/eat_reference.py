#!/usr/bin/env python3
"""Independent arithmetic for the accumulated-entropy bound.

Evaluates
    m*f(s) - sqrt(m)*V*sqrt(log2(2/(eps^2 p^2)))
with V = 2*(log2(2*dZ+1) + |slope|) at high precision, for the parameter
triples frozen into the test suite. Run to regenerate the golden values.
"""

import mpmath as mp

mp.mp.dps = 50


def tradeoff(kind, **kw):
    if kind == "llha-q":
        b, B, c = kw["b"], kw["B"], kw["c"]
        slope = b / (b - 1) * B / 2
        intercept = -1 / (b - 1) * B / 2 - c
    elif kind == "xhog-ideal":
        n, c2 = kw["n"], kw["c2"]
        slope = mp.mpf(n)
        intercept = -mp.mpf("1.01") * n - c2
    elif kind == "xhog-general":
        n, eta, c2 = kw["n"], kw["eta"], kw["c2"]
        slope = (1 - mp.mpf(eta)) * n
        intercept = -(1 - mp.mpf(eta)) * n - c2 * mp.log(n, 2)
    else:
        raise ValueError(kind)
    return slope, intercept


def bound(kind, m, stat, d_z, p, eps, **kw):
    slope, intercept = tradeoff(kind, **kw)
    v = 2 * (mp.log(2 * d_z + 1, 2) + abs(slope))
    log_term = mp.log(2 / (mp.mpf(eps) ** 2 * mp.mpf(p) ** 2), 2)
    alpha = 1 + mp.sqrt(4 / (m * v * v) * log_term)
    assert alpha < 1 + 2 / v, "m too small for (p, eps)"
    value = m * (slope * stat + intercept) - mp.sqrt(m) * v * mp.sqrt(log_term)
    return max(mp.mpf(0), value), v, alpha


CASES = [
    ("xhog-general", dict(m=10000, stat=mp.mpf("1.5"), d_z=1024, p=mp.mpf("0.9"),
                          eps=mp.mpf(2) ** -32, n=10, eta=mp.mpf("0.01"), c2=0)),
    ("xhog-ideal", dict(m=5000, stat=mp.mpf("1.6"), d_z=4096, p=mp.mpf("0.95"),
                        eps=mp.mpf(2) ** -20, n=12, c2=0)),
    ("llha-q", dict(m=20000, stat=mp.mpf("0.995"), d_z=1024, p=mp.mpf("0.9"),
                    eps=mp.mpf(2) ** -32, b=mp.mpf("1.5"), B=mp.mpf("4.9"), c=0)),
]

if __name__ == "__main__":
    for kind, kw in CASES:
        value, v, alpha = bound(kind, **kw)
        print(f"{kind}: bits={mp.nstr(value, 17)} V={mp.nstr(v, 17)} alpha={mp.nstr(alpha, 17)}")
