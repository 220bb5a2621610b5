"""Reference values frozen into the Rust test suites.

Independent of the Rust implementation: trigram cosine is recomputed from the
hash definition, the chi-square and studentized-range tails come from scipy.
Run: python3 scripts/oracles.py
"""
import math

import numpy as np
from scipy import stats

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
DIM = 256


def fnv1a(data: bytes) -> int:
    h = FNV_OFFSET
    for b in data:
        h ^= b
        h = (h * FNV_PRIME) & 0xFFFFFFFFFFFFFFFF
    return h


def embed(token: str):
    s = "^" + token + "$"
    v = [0.0] * DIM
    for i in range(len(s) - 2):
        v[fnv1a(s[i:i + 3].encode("utf-8")) % DIM] += 1.0
    n = math.sqrt(sum(x * x for x in v))
    return [x / n for x in v]


def cosine(a, b):
    return sum(x * y for x, y in zip(embed(a), embed(b)))


def greedy(a: str, b: str) -> float:
    ta, tb = a.split(), b.split()
    r = sum(max(cosine(x, y) for y in tb) for x in ta) / len(ta)
    p = sum(max(cosine(y, x) for x in ta) for y in tb) / len(tb)
    if r > 0 and p > 0:
        return 2 * r * p / (r + p)
    return min(r, p)


def nemenyi_sf(mean_diff, k, n):
    q = abs(mean_diff) / math.sqrt(k * (k + 1) / (6.0 * n))
    return stats.studentized_range.sf(q * math.sqrt(2), k, np.inf)


if __name__ == "__main__":
    print("abc buckets", sorted({fnv1a(t.encode()) % DIM for t in ["^ab", "abc", "bc$"]}))
    print("cos(treats, cures) = %.17g" % cosine("treats", "cures"))
    print("greedy(admitted on, was admitted on) = %.17g" % greedy("admitted on", "was admitted on"))
    print("greedy(diagnosed with, has diagnosis of) = %.17g" % greedy("diagnosed with", "has diagnosis of"))
    print("chi2(2).sf(6) = %.17g" % stats.chi2.sf(6.0, 2))
    print("chi2(3).sf(7.5) = %.17g" % stats.chi2.sf(7.5, 3))
    print("chi2(5).sf(0.3) = %.17g" % stats.chi2.sf(0.3, 5))
    print("chi2(1).sf(40) = %.17g" % stats.chi2.sf(40.0, 1))
    print("nemenyi N=3 k=3 diff=2: %.17g" % nemenyi_sf(2.0, 3, 3))
    print("nemenyi N=3 k=3 diff=1: %.17g" % nemenyi_sf(1.0, 3, 3))
    for q, k in [(1.0, 3), (3.0, 3), (3.5, 4), (5.0, 5), (0.5, 10), (2.0, 2), (8.0, 4)]:
        print("ptukey sf q=%s k=%d: %.17g" % (q, k, stats.studentized_range.sf(q, k, np.inf)))
    # friedman with ties: scipy applies the same tie correction
    m = np.array([[0.8, 0.8, 0.2, 0.1], [0.5, 0.9, 0.9, 0.9], [0.3, 0.2, 0.1, 0.0],
                  [1.0, 0.0, 0.5, 0.5], [0.2, 0.4, 0.6, 0.8]])
    r = stats.friedmanchisquare(*[m[:, j] for j in range(m.shape[1])])
    print("friedman ties: stat=%.17g p=%.17g" % (r.statistic, r.pvalue))
    print("cos(treats, treated) = %.17g" % cosine("treats", "treated"))
    print("cos(treat, treats) = %.17g" % cosine("treat", "treats"))
    print("greedy(is treated with, treated by) = %.17g" % greedy("is treated with", "treated by"))
    print("ptukey sf q=12 k=3: %.17g" % stats.studentized_range.sf(12.0, 3, np.inf))
