"""Shared constructors and brute-force oracles for the tests."""

import numpy as np

from covrank.core import ORDINAL, ComparisonGraph


def random_graph(rng, n, density=0.5, kind=ORDINAL):
    r = rng.standard_normal(n)
    mask = np.triu(rng.random((n, n)) < density, k=1)
    return ComparisonGraph.from_scores(r, kind=kind, mask=mask | mask.T), r


def brute_upsets(C, scores):
    n = len(scores)
    count = 0
    for i in range(n):
        for j in range(i + 1, n):
            if C[i][j] == 0:
                continue
            if (scores[i] > scores[j] and C[i][j] < 0) or (scores[i] < scores[j] and C[i][j] > 0):
                count += 1
    return count


def brute_hsic(K, G):
    n = len(K)
    H = [[(1.0 if a == b else 0.0) - 1.0 / n for b in range(n)] for a in range(n)]

    def mul(A, B):
        return [[sum(A[i][k] * B[k][j] for k in range(n)) for j in range(n)] for i in range(n)]

    M = mul(mul(mul(K, H), G), H)
    return sum(M[i][i] for i in range(n)) / n ** 2
