from __future__ import annotations

import logging

import numpy as np
import pandas as pd

from diva.relation import Clustering, Relation

logger = logging.getLogger(__name__)


def qi_codes(r: Relation) -> np.ndarray:
    """Integer matrix of QI values, one row per tuple in relation order."""
    if not r.schema.qi_positions:
        return np.zeros((len(r), 0), dtype=np.int64)
    columns = []
    for p in r.schema.qi_positions:
        codes, _ = pd.factorize(pd.Series([row[p] for row in r.rows], dtype=object))
        columns.append(codes)
    return np.column_stack(columns).astype(np.int64)


def _stars(size: int, constant: np.ndarray) -> int:
    return size * int((~constant).sum())


def anonymize_kmember(r: Relation, k: int, seed: int = 0) -> Clustering:
    """
    Greedy k-member clustering for suppression.

    The first cluster is seeded with the `seed mod n`-th tuple by id. Every later
    seed is the unassigned tuple disagreeing with the previous seed on the most
    QI attributes. A cluster grows by the unassigned tuple that breaks the fewest
    of its still-constant attributes until it holds k tuples. Fewer than k
    leftovers each join the cluster whose star count grows least.

    Parameters:
        r (Relation): The tuples to cluster, usually the residual left by the diverse clustering
        k (int): Minimum cluster size
        seed (int): Picks the first seed tuple

    Returns:
        clustering (Clustering): Clusters covering every tuple of r
    """
    n = len(r)
    if n == 0:
        return Clustering()
    if n < k:
        logger.warning("Only %s tuples left for k=%s; they form one cluster and lose every QI value", n, k)
        return Clustering.of(r.ids)

    order = np.argsort(np.asarray(r.ids), kind="stable")
    ids = np.asarray(r.ids)[order]
    codes = qi_codes(r)[order]

    # the pool holds unassigned positions into ids/codes, kept in id order
    pool = np.arange(n)
    members, references, constants = [], [], []
    previous = None
    while len(pool) >= k:
        pool_codes = codes[pool]
        if previous is None:
            pick = seed % n
        else:
            distance = (pool_codes != codes[previous]).sum(axis=1)
            pick = int(np.argmax(distance))
        start = int(pool[pick])
        reference = codes[start]
        constant = np.ones(codes.shape[1], dtype=bool)
        available = np.ones(len(pool), dtype=bool)
        available[pick] = False
        cluster = [start]
        mismatch = pool_codes != reference
        while len(cluster) < k:
            cost = (mismatch & constant).sum(axis=1)
            cost[~available] = codes.shape[1] + 1
            best = int(np.argmin(cost))
            available[best] = False
            cluster.append(int(pool[best]))
            constant &= ~mismatch[best]
        pool = pool[available]
        members.append(cluster)
        references.append(reference)
        constants.append(constant)
        previous = start

    for position in pool:
        increase = []
        for cluster, reference, constant in zip(members, references, constants):
            joined = constant & (codes[position] == reference)
            increase.append(_stars(len(cluster) + 1, joined) - _stars(len(cluster), constant))
        # clusters were built in order of their seeds, ties go to the earliest one
        best = int(np.argmin(increase))
        members[best].append(int(position))
        constants[best] = constants[best] & (codes[position] == references[best])

    logger.debug("k-member built %s clusters over %s tuples", len(members), n)
    return Clustering(frozenset(frozenset(int(ids[p]) for p in cluster) for cluster in members))
