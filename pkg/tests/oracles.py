"""Independent reference implementations used to check the braid kernels.

Nothing here goes through normal forms: the symmetric-group projection
composes transpositions, the Burau evaluation multiplies matrices over a
prime field and the rewriting oracle searches the Cayley-graph-style space of
words allowed by the defining relations.
"""

from __future__ import annotations

import itertools

import numpy as np

PRIME = 2_147_483_629


def perm_of_word(letters, n: int) -> tuple[int, ...]:
    """Image of the word in S_N, one-line notation, 1-indexed.

    A letter ±i acts by the transposition (i i+1); the word s_1 s_2 ... maps
    to s_1 ∘ s_2 ∘ ....
    """
    images = list(range(1, n + 1))
    for x in letters:
        i = abs(x) - 1
        # right-compose with (i i+1): swap the images at positions i, i+1
        images[i], images[i + 1] = images[i + 1], images[i]
    return tuple(images)


def burau(letters, n: int, t: int) -> np.ndarray:
    """Unreduced Burau matrix evaluated at ``t`` modulo a prime."""
    tinv = pow(t, PRIME - 2, PRIME)
    m = np.eye(n, dtype=object)
    for x in letters:
        i = abs(x) - 1
        g = np.eye(n, dtype=object)
        if x > 0:
            g[i, i], g[i, i + 1], g[i + 1, i], g[i + 1, i + 1] = (1 - t) % PRIME, t, 1, 0
        else:
            g[i, i], g[i, i + 1], g[i + 1, i], g[i + 1, i + 1] = 0, 1, tinv, (1 - tinv) % PRIME
        m = (m @ g) % PRIME
    return m


def burau_equal(u, v, n: int, points=(3, 7919, 104729)) -> bool:
    return all(np.array_equal(burau(u, n, t), burau(v, n, t)) for t in points)


# -- bounded rewriting in B_3 --------------------------------------------------


def free_reduce(word) -> tuple[int, ...]:
    out: list[int] = []
    for x in word:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def _relator_rules() -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """u -> v for every split of every cyclic rotation of r and r⁻¹, r = σ1σ2σ1σ2⁻¹σ1⁻¹σ2⁻¹."""
    r = (1, 2, 1, -2, -1, -2)
    inv = tuple(-x for x in reversed(r))
    rules = set()
    for rel in (r, inv):
        for k in range(len(rel)):
            rot = rel[k:] + rel[:k]
            for cut in range(1, len(rot)):
                u = rot[:cut]
                v = tuple(-x for x in reversed(rot[cut:]))
                rules.add((u, v))
    return sorted(rules)


class _UnionFind:
    def __init__(self):
        self.parent: dict = {}

    def find(self, x):
        self.parent.setdefault(x, x)
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def b3_rewriting_classes(max_len: int, bound: int) -> dict[tuple[int, ...], tuple[int, ...]]:
    """Group every word of length ≤ max_len by equality provable within ``bound`` letters.

    Nodes are freely reduced words of length ≤ bound; edges replace a subword
    u by v for a relator-derived rule u = v.  Two words end up in one class
    only if they are equal in B_3, and every equality whose proof stays within
    the bound is found.
    """
    rules = _relator_rules()
    alphabet = (1, -1, 2, -2)
    uf = _UnionFind()
    seen = {()}
    frontier = [()]
    # every freely reduced word of length <= bound is a node
    for _ in range(bound):
        nxt = []
        for w in frontier:
            for x in alphabet:
                if w and w[-1] == -x:
                    continue
                nw = w + (x,)
                seen.add(nw)
                nxt.append(nw)
        frontier = nxt
    for w in seen:
        for u, v in rules:
            lu = len(u)
            for i in range(len(w) - lu + 1):
                if w[i:i + lu] == u:
                    nw = free_reduce(w[:i] + v + w[i + lu:])
                    if len(nw) <= bound:
                        uf.union(w, nw)
    words = [w for k in range(max_len + 1) for w in itertools.product(alphabet, repeat=k)]
    return {w: uf.find(free_reduce(w)) for w in words}
