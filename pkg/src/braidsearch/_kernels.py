"""Compiled inner loops for Garside normal forms.

A braid is held as ``Δ^inf · p_1 ⋯ p_k`` where every ``p_j`` is a permutation
braid stored as a row of a 2-D int32 array in 0-indexed one-line notation
(``row[i]`` is the image of ``i``).  Rows are never the identity or Δ, and
consecutive rows are left-weighted.  ``inf`` may be any integer here; the
public :class:`~braidsearch.braid.NormalForm` converts to the ``Δ^{-r}`` form.

Crossing convention: the positive word ``σ_{i1} ⋯ σ_{ik}`` maps to the product
of transpositions ``s_{i1} ∘ ⋯ ∘ s_{ik}``.  The finishing set of a row is its
descent set, the starting set is the descent set of its inverse.

Letters are signed 1-indexed Artin generators, exactly as in the text format.
"""

from __future__ import annotations

import numpy as np
from numba import njit

DTYPE = np.int32


@njit(cache=True)
def _is_identity(p):
    for i in range(p.shape[0]):
        if p[i] != i:
            return False
    return True


@njit(cache=True)
def _is_delta(p):
    n = p.shape[0]
    for i in range(n):
        if p[i] != n - 1 - i:
            return False
    return True


@njit(cache=True)
def _tau_inplace(p):
    n = p.shape[0]
    tmp = p.copy()
    for i in range(n):
        p[i] = n - 1 - tmp[n - 1 - i]


@njit(cache=True)
def _left_weight(a, b):
    """Move the meet of (complement of ``a``) and ``b`` from ``b`` into ``a``.

    Works in place and returns True when anything moved.  Generators are moved
    one at a time; afterwards finishing_set(a) ⊇ starting_set(b).
    """
    n = a.shape[0]
    binv = np.empty(n, DTYPE)
    for i in range(n):
        binv[b[i]] = i
    moved = False
    i = 0
    while i < n - 1:
        if a[i] < a[i + 1] and binv[i] > binv[i + 1]:
            t = a[i]
            a[i] = a[i + 1]
            a[i + 1] = t
            t = binv[i]
            binv[i] = binv[i + 1]
            binv[i + 1] = t
            moved = True
            if i > 0:
                i -= 1
            else:
                i += 1
        else:
            i += 1
    if moved:
        for j in range(n):
            b[binv[j]] = j
    return moved


@njit(cache=True)
def _strip(fac, k):
    """Drop trailing identities and count leading Δ rows; return (lo, k)."""
    while k > 0 and _is_identity(fac[k - 1]):
        k -= 1
    lo = 0
    while lo < k and _is_delta(fac[lo]):
        lo += 1
    return lo, k


@njit(cache=True)
def _compact(fac, inf, k):
    lo, k = _strip(fac, k)
    if lo > 0:
        for j in range(lo, k):
            fac[j - lo, :] = fac[j, :]
        k -= lo
        inf += lo
    return inf, k


@njit(cache=True)
def _rmul_simple(fac, inf, k, s):
    fac[k, :] = s
    k += 1
    j = k - 2
    while j >= 0:
        if not _left_weight(fac[j], fac[j + 1]):
            break
        j -= 1
    return _compact(fac, inf, k)


@njit(cache=True)
def _lmul_simple(fac, inf, k, s):
    """Left-multiply by ``s`` already expressed after Δ^inf (twist applied by caller)."""
    if _is_identity(s):
        return inf, k
    carry = s.copy()
    done = False
    for j in range(k):
        if not _left_weight(carry, fac[j]):
            for t in range(k, j, -1):
                fac[t, :] = fac[t - 1, :]
            fac[j, :] = carry
            k += 1
            done = True
            break
        tmp = fac[j].copy()
        fac[j, :] = carry
        carry = tmp
        if _is_identity(carry):
            done = True
            break
    if not done:
        fac[k, :] = carry
        k += 1
    return _compact(fac, inf, k)


@njit(cache=True)
def _generator(n, i):
    p = np.arange(n).astype(DTYPE)
    p[i - 1] = i
    p[i] = i - 1
    return p


@njit(cache=True)
def _delta_over(s):
    """The simple element D with D·s = Δ, i.e. permutation w0 ∘ s⁻¹."""
    n = s.shape[0]
    d = np.empty(n, DTYPE)
    for j in range(n):
        d[s[j]] = n - 1 - j
    return d


@njit(cache=True)
def _rmul_signed(fac, inf, k, sign, s):
    if sign > 0:
        return _rmul_simple(fac, inf, k, s)
    n = fac.shape[1]
    if k > 0:
        # s⁻¹ cancels directly when s right-divides the last factor
        last = fac[k - 1]
        q = np.empty(n, DTYPE)
        for j in range(n):
            q[s[j]] = last[j]
        if inversions(q) == inversions(last) - inversions(s):
            fac[k - 1, :] = q
            if _is_identity(q):
                k -= 1
            return inf, k
    # x s⁻¹ = Δ^{inf-1} τ(x) D with D·s = Δ
    for j in range(k):
        _tau_inplace(fac[j])
    return _rmul_simple(fac, inf - 1, k, _delta_over(s))


@njit(cache=True)
def _lmul_signed(fac, inf, k, sign, s):
    if sign > 0:
        t = s.copy()
    else:
        # s⁻¹ Δ^inf P = Δ^{inf-1} τ^inf(D) P with D·s = Δ
        t = _delta_over(s)
    if inf % 2 != 0:
        _tau_inplace(t)
    if sign > 0:
        return _lmul_simple(fac, inf, k, t)
    return _lmul_simple(fac, inf - 1, k, t)


@njit(cache=True)
def simple_runs(letters, n):
    """Split a letter array into maximal same-sign runs that are permutation braids.

    Returns (signs, perms): the word equals the product of perms[j]**signs[j].
    """
    m = letters.shape[0]
    signs = np.empty(m, np.int64)
    perms = np.empty((m, n), DTYPE)
    cnt = 0
    j = 0
    while j < m:
        sg = 1 if letters[j] > 0 else -1
        p = np.arange(n).astype(DTYPE)
        pinv = np.arange(n).astype(DTYPE)
        while j < m and (letters[j] > 0) == (sg > 0):
            i = abs(letters[j]) - 1
            if sg > 0:
                # p ∘ s_i stays simple iff i is not a descent of p
                if p[i] > p[i + 1]:
                    break
                t = p[i]
                p[i] = p[i + 1]
                p[i + 1] = t
                pinv[p[i]] = i
                pinv[p[i + 1]] = i + 1
            else:
                # run so far is R⁻¹; the next letter gives (s_i ∘ R)⁻¹
                if pinv[i] > pinv[i + 1]:
                    break
                t = pinv[i]
                pinv[i] = pinv[i + 1]
                pinv[i + 1] = t
                p[pinv[i]] = i
                p[pinv[i + 1]] = i + 1
            j += 1
        signs[cnt] = sg
        perms[cnt, :] = p
        cnt += 1
    return signs[:cnt].copy(), perms[:cnt].copy()


@njit(cache=True)
def _apply(fac, inf, k, lsigns, lperms, rsigns, rperms):
    for j in range(lsigns.shape[0] - 1, -1, -1):
        inf, k = _lmul_signed(fac, inf, k, lsigns[j], lperms[j])
    for j in range(rsigns.shape[0]):
        inf, k = _rmul_signed(fac, inf, k, rsigns[j], rperms[j])
    return inf, k


@njit(cache=True)
def nf_multiply(inf, fac, left, right):
    """Normal form of ``left · (Δ^inf fac) · right`` for letter arrays ``left``, ``right``."""
    n = fac.shape[1]
    ls, lp = simple_runs(left, n)
    rs, rp = simple_runs(right, n)
    k = fac.shape[0]
    buf = np.empty((k + ls.shape[0] + rs.shape[0] + 1, n), DTYPE)
    buf[:k, :] = fac
    inf, k = _apply(buf, inf, k, ls, lp, rs, rp)
    return inf, buf[:k].copy()


@njit(cache=True)
def nf_from_letters(letters, n):
    empty = np.empty((0, n), DTYPE)
    return nf_multiply(0, empty, letters[:0], letters)


@njit(cache=True)
def inversions(p):
    """Inversion count via a Fenwick tree over values."""
    n = p.shape[0]
    tree = np.zeros(n + 1, np.int64)
    total = 0
    for j in range(n - 1, -1, -1):
        v = p[j]
        # count values < v already seen (to the right)
        x = v
        s = 0
        while x > 0:
            s += tree[x]
            x -= x & (-x)
        total += s
        x = v + 1
        while x <= n:
            tree[x] += 1
            x += x & (-x)
    return total


@njit(cache=True)
def nf_lengths(inf, fac):
    """Return (Garside length, reduced Garside length)."""
    n = fac.shape[1]
    half = n * (n - 1) // 2
    k = fac.shape[0]
    total = 0
    if inf >= 0:
        for j in range(k):
            total += inversions(fac[j])
        total += inf * half
        return total, total
    r = -inf
    lg = r * half
    lrg = 0
    for j in range(k):
        c = inversions(fac[j])
        lg += c
        if j < r:
            lrg += half - c
        else:
            lrg += c
    if r > k:
        lrg += (r - k) * half
    return lg, lrg


@njit(cache=True)
def _conjugate_into(inf, fac, signs, perms, buf):
    """g⁻¹·c·g where g = prod perms[j]**signs[j]; result left in ``buf``."""
    k = fac.shape[0]
    buf[:k, :] = fac
    m = signs.shape[0]
    for j in range(m):
        inf, k = _lmul_signed(buf, inf, k, -signs[j], perms[j])
    for j in range(m):
        inf, k = _rmul_signed(buf, inf, k, signs[j], perms[j])
    return inf, k


@njit(cache=True)
def batch_conjugate_lengths(infs, offsets, facs, cand_offsets, cand_signs, cand_perms):
    """Lengths of g⁻¹·c·g for every candidate g and every packed braid c.

    Candidates are packed simple-run sequences (see :func:`simple_runs`).
    Returns two int64 arrays of shape (candidates, braids): Garside and
    reduced Garside lengths.
    """
    nb = infs.shape[0]
    nc = cand_offsets.shape[0] - 1
    n = facs.shape[1]
    lg = np.empty((nc, nb), np.int64)
    lrg = np.empty((nc, nb), np.int64)
    maxk = 0
    for b in range(nb):
        maxk = max(maxk, offsets[b + 1] - offsets[b])
    maxg = 0
    for c in range(nc):
        maxg = max(maxg, cand_offsets[c + 1] - cand_offsets[c])
    buf = np.empty((maxk + 2 * maxg + 1, n), DTYPE)
    for c in range(nc):
        sg = cand_signs[cand_offsets[c]:cand_offsets[c + 1]]
        pm = cand_perms[cand_offsets[c]:cand_offsets[c + 1]]
        for b in range(nb):
            inf, k = _conjugate_into(infs[b], facs[offsets[b]:offsets[b + 1]], sg, pm, buf)
            x, y = nf_lengths(inf, buf[:k])
            lg[c, b] = x
            lrg[c, b] = y
    return lg, lrg


@njit(cache=True)
def batch_conjugate(infs, offsets, facs, signs, perms):
    """Conjugate every packed braid c to g⁻¹·c·g; returns the new packed arrays."""
    nb = infs.shape[0]
    n = facs.shape[1]
    maxk = 0
    for b in range(nb):
        maxk = max(maxk, offsets[b + 1] - offsets[b])
    buf = np.empty((maxk + 2 * signs.shape[0] + 1, n), DTYPE)
    new_infs = np.empty(nb, np.int64)
    new_offsets = np.zeros(nb + 1, np.int64)
    out = np.empty((offsets[nb] + nb * (2 * signs.shape[0] + 1), n), DTYPE)
    for b in range(nb):
        inf, k = _conjugate_into(infs[b], facs[offsets[b]:offsets[b + 1]], signs, perms, buf)
        new_infs[b] = inf
        new_offsets[b + 1] = new_offsets[b] + k
        out[new_offsets[b]:new_offsets[b + 1], :] = buf[:k]
    return new_infs, new_offsets, out[:new_offsets[nb]].copy()
