"""Pure-Python kernels: tree shape generation and adjacency filling.

The compiled module ``_kernels`` implements the same two functions with the
same arguments and consumes uniforms in the same order, so both produce
identical shapes.

Shapes are generated with canonical labels: every subtree owns a contiguous
range of leaves.  A shape is returned as parallel item arrays in preorder:
``kind`` (LEAF, JOIN, UNION, PRIME, PATH), ``lo``, ``size``, ``parent`` and
``aux`` (offset in ``perm_out`` of ``[rep, perm...]`` for finite primes).

Every random choice is an inverse-CDF lookup ``x = u * total`` over the
outcomes in a fixed order.  When ``x`` lands within ``guard * total`` of a
cell boundary the float tables cannot decide; the kernel then either calls
``resolve(kind, params, index_of_u)`` or stops with ``AMBIGUOUS``.
"""

from __future__ import annotations

OK = 0
NEED_MORE = 1
AMBIGUOUS = 2

LEAF = -1
JOIN = 0
UNION = 1
PRIME = 2
PATH = 3

# table rows
ROW_A, ROW_S, ROW_T, ROW_E, ROW_PI = 0, 1, 2, 3, 4
ROW_EXTRA = 5  # u_1..u_K (finite) or w_0..w_4 (paths)

# decision kinds passed to the resolver
D_TOP, D_NOT, D_SET_FIRST, D_SET_REST, D_PRIME_K, D_REP, D_PERM, D_SETK, D_SEQ = range(9)

# task codes
_T, _NOT, _LINSET, _PRIME, _SETK, _SEQ = range(6)


class _Stop(Exception):
    def __init__(self, status):
        self.status = status


def zigzag(lo: int, hi: int):
    """``lo, hi, lo+1, hi-1, ...``: both tails of the split distributions first."""
    while lo <= hi:
        yield lo
        if hi != lo:
            yield hi
        lo += 1
        hi -= 1


def generate_shape(tab, paths, sizes, size_weights, rep_offsets, rep_weights, n, uniforms, guard,
                   kind, lo_out, size_out, parent_out, aux_out, perm_out, resolve=None):
    """Generate one shape of size ``n``; returns ``(status, items, perm_len, used)``."""
    a, s, t, e, pi = (list(tab[r]) for r in range(5))
    extra = [list(tab[r]) for r in range(ROW_EXTRA, len(tab))]
    sizes = list(sizes)
    size_weights = list(size_weights)
    nu = len(uniforms)
    state = {"u": 0, "items": 0, "perm": 0}

    def draw():
        i = state["u"]
        if i >= nu:
            raise _Stop(NEED_MORE)
        state["u"] = i + 1
        return uniforms[i], i

    def pick(outcomes, weight, total, dkind, params):
        u, ui = draw()
        x = u * total
        g = guard * total
        cum = 0.0
        for m in outcomes:
            w = weight(m)
            nxt = cum + w
            if x < nxt:
                if x - cum < g or nxt - x < g:
                    break
                return m
            cum = nxt
        if resolve is None:
            raise _Stop(AMBIGUOUS)
        return resolve(dkind, params, ui)

    def emit(k, lo, size, parent, aux=-1):
        i = state["items"]
        kind[i] = k
        lo_out[i] = lo
        size_out[i] = size
        parent_out[i] = parent
        aux_out[i] = aux
        state["items"] = i + 1
        return i

    stack = [(_T, n, 0, -1, 0, 0)]
    try:
        while stack:
            task, m, lo, par, x1, x2 = stack.pop()
            if task == _T:
                if m == 1:
                    emit(LEAF, lo, 1, par)
                elif pick((0, 1), lambda c: a[m] if c == 0 else s[m], t[m], D_TOP, (m,)) == 0:
                    stack.append((_NOT, m, lo, par, JOIN, 0))
                else:
                    node = emit(JOIN, lo, m, par)
                    stack.append((_LINSET, m, lo, node, JOIN, 1))
            elif task == _NOT:
                if m == 1:
                    emit(LEAF, lo, 1, par)
                elif pick((0, 1), lambda c: pi[m] if c == 0 else s[m], a[m], D_NOT, (m,)) == 0:
                    stack.append((_PRIME, m, lo, par, 0, 0))
                else:
                    dec = UNION if x1 == JOIN else JOIN
                    node = emit(dec, lo, m, par)
                    stack.append((_LINSET, m, lo, node, dec, 1))
            elif task == _LINSET:
                if m == 0:
                    continue
                first = x2
                hi = m - 1 if first else m
                total = s[m] if first else e[m]
                c = pick(zigzag(1, hi), lambda j: j / m * a[j] * e[m - j], total,
                         D_SET_FIRST if first else D_SET_REST, (m,))
                stack.append((_LINSET, m - c, lo + c, par, x1, 0))
                stack.append((_NOT, c, lo, par, x1, 0))
            elif task == _PRIME:
                if paths:
                    node = emit(PATH, lo, m, par)
                    stack.append((_SEQ, m, lo, node, 4, 0))
                    continue
                idx = pick(range(len(sizes)), lambda i: size_weights[i] * extra[sizes[i] - 1][m] if sizes[i] <= m else 0.0,
                           pi[m], D_PRIME_K, (m,))
                k = sizes[idx]
                r0, r1 = rep_offsets[idx], rep_offsets[idx + 1]
                rtot = sum(rep_weights[r0:r1])
                rep = pick(range(r0, r1), lambda r: rep_weights[r], rtot, D_REP, (idx,))
                off = state["perm"]
                perm_out[off] = rep
                perm = list(range(k))
                for i in range(k - 1, 0, -1):
                    j = pick(range(i + 1), lambda _: 1.0, float(i + 1), D_PERM, (i + 1,))
                    perm[i], perm[j] = perm[j], perm[i]
                for i in range(k):
                    perm_out[off + 1 + i] = perm[i]
                state["perm"] = off + 1 + k
                node = emit(PRIME, lo, m, par, off)
                stack.append((_SETK, m, lo, node, k, 0))
            elif task == _SETK:
                k = x1
                if k == 1:
                    stack.append((_T, m, lo, par, 0, 0))
                    continue
                u_prev = extra[k - 2]
                c = pick(zigzag(1, m - k + 1), lambda j: j / m * t[j] * u_prev[m - j], extra[k - 1][m],
                         D_SETK, (m, k))
                stack.append((_SETK, m - c, lo + c, par, k - 1, 0))
                stack.append((_T, c, lo, par, 0, 0))
            else:  # _SEQ
                j = x1
                if m == 0:
                    continue
                w_prev = extra[max(j - 1, 0)]
                c = pick(zigzag(1, m - max(j - 1, 0)), lambda i: t[i] * w_prev[m - i], extra[j][m],
                         D_SEQ, (m, j))
                stack.append((_SEQ, m - c, lo + c, par, max(j - 1, 0), 0))
                stack.append((_T, c, lo, par, 0, 0))
    except _Stop as stop:
        return stop.status, state["items"], state["perm"], state["u"]
    return OK, state["items"], state["perm"], state["u"]


def fill_adjacency(adj, n_items, kind, lo, size, parent, aux, perm_data, rep_adj, rep_k):
    """Write the edges of a canonical shape into the zeroed square array ``adj``.

    Each pair of leaves is written once, at the node where they separate.
    """
    children: list[list[int]] = [[] for _ in range(n_items)]
    for i in range(1, n_items):
        children[parent[i]].append(i)
    for i in range(n_items):
        k = kind[i]
        if k == -1:
            continue
        ch = children[i]
        if k == 0:
            end = lo[i] + size[i]
            for c in ch:
                a0, a1 = lo[c], lo[c] + size[c]
                if a1 < end:
                    adj[a0:a1, a1:end] = 1
                    adj[a1:end, a0:a1] = 1
        elif k == 3:
            for c, d in zip(ch, ch[1:]):
                a0, a1 = lo[c], lo[c] + size[c]
                b0, b1 = lo[d], lo[d] + size[d]
                adj[a0:a1, b0:b1] = 1
                adj[b0:b1, a0:a1] = 1
        elif k == 2:
            off = aux[i]
            rep = perm_data[off]
            kk = len(ch)
            perm = perm_data[off + 1 : off + 1 + kk]
            g = rep_adj[rep]
            for x in range(kk):
                for y in range(x + 1, kk):
                    if g[perm[x] * rep_k + perm[y]]:
                        c, d = ch[x], ch[y]
                        a0, a1 = lo[c], lo[c] + size[c]
                        b0, b1 = lo[d], lo[d] + size[d]
                        adj[a0:a1, b0:b1] = 1
                        adj[b0:b1, a0:a1] = 1
