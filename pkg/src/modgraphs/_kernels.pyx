# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled twin of ``_kernels_py``: same arguments, same uniforms, same shapes."""

import numpy as np

cdef enum:
    OK = 0
    NEED_MORE = 1
    AMBIGUOUS = 2

cdef enum:
    T_T = 0
    T_NOT = 1
    T_LINSET = 2
    T_PRIME = 3
    T_SETK = 4
    T_SEQ = 5

cdef enum:
    K_LEAF = -1
    K_JOIN = 0
    K_UNION = 1
    K_PRIME = 2
    K_PATH = 3


cdef struct Picker:
    const double* u
    Py_ssize_t nu
    Py_ssize_t pos
    double guard
    int status


cdef inline bint _draw(Picker* p, double* out) noexcept nogil:
    if p.pos >= p.nu:
        p.status = NEED_MORE
        return False
    out[0] = p.u[p.pos]
    p.pos += 1
    return True


cdef inline bint _cell(Picker* p, double x, double g, double cum, double nxt) noexcept nogil:
    # True when x falls clearly inside [cum, nxt)
    if x - cum < g or nxt - x < g:
        p.status = AMBIGUOUS
        return False
    return True


def generate_shape(double[:, ::1] tab, bint paths, long[::1] sizes, double[::1] size_weights,
                   long[::1] rep_offsets, double[::1] rep_weights, long n, double[::1] uniforms, double guard,
                   long[::1] kind, long[::1] lo_out, long[::1] size_out, long[::1] parent_out,
                   long[::1] aux_out, long[::1] perm_out, resolve=None):
    cdef Picker pk
    pk.u = &uniforms[0] if uniforms.shape[0] > 0 else NULL
    pk.nu = uniforms.shape[0]
    pk.pos = 0
    pk.guard = guard
    pk.status = OK
    cdef Py_ssize_t cap = 4 * n + 16
    cdef long[:, ::1] stack = np.empty((cap, 6), dtype=np.int64)
    cdef long[::1] perm = np.empty(max(n, 1), dtype=np.int64)
    cdef Py_ssize_t sp = 0, items = 0, poff = 0
    cdef long task, m, lo, par, x1, x2, c, j, k, hi, idx, node, dec, r0, r1, rep, i, lo_m, hi_m, tmp, jm
    cdef double u, x, g, cum, nxt, w, total
    cdef Py_ssize_t nsizes = sizes.shape[0]
    cdef bint done
    with nogil:
        stack[0, 0] = T_T; stack[0, 1] = n; stack[0, 2] = 0; stack[0, 3] = -1; stack[0, 4] = 0; stack[0, 5] = 0
        sp = 1
        while sp > 0 and pk.status == OK:
            sp -= 1
            task = stack[sp, 0]; m = stack[sp, 1]; lo = stack[sp, 2]; par = stack[sp, 3]
            x1 = stack[sp, 4]; x2 = stack[sp, 5]
            if task == T_T or task == T_NOT:
                if m == 1:
                    kind[items] = K_LEAF; lo_out[items] = lo; size_out[items] = 1
                    parent_out[items] = par; aux_out[items] = -1; items += 1
                    continue
                if not _draw(&pk, &u):
                    break
                if task == T_T:
                    total = tab[2, m]; w = tab[0, m]
                else:
                    total = tab[0, m]; w = tab[4, m]
                x = u * total; g = guard * total
                if x < w:
                    if not _cell(&pk, x, g, 0.0, w):
                        break
                    c = 0
                else:
                    nxt = w + tab[1, m]
                    if x >= nxt or not _cell(&pk, x, g, w, nxt):
                        pk.status = AMBIGUOUS
                        break
                    c = 1
                if task == T_T:
                    if c == 0:
                        stack[sp, 0] = T_NOT; stack[sp, 1] = m; stack[sp, 2] = lo; stack[sp, 3] = par
                        stack[sp, 4] = K_JOIN; stack[sp, 5] = 0; sp += 1
                    else:
                        kind[items] = K_JOIN; lo_out[items] = lo; size_out[items] = m
                        parent_out[items] = par; aux_out[items] = -1; node = items; items += 1
                        stack[sp, 0] = T_LINSET; stack[sp, 1] = m; stack[sp, 2] = lo; stack[sp, 3] = node
                        stack[sp, 4] = K_JOIN; stack[sp, 5] = 1; sp += 1
                else:
                    if c == 0:
                        stack[sp, 0] = T_PRIME; stack[sp, 1] = m; stack[sp, 2] = lo; stack[sp, 3] = par
                        stack[sp, 4] = 0; stack[sp, 5] = 0; sp += 1
                    else:
                        dec = K_UNION if x1 == K_JOIN else K_JOIN
                        kind[items] = dec; lo_out[items] = lo; size_out[items] = m
                        parent_out[items] = par; aux_out[items] = -1; node = items; items += 1
                        stack[sp, 0] = T_LINSET; stack[sp, 1] = m; stack[sp, 2] = lo; stack[sp, 3] = node
                        stack[sp, 4] = dec; stack[sp, 5] = 1; sp += 1
            elif task == T_LINSET:
                if m == 0:
                    continue
                if x2:
                    hi = m - 1; total = tab[1, m]
                else:
                    hi = m; total = tab[3, m]
                if not _draw(&pk, &u):
                    break
                x = u * total; g = guard * total
                cum = 0.0; c = -1
                lo_m = 1; hi_m = hi
                while lo_m <= hi_m:
                    j = lo_m
                    w = (<double>j) / m * tab[0, j] * tab[3, m - j]
                    nxt = cum + w
                    if x < nxt:
                        c = j
                        break
                    cum = nxt
                    if hi_m != lo_m:
                        j = hi_m
                        w = (<double>j) / m * tab[0, j] * tab[3, m - j]
                        nxt = cum + w
                        if x < nxt:
                            c = j
                            break
                        cum = nxt
                    lo_m += 1; hi_m -= 1
                if c < 0 or not _cell(&pk, x, g, cum, nxt):
                    pk.status = AMBIGUOUS
                    break
                stack[sp, 0] = T_LINSET; stack[sp, 1] = m - c; stack[sp, 2] = lo + c; stack[sp, 3] = par
                stack[sp, 4] = x1; stack[sp, 5] = 0; sp += 1
                stack[sp, 0] = T_NOT; stack[sp, 1] = c; stack[sp, 2] = lo; stack[sp, 3] = par
                stack[sp, 4] = x1; stack[sp, 5] = 0; sp += 1
            elif task == T_PRIME:
                if paths:
                    kind[items] = K_PATH; lo_out[items] = lo; size_out[items] = m
                    parent_out[items] = par; aux_out[items] = -1; node = items; items += 1
                    stack[sp, 0] = T_SEQ; stack[sp, 1] = m; stack[sp, 2] = lo; stack[sp, 3] = node
                    stack[sp, 4] = 4; stack[sp, 5] = 0; sp += 1
                    continue
                # size of the prime decoration
                if not _draw(&pk, &u):
                    break
                total = tab[4, m]
                x = u * total; g = guard * total
                cum = 0.0; idx = -1
                for i in range(nsizes):
                    if sizes[i] <= m:
                        w = size_weights[i] * tab[4 + sizes[i], m]
                    else:
                        w = 0.0
                    nxt = cum + w
                    if x < nxt:
                        idx = i
                        break
                    cum = nxt
                if idx < 0 or not _cell(&pk, x, g, cum, nxt):
                    pk.status = AMBIGUOUS
                    break
                k = sizes[idx]
                # representative, weighted by its number of labelings
                r0 = rep_offsets[idx]; r1 = rep_offsets[idx + 1]
                total = 0.0
                for i in range(r0, r1):
                    total += rep_weights[i]
                if not _draw(&pk, &u):
                    break
                x = u * total; g = guard * total
                cum = 0.0; rep = -1
                for i in range(r0, r1):
                    nxt = cum + rep_weights[i]
                    if x < nxt:
                        rep = i
                        break
                    cum = nxt
                if rep < 0 or not _cell(&pk, x, g, cum, nxt):
                    pk.status = AMBIGUOUS
                    break
                # uniform relabeling of the representative
                for i in range(k):
                    perm[i] = i
                done = True
                i = k - 1
                while i > 0:
                    if not _draw(&pk, &u):
                        done = False
                        break
                    x = u * (i + 1)
                    jm = <long>x
                    if jm > i or not _cell(&pk, x, guard * (i + 1), <double>jm, <double>(jm + 1)):
                        pk.status = AMBIGUOUS
                        done = False
                        break
                    tmp = perm[i]; perm[i] = perm[jm]; perm[jm] = tmp
                    i -= 1
                if not done:
                    break
                perm_out[poff] = rep
                for i in range(k):
                    perm_out[poff + 1 + i] = perm[i]
                kind[items] = K_PRIME; lo_out[items] = lo; size_out[items] = m
                parent_out[items] = par; aux_out[items] = poff; node = items; items += 1
                poff += 1 + k
                stack[sp, 0] = T_SETK; stack[sp, 1] = m; stack[sp, 2] = lo; stack[sp, 3] = node
                stack[sp, 4] = k; stack[sp, 5] = 0; sp += 1
            elif task == T_SETK:
                k = x1
                if k == 1:
                    stack[sp, 0] = T_T; stack[sp, 1] = m; stack[sp, 2] = lo; stack[sp, 3] = par
                    stack[sp, 4] = 0; stack[sp, 5] = 0; sp += 1
                    continue
                if not _draw(&pk, &u):
                    break
                total = tab[4 + k, m]
                x = u * total; g = guard * total
                cum = 0.0; c = -1
                lo_m = 1; hi_m = m - k + 1
                while lo_m <= hi_m:
                    j = lo_m
                    w = (<double>j) / m * tab[2, j] * tab[3 + k, m - j]
                    nxt = cum + w
                    if x < nxt:
                        c = j
                        break
                    cum = nxt
                    if hi_m != lo_m:
                        j = hi_m
                        w = (<double>j) / m * tab[2, j] * tab[3 + k, m - j]
                        nxt = cum + w
                        if x < nxt:
                            c = j
                            break
                        cum = nxt
                    lo_m += 1; hi_m -= 1
                if c < 0 or not _cell(&pk, x, g, cum, nxt):
                    pk.status = AMBIGUOUS
                    break
                stack[sp, 0] = T_SETK; stack[sp, 1] = m - c; stack[sp, 2] = lo + c; stack[sp, 3] = par
                stack[sp, 4] = k - 1; stack[sp, 5] = 0; sp += 1
                stack[sp, 0] = T_T; stack[sp, 1] = c; stack[sp, 2] = lo; stack[sp, 3] = par
                stack[sp, 4] = 0; stack[sp, 5] = 0; sp += 1
            else:
                # sequence of at least x1 trees, table rows 5 + j hold w_j
                if m == 0:
                    continue
                j = x1 - 1 if x1 > 0 else 0
                if not _draw(&pk, &u):
                    break
                total = tab[5 + x1, m]
                x = u * total; g = guard * total
                cum = 0.0; c = -1
                lo_m = 1; hi_m = m - j
                while lo_m <= hi_m:
                    i = lo_m
                    w = tab[2, i] * tab[5 + j, m - i]
                    nxt = cum + w
                    if x < nxt:
                        c = i
                        break
                    cum = nxt
                    if hi_m != lo_m:
                        i = hi_m
                        w = tab[2, i] * tab[5 + j, m - i]
                        nxt = cum + w
                        if x < nxt:
                            c = i
                            break
                        cum = nxt
                    lo_m += 1; hi_m -= 1
                if c < 0 or not _cell(&pk, x, g, cum, nxt):
                    pk.status = AMBIGUOUS
                    break
                stack[sp, 0] = T_SEQ; stack[sp, 1] = m - c; stack[sp, 2] = lo + c; stack[sp, 3] = par
                stack[sp, 4] = j; stack[sp, 5] = 0; sp += 1
                stack[sp, 0] = T_T; stack[sp, 1] = c; stack[sp, 2] = lo; stack[sp, 3] = par
                stack[sp, 4] = 0; stack[sp, 5] = 0; sp += 1
    return pk.status, items, poff, pk.pos


def fill_adjacency(unsigned char[:, ::1] adj, long n_items, long[::1] kind, long[::1] lo, long[::1] size,
                   long[::1] parent, long[::1] aux, long[::1] perm_data, unsigned char[:, ::1] rep_adj, long rep_k):
    cdef long[::1] first = np.full(n_items, -1, dtype=np.int64)
    cdef long[::1] nxt_sib = np.full(n_items, -1, dtype=np.int64)
    cdef long[::1] last = np.full(n_items, -1, dtype=np.int64)
    cdef long[::1] ch = np.empty(max(n_items, 1), dtype=np.int64)
    cdef long i, p, c, d, k, nch, x, y, a0, a1, b0, b1, end, off, rep, u, v
    with nogil:
        for i in range(1, n_items):
            p = parent[i]
            if first[p] < 0:
                first[p] = i
            else:
                nxt_sib[last[p]] = i
            last[p] = i
        for i in range(n_items):
            k = kind[i]
            if k == K_LEAF:
                continue
            nch = 0
            c = first[i]
            while c >= 0:
                ch[nch] = c
                nch += 1
                c = nxt_sib[c]
            if k == K_JOIN:
                end = lo[i] + size[i]
                for x in range(nch):
                    c = ch[x]
                    a0 = lo[c]; a1 = a0 + size[c]
                    for u in range(a0, a1):
                        for v in range(a1, end):
                            adj[u, v] = 1
                            adj[v, u] = 1
            elif k == K_UNION:
                pass
            else:
                for x in range(nch):
                    for y in range(x + 1, nch):
                        if k == K_PATH:
                            if y != x + 1:
                                continue
                        else:
                            off = aux[i]
                            rep = perm_data[off]
                            if not rep_adj[rep, perm_data[off + 1 + x] * rep_k + perm_data[off + 1 + y]]:
                                continue
                        c = ch[x]; d = ch[y]
                        a0 = lo[c]; a1 = a0 + size[c]
                        b0 = lo[d]; b1 = b0 + size[d]
                        for u in range(a0, a1):
                            for v in range(b0, b1):
                                adj[u, v] = 1
                                adj[v, u] = 1
