# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled term-dictionary kernels; same contract as _pykernels."""

from math import comb


def mul(dict a, dict b):
    cdef dict out = {}
    cdef object ka, ca, kb, cb, k, v
    for ka, ca in a.items():
        for kb, cb in b.items():
            k = ka + kb
            v = out.get(k)
            if v is None:
                out[k] = ca * cb
            else:
                out[k] = v + ca * cb
    return {k: v for k, v in out.items() if v != 0}


def add_scaled(dict acc, dict b, object scale):
    cdef object k, c, v
    for k, c in b.items():
        v = acc.get(k)
        if v is None:
            v = scale * c
        else:
            v = v + scale * c
        if v == 0:
            acc.pop(k, None)
        else:
            acc[k] = v
    return acc


def reduce_det(dict d, int s_p1, int s_m2, int s_p2, int s_m1, long mask):
    cdef dict out = {}
    cdef object k, c, v, base, kk, t, step, pair
    cdef long a, b, n, j
    cdef object one = 1
    pair = (one << s_p1) + (one << s_m2)
    step = (one << s_p2) + (one << s_m1)
    for k, c in d.items():
        a = (k >> s_p1) & mask
        if a:
            b = (k >> s_m2) & mask
            if b:
                n = a if a < b else b
                base = k - n * pair
                for j in range(n + 1):
                    kk = base + j * step
                    t = c * comb(n, j)
                    v = out.get(kk)
                    if v is None:
                        out[kk] = t
                    else:
                        out[kk] = v + t
                continue
        v = out.get(k)
        if v is None:
            out[k] = c
        else:
            out[k] = v + c
    return {k: v for k, v in out.items() if v != 0}


def derive(dict d, int shift, long mask, object add_key=0):
    cdef dict out = {}
    cdef object k, c, one = 1
    cdef long e
    # Keys exceed 64 bits, so the shift must stay in Python integers.
    one = one << shift
    for k, c in d.items():
        e = (k >> shift) & mask
        if e:
            out[k - one + add_key] = c * e
    return out


def max_degree(dict d, int nvars, int width, long mask):
    cdef long best = -1, t
    cdef object k
    for k in d:
        t = 0
        while k:
            t += k & mask
            k >>= width
        if t > best:
            best = t
    return best
