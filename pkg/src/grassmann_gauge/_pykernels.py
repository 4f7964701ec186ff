"""Pure-Python term-dictionary kernels.

A term dictionary maps a packed monomial (an int holding one ``width``-bit
exponent field per variable) to a nonzero coefficient. Multiplying monomials
is integer addition of keys.
"""

from math import comb


def mul(a, b):
    out = {}
    get = out.get
    for ka, ca in a.items():
        for kb, cb in b.items():
            k = ka + kb
            v = get(k)
            out[k] = ca * cb if v is None else v + ca * cb
    return {k: v for k, v in out.items() if v != 0}


def add_scaled(acc, b, scale):
    """acc += scale * b, in place; zero entries are removed."""
    for k, c in b.items():
        v = acc.get(k)
        v = scale * c if v is None else v + scale * c
        if v == 0:
            acc.pop(k, None)
        else:
            acc[k] = v
    return acc


def reduce_det(d, s_p1, s_m2, s_p2, s_m1, mask):
    """Rewrite u_+^1 u_-^2 -> 1 + u_+^2 u_-^1 to the fixed point (closed form by the binomial theorem)."""
    out = {}
    get = out.get
    one_p1 = 1 << s_p1
    one_m2 = 1 << s_m2
    step = (1 << s_p2) + (1 << s_m1)
    for k, c in d.items():
        a = (k >> s_p1) & mask
        if a:
            b = (k >> s_m2) & mask
            if b:
                n = a if a < b else b
                base = k - n * (one_p1 + one_m2)
                for j in range(n + 1):
                    kk = base + j * step
                    v = get(kk)
                    t = c * comb(n, j)
                    out[kk] = t if v is None else v + t
                continue
        v = get(k)
        out[k] = c if v is None else v + c
    return {k: v for k, v in out.items() if v != 0}


def derive(d, shift, mask, add_key=0):
    """d/dx_var of d, then multiplied by the monomial ``add_key``."""
    out = {}
    one = 1 << shift
    for k, c in d.items():
        e = (k >> shift) & mask
        if e:
            out[k - one + add_key] = c * e
    return out


def max_degree(d, nvars, width, mask):
    best = -1
    for k in d:
        t = 0
        while k:
            t += k & mask
            k >>= width
        if t > best:
            best = t
    return best
