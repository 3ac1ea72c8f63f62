"""Pure numpy versions of the compiled kernels in ``_kernels.pyx``."""
import math

import numpy as np

_U_CHUNK = 4096
_T_CHUNK = 1 << 20


def subset_nonhit_sum(masks, d, w_smooth, w0, w1):
    """Sum over u of w_smooth^(d-|u|) * sum over non-hit v in u of w0^|v| w1^(|u|-|v|).

    ``masks`` holds one bit pattern per node: bit j set means coordinate j is
    on the low side of the decomposition point. Node k hits the pair (u, v)
    iff ``masks[k] & u == v``.
    """
    masks = np.ascontiguousarray(masks, dtype=np.uint64)
    binom = np.array([[math.comb(m, k) for k in range(d + 1)] for m in range(d + 1)], dtype=float)
    pw = np.array([[w0 ** k * w1 ** (m - k) if k <= m else 0.0 for k in range(d + 1)]
                   for m in range(d + 1)])
    ws = np.array([w_smooth ** (d - m) for m in range(d + 1)])
    terms = []
    for start in range(0, 1 << d, _U_CHUNK):
        us = np.arange(start, min(start + _U_CHUNK, 1 << d), dtype=np.uint64)
        size = np.bitwise_count(us).astype(np.intp)
        if masks.size:
            proj = np.sort(masks[None, :] & us[:, None], axis=1)
            fresh = np.ones(proj.shape, dtype=bool)
            fresh[:, 1:] = proj[:, 1:] != proj[:, :-1]
            pc = np.bitwise_count(proj).astype(np.intp)
            rows = np.broadcast_to(np.arange(len(us))[:, None], proj.shape)
            cnt = np.zeros((len(us), d + 1))
            np.add.at(cnt, (rows[fresh], pc[fresh]), 1.0)
        else:
            cnt = np.zeros((len(us), d + 1))
        inner = np.sum((binom[size] - cnt) * pw[size], axis=1)
        terms.append(ws[size] * inner)
    return math.fsum(np.concatenate(terms))


def abs_local_discrepancy_power(nodes, t, a, quadrant, p):
    """|local discrepancy|^p at every row of ``t``."""
    nodes = np.asarray(nodes, dtype=float)
    t = np.asarray(t, dtype=float)
    N, d = nodes.shape
    out = np.empty(len(t))
    step = max(1, _T_CHUNK // max(N * d, 1))
    for s in range(0, len(t), step):
        tt = t[s:s + step]
        if quadrant:
            vol = np.prod(np.where(tt < a, tt, 1.0 - tt), axis=1)
        else:
            vol = np.prod(np.abs(tt - a), axis=1)
        if N:
            y = nodes[None, :, :]
            tc = tt[:, None, :]
            if quadrant:
                inside = np.where(tc < a, y < tc, y >= tc)
            else:
                inside = (np.minimum(tc, a) <= y) & (y < np.maximum(tc, a))
            count = np.all(inside, axis=2).sum(axis=1)
            disc = count / N - vol
        else:
            disc = -vol
        out[s:s + step] = np.abs(disc) ** p
    return out
