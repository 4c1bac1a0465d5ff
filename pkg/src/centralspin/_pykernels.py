"""Pure numpy implementation of the per-level sums.

Vectorised over the time axis; the loop over levels keeps the same order and
the same Neumaier compensation as the compiled kernel.
"""
import numpy as np


def _acc(s, c, x):
    t = s + x
    c += np.where(np.abs(s) >= np.abs(x), (s - t) + x, (x - t) + s)
    s[...] = t


def evaluate(times, eta, eta_p, amp_a, amp_b, weight, ratio_a, ratio_b, branch, derivatives):
    times = np.ascontiguousarray(times, dtype=np.float64)
    nout = 8 if derivatives else 4
    s = np.zeros((8, times.size))
    c = np.zeros((8, times.size))
    tt = 0.25 * times * times
    th = 0.5 * times
    for j in range(len(eta)):
        e1 = eta[j]
        e2 = eta_p[j]
        x1 = 0.5 * e1 * times
        x2 = 0.5 * e2 * times
        s1 = np.sin(x1)
        c1 = np.cos(x1)
        s2 = np.sin(x2)
        c2 = np.cos(x2)
        a = ratio_a[j]
        b = ratio_b[j]
        w = weight[j]

        _acc(s[0], c[0], amp_a[j] * s1 * s1 / (e1 * e1) if e1 > 0.0 else amp_a[j] * tt)
        _acc(s[1], c[1], amp_b[j] * s2 * s2 / (e2 * e2) if e2 > 0.0 else amp_b[j] * tt)

        pre = c1 * c2 + branch * a * b * s1 * s2
        pim = branch * b * c1 * s2 - a * s1 * c2
        _acc(s[2], c[2], w * pre)
        _acc(s[3], c[3], w * pim)

        if derivatives:
            _acc(s[4], c[4], amp_a[j] * s1 * c1 / e1 if e1 > 0.0 else amp_a[j] * th)
            _acc(s[5], c[5], amp_b[j] * s2 * c2 / e2 if e2 > 0.0 else amp_b[j] * th)
            h1 = 0.5 * e1
            h2 = 0.5 * e2
            ha = a * h1
            hb = b * h2
            dre = (-h1 * s1 * c2 + branch * ha * b * c1 * s2
                   - h2 * c1 * s2 + branch * a * hb * s1 * c2)
            dim = (-branch * h1 * b * s1 * s2 - ha * c1 * c2
                   + branch * hb * c1 * c2 + a * h2 * s1 * s2)
            _acc(s[6], c[6], w * dre)
            _acc(s[7], c[7], w * dim)
    return (s + c)[:nout]
