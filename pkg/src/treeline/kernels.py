"""Integer hot kernels with a numba fast path and a pure-numpy fallback.

All geometry here is pre-scaled by a common denominator D so that every
quantity is an int64 and every comparison is exact.  The backend is chosen
by the TREELINE_BACKEND environment variable ("numba" or "numpy"); numba is
the default when importable.  `python -m treeline.bench` compares the two.

Kernel 1 (ball scan): for every pair (g, a) in a word-metric ball, decide
whether the segment [base, g.base] meets the closed N-ball around a.base
under the first action, and if so evaluate the exact squared distance of
a.base to [base, g.base] under the second action.  Only tree vertices
within floor(N) of the segment's word are generated at all; that is the
cheap prune.

Kernel 2 (pair tables): all pairwise squared orbit distances under two
actions, used by the quasi-isometry constant search.
"""

from __future__ import annotations

import math
import os
from fractions import Fraction

import numpy as np

_ENV_FLAG = "TREELINE_BACKEND"

try:
    import numba
    from numba import njit, prange

    _HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    _HAS_NUMBA = False
    prange = range

    def njit(*args, **kwargs):  # type: ignore[misc]
        def wrap(f):
            return f

        return wrap(args[0]) if args and callable(args[0]) else wrap


_backend = os.environ.get(_ENV_FLAG, "numba" if _HAS_NUMBA else "numpy").lower()
if _backend not in ("numba", "numpy"):
    raise ValueError(f"{_ENV_FLAG} must be 'numba' or 'numpy', got {_backend!r}")
if _backend == "numba" and not _HAS_NUMBA:
    _backend = "numpy"


class KernelUnsupportedError(ValueError):
    """Parameters exceed the exact int64 envelope of the fast kernels."""


def backend() -> str:
    return _backend


def set_backend(name: str) -> None:
    global _backend
    name = name.lower()
    if name not in ("numba", "numpy"):
        raise ValueError("backend must be 'numba' or 'numpy'")
    if name == "numba" and not _HAS_NUMBA:
        raise ValueError("numba is not available")
    _backend = name


def set_threads(n: int) -> None:
    if _HAS_NUMBA and n > 0:
        numba.set_num_threads(n)


# ---------------------------------------------------------------------------
# Shared scaled-integer parameter packing.


def word_arrays(words) -> tuple[np.ndarray, np.ndarray]:
    """Padded letter matrix (int8, -1 padding) and length vector."""
    n = len(words)
    maxlen = max((len(w) for w in words), default=0)
    mat = np.full((n, max(maxlen, 1)), -1, dtype=np.int8)
    lens = np.zeros(n, dtype=np.int64)
    for i, w in enumerate(words):
        lens[i] = len(w)
        for k, x in enumerate(w.letters):
            mat[i, k] = x
    return mat, lens


def common_scale(*values: Fraction) -> int:
    d = 1
    for v in values:
        d = d * v.denominator // math.gcd(d, v.denominator)
    return d


def scaled_letter_psi(spec, scale: int) -> np.ndarray:
    out = np.zeros(4, dtype=np.int64)
    for i, v in enumerate(spec.letter_psi()):
        out[i] = int(v * scale)
    return out


def check_envelope(L: int, scale: int, psiX, psiY, zetaX: int, zetaY: int,
                   ns: int, ms: int) -> None:
    """Audit the int64 arithmetic against the actual kernel formulas."""
    wmax = max(int(np.abs(psiX).max()), int(np.abs(psiY).max()), 1)
    ls = L * scale
    dh = L * wmax + L * max(zetaX, zetaY, 1)
    beta = dh
    denom = ls * ls + dh * dh
    tree = ls * ls * ((ls + 2 * scale) * denom) ** 2
    height = ((beta + dh) * ls * denom) ** 2
    rhs = max(ns * ns, ms * ms) * denom * denom * ls * ls
    if max(tree, height, rhs) >= 2**62:
        raise KernelUnsupportedError(
            "scaled parameters overflow int64; use the exact reference path"
        )


def _frac_gt_core(a, b, c, d):
    """Exact a/b > c/d for b, d > 0, overflow-free (continued fractions)."""
    while True:
        qa, ra = a // b, a % b
        qc, rc = c // d, c % d
        if qa != qc:
            return qa > qc
        if ra == 0 and rc == 0:
            return False
        if ra == 0:
            return False
        if rc == 0:
            return True
        # ra/b vs rc/d flips to d/rc vs b/ra.
        a, b, c, d = d, rc, b, ra


# ---------------------------------------------------------------------------
# Kernel 1, scalar core (compiled under numba; also the witness re-scan).


def _scan_word_core(
    letters,
    iw,
    n,
    L,
    D,
    psiX,
    psiY,
    zetaX,
    zetaY,
    ns2,
    ms2,
    ext_depth,
    rows,
    collect,
):
    """Scan all (z_g, a, z_a) for one segment word.  Returns
    (scanned, x_qual, y_viol, max_num, max_den, filled_rows); the running
    maximum is the true squared distance on the second side, reduced."""
    preX = np.zeros(n + 1, dtype=np.int64)
    preY = np.zeros(n + 1, dtype=np.int64)
    for k in range(n):
        x = letters[iw, k]
        preX[k + 1] = preX[k] + psiX[x]
        preY[k + 1] = preY[k] + psiY[x]
    ls = n * D
    scanned = 0
    x_qual = 0
    y_viol = 0
    max_num = 0
    max_den = 0
    filled = 0
    cap = rows.shape[0]
    d2 = D * D
    for zg in range(-(L - n), L - n + 1):
        dhx = zg * zetaX + preX[n]
        dhy = zg * zetaY + preY[n]
        denx = ls * ls + dhx * dhx
        deny = ls * ls + dhy * dhy
        rhsx = ns2 * denx * denx * ls * ls
        for m in range(n + 1):
            last = letters[iw, m - 1] if m >= 1 else -1
            nxt = letters[iw, m] if m < n else -1
            for ext1 in range(-1, 4):
                if ext1 == -1:
                    na1 = m
                    d01 = 0
                    psa1x = preX[m]
                    psa1y = preY[m]
                else:
                    if ext_depth < 1 or ext1 == nxt:
                        continue
                    if last >= 0 and ext1 == last ^ 2:
                        continue
                    na1 = m + 1
                    d01 = D
                    psa1x = preX[m] + psiX[ext1]
                    psa1y = preY[m] + psiY[ext1]
                for ext2 in range(-1, 4):
                    if ext2 == -1:
                        na = na1
                        d0 = d01
                        psax = psa1x
                        psay = psa1y
                    else:
                        if ext1 == -1 or ext_depth < 2 or ext2 == ext1 ^ 2:
                            continue
                        na = na1 + 1
                        d0 = 2 * D
                        psax = psa1x + psiX[ext2]
                        psay = psa1y + psiY[ext2]
                    if na > L:
                        continue
                    sstar = m * D
                    for za in range(-(L - na), L - na + 1):
                        scanned += 1
                        betx = -(za * zetaX + psax)
                        if n == 0:
                            ha = -betx
                            lo = dhx if dhx < 0 else 0
                            hi = dhx if dhx > 0 else 0
                            hc = ha
                            if hc < lo:
                                hc = lo
                            if hc > hi:
                                hc = hi
                            da = na * D
                            fx = da * da + (hc - ha) * (hc - ha)
                            if fx > ns2:
                                continue
                        else:
                            # Quick reject on the height gap alone.
                            hstar = betx * ls + sstar * dhx
                            habs = hstar if hstar >= 0 else -hstar
                            dha = dhx if dhx >= 0 else -dhx
                            slack = habs - dha * ls
                            if slack > 0:
                                room = (ns2 - d0 * d0) * ls * ls
                                if room < 0 or slack * slack > room:
                                    continue
                            pl = (d0 + sstar) * ls * ls - dhx * betx * ls
                            if pl < 0:
                                pl = 0
                            elif pl > sstar * denx:
                                pl = sstar * denx
                            tl = pl - sstar * denx
                            if tl < 0:
                                tl = -tl
                            tl += d0 * denx
                            hl = betx * ls * denx + pl * dhx
                            fx = ls * ls * tl * tl + hl * hl
                            pr = (sstar - d0) * ls * ls - dhx * betx * ls
                            if pr < sstar * denx:
                                pr = sstar * denx
                            elif pr > ls * denx:
                                pr = ls * denx
                            tr = pr - sstar * denx
                            if tr < 0:
                                tr = -tr
                            tr += d0 * denx
                            hr = betx * ls * denx + pr * dhx
                            fr = ls * ls * tr * tr + hr * hr
                            if fr < fx:
                                fx = fr
                            if fx > rhsx:
                                continue
                        x_qual += 1
                        bety = -(za * zetaY + psay)
                        if n == 0:
                            ha = -bety
                            lo = dhy if dhy < 0 else 0
                            hi = dhy if dhy > 0 else 0
                            hc = ha
                            if hc < lo:
                                hc = lo
                            if hc > hi:
                                hc = hi
                            da = na * D
                            fy = da * da + (hc - ha) * (hc - ha)
                            qy = d2
                        else:
                            pl = (d0 + sstar) * ls * ls - dhy * bety * ls
                            if pl < 0:
                                pl = 0
                            elif pl > sstar * deny:
                                pl = sstar * deny
                            tl = pl - sstar * deny
                            if tl < 0:
                                tl = -tl
                            tl += d0 * deny
                            hl = bety * ls * deny + pl * dhy
                            fy = ls * ls * tl * tl + hl * hl
                            pr = (sstar - d0) * ls * ls - dhy * bety * ls
                            if pr < sstar * deny:
                                pr = sstar * deny
                            elif pr > ls * deny:
                                pr = ls * deny
                            tr = pr - sstar * deny
                            if tr < 0:
                                tr = -tr
                            tr += d0 * deny
                            hr = bety * ls * deny + pr * dhy
                            fr = ls * ls * tr * tr + hr * hr
                            if fr < fy:
                                fy = fr
                            qy = deny * deny * ls * ls * d2
                        viol = fy > ms2 * (qy // d2)
                        g = math.gcd(fy, qy)
                        fy //= g
                        qy //= g
                        if max_den == 0 or _frac_gt(fy, qy, max_num, max_den):
                            max_num = fy
                            max_den = qy
                        if viol:
                            y_viol += 1
                            if collect and filled < cap:
                                rows[filled, 0] = zg
                                rows[filled, 1] = m
                                rows[filled, 2] = ext1
                                rows[filled, 3] = ext2
                                rows[filled, 4] = za
                                rows[filled, 5] = fy
                                rows[filled, 6] = qy
                                filled += 1
    return scanned, x_qual, y_viol, max_num, max_den, filled


def _scan_ball_core(letters, lens, L, D, psiX, psiY, zetaX, zetaY, ns2, ms2,
                    ext_depth, out):
    for iw in prange(letters.shape[0]):
        dummy = np.zeros((1, 7), dtype=np.int64)
        res = _scan_word(letters, iw, lens[iw], L, D, psiX, psiY,
                         zetaX, zetaY, ns2, ms2, ext_depth, dummy, False)
        out[iw, 0] = res[0]
        out[iw, 1] = res[1]
        out[iw, 2] = res[2]
        out[iw, 3] = res[3]
        out[iw, 4] = res[4]


if _HAS_NUMBA:
    _frac_gt = njit(cache=True)(_frac_gt_core)
    _scan_word = njit(cache=True)(_scan_word_core)
    _scan_ball_nb = njit(cache=True, parallel=True)(_scan_ball_core)
else:  # pragma: no cover
    _frac_gt = _frac_gt_core
    _scan_word = _scan_word_core
    _scan_ball_nb = _scan_ball_core


# ---------------------------------------------------------------------------
# Kernel 1, numpy fallback (vectorized per word, int64 throughout).


def _candidates_for_word(row, n, L, D, psiX, psiY, ext_depth):
    """Candidate table columns: m, d0, na, psiX(a), psiY(a), ext1, ext2."""
    cols: list[list[int]] = [[], [], [], [], [], [], []]
    preX = [0] * (n + 1)
    preY = [0] * (n + 1)
    for k in range(n):
        x = int(row[k])
        preX[k + 1] = preX[k] + int(psiX[x])
        preY[k + 1] = preY[k] + int(psiY[x])

    def push(m, d0, na, px, py, e1, e2):
        for c, v in zip(cols, (m, d0, na, px, py, e1, e2)):
            c.append(v)

    for m in range(n + 1):
        last = int(row[m - 1]) if m >= 1 else -1
        nxt = int(row[m]) if m < n else -1
        push(m, 0, m, preX[m], preY[m], -1, -1)
        if ext_depth < 1:
            continue
        for x in range(4):
            if x == nxt or (last >= 0 and x == last ^ 2):
                continue
            if m + 1 <= L:
                push(m, D, m + 1, preX[m] + int(psiX[x]), preY[m] + int(psiY[x]), x, -1)
            if ext_depth < 2 or m + 2 > L:
                continue
            for y in range(4):
                if y == x ^ 2:
                    continue
                push(
                    m, 2 * D, m + 2,
                    preX[m] + int(psiX[x]) + int(psiX[y]),
                    preY[m] + int(psiY[x]) + int(psiY[y]),
                    x, y,
                )
    return [np.array(c, dtype=np.int64) for c in cols]


def _piecewise_min_vec(sstar, d0, ls, dh, den, beta):
    """Vector exact min of the scaled piecewise quadratic (F over den^2*ls^2)."""
    pl = (d0 + sstar) * ls * ls - dh * beta * ls
    pl = np.clip(pl, 0, sstar * den)
    tl = np.abs(pl - sstar * den) + d0 * den
    fl = ls * ls * tl * tl + (beta * ls * den + pl * dh) ** 2
    pr = (sstar - d0) * ls * ls - dh * beta * ls
    pr = np.clip(pr, sstar * den, ls * den)
    tr = np.abs(pr - sstar * den) + d0 * den
    fr = ls * ls * tr * tr + (beta * ls * den + pr * dh) ** 2
    return np.minimum(fl, fr)


def _scan_word_numpy(row, n, L, D, psiX, psiY, zetaX, zetaY, ns2, ms2,
                     ext_depth, collect):
    m_c, d0_c, na_c, px_c, py_c, e1_c, e2_c = _candidates_for_word(
        row, n, L, D, psiX, psiY, ext_depth
    )
    za_counts = 2 * (L - na_c) + 1
    idx = np.repeat(np.arange(len(m_c)), za_counts)
    za = np.concatenate([np.arange(-(L - v), L - v + 1) for v in na_c])
    m_e = m_c[idx]
    d0_e = d0_c[idx]
    na_e = na_c[idx]
    px_e = px_c[idx]
    py_e = py_c[idx]
    sstar = m_e * D
    ls = n * D
    psi_wx = int(sum(int(psiX[int(row[k])]) for k in range(n)))
    psi_wy = int(sum(int(psiY[int(row[k])]) for k in range(n)))
    scanned = 0
    x_qual = 0
    y_viol = 0
    best_num, best_den = 0, 0
    rows_out: list[tuple[int, ...]] = []
    d2 = D * D
    for zg in range(-(L - n), L - n + 1):
        dhx = zg * zetaX + psi_wx
        dhy = zg * zetaY + psi_wy
        betx = -(za * zetaX + px_e)
        bety = -(za * zetaY + py_e)
        scanned += betx.shape[0]
        if n == 0:
            da = na_e * D
            hax = -betx
            hcx = np.clip(hax, min(0, dhx), max(0, dhx))
            fx = da * da + (hcx - hax) ** 2
            qual = fx <= ns2
            hay = -bety
            hcy = np.clip(hay, min(0, dhy), max(0, dhy))
            fy_all = da * da + (hcy - hay) ** 2
            qy_all = np.full_like(fy_all, d2)
        else:
            denx = ls * ls + dhx * dhx
            deny = ls * ls + dhy * dhy
            fx = _piecewise_min_vec(sstar, d0_e, ls, dhx, denx, betx)
            qual = fx <= ns2 * denx * denx * ls * ls
            fy_all = _piecewise_min_vec(sstar, d0_e, ls, dhy, deny, bety)
            qy_all = np.full_like(fy_all, deny * deny * ls * ls * d2)
        nq = int(np.count_nonzero(qual))
        x_qual += nq
        if nq == 0:
            continue
        qual_idx = np.nonzero(qual)[0]
        fy = fy_all[qual_idx]
        qy = qy_all[qual_idx]
        viol = fy > ms2 * (qy // d2)
        y_viol += int(np.count_nonzero(viol))
        g = np.gcd(fy, qy)
        fr_ = fy // g
        qr_ = qy // g
        ratios = fr_ / qr_
        top = float(ratios.max())
        shortlist = np.nonzero(ratios >= top - 1e-9 * abs(top) - 1e-12)[0]
        for j in shortlist:
            fn, fd = int(fr_[j]), int(qr_[j])
            if best_den == 0 or fn * best_den > best_num * fd:
                best_num, best_den = fn, fd
        if collect and np.any(viol):
            for j in np.nonzero(viol)[0]:
                e = int(qual_idx[j])
                rows_out.append(
                    (zg, int(m_e[e]), int(e1_c[idx[e]]), int(e2_c[idx[e]]),
                     int(za[e]), int(fr_[j]), int(qr_[j]))
                )
    return scanned, x_qual, y_viol, best_num, best_den, rows_out


def scan_ball(letters, lens, L, D, psiX, psiY, zetaX, zetaY, ns2, ms2,
              ext_depth):
    """Per-word scan results, int64 shape (n_words, 5):
    columns scanned, x_qual, y_viol, max_num, max_den."""
    n_words = letters.shape[0]
    out = np.zeros((n_words, 5), dtype=np.int64)
    if _backend == "numba":
        _scan_ball_nb(letters, lens, np.int64(L), np.int64(D), psiX, psiY,
                      np.int64(zetaX), np.int64(zetaY), np.int64(ns2),
                      np.int64(ms2), np.int64(ext_depth), out)
        return out
    for iw in range(n_words):
        res = _scan_word_numpy(letters[iw], int(lens[iw]), L, D, psiX, psiY,
                               zetaX, zetaY, ns2, ms2, ext_depth, False)
        out[iw, 0], out[iw, 1], out[iw, 2], out[iw, 3], out[iw, 4] = res[:5]
    return out


def scan_word_witnesses(letters, lens, iw, L, D, psiX, psiY, zetaX, zetaY,
                        ns2, ms2, ext_depth, cap):
    """Violating rows for one word: (zg, m, ext1, ext2, za, num, den)."""
    if _backend == "numba":
        rows = np.zeros((max(cap, 1), 7), dtype=np.int64)
        res = _scan_word(letters, np.int64(iw), np.int64(lens[iw]),
                         np.int64(L), np.int64(D), psiX, psiY,
                         np.int64(zetaX), np.int64(zetaY), np.int64(ns2),
                         np.int64(ms2), np.int64(ext_depth), rows, True)
        return [tuple(int(v) for v in rows[k]) for k in range(res[5])]
    res = _scan_word_numpy(letters[iw], int(lens[iw]), L, D, psiX, psiY,
                           zetaX, zetaY, ns2, ms2, ext_depth, True)
    return [tuple(int(v) for v in row) for row in res[5][:cap]]


# ---------------------------------------------------------------------------
# Kernel 2: pairwise orbit distance tables.


def _pair_tables_core(letters, lens, HX, HY, D, outX, outY):
    n = letters.shape[0]
    for i in prange(n):
        for j in range(n):
            m = 0
            lim = min(lens[i], lens[j])
            while m < lim and letters[i, m] == letters[j, m]:
                m += 1
            dt = (lens[i] + lens[j] - 2 * m) * D
            dhx = HX[i] - HX[j]
            dhy = HY[i] - HY[j]
            outX[i, j] = dt * dt + dhx * dhx
            outY[i, j] = dt * dt + dhy * dhy


if _HAS_NUMBA:
    _pair_tables_nb = njit(cache=True, parallel=True)(_pair_tables_core)
else:  # pragma: no cover
    _pair_tables_nb = _pair_tables_core


def _pair_tables_np(letters, lens, HX, HY, D):
    n = letters.shape[0]
    outX = np.zeros((n, n), dtype=np.int64)
    outY = np.zeros((n, n), dtype=np.int64)
    chunk = max(1, 2_000_000 // max(n, 1))
    for start in range(0, n, chunk):
        stop = min(start + chunk, n)
        block = letters[start:stop]
        eq = (block[:, None, :] == letters[None, :, :]) & (block[:, None, :] >= 0)
        shared = np.logical_and.accumulate(eq, axis=2).sum(axis=2)
        dt = (lens[start:stop, None] + lens[None, :] - 2 * shared) * D
        dhx = HX[start:stop, None] - HX[None, :]
        dhy = HY[start:stop, None] - HY[None, :]
        outX[start:stop] = dt * dt + dhx * dhx
        outY[start:stop] = dt * dt + dhy * dhy
    return outX, outY


def pair_tables(letters, lens, HX, HY, D):
    """Squared orbit distances (scaled by D^2) under both actions."""
    if _backend == "numba":
        n = letters.shape[0]
        outX = np.zeros((n, n), dtype=np.int64)
        outY = np.zeros((n, n), dtype=np.int64)
        _pair_tables_nb(letters, lens, HX, HY, np.int64(D), outX, outY)
        return outX, outY
    return _pair_tables_np(letters, lens, HX, HY, D)
