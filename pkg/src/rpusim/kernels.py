"""Compiled per-sample training kernels.

Single-writer, single-threaded by design: parallelism belongs at the level of
independent runs.  All randomness comes from scalar twins of the counter-based
generator in prng.py, so a run is reproducible bit-for-bit regardless of how
many worker processes the harness uses.

Weight streams are bit-packed: one uint64 word per row/column line holds the
whole pulse train (BL <= 64).  Coincidence counting is a popcount of the AND
of two words; single-sided pulse counts follow from the per-line popcounts.
"""

from __future__ import annotations

import numpy as np
from numba import njit
from numba.typed import List as TypedList

from . import prng

U0 = np.uint64(0)
U1 = np.uint64(1)
GOLD = np.uint64(prng.GOLDEN)
M1 = np.uint64(prng._MIX1)
M2 = np.uint64(prng._MIX2)
C30 = np.uint64(30)
C27 = np.uint64(27)
C31 = np.uint64(31)
C11 = np.uint64(11)

P5 = np.uint64(0x5555555555555555)
P3 = np.uint64(0x3333333333333333)
P0F = np.uint64(0x0F0F0F0F0F0F0F0F)
P01 = np.uint64(0x0101010101010101)
C56 = np.uint64(56)

PH_ROW = np.uint64(prng.PH_ROW_STREAM)
PH_COL = np.uint64(prng.PH_COL_STREAM)
PH_FWD = np.uint64(prng.PH_FWD_NOISE)
PH_BWD = np.uint64(prng.PH_BWD_NOISE)
PH_C2C = np.uint64(prng.PH_C2C)
PH_EVAL = np.uint64(prng.PH_EVAL)
PH_SHUFFLE = np.uint64(prng.PH_SHUFFLE)

TWO53INV = 2.0 ** -53
TWO64 = 2.0 ** 64


@njit(cache=True, inline="always")
def _mix(z):
    z = (z ^ (z >> C30)) * M1
    z = (z ^ (z >> C27)) * M2
    return z ^ (z >> C31)


@njit(cache=True, inline="always")
def _fold(key, word):
    return _mix(key + GOLD + word)


@njit(cache=True, inline="always")
def _raw_at(key, t):
    return _mix((t + U1) * GOLD + key)


@njit(cache=True, inline="always")
def _uniform_at(key, t):
    return float((_raw_at(key, t) >> C11)) * TWO53INV


@njit(cache=True, inline="always")
def _normal_at(key, t):
    u1 = 1.0 - _uniform_at(key, np.uint64(2) * t)
    u2 = _uniform_at(key, np.uint64(2) * t + U1)
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)


@njit(cache=True, inline="always")
def _popcount(x):
    x = x - ((x >> U1) & P5)
    x = (x & P3) + ((x >> np.uint64(2)) & P3)
    x = (x + (x >> np.uint64(4))) & P0F
    return (x * P01) >> C56


@njit(cache=True)
def permutation(key, n):
    """Fisher-Yates permutation of arange(n) driven by the counter stream."""
    out = np.arange(n)
    for i in range(n - 1, 0, -1):
        # modulo draw; bias is < 2**-45 for the sizes used here, and any
        # fixed rule is fine as long as it is frozen
        r = _raw_at(key, np.uint64(i))
        j = int(r % np.uint64(i + 1))
        tmp = out[i]
        out[i] = out[j]
        out[j] = tmp
    return out


@njit(cache=True)
def fill_streams(key, values, gain, bl, words, pops, signs):
    """Translate a value vector into packed Bernoulli pulse words.

    Line i fires in slot t with probability min(1, gain*|values[i]|); the
    draw for (i, t) sits at counter i*64 + t of `key`.  Returns the number
    of lines whose firing probability was clamped at 1.
    """
    n = values.shape[0]
    clamped = 0
    full = (U1 << np.uint64(bl)) - U1 if bl < 64 else ~U0
    for i in range(n):
        v = values[i]
        if v == 0.0:
            words[i] = U0
            pops[i] = 0
            signs[i] = 0
            continue
        signs[i] = 1 if v > 0.0 else -1
        p = gain * (v if v > 0.0 else -v)
        if p >= 1.0:
            if p > 1.0:
                clamped += 1
            words[i] = full
            pops[i] = bl
            continue
        thresh = np.uint64(p * TWO64)
        base = np.uint64(i * 64)
        w = U0
        cnt = 0
        for t in range(bl):
            if _raw_at(key, base + np.uint64(t)) < thresh:
                w |= U1 << np.uint64(t)
                cnt += 1
        words[i] = w
        pops[i] = cnt
    return clamped


@njit(cache=True, inline="always")
def _quant(v, pulses):
    if pulses <= 0:
        return v
    a = v if v >= 0.0 else -v
    if a > 1.0:
        a = 1.0
    q = np.rint(a * pulses) / pulses
    return q if v >= 0.0 else -q


@njit(cache=True)
def _read_forward(W, xin, y, noise_sigma, alpha, pulses, key):
    """y = clip(W^T xin + noise, +-alpha), with optional input quantization."""
    nin, nout = W.shape
    for j in range(nout):
        y[j] = 0.0
    for i in range(nin):
        xi = _quant(xin[i], pulses)
        if xi == 0.0:
            continue
        for j in range(nout):
            y[j] += xi * W[i, j]
    for j in range(nout):
        if noise_sigma > 0.0:
            y[j] += noise_sigma * _normal_at(key, np.uint64(j))
        if y[j] > alpha:
            y[j] = alpha
        elif y[j] < -alpha:
            y[j] = -alpha


@njit(cache=True)
def _read_backward(W, d, g, nrows, noise_sigma, alpha, pulses, key):
    """g[:nrows] = clip(W[:nrows] d + noise, +-alpha) (transpose read)."""
    nout = W.shape[1]
    for i in range(nrows):
        acc = 0.0
        for j in range(nout):
            dj = _quant(d[j], pulses)
            acc += W[i, j] * dj
        if noise_sigma > 0.0:
            acc += noise_sigma * _normal_at(key, np.uint64(i))
        if acc > alpha:
            acc = alpha
        elif acc < -alpha:
            acc = -alpha
        g[i] = acc


@njit(cache=True)
def forward_sample(Ws, acts, probs, noise_sigma, alpha_hidden, alpha_out,
                   pulses, key_sample, stochastic):
    """Forward pass over all layers; acts[l] carries the bias slot at its end."""
    nlayers = len(Ws)
    for l in range(nlayers):
        W = Ws[l]
        nout = W.shape[1]
        last = l == nlayers - 1
        alpha = alpha_out if last else alpha_hidden
        if not stochastic:
            alpha = np.inf
        sig = noise_sigma if stochastic else 0.0
        key = _fold(_fold(key_sample, PH_FWD), np.uint64(l))
        if last:
            _read_forward(W, acts[l], probs, sig, alpha,
                          pulses if stochastic else 0, key)
            m = probs[0]
            for j in range(1, nout):
                if probs[j] > m:
                    m = probs[j]
            s = 0.0
            for j in range(nout):
                probs[j] = np.exp(probs[j] - m)
                s += probs[j]
            for j in range(nout):
                probs[j] /= s
        else:
            y = acts[l + 1]
            _read_forward(W, acts[l], y, sig, alpha,
                          pulses if stochastic else 0, key)
            for j in range(nout):
                y[j] = 1.0 / (1.0 + np.exp(-y[j]))
            y[nout] = 1.0  # bias line, always on


@njit(cache=True)
def backward_sample(Ws, acts, probs, label, deltas, noise_sigma, alpha_hidden,
                    alpha_out, pulses, key_sample, stochastic):
    """Gradient-convention deltas: output delta is (softmax - onehot)."""
    nlayers = len(Ws)
    dout = deltas[nlayers - 1]
    for j in range(dout.shape[0]):
        dout[j] = probs[j]
    dout[label] -= 1.0
    for l in range(nlayers - 1, 0, -1):
        W = Ws[l]
        nunits = W.shape[0] - 1  # propagate through weight rows, not bias
        g = deltas[l - 1]
        alpha = alpha_out if l == nlayers - 1 else alpha_hidden
        if not stochastic:
            alpha = np.inf
        sig = noise_sigma if stochastic else 0.0
        key = _fold(_fold(key_sample, PH_BWD), np.uint64(l))
        _read_backward(W, deltas[l], g, nunits, sig, alpha,
                       pulses if stochastic else 0, key)
        a = acts[l]
        for i in range(nunits):
            g[i] *= a[i] * (1.0 - a[i])


@njit(cache=True)
def update_baseline(Ws, acts, deltas, eta):
    """Plain float outer-product step: W += eta * x (-delta)^T."""
    for l in range(len(Ws)):
        W = Ws[l]
        x = acts[l]
        d = deltas[l]
        nin, nout = W.shape
        for i in range(nin):
            xi = x[i]
            if xi == 0.0:
                continue
            f = -eta * xi
            for j in range(nout):
                W[i, j] += f * d[j]


@njit(cache=True)
def update_stochastic(W, dw_up, dw_down, b_lo, b_hi, x, d, gain, bl, dw_scale,
                      k, sigma_c2c, uniform_unbounded, key_row, key_col,
                      key_c2c, row_words, row_pops, row_signs,
                      col_words, col_pops, col_signs, col_active):
    """One stochastic outer-product update on a single array.

    Streams are drawn once per line and shared across the array.  Element
    direction is sign(x_i)*sign(d_j); elements whose row or column value is
    exactly zero never change.  Realized change per element is
    s*(n*dw + N(0, sqrt(n)*sigma_c2c*dw)) with n = and + k*xor, clipped into
    the device bounds.  Returns the number of clamped translator inputs.
    """
    nin, nout = W.shape
    clamped = fill_streams(key_row, x, gain, bl, row_words, row_pops, row_signs)
    clamped += fill_streams(key_col, d, gain, bl, col_words, col_pops, col_signs)

    if k == 0.0:
        nact = 0
        for j in range(nout):
            if col_words[j] != U0:
                col_active[nact] = j
                nact += 1
        if nact == 0:
            return clamped
        for i in range(nin):
            rw = row_words[i]
            if rw == U0:
                continue
            si = row_signs[i]
            base = np.uint64(i * nout)
            for jj in range(nact):
                j = col_active[jj]
                n = int(_popcount(rw & col_words[j]))
                if n == 0:
                    continue
                s = si * col_signs[j]
                dw = (dw_up[i, j] if s > 0 else dw_down[i, j]) * dw_scale
                ch = n * dw
                if sigma_c2c > 0.0:
                    ch += np.sqrt(float(n)) * sigma_c2c * dw * \
                        _normal_at(key_c2c, base + np.uint64(j))
                w = W[i, j] + s * ch
                lo = b_lo[i, j]
                hi = b_hi[i, j]
                if w < lo:
                    w = lo
                elif w > hi:
                    w = hi
                W[i, j] = w
        return clamped

    if uniform_unbounded and sigma_c2c == 0.0:
        # n = and + k*xor = (1-2k)*and + k*(popA + popB): the second term is a
        # rank-2 (row effect + column effect) pass, the first stays sparse
        dw = dw_up[0, 0] * dw_scale
        kdw = k * dw
        col_term = np.empty(nout)
        for j in range(nout):
            col_term[j] = col_signs[j] * kdw * float(col_pops[j])
        for i in range(nin):
            si = row_signs[i]
            if si == 0:
                continue
            u = si * kdw * float(row_pops[i])
            for j in range(nout):
                sj = col_signs[j]
                if sj != 0:
                    W[i, j] += sj * u + si * col_term[j]
        f = (1.0 - 2.0 * k) * dw
        nact = 0
        for j in range(nout):
            if col_words[j] != U0:
                col_active[nact] = j
                nact += 1
        for i in range(nin):
            rw = row_words[i]
            if rw == U0:
                continue
            si = row_signs[i]
            for jj in range(nact):
                j = col_active[jj]
                n = int(_popcount(rw & col_words[j]))
                if n != 0:
                    W[i, j] += si * col_signs[j] * f * n
        return clamped

    # fully general k > 0 path: every element with both values nonzero changes
    # (single-sided pulses contribute k per event in the coincidence direction)
    for i in range(nin):
        si = row_signs[i]
        if si == 0:
            continue
        rw = row_words[i]
        pa = float(row_pops[i])
        base = np.uint64(i * nout)
        for j in range(nout):
            sj = col_signs[j]
            if sj == 0:
                continue
            nand = float(_popcount(rw & col_words[j]))
            n = nand + k * (pa + float(col_pops[j]) - 2.0 * nand)
            if n == 0.0:
                continue
            s = si * sj
            dw = (dw_up[i, j] if s > 0 else dw_down[i, j]) * dw_scale
            ch = n * dw
            if sigma_c2c > 0.0:
                ch += np.sqrt(n) * sigma_c2c * dw * \
                    _normal_at(key_c2c, base + np.uint64(j))
            w = W[i, j] + s * ch
            lo = b_lo[i, j]
            hi = b_hi[i, j]
            if w < lo:
                w = lo
            elif w > hi:
                w = hi
            W[i, j] = w
    return clamped


@njit(cache=True)
def train_samples(Ws, dw_ups, dw_downs, b_los, b_his, images, labels, order,
                  n_samples, key_epoch, stochastic, bl, gain, dw_scale, eta,
                  k, sigma_c2c, uniform_unbounded, noise_sigma, alpha_hidden,
                  alpha_out, pulses):
    """One epoch (or a prefix of one) of sequential single-sample training.

    Returns (clamped_translations, total_translations) for the saturation
    statistic; both are zero in baseline mode.
    """
    nlayers = len(Ws)
    acts = TypedList()
    deltas = TypedList()
    negd = TypedList()
    for l in range(nlayers):
        acts.append(np.empty(Ws[l].shape[0]))
        deltas.append(np.empty(Ws[l].shape[1]))
        negd.append(np.empty(Ws[l].shape[1]))
    probs = np.empty(Ws[nlayers - 1].shape[1])

    maxin = 0
    maxout = 0
    for l in range(nlayers):
        if Ws[l].shape[0] > maxin:
            maxin = Ws[l].shape[0]
        if Ws[l].shape[1] > maxout:
            maxout = Ws[l].shape[1]
    row_words = np.empty(maxin, dtype=np.uint64)
    row_pops = np.empty(maxin, dtype=np.int64)
    row_signs = np.empty(maxin, dtype=np.int64)
    col_words = np.empty(maxout, dtype=np.uint64)
    col_pops = np.empty(maxout, dtype=np.int64)
    col_signs = np.empty(maxout, dtype=np.int64)
    col_active = np.empty(maxout, dtype=np.int64)

    clamped = 0
    total = 0
    npix = images.shape[1]
    for step in range(n_samples):
        idx = order[step]
        key_sample = _fold(key_epoch, np.uint64(step))
        x0 = acts[0]
        for i in range(npix):
            x0[i] = images[idx, i]
        x0[npix] = 1.0

        forward_sample(Ws, acts, probs, noise_sigma, alpha_hidden, alpha_out,
                       pulses, key_sample, stochastic)
        backward_sample(Ws, acts, probs, labels[idx], deltas, noise_sigma,
                        alpha_hidden, alpha_out, pulses, key_sample, stochastic)

        if not stochastic:
            update_baseline(Ws, acts, deltas, eta)
            continue

        for l in range(nlayers):
            d = deltas[l]
            nd = negd[l]
            for j in range(d.shape[0]):
                nd[j] = -d[j]
            key_row = _fold(_fold(key_sample, PH_ROW), np.uint64(l))
            key_col = _fold(_fold(key_sample, PH_COL), np.uint64(l))
            key_c2c = _fold(_fold(key_sample, PH_C2C), np.uint64(l))
            nin = Ws[l].shape[0]
            nout = Ws[l].shape[1]
            clamped += update_stochastic(
                Ws[l], dw_ups[l], dw_downs[l], b_los[l], b_his[l],
                acts[l], nd, gain, bl, dw_scale, k, sigma_c2c,
                uniform_unbounded, key_row, key_col, key_c2c,
                row_words[:nin], row_pops[:nin], row_signs[:nin],
                col_words[:nout], col_pops[:nout], col_signs[:nout],
                col_active[:nout])
            total += nin + nout
    return clamped, total


@njit(cache=True)
def count_errors(Ws, images, labels, key_eval, stochastic, noise_sigma,
                 alpha_hidden, alpha_out, pulses):
    """Misclassification count on a dataset; read noise stays on when set."""
    nlayers = len(Ws)
    acts = TypedList()
    for l in range(nlayers):
        acts.append(np.empty(Ws[l].shape[0]))
    probs = np.empty(Ws[nlayers - 1].shape[1])
    npix = images.shape[1]
    wrong = 0
    for s in range(images.shape[0]):
        key_sample = _fold(key_eval, np.uint64(s))
        x0 = acts[0]
        for i in range(npix):
            x0[i] = images[s, i]
        x0[npix] = 1.0
        forward_sample(Ws, acts, probs, noise_sigma, alpha_hidden, alpha_out,
                       pulses, key_sample, stochastic)
        best = 0
        for j in range(1, probs.shape[0]):
            if probs[j] > probs[best]:
                best = j
        if best != labels[s]:
            wrong += 1
    return wrong
