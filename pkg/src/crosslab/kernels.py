"""Hot loops: excursion batches of lattice walks and birth-death runs.

Each kernel exists twice: a numba-compiled loop and a numpy path.  Both read
the same pre-drawn buffers (step codes, 32-bit uniforms) and write the same
outputs, so the backend never changes a result.  ``USE_NUMBA`` (see
:mod:`crosslab._accel`) picks the default.

Batch kernels stop when the buffer runs dry or the quota is met.  An
unfinished excursion lives in ``pos``/``carry``/``tally`` so the caller can
refill the buffer and call again.
"""
from __future__ import annotations

import numpy as np

from ._accel import USE_NUMBA, njit

FREE, REFLECTED, BOX, REFLECTED_BOX = 0, 1, 2, 3
RETURNED, CENSORED = 1, 0


@njit
def _observe(pos, ax, x_prev, pn, nn, tally, kinds, vectors, a_off, a_vecs, by_off, by_idx):
    d = pos.shape[0]
    for p in range(by_off[nn], by_off[nn + 1]):
        i = by_idx[p]
        k = kinds[i]
        hit = True
        if k == 0 or k == 3:
            for j in range(d):
                if pos[j] != vectors[i, j]:
                    hit = False
                    break
            if hit and k == 3:
                hit = False
                for r in range(a_off[i], a_off[i + 1]):
                    same = True
                    for j in range(d):
                        pj = x_prev if j == ax else pos[j]
                        if a_vecs[r, j] != pj:
                            same = False
                            break
                    if same:
                        hit = True
                        break
        elif k == 2:
            for j in range(d):
                if abs(pos[j]) != vectors[i, j]:
                    hit = False
                    break
        if hit:
            tally[i, 0] += 1
            if pn == nn - 1:
                tally[i, 1] += 1
            elif pn == nn + 1:
                tally[i, 2] += 1


@njit
def walk_kernel(steps, off, kind, cap, t_max, quota, pos, carry, tally,
                kinds, vectors, a_off, a_vecs, by_off, by_idx, max_norm,
                out_status, out_len, out_maxnorm, out_tally, n_done):
    n = steps.shape[0]
    reflect = kind == 1 or kind == 3
    boxed = kind == 2 or kind == 3
    while n_done < quota:
        if carry[3] == 0:
            pos[:] = 0
            tally[:, :] = 0
            carry[0] = 0
            carry[1] = 0
            carry[2] = 0
            carry[3] = 1
        nrm = carry[0]
        t = carry[1]
        top = carry[2]
        status = -1
        while off < n:
            c = steps[off]
            off += 1
            ax = c >> 1
            x = pos[ax]
            nx = x + 1 if (c & 1) == 0 else x - 1
            if reflect and nx == -1:
                nx = 1
            new_norm = nrm - abs(x) + abs(nx)
            t += 1
            if not (boxed and new_norm > cap):
                pos[ax] = nx
                pn = nrm
                nrm = new_norm
                if nrm > top:
                    top = nrm
                if nrm <= max_norm:
                    _observe(pos, ax, x, pn, nrm, tally, kinds, vectors, a_off, a_vecs,
                             by_off, by_idx)
                if nrm == 0:
                    status = 1
                    break
            if t >= t_max:
                status = 0
                break
        carry[0] = nrm
        carry[1] = t
        carry[2] = top
        if status < 0:
            return off, n_done
        out_status[n_done] = status
        out_len[n_done] = t
        out_maxnorm[n_done] = top
        out_tally[n_done] = tally
        n_done += 1
        carry[3] = 0
    return off, n_done


def _reflect_path(start, incr):
    """Coordinate path of a walk reflected at 0 (a step to -1 is flipped to +1).

    With the free path y started at ``start >= 0``, the reflected path is
    ``y + 2 * ceil(max(0, -min y) / 2)`` using the running minimum.
    """
    y = start + np.cumsum(incr, axis=0)
    low = np.minimum.accumulate(np.minimum(y, 0), axis=0)
    return y + 2 * ((-low + 1) // 2)


def walk_numpy(steps, off, kind, cap, t_max, quota, pos, carry, tally,
               kinds, vectors, a_off, a_vecs, by_off, by_idx, max_norm,
               out_status, out_len, out_maxnorm, out_tally, n_done):
    """Vectorised twin of :func:`walk_kernel` for the free and reflected walks.

    Box walks have state-dependent blocking and fall back to the plain-Python
    loop of the same kernel.
    """
    if kind in (BOX, REFLECTED_BOX):
        return walk_kernel.py_func(steps, off, kind, cap, t_max, quota, pos, carry, tally,
                                   kinds, vectors, a_off, a_vecs, by_off, by_idx, max_norm,
                                   out_status, out_len, out_maxnorm, out_tally, n_done)
    n = steps.shape[0]
    d = pos.shape[0]
    while n_done < quota:
        if carry[3] == 0:
            pos[:] = 0
            tally[:, :] = 0
            carry[:3] = 0
            carry[3] = 1
        chunk = 64
        status = -1
        while off < n:
            t = int(carry[1])
            take = min(chunk, n - off, t_max - t)
            codes = steps[off : off + take].astype(np.int64)
            incr = np.zeros((take, d), np.int64)
            incr[np.arange(take), codes >> 1] = 1 - 2 * (codes & 1)
            if kind == REFLECTED:
                path = _reflect_path(pos, incr)
            else:
                path = pos + np.cumsum(incr, axis=0)
            norms = np.abs(path).sum(axis=1)
            hits = np.flatnonzero(norms == 0)
            if hits.size:
                end, status = int(hits[0]) + 1, RETURNED
            elif t + take >= t_max:
                end, status = take, CENSORED
            else:
                end = take
            path, norms = path[:end], norms[:end]
            prev = np.vstack([pos[None, :], path[:-1]])
            prev_norms = np.concatenate([[carry[0]], norms[:-1]])
            _tally_numpy(path, prev, norms, prev_norms, tally, kinds, vectors, a_off, a_vecs,
                         by_off, by_idx, max_norm)
            pos[:] = path[-1]
            carry[0] = norms[-1]
            carry[1] = t + end
            carry[2] = max(int(carry[2]), int(norms.max()))
            off += end
            if status >= 0:
                break
            chunk *= 4
        if status < 0:
            return off, n_done
        out_status[n_done] = status
        out_len[n_done] = carry[1]
        out_maxnorm[n_done] = carry[2]
        out_tally[n_done] = tally
        n_done += 1
        carry[3] = 0
    return off, n_done


def _tally_numpy(path, prev, norms, prev_norms, tally, kinds, vectors, a_off, a_vecs,
                 by_off, by_idx, max_norm):
    for level in range(min(max_norm, int(norms.max())) + 1):
        members = by_idx[by_off[level] : by_off[level + 1]]
        if members.size == 0:
            continue
        rows = np.flatnonzero(norms == level)
        if rows.size == 0:
            continue
        here, before = path[rows], prev[rows]
        up = prev_norms[rows] == level - 1
        down = prev_norms[rows] == level + 1
        for i in members:
            k = kinds[i]
            if k == 1:
                hit = np.ones(rows.size, bool)
            elif k == 2:
                hit = np.all(np.abs(here) == vectors[i], axis=1)
            else:
                hit = np.all(here == vectors[i], axis=1)
                if k == 3:
                    allowed = a_vecs[a_off[i] : a_off[i + 1]]
                    hit &= np.any(np.all(before[:, None, :] == allowed[None], axis=2), axis=1)
            tally[i, 0] += int(hit.sum())
            tally[i, 1] += int((hit & up).sum())
            tally[i, 2] += int((hit & down).sum())


@njit
def bd_kernel(u, off, thresholds, t_max, quota, n_levels, carry, g,
              out_status, out_len, out_g, n_done):
    """Embedded jump chain of a birth-death process started from one individual.

    A jump from population ``p`` is a birth iff ``u < thresholds[min(p, L-1)]``.
    ``g[n]`` counts births occurring at population ``n``; ``g[0] = 1`` by
    convention.
    """
    n = u.shape[0]
    L = thresholds.shape[0]
    while n_done < quota:
        if carry[2] == 0:
            g[:] = 0
            g[0] = 1
            carry[0] = 1
            carry[1] = 0
            carry[2] = 1
        p = carry[0]
        t = carry[1]
        status = -1
        while off < n:
            x = u[off]
            off += 1
            t += 1
            lvl = p if p < L else L - 1
            if x < thresholds[lvl]:
                if p < n_levels:
                    g[p] += 1
                p += 1
            else:
                p -= 1
                if p == 0:
                    status = 1
                    break
            if t >= t_max:
                status = 0
                break
        carry[0] = p
        carry[1] = t
        if status < 0:
            return off, n_done
        out_status[n_done] = status
        out_len[n_done] = t
        out_g[n_done] = g
        n_done += 1
        carry[2] = 0
    return off, n_done


def bd_numpy(u, off, thresholds, t_max, quota, n_levels, carry, g,
             out_status, out_len, out_g, n_done):
    """Fallback for :func:`bd_kernel`.

    Constant rates reduce the population to a +-1 walk and vectorise;
    level-dependent rates run the kernel's Python loop.
    """
    if np.any(thresholds != thresholds[0]):
        return bd_kernel.py_func(u, off, thresholds, t_max, quota, n_levels, carry, g,
                                 out_status, out_len, out_g, n_done)
    n = u.shape[0]
    thr = thresholds[0]
    while n_done < quota:
        if carry[2] == 0:
            g[:] = 0
            g[0] = 1
            carry[:] = (1, 0, 1)
        chunk = 64
        status = -1
        while off < n:
            t = int(carry[1])
            take = min(chunk, n - off, t_max - t)
            births = u[off : off + take] < thr
            pop = carry[0] + np.cumsum(np.where(births, 1, -1))
            zeros = np.flatnonzero(pop == 0)
            if zeros.size:
                end, status = int(zeros[0]) + 1, RETURNED
            elif t + take >= t_max:
                end, status = take, CENSORED
            else:
                end = take
            before = np.concatenate([[carry[0]], pop[: end - 1]])
            levels = before[births[:end] & (before < n_levels)]
            g += np.bincount(levels, minlength=n_levels)[:n_levels]
            carry[0] = pop[end - 1]
            carry[1] = t + end
            off += end
            if status >= 0:
                break
            chunk *= 4
        if status < 0:
            return off, n_done
        out_status[n_done] = status
        out_len[n_done] = carry[1]
        out_g[n_done] = g
        n_done += 1
        carry[2] = 0
    return off, n_done


def select(numba_fn, numpy_fn, use_numba: bool | None = None):
    return numba_fn if (USE_NUMBA if use_numba is None else use_numba) else numpy_fn
