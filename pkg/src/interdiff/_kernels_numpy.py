"""Pure-numpy reference versions of the hot kernels.

Every function here has a twin in ``_kernels_numba`` with the same signature
and bit-identical results; all randomness is drawn by the caller and passed
in, so the two backends consume the random stream identically.
"""
import numpy as np


def sweep(minds, susc, use_susc, indptr, indices, ulo, uhi, agent_order, belief_perms):
    """One asynchronous update step over all agents, mutating ``minds`` in place.

    ``belief_perms[k]`` is the belief visiting order for the k-th agent in
    ``agent_order``. Returns the number of new mind edges.
    """
    adopted = 0
    for k in range(agent_order.shape[0]):
        ego = agent_order[k]
        nbrs = indices[indptr[ego]:indptr[ego + 1]]
        mind = minds[ego]
        # neighbours do not change during ego's own turn
        exposed = minds[nbrs][:, ulo, uhi].any(axis=0)
        order = belief_perms[k]
        cand = order[exposed[order] & ~mind[ulo[order], uhi[order]]]
        if use_susc:
            s = susc[ego]
            cand = cand[s[ulo[cand], uhi[cand]]]
            mind[ulo[cand], uhi[cand]] = True
            mind[uhi[cand], ulo[cand]] = True
            adopted += cand.shape[0]
            continue
        for b in cand:
            lo = ulo[b]
            hi = uhi[b]
            # distance 2; distance 1 is excluded by the candidate filter
            if (mind[lo] & mind[hi]).any():
                mind[lo, hi] = True
                mind[hi, lo] = True
                adopted += 1
    return adopted


def interdependent_susceptibility(minds, ulo, uhi):
    """Boolean (agents, beliefs) matrix: endpoints within distance 2 in each mind."""
    held = minds[:, ulo, uhi]
    two_step = (minds[:, ulo, :] & minds[:, uhi, :]).any(axis=2)
    return held | two_step


def checkerboard_swaps(mat, ones_r, ones_c, picks, target):
    """Apply 2x2 checkerboard swaps from the pre-drawn ``picks`` until ``target`` succeed.

    ``ones_r``/``ones_c`` list the coordinates of the ones in ``mat`` and are
    kept in sync. Returns ``(successes, picks_consumed)``.
    """
    done = 0
    used = 0
    for t in range(picks.shape[0]):
        if done >= target:
            break
        used += 1
        i = picks[t, 0]
        j = picks[t, 1]
        r1, c1 = ones_r[i], ones_c[i]
        r2, c2 = ones_r[j], ones_c[j]
        if r1 == r2 or c1 == c2 or mat[r1, c2] or mat[r2, c1]:
            continue
        mat[r1, c1] = False
        mat[r2, c2] = False
        mat[r1, c2] = True
        mat[r2, c1] = True
        ones_c[i] = c2
        ones_c[j] = c1
        done += 1
    return done, used
