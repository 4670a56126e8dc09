"""numba-compiled versions of the hot kernels (see ``_kernels_numpy``)."""
import numpy as np
from numba import njit


@njit(cache=True)
def _exposed(minds, indptr, indices, ego, lo, hi):
    for p in range(indptr[ego], indptr[ego + 1]):
        if minds[indices[p], lo, hi]:
            return True
    return False


@njit(cache=True)
def sweep(minds, susc, use_susc, indptr, indices, ulo, uhi, agent_order, belief_perms):
    n_concepts = minds.shape[1]
    adopted = 0
    for k in range(agent_order.shape[0]):
        ego = agent_order[k]
        for t in range(belief_perms.shape[1]):
            b = belief_perms[k, t]
            lo = ulo[b]
            hi = uhi[b]
            if minds[ego, lo, hi]:
                continue
            if use_susc:
                if not susc[ego, lo, hi]:
                    continue
            else:
                ok = False
                for c in range(n_concepts):
                    if minds[ego, lo, c] and minds[ego, c, hi]:
                        ok = True
                        break
                if not ok:
                    continue
            if _exposed(minds, indptr, indices, ego, lo, hi):
                minds[ego, lo, hi] = True
                minds[ego, hi, lo] = True
                adopted += 1
    return adopted


@njit(cache=True)
def interdependent_susceptibility(minds, ulo, uhi):
    n_agents, n_concepts = minds.shape[0], minds.shape[1]
    n_beliefs = ulo.shape[0]
    out = np.zeros((n_agents, n_beliefs), dtype=np.bool_)
    for a in range(n_agents):
        for b in range(n_beliefs):
            lo = ulo[b]
            hi = uhi[b]
            if minds[a, lo, hi]:
                out[a, b] = True
                continue
            for c in range(n_concepts):
                if minds[a, lo, c] and minds[a, c, hi]:
                    out[a, b] = True
                    break
    return out


@njit(cache=True)
def checkerboard_swaps(mat, ones_r, ones_c, picks, target):
    done = 0
    used = 0
    for t in range(picks.shape[0]):
        if done >= target:
            break
        used += 1
        i = picks[t, 0]
        j = picks[t, 1]
        r1 = ones_r[i]
        c1 = ones_c[i]
        r2 = ones_r[j]
        c2 = ones_c[j]
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
