"""Hot kernels for the counts-representation replication engine.

Everything here is written against the subset of numpy that numba's njit
supports, with a ``np.random.Generator`` passed in explicitly.  The module
works identically interpreted (RNACHANNEL_BACKEND=numpy): numba implements
the Generator bit streams exactly, so backend choice never changes results.

Strand state is struct-of-arrays: per-slot composition (4 letter counts),
generation, cumulative insertion/deletion/substitution counters, cumulative
per-letter deletion counters, and the time of the slot's next replication
completion.  Pending completions live in a manual binary min-heap of
(time, slot) pairs; every positive-length strand has exactly one pending
event, so an empty heap means the whole population is at length zero.
"""

import math

import numpy as np

from ._backend import jit_kernel

INF = math.inf

# status codes returned by run_counts_trial
STATUS_OK = 0
STATUS_EXTINCT = 1


@jit_kernel
def _heap_push(heap_t, heap_id, size, t, idx):
    i = size
    heap_t[i] = t
    heap_id[i] = idx
    while i > 0:
        p = (i - 1) >> 1
        if heap_t[p] <= heap_t[i]:
            break
        heap_t[p], heap_t[i] = heap_t[i], heap_t[p]
        heap_id[p], heap_id[i] = heap_id[i], heap_id[p]
        i = p
    return size + 1


@jit_kernel
def _heap_pop(heap_t, heap_id, size):
    t0 = heap_t[0]
    id0 = heap_id[0]
    size -= 1
    if size > 0:
        heap_t[0] = heap_t[size]
        heap_id[0] = heap_id[size]
        i = 0
        while True:
            l = 2 * i + 1
            if l >= size:
                break
            s = l
            r = l + 1
            if r < size and heap_t[r] < heap_t[l]:
                s = r
            if heap_t[i] <= heap_t[s]:
                break
            heap_t[i], heap_t[s] = heap_t[s], heap_t[i]
            heap_id[i], heap_id[s] = heap_id[s], heap_id[i]
            i = s
    return t0, id0, size


@jit_kernel
def _heapify(heap_t, heap_id, size):
    for start in range((size - 2) >> 1, -1, -1):
        i = start
        while True:
            l = 2 * i + 1
            if l >= size:
                break
            s = l
            r = l + 1
            if r < size and heap_t[r] < heap_t[l]:
                s = r
            if heap_t[i] <= heap_t[s]:
                break
            heap_t[i], heap_t[s] = heap_t[s], heap_t[i]
            heap_id[i], heap_id[s] = heap_id[s], heap_id[i]
            i = s


@jit_kernel
def _pick_letter(rng, counts, total):
    # one uniform draw over `total` remaining letters, walked through the
    # 4 classes: repeated picks without replacement are exactly
    # multivariate-hypergeometric (Generator.hypergeometric is not
    # njit-supported)
    r = rng.integers(0, total)
    acc = np.int64(0)
    for k in range(4):
        acc += counts[k]
        if r < acc:
            return k
    return 3


@jit_kernel
def _mutate_counts_core(rng, comp_in, comp_out, del_letter_out, p_ins, p_del, p_sub):
    """One replication through the error channel, composition form.

    Writes the child composition to comp_out and the per-letter deletion
    counts of this event to del_letter_out.  Returns (ins, dels, subs).
    """
    n = np.int64(0)
    for k in range(4):
        comp_out[k] = comp_in[k]
        del_letter_out[k] = 0
        n += comp_in[k]

    dels = rng.binomial(n, p_del)
    remaining = n
    for _ in range(dels):
        k = _pick_letter(rng, comp_out, remaining)
        comp_out[k] -= 1
        del_letter_out[k] += 1
        remaining -= 1

    # substitutions hit survivors: conditional rate recovers the exact
    # joint law of independent per-position outcomes
    if p_del < 1.0:
        p_sub_c = p_sub / (1.0 - p_del)
        if p_sub_c > 1.0:
            p_sub_c = 1.0
    else:
        p_sub_c = 0.0
    subs = rng.binomial(remaining, p_sub_c)
    for _ in range(subs):
        k = _pick_letter(rng, comp_out, remaining)
        comp_out[k] -= 1
        tgt = (k + 1 + rng.integers(0, 3)) % 4
        comp_out[tgt] += 1

    ins = rng.binomial(n, p_ins)
    for _ in range(ins):
        comp_out[rng.integers(0, 4)] += 1

    return ins, dels, subs


@jit_kernel
def _sample_time(rng, comp, mean_t, var_t, gaussian_mode):
    """Replication completion time for one strand, strictly positive."""
    if gaussian_mode:
        m = 0.0
        v = 0.0
        for k in range(4):
            m += comp[k] * mean_t[k]
            v += comp[k] * var_t[k]
        sd = math.sqrt(v)
        while True:
            t = rng.normal(m, sd)
            if t > 0.0:
                return t
    else:
        t = 0.0
        for k in range(4):
            c = comp[k]
            if c > 0:
                # sum of c iid exponentials with the letter's mean
                t += rng.gamma(np.float64(c), mean_t[k])
        return t


@jit_kernel
def _grow_state(comp, gen, cum, del_let, next_t, stable, heap_t, heap_id, newcap):
    ncomp = np.zeros((newcap, 4), np.int64)
    ngen = np.zeros(newcap, np.int64)
    ncum = np.zeros((newcap, 3), np.int64)
    ndel = np.zeros((newcap, 4), np.int64)
    nnext = np.zeros(newcap, np.float64)
    nstab = np.zeros(newcap, np.int64)
    nht = np.zeros(newcap, np.float64)
    nhi = np.zeros(newcap, np.int64)
    cap = comp.shape[0]
    ncomp[:cap] = comp
    ngen[:cap] = gen
    ncum[:cap] = cum
    ndel[:cap] = del_let
    nnext[:cap] = next_t
    nstab[:cap] = stable
    nht[:cap] = heap_t
    nhi[:cap] = heap_id
    return ncomp, ngen, ncum, ndel, nnext, nstab, nht, nhi


@jit_kernel
def _grow_records(rec, newcap):
    n = np.zeros((newcap, 6), np.int64)
    n[: rec.shape[0]] = rec
    return n


@jit_kernel
def run_counts_trial(
    rng,
    root_comp,
    mean_t,
    var_t,
    p_ins,
    p_del,
    p_sub,
    gaussian_mode,
    checkpoints,
    pop_cap,
    sample_cap,
    record,
):
    """One trial of the branching replication process, counts form.

    Every strand replicates continuously; each completion spawns a child
    drawn through the error channel, and both parent and child immediately
    start their next replications.  When the population exceeds pop_cap a
    uniform subsample of pop_cap//2 survives and the scale multiplier grows
    by the inverse survival fraction.  At each checkpoint time, statistics
    are exact over the population when it fits within sample_cap, otherwise
    taken over sample_cap strands sampled with replacement.

    Returns checkpoint arrays (live, scaled pop, mean generation, error
    rates, per-letter deletion rates), a status code, the number of strands
    ever created, and (when record is True) one lineage row per strand:
    (parent stable id, generation, cum ins, cum del, cum sub, length).
    """
    ncp = checkpoints.shape[0]
    ck_live = np.zeros(ncp, np.int64)
    ck_pop = np.zeros(ncp, np.float64)
    ck_gen = np.zeros(ncp, np.float64)
    ck_del = np.zeros(ncp, np.float64)
    ck_ins = np.zeros(ncp, np.float64)
    ck_sub = np.zeros(ncp, np.float64)
    ck_del_letter = np.zeros((ncp, 4), np.float64)

    n0 = np.int64(0)
    for k in range(4):
        n0 += root_comp[k]

    cap = 256
    if cap > pop_cap + 1:
        cap = pop_cap + 1
    comp = np.zeros((cap, 4), np.int64)
    gen = np.zeros(cap, np.int64)
    cum = np.zeros((cap, 3), np.int64)  # ins, del, sub
    del_let = np.zeros((cap, 4), np.int64)
    next_t = np.zeros(cap, np.float64)
    stable = np.zeros(cap, np.int64)
    heap_t = np.zeros(cap, np.float64)
    heap_id = np.zeros(cap, np.int64)
    scratch_del = np.zeros(4, np.int64)
    perm = np.zeros(pop_cap + 1, np.int64)

    rcap = 1024 if record else 1
    rec = np.zeros((rcap, 6), np.int64)

    # slot 0: root strand
    for k in range(4):
        comp[0, k] = root_comp[k]
    n_slots = 1
    births = np.int64(1)
    multiplier = 1.0
    if record:
        rec[0, 0] = -1
        rec[0, 5] = n0

    hs = 0
    next_t[0] = _sample_time(rng, comp[0], mean_t, var_t, gaussian_mode)
    hs = _heap_push(heap_t, heap_id, hs, next_t[0], 0)

    keep = pop_cap // 2
    status = STATUS_OK

    for ci in range(ncp):
        tcp = checkpoints[ci]
        while hs > 0 and heap_t[0] <= tcp:
            t_ev, sid, hs = _heap_pop(heap_t, heap_id, hs)

            if n_slots == cap:
                newcap = cap * 2
                if newcap > pop_cap + 1:
                    newcap = pop_cap + 1
                comp, gen, cum, del_let, next_t, stable, heap_t, heap_id = _grow_state(
                    comp, gen, cum, del_let, next_t, stable, heap_t, heap_id, newcap
                )
                cap = newcap

            nid = n_slots
            ins, dels, subs = _mutate_counts_core(
                rng, comp[sid], comp[nid], scratch_del, p_ins, p_del, p_sub
            )
            clen = np.int64(0)
            for k in range(4):
                del_let[nid, k] = del_let[sid, k] + scratch_del[k]
                clen += comp[nid, k]
            cum[nid, 0] = cum[sid, 0] + ins
            cum[nid, 1] = cum[sid, 1] + dels
            cum[nid, 2] = cum[sid, 2] + subs
            gen[nid] = gen[sid] + 1
            stable[nid] = births
            if record:
                if births >= rcap:
                    rcap *= 2
                    rec = _grow_records(rec, rcap)
                rec[births, 0] = stable[sid]
                rec[births, 1] = gen[nid]
                rec[births, 2] = cum[nid, 0]
                rec[births, 3] = cum[nid, 1]
                rec[births, 4] = cum[nid, 2]
                rec[births, 5] = clen
            births += 1
            n_slots += 1

            # parent reschedules first, then the child if it can replicate
            next_t[sid] = t_ev + _sample_time(rng, comp[sid], mean_t, var_t, gaussian_mode)
            hs = _heap_push(heap_t, heap_id, hs, next_t[sid], sid)
            if clen > 0:
                next_t[nid] = t_ev + _sample_time(rng, comp[nid], mean_t, var_t, gaussian_mode)
                hs = _heap_push(heap_t, heap_id, hs, next_t[nid], nid)
            else:
                next_t[nid] = INF

            if n_slots > pop_cap:
                # uniform subsample of keep survivors: partial Fisher-Yates,
                # then sort so compaction can copy forward in place
                for i in range(n_slots):
                    perm[i] = i
                for i in range(keep):
                    j = i + rng.integers(0, n_slots - i)
                    perm[i], perm[j] = perm[j], perm[i]
                surv = np.sort(perm[:keep])
                multiplier *= n_slots / keep
                for i in range(keep):
                    s = surv[i]
                    for k in range(4):
                        comp[i, k] = comp[s, k]
                        del_let[i, k] = del_let[s, k]
                    for k in range(3):
                        cum[i, k] = cum[s, k]
                    gen[i] = gen[s]
                    next_t[i] = next_t[s]
                    stable[i] = stable[s]
                n_slots = keep
                hs = 0
                for i in range(keep):
                    if next_t[i] < INF:
                        heap_t[hs] = next_t[i]
                        heap_id[hs] = i
                        hs += 1
                _heapify(heap_t, heap_id, hs)

        if hs == 0:
            # no strand can replicate: everything left is length zero
            status = STATUS_EXTINCT
            break

        # exact statistics while the population fits the sample budget,
        # bootstrap with replacement once it does not
        s_gen = np.int64(0)
        s_ins = np.int64(0)
        s_del = np.int64(0)
        s_sub = np.int64(0)
        s_let = np.zeros(4, np.int64)
        if n_slots <= sample_cap:
            nsamp = n_slots
            for w in range(n_slots):
                s_gen += gen[w]
                s_ins += cum[w, 0]
                s_del += cum[w, 1]
                s_sub += cum[w, 2]
                for k in range(4):
                    s_let[k] += del_let[w, k]
        else:
            nsamp = sample_cap
            for _ in range(sample_cap):
                w = rng.integers(0, n_slots)
                s_gen += gen[w]
                s_ins += cum[w, 0]
                s_del += cum[w, 1]
                s_sub += cum[w, 2]
                for k in range(4):
                    s_let[k] += del_let[w, k]
        ck_live[ci] = n_slots
        ck_pop[ci] = n_slots * multiplier
        ck_gen[ci] = s_gen / nsamp
        ck_ins[ci] = (s_ins / nsamp) / n0
        ck_del[ci] = (s_del / nsamp) / n0
        ck_sub[ci] = (s_sub / nsamp) / n0
        for k in range(4):
            if root_comp[k] > 0:
                ck_del_letter[ci, k] = (s_let[k] / nsamp) / root_comp[k]
            else:
                ck_del_letter[ci, k] = 0.0

    n_rec = births if record else np.int64(0)
    return (
        ck_live,
        ck_pop,
        ck_gen,
        ck_del,
        ck_ins,
        ck_sub,
        ck_del_letter,
        status,
        births,
        rec[:n_rec],
    )
