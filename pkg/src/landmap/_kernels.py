"""Compiled inner loops of the simulator.

Graph tables (built by ``landmap.world.World``):

    nbr[v, s]         neighbor across slot s of v
    back[v, s]        slot of the same edge at that neighbor
    deg[v]            degree
    slot_label[v, s]  global label id of slot s at v (-1 padding)
    cum[v, s, :]      cumulative distribution of the slot actually taken
                      when slot s is intended

Every kernel draws from the caller's ``np.random.Generator`` so the Python
object's state advances exactly as if the draws had been made in Python.
Event logs are lists of ``(from_vertex, intended_slot, taken_slot)``.
"""
import numpy as np
from numba import njit


@njit(cache=True)
def move(rng, deg, cum, v, slot):
    k = deg[v]
    if k == 1:
        return slot
    u = rng.random()
    for a in range(k - 1):
        if u < cum[v, slot, a]:
            return a
    return k - 1


@njit(cache=True)
def _new_log():
    ev = [(0, 0, 0)]
    ev.pop()
    return ev


@njit(cache=True)
def _walk_home(rng, nbr, deg, cum, v, target, log, ev):
    steps = 0
    while v != target:
        s = int(rng.random() * deg[v])
        a = move(rng, deg, cum, v, s)
        if log:
            ev.append((v, s, a))
        v = nbr[v, a]
        steps += 1
    return v, steps


@njit(cache=True)
def walk_home(rng, nbr, deg, cum, v, target, log):
    ev = _new_log()
    v, steps = _walk_home(rng, nbr, deg, cum, v, target, log, ev)
    return v, steps, ev


@njit(cache=True)
def random_walk(rng, nbr, deg, cum, v, n, log):
    ev = _new_log()
    visited = np.empty(n, np.int64)
    for i in range(n):
        s = int(rng.random() * deg[v])
        a = move(rng, deg, cum, v, s)
        if log:
            ev.append((v, s, a))
        v = nbr[v, a]
        visited[i] = v
    return visited, ev


@njit(cache=True)
def explore(rng, nbr, back, deg, slot_label, cum, start, n, length, log):
    """``n`` random-direction walks of ``length`` steps, re-homing to ``start`` after each."""
    ev = _new_log()
    intended = np.empty((n, length), np.int64)
    taken = np.empty((n, length), np.int64)
    entry = np.empty((n, length), np.int64)
    arrived = np.empty((n, length), np.int64)
    steps = 0
    for i in range(n):
        v = start
        for j in range(length):
            s = int(rng.random() * deg[v])
            a = move(rng, deg, cum, v, s)
            if log:
                ev.append((v, s, a))
            w = nbr[v, a]
            intended[i, j] = slot_label[v, s]
            taken[i, j] = slot_label[v, a]
            entry[i, j] = slot_label[w, back[v, a]]
            arrived[i, j] = w
            v = w
        steps += length
        v, st = _walk_home(rng, nbr, deg, cum, v, start, log, ev)
        steps += st
    return intended, taken, entry, arrived, steps, ev


@njit(cache=True)
def follow(rng, nbr, back, deg, slot_label, cum, start, seq, n, log):
    """Attempt label sequence ``seq`` from ``start`` ``n`` times, re-homing after each.

    A step whose label is absent at the current vertex aborts the experiment;
    unfilled cells stay -1.
    """
    ev = _new_log()
    k = seq.shape[0]
    taken = np.full((n, k), -1, np.int64)
    entry = np.full((n, k), -1, np.int64)
    arrived = np.full((n, k), -1, np.int64)
    aborted = np.zeros(n, np.bool_)
    final = np.empty(n, np.int64)
    steps = 0
    for i in range(n):
        v = start
        for j in range(k):
            s = -1
            for t in range(deg[v]):
                if slot_label[v, t] == seq[j]:
                    s = t
                    break
            if s < 0:
                aborted[i] = True
                break
            a = move(rng, deg, cum, v, s)
            if log:
                ev.append((v, s, a))
            w = nbr[v, a]
            taken[i, j] = slot_label[v, a]
            entry[i, j] = slot_label[w, back[v, a]]
            arrived[i, j] = w
            v = w
            steps += 1
        final[i] = v
        v, st = _walk_home(rng, nbr, deg, cum, v, start, log, ev)
        steps += st
    return taken, entry, arrived, aborted, final, steps, ev
