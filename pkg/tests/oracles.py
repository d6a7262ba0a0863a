"""Brute-force reference computations used to cross-check the library.

These work from raw masses, blocks and assignment tables with plain loops
and share no decision code with statcat.
"""

from __future__ import annotations

import itertools
from fractions import Fraction


def atom_masses(mass, blocks):
    return [sum((mass[i] for i in b), Fraction(0)) for b in blocks]


def block_of(blocks, i):
    return next(k for k, b in enumerate(blocks) if i in b)


def atom_map(model, t):
    """A-atom index -> B-atom index for a map given by its point table."""
    a_blocks, b_blocks = model.sigma.blocks, t.codomain.blocks
    return [block_of(b_blocks, t.assignment[b[0]]) for b in a_blocks]


def duals(p_atoms, amap, n_b):
    """{(b, a): p(a|b)} on B-atoms of positive image mass."""
    image = [Fraction(0)] * n_b
    for a, w in enumerate(p_atoms):
        image[amap[a]] += w
    out = {}
    for b in range(n_b):
        if image[b] > 0:
            for a in range(len(p_atoms)):
                out[b, a] = p_atoms[a] / image[b] if amap[a] == b else Fraction(0)
    return out


def kernel_duals(p, matrix):
    """{(y, x): p(x|y)} for a general row-stochastic matrix."""
    q = [sum(p[x] * matrix[x][y] for x in range(len(p))) for y in range(len(matrix[0]))]
    return {
        (y, x): p[x] * matrix[x][y] / q[y] for y in range(len(q)) if q[y] > 0 for x in range(len(p))
    }


def duals_coincide(tables):
    for s, t in itertools.combinations(tables, 2):
        for key in s.keys() & t.keys():
            if s[key] != t[key]:
                return False
    return True


def sufficient(model, t, members=None):
    blocks = model.sigma.blocks
    amap = atom_map(model, t)
    nb = len(t.codomain.blocks)
    members = range(len(model)) if members is None else members
    return duals_coincide([duals(atom_masses(model.family[i].mass, blocks), amap, nb) for i in members])


def l1_classes(model):
    blocks = model.sigma.blocks
    vecs = [tuple(atom_masses(p.mass, blocks)) for p in model.family]
    classes = []
    for i, v in enumerate(vecs):
        for c in classes:
            if vecs[c[0]] == v:
                c.append(i)
                break
        else:
            classes.append([i])
    return [tuple(c) for c in classes]


def representatives(model):
    return [c[0] for c in l1_classes(model)]


def rank(rows):
    m = [list(r) for r in rows]
    r = 0
    ncols = len(m[0]) if m else 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c] / m[r][c]
                m[i] = [u - f * v for u, v in zip(m[i], m[r])]
        r += 1
    return r


def complete(nu_mass, target_blocks, t, source_blocks):
    """Trivial kernel of rho -> E(rho | generated algebra) on nu-positive atoms."""
    n_y = len(nu_mass)
    gens = [{t.assignment[i] for i in b} for b in source_blocks]
    keys = {}
    for y in range(n_y):
        keys.setdefault(tuple(y in g for g in gens), set()).add(y)
    cols = [b for b in target_blocks if sum(nu_mass[i] for i in b) > 0]
    if not cols:
        return True
    rows = []
    for g in keys.values():
        w = sum(nu_mass[y] for y in g)
        if w > 0:
            rows.append([sum(nu_mass[y] for y in g if y in b) / w for b in cols])
    return rank(rows) == len(cols)


def mono_epi(source_atoms, image_atoms, target_atoms):
    """Set-level mono/epi between L1-classes."""
    classes = {}
    for p, q in zip(source_atoms, image_atoms):
        classes.setdefault(tuple(q), set()).add(tuple(p))
    mono = all(len(v) == 1 for v in classes.values())
    epi = {tuple(q) for q in target_atoms} <= set(classes)
    return mono, epi


def kq(opens, n):
    """Kolmogorov quotient from a list of open sets."""
    opens = [frozenset(u) for u in opens]
    groups = {}
    for i in range(n):
        groups.setdefault(tuple(i in u for u in opens), []).append(i)
    classes = list(groups.values())
    cls = {i: k for k, c in enumerate(classes) for i in c}
    return len(classes), {frozenset(cls[i] for i in u) for u in opens}


def homeomorphic(opens_a, n_a, opens_b, n_b):
    ka, qa = kq(opens_a, n_a)
    kb, qb = kq(opens_b, n_b)
    if ka != kb:
        return False
    for perm in itertools.permutations(range(ka)):
        if {frozenset(perm[i] for i in u) for u in qa} == qb:
            return True
    return False
