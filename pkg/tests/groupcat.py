"""A constructive catalog of all groups of order <= 24.

Groups are multiplication tables on range(n) with identity 0.  The pool
of constructions (cyclic, dihedral, dicyclic, permutation specials,
direct and semidirect products, one central-product quotient) is
deduplicated by isomorphism and checked against the known number of
groups of each order; a mismatch fails loudly instead of silently
shrinking the catalog."""

from itertools import permutations, product

# number of groups of order n, for n = 1..24
KNOWN_COUNTS = [1, 1, 1, 2, 1, 2, 1, 5, 2, 2, 1, 5, 1, 2, 1, 14, 1, 5, 1, 5, 2, 2, 1, 15]


def normalize(elements, mult):
    """Relabel a group as a table on range(n) with identity 0."""
    elements = list(elements)
    ident = next(
        e for e in elements if all(mult[(e, x)] == x == mult[(x, e)] for x in elements)
    )
    order = [ident] + [e for e in elements if e != ident]
    idx = {e: i for i, e in enumerate(order)}
    n = len(order)
    return tuple(
        tuple(idx[mult[(order[i], order[j])]] for j in range(n)) for i in range(n)
    )


def table_order(t):
    return len(t)


def element_orders(t):
    n = len(t)
    out = []
    for x in range(n):
        k, y = 1, x
        while y != 0:
            y = t[y][x]
            k += 1
        out.append(k)
    return out


def inverse_of(t, x):
    return next(y for y in range(len(t)) if t[x][y] == 0)


def is_abelian(t):
    n = len(t)
    return all(t[i][j] == t[j][i] for i in range(n) for j in range(n))


def center_size(t):
    n = len(t)
    return sum(1 for x in range(n) if all(t[x][y] == t[y][x] for y in range(n)))


def conjugacy_profile(t):
    n = len(t)
    seen = set()
    sizes = []
    for x in range(n):
        if x in seen:
            continue
        cls = {t[t[g][x]][inverse_of(t, g)] for g in range(n)}
        seen |= cls
        sizes.append(len(cls))
    return tuple(sorted(sizes))


def invariant(t):
    return (
        len(t),
        is_abelian(t),
        tuple(sorted(element_orders(t))),
        center_size(t),
        conjugacy_profile(t),
    )


def generators_of(t):
    """A small generating sequence, greedily."""
    n = len(t)
    gens = []
    closure = {0}
    while len(closure) < n:
        g = next(x for x in range(n) if x not in closure)
        gens.append(g)
        frontier = [g]
        closure.add(g)
        while frontier:
            a = frontier.pop()
            for b in list(closure):
                for c in (t[a][b], t[b][a]):
                    if c not in closure:
                        closure.add(c)
                        frontier.append(c)
    return gens


def _extend_hom(t_dom, t_cod, gens, images):
    """Extend generator images to a full map, or None if inconsistent."""
    n = len(t_dom)
    hom = {0: 0}
    for g, img in zip(gens, images):
        hom[g] = img
    changed = True
    while changed and len(hom) <= n:
        changed = False
        for a in list(hom):
            for b in list(hom):
                c = t_dom[a][b]
                v = t_cod[hom[a]][hom[b]]
                if c in hom:
                    if hom[c] != v:
                        return None
                else:
                    hom[c] = v
                    changed = True
    if len(hom) != n:
        return None
    for a in range(n):
        for b in range(n):
            if hom[t_dom[a][b]] != t_cod[hom[a]][hom[b]]:
                return None
    return hom


def isomorphic(t1, t2) -> bool:
    if invariant(t1) != invariant(t2):
        return False
    gens = generators_of(t1)
    if not gens:
        return True
    orders1 = element_orders(t1)
    orders2 = element_orders(t2)
    candidates = [
        [y for y in range(len(t2)) if orders2[y] == orders1[g]] for g in gens
    ]
    for images in product(*candidates):
        hom = _extend_hom(t1, t2, gens, images)
        if hom is not None and len(set(hom.values())) == len(t2):
            return True
    return False


def automorphism_tables(t):
    """All automorphisms of t, as permutation tuples."""
    gens = generators_of(t)
    n = len(t)
    if not gens:
        return [(0,)]
    orders = element_orders(t)
    candidates = [[y for y in range(n) if orders[y] == orders[g]] for g in gens]
    out = []
    for images in product(*candidates):
        hom = _extend_hom(t, t, gens, images)
        if hom is not None and len(set(hom.values())) == n:
            out.append(tuple(hom[i] for i in range(n)))
    return sorted(set(out))


# -- constructions ------------------------------------------------------------


def cyclic(n):
    return tuple(tuple((i + j) % n for j in range(n)) for i in range(n))


def direct(t1, t2):
    els = [(a, b) for a in range(len(t1)) for b in range(len(t2))]
    mult = {
        (x, y): (t1[x[0]][y[0]], t2[x[1]][y[1]]) for x in els for y in els
    }
    return normalize(els, mult)


def dihedral(n):
    """Order 2n: rotations r^i and reflections r^i s."""
    els = [(i, j) for j in (0, 1) for i in range(n)]
    mult = {}
    for (i, j) in els:
        for (k, l) in els:
            # (r^i s^j)(r^k s^l) = r^(i + (-1)^j k) s^(j+l)
            mult[((i, j), (k, l))] = ((i + (k if j == 0 else -k)) % n, (j + l) % 2)
    return normalize(els, mult)


def dicyclic(n):
    """Order 4n: a^i b^j with a^2n = 1, b^2 = a^n, b a b^-1 = a^-1."""
    els = [(i, j) for j in (0, 1) for i in range(2 * n)]
    mult = {}
    for (i, j) in els:
        for (k, l) in els:
            if j == 0:
                mult[((i, j), (k, l))] = ((i + k) % (2 * n), l)
            elif l == 0:
                mult[((i, j), (k, l))] = ((i - k) % (2 * n), 1)
            else:
                mult[((i, j), (k, l))] = ((i - k + n) % (2 * n), 0)
    return normalize(els, mult)


def perm_group(gens, degree):
    els = {tuple(range(degree))}
    frontier = list(els)
    gens = [tuple(g) for g in gens]
    while frontier:
        p = frontier.pop()
        for g in gens:
            q = tuple(p[g[i]] for i in range(degree))
            if q not in els:
                els.add(q)
                frontier.append(q)
    mult = {
        (p, q): tuple(p[q[i]] for i in range(degree)) for p in els for q in els
    }
    return normalize(els, mult)


def symmetric(n):
    els = list(permutations(range(n)))
    mult = {(p, q): tuple(p[q[i]] for i in range(n)) for p in els for q in els}
    return normalize(els, mult)


def alternating4():
    return perm_group([(1, 2, 0, 3), (1, 0, 3, 2)], 4)


def sl23():
    """2x2 matrices over GF(3) with determinant 1."""
    els = []
    for a in range(3):
        for b in range(3):
            for c in range(3):
                for d in range(3):
                    if (a * d - b * c) % 3 == 1:
                        els.append((a, b, c, d))
    mult = {}
    for m in els:
        for k in els:
            mult[(m, k)] = (
                (m[0] * k[0] + m[1] * k[2]) % 3,
                (m[0] * k[1] + m[1] * k[3]) % 3,
                (m[2] * k[0] + m[3] * k[2]) % 3,
                (m[2] * k[1] + m[3] * k[3]) % 3,
            )
    return normalize(els, mult)


def homomorphisms(t_dom, auts):
    """All homomorphisms from t_dom into a group of automorphism
    permutations (with composition), as maps element -> permutation."""
    n_aut = len(auts)
    aut_idx = {a: i for i, a in enumerate(auts)}
    comp_table = tuple(
        tuple(aut_idx[tuple(a[b[i]] for i in range(len(b)))] for b in auts)
        for a in auts
    )
    gens = generators_of(t_dom)
    if not gens:
        return [{0: auts[aut_idx[tuple(range(len(auts[0])))]]}]
    dom_orders = element_orders(t_dom)
    aut_orders = element_orders(comp_table)
    candidates = []
    for g in gens:
        candidates.append(
            [i for i in range(n_aut) if dom_orders[g] % aut_orders[i] == 0]
        )
    out = []
    for images in product(*candidates):
        hom = _extend_hom(t_dom, comp_table, gens, images)
        if hom is not None:
            out.append({x: auts[hom[x]] for x in range(len(t_dom))})
    return out


def semidirect(t_n, t_h, action):
    """t_n acted on by t_h through `action`: h -> permutation of N."""
    els = [(a, b) for a in range(len(t_n)) for b in range(len(t_h))]
    mult = {}
    for (a1, b1) in els:
        for (a2, b2) in els:
            mult[((a1, b1), (a2, b2))] = (t_n[a1][action[b1][a2]], t_h[b1][b2])
    return normalize(els, mult)


def quotient(t, subset):
    """Quotient by a normal subgroup given as a set of element indices."""
    n = len(t)
    cosets = {}
    for x in range(n):
        cosets[x] = frozenset(t[x][s] for s in subset)
    blocks = sorted(set(cosets.values()), key=sorted)
    mult = {}
    for b1 in blocks:
        for b2 in blocks:
            x, y = min(b1), min(b2)
            mult[(b1, b2)] = cosets[t[x][y]]
    return normalize(blocks, mult)


def pauli16():
    """The order-16 central product of the dihedral group of order 8 with
    the cyclic group of order 4 over their common central involution."""
    d4 = dihedral(4)
    z4 = cyclic(4)
    g32 = direct(d4, z4)
    # find a central element of order 2 that is a product of the two
    # central involutions (not lying in either factor alone)
    orders = element_orders(g32)
    n = len(g32)
    for z in range(1, n):
        if orders[z] != 2:
            continue
        if not all(g32[z][y] == g32[y][z] for y in range(n)):
            continue
        q = quotient(g32, {0, z})
        if len(q) == 16 and not is_abelian(q):
            for other in (dihedral(8), direct(d4, cyclic(2)), direct(dicyclic(2), cyclic(2))):
                if isomorphic(q, other):
                    break
            else:
                return q
    raise AssertionError("central product of order 16 not found")


def groups_up_to(max_order=24):
    """All groups of order <= max_order up to isomorphism, keyed by order.

    Raises AssertionError when the per-order counts disagree with the
    classification."""
    catalog = {n: [] for n in range(1, max_order + 1)}

    def add(t):
        n = len(t)
        if n > max_order:
            return
        for old in catalog[n]:
            if isomorphic(t, old):
                return
        catalog[n].append(t)

    for n in range(1, max_order + 1):
        add(cyclic(n))
        if n % 2 == 0 and n >= 6:
            add(dihedral(n // 2))
        if n % 4 == 0 and n >= 8:
            add(dicyclic(n // 4))
    add(symmetric(3))
    add(symmetric(4))
    add(alternating4())
    add(sl23())
    add(pauli16())
    for n in range(2, max_order + 1):
        for d in range(2, n):
            if n % d or n // d < 2:
                continue
            for t1 in list(catalog[d]):
                for t2 in list(catalog[n // d]):
                    add(direct(t1, t2))
                    auts = automorphism_tables(t1)
                    for action in homomorphisms(t2, auts):
                        add(semidirect(t1, t2, action))
    counts = [len(catalog[n]) for n in range(1, max_order + 1)]
    assert counts == KNOWN_COUNTS[:max_order], (
        f"catalog incomplete: {counts} != {KNOWN_COUNTS[:max_order]}"
    )
    return catalog


def table_to_mult(t):
    n = len(t)
    return {(i, j): t[i][j] for i in range(n) for j in range(n)}
