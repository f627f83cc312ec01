"""Brute-force oracles, kept deliberately independent of the library's
computation paths: quantifiers are run literally over materialised open
families.  Only usable on small inputs."""

from itertools import combinations

from topogrpd import fintop, grpd
from topogrpd.fintop import FinSpace


def opens_of(space, cap=4096):
    return list(space.opens(cap=cap))


def quasi_homeo_oracle(f) -> bool:
    """Literal check: the preimage map on explicit open families bijects."""
    dom_opens = set(opens_of(f.domain))
    preimages = [f.preimage(o) for o in opens_of(f.codomain)]
    return (
        len(set(map(frozenset, preimages))) == len(preimages)
        and set(map(frozenset, preimages)) == dom_opens
    )


def skula_space_oracle(space) -> FinSpace:
    """Skula topology by saturating opens and closeds."""
    opens = opens_of(space)
    closeds = [space.points - o for o in opens]
    return fintop.generate_topology(space.points, opens + closeds)


def skula_dense_oracle(subset, space) -> bool:
    sk = skula_space_oracle(space)
    subset = frozenset(subset)
    return all(o & subset for o in opens_of(sk) if o)


def sober_oracle(space) -> bool:
    """Cover-based irreducibility over all closed sets."""
    closeds = [space.points - o for o in opens_of(space)]
    irreducible = []
    for c in closeds:
        if not c:
            continue
        reducible = False
        for a in closeds:
            for b in closeds:
                if c <= (a | b) and not c <= a and not c <= b:
                    reducible = True
                    break
            if reducible:
                break
        if not reducible:
            irreducible.append(c)
    for c in irreducible:
        generic = [x for x in c if space.closure({x}) == c]
        if len(generic) != 1:
            return False
    return True


def local_homeo_oracle(f) -> bool:
    """Exhaustive search for a good open V around every point."""
    cod_opens = opens_of(f.codomain)
    for y in f.domain.points:
        found = False
        for v in opens_of(f.domain):
            if y not in v:
                continue
            img = frozenset(f.mapping[z] for z in v)
            if img not in set(map(frozenset, cod_opens)):
                continue
            if len(img) != len(v):
                continue
            # restriction V -> img is a continuous bijection; the inverse
            # is continuous iff images of subspace opens are open
            sub_v = f.domain.subspace(v)
            sub_i = f.codomain.subspace(img)
            ok = all(
                sub_i.is_open(frozenset(f.mapping[z] for z in o))
                for o in opens_of(sub_v)
            )
            if ok:
                found = True
                break
        if not found:
            return False
    return True


def skula_dense_orbits_oracle(incl, u) -> bool:
    """The literal quantifier over pairs of opens of u's object subspace."""
    amb = incl.ambient
    u0 = u.object_set
    u0space = amb.objects.subspace(u0)
    ybar = grpd.object_orbit_closure(amb, incl.object_set)
    s, t = amb.src.mapping, amb.tgt.mapping
    opens = opens_of(u0space)
    for w in opens:
        for w2 in opens:
            if not (w2 & ybar) <= (w & ybar):
                continue
            for x in w2:
                if not any(
                    s[a] == x and t[a] in w for a in u.arrow_set
                ):
                    return False
    return True


def source_determined_oracle(incl, u) -> bool:
    """The literal quantifier: every open V of the span subspace equals
    s^-1(W) & t^-1(Y0) on bi-orbits for some open W of u's objects."""
    amb = incl.ambient
    s, t = amb.src.mapping, amb.tgt.mapping
    u0, y0, y1 = u.object_set, incl.object_set, incl.arrow_set
    span = frozenset(a for a in amb.arrows.points if s[a] in u0 and t[a] in y0)
    span_space = amb.arrows.subspace(span)
    u0space = amb.objects.subspace(u0)
    u0_opens = opens_of(u0space)
    for v in opens_of(span_space):
        realized = set()
        for eta in v:
            for zeta in u.arrow_set:
                if t[zeta] != s[eta]:
                    continue
                ez = amb.comp[(eta, zeta)]
                for theta in y1:
                    if s[theta] == t[ez]:
                        realized.add(amb.comp[(theta, ez)])
        ok = False
        for w in u0_opens:
            cut = frozenset(a for a in span if s[a] in w)
            if cut == frozenset(realized):
                ok = True
                break
        if not ok:
            return False
    return True


def subgroups_oracle(elements, mult):
    """All subgroups of a finite group, by closure-join search."""
    elements = frozenset(elements)
    ident = next(
        e for e in elements if all(mult[(e, x)] == x for x in elements)
    )

    def close(gens):
        out = {ident} | set(gens)
        frontier = list(out)
        while frontier:
            a = frontier.pop()
            for b in list(out):
                for c in (mult[(a, b)], mult[(b, a)]):
                    if c not in out:
                        out.add(c)
                        frontier.append(c)
        return frozenset(out)

    subs = {frozenset([ident])}
    frontier = [frozenset([ident])]
    while frontier:
        h = frontier.pop()
        for g in elements:
            if g not in h:
                j = close(h | {g})
                if j not in subs:
                    subs.add(j)
                    frontier.append(j)
    return subs


def double_cosets_oracle(elements, mult, h, k):
    """The set of double cosets HgK."""
    out = set()
    for g in elements:
        out.add(
            frozenset(mult[(mult[(a, g)], b)] for a in h for b in k)
        )
    return out


def generated_topology_oracle(points, subbasis) -> FinSpace:
    """Saturate a subbasis by literal finite intersections then unions."""
    points = frozenset(points)
    basis = {points}
    for r in range(1, len(subbasis) + 1):
        for combo in combinations(list(subbasis), r):
            basis.add(frozenset.intersection(*map(frozenset, combo)))
    opens = {frozenset()}
    frontier = [frozenset()]
    while frontier:
        o = frontier.pop()
        for b in basis:
            u = o | b
            if u not in opens:
                opens.add(u)
                frontier.append(u)
    return FinSpace.from_opens(points, opens)
