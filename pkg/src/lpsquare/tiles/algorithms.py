"""Tree selection: the level-n decomposition and the iterated partition."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import Collection, Tree, below, maximal_tree, vectorize12
from .packets import DEFAULT_BUMP
from .quantities import (InvariantViolation, energy, model_form, rule, size, tree_mass, weights)

# largest sum |I_T| / 4^n of one decomposition over 50 seeded runs on the default collection was 24
MASS_CONSTANT = 32.0
# largest Lambda / prod E^(1-theta) size^theta over the same runs was 1.88
ABSTRACT_CONSTANT = 4.0
MAX_LEVELS = 10_000


class HypothesisError(ValueError):
    """The size of the input exceeds 2^-n times the energy."""


@dataclass
class Decomposition:
    P1: Collection
    pairs: list  # (T, T') selected trees, both inside the reference pool
    removed: list  # the (1,2)-vectorisation of each pair, as index arrays
    level: int
    energy: float
    mass: float
    checks: dict = field(default_factory=dict)

    @property
    def P2(self) -> list:
        return self.removed


def _selection_key(coll: Collection, top: int, kind: int, j: int):
    base = coll.base
    centre = base.lo[top, j - 1] + base.w[top] / 2
    length = float(base.lengths(top))
    start = base.pos[top] * length
    # top frequency centre first, then larger tops, then leftmost, then lowest strip
    return (-centre, -length, start, int(base.strip[top]), kind)


def energy_decompose(coll: Collection, data, j: int, n: int, l=None, variant: str = "vectorized",
                     energy_value: float | None = None, bump=DEFAULT_BUMP) -> Decomposition:
    """Split off vectorised trees until no tree has mass ratio above (2^-n E)^2 / 4.

    Candidates are maximal trees of the reference pool (3-trees for j in
    {1, 2}, 1- and 2-trees for j = 3).  The chosen tree T and the j-tree T'
    of remaining pool members below its top are removed together with all
    their translates.
    """
    r = rule(j, l, variant)
    if len(coll) == 0:
        return Decomposition(coll, [], [], n, 0.0, 0.0, {
            "partition": True, "size_drop": True, "size_after": 0.0,
            "translation_closed": True, "mass_ratio": 0.0, "mass_bound": True})
    E = energy(coll, data, j, l, variant, bump, exhaustive=False).value if energy_value is None else energy_value
    s0 = size(coll, data, j, l, variant, bump).value
    if s0 > 2.0**-n * E * (1 + 1e-12):
        raise HypothesisError(f"size {s0:.6g} exceeds 2^-{n} x energy {E:.6g}")
    wt = weights(coll, data, j, bump)
    base = coll.base
    threshold = 0.25 * (2.0**-n * E) ** 2
    P = coll
    pairs, removed = [], []
    while len(P):
        pool = P.strip_members(0) if variant == "sequence" else P.reference()
        best = None
        for kind in r.kinds:
            for t in pool:
                T = maximal_tree(P, t, kind, pool)
                m = tree_mass(P, T.members, wt, r.l)
                # positive mass only: with zero data nothing exceeds the threshold
                if m > 0 and m >= threshold * T.top_length(base):
                    key = _selection_key(P, t, kind, j)
                    if best is None or key < best[0]:
                        best = (key, T)
        if best is None:
            break
        T = best[1]
        rest = np.setdiff1d(pool, T.members)
        Tp = Tree(rest[below(base, rest, T.top, j)], T.top, j, T.strip)
        gone = vectorize12(P, np.concatenate([T.members, Tp.members]))
        pairs.append((T, Tp))
        removed.append(gone)
        P = P.without(gone)
    mass = float(sum(T.top_length(base) for T, _ in pairs))
    d = Decomposition(P, pairs, removed, n, E, mass)
    d.checks = audit(coll, d, data, j, l, variant, bump)
    return d


def audit(coll: Collection, d: Decomposition, data, j: int, l=None, variant="vectorized", bump=DEFAULT_BUMP) -> dict:
    """Postconditions recomputed from the outputs alone."""
    parts = [d.P1.members] + list(d.removed)
    flat = np.concatenate(parts) if parts else np.array([], dtype=int)
    s1 = size(d.P1, data, j, l, variant, bump).value
    return {
        "partition": bool(flat.size == np.unique(flat).size and np.array_equal(np.sort(flat), coll.members)),
        "size_drop": bool(s1 <= 2.0 ** (-d.level - 1) * d.energy * (1 + 1e-12)),
        "size_after": s1,
        "translation_closed": bool(d.P1.is_translation_closed() or not coll.is_translation_closed()),
        "mass_ratio": d.mass / 4.0**d.level,
        "mass_bound": bool(d.mass <= MASS_CONSTANT * 4.0**d.level),
    }


@dataclass
class AbstractBound:
    form: float
    bound: float
    ratio: float
    energies: tuple
    sizes: tuple
    levels: list
    pieces: list
    checks: dict


def abstract_bound_report(coll: Collection, f1, f2, f3_seq, theta=(1 / 3, 1 / 3, 1 / 3),
                          bump=DEFAULT_BUMP) -> AbstractBound:
    """Iterate the three decompositions level by level and compare Lambda with the interpolated bound.

    Returns the partition {Q^n}, the tree mass sum |I_T| of each
    decomposition against MASS_CONSTANT 4^n, and Lambda_Q / prod E_j^(1-theta_j) size_j^theta_j.
    """
    theta = tuple(float(t) for t in theta)
    if len(theta) != 3 or min(theta) <= 0 or abs(sum(theta) - 1) > 1e-12:
        raise ValueError("theta must be three positive reals summing to 1")
    data = (f1, f2, f3_seq)
    E = tuple(energy(coll, data[j - 1], j, bump=bump, exhaustive=False).value for j in (1, 2, 3))
    S = tuple(size(coll, data[j - 1], j, bump=bump).value for j in (1, 2, 3))
    form = model_form(coll, f1, f2, f3_seq, bump=bump)
    bound = float(np.prod([E[i] ** (1 - theta[i]) * S[i] ** theta[i] for i in range(3)]))
    if min(S) == 0:
        if form > 0:
            raise InvariantViolation("positive model form with a vanishing size")
        return AbstractBound(form, bound, 0.0, E, S, [], [coll.members], {"mass_bound": True, "terminated": True, "partition": True, "ratio_bound": True})
    if min(E) == 0:
        raise InvariantViolation("positive size with vanishing energy")
    n = min(int(np.floor(np.log2(E[i] / S[i]))) for i in range(3))
    P = coll
    levels, pieces = [], []
    start = n
    while len(P):
        if n - start >= MAX_LEVELS:
            raise RuntimeError("decomposition did not terminate: algorithm bug")
        sizes_now = [size(P, data[j - 1], j, bump=bump).value for j in (1, 2, 3)]
        if min(sizes_now) == 0:
            break
        taken, mass, ratios, ok = [], 0.0, [], True
        for j in (1, 2, 3):
            d = energy_decompose(P, data[j - 1], j, n, energy_value=E[j - 1], bump=bump)
            if not (d.checks["partition"] and d.checks["size_drop"]):
                raise InvariantViolation(f"decomposition postcondition failed at level {n}, j = {j}")
            taken.extend(d.removed)
            mass += d.mass
            ratios.append(d.checks["mass_ratio"])
            ok = ok and d.checks["mass_bound"]
            P = d.P1
        piece = np.concatenate(taken) if taken else np.array([], dtype=int)
        pieces.append(piece)
        levels.append({
            "n": n,
            "tritiles": int(piece.size),
            "mass": mass,
            "mass_over_4n": mass / 4.0**n,
            "mass_ratios": ratios,
            "bound_holds": ok,
            "form": model_form(coll, f1, f2, f3_seq, piece, bump) if piece.size else 0.0,
        })
        n += 1
    if len(P):
        pieces.append(P.members)
    ratio = form / bound if bound > 0 else 0.0
    checks = {
        "mass_bound": all(lv["bound_holds"] for lv in levels),
        "terminated": True,
        "partition": bool(np.array_equal(np.sort(np.concatenate(pieces)), coll.members)) if pieces else len(coll) == 0,
        "ratio_bound": bool(ratio <= ABSTRACT_CONSTANT),
    }
    return AbstractBound(form, bound, ratio, E, S, levels, pieces, checks)
