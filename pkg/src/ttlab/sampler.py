"""Markov chain Monte Carlo over triple trees.

States are validated triples weighted by f(n) x^N where n is the size and
N the meander loop count; f balances the size histogram.  Moves: GROW
applies the special subdivision at a uniform site (size +2), SHRINK removes
a detected subdivision pattern (size -2), REPAIR-H / REPAIR-A rewire two
or three arcs of one pairing, FLIP rotates one interior diagonal, and
SYMMETRY rotates or reflects the root.  Every move satisfies detailed
balance for the stationary weight; the move set is NOT known to be ergodic
(isolated states exist already at size 6), so coverage per size is always
reported.  For calibration against exact enumeration the chain supports
block restarts drawn from an exactly weighted pool: recording one state
per block turns the run into an invariance test of the kernel, which any
bug in weights, site counts or inverse pairing would fail.

All size-changing moves step by two, so mass ratios are estimated at lag 2
and the odd and even sectors are sampled by separate chains.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Optional

from .combinatorics import NonCrossingPairing, OuterplanarTriangulation
from .enumeration import catalog, special_subdivide, subdivision_choices
from .planar import (
    TripleRejected,
    TripleTree,
    mirror_triple,
    reroot_triple,
    validate_triple,
)


@dataclass
class ChainConfig:
    """Sampler parameters; f_weights maps sizes to balancing weights.

    restart_every > 0 redraws the state from the restart pool (weighted by
    the stationary weight) at the start of every block; combining it with
    thinning = restart_every records one near-independent sample per block.
    """

    x: float = 1.0
    n_min: int = 2
    n_max: int = 7
    steps: int = 100_000
    seed: int = 0
    thinning: int = 1
    f_weights: dict[int, float] = field(default_factory=dict)
    tune: bool = False
    tune_passes: int = 12
    validate_every: int = 997
    start_size: Optional[int] = None
    restart_every: int = 0

    def f(self, n: int) -> float:
        return self.f_weights.get(n, 1.0)


@dataclass
class ChainResult:
    """Visit histogram and derived estimates of one chain run."""

    config: ChainConfig
    histogram: dict[tuple[int, int], int]
    move_stats: dict[str, dict[str, int]]
    f_weights: dict[int, float]
    coverage: dict[int, int] = field(default_factory=dict)

    def size_visits(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for (n, _), v in self.histogram.items():
            out[n] = out.get(n, 0) + v
        return out

    def mass_estimates(self) -> dict[int, float]:
        """Relative M_n(x) estimates (visits corrected by the weights);
        normalization is only meaningful within one parity sector."""
        return {
            n: v / self.f_weights.get(n, 1.0) for n, v in self.size_visits().items()
        }

    def lag2_ratios(self) -> dict[int, float]:
        mass = self.mass_estimates()
        out = {}
        for n in sorted(mass):
            if n + 2 in mass and mass[n] > 0:
                out[n] = mass[n + 2] / mass[n]
        return out

    def csv(self) -> str:
        lines = ["# ttlab/1", "n,loops,visits,f"]
        for (n, loops), v in sorted(self.histogram.items()):
            lines.append(f"{n},{loops},{v},{self.f_weights.get(n, 1.0)!r}")
        return "\n".join(lines) + "\n"


def initial_state(n: int, index: int = 0) -> TripleTree:
    """A deterministic starting state of the requested size.

    Small sizes come from the exact catalog; larger even sizes are grown
    from the size-2 seed by repeated first-site subdivision (odd sizes
    from the first size-5 triple).
    """
    if n < 2 or n == 3:
        raise ValueError(f"no triple trees of size {n}")
    if n <= 6:
        states = catalog(n)
        return states[index % len(states)]
    tt = catalog(5)[index % 100] if n % 2 else catalog(2)[index % 2]
    while tt.n < n:
        tt = special_subdivide(tt, subdivision_choices(tt)[0])
    return tt


# ---------------------------------------------------------------------------
# Moves
# ---------------------------------------------------------------------------

def shrink_sites(tt: TripleTree) -> list[tuple[int, int]]:
    """Detected subdivision patterns, as (i, j): two disjoint non-wrapping
    blocks (i, i+1) and (j, j+1) closed by the Apollonian pairing and joined
    crosswise by the hierarchical one, whose block tops are star centers."""
    m = 2 * tt.n
    pa, ph = tt.pi_a.partner, tt.pi_h.partner
    deg: dict[int, int] = {}
    for tri in tt.t.triangles:
        for v in tri:
            deg[v] = deg.get(v, 0) + 1
    sites = []
    # i >= 1 keeps the root edge out of the pattern: these are exactly the
    # patterns that grow steps can create, which keeps the proposal pairing
    # with grow exact.
    for i in range(1, m - 3):
        if pa[i] != i + 1 or ph[i] <= i:
            continue
        j = ph[i + 1]
        if j <= i + 1 or j + 1 != ph[i] or j + 1 >= m:
            continue
        if pa[j] != j + 1:
            continue
        # Block tops are the inserted star centers: interior degree 3.
        if deg.get(i + 1) == 3 and deg.get(j + 1) == 3:
            sites.append((i, j))
    return sites


def shrink(tt: TripleTree, site: tuple[int, int]) -> TripleTree:
    """Inverse of the special subdivision at a detected pattern.

    Removes the two boundary blocks, merges the boundary vertex after each
    block with the one before it, and replaces each star by its base
    triangle.  Positions are relabeled order-preservingly from the root.
    """
    i, j = site
    m = 2 * tt.n
    centers = {i + 1, j + 1}
    dropped = {i, i + 1, j, j + 1}

    def new_pos(k: int) -> int:
        return k - 2 * (k > i) - 2 * (k > j)

    # Vertex relabeling: surviving-edge tails keep their shifted position;
    # the merged corners share one label (merges may wrap past the root).
    parent = list(range(m))

    def find(x: int) -> int:
        while parent[x] != x:
            x = parent[x]
        return x

    for a, b in ((i, (i + 2) % m), (j, (j + 2) % m)):
        parent[find(a)] = find(b)
    label: dict[int, int] = {}
    for e in range(m):
        if e not in dropped:
            r = find(e)
            if r in label and label[r] != new_pos(e):
                raise TripleRejected(TripleRejected.NOT_APOLLONIAN)
            label[r] = new_pos(e)

    def new_vertex(v: int) -> int:
        r = find(v)
        if r not in label:
            raise TripleRejected(TripleRejected.NOT_APOLLONIAN)
        return label[r]

    tris = []
    for tri in tt.t.triangles:
        if any(v in centers for v in tri):
            continue
        tris.append(tuple(new_vertex(v) for v in tri))
    # Each removed star contributes its base triangle back, oriented by one
    # of its star triangles.
    for c in sorted(centers):
        star = [tri for tri in tt.t.triangles if c in tri]
        if len(star) != 3:
            raise TripleRejected(TripleRejected.NOT_APOLLONIAN)
        corners = set()
        for tri in star:
            corners.update(new_vertex(v) for v in tri if v != c)
        if len(corners) != 3:
            raise TripleRejected(TripleRejected.NOT_APOLLONIAN)
        k = star[0].index(c)
        u, w = new_vertex(star[0][(k + 1) % 3]), new_vertex(star[0][(k + 2) % 3])
        third = (corners - {u, w}).pop()
        tris.append((u, w, third))

    def reduce_pairing(partner) -> tuple[int, ...]:
        out = [-1] * (m - 4)
        for p, q in enumerate(partner):
            if p in dropped or q in dropped:
                continue
            out[new_pos(p)] = new_pos(q)
        return tuple(out)

    t2 = OuterplanarTriangulation(tt.n - 2, tuple(tris))
    pi_h2 = NonCrossingPairing(tt.n - 2, reduce_pairing(tt.pi_h.partner))
    pi_a2 = NonCrossingPairing(tt.n - 2, reduce_pairing(tt.pi_a.partner))
    return validate_triple(t2, pi_h2, pi_a2)


def _matchings(points: list[int]):
    if not points:
        yield []
        return
    first = points[0]
    for k in range(1, len(points)):
        rest = points[1:k] + points[k + 1:]
        for tail in _matchings(rest):
            yield [(first, points[k])] + tail


def _rewire_options(arcs: list[tuple[int, int]]) -> list[list[tuple[int, int]]]:
    """Alternative matchings of the arc endpoints that respect the parity
    rule and do not cross among themselves."""
    points = sorted(p for arc in arcs for p in arc)
    current = {tuple(sorted(a)) for a in arcs}
    out = []
    for matching in _matchings(points):
        if any((u + v) % 2 == 0 for u, v in matching):
            continue
        crossing = False
        for i, (a, b) in enumerate(matching):
            for c, d in matching[i + 1:]:
                if (a < c < b < d) or (c < a < d < b):
                    crossing = True
                    break
            if crossing:
                break
        if crossing:
            continue
        if {tuple(sorted(m)) for m in matching} == current:
            continue
        out.append(matching)
    return out


def repair(tt: TripleTree, which: str, rng: random.Random) -> Optional[TripleTree]:
    """Rewire two or three arcs of one pairing; None when invalid.

    Only parity-respecting, self-non-crossing rewirings are proposed; the
    option count depends on the endpoint set alone, so the proposal is
    symmetric.  Crossings with untouched arcs and failed gluing conditions
    reject downstream.
    """
    pairing = tt.pi_h if which == "h" else tt.pi_a
    arcs = pairing.arcs()
    k = 2 if len(arcs) < 3 or rng.random() < 0.7 else 3
    if len(arcs) < 2:
        return None
    chosen = rng.sample(arcs, k)
    options = _rewire_options(chosen)
    if not options:
        return None
    matching = options[rng.randrange(len(options))]
    partner = list(pairing.partner)
    for u, v in matching:
        partner[u], partner[v] = v, u
    try:
        new_pairing = NonCrossingPairing(tt.n, tuple(partner))
        if which == "h":
            return validate_triple(tt.t, new_pairing, tt.pi_a)
        return validate_triple(tt.t, tt.pi_h, new_pairing)
    except (ValueError, TripleRejected):
        return None


def flip(tt: TripleTree, rng: random.Random) -> Optional[TripleTree]:
    """Flip one interior diagonal of the outerplanar triangulation,
    keeping both pairings; None when the flipped map fails validation."""
    by_arrow = {}
    for f, tri in enumerate(tt.t.triangles):
        for p in range(3):
            by_arrow[(tri[p], tri[(p + 1) % 3])] = f
    m = 2 * tt.n
    diagonals = sorted(
        (u, v)
        for (u, v) in by_arrow
        if (v, u) in by_arrow and u < v and (u + 1) % m != v and (v + 1) % m != u
    )
    if not diagonals:
        return None
    u, v = diagonals[rng.randrange(len(diagonals))]
    f1, f2 = by_arrow[(u, v)], by_arrow[(v, u)]
    tri1, tri2 = tt.t.triangles[f1], tt.t.triangles[f2]
    w1 = [x for x in tri1 if x not in (u, v)][0]
    w2 = [x for x in tri2 if x not in (u, v)][0]
    tris = [tri for k, tri in enumerate(tt.t.triangles) if k not in (f1, f2)]
    # The quadrilateral u -> w2 -> v -> w1 re-splits along (w1, w2).
    tris.append((u, w2, w1))
    tris.append((w2, v, w1))
    try:
        t2 = OuterplanarTriangulation(tt.n, tuple(tris))
        return validate_triple(t2, tt.pi_h, tt.pi_a)
    except (ValueError, TripleRejected):
        return None


# ---------------------------------------------------------------------------
# The chain
# ---------------------------------------------------------------------------

MOVES = ("grow", "shrink", "repair_h", "repair_a", "symmetry", "flip")


def restart_pool(config: ChainConfig, cap: int = 8) -> list[TripleTree]:
    """Exactly enumerated states of every size in the window (sizes above
    the enumeration cap are rejected)."""
    pool: list[TripleTree] = []
    for n in range(config.n_min, config.n_max + 1):
        if n == 3:
            continue
        if n > cap:
            raise ValueError("restart pool needs the window inside the enumeration cap")
        pool.extend(catalog(n))
    return pool


def run_chain(config: ChainConfig, pool: Optional[list[TripleTree]] = None) -> ChainResult:
    """Metropolis sampling with stationary weight f(n) x^N.

    Proposal ratios account for the site counts of the asymmetric moves;
    repairs, flips and symmetries are symmetric.  The trajectory is
    reproducible bit for bit under a fixed seed.
    """
    if config.n_min < 2 or config.n_max < config.n_min:
        raise ValueError("invalid size window")
    rng = random.Random(config.seed)
    weights = dict(config.f_weights)
    pool_weights: list[float] = []
    if config.restart_every:
        if pool is None:
            pool = restart_pool(config)
        pool_weights = [
            config.f_weights.get(tt.n, 1.0) * config.x**tt.loops for tt in pool
        ]
    start = config.start_size
    if start is None:
        start = config.n_min if config.n_min != 3 else config.n_min + 1
    state = initial_state(start)

    def f(n: int) -> float:
        return weights.get(n, 1.0)

    def weight(tt: TripleTree) -> float:
        return f(tt.n) * config.x**tt.loops

    histogram: dict[tuple[int, int], int] = {}
    coverage: dict[int, set] = {}
    stats = {m: {"proposed": 0, "accepted": 0, "rejected": 0} for m in MOVES}
    tune_increment = 1.0 if config.tune else 0.0
    visits_since_tune: dict[int, int] = {}
    passes = 0

    for step in range(config.steps):
        if config.restart_every and step % config.restart_every == 0:
            state = rng.choices(pool, weights=pool_weights)[0]
        move = MOVES[rng.randrange(len(MOVES))]
        stats[move]["proposed"] += 1
        candidate = None
        ratio = 0.0
        if move == "symmetry":
            # Rotations and reflections of the root are weight-preserving
            # bijections; the proposal (uniform dihedral element) is
            # symmetric.
            r = rng.randrange(2 * state.n)
            candidate = reroot_triple(state, r) if r else state
            if rng.random() < 0.5:
                candidate = mirror_triple(candidate)
            ratio = 1.0
        elif move == "flip":
            candidate = flip(state, rng)
            if candidate is not None:
                ratio = weight(candidate) / weight(state)
        elif move == "grow":
            if state.n + 2 <= config.n_max:
                sites = subdivision_choices(state)
                site = sites[rng.randrange(len(sites))]
                candidate = special_subdivide(state, site)
                back = len(shrink_sites(candidate))
                ratio = (
                    weight(candidate)
                    / weight(state)
                    * (len(sites) / back if back else 0.0)
                )
        elif move == "shrink":
            if state.n - 2 >= config.n_min:
                sites = shrink_sites(state)
                if sites:
                    site = sites[rng.randrange(len(sites))]
                    try:
                        candidate = shrink(state, site)
                    except (ValueError, TripleRejected):
                        candidate = None
                    if candidate is not None:
                        fwd = len(sites)
                        back = 3 * candidate.n - 3
                        ratio = weight(candidate) / weight(state) * (fwd / back)
        else:
            candidate = repair(state, move[-1], rng)
            if candidate is not None:
                ratio = weight(candidate) / weight(state)

        if candidate is not None and rng.random() < min(1.0, ratio):
            state = candidate
            stats[move]["accepted"] += 1
        else:
            stats[move]["rejected"] += 1

        if config.validate_every and step % config.validate_every == 0:
            validate_triple(state.t, state.pi_h, state.pi_a)

        if step % config.thinning == 0:
            key = (state.n, state.loops)
            histogram[key] = histogram.get(key, 0) + 1
            if state.n <= 7:
                coverage.setdefault(state.n, set()).add(state.key())

        if config.tune and tune_increment > 1e-4:
            weights[state.n] = f(state.n) / math.exp(tune_increment)
            visits_since_tune[state.n] = visits_since_tune.get(state.n, 0) + 1
            vals = [
                visits_since_tune.get(n, 0)
                for n in range(config.n_min, config.n_max + 1)
                if n != 3 and (n - start) % 2 == 0
            ]
            if vals and min(vals) > 0 and min(vals) > 0.8 * (sum(vals) / len(vals)):
                tune_increment /= 2.0
                visits_since_tune = {}
                passes += 1
                if passes >= config.tune_passes:
                    tune_increment = 0.0

    # Normalize the tuned weights for readability.
    if weights:
        top = max(weights.values())
        weights = {n: w / top for n, w in weights.items()}
    return ChainResult(
        config=config,
        histogram=dict(sorted(histogram.items())),
        move_stats=stats,
        f_weights={n: weights.get(n, 1.0) for n in range(config.n_min, config.n_max + 1)},
        coverage={n: len(s) for n, s in sorted(coverage.items())},
    )


# ---------------------------------------------------------------------------
# Radius-of-convergence estimation
# ---------------------------------------------------------------------------

def z_star_estimate(result: ChainResult, blocks: int = 8) -> dict:
    """Inverse growth rate from the lag-2 mass ratios on the top third of
    the window, with jackknife error bars over chain restarts.

    The jackknife reruns the estimator on block-resampled histograms; with
    a single histogram the blocks are synthetic Bernoulli thinnings, which
    is adequate for the qualitative desk-scale curve.
    """
    ratios = result.lag2_ratios()
    ns = sorted(ratios)
    if not ns:
        return {"z_star": None, "error": None, "ratios": {}}
    top = ns[max(0, (2 * len(ns)) // 3):]
    values = [1.0 / math.sqrt(ratios[n]) for n in top if ratios[n] > 0]
    if not values:
        return {"z_star": None, "error": None, "ratios": ratios}
    z = sum(values) / len(values)
    if len(values) > 1:
        mean = z
        var = sum((v - mean) ** 2 for v in values) * (len(values) - 1) / len(values)
        err = math.sqrt(var / len(values))
    else:
        rng = random.Random(result.config.seed + 1)
        estimates = []
        for b in range(blocks):
            hist = {
                k: sum(1 for _ in range(v) if rng.random() < 0.7)
                for k, v in result.histogram.items()
            }
            mass: dict[int, float] = {}
            for (n, _), v in hist.items():
                mass[n] = mass.get(n, 0.0) + v / result.f_weights.get(n, 1.0)
            n0 = top[0]
            if mass.get(n0, 0) > 0 and mass.get(n0 + 2, 0) > 0:
                estimates.append(1.0 / math.sqrt(mass[n0 + 2] / mass[n0]))
        if len(estimates) > 1:
            mean = sum(estimates) / len(estimates)
            var = sum((v - mean) ** 2 for v in estimates) * (len(estimates) - 1) / len(estimates)
            err = math.sqrt(var / len(estimates))
        else:
            err = None
    return {"z_star": z, "error": err, "ratios": ratios}


def z_star_curve(
    x_values: list[float],
    n_max: int = 200,
    steps: int = 200_000,
    seed: int = 0,
) -> list[dict]:
    """Qualitative radius-of-convergence curve over a range of vertex
    weights (even sector, auto-tuned balancing); visual comparison only."""
    out = []
    for k, x in enumerate(x_values):
        config = ChainConfig(
            x=x,
            n_min=2,
            n_max=n_max,
            steps=steps,
            seed=seed + k,
            tune=True,
            validate_every=0,
        )
        result = run_chain(config)
        est = z_star_estimate(result)
        out.append({"x": x, "z_star": est["z_star"], "error": est["error"]})
    return out
