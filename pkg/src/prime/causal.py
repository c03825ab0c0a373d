"""Constraint-based Bayesian-network structure learning over continuous data.

The skeleton search is the stable variant of the Peter-Clark algorithm:
at every depth the adjacency sets are frozen before any test of that depth
runs and edge removals are applied only at the end of the level, which makes
the learned skeleton independent of variable ordering.  Conditional
independence is judged by the Fisher z transform of the partial correlation
obtained from the inverted correlation submatrix.  After the skeleton,
v-structures are oriented from the recorded separating sets and Meek rules
1-4 are applied to closure; leftover edges stay undirected.

Arc confidences come from rerunning the search on seeded subsamples and
counting how often each directed arc appears.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
from scipy.stats import norm

from .errors import DataError


@dataclass
class CiRecord:
    x: str
    y: str
    given: tuple[str, ...]
    statistic: float
    p_value: float
    independent: bool


@dataclass
class Dag:
    """Directed arcs with confidences plus undirected residual edges."""

    nodes: list[str]
    arcs: list[dict] = field(default_factory=list)       # {from, to, confidence}
    undirected: list[tuple[str, str]] = field(default_factory=list)
    sepsets: dict = field(default_factory=dict, repr=False)
    trace: list[CiRecord] = field(default_factory=list, repr=False)
    log: list[str] = field(default_factory=list, repr=False)

    def arc_set(self):
        return {(a["from"], a["to"]) for a in self.arcs}

    def skeleton(self):
        und = {frozenset(e) for e in self.undirected}
        return und | {frozenset((a["from"], a["to"])) for a in self.arcs}

    def parents(self, node):
        return sorted(a["from"] for a in self.arcs if a["to"] == node)

    def to_json_dict(self):
        return {
            "nodes": list(self.nodes),
            "arcs": [dict(a) for a in self.arcs],
            "undirected": [sorted(e) for e in self.undirected],
        }

    def to_dot(self, highlight: str | None = None) -> str:
        lines = ["digraph structure {"]
        for node in self.nodes:
            shape = ' [shape=box, style=bold]' if node == highlight else ""
            lines.append(f'  "{node}"{shape};')
        for a in self.arcs:
            lines.append(f'  "{a["from"]}" -> "{a["to"]}" '
                         f'[label="{a["confidence"]:.2f}"];')
        for e in self.undirected:
            a, b = sorted(e)
            lines.append(f'  "{a}" -> "{b}" [dir=none, style=dashed];')
        lines.append("}")
        return "\n".join(lines) + "\n"


class SingularConditioningError(DataError):
    """The conditioning submatrix could not be inverted."""


def ci_test(data: np.ndarray, x: int, y: int, given: tuple[int, ...] = (),
            alpha: float = 0.05, corr: np.ndarray | None = None):
    """Fisher-z test of partial correlation of columns x, y given a set.

    Returns (statistic, p_value, independent).  ``corr`` may carry a
    precomputed correlation matrix of ``data``.
    """
    n = data.shape[0]
    if n <= len(given) + 3:
        raise DataError(f"need more than |S|+3 = {len(given) + 3} rows, have {n}")
    if corr is None:
        corr = np.corrcoef(data, rowvar=False)
    idx = [x, y, *given]
    sub = corr[np.ix_(idx, idx)]
    if len(given) == 0:
        rho = sub[0, 1]
    else:
        try:
            prec = np.linalg.inv(sub)
        except np.linalg.LinAlgError as exc:
            raise SingularConditioningError(
                f"singular conditioning submatrix for ({x},{y}|{given})") from exc
        denom = prec[0, 0] * prec[1, 1]
        if denom <= 0:
            raise SingularConditioningError(
                f"non-positive precision diagonal for ({x},{y}|{given})")
        rho = -prec[0, 1] / math.sqrt(denom)
    rho = min(1.0 - 1e-12, max(-1.0 + 1e-12, rho))
    stat = 0.5 * math.log((1 + rho) / (1 - rho)) * math.sqrt(n - len(given) - 3)
    p = 2.0 * float(norm.sf(abs(stat)))
    return stat, p, p > alpha


def pc_stable(data: np.ndarray, alpha: float = 0.05, max_depth: int = 3,
              node_names: list[str] | None = None) -> Dag:
    """Learn a CPDAG with the order-independent PC-stable search."""
    data = np.asarray(data, dtype=float)
    n, p = data.shape
    if p < 2:
        raise DataError("need at least 2 variables")
    names = list(node_names) if node_names else [f"v{j}" for j in range(p)]
    corr = np.corrcoef(data, rowvar=False)

    adj = {i: set(range(p)) - {i} for i in range(p)}
    sepsets: dict[frozenset, tuple[int, ...]] = {}
    trace: list[CiRecord] = []
    log: list[str] = []

    def run_test(x, y, S):
        try:
            stat, pv, indep = ci_test(data, x, y, S, alpha=alpha, corr=corr)
        except SingularConditioningError as exc:
            log.append(f"skipped test ({names[x]},{names[y]}|{S}): {exc}")
            return None
        trace.append(CiRecord(names[x], names[y], tuple(names[s] for s in S),
                              stat, pv, indep))
        return indep

    depth = 0
    while depth <= max_depth and n > depth + 3:
        frozen = {i: sorted(adj[i]) for i in range(p)}
        if all(len(frozen[i]) - 1 < depth for i in range(p)):
            break
        removals = []
        for i, j in combinations(range(p), 2):
            if j not in adj[i]:
                continue
            separated = False
            for side, other in ((i, j), (j, i)):
                candidates = [k for k in frozen[side] if k != other]
                if len(candidates) < depth:
                    continue
                for S in combinations(candidates, depth):
                    indep = run_test(side, other, S)
                    if indep:
                        sepsets[frozenset((i, j))] = S
                        removals.append((i, j))
                        separated = True
                        break
                if separated:
                    break
        for i, j in removals:  # PC-stable: apply at end of level
            adj[i].discard(j)
            adj[j].discard(i)
        depth += 1

    # orientation phase on a 0/1 adjacency matrix: amat[i][j]=1 means i-j or i->j
    amat = np.zeros((p, p), dtype=int)
    for i in range(p):
        for j in adj[i]:
            amat[i, j] = 1

    # v-structures: x -> z <- y when x,y nonadjacent and z outside sepset(x,y);
    # skeleton adjacency decides candidacy, later triples may overwrite earlier
    # orientations (relaxed CPDAG construction)
    skel = amat.copy()
    for x, y in combinations(range(p), 2):
        if skel[x, y] or skel[y, x]:
            continue
        key = frozenset((x, y))
        if key not in sepsets:
            continue
        for z in range(p):
            if z in (x, y) or not skel[x, z] or not skel[y, z]:
                continue
            if z not in sepsets[key]:
                amat[x, z] = amat[y, z] = 1
                amat[z, x] = amat[z, y] = 0

    _apply_meek_rules(amat)

    dag = Dag(nodes=names,
              sepsets={tuple(sorted((names[a], names[b]))):
                       tuple(names[s] for s in v)
                       for (a, b), v in ((tuple(k), v) for k, v in sepsets.items())},
              trace=trace, log=log)
    for i in range(p):
        for j in range(p):
            if amat[i, j] and not amat[j, i]:
                dag.arcs.append({"from": names[i], "to": names[j], "confidence": 1.0})
            elif i < j and amat[i, j] and amat[j, i]:
                dag.undirected.append((names[i], names[j]))
    return dag


def _apply_meek_rules(amat: np.ndarray) -> None:
    """Orient undirected edges to closure under Meek rules 1-4 (in place)."""
    p = amat.shape[0]

    def directed(a, b):
        return amat[a, b] == 1 and amat[b, a] == 0

    def undirected(a, b):
        return amat[a, b] == 1 and amat[b, a] == 1

    def adjacent(a, b):
        return amat[a, b] == 1 or amat[b, a] == 1

    changed = True
    while changed:
        changed = False
        for a, b in combinations(range(p), 2):
            for x, y in ((a, b), (b, a)):
                if not undirected(x, y):
                    continue
                orient = False
                # R1: c -> x and c,y nonadjacent  =>  x -> y
                if any(directed(c, x) and not adjacent(c, y)
                       for c in range(p) if c not in (x, y)):
                    orient = True
                # R2: x -> c -> y  =>  x -> y
                if not orient and any(directed(x, c) and directed(c, y)
                                      for c in range(p) if c not in (x, y)):
                    orient = True
                # R3: x - c -> y and x - d -> y with c,d nonadjacent  =>  x -> y
                if not orient:
                    mids = [c for c in range(p) if c not in (x, y)
                            and undirected(x, c) and directed(c, y)]
                    orient = any(not adjacent(c, d) for c, d in combinations(mids, 2))
                # R4: x - c, c -> d, d -> y, c,y nonadjacent  =>  x -> y
                if not orient:
                    for c in range(p):
                        if c in (x, y) or not undirected(x, c) or adjacent(c, y):
                            continue
                        if any(directed(c, d) and directed(d, y)
                               for d in range(p) if d not in (x, y, c)):
                            orient = True
                            break
                if orient:
                    amat[y, x] = 0
                    changed = True
    return None


def bootstrap_learn(data: np.ndarray, B: int = 100, subsample_fraction: float = 0.9,
                    alpha: float = 0.05, seed: int = 0,
                    confidence_threshold: float = 0.5, max_depth: int = 3,
                    node_names: list[str] | None = None) -> Dag:
    """Aggregate PC-stable over B seeded subsamples into a confidence-weighted DAG.

    A directed arc is retained when its appearance fraction reaches the
    confidence threshold; opposing directions resolve to the higher
    confidence (exact ties fall back to an undirected edge).  The retained
    set is made acyclic by iteratively dropping the weakest arc on a cycle.
    ``subsample_fraction >= 1`` reuses the rows as-is, so B=1 reproduces a
    single plain run.
    """
    data = np.asarray(data, dtype=float)
    n, p = data.shape
    if B < 1:
        raise DataError(f"B must be >= 1, got {B}")
    names = list(node_names) if node_names else [f"v{j}" for j in range(p)]

    arc_counts: dict[tuple[str, str], int] = {}
    und_counts: dict[frozenset, int] = {}
    children = np.random.SeedSequence(seed).spawn(B)
    for b in range(B):
        if subsample_fraction >= 1.0:
            rows = data
        else:
            m = max(1, int(round(subsample_fraction * n)))
            rng = np.random.Generator(np.random.PCG64(children[b]))
            rows = data[np.sort(rng.choice(n, size=m, replace=False))]
        rep = pc_stable(rows, alpha=alpha, max_depth=max_depth, node_names=names)
        for a in rep.arcs:
            key = (a["from"], a["to"])
            arc_counts[key] = arc_counts.get(key, 0) + 1
        for e in rep.undirected:
            key = frozenset(e)
            und_counts[key] = und_counts.get(key, 0) + 1

    dag = Dag(nodes=names)
    conf = {k: c / B for k, c in arc_counts.items()}
    retained: dict[tuple[str, str], float] = {}
    seen_pairs = set()
    for (u, v), c in sorted(conf.items()):
        pair = frozenset((u, v))
        if pair in seen_pairs:
            continue
        seen_pairs.add(pair)
        c_rev = conf.get((v, u), 0.0)
        hi, lo = max(c, c_rev), min(c, c_rev)
        if hi < confidence_threshold:
            continue
        if hi == lo:
            dag.undirected.append((u, v))
            dag.log.append(f"direction conflict tie {u} ~ {v} at confidence {hi:.3f}; "
                           f"kept undirected")
            continue
        winner = (u, v) if c > c_rev else (v, u)
        retained[winner] = hi
        if lo >= confidence_threshold:
            dag.log.append(f"direction conflict {u} ~ {v}: kept "
                           f"{winner[0]} -> {winner[1]} ({hi:.3f} vs {lo:.3f})")

    retained = _break_cycles(retained, dag.log)
    dag.arcs = [{"from": u, "to": v, "confidence": c}
                for (u, v), c in sorted(retained.items())]

    directed_pairs = {frozenset(k) for k in retained}
    for pair, cnt in sorted((tuple(sorted(k)), c) for k, c in und_counts.items()):
        key = frozenset(pair)
        if key in directed_pairs or any(frozenset(e) == key for e in dag.undirected):
            continue
        if cnt / B >= confidence_threshold:
            dag.undirected.append(tuple(pair))
    return dag


def _break_cycles(retained: dict[tuple[str, str], float], log: list[str]):
    """Drop the lowest-confidence arc of any remaining cycle until acyclic."""
    arcs = dict(retained)
    while True:
        cycle_nodes = _nodes_on_cycles(arcs)
        if not cycle_nodes:
            return arcs
        candidates = [(c, k) for k, c in arcs.items()
                      if k[0] in cycle_nodes and k[1] in cycle_nodes]
        _, worst = min(candidates, key=lambda t: (t[0], t[1]))
        del arcs[worst]
        log.append(f"cycle repair: removed {worst[0]} -> {worst[1]}")


def _nodes_on_cycles(arcs: dict[tuple[str, str], float]) -> set:
    nodes = {u for u, _ in arcs} | {v for _, v in arcs}
    out = {u: set() for u in nodes}
    indeg = {u: 0 for u in nodes}
    for u, v in arcs:
        out[u].add(v)
        indeg[v] += 1
    queue = [u for u in nodes if indeg[u] == 0]
    seen = 0
    while queue:
        u = queue.pop()
        seen += 1
        for v in out[u]:
            indeg[v] -= 1
            if indeg[v] == 0:
                queue.append(v)
    return set() if seen == len(nodes) else {u for u in nodes if indeg[u] > 0}


def is_acyclic(dag: Dag) -> bool:
    return not _nodes_on_cycles({(a["from"], a["to"]): a["confidence"] for a in dag.arcs})


def extract_parents(dag: Dag, score_node: str, data: np.ndarray,
                    node_names: list[str]) -> list[dict]:
    """Parents of the score node with signed linear-Gaussian coefficients."""
    parents = dag.parents(score_node)
    if not parents:
        return []
    from .models.linear import fit_linear

    cols = [node_names.index(nm) for nm in parents]
    y = data[:, node_names.index(score_node)]
    model = fit_linear(data[:, cols], y, feature_names=parents, check_rank=False)
    return [{"name": nm, "coefficient": float(model.explanation[nm]),
             "sign": "+" if model.explanation[nm] >= 0 else "-"}
            for nm in parents]
