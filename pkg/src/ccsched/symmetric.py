"""Reference symmetric scheduling: hat-parameters, feasible stream counts,
base partition search, and replication/regrouping into the reference table.

The base partition splits all C(omega, t+1) groups into S_hat columns of
B_hat groups so that every user appears exactly beta_hat times per column.
Existence is guaranteed at these sizes; we construct one deterministically by
backtracking over lexicographically ordered groups.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import ConstructionError, ParameterError
from .model import Group, ScheduleColumn, ScheduleTable, enumerate_groups

DEFAULT_DELTA_MAX = 12


@dataclass(frozen=True)
class HatParams:
    """Base-partition shape: per-column user multiplicity, column size, count."""

    beta_hat: int
    B_hat: int
    S_hat: int


@dataclass(frozen=True)
class SymmetricPlan:
    """A concrete (eta, delta) choice on top of the base partition."""

    omega: int
    t: int
    hat: HatParams
    eta: int
    delta: int

    @property
    def beta(self) -> int:
        return self.eta * self.hat.beta_hat

    @property
    def B(self) -> int:
        return self.eta * self.hat.B_hat

    @property
    def S(self) -> int:
        return self.delta * self.hat.S_hat // self.eta


def hat_params(omega: int, t: int) -> HatParams:
    """Integer triple describing the base partition for (omega, t)."""
    if omega < t + 1:
        raise ParameterError(f"need omega >= t+1, got omega={omega}, t={t}")
    g = math.gcd(t + 1, omega)
    beta_hat = (t + 1) // g
    b_hat = omega // g
    s_hat, rem = divmod(math.comb(omega, t + 1), b_hat)
    assert rem == 0, "C(omega, t+1) is always divisible by omega/gcd(t+1, omega)"
    return HatParams(beta_hat, b_hat, s_hat)


def _eta_bound(L: int, G: int, t: int, omega: int, hat: HatParams) -> int:
    """Largest eta allowed by the transmit- and receive-antenna constraints."""
    tx = Fraction(L * hat.S_hat, 1 + (omega - t - 1) * hat.S_hat * hat.beta_hat)
    rx = Fraction(G, hat.beta_hat)
    return int(min(tx, rx))


def min_delta(eta: int, s_hat: int) -> int:
    """Smallest delta with delta*S_hat divisible by eta."""
    return eta // math.gcd(eta, s_hat)


def feasible_beta_set(
    L: int, G: int, t: int, omega: int, delta_max: int = DEFAULT_DELTA_MAX
) -> list[int]:
    """All symmetric per-user stream counts admissible at these parameters.

    Members are eta*beta_hat for every eta meeting the antenna bounds and
    admitting an integer regrouping with delta <= delta_max.  An empty list is
    a valid result, not an error.
    """
    if delta_max < 1:
        raise ParameterError("delta_max must be at least 1")
    hat = hat_params(omega, t)
    betas = set()
    for eta in range(1, _eta_bound(L, G, t, omega, hat) + 1):
        if min_delta(eta, hat.S_hat) <= delta_max:
            betas.add(eta * hat.beta_hat)
    return sorted(betas)


def plan_symmetric(
    L: int,
    G: int,
    t: int,
    omega: int,
    beta: int,
    delta_max: int = DEFAULT_DELTA_MAX,
    min_columns: int = 1,
) -> SymmetricPlan:
    """Resolve beta into the canonical (eta, delta) plan.

    ``min_columns`` can be raised to 2 by callers that need a donor column;
    delta is then doubled as needed (any multiple keeps the plan valid).
    """
    hat = hat_params(omega, t)
    if beta % hat.beta_hat != 0:
        raise ParameterError(f"beta={beta} is not a multiple of beta_hat={hat.beta_hat}")
    eta = beta // hat.beta_hat
    if eta < 1 or eta > _eta_bound(L, G, t, omega, hat):
        raise ParameterError(f"beta={beta} is outside the feasible set for these parameters")
    delta = min_delta(eta, hat.S_hat)
    plan = SymmetricPlan(omega, t, hat, eta, delta)
    while plan.S < min_columns:
        delta += min_delta(eta, hat.S_hat)
        plan = SymmetricPlan(omega, t, hat, eta, delta)
    if plan.delta > delta_max:
        raise ParameterError(f"no delta <= {delta_max} yields an integer regrouping")
    return plan


class _Dinic:
    """Minimal deterministic max-flow (integer capacities)."""

    def __init__(self, n: int):
        self.adj: list[list[list[int]]] = [[] for _ in range(n)]

    def add(self, u: int, v: int, cap: int) -> None:
        self.adj[u].append([v, cap, len(self.adj[v])])
        self.adj[v].append([u, 0, len(self.adj[u]) - 1])

    def maxflow(self, src: int, dst: int) -> int:
        flow = 0
        n = len(self.adj)
        while True:
            level = [-1] * n
            level[src] = 0
            queue = [src]
            for u in queue:
                for v, cap, _ in self.adj[u]:
                    if cap > 0 and level[v] < 0:
                        level[v] = level[u] + 1
                        queue.append(v)
            if level[dst] < 0:
                return flow
            it = [0] * n

            def augment(u: int, limit: int) -> int:
                if u == dst:
                    return limit
                while it[u] < len(self.adj[u]):
                    edge = self.adj[u][it[u]]
                    v, cap, rev = edge
                    if cap > 0 and level[v] == level[u] + 1:
                        pushed = augment(v, min(limit, cap))
                        if pushed:
                            edge[1] -= pushed
                            self.adj[v][rev][1] += pushed
                            return pushed
                    it[u] += 1
                return 0

            while True:
                pushed = augment(src, 1 << 60)
                if not pushed:
                    break
                flow += pushed


def resolution_partition(omega: int, size: int) -> list[list[Group]]:
    """All size-subsets of [omega] split into parallel classes (size | omega).

    Stage-wise construction: elements are added one at a time, and a max-flow
    decides, for every class, which of its partial parts receives the new
    element.  Demands require each subset A of the processed prefix to appear
    as a part in exactly C(omega-j, size-|A|) classes; the uniform fractional
    assignment meets them, so an integral flow always exists and the
    construction never backtracks.
    """
    assert omega % size == 0
    parts_per_class = omega // size
    n_classes = math.comb(omega - 1, size - 1)
    classes: list[dict[frozenset, int]] = [
        {frozenset(): parts_per_class} for _ in range(n_classes)
    ]
    for j in range(omega):
        x = j + 1
        growable = sorted(
            {A for cls in classes for A in cls if len(A) < size},
            key=lambda A: tuple(sorted(A)),
        )
        index = {A: i for i, A in enumerate(growable)}
        src = n_classes + len(growable)
        dst = src + 1
        net = _Dinic(dst + 1)
        for c, cls in enumerate(classes):
            net.add(src, c, 1)
            for A, mult in sorted(cls.items(), key=lambda kv: tuple(sorted(kv[0]))):
                if len(A) < size:
                    net.add(c, n_classes + index[A], mult)
        for A in growable:
            net.add(n_classes + index[A], dst, math.comb(omega - j - 1, size - len(A) - 1))
        pushed = net.maxflow(src, dst)
        assert pushed == n_classes, "stage flow must saturate every class"
        for c, cls in enumerate(classes):
            chosen = None
            for v, _, rev in net.adj[c]:
                # the unit this class pushed shows up on the reverse edge
                if n_classes <= v < src and net.adj[v][rev][1] > 0:
                    chosen = growable[v - n_classes]
                    break
            assert chosen is not None
            cls[chosen] -= 1
            if cls[chosen] == 0:
                del cls[chosen]
            grown = chosen | {x}
            cls[grown] = cls.get(grown, 0) + 1
    result = []
    for cls in classes:
        groups: list[Group] = []
        for A, mult in cls.items():
            groups.extend([tuple(sorted(A))] * mult)
        result.append(sorted(groups))
    return result


class _Exhausted(Exception):
    """Internal: one bounded partition attempt ran out of nodes."""


def _partition_attempt(
    groups: list[Group], omega: int, b_hat: int, beta_hat: int, s_hat: int, node_cap: int
) -> list[list[Group]] | None:
    """One bounded run of the column-at-a-time search.

    Columns are completed one by one.  Inside a column, we branch on the
    exact set of groups covering the lowest user whose per-column count is
    still below beta_hat; every valid column is generated exactly once, so
    the enumeration is complete.  Columns are anchored at the first unused
    group, which breaks the column-permutation symmetry.
    """
    n = len(groups)
    used = [False] * n
    by_user = {u: [i for i, g in enumerate(groups) if u in g] for u in range(1, omega + 1)}
    columns: list[list[int]] = []
    nodes = 0

    def column_candidates(counts: dict[int, int], chosen: list[int]):
        nonlocal nodes
        nodes += 1
        if nodes > node_cap:
            raise _Exhausted()
        if len(chosen) == b_hat:
            yield list(chosen)
            return
        u0 = next(u for u in range(1, omega + 1) if counts[u] < beta_hat)
        need = beta_hat - counts[u0]
        avail = [
            i
            for i in by_user[u0]
            if not used[i]
            and i not in chosen
            and all(counts[v] < beta_hat for v in groups[i])
        ]
        if len(avail) < need:
            return
        for combo in itertools.combinations(avail, need):
            ok = True
            touched = []
            for i in combo:
                if any(counts[v] >= beta_hat for v in groups[i]):
                    ok = False
                    break
                for v in groups[i]:
                    counts[v] += 1
                touched.append(i)
            if ok:
                chosen.extend(combo)
                yield from column_candidates(counts, chosen)
                del chosen[-need:]
            for i in touched:
                for v in groups[i]:
                    counts[v] -= 1

    def solve() -> bool:
        if len(columns) == s_hat:
            return True
        counts = dict.fromkeys(range(1, omega + 1), 0)
        for col in column_candidates(counts, []):
            for i in col:
                used[i] = True
            columns.append(col)
            if solve():
                return True
            columns.pop()
            for i in col:
                used[i] = False
        return False

    try:
        found = solve()
    except _Exhausted:
        return None
    if not found:
        return None
    return [[groups[i] for i in sorted(col)] for col in columns]


def build_base_partition(
    omega: int, t: int, attempts: int = 64, node_cap: int = 300_000
) -> list[ScheduleColumn]:
    """Partition all groups into S_hat columns, beta_hat-regular per column.

    Three deterministic routes, most structured first: when beta_hat = 1 the
    columns are parallel classes and the stage-wise flow construction builds
    them outright; when beta_hat exceeds B_hat/2 the complementary problem
    (group size omega-t-1) is sparser and is solved instead, complementing
    every group on the way back; otherwise a column-at-a-time backtracking
    search runs, with rapid seeded restarts (runtimes are heavy-tailed, so
    many short attempts beat one long run).
    """
    import random

    hat = hat_params(omega, t)
    size = t + 1
    if hat.beta_hat == 1:
        return [ScheduleColumn.of(col) for col in resolution_partition(omega, size)]
    if hat.beta_hat > hat.B_hat - hat.beta_hat and 1 <= omega - size:
        comp = build_base_partition(omega, omega - size - 1, attempts, node_cap)
        full = set(range(1, omega + 1))
        return [
            ScheduleColumn.of(tuple(sorted(full - set(g))) for g in col.groups)
            for col in comp
        ]
    base = enumerate_groups(range(1, omega + 1), t)
    for attempt in range(attempts):
        groups = list(base)
        cap = node_cap
        if attempt:
            random.Random(1000003 * omega + 101 * t + attempt).shuffle(groups)
            cap = node_cap // 3 if attempt % 4 else node_cap
        result = _partition_attempt(groups, omega, hat.B_hat, hat.beta_hat, hat.S_hat, cap)
        if result is not None:
            return [ScheduleColumn.of(col) for col in result]
    raise ConstructionError(
        f"base partition search exhausted for omega={omega}, t={t} "
        f"(attempts={attempts}, node_cap={node_cap})"
    )


def validate_base_partition(columns: list[ScheduleColumn], omega: int, t: int) -> None:
    """Raise unless the columns form a valid beta_hat-regular partition."""
    hat = hat_params(omega, t)
    if len(columns) != hat.S_hat:
        raise ConstructionError(f"expected {hat.S_hat} columns, got {len(columns)}")
    seen: list[Group] = []
    for col in columns:
        if len(col) != hat.B_hat:
            raise ConstructionError(f"column size {len(col)} != {hat.B_hat}")
        beta = col.beta(range(1, omega + 1))
        if any(b != hat.beta_hat for b in beta.values()):
            raise ConstructionError(f"column multiplicities {beta} are not all {hat.beta_hat}")
        seen.extend(col.groups)
    if sorted(seen) != enumerate_groups(range(1, omega + 1), t):
        raise ConstructionError("columns do not partition the full group enumeration")


def regroup(
    base: list[ScheduleColumn],
    eta: int,
    delta: int,
    *,
    L: int,
    G: int,
    users: tuple[int, ...] | None = None,
    t: int | None = None,
) -> ScheduleTable:
    """Replicate the base columns delta times and merge eta of them per output.

    The replicated sequence lists each base column delta times consecutively
    and deals it round-robin over the S output slots, which keeps merges as
    diverse as possible while staying canonical.
    """
    if not base:
        raise ParameterError("base partition is empty")
    if t is None:
        t = len(base[0].groups[0]) - 1
    if users is None:
        max_user = max(u for col in base for g in col.groups for u in g)
        users = tuple(range(1, max_user + 1))
    s_hat = len(base)
    if (delta * s_hat) % eta != 0:
        raise ParameterError(f"delta*S_hat={delta * s_hat} is not divisible by eta={eta}")
    n_out = delta * s_hat // eta
    merged: list[list[Group]] = [[] for _ in range(n_out)]
    sequence = [col for col in base for _ in range(delta)]
    for idx, col in enumerate(sequence):
        merged[idx % n_out].extend(col.groups)
    columns = tuple(ScheduleColumn.of(c) for c in merged)
    table = ScheduleTable(
        users=users, t=t, L=L, G=G, columns=columns, delta=delta, eta=eta
    )
    table.validate()
    return table


def schedule_symmetric(
    L: int,
    G: int,
    t: int,
    omega: int,
    beta: int,
    delta_max: int = DEFAULT_DELTA_MAX,
    min_columns: int = 1,
) -> ScheduleTable:
    """Build the reference table for a feasible beta."""
    plan = plan_symmetric(L, G, t, omega, beta, delta_max, min_columns)
    base = build_base_partition(omega, t)
    return regroup(
        base, plan.eta, plan.delta, L=L, G=G, users=tuple(range(1, omega + 1)), t=t
    )
