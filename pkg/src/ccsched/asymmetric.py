"""Asymmetric per-user stream allocation on top of the symmetric reference:
replication/decomposition arithmetic, donor mapping, balanced greedy
candidate selection with swap repair, and table assembly.

Construction outline: replicate the reference table, keep ``d`` copies of
each baseline column, dissolve the rest, and append ``m`` group indices from
the donor column (the cyclic neighbour) to every retained copy.  The m-sets
are chosen greedily so that every donor group is reused equally often
(regularity ``r``) and every augmented column stays linearly decodable.
"""

from __future__ import annotations

import hashlib
import random
from collections import Counter
from dataclasses import dataclass, replace

from .errors import (
    AssemblyError,
    ConstructionError,
    InfeasibleMError,
    NoDonorError,
    ParameterError,
    SearchFailureError,
)
from .model import Group, ScheduleColumn, ScheduleTable
from .verifier import decodability_check


def derive_seed(global_seed: int | None, label: str) -> int | None:
    """Stable per-task seed: SHA-256 of "<seed>:<label>", folded to 63 bits."""
    if global_seed is None:
        return None
    digest = hashlib.sha256(f"{global_seed}:{label}".encode()).digest()
    return int.from_bytes(digest[:8], "big") >> 1


@dataclass(frozen=True)
class AsymPlan:
    """Integer bookkeeping of one decomposition-reassignment round."""

    B: int
    S: int
    m: int
    d: int
    r: int
    delta_tilde: int
    S_tilde: int
    tau: int
    I_max: int

    def check(self) -> None:
        assert self.m * self.S_tilde == self.B * (self.delta_tilde * self.S - self.S_tilde)
        assert self.r * self.B == self.d * self.m
        assert self.delta_tilde * self.B == (self.B + self.m) * self.d
        assert self.S_tilde == self.d * self.S

    def scaled(self, factor: int) -> "AsymPlan":
        """Multiply d (and everything driven by it); all identities survive."""
        plan = replace(
            self,
            d=self.d * factor,
            r=self.r * factor,
            delta_tilde=self.delta_tilde * factor,
            S_tilde=self.S_tilde * factor,
        )
        plan.check()
        return plan


def max_additions(G: int, beta: int, omega: int, t: int) -> int:
    """Receive-antenna bound on per-column additions: (G-beta)*floor(omega/(t+1))."""
    return (G - beta) * (omega // (t + 1))


def solve_plan(
    B: int,
    S: int,
    m: int,
    G: int,
    beta: int,
    omega: int,
    t: int,
    tau: int | None = None,
    I_max: int | None = None,
    d_cap: int = 1000,
) -> AsymPlan:
    """Smallest integer (d, r, delta_tilde, S_tilde) for the requested m.

    Integrality needs B | d*m, so the minimal d is B/gcd(B, m); the loop is
    kept with an explicit cap so a genuinely unsolvable request surfaces as
    an error instead of spinning.
    """
    if m < 0:
        raise ParameterError("m must be non-negative")
    bound = max_additions(G, beta, omega, t)
    if m > bound:
        raise InfeasibleMError(
            f"m={m} exceeds (G-beta)*floor(omega/(t+1)) = ({G}-{beta})*{omega // (t + 1)} = {bound}"
        )
    if tau is None:
        tau = t
    if m == 0:
        return AsymPlan(B, S, 0, 1, 0, 1, S, tau, I_max or 50)
    for d in range(1, d_cap + 1):
        if (d * m) % B == 0:
            r = d * m // B
            delta_tilde = (B + m) * d // B
            plan = AsymPlan(B, S, m, d, r, delta_tilde, d * S, tau, I_max or 50 * m)
            plan.check()
            return plan
    raise SearchFailureError(f"no integral plan with d <= {d_cap} for B={B}, m={m}")


def donor_map(i: int, S: int) -> int:
    """Cyclic donor column for 1-based column i: (i mod S) + 1."""
    if S < 2:
        raise NoDonorError("donor mapping needs at least two baseline columns")
    if not 1 <= i <= S:
        raise ParameterError(f"column index {i} outside 1..{S}")
    return (i % S) + 1


def linear_feasible_check(
    host: ScheduleColumn,
    pending: list[Group],
    donor_groups: list[Group],
    L: int,
    G: int,
    served_users,
) -> list[Group]:
    """Donor groups whose addition to host+pending keeps both antenna bounds.

    For each candidate T the multiset U = host + pending + {T} is scored:
    b(k) = per-user stream count, c(T') = multiplicity, and
    n(T') = c(T') + sum of b(k) over users outside T'.  T is feasible when
    max b <= G and max n <= L.
    """
    users = sorted(set(served_users))
    base_b = Counter()
    base_c = Counter()
    for g in list(host.groups) + list(pending):
        base_c[g] += 1
        for k in g:
            base_b[k] += 1
    feasible = []
    for cand in sorted(set(donor_groups)):
        b = base_b.copy()
        c = base_c.copy()
        c[cand] += 1
        for k in cand:
            b[k] += 1
        if max(b.values()) > G:
            continue
        total = sum(b.values())
        ok = all(
            c[g] + (total - sum(b[k] for k in g)) <= L
            for g in c
        )
        if ok:
            feasible.append(cand)
    return feasible


@dataclass(frozen=True)
class CandidateCollection:
    """The d chosen m-sets for one baseline column, drawn from its donor."""

    column_index: int
    donor_index: int
    sets: tuple[tuple[Group, ...], ...]


def validate_collection(
    coll: CandidateCollection,
    donor: ScheduleColumn,
    plan: AsymPlan,
) -> None:
    """Check sizes, membership, regularity, and pairwise overlap."""
    donor_theta = donor.theta()
    if len(coll.sets) != plan.d:
        raise ConstructionError(f"expected {plan.d} sets, got {len(coll.sets)}")
    usage: Counter = Counter()
    for a in coll.sets:
        if len(a) != plan.m:
            raise ConstructionError(f"set {a} does not have m={plan.m} groups")
        if len(set(a)) != len(a):
            raise ConstructionError(f"set {a} repeats a group")
        for g in a:
            if g not in donor_theta:
                raise ConstructionError(f"group {g} not drawn from the donor column")
            usage[g] += 1
        for x, y in ((x, y) for i, x in enumerate(a) for y in a[i + 1 :]):
            if len(set(x) & set(y)) > plan.tau:
                raise ConstructionError(f"overlap |{x} ∩ {y}| exceeds tau={plan.tau}")
    for g, mult in donor_theta.items():
        if usage[g] != plan.r * mult:
            raise ConstructionError(
                f"group {g} used {usage[g]} times, expected r*theta = {plan.r * mult}"
            )


def balanced_greedy(
    i: int,
    plan: AsymPlan,
    baseline: ScheduleTable,
    seed: int | None = None,
) -> CandidateCollection:
    """Build the candidate collection for baseline column i (1-based).

    Greedy selection with quota-driven regularity: each donor group starts
    with quota r (times its multiplicity in the donor column) and the next
    group is the feasible candidate minimizing
    beta * (overlap with the current set) - remaining quota,
    ties broken lexicographically.  When no candidate is feasible, a swap
    with a previously built set is attempted; swaps must keep both sets
    inside the overlap threshold and linearly decodable.
    """
    donor_idx = donor_map(i, plan.S)
    host = baseline.columns[i - 1]
    donor = baseline.columns[donor_idx - 1]
    users = baseline.users
    L, G = baseline.L, baseline.G
    beta_weight = max(host.beta(users).values())
    donor_theta = donor.theta()
    distinct_donor = sorted(donor_theta)
    if plan.m > len(distinct_donor):
        raise ConstructionError(
            f"m={plan.m} exceeds the {len(distinct_donor)} distinct donor groups"
        )
    rng = random.Random(seed) if seed is not None else None

    quota = {g: plan.r * donor_theta[g] for g in distinct_donor}
    if any(q > plan.d for q in quota.values()):
        raise ConstructionError("quota exceeds d: some donor group cannot be placed distinctly")
    collection: list[list[Group]] = []

    def overlap(a: Group, b: Group) -> int:
        return len(set(a) & set(b))

    def set_feasible(groups: list[Group]) -> bool:
        if len(set(groups)) != len(groups):
            return False
        if any(overlap(x, y) > plan.tau for idx, x in enumerate(groups) for y in groups[idx + 1 :]):
            return False
        rest, last = groups[:-1], groups[-1]
        return last in linear_feasible_check(host, rest, [last], L, G, users)

    def try_swap(current: list[Group]) -> bool:
        for b_idx, b_set in enumerate(collection):
            for t_b in sorted(b_set):
                for t_a in sorted(current):
                    if t_b in current or t_a in b_set:
                        continue
                    new_a = [g for g in current if g != t_a] + [t_b]
                    new_b = [g for g in b_set if g != t_b] + [t_a]
                    if not all(overlap(g, t_b) <= plan.tau for g in new_a[:-1]):
                        continue
                    if not all(overlap(g, t_a) <= plan.tau for g in new_b[:-1]):
                        continue
                    if not set_feasible(new_a) or not set_feasible(new_b):
                        continue
                    current[:] = new_a
                    collection[b_idx] = new_b
                    return True
        return False

    while len(collection) < plan.d:
        current: list[Group] = []
        iterations = 0
        while len(current) < plan.m and iterations < plan.I_max:
            iterations += 1
            passing = linear_feasible_check(host, current, distinct_donor, L, G, users)
            candidates = [
                g
                for g in passing
                if quota[g] > 0
                and g not in current
                and all(overlap(g, other) <= plan.tau for other in current)
            ]
            if not candidates:
                if try_swap(current):
                    continue
                continue
            if rng is not None and len(candidates) > 1:
                candidates = list(candidates)
                rng.shuffle(candidates)
            best = min(
                candidates,
                key=lambda g: (
                    beta_weight * sum(overlap(g, other) for other in current) - quota[g],
                    g,
                ),
            )
            current.append(best)
            quota[best] -= 1
        if len(current) < plan.m:
            raise ConstructionError(
                f"greedy stalled at column {i}: built {len(current)}/{plan.m} groups "
                f"after {iterations} iterations (tau={plan.tau})"
            )
        collection.append(sorted(current))
    coll = CandidateCollection(i, donor_idx, tuple(tuple(a) for a in collection))
    validate_collection(coll, donor, plan)
    return coll


def build_collections(
    baseline: ScheduleTable,
    plan: AsymPlan,
    seed: int | None = None,
) -> list[CandidateCollection]:
    """One candidate collection per baseline column, independently seeded."""
    return [
        balanced_greedy(
            i,
            plan,
            baseline,
            derive_seed(seed, f"column{i}") if seed is not None else None,
        )
        for i in range(1, plan.S + 1)
    ]


def assemble_table(
    baseline: ScheduleTable,
    collections: list[CandidateCollection],
    plan: AsymPlan,
) -> ScheduleTable:
    """Repeat every baseline column d times and append one m-set per copy."""
    if len(collections) != len(baseline.columns):
        raise AssemblyError("need exactly one candidate collection per baseline column")
    columns = []
    for col, coll in zip(baseline.columns, collections):
        for a in coll.sets:
            columns.append(ScheduleColumn.of(list(col.groups) + list(a)))
    table = ScheduleTable(
        users=baseline.users,
        t=baseline.t,
        L=baseline.L,
        G=baseline.G,
        columns=tuple(columns),
        delta=baseline.delta,
        delta_tilde=plan.delta_tilde,
        m=plan.m,
        eta=baseline.eta,
    )
    table.validate()
    report = decodability_check(table)
    if not report.ok:
        raise AssemblyError(f"assembled table fails the symbolic check: {report.witnesses[0]}")
    return table


def dof_of_table(table: ScheduleTable) -> int | list[int]:
    """Per-column total stream count; the per-column vector if not uniform."""
    sums = [sum(col.beta(table.users).values()) for col in table.columns]
    if not sums:
        raise ParameterError("table has no columns")
    if len(set(sums)) == 1:
        return sums[0]
    return sums


def schedule_asymmetric(
    baseline: ScheduleTable,
    m: int,
    tau: int | None = None,
    I_max: int | None = None,
    seed: int | None = None,
    d_factor: int = 1,
) -> tuple[ScheduleTable, AsymPlan, list[CandidateCollection]]:
    """Full pipeline from a symmetric reference table to the augmented table."""
    beta = max(baseline.columns[0].beta(baseline.users).values())
    plan = solve_plan(
        B=len(baseline.columns[0]),
        S=len(baseline.columns),
        m=m,
        G=baseline.G,
        beta=beta,
        omega=baseline.omega,
        t=baseline.t,
        tau=tau,
        I_max=I_max,
    )
    if d_factor > 1:
        plan = plan.scaled(d_factor)
    if m == 0:
        return baseline, plan, []
    collections = build_collections(baseline, plan, seed)
    table = assemble_table(baseline, collections, plan)
    return table, plan, collections
