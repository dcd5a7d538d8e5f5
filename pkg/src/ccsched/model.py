"""Domain types and subset combinatorics shared by the schedulers.

Users are 1-based integers.  A multicast group is a sorted tuple of t+1
distinct user indices; columns are multisets of groups kept in canonical
(sorted) order so that multiset equality is plain tuple equality.  No file
payloads are materialized anywhere: every quantity of interest depends only
on index combinatorics.
"""

from __future__ import annotations

import itertools
import json
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable

from .errors import MalformedTableError, ParameterError

Group = tuple[int, ...]


def make_group(users: Iterable[int], size: int | None = None) -> Group:
    """Canonicalize a multicast group: sorted, duplicate-free user indices."""
    g = tuple(sorted(users))
    if len(set(g)) != len(g):
        raise ParameterError(f"group {g} has repeated users")
    if not g or any(u < 1 for u in g):
        raise ParameterError(f"group {g} must contain positive user indices")
    if size is not None and len(g) != size:
        raise ParameterError(f"group {g} must have exactly {size} users")
    return g


def cc_gain(K: int, M: int, N: int) -> int:
    """Cumulative normalized cache size t = K*M/N; rejects non-integer results."""
    if K <= 0 or M <= 0 or N <= 0:
        raise ParameterError("K, M, N must be positive")
    t, rem = divmod(K * M, N)
    if rem != 0:
        raise ParameterError(f"K*M/N = {K * M}/{N} is not an integer")
    return t


@dataclass(frozen=True)
class SystemParams:
    """Network-level parameters: antennas, library, caches, multicast gain."""

    K: int
    L: int
    G: int
    N: int
    M: int

    def __post_init__(self) -> None:
        if self.L < 1 or self.G < 1:
            raise ParameterError("L and G must be at least 1")
        t = cc_gain(self.K, self.M, self.N)
        if not 1 <= t + 1 <= self.K:
            raise ParameterError(f"need 1 <= t+1 <= K, got t={t}, K={self.K}")

    @property
    def t(self) -> int:
        return cc_gain(self.K, self.M, self.N)


def enumerate_groups(served_users: Iterable[int], t: int) -> list[Group]:
    """All (t+1)-subsets of the served set, lexicographic in sorted indices."""
    users = sorted(set(served_users))
    if len(users) < t + 1:
        raise ParameterError(f"need at least t+1={t + 1} users, got {len(users)}")
    return [tuple(c) for c in itertools.combinations(users, t + 1)]


@dataclass(frozen=True)
class ScheduleColumn:
    """One transmission interval: a multiset of multicast groups."""

    groups: tuple[Group, ...]

    @staticmethod
    def of(groups: Iterable[Iterable[int]]) -> "ScheduleColumn":
        return ScheduleColumn(tuple(sorted(tuple(sorted(g)) for g in groups)))

    def theta(self) -> Counter:
        """Multiplicity of each group in this column."""
        return Counter(self.groups)

    def beta(self, served_users: Iterable[int]) -> dict[int, int]:
        """Per-user stream count over the full served set (zeros included)."""
        users = sorted(set(served_users))
        counts = dict.fromkeys(users, 0)
        for g in self.groups:
            for k in g:
                if k not in counts:
                    raise MalformedTableError(f"user {k} not in served set {users}")
                counts[k] += 1
        return counts

    def __len__(self) -> int:
        return len(self.groups)


def column_multiplicities(
    col: ScheduleColumn, served_users: Iterable[int]
) -> tuple[dict[Group, int], dict[int, int]]:
    """(theta, beta) maps of a column; checks the group/user universe.

    Always satisfies sum(beta) == (t+1) * sum(theta).
    """
    beta = col.beta(served_users)
    theta = dict(col.theta())
    return theta, beta


@dataclass(frozen=True)
class ScheduleTable:
    """An ordered family of transmission intervals plus its replication record.

    ``delta`` is the base-table repetition factor, ``delta_tilde`` the
    enlargement factor of the decomposition-reassignment stage (1 for plain
    symmetric tables), and ``m`` the number of group indices appended to each
    retained column.  Conservation invariant: every (t+1)-subset of ``users``
    occurs exactly ``delta * delta_tilde`` times across all columns.
    """

    users: tuple[int, ...]
    t: int
    L: int
    G: int
    columns: tuple[ScheduleColumn, ...]
    delta: int = 1
    delta_tilde: int = 1
    m: int = 0
    eta: int = field(default=1, compare=False)

    @property
    def omega(self) -> int:
        return len(self.users)

    @property
    def num_columns(self) -> int:
        return len(self.columns)

    @property
    def subpacketization_factor(self) -> int:
        """Delivery-phase splitting factor contributed by this table."""
        return self.delta * self.delta_tilde

    def group_totals(self) -> Counter:
        total: Counter = Counter()
        for col in self.columns:
            total.update(col.groups)
        return total

    def validate(self) -> None:
        """Check universe membership and the conservation invariant."""
        expected = set(enumerate_groups(self.users, self.t))
        totals = self.group_totals()
        foreign = set(totals) - expected
        if foreign:
            raise MalformedTableError(f"groups outside the served universe: {sorted(foreign)[:3]}")
        want = self.delta * self.delta_tilde
        bad = {g: c for g, c in totals.items() if c != want}
        missing = expected - set(totals)
        if bad or missing:
            raise MalformedTableError(
                f"conservation violated: expected every group {want} times, "
                f"got deviations {sorted(bad.items())[:3]}, missing {sorted(missing)[:3]}"
            )


def total_subpacketization(params: SystemParams, table: ScheduleTable) -> int:
    """Final number of fragments per file: placement times delivery splitting."""
    return math.comb(params.K, params.t) * table.delta * table.delta_tilde


def table_to_json(table: ScheduleTable) -> str:
    """Serialize to the interchange schema used by every CLI command."""
    doc = {
        "omega": table.omega,
        "t": table.t,
        "L": table.L,
        "G": table.G,
        "users": list(table.users),
        "delta": table.delta,
        "delta_tilde": table.delta_tilde,
        "m": table.m,
        "columns": [[list(g) for g in col.groups] for col in table.columns],
    }
    return json.dumps(doc, indent=2) + "\n"


def table_from_json(text: str) -> ScheduleTable:
    """Parse and validate a table document produced by :func:`table_to_json`."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedTableError(f"invalid JSON: {exc}") from exc
    required = {"omega", "t", "L", "G", "users", "delta", "delta_tilde", "m", "columns"}
    missing = required - set(doc)
    if missing:
        raise MalformedTableError(f"missing table fields: {sorted(missing)}")
    users = tuple(sorted(doc["users"]))
    if len(users) != doc["omega"]:
        raise MalformedTableError("omega does not match the user list")
    t = int(doc["t"])
    columns = []
    for raw_col in doc["columns"]:
        groups = [make_group(g, size=t + 1) for g in raw_col]
        for g in groups:
            if not set(g) <= set(users):
                raise MalformedTableError(f"group {g} outside users {users}")
        columns.append(ScheduleColumn.of(groups))
    return ScheduleTable(
        users=users,
        t=t,
        L=int(doc["L"]),
        G=int(doc["G"]),
        columns=tuple(columns),
        delta=int(doc["delta"]),
        delta_tilde=int(doc["delta_tilde"]),
        m=int(doc["m"]),
    )
