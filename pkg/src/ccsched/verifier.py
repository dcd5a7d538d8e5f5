"""Linear decodability certification.

Symbolic side: per-column check of the two antenna conditions,
  tx: for every scheduled group, the streams of users outside it plus the
      group's own multiplicity fit inside the transmit antenna count;
  rx: no user decodes more streams than it has receive antennas.

Numeric side: a Monte-Carlo oracle that draws random channels, stacks the
combined interference channel of every scheduled group, computes its
nullspace by thresholded SVD, places one unit-norm beamformer per stream
instance inside that nullspace, and verifies rank-nullity, interference
leakage, and per-user invertibility of the effective channel.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NullityDeficientError, ParameterError, VerificationError
from .model import Group, ScheduleColumn, ScheduleTable

RANK_RTOL = 1e-8


@dataclass(frozen=True)
class Witness:
    """One violated condition: where, which rule, and the offending numbers."""

    column: int
    condition: str
    subject: tuple
    lhs: int
    bound: int

    def __str__(self) -> str:
        return (
            f"column {self.column}: {self.condition} at {self.subject} "
            f"gives {self.lhs} > {self.bound}"
        )


@dataclass(frozen=True)
class SymbolicReport:
    ok: bool
    witnesses: tuple[Witness, ...]
    per_column: tuple[bool, ...]
    min_slack: int


def check_column(
    col: ScheduleColumn, users, L: int, G: int, column_index: int = 1
) -> tuple[list[Witness], int]:
    """Witnesses of violated conditions in one column, plus the minimum
    transmit-side slack (L minus the largest left-hand side over groups)."""
    theta = col.theta()
    beta = col.beta(users)
    total = sum(beta.values())
    witnesses = []
    min_slack = L
    for g, mult in sorted(theta.items()):
        lhs = mult + total - sum(beta[k] for k in g)
        min_slack = min(min_slack, L - lhs)
        if lhs > L:
            witnesses.append(Witness(column_index, "tx", g, lhs, L))
    for k in sorted(beta):
        if beta[k] > G:
            witnesses.append(Witness(column_index, "rx", (k,), beta[k], G))
    return witnesses, min_slack


def decodability_check(table: ScheduleTable, L: int | None = None, G: int | None = None) -> SymbolicReport:
    """Symbolic decodability verdict for every column of a table."""
    L = table.L if L is None else L
    G = table.G if G is None else G
    all_witnesses: list[Witness] = []
    per_column = []
    min_slack = L
    for idx, col in enumerate(table.columns, start=1):
        witnesses, slack = check_column(col, table.users, L, G, idx)
        per_column.append(not witnesses)
        all_witnesses.extend(witnesses)
        min_slack = min(min_slack, slack)
    return SymbolicReport(
        ok=not all_witnesses,
        witnesses=tuple(all_witnesses),
        per_column=tuple(per_column),
        min_slack=min_slack,
    )


@dataclass(frozen=True)
class ChannelRealization:
    """Per-user complex channel matrices, reproducible from the seed."""

    users: tuple[int, ...]
    G: int
    L: int
    N0: float
    seed: int
    H: dict[int, np.ndarray] = field(compare=False, default_factory=dict)
    _cache: dict = field(compare=False, repr=False, default_factory=dict)

    @staticmethod
    def draw(users, G: int, L: int, N0: float = 1.0, seed: int = 0) -> "ChannelRealization":
        """I.i.d. unit-variance complex Gaussian entries, users in sorted order."""
        users = tuple(sorted(users))
        rng = np.random.default_rng(seed)
        H = {}
        for k in users:
            H[k] = (rng.standard_normal((G, L)) + 1j * rng.standard_normal((G, L))) / np.sqrt(2)
        return ChannelRealization(users, G, L, N0, seed, H)

    def haar_combiner_pool(self) -> dict[int, np.ndarray]:
        """One GxG random unitary per user (QR of a Gaussian draw); combiners
        for any stream count are its leading columns.  Cached per realization."""
        if "pool" not in self._cache:
            rng = np.random.default_rng(np.random.SeedSequence([self.seed, 0x636F6D62]))
            pool = {}
            for k in self.users:
                z = rng.standard_normal((self.G, self.G)) + 1j * rng.standard_normal((self.G, self.G))
                q, rmat = np.linalg.qr(z)
                # fix the phases so the factorization is unique
                q = q * (np.diag(rmat) / np.abs(np.diag(rmat)))
                pool[k] = q
            self._cache["pool"] = pool
        return self._cache["pool"]


def nullspace_basis(A: np.ndarray, dim: int) -> tuple[np.ndarray, int]:
    """Orthonormal nullspace basis of A (thresholded SVD) in C^dim.

    Returns (basis, rank).  Singular values below RANK_RTOL times the largest
    count as zero; an empty A means the nullspace is the whole space.
    """
    if A.size == 0:
        return np.eye(dim, dtype=complex), 0
    u, s, vh = np.linalg.svd(A)
    tol = RANK_RTOL * s[0] if s.size else 0.0
    rank = int(np.sum(s > tol))
    return vh[rank:].conj().T, rank


@dataclass(frozen=True)
class BeamformerSolution:
    """Receive combiners and per-stream transmit beamformers for one column."""

    combiners: dict[int, np.ndarray]
    beams: dict[Group, np.ndarray]
    nullities: dict[Group, int]
    beta: dict[int, int]

    def stream_items(self) -> list[tuple[Group, int, np.ndarray]]:
        """(group, instance index, beamformer) for every scheduled stream."""
        out = []
        for g in sorted(self.beams):
            w = self.beams[g]
            for inst in range(w.shape[1]):
                out.append((g, inst, w[:, inst]))
        return out


def build_beamformers(
    column: ScheduleColumn,
    channels: ChannelRealization,
    combiner_policy: str = "haar",
) -> BeamformerSolution:
    """Nullspace beamformers for one column under random channels.

    Combiners are fixed first (random orthonormal columns by default, or the
    leading left singular vectors of the user's channel for the
    "channel-aligned" policy).  For every scheduled group the interference
    channel of all outside users is stacked and the group's stream instances
    take the first theta orthonormal nullspace directions.
    """
    users = channels.users
    theta = column.theta()
    beta = column.beta(users)
    if combiner_policy == "haar":
        pool = channels.haar_combiner_pool()
        combiners = {k: pool[k][:, : beta[k]] for k in users}
    elif combiner_policy == "channel-aligned":
        combiners = {}
        for k in users:
            u, _, _ = np.linalg.svd(channels.H[k])
            combiners[k] = u[:, : beta[k]]
    else:
        raise ParameterError(f"unknown combiner policy: {combiner_policy}")

    # nullspaces depend only on the outside users and their stream counts, so
    # they are shared across groups and columns of the same realization
    cache = channels._cache.setdefault(("nullspace", combiner_policy), {})
    beams: dict[Group, np.ndarray] = {}
    nullities: dict[Group, int] = {}
    for g in sorted(theta):
        outside = [k for k in users if k not in g and beta[k] > 0]
        key = tuple((k, beta[k]) for k in outside)
        if key in cache:
            basis, rank = cache[key]
        else:
            if outside:
                stacked = np.vstack([combiners[k].conj().T @ channels.H[k] for k in outside])
            else:
                stacked = np.empty((0, channels.L), dtype=complex)
            basis, rank = nullspace_basis(stacked, channels.L)
            cache[key] = (basis, rank)
        nullity = channels.L - rank
        expected = channels.L - sum(beta[k] for k in outside)
        if nullity < theta[g]:
            raise NullityDeficientError(
                f"group {g}: nullity {nullity} cannot host {theta[g]} stream instances"
            )
        if nullity != expected:
            raise NullityDeficientError(
                f"group {g}: computed nullity {nullity} != rank-nullity value {expected} "
                "(non-generic channel draw)"
            )
        beams[g] = basis[:, : theta[g]]
        nullities[g] = nullity
    return BeamformerSolution(combiners, beams, nullities, dict(beta))


@dataclass(frozen=True)
class NumericReport:
    ok: bool
    max_leakage: float
    min_sigma: float
    stream_counts_match: bool
    failures: tuple[tuple, ...]


def effective_matrix(
    solution: BeamformerSolution, channels: ChannelRealization, k: int
) -> np.ndarray:
    """beta_k x beta_k matrix mapping user k's own streams through combiner."""
    cols = [
        solution.combiners[k].conj().T @ channels.H[k] @ w
        for g, _, w in solution.stream_items()
        if k in g
    ]
    if not cols:
        return np.empty((0, 0), dtype=complex)
    return np.column_stack(cols)


def verify_numeric(
    column: ScheduleColumn,
    channels: ChannelRealization,
    solution: BeamformerSolution,
    tol: float = 1e-9,
    sigma_tol: float = 1e-6,
) -> NumericReport:
    """Check leakage, effective-matrix conditioning, and stream accounting."""
    users = channels.users
    beta = column.beta(users)
    failures: list[tuple] = []
    max_leakage = 0.0
    for g, inst, w in solution.stream_items():
        for k in users:
            if k in g or beta[k] == 0:
                continue
            leak = float(np.linalg.norm(solution.combiners[k].conj().T @ channels.H[k] @ w))
            max_leakage = max(max_leakage, leak)
            if leak > tol:
                failures.append(("leakage", k, g, inst, leak))
    min_sigma = float("inf")
    for k in users:
        if beta[k] == 0:
            continue
        eff = effective_matrix(solution, channels, k)
        sigma = float(np.linalg.svd(eff, compute_uv=False)[-1])
        min_sigma = min(min_sigma, sigma)
        if sigma <= sigma_tol:
            failures.append(("sigma_min", k, sigma))
    counts_match = all(
        sum(1 for g, _, _ in solution.stream_items() if k in g) == beta[k] for k in users
    )
    if not counts_match:
        failures.append(("stream_count",))
    return NumericReport(
        ok=not failures,
        max_leakage=max_leakage,
        min_sigma=min_sigma if min_sigma != float("inf") else 0.0,
        stream_counts_match=counts_match,
        failures=tuple(failures),
    )


def verify_table_numeric(
    table: ScheduleTable,
    trials: int = 100,
    seed: int = 0,
    tol: float = 1e-9,
    sigma_tol: float = 1e-6,
    combiner_policy: str = "haar",
) -> NumericReport:
    """Aggregate numeric verification over random channel seeds.

    Every (column, trial) must pass; the report carries the worst leakage
    and conditioning seen anywhere.
    """
    report = decodability_check(table)
    if not report.ok:
        raise VerificationError(f"symbolic check fails: {report.witnesses[0]}")
    max_leakage = 0.0
    min_sigma = float("inf")
    failures: list[tuple] = []
    for trial in range(trials):
        channels = ChannelRealization.draw(
            table.users, table.G, table.L, seed=seed + trial
        )
        for idx, column in enumerate(table.columns):
            solution = build_beamformers(column, channels, combiner_policy)
            rep = verify_numeric(column, channels, solution, tol, sigma_tol)
            max_leakage = max(max_leakage, rep.max_leakage)
            min_sigma = min(min_sigma, rep.min_sigma)
            if not rep.ok:
                failures.extend((trial, idx) + f for f in rep.failures)
    return NumericReport(
        ok=not failures,
        max_leakage=max_leakage,
        min_sigma=min_sigma if min_sigma != float("inf") else 0.0,
        stream_counts_match=True,
        failures=tuple(failures),
    )
