"""Claims backed by evidence, and a brute-force INUS condition checker.

A claim is supported iff at least one evidence entry is validated. Causal
fields declare their sufficient condition sets outright; the checker decides,
by exhaustive enumeration, whether a condition is an Insufficient but
Necessary part of an Unnecessary but Sufficient set.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable

from .errors import (
    DanglingEvidenceRefError,
    DuplicateNameError,
    UnknownClaimError,
    UnknownConditionError,
    XfoError,
)


@dataclass
class Evidence:
    ref: str
    note: str = ""
    validated: bool = False


@dataclass
class Claim:
    id: str
    statement: str
    evidence: list[Evidence] = field(default_factory=list)

    @property
    def supported(self) -> bool:
        return any(e.validated for e in self.evidence)


class ClaimLedger:
    """Claims with evidence links into the model.

    ``instance_lookup`` (optional) resolves instance ids; when provided,
    evidence refs that are not document refs (no ``:`` in them) must name a
    known instance, alive or destroyed.
    """

    def __init__(self, instance_lookup: Callable[[str], bool] | None = None):
        self._lookup = instance_lookup
        self._claims: dict[str, Claim] = {}

    def claims(self) -> tuple[Claim, ...]:
        return tuple(self._claims.values())

    def claim(self, claim_id: str) -> Claim:
        claim = self._claims.get(claim_id)
        if claim is None:
            raise UnknownClaimError(f"unknown claim: {claim_id}")
        return claim

    def add_claim(self, claim_id: str, statement: str) -> Claim:
        if claim_id in self._claims:
            raise DuplicateNameError(f"claim {claim_id!r} already exists")
        claim = Claim(claim_id, statement)
        self._claims[claim_id] = claim
        return claim

    def attach_evidence(
        self, claim_id: str, ref: str, note: str = "", validated: bool = False
    ) -> Claim:
        claim = self.claim(claim_id)
        if self._lookup is not None and ":" not in ref and not self._lookup(ref):
            raise DanglingEvidenceRefError(f"evidence ref {ref!r} names no known artifact")
        claim.evidence.append(Evidence(ref, note, validated))
        return claim

    def validate_evidence(self, claim_id: str, ref: str) -> Claim:
        claim = self.claim(claim_id)
        for entry in claim.evidence:
            if entry.ref == ref:
                entry.validated = True
                return claim
        raise DanglingEvidenceRefError(f"claim {claim_id!r} has no evidence {ref!r}")

    def supported(self, claim_id: str) -> bool:
        return self.claim(claim_id).supported


# --- INUS ----------------------------------------------------------------------

@dataclass(frozen=True)
class CausalField:
    """An outcome, its condition universe, and the declared sufficient sets."""

    outcome: str
    universe: tuple[str, ...]
    sufficient: tuple[frozenset[str], ...]

    def __post_init__(self):
        known = set(self.universe)
        for subset in self.sufficient:
            stray = subset - known
            if stray:
                raise UnknownConditionError(
                    f"sufficient set names unknown condition(s): {sorted(stray)}"
                )


@dataclass(frozen=True)
class InusVerdict:
    condition: str
    inus: bool
    witness: frozenset[str] | None


def check_inus(field_: CausalField, condition: str) -> InusVerdict:
    """Decide the INUS property by exhaustive enumeration over subsets.

    True iff some declared sufficient set S contains the condition such that
    (i) the condition alone is insufficient, (ii) S minus the condition is
    insufficient (the condition is a necessary part of S), (iii) some
    declared set excludes the condition (S is unnecessary), and (iv) S is
    declared sufficient. The first such S in declaration order is the witness.
    """
    if condition not in field_.universe:
        raise UnknownConditionError(f"condition {condition!r} not in universe")
    if not field_.sufficient:
        raise XfoError("causal field declares no sufficient sets")

    # Sufficiency table over the full powerset: a set is (derived) sufficient
    # iff it contains some declared sufficient set.
    universe = tuple(field_.universe)
    sufficient_table: dict[frozenset[str], bool] = {}
    for size in range(len(universe) + 1):
        for combo in itertools.combinations(universe, size):
            subset = frozenset(combo)
            sufficient_table[subset] = any(s <= subset for s in field_.sufficient)

    alone = frozenset({condition})
    for candidate in field_.sufficient:
        if condition not in candidate:
            continue
        insufficient = not sufficient_table[alone]
        necessary = not sufficient_table[candidate - {condition}]
        unnecessary = any(condition not in other for other in field_.sufficient)
        if insufficient and necessary and unnecessary:
            return InusVerdict(condition, True, candidate)
    return InusVerdict(condition, False, None)
