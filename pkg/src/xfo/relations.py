"""The blackboard's ground truth: a triple store with history.

Triples are never deleted; retraction stamps ``retracted_at`` so past states
stay queryable for the temporal map. The store also owns the instance table
(lifecycle, aggregate slots) and part-link metadata, because destruction
semantics need all three together. A store belongs to one execution context;
clones are cheap because triple records are frozen and shared.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from . import schemas
from .errors import (
    AlreadyDestroyedError,
    DuplicateNameError,
    FunctionalConflictError,
    KindMismatchError,
    NoSuchLiveTripleError,
    SlotTypeMismatchError,
    SubjectDestroyedError,
    UndeclaredPredicateError,
    UnknownInstanceError,
)
from .fingerprint import stable_fingerprint
from .kinds import INDEPENDENT_CONTINUANT
from .registry import BUILTIN_PREDICATES, Registry

PART_OF = "part_of"
MEMBER_OF = "member_of"
HAS_ROLE = "has_role"


@dataclass(frozen=True)
class Triple:
    subject: str
    predicate: str
    object: str
    asserted_at: int
    retracted_at: int | None = None

    def live_at(self, tick: int | None) -> bool:
        if tick is None:
            return self.retracted_at is None
        return self.asserted_at <= tick and (self.retracted_at is None or self.retracted_at > tick)


@dataclass
class InstanceRecord:
    id: str
    schema: str
    created_at: int
    destroyed_at: int | None = None
    slots: dict[str, str | None] | None = None  # aggregate instances only

    @property
    def alive(self) -> bool:
        return self.destroyed_at is None

    def copy(self) -> "InstanceRecord":
        return InstanceRecord(
            self.id,
            self.schema,
            self.created_at,
            self.destroyed_at,
            dict(self.slots) if self.slots is not None else None,
        )


@dataclass(frozen=True)
class AggregateInstance:
    """A read-only view of an aggregate instance and its member slots."""

    id: str
    schema: str
    slots: tuple[tuple[str, str | None], ...]
    slot_types: tuple[tuple[str, str], ...]

    def bound_slots(self) -> tuple[str, ...]:
        return tuple(slot for slot, member in self.slots if member is not None)


class RelationStore:
    def __init__(self, registry: Registry):
        self.registry = registry
        self._records: list[Triple] = []
        self._live: dict[tuple[str, str, str], int] = {}
        self._live_by_pred: dict[str, set[int]] = {}
        self._instances: dict[str, InstanceRecord] = {}
        self._link_meta: dict[tuple[str, str], str] = {}  # (part, whole) -> linkage

    # -- instances ------------------------------------------------------------

    def register_instance(self, instance_id: str, schema: str, tick: int,
                          slots: dict[str, str | None] | None = None) -> InstanceRecord:
        if instance_id in self._instances:
            raise DuplicateNameError(f"instance id {instance_id!r} already exists")
        record = InstanceRecord(instance_id, schema, tick, slots=slots)
        self._instances[instance_id] = record
        return record

    def instance(self, instance_id: str) -> InstanceRecord:
        record = self._instances.get(instance_id)
        if record is None:
            raise UnknownInstanceError(f"unknown instance: {instance_id}")
        return record

    def has_instance(self, instance_id: str) -> bool:
        return instance_id in self._instances

    def instances(self) -> tuple[InstanceRecord, ...]:
        return tuple(self._instances.values())

    def alive_of_kind(self, kind: str) -> tuple[str, ...]:
        out = [
            rec.id
            for rec in self._instances.values()
            if rec.alive and self.registry.is_subkind(rec.schema, kind)
        ]
        return tuple(sorted(out))

    def is_independent_continuant(self, instance_id: str) -> bool:
        record = self.instance(instance_id)
        return self.registry.is_subkind(record.schema, INDEPENDENT_CONTINUANT)

    # -- record plumbing ----------------------------------------------------------

    @property
    def records(self) -> tuple[Triple, ...]:
        return tuple(self._records)

    def live_triples(self) -> tuple[Triple, ...]:
        return tuple(self._records[i] for i in sorted(self._live.values()))

    def live_set(self) -> frozenset[tuple[str, str, str]]:
        return frozenset(self._live)

    def _add(self, triple: Triple) -> None:
        index = len(self._records)
        self._records.append(triple)
        key = (triple.subject, triple.predicate, triple.object)
        self._live[key] = index
        self._live_by_pred.setdefault(triple.predicate, set()).add(index)

    def _retract_index(self, key: tuple[str, str, str], tick: int) -> None:
        index = self._live.pop(key)
        triple = self._records[index]
        self._records[index] = replace(triple, retracted_at=tick)
        self._live_by_pred[triple.predicate].discard(index)

    # -- assertion checks --------------------------------------------------------------

    def check_assert(
        self,
        subject: str,
        predicate: str,
        obj: str,
        *,
        pending_deletes: frozenset[tuple[str, str, str]] = frozenset(),
    ) -> None:
        """Raise if asserting (subject, predicate, obj) would be invalid.

        ``pending_deletes`` names live triples about to be retracted in the
        same atomic unit; functional-conflict checks ignore them.
        """
        registry = self.registry
        record = self._instances.get(subject)
        if record is None:
            raise UnknownInstanceError(f"unknown subject instance: {subject}")
        if not record.alive:
            raise SubjectDestroyedError(f"subject {subject!r} is destroyed")

        relation = registry.relation(predicate)
        if relation is not None:
            if not registry.is_subkind(record.schema, relation.subject_kind):
                raise KindMismatchError(
                    f"{subject!r} is a {record.schema}, not a {relation.subject_kind}: "
                    f"cannot be subject of {predicate!r}"
                )
            target = self._instances.get(obj)
            if target is None or not registry.is_subkind(target.schema, relation.object_kind):
                raise KindMismatchError(
                    f"object of {predicate!r} must be a live {relation.object_kind} "
                    f"instance, got {obj!r}"
                )
            return

        if predicate in BUILTIN_PREDICATES:
            self._check_builtin(record, predicate, obj)
            return

        slot = registry.determinable_slot(record.schema, predicate)
        if slot is not None:
            ontology = registry.quality(slot.ontology)
            if ontology is None or obj not in ontology.determinants:
                raise KindMismatchError(
                    f"{obj!r} is not a determinant of quality {slot.ontology!r}"
                )
            for key in self._live:
                if key[0] == subject and key[1] == predicate and key[2] != obj:
                    if key not in pending_deletes:
                        raise FunctionalConflictError(
                            f"{subject!r} already has a live {predicate!r} value {key[2]!r}"
                        )
            return

        if registry.is_determinable(predicate):
            raise KindMismatchError(
                f"{record.schema!r} does not declare determinable {predicate!r}"
            )
        raise UndeclaredPredicateError(f"undeclared predicate: {predicate}")

    def _check_builtin(self, record: InstanceRecord, predicate: str, obj: str) -> None:
        registry = self.registry
        if predicate in (PART_OF, MEMBER_OF):
            target = self._instances.get(obj)
            if target is None:
                raise KindMismatchError(f"object of {predicate!r} must be an instance, got {obj!r}")
            if predicate == MEMBER_OF and not registry.is_subkind(
                target.schema, "ObjectAggregate"
            ):
                raise KindMismatchError(f"{obj!r} is not an aggregate instance")
        elif predicate == HAS_ROLE:
            role = registry.realizable(obj)
            if role is None or role.variant != schemas.ROLE:
                raise KindMismatchError(f"{obj!r} is not a registered Role")
            if role.bearer_kind is not None and not registry.is_subkind(
                record.schema, role.bearer_kind
            ):
                raise KindMismatchError(
                    f"{record.id!r} is a {record.schema}, not a {role.bearer_kind}: "
                    f"cannot bear role {obj!r}"
                )
        # located_in / participates_in accept instance ids or opaque values.

    # -- mutation ----------------------------------------------------------------------

    def assert_relation(self, subject: str, predicate: str, obj: str, tick: int) -> bool:
        """Add a live triple. Returns False (no-op) if it is already live."""
        if (subject, predicate, obj) in self._live:
            return False
        self.check_assert(subject, predicate, obj)
        self._add(Triple(subject, predicate, obj, tick))
        return True

    def retract_relation(self, subject: str, predicate: str, obj: str, tick: int) -> None:
        key = (subject, predicate, obj)
        if key not in self._live:
            raise NoSuchLiveTripleError(f"no live triple {key!r}")
        self._retract_index(key, tick)

    def link_part(self, part: str, whole: str, linkage: str, tick: int) -> None:
        """Attach ``part`` into ``whole`` with the given linkage discipline."""
        if linkage not in (schemas.COMPOSITION, schemas.CONTAINMENT):
            raise KindMismatchError(f"unknown linkage: {linkage}")
        self.assert_relation(part, PART_OF, whole, tick)
        self._link_meta[(part, whole)] = linkage

    def linkage(self, part: str, whole: str) -> str:
        # Direct part_of assertions default to the weaker containment discipline.
        return self._link_meta.get((part, whole), schemas.CONTAINMENT)

    # -- queries -----------------------------------------------------------------------

    def query(
        self,
        pattern: schemas.Pattern,
        *,
        at: int | None = None,
        bindings: dict[str, str] | None = None,
    ) -> list[dict[str, str]]:
        """All bindings making the pattern match a live-at-``at`` triple.

        Results are ordered by (subject id, object) so traces reproduce.
        ``bindings`` pre-binds variables (and resolves constant names that
        happen to be binding names, for chain conditions).
        """
        if not self.registry.predicate_declared(pattern.predicate):
            raise UndeclaredPredicateError(f"undeclared predicate: {pattern.predicate}")
        seed = dict(bindings or {})
        subject_term = _substitute(pattern.subject, seed)
        object_term = _substitute(pattern.object, seed)

        if at is None:
            indexes = sorted(self._live_by_pred.get(pattern.predicate, ()))
            candidates = [self._records[i] for i in indexes]
        else:
            candidates = [
                t
                for t in self._records
                if t.predicate == pattern.predicate and t.live_at(at)
            ]
        candidates.sort(key=lambda t: (t.subject, t.object))

        out = []
        for triple in candidates:
            result = dict(seed)
            if not _match_term(subject_term, triple.subject, result):
                continue
            if not _match_term(object_term, triple.object, result):
                continue
            out.append(result)
        return out

    def matches(
        self,
        pattern: schemas.Pattern,
        *,
        at: int | None = None,
        bindings: dict[str, str] | None = None,
    ) -> bool:
        return bool(self.query(pattern, at=at, bindings=bindings))

    # -- aggregates -----------------------------------------------------------------------

    def instantiate_aggregate_from_member(
        self,
        aggregate: schemas.AggregateSchema,
        member_id: str,
        slot: str,
        tick: int,
        instance_id: str,
    ) -> AggregateInstance:
        """Create an aggregate instance from a single known member.

        The named slot is bound; every other slot is typed but unbound.
        Declared link relations are asserted as slots pair up.
        """
        declared = aggregate.member(slot)
        if declared is None:
            raise SlotTypeMismatchError(f"{aggregate.name!r} has no slot {slot!r}")
        member = self.instance(member_id)
        if not self.registry.is_subkind(member.schema, declared.schema):
            raise SlotTypeMismatchError(
                f"{member_id!r} is a {member.schema}, not a {declared.schema}: "
                f"cannot fill slot {slot!r}"
            )
        slots: dict[str, str | None] = {m.slot: None for m in aggregate.members}
        self.register_instance(instance_id, aggregate.name, tick, slots=slots)
        self._bind(aggregate, instance_id, slot, member_id, tick)
        return self.aggregate_view(instance_id)

    def bind_member(self, instance_id: str, slot: str, member_id: str, tick: int) -> None:
        record = self.instance(instance_id)
        aggregate = self.registry.aggregate(record.schema)
        if aggregate is None or record.slots is None:
            raise SlotTypeMismatchError(f"{instance_id!r} is not an aggregate instance")
        declared = aggregate.member(slot)
        if declared is None:
            raise SlotTypeMismatchError(f"{aggregate.name!r} has no slot {slot!r}")
        member = self.instance(member_id)
        if not self.registry.is_subkind(member.schema, declared.schema):
            raise SlotTypeMismatchError(
                f"{member_id!r} is a {member.schema}, not a {declared.schema}"
            )
        self._bind(aggregate, instance_id, slot, member_id, tick)

    def _bind(
        self,
        aggregate: schemas.AggregateSchema,
        instance_id: str,
        slot: str,
        member_id: str,
        tick: int,
    ) -> None:
        record = self.instance(instance_id)
        assert record.slots is not None
        record.slots[slot] = member_id
        self.assert_relation(member_id, MEMBER_OF, instance_id, tick)
        for link in aggregate.links:
            subject = record.slots.get(link.subject_slot)
            obj = record.slots.get(link.object_slot)
            if subject is not None and obj is not None and slot in (
                link.subject_slot,
                link.object_slot,
            ):
                self.assert_relation(subject, link.relation, obj, tick)

    def aggregate_view(self, instance_id: str) -> AggregateInstance:
        record = self.instance(instance_id)
        aggregate = self.registry.aggregate(record.schema)
        if aggregate is None or record.slots is None:
            raise SlotTypeMismatchError(f"{instance_id!r} is not an aggregate instance")
        return AggregateInstance(
            id=record.id,
            schema=record.schema,
            slots=tuple(sorted(record.slots.items())),
            slot_types=tuple(sorted((m.slot, m.schema) for m in aggregate.members)),
        )

    # -- destruction -----------------------------------------------------------------------

    def destroy_instance(self, instance_id: str, tick: int) -> list[str]:
        """Destroy an instance and its composition-linked parts, recursively.

        Containment parts and aggregate members survive; only their link
        triples are retracted. Every remaining live triple touching a
        destroyed id is retracted at ``tick``. Returns ids in traversal order.
        """
        root = self.instance(instance_id)
        if not root.alive:
            raise AlreadyDestroyedError(f"{instance_id!r} is already destroyed")

        order = [instance_id]
        seen = {instance_id}
        queue = [instance_id]
        while queue:
            whole = queue.pop(0)
            children = sorted(
                key[0]
                for key in self._live
                if key[1] == PART_OF
                and key[2] == whole
                and self.linkage(key[0], whole) == schemas.COMPOSITION
            )
            for part in children:
                if part not in seen:
                    seen.add(part)
                    order.append(part)
                    queue.append(part)

        for dest in order:
            self._instances[dest].destroyed_at = tick

        touched = sorted(
            key for key in self._live if key[0] in seen or key[2] in seen
        )
        for key in touched:
            self._retract_index(key, tick)

        # Slots pointing at a destroyed member revert to unbound in the live view.
        for record in self._instances.values():
            if record.slots:
                for slot, member in record.slots.items():
                    if member in seen:
                        record.slots[slot] = None
        return order

    # -- snapshots -------------------------------------------------------------------------

    def clone(self) -> "RelationStore":
        other = RelationStore(self.registry)
        other._records = list(self._records)
        other._live = dict(self._live)
        other._live_by_pred = {p: set(ix) for p, ix in self._live_by_pred.items()}
        other._instances = {i: rec.copy() for i, rec in self._instances.items()}
        other._link_meta = dict(self._link_meta)
        return other

    def fingerprint(self) -> str:
        payload = {
            "records": [
                [t.subject, t.predicate, t.object, t.asserted_at, t.retracted_at]
                for t in self._records
            ],
            "instances": [
                [r.id, r.schema, r.created_at, r.destroyed_at,
                 sorted(r.slots.items()) if r.slots is not None else None]
                for r in sorted(self._instances.values(), key=lambda r: r.id)
            ],
            "links": sorted([p, w, l] for (p, w), l in self._link_meta.items()),
        }
        return stable_fingerprint(payload)


def _substitute(term: schemas.Term, bindings: dict[str, str]) -> schemas.Term:
    if term.kind == schemas.VAR and term.value in bindings:
        return schemas.const(bindings[term.value])
    if term.kind == schemas.CONST and term.value in bindings:
        # Chain conditions name instances by their binding names.
        return schemas.const(bindings[term.value])
    return term


def _match_term(term: schemas.Term, value: str, bindings: dict[str, str]) -> bool:
    if term.kind == schemas.VAR:
        if term.value in bindings:
            return bindings[term.value] == value
        bindings[term.value] = value
        return True
    return term.value == value
