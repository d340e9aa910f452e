"""The blackboard runtime: instances, the relation store, a logical clock,
the unified temporal map, disposition firing, and interaction-rule dispatch.

One microworld is one execution context. Time is a logical tick counter:
every applied unit (a spawn with its parts, one transitional, one process
boundary) advances the clock by one, and all edits of a unit share its tick.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, replace

from . import schemas, transitions
from .errors import (
    DispositionCascadeOverflowError,
    DuplicateNameError,
    KindMismatchError,
    MissingRequiredDeterminableError,
    NoIndependentContinuantParticipantError,
    NoOpenIntervalError,
    SnapshotVersionMismatchError,
    UnknownDeterminantError,
    XfoError,
)
from .fingerprint import canonical_json, stable_fingerprint
from .kinds import INDEPENDENT_CONTINUANT
from .registry import Registry
from .relations import RelationStore

SNAPSHOT_VERSION = 1
DEFAULT_DISPOSITION_CAP = 1_000

SPAWN = "spawn"
DESTROY = "destroy"
TRANSITION = "transition"
PROCESS_INTERVAL = "process_interval"

# run() outcomes
COMPLETED = "completed"
ABORTED = "aborted"
QUIESCENT = "quiescent"
TICK_BUDGET_EXHAUSTED = "tick_budget_exhausted"


@dataclass(frozen=True)
class TimelineEvent:
    tick: int
    kind: str
    name: str
    participants: tuple[str, ...]
    edits: tuple[tuple[str, object], ...] = ()

    def edit(self, key: str):
        for k, v in self.edits:
            if k == key:
                return v
        return None

    def as_dict(self) -> dict:
        return {
            "tick": self.tick,
            "kind": self.kind,
            "name": self.name,
            "participants": list(self.participants),
            "edits": {k: _jsonable(v) for k, v in self.edits},
        }


def _jsonable(value):
    if isinstance(value, tuple):
        return [_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in sorted(value.items())}
    return value


@dataclass(frozen=True)
class InteractionRule:
    """Multiple dispatch over participant kind tuples.

    The guard pattern may reference participants positionally through the
    variables ?p1..?pN. The transitional's bearer is the first participant
    whose kind matches the transitional's bearer kind.
    """

    kinds: tuple[str, ...]
    guard: schemas.Pattern | None
    transitional: str


@dataclass(frozen=True)
class DispositionFiring:
    disposition: str
    bearer: str
    tick: int
    transitional: str


@dataclass(frozen=True)
class WorldSnapshot:
    version: int
    state: dict


class Microworld:
    def __init__(self, registry: Registry, name: str = "world", seed: int | None = None):
        self.registry = registry
        self.name = name
        self.store = RelationStore(registry)
        self.clock = 0
        self.events: list[TimelineEvent] = []
        self.rules: list[InteractionRule] = []
        self.disposition_cap = DEFAULT_DISPOSITION_CAP
        self._seed = seed
        self._rng = random.Random(seed) if seed is not None else None
        self._id_counters: dict[str, int] = {}

    # -- identity and time ----------------------------------------------------

    def _next_tick(self) -> int:
        self.clock += 1
        return self.clock

    def new_id(self, base: str) -> str:
        base = base.lower()
        while True:
            if self._rng is not None:
                candidate = f"{base}-{self._rng.getrandbits(32):08x}"
            else:
                count = self._id_counters.get(base, 0) + 1
                self._id_counters[base] = count
                candidate = f"{base}-{count}"
            if not self.store.has_instance(candidate):
                return candidate

    def _record(self, event: TimelineEvent) -> int:
        self.events.append(event)
        return len(self.events) - 1

    # -- spawning -----------------------------------------------------------------

    def spawn(
        self,
        schema_name: str,
        determinants: dict[str, str] | None = None,
        *,
        location: str | None = None,
        instance_id: str | None = None,
    ) -> str:
        """Create an alive instance with its quality triples and (recursively)
        its declared parts, all as one unit at one tick."""
        schema = self.registry.object_schema(schema_name)
        if schema is None:
            raise KindMismatchError(f"{schema_name!r} is not a spawnable object schema")
        if not self.registry.is_independent_continuant_kind(schema_name):
            raise KindMismatchError(f"{schema_name!r} is not an Independent Continuant")
        # Validate the whole unit (parts included) before mutating anything.
        given = dict(determinants or {})
        self._validate_spawn(schema, given)
        if instance_id is not None and self.store.has_instance(instance_id):
            raise DuplicateNameError(f"instance id {instance_id!r} already exists")
        tick = self.clock + 1
        new_id = self._spawn_at(schema, given, location, instance_id, tick)
        self.clock = tick
        return new_id

    def _validate_spawn(self, schema: schemas.ThickObjectSchema,
                        determinants: dict[str, str]) -> None:
        for det in determinants:
            if schema.quality_slot(det) is None:
                raise UnknownDeterminantError(
                    f"{schema.name!r} declares no determinable {det!r}"
                )
        for slot in schema.qualities:
            if slot.required and slot.determinable not in determinants:
                raise MissingRequiredDeterminableError(
                    f"spawn of {schema.name!r} misses required determinable "
                    f"{slot.determinable!r}"
                )
            value = determinants.get(slot.determinable)
            if value is not None:
                ontology = self.registry.quality(slot.ontology)
                if ontology is None or value not in ontology.determinants:
                    raise UnknownDeterminantError(
                        f"{value!r} is not a determinant of quality {slot.ontology!r}"
                    )
        for part in schema.parts:
            part_schema = self.registry.object_schema(part.schema)
            self._validate_spawn(part_schema, {})

    def _spawn_at(
        self,
        schema: schemas.ThickObjectSchema,
        determinants: dict[str, str],
        location: str | None,
        instance_id: str | None,
        tick: int,
    ) -> str:
        new_id = instance_id or self.new_id(schema.name)
        self.store.register_instance(new_id, schema.name, tick)
        for slot in schema.qualities:
            value = determinants.get(slot.determinable)
            if value is not None:
                self.store.assert_relation(new_id, slot.determinable, value, tick)
        if location is not None:
            self.store.assert_relation(new_id, "located_in", location, tick)
        self._record(
            TimelineEvent(
                tick,
                SPAWN,
                schema.name,
                (new_id,),
                (
                    ("qualities", tuple(sorted(determinants.items()))),
                    ("location", location),
                ),
            )
        )
        # Parts are integral to a thick object: spawn them in the same unit.
        for part in schema.parts:
            part_schema = self.registry.object_schema(part.schema)
            part_id = self._spawn_at(part_schema, {}, None, f"{new_id}.{part.slot}", tick)
            self.store.link_part(part_id, new_id, part.linkage, tick)
        return new_id

    def instantiate_aggregate(
        self, schema_name: str, member_id: str, slot: str, *, instance_id: str | None = None
    ):
        aggregate = self.registry.aggregate(schema_name)
        if aggregate is None:
            raise KindMismatchError(f"{schema_name!r} is not an aggregate schema")
        tick = self.clock + 1
        new_id = instance_id or self.new_id(schema_name)
        view = self.store.instantiate_aggregate_from_member(
            aggregate, member_id, slot, tick, new_id
        )
        self.clock = tick
        self._record(TimelineEvent(tick, SPAWN, schema_name, (new_id,), (("member", member_id),)))
        return view

    def bind_member(self, instance_id: str, slot: str, member_id: str) -> None:
        tick = self.clock + 1
        self.store.bind_member(instance_id, slot, member_id, tick)
        self.clock = tick

    # -- relation edits ---------------------------------------------------------------

    def assert_relation(self, subject: str, predicate: str, obj: str) -> bool:
        if (subject, predicate, obj) in self.store.live_set():
            return False
        tick = self.clock + 1
        added = self.store.assert_relation(subject, predicate, obj, tick)
        self.clock = tick
        return added

    def retract_relation(self, subject: str, predicate: str, obj: str) -> None:
        tick = self.clock + 1
        self.store.retract_relation(subject, predicate, obj, tick)
        self.clock = tick

    def destroy(self, instance_id: str) -> list[str]:
        tick = self.clock + 1
        destroyed = self.store.destroy_instance(instance_id, tick)
        self.clock = tick
        self._record(
            TimelineEvent(tick, DESTROY, instance_id, tuple(destroyed),
                          (("destroyed", tuple(destroyed)),))
        )
        return destroyed

    # -- processes -----------------------------------------------------------------------

    def begin_process(self, process_name: str, participants) -> int:
        """Open a process interval. At least one participant must be an alive
        Independent Continuant."""
        participants = tuple(participants)
        alive_ic = [
            p
            for p in participants
            if self.store.has_instance(p)
            and self.store.instance(p).alive
            and self.store.is_independent_continuant(p)
        ]
        if not alive_ic:
            raise NoIndependentContinuantParticipantError(
                f"process {process_name!r} has no alive Independent Continuant participant"
            )
        tick = self._next_tick()
        return self._record(
            TimelineEvent(
                tick,
                PROCESS_INTERVAL,
                process_name,
                tuple(sorted(participants)),
                (("end", None),),
            )
        )

    def end_process(self, process_name: str, participants=None) -> int:
        """Close the earliest matching open interval at the current tick."""
        wanted = tuple(sorted(participants)) if participants is not None else None
        for index, event in enumerate(self.events):
            if (
                event.kind == PROCESS_INTERVAL
                and event.name == process_name
                and event.edit("end") is None
                and (wanted is None or event.participants == wanted)
            ):
                tick = self._next_tick()
                self.events[index] = replace(event, edits=(("end", tick),))
                return index
        raise NoOpenIntervalError(f"no open interval for process {process_name!r}")

    # -- transitionals and dispositions ------------------------------------------------------

    def apply(self, transitional_name: str, bearer: str):
        """Apply a named transitional; blocked applications consume no tick."""
        transitional = self.registry.transitional(transitional_name)
        if transitional is None:
            raise XfoError(f"unknown transitional: {transitional_name}")
        tick = self.clock + 1
        result = transitions.apply_transitional(self.store, transitional, bearer, tick)
        if isinstance(result, transitions.AppliedTransition):
            self.clock = tick
            self._record(
                TimelineEvent(
                    tick,
                    TRANSITION,
                    transitional_name,
                    (bearer,),
                    (("deletes", result.deletes), ("creates", result.creates)),
                )
            )
        return result

    def fire_dispositions(self) -> list[DispositionFiring]:
        """Fire every triggered disposition, sure-fire, to fixpoint.

        After each firing the scan restarts so cascades fire in a stable
        order. A (disposition, bearer) pair whose realization blocks is
        skipped for the rest of the call. Raises DispositionCascadeOverflow
        past the cap.
        """
        fired: list[DispositionFiring] = []
        blocked: set[tuple[str, str]] = set()
        progressed = True
        while progressed:
            progressed = False
            for disposition in self.registry.dispositions():
                if disposition.trigger is None or disposition.realization is None:
                    continue
                if disposition.bearer_kind is None:
                    continue
                for bearer in self.store.alive_of_kind(disposition.bearer_kind):
                    if (disposition.name, bearer) in blocked:
                        continue
                    if not self.store.matches(
                        disposition.trigger, bindings={"bearer": bearer}
                    ):
                        continue
                    result = self.apply(disposition.realization, bearer)
                    if isinstance(result, transitions.AppliedTransition):
                        fired.append(
                            DispositionFiring(
                                disposition.name, bearer, result.tick, result.transitional
                            )
                        )
                        if len(fired) > self.disposition_cap:
                            raise DispositionCascadeOverflowError(
                                f"disposition cascade exceeded {self.disposition_cap} firings"
                            )
                        progressed = True
                        break
                    blocked.add((disposition.name, bearer))
                if progressed:
                    break
        return fired

    # -- interaction rules ----------------------------------------------------------------------

    def add_interaction_rule(
        self, kinds: tuple[str, ...], guard: schemas.Pattern | None, transitional: str
    ) -> None:
        self.rules.append(InteractionRule(tuple(kinds), guard, transitional))

    def _rule_specificity(self, rule: InteractionRule) -> int:
        return sum(len(self.registry.kinds.path_to_entity(k)) for k in rule.kinds)

    def _rule_candidates(self):
        """Yield (rule index, participant tuple) pairs whose kinds and guard
        match, in rule-declaration then instance-id order."""
        for index, rule in enumerate(self.rules):
            pools = [self.store.alive_of_kind(kind) for kind in rule.kinds]
            if any(not pool for pool in pools):
                continue
            for combo in _product(pools):
                if len(set(combo)) != len(combo):
                    continue
                if rule.guard is not None:
                    bindings = {f"p{i + 1}": inst for i, inst in enumerate(combo)}
                    if not self.store.matches(rule.guard, bindings=bindings):
                        continue
                yield index, combo

    def _rule_bearer(self, rule: InteractionRule, combo: tuple[str, ...]) -> str | None:
        transitional = self.registry.transitional(rule.transitional)
        if transitional is None or transitional.bearer_kind is None:
            return None
        for instance_id in combo:
            record = self.store.instance(instance_id)
            if self.registry.is_subkind(record.schema, transitional.bearer_kind):
                return instance_id
        return None

    def _rules_matching(self, combo: tuple[str, ...]) -> list[tuple[int, InteractionRule]]:
        """Rules whose kind tuple and guard match ``combo``, most specific
        first, ties broken by declaration order."""
        matching = []
        for index, rule in enumerate(self.rules):
            if len(rule.kinds) != len(combo):
                continue
            if not all(
                self.registry.is_subkind(self.store.instance(inst).schema, kind)
                for inst, kind in zip(combo, rule.kinds)
            ):
                continue
            if rule.guard is not None:
                bindings = {f"p{i + 1}": inst for i, inst in enumerate(combo)}
                if not self.store.matches(rule.guard, bindings=bindings):
                    continue
            matching.append((index, rule))
        matching.sort(key=lambda pair: (-self._rule_specificity(pair[1]), pair[0]))
        return matching

    def fire_one_interaction(self):
        """Fire the first applicable interaction rule.

        Participant tuples are visited in rule-declaration then id order; on
        a given tuple the most specific kind tuple wins, falling back to less
        specific rules when a realization blocks. Returns the applied
        transition, or None when nothing can fire."""
        attempted: set[tuple[str, ...]] = set()
        for _, combo in self._rule_candidates():
            if combo in attempted:
                continue
            attempted.add(combo)
            for _, rule in self._rules_matching(combo):
                bearer = self._rule_bearer(rule, combo)
                if bearer is None:
                    continue
                result = self.apply(rule.transitional, bearer)
                if isinstance(result, transitions.AppliedTransition):
                    return result
        return None

    # -- timeline export --------------------------------------------------------------------------

    def export_timeline(self) -> list[dict]:
        """The unified temporal map: every event, nondecreasing tick order."""
        ordered = sorted(enumerate(self.events), key=lambda pair: (pair[1].tick, pair[0]))
        return [event.as_dict() for _, event in ordered]

    def timeline_ndjson(self) -> str:
        lines = [canonical_event_json(ev) for ev in self.export_timeline()]
        return "".join(line + "\n" for line in lines)

    # -- snapshots ------------------------------------------------------------------------------------

    def snapshot(self) -> WorldSnapshot:
        return WorldSnapshot(
            SNAPSHOT_VERSION,
            {
                "name": self.name,
                "seed": self._seed,
                "clock": self.clock,
                "store": self.store.clone(),
                "events": tuple(self.events),
                "rules": tuple(self.rules),
                "counters": dict(self._id_counters),
                "rng": self._rng.getstate() if self._rng is not None else None,
                "disposition_cap": self.disposition_cap,
                "registry": self.registry,
            },
        )

    @classmethod
    def restore(cls, snapshot: WorldSnapshot) -> "Microworld":
        if snapshot.version != SNAPSHOT_VERSION:
            raise SnapshotVersionMismatchError(
                f"snapshot version {snapshot.version} != {SNAPSHOT_VERSION}"
            )
        state = snapshot.state
        world = cls(state["registry"], name=state["name"], seed=state["seed"])
        world.store = state["store"].clone()
        world.clock = state["clock"]
        world.events = list(state["events"])
        world.rules = list(state["rules"])
        world._id_counters = dict(state["counters"])
        world.disposition_cap = state["disposition_cap"]
        if state["rng"] is not None:
            world._rng = random.Random()
            world._rng.setstate(state["rng"])
        return world

    def fingerprint(self) -> str:
        payload = {
            "clock": self.clock,
            "store": self.store.fingerprint(),
            "events": [canonical_event_json(e) for e in self.export_timeline()],
        }
        return stable_fingerprint(payload)


def canonical_event_json(event_dict: dict) -> str:
    # Fixed key order: tick, kind, name, participants, edits.
    return json.dumps(event_dict, sort_keys=False, separators=(",", ":"), ensure_ascii=True)


def _product(pools):
    if not pools:
        yield ()
        return
    head, *rest = pools
    for item in head:
        for tail in _product(rest):
            yield (item,) + tail


# --- running --------------------------------------------------------------------------------------

@dataclass
class RunResult:
    status: str
    world: Microworld
    applied: list
    events: list[TimelineEvent]
    ticks_used: int


def run(world: Microworld, chain: transitions.ChainInstance | None = None,
        *, max_ticks: int = 10_000) -> RunResult:
    """Run a chain instance, or (without one) the interaction rules.

    Steps until completion, quiescence, or the tick budget; after every
    applied transitional, dispositions fire to fixpoint. On budget exhaustion
    the world state so far is still returned.
    """
    if max_ticks <= 0:
        raise XfoError("max_ticks must be positive")
    start_clock = world.clock
    start_events = len(world.events)
    applied: list = []

    def budget_left() -> bool:
        return world.clock - start_clock < max_ticks

    if chain is not None:
        status = None
        while not chain.finished:
            if not budget_left():
                status = TICK_BUDGET_EXHAUSTED
                break
            before = len(chain.log)
            transitions.step_chain(world, chain)
            if len(chain.log) > before:
                applied.append(chain.log[-1])
                world.fire_dispositions()
        if status is None:
            status = COMPLETED if chain.status == transitions.COMPLETED else ABORTED
    else:
        while True:
            if not budget_left():
                status = TICK_BUDGET_EXHAUSTED
                break
            result = world.fire_one_interaction()
            if result is None:
                status = QUIESCENT
                break
            applied.append(result)
            world.fire_dispositions()

    return RunResult(
        status=status,
        world=world,
        applied=applied,
        events=list(world.events[start_events:]),
        ticks_used=world.clock - start_clock,
    )


def build_world(
    registry: Registry,
    world_def: schemas.WorldDef,
    *,
    seed: int | None = None,
) -> Microworld:
    """Materialize a compiled world definition: spawns then assertions."""
    world = Microworld(registry, name=world_def.name, seed=seed)
    for spawn in world_def.spawns:
        world.spawn(
            spawn.schema,
            dict(spawn.assignments),
            instance_id=spawn.instance,
        )
    for pattern in world_def.asserts:
        subject = pattern.subject.value
        obj = pattern.object.value
        world.assert_relation(subject, pattern.predicate, obj)
    return world
