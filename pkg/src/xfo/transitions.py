"""Transitionals as atomic guarded edits, and transition chains.

Guard matching takes the first binding in deterministic query order. An
application either succeeds as one unit at one tick or blocks with the store
untouched: edits are validated in full against the post-delete view before
anything mutates.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import schemas
from .errors import (
    BearerKindMismatchError,
    ChainAlreadyFinishedError,
    DestroyedBearerError,
    MissingBindingError,
    UnknownChainError,
    XfoError,
)
from .relations import RelationStore

DEFAULT_LOOP_CAP = 10_000

PLANNED = "planned"
RUNNING = "running"
COMPLETED = "completed"
ABORTED = "aborted"

LOOP_CAP_REASON = "NonterminatingChain"


@dataclass(frozen=True)
class AppliedTransition:
    transitional: str
    bearer: str
    tick: int
    bindings: tuple[tuple[str, str], ...]
    deletes: tuple[tuple[str, str, str], ...]
    creates: tuple[tuple[str, str, str], ...]


@dataclass(frozen=True)
class BlockedTransition:
    transitional: str
    bearer: str
    failed_guard: schemas.Pattern | None
    reason: str


def solve_guards(
    store: RelationStore,
    guards: tuple[schemas.Pattern, ...],
    seed: dict[str, str],
) -> tuple[dict[str, str] | None, int]:
    """First full solution of a guard conjunction, or (None, deepest index).

    Guards are tried in declaration order; each extension follows the store's
    deterministic query order, so repeated runs bind identically.
    """
    deepest = 0

    def descend(index: int, bindings: dict[str, str]) -> dict[str, str] | None:
        nonlocal deepest
        if index == len(guards):
            return bindings
        deepest = max(deepest, index)
        for extension in store.query(guards[index], bindings=bindings):
            solution = descend(index + 1, extension)
            if solution is not None:
                return solution
        return None

    solution = descend(0, dict(seed))
    return solution, deepest


def _ground(pattern: schemas.Pattern, bindings: dict[str, str]) -> tuple[str, str, str]:
    def value(term: schemas.Term) -> str:
        if term.kind == schemas.VAR:
            return bindings[term.value]
        return term.value

    return (value(pattern.subject), pattern.predicate, value(pattern.object))


def apply_transitional(
    store: RelationStore,
    transitional: schemas.TransitionalSchema,
    bearer: str,
    tick: int,
) -> AppliedTransition | BlockedTransition:
    """Apply one transitional atomically at ``tick``.

    Returns an AppliedTransition on success. If any guard fails or any edit
    would be invalid, returns a BlockedTransition and the store is untouched.
    """
    record = store.instance(bearer)
    if not record.alive:
        raise DestroyedBearerError(f"bearer {bearer!r} is destroyed")
    if transitional.bearer_kind is None or not store.registry.is_subkind(
        record.schema, transitional.bearer_kind
    ):
        raise BearerKindMismatchError(
            f"{bearer!r} is a {record.schema}, not a {transitional.bearer_kind}: "
            f"cannot bear {transitional.name!r}"
        )

    bindings, deepest = solve_guards(store, transitional.guards, {"bearer": bearer})
    if bindings is None:
        return BlockedTransition(
            transitional.name,
            bearer,
            transitional.guards[deepest] if transitional.guards else None,
            "guard failed",
        )

    deletes: list[tuple[str, str, str]] = []
    for pattern in transitional.deletes:
        ground = _ground(pattern, bindings)
        if ground not in deletes:
            deletes.append(ground)
    creates: list[tuple[str, str, str]] = []
    for pattern in transitional.creates:
        ground = _ground(pattern, bindings)
        if ground not in creates:
            creates.append(ground)

    # Validate the whole unit before touching the store.
    live = store.live_set()
    for ground in deletes:
        if ground not in live:
            return BlockedTransition(
                transitional.name, bearer, None, f"delete target not live: {ground}"
            )
    pending = frozenset(deletes)
    placed: set[tuple[str, str, str]] = set()
    for ground in creates:
        subject, predicate, obj = ground
        if ground in live and ground not in pending:
            continue  # identical live triple: create is a no-op
        try:
            store.check_assert(subject, predicate, obj, pending_deletes=pending)
        except XfoError as exc:
            # Any invalid edit blocks the whole unit before anything mutates.
            return BlockedTransition(transitional.name, bearer, None, str(exc))
        for prior in placed:
            if prior[0] == subject and prior[1] == predicate and prior[2] != obj:
                if store.registry.determinable_slot(
                    store.instance(subject).schema, predicate
                ):
                    return BlockedTransition(
                        transitional.name, bearer, None,
                        f"conflicting creates for functional {predicate!r}",
                    )
        placed.add(ground)

    # Deletes first, then creates, all at one tick.
    for subject, predicate, obj in deletes:
        store.retract_relation(subject, predicate, obj, tick)
    for subject, predicate, obj in creates:
        store.assert_relation(subject, predicate, obj, tick)

    return AppliedTransition(
        transitional.name,
        bearer,
        tick,
        tuple(sorted(bindings.items())),
        tuple(deletes),
        tuple(creates),
    )


# --- chain instances -------------------------------------------------------------

@dataclass
class Frame:
    steps: tuple[schemas.Step, ...]
    index: int = 0
    loop_counts: dict[int, int] = field(default_factory=dict)


@dataclass
class ChainInstance:
    """A chain Universal instantiated for one run.

    Status only ever moves planned -> running -> {completed, aborted}.
    """

    schema: schemas.ChainSchema
    bindings: dict[str, str]
    bearer_map: dict[str, str]
    status: str = PLANNED
    frames: list[Frame] = field(default_factory=list)
    log: list[AppliedTransition] = field(default_factory=list)
    abort_reason: str | None = None
    loop_cap: int = DEFAULT_LOOP_CAP

    @property
    def finished(self) -> bool:
        return self.status in (COMPLETED, ABORTED)

    @property
    def program_counter(self) -> tuple[int, ...]:
        return tuple(frame.index for frame in self.frames)


def reachable_do_steps(chain: schemas.ChainSchema) -> tuple[schemas.DoStep, ...]:
    return tuple(
        step for step in schemas.walk_steps(chain.steps) if isinstance(step, schemas.DoStep)
    )


def instantiate_chain(
    world,
    chain_name: str,
    bindings: dict[str, str],
    *,
    loop_cap: int = DEFAULT_LOOP_CAP,
) -> ChainInstance:
    """Instantiate a chain Universal as a planned Particular.

    ``bindings`` map role names to instance ids. Every transitional reachable
    in the body must have a bound instance of its bearer kind; the first such
    binding in name order becomes the bearer for that step.
    """
    registry = world.registry
    chain = registry.chain(chain_name)
    if chain is None:
        raise UnknownChainError(f"unknown chain: {chain_name}")
    for name, instance_id in sorted(bindings.items()):
        if not world.store.has_instance(instance_id):
            raise MissingBindingError(
                f"binding {name}={instance_id!r} names an unknown instance"
            )
    bearer_map: dict[str, str] = {}
    for step in reachable_do_steps(chain):
        transitional = registry.transitional(step.transitional)
        if step.transitional in bearer_map or transitional is None:
            continue
        bearer = None
        for _, instance_id in sorted(bindings.items()):
            record = world.store.instance(instance_id)
            if transitional.bearer_kind and registry.is_subkind(
                record.schema, transitional.bearer_kind
            ):
                bearer = instance_id
                break
        if bearer is None:
            raise MissingBindingError(
                f"chain {chain_name!r} needs a {transitional.bearer_kind} bound "
                f"for transitional {step.transitional!r}"
            )
        bearer_map[step.transitional] = bearer
    return ChainInstance(
        schema=chain,
        bindings=dict(bindings),
        bearer_map=bearer_map,
        frames=[Frame(chain.steps)],
        loop_cap=loop_cap,
    )


def step_chain(world, instance: ChainInstance) -> ChainInstance:
    """Execute one step of a chain against a microworld.

    ``do`` applies its transitional (a blocked transitional aborts the chain,
    leaving state as it was before the step); ``if`` evaluates and descends;
    ``while`` re-evaluates before each iteration and aborts past the loop cap.
    Past the last step the instance completes.
    """
    if instance.finished:
        raise ChainAlreadyFinishedError(f"chain {instance.schema.name!r} already finished")
    if instance.status == PLANNED:
        instance.status = RUNNING

    while instance.frames and instance.frames[-1].index >= len(instance.frames[-1].steps):
        instance.frames.pop()
    if not instance.frames:
        instance.status = COMPLETED
        return instance

    frame = instance.frames[-1]
    step = frame.steps[frame.index]

    if isinstance(step, schemas.DoStep):
        bearer = instance.bearer_map[step.transitional]
        result = world.apply(step.transitional, bearer)
        if isinstance(result, AppliedTransition):
            instance.log.append(result)
            frame.index += 1
        else:
            instance.status = ABORTED
            instance.abort_reason = (
                f"transitional {step.transitional!r} blocked: {result.reason}"
            )
    elif isinstance(step, schemas.IfStep):
        taken = world.store.matches(step.condition, bindings=instance.bindings)
        frame.index += 1
        branch = step.then_steps if taken else step.else_steps
        if branch:
            instance.frames.append(Frame(branch))
    elif isinstance(step, schemas.WhileStep):
        if world.store.matches(step.condition, bindings=instance.bindings):
            count = frame.loop_counts.get(frame.index, 0) + 1
            frame.loop_counts[frame.index] = count
            if count > instance.loop_cap:
                instance.status = ABORTED
                instance.abort_reason = (
                    f"{LOOP_CAP_REASON}: loop cap {instance.loop_cap} exceeded in "
                    f"{instance.schema.name!r}"
                )
                return instance
            instance.frames.append(Frame(step.body))
        else:
            frame.loop_counts[frame.index] = 0
            frame.index += 1
    return instance


# --- thick chain summaries ----------------------------------------------------------

@dataclass(frozen=True)
class ChainSummary:
    """A structured description of a whole chain: participants, edits
    touched, interventions, and control structure."""

    chain: str
    kind: str
    transitionals: tuple[str, ...]
    participants: tuple[str, ...]
    predicates: tuple[str, ...]
    interventions: tuple[str, ...]
    loop_count: int
    conditional_count: int
    depth: int


def thick_chain_summary(registry, chain_name: str) -> ChainSummary:
    chain = registry.chain(chain_name)
    if chain is None:
        raise UnknownChainError(f"unknown chain: {chain_name}")

    transitionals: list[str] = []
    interventions: list[str] = []
    predicates: set[str] = set()
    participants: set[str] = set()
    loops = 0
    conditionals = 0

    def note_pattern(pattern: schemas.Pattern) -> None:
        predicates.add(pattern.predicate)
        relation = registry.relation(pattern.predicate)
        if relation is not None:
            participants.update((relation.subject_kind, relation.object_kind))
        else:
            participants.update(registry.determinable_declarers(pattern.predicate))

    for step in schemas.walk_steps(chain.steps):
        if isinstance(step, schemas.DoStep):
            if step.transitional not in transitionals:
                transitionals.append(step.transitional)
            if step.intervention:
                interventions.append(step.transitional)
            transitional = registry.transitional(step.transitional)
            if transitional is not None:
                if transitional.bearer_kind:
                    participants.add(transitional.bearer_kind)
                for pattern in transitional.guards:
                    note_pattern(pattern)
                for edit in transitional.edits:
                    note_pattern(edit.pattern)
        elif isinstance(step, schemas.IfStep):
            conditionals += 1
            note_pattern(step.condition)
        elif isinstance(step, schemas.WhileStep):
            loops += 1
            note_pattern(step.condition)

    return ChainSummary(
        chain=chain.name,
        kind=chain.kind,
        transitionals=tuple(transitionals),
        participants=tuple(sorted(participants)),
        predicates=tuple(sorted(predicates)),
        interventions=tuple(interventions),
        loop_count=loops,
        conditional_count=conditionals,
        depth=schemas.step_depth(chain.steps),
    )
