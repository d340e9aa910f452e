"""Brute-force functional equivalence of transition chains.

Two chains are functionally equivalent over a state space when, run to
completion or abort from every enumerable initial store, their final live
triple sets coincide. The space enumerates instances and sweeps each
declared determinable over its full ontology unless pinned.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

from . import transitions
from .errors import NonterminatingChainError, StateSpaceTooLargeError, XfoError
from .microworld import Microworld, run
from .registry import Registry

DEFAULT_STATE_BOUND = 1_000_000


@dataclass(frozen=True)
class StateSpace:
    """A finite family of initial stores.

    ``instances`` lists (name, schema) pairs; every declared determinable of
    each schema sweeps its whole quality ontology unless pinned to one value
    via ``pinned`` entries (instance, determinable, value).
    """

    instances: tuple[tuple[str, str], ...]
    pinned: tuple[tuple[str, str, str], ...] = ()


@dataclass(frozen=True)
class EquivalenceResult:
    equivalent: bool
    counterexample: tuple[tuple[str, str], ...] | None  # (("inst.det", value), ...)
    states_checked: int


def _axes(registry: Registry, space: StateSpace) -> list[tuple[str, str, tuple[str, ...]]]:
    pinned = {(inst, det): value for inst, det, value in space.pinned}
    axes: list[tuple[str, str, tuple[str, ...]]] = []
    for name, schema_name in sorted(space.instances):
        schema = registry.object_schema(schema_name)
        if schema is None:
            raise XfoError(f"{schema_name!r} is not an object schema")
        for slot in schema.qualities:
            pin = pinned.get((name, slot.determinable))
            if pin is not None:
                values: tuple[str, ...] = (pin,)
            else:
                ontology = registry.quality(slot.ontology)
                values = ontology.determinants
            axes.append((name, slot.determinable, values))
    return axes


def _final_state(
    registry: Registry,
    chain_name: str,
    space: StateSpace,
    assignment: dict[tuple[str, str], str],
    loop_cap: int,
) -> frozenset[tuple[str, str, str]]:
    world = Microworld(registry, name="equiv")
    for name, schema_name in space.instances:
        determinants = {
            det: value for (inst, det), value in assignment.items() if inst == name
        }
        world.spawn(schema_name, determinants, instance_id=name)
    bindings = {name: name for name, _ in space.instances}
    instance = transitions.instantiate_chain(world, chain_name, bindings, loop_cap=loop_cap)
    run(world, instance, max_ticks=10**9)
    if instance.abort_reason and instance.abort_reason.startswith(
        transitions.LOOP_CAP_REASON
    ):
        raise NonterminatingChainError(instance.abort_reason)
    return world.store.live_set()


def check_equivalence(
    registry: Registry,
    chain_a: str,
    chain_b: str,
    space: StateSpace,
    *,
    state_bound: int = DEFAULT_STATE_BOUND,
    loop_cap: int = transitions.DEFAULT_LOOP_CAP,
) -> EquivalenceResult:
    """Run both chains from every initial store in the space.

    Returns equivalence, or the lexicographically first differing initial
    store (instances in name order, determinables in declaration order,
    values in ontology order). Raises StateSpaceTooLarge when the product
    exceeds ``state_bound`` and NonterminatingChain when a run hits its
    loop cap.
    """
    for chain_name in (chain_a, chain_b):
        if registry.chain(chain_name) is None:
            raise XfoError(f"unknown chain: {chain_name}")
    axes = _axes(registry, space)
    size = math.prod(len(values) for _, _, values in axes)
    if size > state_bound:
        raise StateSpaceTooLargeError(f"state space has {size} states (bound {state_bound})")

    checked = 0
    for combo in itertools.product(*[values for _, _, values in axes]):
        assignment = {
            (inst, det): value for (inst, det, _), value in zip(axes, combo)
        }
        checked += 1
        final_a = _final_state(registry, chain_a, space, assignment, loop_cap)
        final_b = _final_state(registry, chain_b, space, assignment, loop_cap)
        if final_a != final_b:
            witness = tuple(
                (f"{inst}.{det}", value) for (inst, det), value in sorted(assignment.items())
            )
            return EquivalenceResult(False, witness, checked)
    return EquivalenceResult(True, None, checked)
