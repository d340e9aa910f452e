"""The fixed upper taxonomy and the kind table built over it.

The upper taxonomy is hard-coded and acyclic. User-declared universals
attach below exactly one upper node; the KindTable records every kind's
single parent and answers path and subkind queries.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import XfoError

ENTITY = "Entity"
CONTINUANT = "Continuant"
OCCURRENT = "Occurrent"
INDEPENDENT_CONTINUANT = "IndependentContinuant"
MATERIAL_ENTITY = "MaterialEntity"
OBJECT = "Object"
OBJECT_AGGREGATE = "ObjectAggregate"
DEPENDENT_CONTINUANT = "DependentContinuant"
QUALITY = "Quality"
RELATIONAL_QUALITY = "RelationalQuality"
REALIZABLE = "Realizable"
ROLE = "Role"
DISPOSITION = "Disposition"
FUNCTION = "Function"
PROCESS = "Process"
TRANSITIONAL = "Transitional"

# name -> parent; Entity is the sole root.
UPPER_TAXONOMY: dict[str, str | None] = {
    ENTITY: None,
    CONTINUANT: ENTITY,
    OCCURRENT: ENTITY,
    INDEPENDENT_CONTINUANT: CONTINUANT,
    MATERIAL_ENTITY: INDEPENDENT_CONTINUANT,
    OBJECT: MATERIAL_ENTITY,
    OBJECT_AGGREGATE: MATERIAL_ENTITY,
    DEPENDENT_CONTINUANT: CONTINUANT,
    QUALITY: DEPENDENT_CONTINUANT,
    RELATIONAL_QUALITY: QUALITY,
    REALIZABLE: DEPENDENT_CONTINUANT,
    ROLE: REALIZABLE,
    DISPOSITION: REALIZABLE,
    FUNCTION: REALIZABLE,
    PROCESS: OCCURRENT,
    TRANSITIONAL: OCCURRENT,
}

RESERVED_NAMES = frozenset(UPPER_TAXONOMY)


def is_upper(name: str) -> bool:
    return name in UPPER_TAXONOMY


@dataclass(frozen=True)
class Kind:
    """A named node in the kind hierarchy with its single parent."""

    name: str
    parent: str | None


class KindTable:
    """Immutable map from every known kind to its parent.

    User kinds are layered over the upper taxonomy at construction time;
    the table never changes afterwards, so it is safe to share.
    """

    def __init__(self, user_kinds: dict[str, str] | None = None):
        table = dict(UPPER_TAXONOMY)
        for name, parent in (user_kinds or {}).items():
            if name in table:
                raise XfoError(f"kind {name!r} shadows an existing kind")
            table[name] = parent
        self._table = table
        # Validate: every chain must reach Entity without repeating a node.
        for name in table:
            self.path_to_entity(name)

    def __contains__(self, name: str) -> bool:
        return name in self._table

    def parent(self, name: str) -> str | None:
        if name not in self._table:
            raise XfoError(f"unknown kind: {name}")
        return self._table[name]

    def path_to_entity(self, name: str) -> tuple[str, ...]:
        """The unique parent chain from ``name`` up to and including Entity."""
        path = []
        seen = set()
        cursor: str | None = name
        while cursor is not None:
            if cursor in seen:
                raise XfoError(f"kind cycle through {cursor!r}")
            seen.add(cursor)
            if cursor not in self._table:
                raise XfoError(f"unknown kind: {cursor}")
            path.append(cursor)
            cursor = self._table[cursor]
        return tuple(path)

    def is_subkind(self, name: str, ancestor: str) -> bool:
        """True when ``ancestor`` lies on the (unique) path from name to Entity."""
        return ancestor in self.path_to_entity(name)

    def attachment(self, name: str) -> str:
        """The first upper-taxonomy node on the path from ``name`` upward."""
        for node in self.path_to_entity(name):
            if node in UPPER_TAXONOMY:
                return node
        raise XfoError(f"kind {name!r} does not attach to the upper taxonomy")

    def depth_below_attachment(self, name: str) -> int:
        """Edges from ``name`` down from its upper attachment point (0 for upper nodes)."""
        depth = 0
        for node in self.path_to_entity(name):
            if node in UPPER_TAXONOMY:
                return depth
            depth += 1
        raise XfoError(f"kind {name!r} does not attach to the upper taxonomy")

    def is_independent_continuant(self, name: str) -> bool:
        return self.is_subkind(name, INDEPENDENT_CONTINUANT)

    def names(self) -> tuple[str, ...]:
        return tuple(self._table)
