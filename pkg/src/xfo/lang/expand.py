"""Macro expansion for repetitive activity vocabulary.

From a verb stem like ``bak`` this emits three linked schema stubs: the actor
role (baker), the activity process (baking), and the facility object
(bakery). Irregular forms can be renamed before registration.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .. import schemas
from ..errors import EmptyRootError
from ..registry import RegistryBuilder

_IDENT_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_\-]*$")


@dataclass(frozen=True)
class ActivityFamily:
    role: schemas.RealizableSchema
    process: schemas.ProcessSchema
    facility: schemas.ThickObjectSchema
    links: tuple[tuple[str, str, str], ...]  # (predicate, subject, object)


def expand_activity_family(root: str, *, bearer: str = "Person") -> ActivityFamily:
    """Build the <root>er / <root>ing / <root>ery stub family."""
    if not root or not _IDENT_RE.match(root):
        raise EmptyRootError(f"activity root must be a non-empty identifier, got {root!r}")
    actor = f"{root}er"
    activity = f"{root}ing"
    facility = f"{root}ery"
    return ActivityFamily(
        role=schemas.RealizableSchema(actor, schemas.ROLE, bearer_kind=bearer),
        process=schemas.ProcessSchema(activity, participants=(bearer,)),
        facility=schemas.ThickObjectSchema(facility),
        links=(
            ("has_role", bearer, actor),
            ("participates_in", bearer, activity),
            ("located_in", activity, facility),
        ),
    )


def register_family(builder: RegistryBuilder, family: ActivityFamily) -> RegistryBuilder:
    builder.register(family.role)
    builder.register(family.process)
    builder.register(family.facility)
    return builder
