"""XFO: a compiler and blackboard runtime for thick-object models.

Source modules (.xfo) compile into an immutable registry of Universals;
microworlds instantiate Particulars and run guarded transitionals, chains,
and dispositions over a triple store with full history, producing auditable
traces and a unified temporal map.
"""

from . import errors
from .diagnostics import Diagnostic, Span, format_diagnostics
from .discourse import CausalField, Claim, ClaimLedger, InusVerdict, check_inus
from .equivalence import EquivalenceResult, StateSpace, check_equivalence
from .foundry import DEFAULT_FACETS, Foundry, OntologyModuleRecord
from .kinds import UPPER_TAXONOMY, KindTable
from .lang import (
    ActivityFamily,
    CompileResult,
    compile_modules,
    expand_activity_family,
    module_to_source,
    parse_module,
    register_family,
)
from .microworld import (
    InteractionRule,
    Microworld,
    RunResult,
    TimelineEvent,
    build_world,
    run,
)
from .registry import Registry, RegistryBuilder, validate_registry
from .relations import AggregateInstance, RelationStore, Triple
from .transitions import (
    AppliedTransition,
    BlockedTransition,
    ChainInstance,
    ChainSummary,
    apply_transitional,
    instantiate_chain,
    step_chain,
    thick_chain_summary,
)

__version__ = "0.1.0"

__all__ = [
    "ActivityFamily",
    "AggregateInstance",
    "AppliedTransition",
    "BlockedTransition",
    "CausalField",
    "ChainInstance",
    "ChainSummary",
    "Claim",
    "ClaimLedger",
    "CompileResult",
    "DEFAULT_FACETS",
    "Diagnostic",
    "EquivalenceResult",
    "Foundry",
    "InteractionRule",
    "InusVerdict",
    "KindTable",
    "Microworld",
    "OntologyModuleRecord",
    "Registry",
    "RegistryBuilder",
    "RelationStore",
    "RunResult",
    "Span",
    "StateSpace",
    "TimelineEvent",
    "Triple",
    "UPPER_TAXONOMY",
    "apply_transitional",
    "build_world",
    "check_equivalence",
    "check_inus",
    "compile_modules",
    "errors",
    "expand_activity_family",
    "format_diagnostics",
    "instantiate_chain",
    "module_to_source",
    "parse_module",
    "register_family",
    "run",
    "step_chain",
    "thick_chain_summary",
    "validate_registry",
]
