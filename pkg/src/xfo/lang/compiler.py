"""Compile parsed modules into a resolved Registry plus world definitions.

Cross-module references resolve through explicit imports; importing the same
module twice is deduplicated by content fingerprint. All registry errors
surface as positioned diagnostics anchored at the offending declaration.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .. import schemas
from ..diagnostics import (
    DANGLING_REFERENCE,
    DUPLICATE_MODULE,
    DUPLICATE_NAME,
    ERROR,
    INHERITANCE_CYCLE,
    INVALID_CHAIN,
    RECURSIVE_AGGREGATE,
    RECURSIVE_COMPOSITION,
    RESERVED_NAME,
    UNBOUND_VARIABLE,
    Diagnostic,
    Span,
    has_errors,
)
from ..errors import (
    DanglingReferenceError,
    DuplicateNameError,
    InheritanceCycleError,
    InvalidChainError,
    RecursiveAggregateError,
    RecursiveCompositionError,
    ReservedUpperTaxonomyNameError,
    UnboundVariableError,
)
from ..fingerprint import stable_fingerprint
from ..kinds import is_upper
from ..registry import BUILTIN_PREDICATES, Registry, RegistryBuilder, validate_registry
from . import ast
from .printer import module_to_source


@dataclass(frozen=True)
class ModuleInfo:
    """Per-module record feeding foundry registration."""

    name: str
    fingerprint: str
    terms: tuple[str, ...]
    facet: str


@dataclass
class CompileResult:
    registry: Registry | None
    worlds: dict[str, schemas.WorldDef] = field(default_factory=dict)
    claims: tuple[schemas.ClaimDef, ...] = ()
    modules: tuple[ModuleInfo, ...] = ()
    diagnostics: list[Diagnostic] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.registry is not None and not has_errors(self.diagnostics)

    def world(self, name: str) -> schemas.WorldDef | None:
        return self.worlds.get(name)


def module_fingerprint(module: ast.SourceModule) -> str:
    return stable_fingerprint(module_to_source(module))


def _file_of(module: ast.SourceModule) -> str:
    return f"{module.name}.xfo"


class _Lowering:
    """Lowers one module's declarations with its visible-name set."""

    def __init__(self, module: ast.SourceModule, visible: dict[str, str],
                 visible_determinables: frozenset[str],
                 diagnostics: list[Diagnostic]):
        self.module = module
        self.file = _file_of(module)
        self.visible = visible  # plain name -> owning module
        self.visible_determinables = visible_determinables
        self.diagnostics = diagnostics

    def error(self, code: str, message: str, span: Span) -> None:
        self.diagnostics.append(Diagnostic(ERROR, code, message, self.file, span))

    def resolve_ref(self, name: str, span: Span) -> str | None:
        """Resolve a possibly qualified reference to a plain registry name."""
        if "." in name:
            module_name, _, plain = name.rpartition(".")
            owner = self.visible.get(plain)
            if owner != module_name:
                self.error(
                    DANGLING_REFERENCE,
                    f"{name!r} does not resolve; is module {module_name!r} imported?",
                    span,
                )
                return None
            return plain
        if is_upper(name) or name in BUILTIN_PREDICATES or name in self.visible:
            return name
        self.error(
            DANGLING_REFERENCE,
            f"{name!r} is not declared in this module or its imports",
            span,
        )
        return None

    def resolve_predicate(self, name: str, span: Span) -> str | None:
        # Quality slot determinables are valid predicates without being
        # registry entries of their own.
        if "." not in name and name in self.visible_determinables:
            return name
        return self.resolve_ref(name, span)

    def term(self, node: ast.TermNode, *, bearer_scope: bool) -> schemas.Term:
        if node.kind == "var":
            return schemas.var(node.value)
        if node.kind == "string":
            return schemas.text(node.value)
        if bearer_scope and node.value == "bearer":
            return schemas.var("bearer")
        return schemas.const(node.value)

    def pattern(self, node: ast.PatternNode, *, bearer_scope: bool = False,
                ground: bool = False) -> schemas.Pattern | None:
        predicate = self.resolve_predicate(node.predicate, node.span)
        if predicate is None:
            return None
        subject = self.term(node.subject, bearer_scope=bearer_scope)
        obj = self.term(node.object, bearer_scope=bearer_scope)
        if ground:
            for term in (subject, obj):
                if term.kind == schemas.VAR:
                    self.error(
                        UNBOUND_VARIABLE,
                        f"world assertions must be ground; ?{term.value} is not bound",
                        node.span,
                    )
                    return None
        return schemas.Pattern(predicate, subject, obj)

    def steps(self, nodes) -> tuple:
        out = []
        for node in nodes:
            if isinstance(node, ast.DoNode):
                transitional = self.resolve_ref(node.transitional, node.span)
                if transitional is not None:
                    out.append(schemas.DoStep(transitional, node.intervention))
            elif isinstance(node, ast.IfNode):
                condition = self.pattern(node.condition)
                if condition is not None:
                    out.append(
                        schemas.IfStep(
                            condition,
                            self.steps(node.then_steps),
                            self.steps(node.else_steps),
                        )
                    )
            elif isinstance(node, ast.WhileNode):
                condition = self.pattern(node.condition)
                if condition is not None:
                    out.append(schemas.WhileStep(condition, self.steps(node.body)))
        return tuple(out)


def compile_modules(modules: list[ast.SourceModule]) -> CompileResult:
    """Register, resolve, and validate a set of parsed modules.

    Returns a CompileResult; ``registry`` is None when any error diagnostic
    was produced. Deterministic: identical sources yield identical registry
    fingerprints.
    """
    diagnostics: list[Diagnostic] = []

    # Deduplicate by content: the same module supplied or imported twice
    # registers once; same name with different content is an error.
    unique: list[ast.SourceModule] = []
    by_name: dict[str, str] = {}
    for module in modules:
        fingerprint = module_fingerprint(module)
        known = by_name.get(module.name)
        if known == fingerprint:
            continue
        if known is not None:
            diagnostics.append(
                Diagnostic(
                    ERROR,
                    DUPLICATE_MODULE,
                    f"module {module.name!r} appears twice with different content",
                    _file_of(module),
                    module.span,
                )
            )
            continue
        by_name[module.name] = fingerprint
        unique.append(module)

    declared: dict[str, tuple[str, ...]] = {
        module.name: module.declared_names() for module in unique
    }

    determinables: dict[str, tuple[str, ...]] = {
        module.name: module.determinable_names() for module in unique
    }

    # Import check + per-module visible names (own + imported declarations).
    visibility: dict[str, dict[str, str]] = {}
    visible_dets: dict[str, frozenset[str]] = {}
    for module in unique:
        visible: dict[str, str] = {}
        dets: set[str] = set(determinables[module.name])
        for name in declared[module.name]:
            visible[name] = module.name
        for imp in module.imports:
            if imp.module not in declared:
                diagnostics.append(
                    Diagnostic(
                        ERROR,
                        DANGLING_REFERENCE,
                        f"imported module {imp.module!r} is not among the compiled modules",
                        _file_of(module),
                        imp.span,
                    )
                )
                continue
            for name in declared[imp.module]:
                visible.setdefault(name, imp.module)
            dets.update(determinables[imp.module])
        visibility[module.name] = visible
        visible_dets[module.name] = frozenset(dets)

    builder = RegistryBuilder()
    spans: dict[str, tuple[str, Span]] = {}  # schema name -> (file, span)
    worlds: dict[str, schemas.WorldDef] = {}
    claims: list[schemas.ClaimDef] = []
    infos: list[ModuleInfo] = []

    def register(schema, file: str, span: Span) -> None:
        try:
            builder.register(schema)
            spans[schema.name] = (file, span)
        except ReservedUpperTaxonomyNameError as exc:
            diagnostics.append(Diagnostic(ERROR, RESERVED_NAME, str(exc), file, span))
        except DuplicateNameError as exc:
            diagnostics.append(Diagnostic(ERROR, DUPLICATE_NAME, str(exc), file, span))

    for module in unique:
        lowering = _Lowering(
            module, visibility[module.name], visible_dets[module.name], diagnostics
        )
        file = _file_of(module)
        for decl in module.decls:
            if isinstance(decl, ast.QualityNode):
                register(
                    schemas.QualityOntology(decl.name, decl.determinants), file, decl.span
                )
            elif isinstance(decl, ast.ObjectNode):
                _lower_object(decl, lowering, register, file)
            elif isinstance(decl, ast.AggregateNode):
                members = tuple(
                    schemas.AggregateMember(m.slot, lowering.resolve_ref(m.schema, m.span) or m.schema)
                    for m in decl.members
                )
                links = tuple(
                    schemas.AggregateLink(
                        lowering.resolve_ref(l.relation, l.span) or l.relation,
                        l.subject_slot,
                        l.object_slot,
                    )
                    for l in decl.links
                )
                register(schemas.AggregateSchema(decl.name, members, links), file, decl.span)
            elif isinstance(decl, ast.RelationNode):
                subject = lowering.resolve_ref(decl.subject_kind, decl.span)
                obj = lowering.resolve_ref(decl.object_kind, decl.span)
                register(
                    schemas.RelationSchema(
                        decl.name,
                        subject or decl.subject_kind,
                        obj or decl.object_kind,
                        decl.relational_quality,
                    ),
                    file,
                    decl.span,
                )
            elif isinstance(decl, ast.TransitionalNode):
                bearer = lowering.resolve_ref(decl.bearer, decl.span)
                guards = []
                for node in decl.requires:
                    pattern = lowering.pattern(node, bearer_scope=True)
                    if pattern is not None:
                        guards.append(pattern)
                edits = []
                for node in decl.edits:
                    pattern = lowering.pattern(node.pattern, bearer_scope=True)
                    if pattern is not None:
                        edits.append(schemas.Edit(node.op, pattern))
                register(
                    schemas.TransitionalSchema(
                        decl.name, bearer, tuple(guards), tuple(edits)
                    ),
                    file,
                    decl.span,
                )
            elif isinstance(decl, ast.ChainNode):
                register(
                    schemas.ChainSchema(decl.name, decl.kind, lowering.steps(decl.steps)),
                    file,
                    decl.span,
                )
            elif isinstance(decl, ast.DispositionNode):
                bearer = lowering.resolve_ref(decl.bearer, decl.span)
                realization = lowering.resolve_ref(decl.realization, decl.span)
                trigger = lowering.pattern(decl.trigger, bearer_scope=True)
                register(
                    schemas.RealizableSchema(
                        decl.name,
                        schemas.DISPOSITION,
                        bearer_kind=bearer,
                        trigger=trigger,
                        realization=realization,
                    ),
                    file,
                    decl.span,
                )
            elif isinstance(decl, ast.WorldNode):
                world = _lower_world(decl, lowering)
                if decl.name in worlds:
                    diagnostics.append(
                        Diagnostic(
                            ERROR,
                            DUPLICATE_NAME,
                            f"world {decl.name!r} is already defined",
                            file,
                            decl.span,
                        )
                    )
                else:
                    worlds[decl.name] = world
            elif isinstance(decl, ast.ClaimNode):
                if any(c.name == decl.name for c in claims):
                    diagnostics.append(
                        Diagnostic(
                            ERROR,
                            DUPLICATE_NAME,
                            f"claim {decl.name!r} is already defined",
                            file,
                            decl.span,
                        )
                    )
                else:
                    claims.append(
                        schemas.ClaimDef(
                            decl.name,
                            decl.statement,
                            tuple(
                                schemas.EvidenceDef(e.ref, e.note) for e in decl.evidence
                            ),
                        )
                    )
        infos.append(
            ModuleInfo(
                name=module.name,
                fingerprint=by_name[module.name],
                terms=declared[module.name],
                facet=module.facet or "physical",
            )
        )

    if has_errors(diagnostics):
        return CompileResult(None, worlds, tuple(claims), tuple(infos), diagnostics)

    def anchored(code: str, message: str, owner: str | None) -> Diagnostic:
        file, span = spans.get(owner, ("<registry>", None)) if owner else ("<registry>", None)
        return Diagnostic(ERROR, code, message, file, span)

    try:
        registry = builder.resolve()
    except DanglingReferenceError as exc:
        for owner, ref in exc.references:
            diagnostics.append(anchored(DANGLING_REFERENCE, f"{owner}: {ref} not found", owner))
        return CompileResult(None, worlds, tuple(claims), tuple(infos), diagnostics)
    except InheritanceCycleError as exc:
        diagnostics.append(anchored(INHERITANCE_CYCLE, str(exc), None))
        return CompileResult(None, worlds, tuple(claims), tuple(infos), diagnostics)
    except UnboundVariableError as exc:
        diagnostics.append(anchored(UNBOUND_VARIABLE, str(exc), None))
        return CompileResult(None, worlds, tuple(claims), tuple(infos), diagnostics)
    except RecursiveAggregateError as exc:
        diagnostics.append(anchored(RECURSIVE_AGGREGATE, str(exc), None))
        return CompileResult(None, worlds, tuple(claims), tuple(infos), diagnostics)
    except RecursiveCompositionError as exc:
        diagnostics.append(anchored(RECURSIVE_COMPOSITION, str(exc), None))
        return CompileResult(None, worlds, tuple(claims), tuple(infos), diagnostics)
    except InvalidChainError as exc:
        diagnostics.append(anchored(INVALID_CHAIN, str(exc), None))
        return CompileResult(None, worlds, tuple(claims), tuple(infos), diagnostics)

    for item in validate_registry(registry):
        owner = _owner_of(item.message)
        file, span = spans.get(owner, ("<registry>", None))
        diagnostics.append(Diagnostic(item.severity, item.code, item.message, file, span))

    if has_errors(diagnostics):
        return CompileResult(None, worlds, tuple(claims), tuple(infos), diagnostics)
    return CompileResult(registry, worlds, tuple(claims), tuple(infos), diagnostics)


def _owner_of(message: str) -> str:
    # Validator messages quote the owning schema name first.
    start = message.find("'")
    if start == -1:
        return ""
    end = message.find("'", start + 1)
    return message[start + 1 : end] if end != -1 else ""


def _lower_object(decl: ast.ObjectNode, lowering: _Lowering, register, file: str) -> None:
    qualities = []
    parts = []
    realizables = []
    for item in decl.items:
        if isinstance(item, ast.QualitySlotNode):
            ontology = lowering.resolve_ref(item.ontology, item.span)
            qualities.append(
                schemas.QualitySlot(item.determinable, ontology or item.ontology, item.required)
            )
        elif isinstance(item, ast.PartNode):
            schema = lowering.resolve_ref(item.schema, item.span)
            linkage = (
                schemas.CONTAINMENT if item.linkage == "contained" else schemas.COMPOSITION
            )
            parts.append(
                schemas.PartSlot(item.slot, schema or item.schema, item.function, linkage)
            )
        elif isinstance(item, ast.FunctionNode):
            register(
                schemas.RealizableSchema(
                    item.name,
                    schemas.FUNCTION,
                    bearer_kind=decl.name,
                    serves=item.serves,
                ),
                file,
                item.span,
            )
            realizables.append(item.name)
        elif isinstance(item, ast.RoleNode):
            register(
                schemas.RealizableSchema(item.name, schemas.ROLE, bearer_kind=decl.name),
                file,
                item.span,
            )
            realizables.append(item.name)
    parent = None
    if decl.parent is not None:
        parent = lowering.resolve_ref(decl.parent, decl.span)
    register(
        schemas.ThickObjectSchema(
            decl.name,
            parent=parent,
            qualities=tuple(qualities),
            parts=tuple(parts),
            realizables=tuple(realizables),
        ),
        file,
        decl.span,
    )


def _lower_world(decl: ast.WorldNode, lowering: _Lowering) -> schemas.WorldDef:
    spawns = []
    for node in decl.spawns:
        schema = lowering.resolve_ref(node.schema, node.span)
        assignments = tuple(
            (assign.determinable, assign.value.value) for assign in node.assignments
        )
        spawns.append(schemas.SpawnDef(node.instance, schema or node.schema, assignments))
    asserts = []
    for node in decl.asserts:
        pattern = lowering.pattern(node, ground=True)
        if pattern is not None:
            asserts.append(pattern)
    return schemas.WorldDef(decl.name, tuple(spawns), tuple(asserts))
