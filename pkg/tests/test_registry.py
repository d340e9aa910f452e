import pytest

from xfo import RegistryBuilder, validate_registry
from xfo.errors import (
    DanglingReferenceError,
    DuplicateNameError,
    InheritanceCycleError,
    InvalidChainError,
    RecursiveAggregateError,
    RecursiveCompositionError,
    ReservedUpperTaxonomyNameError,
    UnboundVariableError,
)
from xfo.schemas import (
    AggregateMember,
    AggregateSchema,
    ChainSchema,
    DoStep,
    Edit,
    IfStep,
    Pattern,
    PartSlot,
    ProcessSchema,
    QualityOntology,
    QualitySlot,
    RealizableSchema,
    ThickObjectSchema,
    TransitionalSchema,
    WhileStep,
    const,
    var,
)


def light_schema():
    return ThickObjectSchema(
        "TrafficLight", qualities=(QualitySlot("color", "color", required=True),)
    )


def test_register_traffic_light():
    builder = RegistryBuilder()
    builder.register(light_schema())
    assert len(builder) == 1
    assert "TrafficLight" in builder


def test_duplicate_name_rejected():
    builder = RegistryBuilder()
    builder.register(light_schema())
    with pytest.raises(DuplicateNameError):
        builder.register(light_schema())


def test_reserved_upper_name_rejected():
    builder = RegistryBuilder()
    with pytest.raises(ReservedUpperTaxonomyNameError):
        builder.register(ThickObjectSchema("Object"))


def dropper_builder():
    builder = RegistryBuilder()
    builder.register(QualityOntology("moisture", ("wet", "fired")))
    builder.register(QualityOntology("glaze", ("green", "clear")))
    builder.register(
        ThickObjectSchema(
            "WaterDropper", qualities=(QualitySlot("moisture", "moisture", required=True),)
        )
    )
    builder.register(
        ThickObjectSchema(
            "CeladonDropper",
            parent="WaterDropper",
            qualities=(QualitySlot("glaze", "glaze"),),
        )
    )
    return builder


def test_resolve_flattens_child_over_parent():
    registry = dropper_builder().resolve()
    child = registry.object_schema("CeladonDropper")
    # Hand-flattened expectation: parent slots first, child additions after.
    assert child.qualities == (
        QualitySlot("moisture", "moisture", required=True),
        QualitySlot("glaze", "glaze", required=False),
    )
    assert child.parent == "WaterDropper"


def test_child_override_appears_exactly_once():
    builder = RegistryBuilder()
    builder.register(QualityOntology("moisture", ("wet", "fired")))
    builder.register(
        ThickObjectSchema(
            "WaterDropper", qualities=(QualitySlot("moisture", "moisture", required=True),)
        )
    )
    builder.register(
        ThickObjectSchema(
            "CeladonDropper",
            parent="WaterDropper",
            qualities=(QualitySlot("moisture", "moisture", required=False),),
        )
    )
    child = builder.resolve().object_schema("CeladonDropper")
    slots = [s for s in child.qualities if s.determinable == "moisture"]
    assert slots == [QualitySlot("moisture", "moisture", required=False)]


def test_dangling_reference_reported():
    builder = RegistryBuilder()
    builder.register(
        ThickObjectSchema("Ghost", qualities=(QualitySlot("color", "nocolors"),))
    )
    with pytest.raises(DanglingReferenceError) as excinfo:
        builder.resolve()
    assert any("nocolors" in ref for _, ref in excinfo.value.references)


def test_all_dangling_references_collected():
    builder = RegistryBuilder()
    builder.register(
        ThickObjectSchema(
            "Ghost",
            parent="Missing",
            qualities=(QualitySlot("color", "nocolors"),),
            parts=(PartSlot("lid", "NoSchema", "covers"),),
        )
    )
    with pytest.raises(DanglingReferenceError) as excinfo:
        builder.resolve()
    assert len(excinfo.value.references) == 3


def test_inheritance_cycle_detected():
    builder = RegistryBuilder()
    builder.register(ThickObjectSchema("A", parent="B"))
    builder.register(ThickObjectSchema("B", parent="A"))
    with pytest.raises(InheritanceCycleError):
        builder.resolve()


def test_fingerprint_deterministic_and_registration_order_free():
    a = dropper_builder().resolve()
    b = dropper_builder().resolve()
    assert a.fingerprint == b.fingerprint

    shuffled = RegistryBuilder()
    shuffled.register(
        ThickObjectSchema(
            "CeladonDropper", parent="WaterDropper", qualities=(QualitySlot("glaze", "glaze"),)
        )
    )
    shuffled.register(QualityOntology("glaze", ("green", "clear")))
    shuffled.register(
        ThickObjectSchema(
            "WaterDropper", qualities=(QualitySlot("moisture", "moisture", required=True),)
        )
    )
    shuffled.register(QualityOntology("moisture", ("wet", "fired")))
    assert shuffled.resolve().fingerprint == a.fingerprint


def test_fingerprint_pinned_across_platforms():
    # Frozen value, recomputed independently as the first 16 hex chars of
    # sha256 over the canonical sorted-key JSON of this one-schema registry.
    # Catches accidental canonicalization drift between runs and platforms.
    builder = RegistryBuilder()
    builder.register(QualityOntology("color", ("green", "yellow", "red")))
    assert builder.resolve().fingerprint == "4f61d07ac14343fd"


def test_fingerprint_differs_for_different_content():
    a = dropper_builder().resolve()
    builder = dropper_builder()
    builder.register(QualityOntology("extra", ("x",)))
    assert builder.resolve().fingerprint != a.fingerprint


def test_flattening_idempotent():
    first = dropper_builder().resolve()
    rebuilt = RegistryBuilder()
    for schema in first.schemas.values():
        rebuilt.register(schema)
    second = rebuilt.resolve()
    assert second.fingerprint == first.fingerprint
    assert second.object_schema("CeladonDropper") == first.object_schema("CeladonDropper")


def test_unbound_edit_variable_rejected():
    builder = RegistryBuilder()
    builder.register(QualityOntology("color", ("red", "green")))
    builder.register(
        ThickObjectSchema("Light", qualities=(QualitySlot("color", "color"),))
    )
    builder.register(
        TransitionalSchema(
            "leak",
            "Light",
            guards=(),
            edits=(Edit("create", Pattern("color", var("someone"), const("red"))),),
        )
    )
    with pytest.raises(UnboundVariableError):
        builder.resolve()


def test_sequence_admits_no_control_flow():
    builder = RegistryBuilder()
    builder.register(QualityOntology("color", ("red", "green")))
    builder.register(ThickObjectSchema("Light", qualities=(QualitySlot("color", "color"),)))
    builder.register(
        TransitionalSchema(
            "go", "Light",
            guards=(Pattern("color", var("bearer"), const("red")),),
            edits=(
                Edit("delete", Pattern("color", var("bearer"), const("red"))),
                Edit("create", Pattern("color", var("bearer"), const("green"))),
            ),
        )
    )
    builder.register(
        ChainSchema(
            "bad",
            "sequence",
            steps=(WhileStep(Pattern("color", var("x"), const("red")), (DoStep("go"),)),),
        )
    )
    with pytest.raises(InvalidChainError):
        builder.resolve()


def test_recursive_aggregate_rejected():
    builder = RegistryBuilder()
    builder.register(
        AggregateSchema("Family", members=(AggregateMember("kin", "Family"),))
    )
    with pytest.raises(RecursiveAggregateError):
        builder.resolve()


def test_recursive_composition_rejected():
    builder = RegistryBuilder()
    builder.register(
        ThickObjectSchema("Box", parts=(PartSlot("inner", "Box", "holds itself"),))
    )
    with pytest.raises(RecursiveCompositionError):
        builder.resolve()


def test_role_context_must_name_registered_aggregate():
    builder = RegistryBuilder()
    builder.register(ThickObjectSchema("Person"))
    builder.register(
        RealizableSchema(
            "conductor", "Role", bearer_kind="Person", context="Orchestra"
        )
    )
    with pytest.raises(DanglingReferenceError):
        builder.resolve()

    with_aggregate = RegistryBuilder()
    with_aggregate.register(ThickObjectSchema("Person"))
    with_aggregate.register(
        AggregateSchema("Orchestra", members=(AggregateMember("lead", "Person"),))
    )
    with_aggregate.register(
        RealizableSchema(
            "conductor", "Role", bearer_kind="Person", context="Orchestra"
        )
    )
    registry = with_aggregate.resolve()
    assert registry.realizable("conductor").context == "Orchestra"


def test_needs_autoregistered_from_serves():
    builder = RegistryBuilder()
    builder.register(ThickObjectSchema("Pencil"))
    builder.register(
        RealizableSchema(
            "write", "Function", bearer_kind="Pencil", serves="communication"
        )
    )
    registry = builder.resolve()
    assert registry.need("communication") is not None


# --- validate_registry -------------------------------------------------------


def test_validator_flags_unbound_transitional():
    builder = RegistryBuilder()
    builder.register(TransitionalSchema("orphan", None))
    diagnostics = validate_registry(builder.resolve())
    assert [d.code for d in diagnostics] == ["UnboundOccurrent"]


def test_validator_flags_non_continuant_bearer():
    builder = RegistryBuilder()
    builder.register(TransitionalSchema("ghostly", "Quality"))
    diagnostics = validate_registry(builder.resolve())
    assert [d.code for d in diagnostics] == ["UnboundOccurrent"]


def test_validator_flags_process_without_continuant():
    builder = RegistryBuilder()
    builder.register(ProcessSchema("drift", participants=("Process",)))
    diagnostics = validate_registry(builder.resolve())
    assert [d.code for d in diagnostics] == ["UnboundOccurrent"]


def test_validator_flags_part_without_function():
    builder = RegistryBuilder()
    builder.register(ThickObjectSchema("Gear"))
    builder.register(
        ThickObjectSchema("Engine", parts=(PartSlot("crankshaft", "Gear", "   "),))
    )
    diagnostics = validate_registry(builder.resolve())
    assert [d.code for d in diagnostics] == ["PartWithoutFunction"]


def test_validator_flags_incomplete_disposition():
    builder = RegistryBuilder()
    builder.register(ThickObjectSchema("Glass"))
    builder.register(RealizableSchema("fragility", "Disposition", bearer_kind="Glass"))
    diagnostics = validate_registry(builder.resolve())
    assert [d.code for d in diagnostics] == ["DispositionIncomplete"]


def test_validator_clean_on_corpus(registry):
    assert validate_registry(registry) == []
