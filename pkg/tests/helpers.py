"""Shared test plumbing: compile inline sources, build scratch worlds."""

from xfo import build_world, compile_modules, format_diagnostics, parse_module


def parse_ok(text, name="scratch"):
    module, diagnostics = parse_module(text, name=name)
    assert not diagnostics, format_diagnostics(diagnostics)
    return module


def compile_sources(sources: dict[str, str]):
    modules = []
    parse_diagnostics = []
    for name, text in sources.items():
        module, diagnostics = parse_module(text, name=name)
        parse_diagnostics.extend(diagnostics)
        modules.append(module)
    result = compile_modules(modules)
    result.diagnostics = parse_diagnostics + result.diagnostics
    return result


def compile_ok(sources: dict[str, str]):
    result = compile_sources(sources)
    assert result.ok, format_diagnostics(result.diagnostics)
    return result


def world_from(corpus_result, world_name, seed=None):
    world_def = corpus_result.world(world_name)
    assert world_def is not None, f"no world {world_name!r}"
    return build_world(corpus_result.registry, world_def, seed=seed)
