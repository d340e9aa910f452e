"""Canonical pretty-printer. Printing a parsed module and re-parsing yields
a structurally equal AST; the canonical text also feeds module fingerprints.
"""

from __future__ import annotations

from . import ast


def _escape(value: str) -> str:
    out = value.replace("\\", "\\\\").replace('"', '\\"')
    out = out.replace("\n", "\\n").replace("\t", "\\t")
    return f'"{out}"'


def _term(term: ast.TermNode) -> str:
    if term.kind == "var":
        return f"?{term.value}"
    if term.kind == "string":
        return _escape(term.value)
    return term.value


def _pattern(pattern: ast.PatternNode) -> str:
    return f"{pattern.predicate}({_term(pattern.subject)}, {_term(pattern.object)})"


def _steps(steps, indent: int) -> list[str]:
    pad = "  " * indent
    lines = []
    for step in steps:
        if isinstance(step, ast.DoNode):
            suffix = " intervention" if step.intervention else ""
            lines.append(f"{pad}do {step.transitional}{suffix}")
        elif isinstance(step, ast.IfNode):
            lines.append(f"{pad}if {_pattern(step.condition)} {{")
            lines.extend(_steps(step.then_steps, indent + 1))
            if step.else_steps:
                lines.append(f"{pad}}} else {{")
                lines.extend(_steps(step.else_steps, indent + 1))
            lines.append(f"{pad}}}")
        elif isinstance(step, ast.WhileNode):
            lines.append(f"{pad}while {_pattern(step.condition)} {{")
            lines.extend(_steps(step.body, indent + 1))
            lines.append(f"{pad}}}")
    return lines


def module_to_source(module: ast.SourceModule) -> str:
    lines: list[str] = []
    if module.facet:
        lines.append(f"# facet: {module.facet}")
        lines.append("")
    for imp in module.imports:
        lines.append(f"import {imp.module}")
    if module.imports:
        lines.append("")

    for decl in module.decls:
        if isinstance(decl, ast.QualityNode):
            determinants = ", ".join(decl.determinants)
            lines.append(f"quality {decl.name} {{ {determinants} }}")
        elif isinstance(decl, ast.ObjectNode):
            head = f"object {decl.name}"
            if decl.parent:
                head += f" : {decl.parent}"
            if not decl.items:
                lines.append(head + " { }")
            else:
                lines.append(head + " {")
                for item in decl.items:
                    if isinstance(item, ast.QualitySlotNode):
                        required = " required" if item.required else ""
                        lines.append(
                            f"  quality {item.determinable}: {item.ontology}{required}"
                        )
                    elif isinstance(item, ast.PartNode):
                        linkage = f" {item.linkage}" if item.linkage else ""
                        lines.append(
                            f"  part {item.slot}: {item.schema} function "
                            f"{_escape(item.function)}{linkage}"
                        )
                    elif isinstance(item, ast.FunctionNode):
                        serves = f" serves {item.serves}" if item.serves else ""
                        lines.append(f"  function {item.name}{serves}")
                    elif isinstance(item, ast.RoleNode):
                        lines.append(f"  role {item.name}")
                lines.append("}")
        elif isinstance(decl, ast.AggregateNode):
            lines.append(f"aggregate {decl.name} {{")
            for member in decl.members:
                lines.append(f"  member {member.slot}: {member.schema}")
            for link in decl.links:
                lines.append(
                    f"  link {link.relation}({link.subject_slot}, {link.object_slot})"
                )
            lines.append("}")
        elif isinstance(decl, ast.RelationNode):
            suffix = " relational-quality" if decl.relational_quality else ""
            lines.append(
                f"relation {decl.name}({decl.subject_kind}, {decl.object_kind}){suffix}"
            )
        elif isinstance(decl, ast.TransitionalNode):
            lines.append(f"transitional {decl.name} on {decl.bearer} {{")
            for pattern in decl.requires:
                lines.append(f"  require {_pattern(pattern)}")
            for edit in decl.edits:
                lines.append(f"  {edit.op} {_pattern(edit.pattern)}")
            lines.append("}")
        elif isinstance(decl, ast.ChainNode):
            lines.append(f"chain {decl.kind} {decl.name} {{")
            lines.extend(_steps(decl.steps, 1))
            lines.append("}")
        elif isinstance(decl, ast.DispositionNode):
            lines.append(
                f"disposition {decl.name} on {decl.bearer} when "
                f"{_pattern(decl.trigger)} realize {decl.realization}"
            )
        elif isinstance(decl, ast.WorldNode):
            lines.append(f"world {decl.name} {{")
            for spawn in decl.spawns:
                parts = [f"  spawn {spawn.instance}: {spawn.schema}"]
                for assign in spawn.assignments:
                    parts.append(f"{assign.determinable} = {_term(assign.value)}")
                lines.append(" ".join(parts))
            for pattern in decl.asserts:
                lines.append(f"  assert {_pattern(pattern)}")
            lines.append("}")
        elif isinstance(decl, ast.ClaimNode):
            head = f"claim {decl.name} {_escape(decl.statement)}"
            for item in decl.evidence:
                head += f" evidence {item.ref} {_escape(item.note)}"
            lines.append(head)
        lines.append("")

    text = "\n".join(lines).rstrip("\n")
    return text + "\n" if text else ""
