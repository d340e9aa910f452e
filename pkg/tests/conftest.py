from pathlib import Path

import pytest

from xfo import compile_modules, parse_module

MODELS_DIR = Path(__file__).resolve().parents[1] / "models"
GOLDEN_DIR = Path(__file__).resolve().parent / "golden"

CORPUS_FILES = (
    "calligraphy.xfo",
    "clock-orchestra.xfo",
    "trafficlight.xfo",
    "village-gangjin.xfo",
    "waterdropper-goryeo.xfo",
    "windshield.xfo",
)


def load_corpus_modules():
    modules = []
    for filename in CORPUS_FILES:
        path = MODELS_DIR / filename
        module, diagnostics = parse_module(path.read_text(), name=path.stem, file=path.name)
        assert not diagnostics, f"{filename}: {diagnostics}"
        modules.append(module)
    return modules


@pytest.fixture(scope="session")
def corpus_modules():
    return load_corpus_modules()


@pytest.fixture(scope="session")
def corpus(corpus_modules):
    result = compile_modules(corpus_modules)
    assert result.ok, result.diagnostics
    return result


@pytest.fixture(scope="session")
def registry(corpus):
    return corpus.registry
