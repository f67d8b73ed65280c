"""Bundled benchmark circuits for regression tests and demos."""

from importlib import resources


def list_benchmarks() -> list[str]:
    root = resources.files(__name__)
    return sorted(p.name[: -len(".qasm")] for p in root.iterdir() if p.name.endswith(".qasm"))


def benchmark_source(name: str) -> str:
    return (resources.files(__name__) / f"{name}.qasm").read_text()
