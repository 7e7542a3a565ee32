import pytest

from fuseplan.model_ir import LayerSpec, NetworkModel, TensorShape

_notes: list[str] = []


@pytest.fixture
def note():
    """Record a line for the end-of-run summary (gap statistics etc.)."""

    def _note(line: str) -> None:
        _notes.append(line)

    return _note


def pytest_terminal_summary(terminalreporter):
    if _notes:
        terminalreporter.section("recorded measurements")
        for line in _notes:
            terminalreporter.write_line(line)


def conv(c_in, c_out, k=3, s=1, p=0):
    return LayerSpec("conv2d", c_in=c_in, c_out=c_out, k=k, s=s, p=p)


@pytest.fixture
def toy3():
    """Three k=3 convolutions, single channel, 10x10 input."""
    layer = conv(1, 1)
    return NetworkModel("toy3", TensorShape(10, 10, 1), (layer, layer, layer))


@pytest.fixture
def toy2():
    """Two k=3 convolutions, single channel, 6x6 input."""
    layer = conv(1, 1)
    return NetworkModel("toy2", TensorShape(6, 6, 1), (layer, layer))
