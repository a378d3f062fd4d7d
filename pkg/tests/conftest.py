from __future__ import annotations

import pytest
from hypothesis import settings

from ccs.consensus import AugmentedDetections
from ccs.geometry import BBox, Detection

settings.register_profile("default", max_examples=120, deadline=None)
settings.load_profile("default")

# Boxes reproducing the three-augmentation worked example: views 1 and 2
# hold two boxes each, view 3 holds one.
FIG2_VIEWS = [
    [(0, 0, 4, 4), (10, 0, 12, 2)],
    [(1, 1, 4, 4), (10, 0, 12, 1)],
    [(0.5, 1.5, 5, 4)],
]


def det(x1, y1, x2, y2, score=0.9, cls=0) -> Detection:
    return Detection(BBox(x1, y1, x2, y2), cls, score)


def views_to_augmented(views, image_id="img", baseline=None) -> AugmentedDetections:
    return AugmentedDetections(
        image_id,
        tuple(tuple(det(*b) for b in v) for v in views),
        None if baseline is None else tuple(det(*b) for b in baseline),
    )


@pytest.fixture
def fig2() -> AugmentedDetections:
    return views_to_augmented(FIG2_VIEWS)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance_log():
    def record(criterion: str, passed: bool, detail: str) -> None:
        ACCEPTANCE_LINES.append(f"[{'PASS' if passed else 'FAIL'}] {criterion}: {detail}")

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
