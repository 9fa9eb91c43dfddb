"""Collects one PASS/FAIL line per acceptance criterion."""

from contextlib import contextmanager

LINES: list[str] = []


@contextmanager
def criterion(number: int, title: str):
    try:
        yield
    except BaseException as exc:
        line = f"FAIL criterion {number}: {title} ({type(exc).__name__}: {str(exc).splitlines()[0] if str(exc) else ''})"
        LINES.append(line)
        print(line)
        raise
    line = f"PASS criterion {number}: {title}"
    LINES.append(line)
    print(line)
