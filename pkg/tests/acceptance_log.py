"""Collects acceptance-criterion outcomes for the end-of-run summary."""

LINES: list[str] = []


def announce(name: str, passed: bool = True) -> None:
    LINES.append(f"ACCEPTANCE {name}: {'PASS' if passed else 'FAIL'}")
