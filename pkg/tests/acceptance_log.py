"""Outcome registry for the acceptance suite; printed by the conftest summary hook."""
RESULTS = {}


def record(number, title, ok, detail=""):
    RESULTS[number] = (bool(ok), title, detail)
    print(f"criterion {number} {'PASS' if ok else 'FAIL'}  {title}: {detail}")
    return bool(ok)
