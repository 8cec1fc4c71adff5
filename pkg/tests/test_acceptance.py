"""Acceptance suite: one PASS/FAIL line per criterion at full size.

Run with ``pytest -v tests/test_acceptance.py`` (lines are printed even
without -s) or directly with ``python tests/test_acceptance.py``.
"""

import time

import pytest

from dehnlab.experiments import ExperimentManifest, run_suite

# criterion -> (title, suites, runtime limit in seconds or None)
CRITERIA = {
    1: ("exactness of macro moves and expansions", ["exactness"], 120),
    2: ("shortcut lengths", ["shortcuts"], None),
    3: ("mesh constants", ["mesh"], 300),
    4: ("reduction round trip and p=2 Gauss oracle", ["reduction"], None),
    5: ("flag window", ["flag-window"], None),
    6: ("parabolic witness", ["witness"], None),
    7: ("cost-model conformance", ["costs"], 600),
    8: ("oracle floor", ["oracle"], None),
    9: ("end to end", ["end-to-end"], None),
}


def evaluate_criterion(n: int, seed: int = 0):
    """(passed, line) for one criterion, running its suites at full size."""
    title, suites, limit = CRITERIA[n]
    t0 = time.time()
    checks, extra = [], []
    for name in suites:
        res = run_suite(ExperimentManifest(name, seed=seed, options={"render": False}))
        checks += res.checks
        if name == "end-to-end":
            extra.append(f"fallback fraction {res.summary['fallback_fraction']:.3f}")
    elapsed = time.time() - t0
    passed = all(c.passed for c in checks)
    if limit is not None:
        in_time = elapsed < limit
        passed = passed and in_time
        extra.append(f"runtime {elapsed:.1f} s vs {limit} s")
    else:
        extra.append(f"runtime {elapsed:.1f} s")
    parts = [f"{'ok' if c.passed else 'FAILED'} {c.name} ({c.detail})" for c in checks]
    line = f"{'PASS' if passed else 'FAIL'}  criterion {n} {title}: " + "; ".join(parts + extra)
    return passed, line


@pytest.mark.parametrize("n", sorted(CRITERIA))
def test_criterion(n, capsys):
    passed, line = evaluate_criterion(n)
    with capsys.disabled():
        print("\n" + line)
    assert passed, line


if __name__ == "__main__":
    import sys
    results = [evaluate_criterion(n) for n in sorted(CRITERIA)]
    for _, line in results:
        print(line)
    sys.exit(0 if all(ok for ok, _ in results) else 1)
