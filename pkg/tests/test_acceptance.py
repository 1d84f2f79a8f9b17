"""Acceptance criteria, each run at its stated tolerance and runtime budget.

Every criterion prints one ``PASS`` or ``FAIL`` line; the lines are also
collected in the pytest terminal summary.  Run standalone with
``python tests/test_acceptance.py``.
"""
import pytest

from ksk.verify import CheckSpec, run_check

# number, check, runtime budget in seconds (None when none is stated)
CRITERIA = [
    (1, "kolmogorov_oracle", 60),
    (2, "scaling_exact", 300),
    (3, "theorem_envelope", 1200),
    (4, "gradient_log", None),
    (5, "chord_lemma", 120),
    (6, "moment_lemma", 300),
    (7, "large_jump_lemma", 900),
    (8, "decompose_lemma", 10),
    (9, "simulation_consistency", 600),
    (10, "conditional_moment", 1800),
    (11, "grube_d1", 60),
]

RESULTS = {}


def _fmt(v):
    return f"{v:.4g}" if isinstance(v, float) else str(v)


def evaluate(number, name, budget, seed=0):
    r = run_check(CheckSpec(name, seed=seed))
    in_time = budget is None or r.runtime_s < budget
    ok = r.passed and in_time
    bad = [c for c in r.criteria if not c["pass"]]
    parts = [f"{'PASS' if ok else 'FAIL'} criterion {number:2d} {name}",
             f"runtime {r.runtime_s:.1f}s" + ("" if budget is None else f" (budget {budget}s)")]
    if bad:
        parts.append("failed: " + "; ".join(f"{c['name']}={_fmt(c['value'])} vs {_fmt(c['threshold'])}"
                                            for c in bad))
    if r.failures:
        parts.append(f"{len(r.failures)} evaluation failures")
    line = ", ".join(parts)
    RESULTS[number] = line
    return ok, line, r


@pytest.mark.slow
@pytest.mark.parametrize("number, name, budget", CRITERIA, ids=[c[1] for c in CRITERIA])
def test_criterion(number, name, budget):
    ok, line, report = evaluate(number, name, budget)
    print(line)
    for c in report.criteria:
        print(f"    {'ok ' if c['pass'] else 'BAD'} {c['name']}: {_fmt(c['value'])} (threshold {_fmt(c['threshold'])})")
    assert ok, line


if __name__ == "__main__":
    for crit in CRITERIA:
        print(evaluate(*crit)[1], flush=True)
