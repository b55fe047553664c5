import pytest

from toy import BEHAVIOR_LOGITS, TARGET_LOGITS, sample_episodes, two_state_mdp


@pytest.fixture(scope="session")
def on_policy_episodes():
    """1e5 episodes of the target policy on the two-state toy."""
    return sample_episodes(two_state_mdp(), TARGET_LOGITS, 100_000, seed=21)


@pytest.fixture(scope="session")
def behavior_episodes():
    """2e5 episodes of the behavior policy on the two-state toy."""
    return sample_episodes(two_state_mdp(), BEHAVIOR_LOGITS, 200_000, seed=22)


def pytest_terminal_summary(terminalreporter):
    import re

    from verdicts import RESULTS, TITLES

    ran = set()
    for key in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(key, []):
            match = re.search(r"test_criterion_(\d+)", getattr(rep, "nodeid", ""))
            if match:
                ran.add(int(match.group(1)))
    if not ran:
        return
    terminalreporter.section("acceptance")
    for n in sorted(ran):
        # a criterion whose test raised before reaching its verdict is a failure too
        terminalreporter.write_line(RESULTS.get(n, f"criterion {n:2d} FAIL  {TITLES[n]}  [no verdict reached]"))
