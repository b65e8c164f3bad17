import json
import math

import numpy as np
import pytest
from scipy import stats

from todapolymer.verify import (
    SUITES,
    UnknownSuite,
    ks_critical_value,
    ks_one_sample,
    ks_two_sample,
    mean_interval,
    permutation_rejection_rate,
    run_suite,
    suite_defaults,
)

ALL_SUITES = {
    "dp-identity", "grsk-identities", "structural", "zero-temperature", "matsumoto-yor",
    "entrance-law", "moments-n2", "whittaker-engine", "bump-stade", "asymptotics",
    "critical-point", "gig-law", "hartman-watson", "gt-volume", "symmetric-corollary",
    "markov-functions", "free-energy", "intertwinings",
}


def test_critical_value():
    assert abs(ks_critical_value(0.01) - 1.6276) < 1e-4
    with pytest.raises(ValueError):
        ks_critical_value(1.5)


def test_two_sample_statistic_matches_scipy(np_rng):
    a, b = np_rng.normal(size=3000), np_rng.normal(0.1, 1, size=2500)
    res = ks_two_sample(a, b)
    assert abs(res.statistic - stats.ks_2samp(a, b).statistic) < 1e-15
    assert abs(res.threshold - 1.6276 * math.sqrt(5500 / (3000 * 2500))) < 1e-4


def test_one_sample_matches_scipy(np_rng):
    a = np_rng.normal(size=4000)
    res = ks_one_sample(a, stats.norm.cdf)
    assert abs(res.statistic - stats.kstest(a, "norm").statistic) < 1e-14
    assert res.passed


def test_ks_detects_shift(np_rng):
    assert not ks_two_sample(np_rng.normal(size=5000), np_rng.normal(0.2, 1, size=5000)).passed


def test_ks_minimum_sample_size(np_rng):
    with pytest.raises(ValueError):
        ks_two_sample(np_rng.normal(size=100), np_rng.normal(size=100))
    with pytest.raises(ValueError):
        ks_one_sample([np.nan] * 3000, stats.norm.cdf)


def test_permutation_oracle_rejection_rate(np_rng):
    # under the null, the asymptotic threshold rejects at about alpha or less
    rate = permutation_rejection_rate(2000, np_rng, trials=300, alpha=0.05)
    assert rate <= 0.05 + 3 * math.sqrt(0.05 * 0.95 / 300)


def test_mean_interval():
    m, h = mean_interval(np.arange(10.0))
    assert m == 4.5 and h > 0


def test_registry_complete():
    assert set(SUITES) == ALL_SUITES


def test_unknown_suite_and_option():
    with pytest.raises(UnknownSuite):
        run_suite("nope")
    with pytest.raises(ValueError):
        run_suite("critical-point", {"bogus": 1})


def test_report_schema_and_determinism():
    a = run_suite("grsk-identities")
    b = run_suite("grsk-identities")
    assert a.to_json(include_runtime=False) == b.to_json(include_runtime=False)
    d = json.loads(a.to_json())
    for key in ("suite", "passed", "checks", "seed", "config", "runtime_s", "passed_bonferroni"):
        assert key in d
    for c in d["checks"]:
        assert {"name", "statistic", "threshold", "passed"} <= set(c)


def test_seed_override_changes_statistics():
    a = run_suite("gt-volume", {"samples": 20000})
    b = run_suite("gt-volume", {"samples": 20000, "seed": 99})
    assert a.seed != b.seed
    assert a.checks[0]["statistic"] != b.checks[0]["statistic"]


def test_defaults_carry_seed():
    for name in SUITES:
        assert "seed" in suite_defaults(name)
