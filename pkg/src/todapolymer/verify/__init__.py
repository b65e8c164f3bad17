"""Statistical tests and the named acceptance suites."""

from .stats import KsResult, ks_critical_value, ks_one_sample, ks_two_sample, mean_interval, permutation_rejection_rate
from .suites import SUITES, SuiteReport, UnknownSuite, run_suite, suite_defaults
