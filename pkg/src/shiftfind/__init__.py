"""Shift finding with query access, and the streaming counters it is measured against."""

from .canonical import (
    CanonicalFunction,
    InstanceParams,
    generate,
    load_instance,
    save_instance,
    threshold_t,
)
from .errors import BudgetExceeded, DomainError, IntegrityError
from .oracle import BitOracle, make_oracle, with_budget
from .solvers import (
    SolveReport,
    binary_search_pattern,
    brute_force_find_shift,
    candidates_from_location,
    find_shift_deterministic,
    find_shift_hybrid,
    find_shift_random_elimination,
    solve,
    verify_shift,
)

__version__ = "0.1.0"
