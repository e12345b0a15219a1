"""Concatenated Friedkin-Johnsen opinion dynamics with vote-driven stubbornness."""

__version__ = "0.1.0"

from concatfj.errors import (
    ConcatFJError,
    DimensionMismatch,
    DomainViolation,
    NegativeWeight,
    NoConvergence,
    NotRowStochastic,
    PolicyError,
    SingularSystem,
    TooSmall,
)
from concatfj.network import (
    InfluenceGraph,
    complete_uniform,
    from_weights,
    is_strongly_connected,
    random_strongly_connected,
)
from concatfj.voting import (
    StubbornnessPolicy,
    distances,
    median_vote,
    update_stubbornness,
)
from concatfj.dynamics import (
    IssueRecord,
    IssueTrace,
    final_opinion_closed_form,
    final_opinion_iterative,
    issue_transfer_matrix,
    run_issue_sequence,
    within_issue_step,
)
from concatfj.analysis import (
    PolarizedState,
    ReducedState,
    check_polarized_condition,
    check_two_agent_condition,
    consensus_reached,
    lyapunov_value,
    max_distance,
    polarized_reduced_step,
    two_agent_reduced_step,
)
