"""
Plan diversity toolkit: PDDL parsing, plan simulation and similarity metrics
"""

from plandiv.planning.errors import (
    AggregationError,
    GroundingError,
    InvalidPlanError,
    PDDLSyntaxError,
    PlanningError,
    SelectionError,
)
from plandiv.planning.ground_sim import causal_links, simulate, validate
from plandiv.planning.metrics import (
    MetricId,
    MetricSpec,
    MetricValue,
    aggregate,
    compute,
    delta_actions,
    delta_causal,
    delta_flex,
    delta_sgo,
    delta_states,
    delta_uniqueness,
    dissimilarity,
)
from plandiv.planning.pddl_core import (
    Plan,
    PlanningTask,
    load_plan_file,
    load_task,
    load_task_files,
    parse_domain,
    parse_plan,
    parse_problem,
)
from plandiv.planning.pop_extract import extract_pop
from plandiv.planning.selection import diversity_score, pairwise_matrix, select_diverse
from plandiv.planning.subgoal_trace import hamming, subgoal_trace
