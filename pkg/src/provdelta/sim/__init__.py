"""Workflow simulation: specs, execution, evolution and a brute-force oracle."""

from .evolution import (
    Element,
    EvolutionOp,
    ExecutionContext,
    ExternalDeps,
    ScenarioClass,
    apply_all,
    apply_evolution,
    bump_engine,
    bump_version,
    change_input,
    changed_elements,
    classify_changes,
    classify_scenario,
    delete_service,
    execute_workflow,
    insert_service,
    mutate_external_state,
    replace_service,
)
from .generate import random_op, random_workflow
from .oracle import OracleLimitError, brute_force_delta
from .scenario import Scenario, load_scenario, scenario_from_dict, scenario_to_dict
from .workflow import (
    BehaviorKind,
    Edge,
    Endpoint,
    Execution,
    SpecError,
    TaskBehavior,
    TaskSpec,
    WorkflowSpec,
    execute,
    workflow_from_dict,
    workflow_to_dict,
)

__all__ = [
    "BehaviorKind",
    "Edge",
    "Element",
    "Endpoint",
    "EvolutionOp",
    "Execution",
    "ExecutionContext",
    "ExternalDeps",
    "OracleLimitError",
    "Scenario",
    "ScenarioClass",
    "SpecError",
    "TaskBehavior",
    "TaskSpec",
    "WorkflowSpec",
    "apply_all",
    "apply_evolution",
    "brute_force_delta",
    "bump_engine",
    "bump_version",
    "change_input",
    "changed_elements",
    "classify_changes",
    "classify_scenario",
    "delete_service",
    "execute",
    "execute_workflow",
    "insert_service",
    "load_scenario",
    "mutate_external_state",
    "random_op",
    "random_workflow",
    "replace_service",
    "scenario_from_dict",
    "scenario_to_dict",
    "workflow_from_dict",
    "workflow_to_dict",
]
