"""Scenario files: a base workflow plus a list of evolution ops."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Optional

from .evolution import EvolutionOp, ExecutionContext, apply_all, classify_scenario
from .workflow import Execution, SpecError, workflow_from_dict, workflow_to_dict


@dataclass(frozen=True)
class Scenario:
    base: ExecutionContext
    ops: tuple[EvolutionOp, ...]

    def evolved(self) -> ExecutionContext:
        return apply_all(self.base, self.ops)

    def run(self) -> tuple[Execution, Execution]:
        """Execute the base and the evolved context."""
        return self.base.run("run-A"), self.evolved().run("run-B")

    def classify(self):
        return classify_scenario(self.base, self.evolved())


def scenario_from_dict(doc: Mapping) -> Scenario:
    if not isinstance(doc, Mapping):
        raise SpecError("scenario must be a JSON object")
    try:
        seed = int(doc.get("seed", 0))
        workflow = workflow_from_dict(doc["baseWorkflow"])
        inputs = {k: str(v).encode("utf-8") for k, v in (doc.get("inputs") or {}).items()}
        state = {k: str(v) for k, v in (doc.get("externalState") or {}).items()}
        ops = tuple(EvolutionOp.from_dict(op) for op in doc.get("ops", ()))
    except KeyError as exc:
        raise SpecError(f"scenario missing {exc}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, SpecError):
            raise
        raise SpecError(f"malformed scenario: {exc}") from exc
    unknown = set(inputs) - set(workflow.input_bindings)
    if unknown:
        raise SpecError(f"inputs not bound in workflow: {sorted(unknown)}")
    return Scenario(ExecutionContext.initial(workflow, inputs, state, seed), ops)


def scenario_to_dict(s: Scenario) -> dict:
    doc = {
        "seed": s.base.seed,
        "baseWorkflow": workflow_to_dict(s.base.workflow),
        "inputs": {k: v.decode("utf-8") for k, v in s.base.inputs.items()},
        "ops": [op.to_dict() for op in s.ops],
    }
    if s.base.external.state:
        doc["externalState"] = dict(s.base.external.state)
    return doc


def load_scenario(path, text: Optional[str] = None) -> Scenario:
    try:
        doc = json.loads(text if text is not None else Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SpecError(f"scenario is not valid JSON: {exc}") from exc
    return scenario_from_dict(doc)
