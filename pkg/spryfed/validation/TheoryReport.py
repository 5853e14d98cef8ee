import json
from typing import Any, Dict, List, Optional

from pydantic import BaseModel


class Assertion(BaseModel):
    """One pass/fail check with its tolerance and the sample size behind it."""
    name: str
    passed: bool
    tolerance: float
    sample_size: int
    measured: Optional[float] = None
    expected: Optional[float] = None
    standard_error: Optional[float] = None
    detail: str = ""


class TheoryReport(BaseModel):
    """Measured statistics, predicted values and assertions of one validation experiment."""
    experiment: str
    seed: int
    statistics: Dict[str, Any] = {}
    predictions: Dict[str, Any] = {}
    assertions: List[Assertion] = []

    @property
    def passed(self) -> bool:
        return all(a.passed for a in self.assertions)

    def check(self, name: str, passed: bool, tolerance: float, sample_size: int, **fields) -> Assertion:
        assertion = Assertion(name=name, passed=bool(passed), tolerance=float(tolerance),
                              sample_size=int(sample_size), **fields)
        self.assertions.append(assertion)
        return assertion

    def assertion(self, name: str) -> Assertion:
        for assertion in self.assertions:
            if assertion.name == name:
                return assertion
        raise KeyError(name)

    def to_json_dict(self) -> Dict[str, Any]:
        data = self.model_dump(mode="json")
        data["passed"] = self.passed
        return data

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, indent=2)
