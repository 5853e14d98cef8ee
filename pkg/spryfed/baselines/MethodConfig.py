from enum import Enum
from typing import Any, Dict, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator


class MethodName(str, Enum):
    SPRY = "spry"
    FEDAVG = "fedavg"
    FEDSGD = "fedsgd"
    FEDYOGI = "fedyogi"
    FEDMEZO = "fedmezo"
    BAFFLE_PLUS = "baffle_plus"
    FWDLLM_PLUS = "fwdllm_plus"
    FEDAVG_SPLIT = "fedavg_split"
    FEDFGD = "fedfgd"


# field name -> (owning method, default)
METHOD_PARAMS: Dict[str, tuple] = {
    "mezo_sigma": (MethodName.FEDMEZO, 1e-3),
    "baffle_k": (MethodName.BAFFLE_PLUS, 20),
    "baffle_sigma": (MethodName.BAFFLE_PLUS, 1e-4),
    "fwdllm_k": (MethodName.FWDLLM_PLUS, 10),
    "fwdllm_sigma": (MethodName.FWDLLM_PLUS, 1e-2),
    "fwdllm_var_threshold": (MethodName.FWDLLM_PLUS, None),
    "fgd_k": (MethodName.FEDFGD, 1),
}


class MethodConfig(BaseModel):
    """The training method and its namespaced parameters.

    Keys are written flat in config files (``mezo.sigma``, ``baffle.k``, ...). Only
    the selected method's keys may appear; missing ones take the method defaults.
    ``fwdllm.var_threshold`` left unset disables the variance filter.
    """
    model_config = ConfigDict(populate_by_name=True, extra="forbid")

    method: MethodName
    mezo_sigma: Optional[float] = Field(default=None, alias="mezo.sigma", gt=0)
    baffle_k: Optional[int] = Field(default=None, alias="baffle.k", ge=1)
    baffle_sigma: Optional[float] = Field(default=None, alias="baffle.sigma", gt=0)
    fwdllm_k: Optional[int] = Field(default=None, alias="fwdllm.k", ge=1)
    fwdllm_sigma: Optional[float] = Field(default=None, alias="fwdllm.sigma", gt=0)
    fwdllm_var_threshold: Optional[float] = Field(default=None, alias="fwdllm.var_threshold", gt=0)
    fgd_k: Optional[int] = Field(default=None, alias="fgd.k", ge=1)

    @model_validator(mode="after")
    def _own_keys_only(self) -> "MethodConfig":
        for field, (owner, default) in METHOD_PARAMS.items():
            if owner != self.method:
                if getattr(self, field) is not None:
                    alias = type(self).model_fields[field].alias
                    raise ValueError(f"'{alias}' does not apply to method '{self.method.value}'")
            elif getattr(self, field) is None and default is not None:
                setattr(self, field, default)
        return self

    def params(self) -> Dict[str, Any]:
        """The selected method's parameters keyed by their config names."""
        fields = type(self).model_fields
        return {
            fields[field].alias: getattr(self, field)
            for field, (owner, _) in METHOD_PARAMS.items()
            if owner == self.method and getattr(self, field) is not None
        }

    def to_json_dict(self) -> Dict[str, Any]:
        return {"method": self.method.value, **self.params()}
