import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from ..exceptions import StructuralError


class Batch(BaseModel):
    """Features (n, d) and integer labels (n,) fed to a model function."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    features: np.ndarray
    labels: np.ndarray

    @model_validator(mode="after")
    def _check(self) -> "Batch":
        self.features = np.asarray(self.features, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.features.ndim != 2:
            raise StructuralError(f"Batch features must be 2-D, got shape {self.features.shape}")
        if self.labels.shape != (self.features.shape[0],):
            raise StructuralError("Batch labels must be a vector matching the feature rows")
        return self

    def __len__(self) -> int:
        return int(self.features.shape[0])

    @classmethod
    def empty_input(cls, dim: int = 1) -> "Batch":
        """Single dummy row for model functions that ignore their data."""
        return cls(features=np.zeros((1, dim)), labels=np.zeros(1, dtype=np.int64))
