import csv
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from ..autodiff.Batch import Batch
from ..exceptions import ArgumentError, StructuralError


class Dataset(BaseModel):
    """Features (n, d), integer labels in [0, C) and the class count C."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    features: np.ndarray
    labels: np.ndarray
    num_classes: int

    @model_validator(mode="after")
    def _check(self) -> "Dataset":
        self.features = np.asarray(self.features, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.features.ndim != 2 or self.labels.shape != (self.features.shape[0],):
            raise StructuralError("Dataset needs (n, d) features and n labels")
        if self.features.shape[0] == 0:
            raise StructuralError("Dataset must be nonempty")
        if self.labels.min() < 0 or self.labels.max() >= self.num_classes:
            raise StructuralError(f"Labels must lie in [0, {self.num_classes})")
        return self

    def __len__(self) -> int:
        return int(self.features.shape[0])

    @property
    def dim(self) -> int:
        return int(self.features.shape[1])

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.num_classes)

    def subset(self, indices: Sequence[int]) -> "Dataset":
        idx = np.asarray(indices, dtype=np.int64)
        return Dataset(features=self.features[idx], labels=self.labels[idx], num_classes=self.num_classes)

    def batch(self, indices: Optional[Sequence[int]] = None) -> Batch:
        if indices is None:
            return Batch(features=self.features, labels=self.labels)
        idx = np.asarray(indices, dtype=np.int64)
        return Batch(features=self.features[idx], labels=self.labels[idx])

    def to_bytes(self) -> bytes:
        return (np.ascontiguousarray(self.features, dtype="<f8").tobytes()
                + np.ascontiguousarray(self.labels, dtype="<i8").tobytes())

    @classmethod
    def from_csv(cls, path: Union[str, Path], num_classes: Optional[int] = None) -> "Dataset":
        """Read a ``label,f0,f1,...`` CSV with a header row."""
        with open(path, newline="") as handle:
            reader = csv.reader(handle)
            header = next(reader, None)
            if not header or header[0].strip() != "label":
                raise ArgumentError(f"{path}: expected header starting with 'label'")
            rows = [row for row in reader if row]
        if not rows:
            raise ArgumentError(f"{path}: no data rows")
        labels = np.asarray([int(row[0]) for row in rows], dtype=np.int64)
        features = np.asarray([[float(x) for x in row[1:]] for row in rows], dtype=np.float64)
        classes = num_classes if num_classes is not None else int(labels.max()) + 1
        return cls(features=features, labels=labels, num_classes=classes)

    def to_csv(self, path: Union[str, Path]) -> None:
        with open(path, "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["label"] + [f"f{i}" for i in range(self.dim)])
            for label, row in zip(self.labels, self.features):
                writer.writerow([int(label)] + [repr(float(x)) for x in row])
