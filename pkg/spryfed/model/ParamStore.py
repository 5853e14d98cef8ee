import hashlib
import struct
from enum import Enum
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, PrivateAttr, model_validator

from ..exceptions import ArgumentError, StructuralError


class GroupKind(str, Enum):
    LORA = "lora"
    DENSE = "dense"
    HEAD = "head"


class ParamEntry(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    name: str
    value: np.ndarray
    trainable: bool

    def __str__(self) -> str:
        return f"ParamEntry(name={self.name}, shape={self.value.shape}, trainable={self.trainable})"

    def __repr__(self) -> str:
        return self.__str__()


class LayerGroup(BaseModel):
    """An assignable unit of trainable parameters (a LoRA pair, a dense layer or the head)."""
    name: str
    members: List[str]
    kind: GroupKind


class ParamStore(BaseModel):
    """Named, ordered collection of model parameters.

    Iteration order is the order of ``entries`` and is fixed by the ModelSpec that
    built the store, so every replica walks parameters identically. Parameters that
    belong to no layer group (frozen base weights under LoRA) can never become
    trainable.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True)

    entries: List[ParamEntry]
    layer_groups: List[LayerGroup] = []

    _index: Dict[str, int] = PrivateAttr(default_factory=dict)
    _group_of: Dict[str, str] = PrivateAttr(default_factory=dict)

    @model_validator(mode="after")
    def _check_structure(self) -> "ParamStore":
        index: Dict[str, int] = {}
        for position, entry in enumerate(self.entries):
            if entry.name in index:
                raise StructuralError(f"Duplicate parameter name: {entry.name}")
            entry.value = np.asarray(entry.value, dtype=np.float64)
            index[entry.name] = position

        group_of: Dict[str, str] = {}
        seen_groups = set()
        for group in self.layer_groups:
            if group.name in seen_groups:
                raise StructuralError(f"Duplicate layer group: {group.name}")
            seen_groups.add(group.name)
            if group.kind == GroupKind.LORA and len(group.members) != 2:
                raise StructuralError(f"LoRA group {group.name} must hold exactly A and B")
            for member in group.members:
                if member not in index:
                    raise StructuralError(f"Group {group.name} references unknown parameter {member}")
                if member in group_of:
                    raise StructuralError(f"Parameter {member} is in groups {group_of[member]} and {group.name}")
                group_of[member] = group.name

        for entry in self.entries:
            if entry.trainable and entry.name not in group_of:
                raise StructuralError(f"Trainable parameter {entry.name} belongs to no layer group")

        self._index = index
        self._group_of = group_of
        return self

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, name: str) -> bool:
        return name in self._index

    def names(self) -> List[str]:
        return [entry.name for entry in self.entries]

    def entry(self, name: str) -> ParamEntry:
        try:
            return self.entries[self._index[name]]
        except KeyError:
            raise StructuralError(f"Unknown parameter: {name}")

    def get(self, name: str) -> np.ndarray:
        return self.entry(name).value

    def set(self, name: str, value: np.ndarray) -> None:
        entry = self.entry(name)
        value = np.asarray(value, dtype=np.float64)
        if value.shape != entry.value.shape:
            raise StructuralError(
                f"Shape mismatch for {name}: expected {entry.value.shape}, got {value.shape}"
            )
        entry.value = value

    def values(self) -> Dict[str, np.ndarray]:
        return {entry.name: entry.value for entry in self.entries}

    def shapes(self) -> Dict[str, tuple]:
        return {entry.name: entry.value.shape for entry in self.entries}

    def trainable_names(self) -> List[str]:
        return [entry.name for entry in self.entries if entry.trainable]

    def trainable_values(self) -> Dict[str, np.ndarray]:
        return {entry.name: entry.value for entry in self.entries if entry.trainable}

    def num_trainable(self) -> int:
        return int(sum(entry.value.size for entry in self.entries if entry.trainable))

    def group(self, name: str) -> LayerGroup:
        for group in self.layer_groups:
            if group.name == name:
                return group
        raise ArgumentError(f"Unknown layer group: {name}")

    def group_names(self) -> List[str]:
        return [group.name for group in self.layer_groups]

    def group_of(self, param_name: str) -> Optional[str]:
        return self._group_of.get(param_name)

    def is_group_trainable(self, name: str) -> bool:
        return all(self.entry(member).trainable for member in self.group(name).members)

    def members_of(self, groups: Iterable[str]) -> List[str]:
        """Parameter names of ``groups`` in store entry order."""
        wanted = set()
        for name in groups:
            wanted.update(self.group(name).members)
        return [entry.name for entry in self.entries if entry.name in wanted]

    def clone(self) -> "ParamStore":
        return ParamStore(
            entries=[
                ParamEntry(name=e.name, value=e.value.copy(), trainable=e.trainable)
                for e in self.entries
            ],
            layer_groups=[g.model_copy(deep=True) for g in self.layer_groups],
        )

    def with_trainable(self, trainable: Iterable[str]) -> "ParamStore":
        """Copy of the store with exactly ``trainable`` parameters marked trainable."""
        wanted = set(trainable)
        store = self.clone()
        for entry in store.entries:
            entry.trainable = entry.name in wanted
        return store

    def update(self, values: Mapping[str, np.ndarray]) -> None:
        for name, value in values.items():
            self.set(name, value)

    def fingerprint(self) -> str:
        """SHA-256 over names, trainable flags, shapes and little-endian float64 bytes."""
        digest = hashlib.sha256()
        for entry in self.entries:
            digest.update(entry.name.encode("utf-8"))
            digest.update(b"\x01" if entry.trainable else b"\x00")
            digest.update(np.asarray(entry.value.shape, dtype="<u8").tobytes())
            digest.update(np.ascontiguousarray(entry.value, dtype="<f8").tobytes())
        for group in self.layer_groups:
            digest.update(group.name.encode("utf-8"))
            digest.update(",".join(group.members).encode("utf-8"))
        return digest.hexdigest()

    def to_bytes(self) -> bytes:
        """Flat checkpoint: entry count, then per entry name length, name, rank, dims, values."""
        chunks = [struct.pack("<I", len(self.entries))]
        for entry in self.entries:
            name = entry.name.encode("utf-8")
            chunks.append(struct.pack("<I", len(name)))
            chunks.append(name)
            chunks.append(struct.pack("<I", entry.value.ndim))
            chunks.append(np.asarray(entry.value.shape, dtype="<u8").tobytes())
            chunks.append(np.ascontiguousarray(entry.value, dtype="<f8").tobytes())
        return b"".join(chunks)

    def load_bytes(self, payload: bytes) -> "ParamStore":
        """Copy of this store with values read from a flat checkpoint."""
        values = read_checkpoint(payload)
        if list(values) != self.names():
            raise StructuralError("Checkpoint parameter names do not match the store")
        store = self.clone()
        store.update(values)
        return store

    def save(self, path: Union[str, Path]) -> None:
        Path(path).write_bytes(self.to_bytes())

    def load(self, path: Union[str, Path]) -> "ParamStore":
        return self.load_bytes(Path(path).read_bytes())


def read_checkpoint(payload: bytes) -> Dict[str, np.ndarray]:
    values: Dict[str, np.ndarray] = {}
    offset = 0

    def take(size: int) -> bytes:
        nonlocal offset
        if offset + size > len(payload):
            raise StructuralError("Truncated checkpoint")
        chunk = payload[offset:offset + size]
        offset += size
        return chunk

    (count,) = struct.unpack("<I", take(4))
    for _ in range(count):
        (name_len,) = struct.unpack("<I", take(4))
        name = take(name_len).decode("utf-8")
        (ndim,) = struct.unpack("<I", take(4))
        shape = tuple(int(d) for d in np.frombuffer(take(8 * ndim), dtype="<u8"))
        size = int(np.prod(shape, dtype=np.int64)) if shape else 1
        data = np.frombuffer(take(8 * size), dtype="<f8").astype(np.float64)
        values[name] = data.reshape(shape)
    if offset != len(payload):
        raise StructuralError("Trailing bytes in checkpoint")
    return values
