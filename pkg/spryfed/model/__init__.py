from .ParamStore import GroupKind, LayerGroup, ParamEntry, ParamStore, read_checkpoint
from .ModelSpec import Activation, Architecture, LoRASpec, ModelSpec
from .LoRAAdapter import LoRAAdapter
from .Network import DenseLayer, Network
from .builder import build_model, freeze_except, list_trainable_layers

__all__ = [
    'GroupKind', 'LayerGroup', 'ParamEntry', 'ParamStore', 'read_checkpoint',
    'Activation', 'Architecture', 'LoRASpec', 'ModelSpec', 'LoRAAdapter',
    'DenseLayer', 'Network', 'build_model', 'freeze_except', 'list_trainable_layers',
]
