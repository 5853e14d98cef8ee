from .CostInputs import CostInputs, MemoryInputs, MethodKind
from .CostReport import COST_COLUMNS, CommCost, CompCost, CostReport, MemoryBreakdown
from .costs import CostSweep, comm_cost, comp_cost, cost_report, cost_sweep, costs_csv_text, memory_model
from .memory import memory_inputs_for

__all__ = [
    'CostInputs', 'MemoryInputs', 'MethodKind', 'COST_COLUMNS', 'CommCost', 'CompCost', 'CostReport',
    'MemoryBreakdown', 'CostSweep', 'comm_cost', 'comp_cost', 'cost_report', 'cost_sweep', 'costs_csv_text',
    'memory_model', 'memory_inputs_for',
]
