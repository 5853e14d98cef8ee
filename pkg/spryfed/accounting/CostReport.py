from pydantic import BaseModel


class CommCost(BaseModel):
    client_to_server: int
    server_to_clients: int


class CompCost(BaseModel):
    client_per_iteration: float
    server_per_round: float


class MemoryBreakdown(BaseModel):
    params: float
    grads_opt: float
    activations: float
    peak: float


class CostReport(BaseModel):
    """Communication and computation costs of one method at one point of a sweep."""
    method: str
    mode: str
    clients: int
    layers: int
    layer_params: int
    perturbations: int
    comm: CommCost
    comp: CompCost

    def csv_row(self) -> list:
        return [
            self.method, self.mode, self.clients, self.layers, self.layer_params, self.perturbations,
            self.comm.client_to_server, self.comm.server_to_clients,
            repr(float(self.comp.client_per_iteration)), repr(float(self.comp.server_per_round)),
        ]


COST_COLUMNS = [
    "method", "mode", "M", "L", "w_layer", "K",
    "client_to_server", "server_to_clients", "client_per_iteration", "server_per_round",
]
