import numpy as np
from pydantic import BaseModel, ConfigDict


class BiasMatrix(BaseModel):
    """Heterogeneity coefficients alpha_{m,c}, one row per client, one column per class."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    alpha_mc: np.ndarray

    def penalty(self) -> float:
        """Sum of squared coefficients over clients and classes."""
        return float(np.sum(self.alpha_mc * self.alpha_mc))

    def is_zero(self, atol: float = 0.0) -> bool:
        return bool(np.all(np.abs(self.alpha_mc) <= atol))

    def to_csv_rows(self):
        rows = [["client"] + [f"class{c}" for c in range(self.alpha_mc.shape[1])]]
        for m, row in enumerate(self.alpha_mc):
            rows.append([m] + [repr(float(x)) for x in row])
        return rows
