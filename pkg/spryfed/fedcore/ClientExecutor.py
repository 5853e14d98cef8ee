import asyncio
from abc import ABC, abstractmethod
from typing import Any, Callable, List

from pydantic import BaseModel


class ClientTask(BaseModel):
    """One simulated client's work for a round."""
    client_id: int
    run: Callable[[], Any]


class ClientExecutor(BaseModel, ABC):
    @abstractmethod
    async def execute_clients(self, tasks: List[ClientTask]) -> List[Any]:
        """
        Execute a list of client tasks.

        Args:
            tasks: List of ClientTask objects to execute

        Returns:
            List[Any]: One result per task, in task order
        """
        pass

    def shutdown(self) -> None:
        """
        Release worker resources.
        This should be called when the executor is no longer needed.
        """
        pass

    def run_round(self, tasks: List[ClientTask]) -> List[Any]:
        """Blocking wrapper around :meth:`execute_clients`."""
        return asyncio.run(self.execute_clients(tasks))
