from typing import Any, List

from pydantic import Field, PrivateAttr

from .AsyncClientExecutor import AsyncClientExecutor
from .ClientExecutor import ClientExecutor, ClientTask


class RateLimitingAsyncExecutor(ClientExecutor):
    """Runs client tasks in batches of at most ``max_batch_size`` concurrent clients."""
    max_batch_size: int = Field(default=1, ge=1)

    _batch_executor: AsyncClientExecutor = PrivateAttr()

    def model_post_init(self, __context: Any) -> None:
        super().model_post_init(__context)
        self._batch_executor = AsyncClientExecutor(max_workers=self.max_batch_size)

    async def execute_clients(self, tasks: List[ClientTask]) -> List[Any]:
        """Execute tasks in batches of max_batch_size.

        Args:
            tasks: List of ClientTask objects to execute

        Returns:
            List[Any]: Results in task order
        """
        all_results = []
        for i in range(0, len(tasks), self.max_batch_size):
            batch = tasks[i:i + self.max_batch_size]
            all_results.extend(await self._batch_executor.execute_clients(batch))
        return all_results

    def shutdown(self) -> None:
        self._batch_executor.shutdown()
