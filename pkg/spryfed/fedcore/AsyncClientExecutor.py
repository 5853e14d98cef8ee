import asyncio
from concurrent.futures import ThreadPoolExecutor
from typing import Any, List, Optional

from pydantic import Field, PrivateAttr

from ..utils.logger import debug
from .ClientExecutor import ClientExecutor, ClientTask


class AsyncClientExecutor(ClientExecutor):
    max_workers: Optional[int] = Field(default=None, ge=1)

    _pool: Optional[ThreadPoolExecutor] = PrivateAttr(default=None)

    def _get_pool(self) -> ThreadPoolExecutor:
        if self._pool is None:
            self._pool = ThreadPoolExecutor(max_workers=self.max_workers, thread_name_prefix="spryfed-client")
        return self._pool

    async def execute_clients(self, tasks: List[ClientTask]) -> List[Any]:
        """
        Run client tasks concurrently on the worker pool.

        Args:
            tasks: List of ClientTask objects to execute

        Returns:
            List[Any]: Results in task order, whatever order the workers finish in
        """
        debug("Starting execution of %d client tasks", len(tasks))
        loop = asyncio.get_running_loop()
        pool = self._get_pool()
        results = await asyncio.gather(*[loop.run_in_executor(pool, task.run) for task in tasks])
        for task, result in zip(tasks, results):
            debug("  Client %d -> %s", task.client_id, type(result).__name__)
        debug("Completed execution of all client tasks")
        return list(results)

    def shutdown(self) -> None:
        if self._pool is not None:
            self._pool.shutdown(wait=True)
            self._pool = None
