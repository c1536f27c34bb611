import asyncio
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, List, Sequence

logger = logging.getLogger(__name__)


async def execute_parallel(
    tasks: Sequence[Callable[[], Any]],
    max_workers: int = 5
) -> List[Any]:
    """
    Execute blocking callables in parallel on a thread pool

    Args:
        tasks: Zero-argument callables (numpy/scipy work releases the GIL)
        max_workers: Maximum number of worker threads

    Returns:
        List of results in the same order as tasks
    """
    if not tasks:
        return []

    logger.debug(f"Executing {len(tasks)} tasks in parallel with {max_workers} workers")

    loop = asyncio.get_running_loop()
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        futures = [loop.run_in_executor(pool, task) for task in tasks]
        results = await asyncio.gather(*futures, return_exceptions=True)

    # Check for exceptions
    for i, result in enumerate(results):
        if isinstance(result, Exception):
            logger.error(f"Task {i} failed: {str(result)}")
            raise result

    logger.debug(f"Completed {len(tasks)} parallel tasks")
    return list(results)


def run_parallel(
    tasks: Sequence[Callable[[], Any]],
    max_workers: int = 5
) -> List[Any]:
    """Synchronous entry point; runs serially when a single worker is requested"""
    if max_workers <= 1:
        return [task() for task in tasks]
    return asyncio.run(execute_parallel(tasks, max_workers))
