import asyncio
import atexit
import concurrent.futures
import logging
import os

logger = logging.getLogger(__name__)

workersEnvironmentVariable = "SUBSPACEGAP_WORKERS"

_threadPool = None
_processPool = None
_processPoolSize = None


def getWorkerCount(requested: int | None = None) -> int:
    if requested is None:
        fromEnvironment = os.environ.get(workersEnvironmentVariable)
        if fromEnvironment:
            try:
                requested = int(fromEnvironment)
            except ValueError:
                logger.warning(
                    f"ignoring {workersEnvironmentVariable}={fromEnvironment!r}"
                )
    if requested is None:
        requested = os.cpu_count() or 1
    return max(1, requested)


async def runInThread(func, *args):
    global _threadPool

    if _threadPool is None:
        _threadPool = concurrent.futures.ThreadPoolExecutor()

    loop = asyncio.get_running_loop()
    return await loop.run_in_executor(_threadPool, func, *args)


async def runInWorker(workers, func, *args):
    """Run `func(*args)` in a worker process, or inline when `workers` is 1.

    `func` and its arguments must be picklable.
    """
    global _processPool, _processPoolSize

    if workers <= 1:
        return func(*args)

    if _processPool is None or _processPoolSize != workers:
        shutdownProcessPool()
        _processPool = concurrent.futures.ProcessPoolExecutor(max_workers=workers)
        _processPoolSize = workers

    loop = asyncio.get_running_loop()
    return await loop.run_in_executor(_processPool, func, *args)


def mapInThreads(func, items, workers: int = 1) -> list:
    # results keep the order of `items`, whatever the scheduling
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))


def shutdownThreadPool():
    global _threadPool

    if _threadPool is not None:
        _threadPool.shutdown()
        _threadPool = None


def shutdownProcessPool():
    global _processPool, _processPoolSize

    if _processPool is not None:
        _processPool.shutdown()
        _processPool = None
        _processPoolSize = None


atexit.register(shutdownThreadPool)
atexit.register(shutdownProcessPool)
