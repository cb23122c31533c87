from concurrent.futures import ThreadPoolExecutor

from src.logs import getLogger

logger = getLogger(__name__)


def ordered_map(func, tasks, threads: int = 1) -> list:
    """
    map в пуле потоков с сохранением порядка задач.
    Результат не зависит от threads: задачи детерминированы, сборка идет по индексу.
    """
    tasks = list(tasks)
    if threads <= 1 or len(tasks) <= 1:
        return [func(task) for task in tasks]
    logger.debug(f"Running {len(tasks)} tasks on {threads} threads")
    with ThreadPoolExecutor(max_workers=threads) as executor:
        return list(executor.map(func, tasks))
