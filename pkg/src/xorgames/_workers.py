import os


def resolve_workers(workers=None):
    """Number of concurrent workers; ``XORGAME_THREADS`` caps it (0 = auto)."""
    if workers is None:
        try:
            workers = int(os.environ.get("XORGAME_THREADS", "1"))
        except ValueError:
            workers = 1
    if workers <= 0:
        workers = os.cpu_count() or 1
    return max(1, workers)
