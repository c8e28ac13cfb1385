from concurrent.futures import ThreadPoolExecutor

from django.conf import settings

from evaluation.ffield import OpCounter, count_operations, current_counter


def default_threads():
    return getattr(settings, "EVALUATION", {}).get("THREADS", 1)


def parallel_map(func, items, threads=None):
    """
    Apply ``func`` to every item, optionally on a thread pool.

    Each worker charges its own :class:`OpCounter`; the counters are added
    to the caller's counter in input order, and results keep input order.

    Args:
        func (callable): Pure function of one item.
        items (iterable): Work items.
        threads (int, optional): Worker count; ``EVALUATION["THREADS"]``
            when omitted.

    Returns:
        list: ``[func(item) for item in items]``.
    """
    items = list(items)
    threads = default_threads() if threads is None else threads
    if threads <= 1 or len(items) < 2:
        return [func(item) for item in items]

    def run(item):
        with count_operations(OpCounter()) as counter:
            return func(item), counter

    with ThreadPoolExecutor(max_workers=threads) as pool:
        outcomes = list(pool.map(run, items))
    parent = current_counter()
    if parent is not None:
        for _, counter in outcomes:
            parent.absorb(counter)
    return [result for result, _ in outcomes]
