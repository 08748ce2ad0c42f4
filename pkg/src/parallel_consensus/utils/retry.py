import logging
from functools import wraps
from typing import Callable, ParamSpec, Type, TypeVar

T = TypeVar("T")
P = ParamSpec("P")

logger = logging.getLogger(__name__)


def retry(
    times: int,
    exceptions: tuple[Type[Exception], ...] | Type[Exception] = Exception,
) -> Callable[[Callable[P, T]], Callable[P, T]]:
    """Decorator that re-runs a randomized routine when it raises one of the
    given exceptions.

    Used by the scene generators for bounded resampling: a sampler that draws
    from a ``numpy.random.Generator`` advances the generator on every attempt,
    so each retry sees a fresh configuration. After ``times`` failed retries the
    last call is made unguarded and its exception propagates to the caller,
    which decides what to do with the configuration (usually drop it).

    Args:
        times (int): Max number of retries before the exception propagates.
            Must be non-negative; ``0`` means a single unguarded call.
        exceptions (tuple[Type[Exception], ...] | Type[Exception]): Exception
            or tuple of exceptions that trigger a retry. Defaults to Exception.

    Returns:
        Callable[[Callable[P, T]], Callable[P, T]]: The decorated function.
    """

    def decorator(func: Callable[P, T]) -> Callable[P, T]:
        @wraps(func)
        def wrapper(*args: P.args, **kwargs: P.kwargs) -> T:
            for i in range(times):
                try:
                    return func(*args, **kwargs)
                except exceptions as e:
                    logger.warning(
                        "%s failed on attempt %d of %d (%s), resampling.",
                        func.__name__,
                        i + 1,
                        times + 1,
                        e,
                    )

            return func(*args, **kwargs)

        return wrapper

    return decorator
