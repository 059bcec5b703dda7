from .core import (
    Batch,
    Context,
    ContextConfig,
    ContextError,
    ContextStopped,
    KeySpec,
)
from .adapters import BanditAdapter, CountingAdapter, RtsAdapter

__all__ = [
    "Batch", "Context", "ContextConfig", "ContextError", "ContextStopped",
    "KeySpec", "BanditAdapter", "CountingAdapter", "RtsAdapter",
]
