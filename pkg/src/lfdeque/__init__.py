"""Lock-free deques over a doubly linked list using single-word CAS."""
from ._base import CapacityTooLarge, CapacityTooSmall
from .backoff import BackoffConfig, BackoffState
from .dynamic import DynamicDeque
from .nodestore import NodePool, PoolExhausted
from .packed import PackedDeque

__all__ = [
    "BackoffConfig",
    "BackoffState",
    "CapacityTooLarge",
    "CapacityTooSmall",
    "DynamicDeque",
    "NodePool",
    "PackedDeque",
    "PoolExhausted",
]
__version__ = "0.1.0"
