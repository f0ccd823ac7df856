"""
Small shared helpers.
"""

from .streams import MAX_SEED, auxiliary_stream, replica_seed, replica_stream

__all__ = [
    'MAX_SEED',
    'auxiliary_stream',
    'replica_seed',
    'replica_stream',
]
