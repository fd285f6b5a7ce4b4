"""Network-server side: lossy channel, persistence, query/export, HTTP API.

The HTTP app lives in ``urbansense.server.api`` and is imported explicitly
so that library use of the store does not pull in the web stack.
"""

from .channel import ChannelModel
from .store import (IngestError, IngestResult, MeasurementRecord,
                    MeasurementStore, NotFound)

__all__ = [
    "ChannelModel",
    "IngestError",
    "IngestResult",
    "MeasurementRecord",
    "MeasurementStore",
    "NotFound",
]
