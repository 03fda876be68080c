"""HTTP client SDK for the docreward reward service."""

__version__ = "0.1.0"

from .client import ClientConfig, RewardClient, dumps
from .errors import ClientError, ConnectionError, SchemaError, ServerRejected
