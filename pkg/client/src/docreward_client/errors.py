"""Typed client errors, mapped from transport and HTTP failures."""


class ClientError(Exception):
    """Base class for all client-side errors."""


class ConnectionError(ClientError):  # noqa: A001 - mirrors the wire-error taxonomy
    """The service could not be reached after the configured retries."""


class SchemaError(ClientError):
    """The server response did not match the expected wire schema."""


class ServerRejected(ClientError):
    """The server answered with a non-2xx status."""

    def __init__(self, status: int, message: str):
        super().__init__(f"HTTP {status}: {message}")
        self.status = status
        self.message = message
