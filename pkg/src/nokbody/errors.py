"""Error type shared by every module.

Each failure carries a machine-readable ``code`` (``"EMPTY_SEMIGROUP"``,
``"NOT_INJECTIVE"``, ...) which the command line maps onto exit statuses.
"""

from __future__ import annotations


class NokError(Exception):
    """A computation was refused or its input was invalid."""

    def __init__(self, code: str, message: str = "", pointer: str | None = None):
        self.code = code
        self.message = message or code
        self.pointer = pointer
        text = f"{code}: {self.message}"
        if pointer is not None:
            text += f" (at {pointer or '/'})"
        super().__init__(text)


class DocumentError(NokError):
    """Raised for malformed input documents (schema, rationals, exponents)."""
