"""Shared exception base for the toolkit."""


class StrokeSyncError(Exception):
    """Base class for every error raised by strokesync itself."""
