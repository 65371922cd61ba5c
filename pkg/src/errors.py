"""Base exception shared by all audvault modules."""


class AudvaultError(Exception):
    """Base class for errors a user can act on.

    Subclasses live next to the code that raises them. The CLI maps any
    AudvaultError to exit code 1 and everything else to exit code 2.
    """
    pass
