"""Exception types shared across the simulator."""


class ParameterError(ValueError):
    """An operation received an argument outside its valid domain."""


class ConfigError(ValueError):
    """A configuration key is unknown, malformed or violates a constraint.

    ``key`` names the offending configuration key so the CLI can report it.
    """

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


class ProtocolViolation(RuntimeError):
    """A privacy-protocol message failed verification (bad signature, bad MAC)."""
