"""Bridge exceptions."""


class BridgeError(Exception):
    """Base class for extraction failures."""


class NoObjectsDetected(BridgeError):
    """The detector found nothing usable in the image."""


class ModelUnavailable(BridgeError):
    """A model-backed backend could not be loaded (missing package/weights)."""
