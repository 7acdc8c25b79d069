"""Deep boosted and ensemble learning pipeline for blood-smear screening."""

__version__ = "0.1.0"
