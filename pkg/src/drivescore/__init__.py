"""drivescore: telematics event logs -> driving-style features -> accident-probability models."""

__version__ = "0.1.0"
