"""Transfer DoS triage models between network-flow domains."""

__version__ = "0.1.0"
