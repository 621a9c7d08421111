"""Social-engineering threat detection over (attacker, victim) pairs."""

__version__ = "0.1.0"
