"""Learning SAT branching weights and polarities from solver feedback."""

__version__ = "0.1.0"
