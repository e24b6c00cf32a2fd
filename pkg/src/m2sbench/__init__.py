"""MAX 2-SAT hardness benchmark: instances, quantum dynamics, classical solvers, analytics."""

__version__ = "0.1.0"
