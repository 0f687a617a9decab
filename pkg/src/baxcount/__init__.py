"""Max#SAT solving by counterexample-guided witness generalization."""

__version__ = "0.1.0"
