"""Exact semi-algebraic set algebra and counterexample witnesses for constraint queries."""
