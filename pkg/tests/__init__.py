"""Unit and command-line tests for kuramoto_tori."""
