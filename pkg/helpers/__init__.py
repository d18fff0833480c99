"""Helper utilities for the adrsignal project."""
