"""adrsignal: adverse drug reaction signal detection on a drug-disease graph."""

__version__ = "0.1.0"
