"""Signature features of report-embedding trajectories for penalized Cox survival models."""

__version__ = "0.1.0"
