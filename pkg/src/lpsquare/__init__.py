"""Littlewood-Paley square functions on the torus: linear, bilinear and time-frequency tools."""

__version__ = "0.1.0"
