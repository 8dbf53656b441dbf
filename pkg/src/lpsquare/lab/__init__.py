"""Experiment runner, report emitter and command line interface."""
