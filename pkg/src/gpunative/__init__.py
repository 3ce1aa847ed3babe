"""Desk-scale GPU-native compilation toolkit: DSL compiler, lockstep bytecode VM,
sample-and-verify candidate harness, hybrid router and analytic cost model."""

__version__ = "0.1.0"
