"""Disassembly planning for robot-based maintenance: from CAD relations to
sequenced manipulation primitives and collision-free arm paths."""

__version__ = "1.0.0"
