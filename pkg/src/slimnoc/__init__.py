"""Slim NoC: low-diameter on-chip networks from MMS graphs, with layouts,
wiring and buffer cost models, routing and a cycle-level simulator."""

__version__ = "0.1.0"
