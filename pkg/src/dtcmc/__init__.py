"""Fixed switching frequency DTC of an induction machine fed by a direct
matrix converter: plant, controller, modulator and analysis tools."""

__version__ = "0.1.0"
