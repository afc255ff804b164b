"""Floorplanner for partially reconfigurable FPGA designs on tile fabrics."""

__version__ = "0.1.0"
