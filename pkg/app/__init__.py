"""
Semi-Lévy COGARCH Toolkit
Simulation, stationarity checks and periodic-correlation analysis for COGARCH processes with periodic jump noise
"""

__version__ = "1.0.0"
