"""
PC Analysis Module
Spectral coherence, period detection and sample autocorrelation for discrete series
"""
