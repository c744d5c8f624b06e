"""
Conditions Module
Periodic stationarity and volatility non-negativity checks for a parameterization
"""
