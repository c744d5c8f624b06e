"""
COGARCH Module
Jump-time evolution of the state, volatility and price processes
"""
