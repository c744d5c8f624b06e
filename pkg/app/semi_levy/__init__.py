"""
Semi-Lévy Module
Semi-Lévy compound Poisson driving process: law, simulation, characteristic function
"""
