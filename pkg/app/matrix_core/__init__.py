"""
Matrix Core Module
Companion matrices, eigenstructure, matrix exponentials and natural norms
"""
