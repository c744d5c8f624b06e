"""
Shared Modules
Settings, logging, error types and CSV writers used by every module
"""
