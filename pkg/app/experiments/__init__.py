"""
Experiments Module
Experiment files, series ingestion and reproducible simulate / check / coherence runs
"""
