"""Simulation-free PSRO with a dynamic strategy window."""
