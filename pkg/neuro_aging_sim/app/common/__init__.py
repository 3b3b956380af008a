"""
Common module for the neuromorphic aging simulator.

This module contains the exceptions, time helpers and report utilities used
across the simulator.
"""
