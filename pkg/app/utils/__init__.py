"""This module contains utility functions for the simulator."""
