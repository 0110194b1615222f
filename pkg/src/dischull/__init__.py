"""Numerical analytic discs, planar trees and disc homotopies in C^2."""

__version__ = "0.1.0"
