"""
Utility helpers for polarpo.
"""

from polarpo.utils.budget import Budget

__all__ = ["Budget"]
