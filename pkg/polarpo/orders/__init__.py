"""
Order services: degradation, BEC dominance, BMSC bounds and the rule engine.
"""

from polarpo.orders.base import BaseOrder
from polarpo.orders.bec import BecOrder
from polarpo.orders.bounds import BmscBounds
from polarpo.orders.degradation import DegradationOrder
from polarpo.orders.rules import RuleEngine

__all__ = [
    "BaseOrder",
    "BecOrder",
    "BmscBounds",
    "DegradationOrder",
    "RuleEngine",
]
