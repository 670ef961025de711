"""
Tests for polarpo.
"""
