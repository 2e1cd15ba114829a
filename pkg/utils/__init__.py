"""Utilities package - errors, seeding, returns and formatting helpers"""
