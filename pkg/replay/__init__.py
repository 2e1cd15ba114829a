"""Replay package - shared cyclic experience storage"""
