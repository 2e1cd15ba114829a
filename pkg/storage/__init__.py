"""Storage package - experiment run registry"""
