"""Evolution package - population of actors and the EA operators"""
