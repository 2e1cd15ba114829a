"""Harness package - experiment runs, comparison and the command line"""
