"""Environments package - episodic continuous-control tasks"""
