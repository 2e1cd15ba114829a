"""Configuration package - process settings and experiment configs"""
from .settings import *
