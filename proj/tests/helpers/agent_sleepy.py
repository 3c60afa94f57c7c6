#!/usr/bin/env python3
"""Misbehaving external agent: never replies, forcing the per-message timeout."""
import sys
import time

sys.stdin.readline()
time.sleep(3600)
