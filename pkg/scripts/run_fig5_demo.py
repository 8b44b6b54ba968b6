#!/usr/bin/env python3
"""Replay the finite separation scenario and print its check table."""
import sys

from symcret.cli import main

if __name__ == "__main__":
    sys.exit(main(["demo", "fig5", *sys.argv[1:]]))
