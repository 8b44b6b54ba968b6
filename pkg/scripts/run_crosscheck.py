#!/usr/bin/env python3
"""Randomized cross-validation of the relation and concretization laws.

Defaults to 500 trials; pass --trials / --seed / --json to override.
"""
import sys

from symcret.cli import main

if __name__ == "__main__":
    sys.exit(main(["demo", "crosscheck", *sys.argv[1:]]))
