#!/usr/bin/env python3
"""Replay the segment reach-the-origin scenario (constant vs affine inputs)."""
import sys

from symcret.cli import main

if __name__ == "__main__":
    sys.exit(main(["demo", "fig8", *sys.argv[1:]]))
