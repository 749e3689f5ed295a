#!/usr/bin/env python
"""photonloom's command-line utility."""
from photonloom.cli import run

if __name__ == "__main__":
    run()
