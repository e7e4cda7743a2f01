"""
BoundRelax - non-linear integer arithmetic by bounded linearization
Main command-line entry point
"""
import sys

from app.cli import run

if __name__ == '__main__':
    sys.exit(run())
