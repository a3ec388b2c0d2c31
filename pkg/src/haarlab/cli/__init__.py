"""
Command line interface for haarlab.

The ``haarlab`` group runs the experiments and property checks; the
``haarlab-fuzz`` group runs and replays seeded fuzz suites.
"""

__all__ = []
