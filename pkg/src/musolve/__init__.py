"""musolve: solve pen-and-paper logic puzzles by explained deduction.

Each solving step is justified by a minimal unsatisfiable subset (MUS) of
human-readable constraints, so the whole solve reads as a step-by-step
logical argument rather than a search trace.
"""

__version__ = "0.1.0"
