"""Circumcentered-reflection and alternating-projection solvers for convex feasibility."""
