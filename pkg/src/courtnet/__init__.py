"""Batch analysis of French appellate court decisions.

Turns raw judgment texts into segmented records, extracted parties and
outcomes, lawyer networks with rankings, and case-similarity communities.
"""

__version__ = "0.1.0"
