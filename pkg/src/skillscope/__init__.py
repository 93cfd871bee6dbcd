"""skillscope: skill-shortage analytics for job-advertisement corpora."""

__version__ = "0.1.0"
