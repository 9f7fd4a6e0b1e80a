"""si_align: alignment and filtering toolkit for SI parallel corpora."""

__version__ = "0.1.0"
