"""Robinson-Schensted shapes of permutations and their permuton limits."""

__version__ = "0.1.0"
