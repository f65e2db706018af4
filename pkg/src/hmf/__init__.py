"""Exact computer algebra for higher matrix factorizations over graded
complete intersections: validators, finite and infinite free resolutions,
CI operators, box complexes, syzygy extraction, and an independent
linear-algebra oracle."""

__version__ = "0.1.0"
