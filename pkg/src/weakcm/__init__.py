"""weakcm: exact classification and splitting machinery for small CM fields,
their Galois/Dodson data, and the CM Hodge structures they carry."""

__version__ = "0.1.0"
