"""Card-cyclic to random insertion shuffle: exact and limiting distributions."""
