//! Curved-spacetime Dirac application (placeholder while building).
