//! CLI implementation (placeholder while building).
