//! Semiclassical ray and transport dynamics (placeholder while building).
