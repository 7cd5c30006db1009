//! Empty by design; the crate exists for its criterion benches.
