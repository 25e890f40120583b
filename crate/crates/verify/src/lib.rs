//! Holds the acceptance suite in `tests/`. It is a separate package so it
//! sorts last in `cargo test --workspace`, after the unit and property tests.
