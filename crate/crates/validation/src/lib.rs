//! Acceptance suite for `slocc-mbqc`. The checks live in `tests/acceptance.rs`
//! and run with `cargo test -p slocc-mbqc-validation`.
