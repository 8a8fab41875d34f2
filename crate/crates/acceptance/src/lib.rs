//! End-to-end acceptance checks for the hsikit workspace. The checks live in
//! `tests/acceptance.rs`; run them with `cargo test -p hsikit-validation`.
