//! Acceptance harness for `plap`; see `tests/acceptance.rs`.
