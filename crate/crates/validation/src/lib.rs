//! Acceptance checks for `fuzzy-ari`. Everything lives in `tests/acceptance.rs`,
//! a harness-free test target that prints one PASS/FAIL line per criterion.
