//! Holds the `acceptance` test target; run it with `cargo test -p cfcert-suite --test acceptance`.
