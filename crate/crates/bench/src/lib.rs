//! Nothing lives here: the crate exists to host the criterion benchmarks in
//! `benches/`, keeping their dependencies out of the library crate.
