//! Grid pathfinding with weighted best-first search, a physically executed
//! real-time search model, and exact verification oracles.
//!
//! The crate is organized around five pieces:
//!
//! - [`grid`]: maps, heuristics, and the ASCII map format.
//! - [`gen`]: seeded obstacle-field and maze generators.
//! - [`oracle`]: exact shortest paths (Dijkstra) plus a brute-force
//!   enumeration cross-check.
//! - [`offline`]: perimeter-weighted best-first search with exact rational
//!   priorities.
//! - [`realtime`] and [`dea`]: an execution model where every expansion
//!   costs physical travel, and a stochastically gated policy that bounds
//!   how often the search backtracks.
//!
//! Everything stochastic is driven by the documented [`rng`] module with
//! explicit seeds; identical inputs give identical results on every
//! platform.

pub mod dea;
pub mod gen;
pub mod grid;
pub mod offline;
pub mod oracle;
pub mod realtime;
pub mod rng;
