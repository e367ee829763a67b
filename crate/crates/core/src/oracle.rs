//! Ground-truth shortest paths and small-instance exhaustive verification.
//!
//! [`dijkstra_cost`] is the reference cost provider for every bound check in
//! the workspace. [`enumerate_paths`] is an independent brute-force oracle
//! used to cross-check it on small maps; the two must always agree.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use thiserror::Error;

use crate::grid::{neighbors_in, Cell, GridMap};

/// Maximum free-cell count accepted by [`enumerate_paths`].
pub const ENUMERATION_CELL_LIMIT: usize = 20;

#[derive(Error, Debug, PartialEq, Eq)]
pub enum OracleError {
    #[error("endpoint {0} is out of bounds")]
    OutOfBounds(Cell),
    #[error("endpoint {0} is blocked")]
    BlockedEndpoint(Cell),
    #[error("map has {free_cells} free cells, enumeration is limited to {limit}")]
    TooLarge { free_cells: usize, limit: usize },
    #[error("cell limit {requested} exceeds the enumeration cap {limit}")]
    LimitTooHigh { requested: usize, limit: usize },
}

/// Outcome of an exact shortest-path query.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum OracleResult {
    /// Reachable: optimal cost and one optimal path (`witness[0] == from`,
    /// `witness.last() == to`, `witness.len() == cost + 1`).
    Reachable { cost: u64, witness: Vec<Cell> },
    Unreachable,
}

impl OracleResult {
    pub fn cost(&self) -> Option<u64> {
        match self {
            OracleResult::Reachable { cost, .. } => Some(*cost),
            OracleResult::Unreachable => None,
        }
    }

    pub fn is_reachable(&self) -> bool {
        matches!(self, OracleResult::Reachable { .. })
    }

    pub fn witness(&self) -> Option<&[Cell]> {
        match self {
            OracleResult::Reachable { witness, .. } => Some(witness),
            OracleResult::Unreachable => None,
        }
    }
}

fn check_endpoint(map: &GridMap, cell: Cell) -> Result<(), OracleError> {
    if !map.in_bounds(cell) {
        return Err(OracleError::OutOfBounds(cell));
    }
    if map.is_blocked(cell) {
        return Err(OracleError::BlockedEndpoint(cell));
    }
    Ok(())
}

/// Exact shortest path on the fully known map.
///
/// The witness is deterministic: ties in the queue break on insertion
/// order and relaxation follows the fixed north, east, south, west
/// neighbor order.
pub fn dijkstra_cost(map: &GridMap, from: Cell, to: Cell) -> Result<OracleResult, OracleError> {
    check_endpoint(map, from)?;
    check_endpoint(map, to)?;

    let idx = |c: Cell| (c.y * map.width() + c.x) as usize;
    let n = map.width() as usize * map.height() as usize;
    let mut dist = vec![u64::MAX; n];
    let mut parent: Vec<Option<Cell>> = vec![None; n];
    let mut heap = BinaryHeap::new();
    let mut seq = 0u64;

    dist[idx(from)] = 0;
    heap.push(Reverse((0u64, seq, from)));

    while let Some(Reverse((d, _, cell))) = heap.pop() {
        if d > dist[idx(cell)] {
            continue; // stale entry
        }
        if cell == to {
            break;
        }
        for next in neighbors_in(map, cell) {
            let nd = d + 1;
            if nd < dist[idx(next)] {
                dist[idx(next)] = nd;
                parent[idx(next)] = Some(cell);
                seq += 1;
                heap.push(Reverse((nd, seq, next)));
            }
        }
    }

    if dist[idx(to)] == u64::MAX {
        return Ok(OracleResult::Unreachable);
    }
    let mut witness = vec![to];
    let mut cur = to;
    while let Some(p) = parent[idx(cur)] {
        witness.push(p);
        cur = p;
    }
    witness.reverse();
    debug_assert_eq!(witness[0], from);
    Ok(OracleResult::Reachable {
        cost: dist[idx(to)],
        witness,
    })
}

/// Minimum cost over all simple paths, by exhaustive depth-first
/// enumeration. Independent of the priority-queue machinery on purpose.
///
/// Guards against exponential blowup: the map must have at most
/// `max_cells` free cells and `max_cells` itself is capped at
/// [`ENUMERATION_CELL_LIMIT`].
pub fn enumerate_paths(
    map: &GridMap,
    from: Cell,
    to: Cell,
    max_cells: usize,
) -> Result<Option<u64>, OracleError> {
    if max_cells > ENUMERATION_CELL_LIMIT {
        return Err(OracleError::LimitTooHigh {
            requested: max_cells,
            limit: ENUMERATION_CELL_LIMIT,
        });
    }
    check_endpoint(map, from)?;
    check_endpoint(map, to)?;
    let free = map.free_cell_count();
    if free > max_cells {
        return Err(OracleError::TooLarge {
            free_cells: free,
            limit: max_cells,
        });
    }

    fn dfs(
        map: &GridMap,
        cur: Cell,
        to: Cell,
        depth: u64,
        visited: &mut Vec<Cell>,
        best: &mut Option<u64>,
    ) {
        if cur == to {
            *best = Some(best.map_or(depth, |b| b.min(depth)));
            return;
        }
        for next in neighbors_in(map, cur).collect::<Vec<_>>() {
            if visited.contains(&next) {
                continue;
            }
            visited.push(next);
            dfs(map, next, to, depth + 1, visited, best);
            visited.pop();
        }
    }

    let mut best = None;
    let mut visited = vec![from];
    dfs(map, from, to, 0, &mut visited, &mut best);
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::parse_map;

    #[test]
    fn empty_grid_corner_to_corner() {
        let map = GridMap::new(5, 5, [], Cell::new(0, 0), Cell::new(4, 4)).unwrap();
        let res = dijkstra_cost(&map, map.start(), map.goal()).unwrap();
        assert_eq!(res.cost(), Some(8));
        let witness = res.witness().unwrap();
        assert_eq!(witness.len(), 9);
        assert_eq!(witness[0], map.start());
        assert_eq!(*witness.last().unwrap(), map.goal());
        for pair in witness.windows(2) {
            assert!(pair[0].adjacent(pair[1]));
        }
    }

    #[test]
    fn wall_separation_is_unreachable() {
        let map = parse_map("S#G").unwrap();
        let res = dijkstra_cost(&map, map.start(), map.goal()).unwrap();
        assert_eq!(res, OracleResult::Unreachable);
        assert_eq!(
            enumerate_paths(&map, map.start(), map.goal(), 20).unwrap(),
            None
        );
    }

    #[test]
    fn blocked_endpoint_is_usage_error() {
        let map = parse_map("S#G").unwrap();
        assert_eq!(
            dijkstra_cost(&map, Cell::new(1, 0), map.goal()),
            Err(OracleError::BlockedEndpoint(Cell::new(1, 0)))
        );
        assert_eq!(
            dijkstra_cost(&map, Cell::new(7, 7), map.goal()),
            Err(OracleError::OutOfBounds(Cell::new(7, 7)))
        );
    }

    #[test]
    fn single_corridor_enumeration() {
        let map = parse_map("S...G").unwrap();
        assert_eq!(
            enumerate_paths(&map, map.start(), map.goal(), 20).unwrap(),
            Some(4)
        );
    }

    #[test]
    fn enumeration_guards_size() {
        let map = GridMap::new(6, 6, [], Cell::new(0, 0), Cell::new(5, 5)).unwrap();
        assert_eq!(
            enumerate_paths(&map, map.start(), map.goal(), 20),
            Err(OracleError::TooLarge {
                free_cells: 36,
                limit: 20
            })
        );
        assert_eq!(
            enumerate_paths(&map, map.start(), map.goal(), 30),
            Err(OracleError::LimitTooHigh {
                requested: 30,
                limit: 20
            })
        );
    }

    #[test]
    fn witness_is_deterministic() {
        let map = GridMap::new(4, 4, [], Cell::new(0, 0), Cell::new(3, 3)).unwrap();
        let a = dijkstra_cost(&map, map.start(), map.goal()).unwrap();
        let b = dijkstra_cost(&map, map.start(), map.goal()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn same_cell_query_costs_zero() {
        let map = GridMap::new(3, 3, [], Cell::new(0, 0), Cell::new(2, 2)).unwrap();
        let res = dijkstra_cost(&map, Cell::new(1, 1), Cell::new(1, 1)).unwrap();
        assert_eq!(res.cost(), Some(0));
        assert_eq!(res.witness().unwrap(), &[Cell::new(1, 1)]);
    }
}
