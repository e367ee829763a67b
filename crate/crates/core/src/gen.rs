//! Seeded world generation: random obstacle fields and perfect mazes.
//!
//! Both generators are pure functions of their parameters and seed, and
//! both verify solvability with the shortest-path oracle before returning.
//! Start is the north-west corner, goal the south-east corner.

use thiserror::Error;

use crate::grid::{Cell, GridMap};
use crate::oracle::dijkstra_cost;
use crate::rng::SplitMix64;

/// Attempts made before obstacle-field generation gives up.
pub const RETRY_BUDGET: u32 = 1000;

#[derive(Error, Debug, PartialEq)]
pub enum GenError {
    #[error("dimensions must be at least {min}x{min}, got {width}x{height}")]
    TooSmall { width: u32, height: u32, min: u32 },
    #[error("maze dimensions must be odd, got {width}x{height}")]
    EvenMazeDimensions { width: u32, height: u32 },
    #[error("density must lie in [0, 1), got {0}")]
    BadDensity(f64),
    #[error("no solvable map found within {attempts} attempts")]
    RetryBudgetExhausted { attempts: u32 },
}

/// A generated map together with the number of regeneration attempts that
/// were needed to reach a solvable one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Generated {
    pub map: GridMap,
    pub retries: u32,
}

/// Generates a map whose non-terminal cells are independently blocked with
/// probability `density`.
///
/// Attempt `k` (0-based) draws from `SplitMix64::new(seed + k)`, scanning
/// cells in row-major order and blocking a cell when the draw is below
/// `density`. The first attempt whose map the oracle reports solvable is
/// returned; `retries` records how many attempts failed before it.
pub fn generate_obstacle_field(
    width: u32,
    height: u32,
    density: f64,
    seed: u64,
) -> Result<Generated, GenError> {
    if width < 2 || height < 2 {
        return Err(GenError::TooSmall {
            width,
            height,
            min: 2,
        });
    }
    if !(0.0..1.0).contains(&density) {
        return Err(GenError::BadDensity(density));
    }
    let start = Cell::new(0, 0);
    let goal = Cell::new(width - 1, height - 1);

    for attempt in 0..RETRY_BUDGET {
        let mut rng = SplitMix64::new(seed.wrapping_add(u64::from(attempt)));
        let mut blocked = Vec::new();
        for y in 0..height {
            for x in 0..width {
                let cell = Cell::new(x, y);
                if cell == start || cell == goal {
                    continue;
                }
                if rng.next_f64() < density {
                    blocked.push(cell);
                }
            }
        }
        let map = GridMap::new(width, height, blocked, start, goal)
            .expect("terminal cells are never blocked");
        if dijkstra_cost(&map, start, goal)
            .expect("terminal cells are free")
            .is_reachable()
        {
            return Ok(Generated {
                map,
                retries: attempt,
            });
        }
    }
    Err(GenError::RetryBudgetExhausted {
        attempts: RETRY_BUDGET,
    })
}

/// Carves a perfect maze with the recursive-backtracker algorithm.
///
/// Dimensions must be odd and at least 5. Passage cells live on the even
/// lattice `(2i, 2j)`; carving removes the wall cell between two lattice
/// cells. The result is a spanning tree of the lattice, so exactly one
/// simple path exists between any two free cells.
pub fn generate_maze(width: u32, height: u32, seed: u64) -> Result<GridMap, GenError> {
    if width.is_multiple_of(2) || height.is_multiple_of(2) {
        return Err(GenError::EvenMazeDimensions { width, height });
    }
    if width < 5 || height < 5 {
        return Err(GenError::TooSmall {
            width,
            height,
            min: 5,
        });
    }

    let cols = width.div_ceil(2); // lattice columns
    let rows = height.div_ceil(2);
    let mut free = vec![false; (width * height) as usize];
    let mark = |free: &mut Vec<bool>, c: Cell| free[(c.y * width + c.x) as usize] = true;

    let mut visited = vec![false; (cols * rows) as usize];
    let mut stack = vec![(0u32, 0u32)];
    visited[0] = true;
    mark(&mut free, Cell::new(0, 0));
    let mut rng = SplitMix64::new(seed);

    while let Some(&(cx, cy)) = stack.last() {
        // Unvisited lattice neighbors in fixed N, E, S, W order.
        let mut options = Vec::with_capacity(4);
        for (dx, dy) in crate::grid::DIRECTIONS {
            let nx = cx as i64 + dx;
            let ny = cy as i64 + dy;
            if nx < 0 || ny < 0 || nx >= i64::from(cols) || ny >= i64::from(rows) {
                continue;
            }
            if !visited[(ny as u32 * cols + nx as u32) as usize] {
                options.push((nx as u32, ny as u32));
            }
        }
        if options.is_empty() {
            stack.pop();
            continue;
        }
        let (nx, ny) = options[rng.next_below(options.len() as u64) as usize];
        visited[(ny * cols + nx) as usize] = true;
        // Carve the wall between (cx,cy) and (nx,ny), then the cell itself.
        let wall = Cell::new(cx + nx, cy + ny); // midpoint on the full grid
        mark(&mut free, wall);
        mark(&mut free, Cell::new(2 * nx, 2 * ny));
        stack.push((nx, ny));
    }

    let blocked = (0..height)
        .flat_map(|y| (0..width).map(move |x| Cell::new(x, y)))
        .filter(|c| !free[(c.y * width + c.x) as usize]);
    let start = Cell::new(0, 0);
    let goal = Cell::new(width - 1, height - 1);
    let map = GridMap::new(width, height, blocked, start, goal)
        .expect("lattice corners are always carved");
    debug_assert!(dijkstra_cost(&map, start, goal)
        .expect("terminal cells are free")
        .is_reachable());
    Ok(map)
}
