//! Grid worlds: bounded, 4-connected, unit-cost maps with blocked cells.
//!
//! Maps are immutable after construction. The ASCII file format is the
//! exchange format for the whole workspace: `#` blocked, `.` free, `S`
//! start, `G` goal, one row per line, LF endings, trailing newline.

use std::fmt;

use serde::de::{self, Deserializer, SeqAccess, Visitor};
use serde::ser::{Serialize, SerializeTuple, Serializer};
use serde::Deserialize;
use thiserror::Error;

/// A cell coordinate. `x` grows east, `y` grows south.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Cell {
    pub x: u32,
    pub y: u32,
}

impl Cell {
    pub fn new(x: u32, y: u32) -> Self {
        Self { x, y }
    }

    /// Manhattan distance `|dx| + |dy|`.
    pub fn manhattan(self, other: Cell) -> u64 {
        let dx = (i64::from(self.x) - i64::from(other.x)).unsigned_abs();
        let dy = (i64::from(self.y) - i64::from(other.y)).unsigned_abs();
        dx + dy
    }

    /// Chebyshev distance `max(|dx|, |dy|)`, used by the sensing radius.
    pub fn chebyshev(self, other: Cell) -> u64 {
        let dx = (i64::from(self.x) - i64::from(other.x)).unsigned_abs();
        let dy = (i64::from(self.y) - i64::from(other.y)).unsigned_abs();
        dx.max(dy)
    }

    /// True when the two cells are 4-adjacent (unit Manhattan distance).
    pub fn adjacent(self, other: Cell) -> bool {
        self.manhattan(other) == 1
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

// Cells serialize as `[x, y]` pairs; that is the wire format for move lists
// and witness paths.
impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut t = serializer.serialize_tuple(2)?;
        t.serialize_element(&self.x)?;
        t.serialize_element(&self.y)?;
        t.end()
    }
}

impl<'de> Deserialize<'de> for Cell {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct CellVisitor;
        impl<'de> Visitor<'de> for CellVisitor {
            type Value = Cell;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a [x, y] coordinate pair")
            }
            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<Cell, A::Error> {
                let x = seq
                    .next_element()?
                    .ok_or_else(|| de::Error::invalid_length(0, &self))?;
                let y = seq
                    .next_element()?
                    .ok_or_else(|| de::Error::invalid_length(1, &self))?;
                Ok(Cell::new(x, y))
            }
        }
        deserializer.deserialize_tuple(2, CellVisitor)
    }
}

/// The four moves in fixed expansion order: north, east, south, west.
pub const DIRECTIONS: [(i64, i64); 4] = [(0, -1), (1, 0), (0, 1), (-1, 0)];

/// Heuristic estimate of remaining cost to the goal.
///
/// Both kinds are admissible on 4-connected unit-cost grids: `Manhattan`
/// never exceeds the true shortest distance and `Zero` degenerates the
/// search to uniform-cost order.
#[derive(Clone, Copy, PartialEq, Eq, Debug, serde::Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Heuristic {
    Manhattan,
    Zero,
}

impl Heuristic {
    pub fn value(self, cell: Cell, goal: Cell) -> u64 {
        match self {
            Heuristic::Manhattan => cell.manhattan(goal),
            Heuristic::Zero => 0,
        }
    }
}

/// Read access to terrain passability, shared by the true map and the
/// partially observed map the real-time engine plans on.
pub trait TerrainView {
    fn width(&self) -> u32;
    fn height(&self) -> u32;

    /// True when `cell` is in bounds and not (known to be) blocked.
    fn passable(&self, cell: Cell) -> bool;
}

#[derive(Error, Debug, PartialEq, Eq)]
pub enum MapError {
    #[error("map dimensions must be at least 1x1, got {width}x{height}")]
    EmptyGrid { width: u32, height: u32 },
    #[error("cell {0} is out of bounds")]
    OutOfBounds(Cell),
    #[error("start and goal must differ, both are {0}")]
    StartGoalIdentical(Cell),
    #[error("start cell {0} is blocked")]
    StartBlocked(Cell),
    #[error("goal cell {0} is blocked")]
    GoalBlocked(Cell),
}

/// A bounded 4-connected world with unit step cost.
///
/// Invariants, enforced at construction: start and goal are distinct,
/// unblocked, in-bounds cells.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GridMap {
    width: u32,
    height: u32,
    blocked: Vec<bool>,
    start: Cell,
    goal: Cell,
}

impl GridMap {
    pub fn new(
        width: u32,
        height: u32,
        blocked_cells: impl IntoIterator<Item = Cell>,
        start: Cell,
        goal: Cell,
    ) -> Result<Self, MapError> {
        if width == 0 || height == 0 {
            return Err(MapError::EmptyGrid { width, height });
        }
        let mut blocked = vec![false; width as usize * height as usize];
        for cell in blocked_cells {
            if cell.x >= width || cell.y >= height {
                return Err(MapError::OutOfBounds(cell));
            }
            blocked[(cell.y * width + cell.x) as usize] = true;
        }
        let map = Self {
            width,
            height,
            blocked,
            start,
            goal,
        };
        if !map.in_bounds(start) {
            return Err(MapError::OutOfBounds(start));
        }
        if !map.in_bounds(goal) {
            return Err(MapError::OutOfBounds(goal));
        }
        if start == goal {
            return Err(MapError::StartGoalIdentical(start));
        }
        if map.is_blocked(start) {
            return Err(MapError::StartBlocked(start));
        }
        if map.is_blocked(goal) {
            return Err(MapError::GoalBlocked(goal));
        }
        Ok(map)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn start(&self) -> Cell {
        self.start
    }

    pub fn goal(&self) -> Cell {
        self.goal
    }

    pub fn in_bounds(&self, cell: Cell) -> bool {
        cell.x < self.width && cell.y < self.height
    }

    /// Whether `cell` is blocked. Out-of-bounds cells count as blocked.
    pub fn is_blocked(&self, cell: Cell) -> bool {
        if !self.in_bounds(cell) {
            return true;
        }
        self.blocked[(cell.y * self.width + cell.x) as usize]
    }

    /// Unblocked 4-neighbors of `cell` in fixed north, east, south, west
    /// order. Out-of-bounds input is a usage error.
    pub fn neighbors(&self, cell: Cell) -> Result<Vec<Cell>, MapError> {
        if !self.in_bounds(cell) {
            return Err(MapError::OutOfBounds(cell));
        }
        Ok(neighbors_in(self, cell).collect())
    }

    pub fn free_cell_count(&self) -> usize {
        self.blocked.iter().filter(|&&b| !b).count()
    }

    /// All free cells in row-major order.
    pub fn free_cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.height).flat_map(move |y| {
            (0..self.width)
                .map(move |x| Cell::new(x, y))
                .filter(move |&c| !self.is_blocked(c))
        })
    }
}

impl TerrainView for GridMap {
    fn width(&self) -> u32 {
        self.width
    }

    fn height(&self) -> u32 {
        self.height
    }

    fn passable(&self, cell: Cell) -> bool {
        self.in_bounds(cell) && !self.is_blocked(cell)
    }
}

/// Passable 4-neighbors of `cell` under an arbitrary terrain view, in the
/// fixed north, east, south, west order.
pub fn neighbors_in<V: TerrainView>(view: &V, cell: Cell) -> impl Iterator<Item = Cell> + '_ {
    DIRECTIONS.into_iter().filter_map(move |(dx, dy)| {
        let nx = i64::from(cell.x) + dx;
        let ny = i64::from(cell.y) + dy;
        if nx < 0 || ny < 0 || nx >= i64::from(view.width()) || ny >= i64::from(view.height()) {
            return None;
        }
        let n = Cell::new(nx as u32, ny as u32);
        view.passable(n).then_some(n)
    })
}

#[derive(Error, Debug, PartialEq, Eq)]
pub enum ParseMapError {
    #[error("map text is empty")]
    Empty,
    #[error("line {line}: row has {found} cells, expected {expected}")]
    RaggedRow {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}, column {column}: unknown character {ch:?}")]
    UnknownCharacter { line: usize, column: usize, ch: char },
    #[error("line {line}, column {column}: duplicate start cell")]
    DuplicateStart { line: usize, column: usize },
    #[error("line {line}, column {column}: duplicate goal cell")]
    DuplicateGoal { line: usize, column: usize },
    #[error("no start cell 'S' in map")]
    MissingStart,
    #[error("no goal cell 'G' in map")]
    MissingGoal,
    #[error("invalid map: {0}")]
    Invalid(#[from] MapError),
}

/// Parses the ASCII map format. Lines and columns in errors are 1-based.
pub fn parse_map(text: &str) -> Result<GridMap, ParseMapError> {
    let mut width = None;
    let mut blocked = Vec::new();
    let mut start = None;
    let mut goal = None;
    let mut height = 0u32;

    for (row, line) in text.lines().enumerate() {
        let line_no = row + 1;
        let cells: Vec<char> = line.chars().collect();
        match width {
            None => {
                if cells.is_empty() {
                    return Err(ParseMapError::Empty);
                }
                width = Some(cells.len());
            }
            Some(w) if cells.len() != w => {
                return Err(ParseMapError::RaggedRow {
                    line: line_no,
                    expected: w,
                    found: cells.len(),
                });
            }
            _ => {}
        }
        for (col, ch) in cells.into_iter().enumerate() {
            let cell = Cell::new(col as u32, row as u32);
            match ch {
                '.' => {}
                '#' => blocked.push(cell),
                'S' => {
                    if start.replace(cell).is_some() {
                        return Err(ParseMapError::DuplicateStart {
                            line: line_no,
                            column: col + 1,
                        });
                    }
                }
                'G' => {
                    if goal.replace(cell).is_some() {
                        return Err(ParseMapError::DuplicateGoal {
                            line: line_no,
                            column: col + 1,
                        });
                    }
                }
                other => {
                    return Err(ParseMapError::UnknownCharacter {
                        line: line_no,
                        column: col + 1,
                        ch: other,
                    });
                }
            }
        }
        height += 1;
    }

    let width = width.ok_or(ParseMapError::Empty)?;
    let start = start.ok_or(ParseMapError::MissingStart)?;
    let goal = goal.ok_or(ParseMapError::MissingGoal)?;
    Ok(GridMap::new(width as u32, height, blocked, start, goal)?)
}

/// Renders a map in the canonical ASCII form: LF line endings and a
/// trailing newline. `parse_map(render_map(m)) == m` for every map.
pub fn render_map(map: &GridMap) -> String {
    let mut out = String::with_capacity((map.width as usize + 1) * map.height as usize);
    for y in 0..map.height {
        for x in 0..map.width {
            let cell = Cell::new(x, y);
            let ch = if cell == map.start {
                'S'
            } else if cell == map.goal {
                'G'
            } else if map.is_blocked(cell) {
                '#'
            } else {
                '.'
            };
            out.push(ch);
        }
        out.push('\n');
    }
    out
}
