//! Tile layouts for the two schemes.
//!
//! A layout is a rectangular grid in which each cell is either absent or a
//! surface-code tile with exactly one [`TileRole`]. Three families exist:
//!
//! * `SpbcLinear`: two rows. The top row holds the Y-state tile, the data
//!   tiles and the magic-storage tile; the bottom row is a routing lane. This
//!   gives `2 * (num_lq + 2)` tiles.
//! * `OneLane`: every data tile sits in its own 2x2 cell with three routing
//!   tiles (3:1 routing:data in the bulk).
//! * `OneLaneCondensed`: 2x2 blocks of data tiles in 3x3 cells with five
//!   routing tiles (5:4 routing:data in the bulk).
//!
//! The lane layouts are wrapped in a routing ring, and a port row above and
//! below carries factory ports (and any storage tiles) at evenly spaced
//! columns.

use std::collections::VecDeque;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tile {
    pub row: usize,
    pub col: usize,
}

impl Tile {
    pub const fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }

    pub fn is_adjacent(self, other: Tile) -> bool {
        self.row.abs_diff(other.row) + self.col.abs_diff(other.col) == 1
    }
}

impl fmt::Display for Tile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.row, self.col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TileRole {
    Data,
    Routing,
    MagicStorage,
    YState,
    FactoryPort,
}

impl TileRole {
    pub fn symbol(self) -> char {
        match self {
            TileRole::Data => 'D',
            TileRole::Routing => '.',
            TileRole::MagicStorage => 'M',
            TileRole::YState => 'Y',
            TileRole::FactoryPort => 'P',
        }
    }

    fn from_symbol(c: char) -> Option<Option<Self>> {
        Some(match c {
            'D' => Some(TileRole::Data),
            '.' => Some(TileRole::Routing),
            'M' => Some(TileRole::MagicStorage),
            'Y' => Some(TileRole::YState),
            'P' => Some(TileRole::FactoryPort),
            ' ' => None,
            _ => return None,
        })
    }

    /// Tiles that can hand a magic state to a merge.
    pub fn is_magic_source(self) -> bool {
        matches!(self, TileRole::MagicStorage | TileRole::FactoryPort)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LayoutKind {
    SpbcLinear,
    OneLane,
    OneLaneCondensed,
}

impl LayoutKind {
    pub fn name(self) -> &'static str {
        match self {
            LayoutKind::SpbcLinear => "spbc-linear",
            LayoutKind::OneLane => "one-lane",
            LayoutKind::OneLaneCondensed => "one-lane-condensed",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "spbc-linear" | "linear" => Some(LayoutKind::SpbcLinear),
            "one-lane" | "1-lane" => Some(LayoutKind::OneLane),
            "one-lane-condensed" | "1-lane-condensed" | "condensed" => {
                Some(LayoutKind::OneLaneCondensed)
            }
            _ => None,
        }
    }
}

impl fmt::Display for LayoutKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Geometry knobs for the lane layouts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayoutConfig {
    /// Column spacing between factory ports on the top and bottom rows.
    pub port_spacing: usize,
}

impl Default for LayoutConfig {
    fn default() -> Self {
        Self { port_spacing: 2 }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LayoutError {
    #[error("data tile {0} has no routing neighbor")]
    IsolatedData(Tile),
    #[error("data tiles {0} and {1} are not connected through routing tiles")]
    Disconnected(Tile, Tile),
    #[error("factory port {0} is not on the layout boundary")]
    InteriorPort(Tile),
    #[error("magic source {0} has no routing neighbor")]
    UnreachableSource(Tile),
    #[error("malformed layout text: {0}")]
    Text(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    kind: LayoutKind,
    rows: usize,
    cols: usize,
    grid: Vec<Option<TileRole>>,
    data_positions: Vec<Tile>,
    boundary_ports: Vec<Tile>,
    /// Rectangle `(row0, col0, rows, cols)` tiled by whole unit cells.
    bulk: (usize, usize, usize, usize),
}

pub fn plan_layout(num_lq: usize, kind: LayoutKind, num_storage: usize) -> Layout {
    plan_layout_with(num_lq, kind, num_storage, &LayoutConfig::default())
}

/// Builds a layout for `num_lq` data qubits. `num_storage` extra
/// magic-storage tiles are placed next to ports on the lane layouts; the
/// linear layout always carries exactly one.
pub fn plan_layout_with(
    num_lq: usize,
    kind: LayoutKind,
    num_storage: usize,
    config: &LayoutConfig,
) -> Layout {
    assert!(num_lq >= 1, "layout needs at least one data qubit");
    match kind {
        LayoutKind::SpbcLinear => linear(num_lq),
        LayoutKind::OneLane => lanes(num_lq, kind, 1, num_storage, config),
        LayoutKind::OneLaneCondensed => lanes(num_lq, kind, 2, num_storage, config),
    }
}

fn linear(n: usize) -> Layout {
    let cols = n + 2;
    let mut grid = vec![Some(TileRole::Routing); 2 * cols];
    grid[0] = Some(TileRole::YState);
    grid[cols - 1] = Some(TileRole::MagicStorage);
    let mut data_positions = Vec::with_capacity(n);
    for q in 0..n {
        grid[q + 1] = Some(TileRole::Data);
        data_positions.push(Tile::new(0, q + 1));
    }
    Layout {
        kind: LayoutKind::SpbcLinear,
        rows: 2,
        cols,
        grid,
        data_positions,
        boundary_ports: Vec::new(),
        bulk: (0, 0, 2, cols),
    }
}

/// `block` is the side of the square data block in each unit cell.
fn lanes(
    n: usize,
    kind: LayoutKind,
    block: usize,
    num_storage: usize,
    config: &LayoutConfig,
) -> Layout {
    let per_cell = block * block;
    let cells = n.div_ceil(per_cell);
    let cells_x = (cells as f64).sqrt().ceil() as usize;
    let cells_y = cells.div_ceil(cells_x);
    let pitch = block + 1;
    // port row, leading lane, cells, port row
    let cols = 1 + pitch * cells_x;
    let rows = 2 + 1 + pitch * cells_y;
    let mut grid = vec![None; rows * cols];
    for r in 1..rows - 1 {
        for c in 0..cols {
            grid[r * cols + c] = Some(TileRole::Routing);
        }
    }

    let mut data_positions = Vec::with_capacity(n);
    'fill: for cy in 0..cells_y {
        for cx in 0..cells_x {
            for dr in 0..block {
                for dc in 0..block {
                    if data_positions.len() == n {
                        break 'fill;
                    }
                    let t = Tile::new(2 + cy * pitch + dr, 1 + cx * pitch + dc);
                    grid[t.row * cols + t.col] = Some(TileRole::Data);
                    data_positions.push(t);
                }
            }
        }
    }

    let spacing = config.port_spacing.max(1);
    let port_cols: Vec<usize> = (0..cols).skip(spacing / 2).step_by(spacing).collect();
    let mut boundary_ports = Vec::new();
    for &row in &[0, rows - 1] {
        for &c in &port_cols {
            grid[row * cols + c] = Some(TileRole::FactoryPort);
            boundary_ports.push(Tile::new(row, c));
        }
    }
    // storage goes into free port-row cells beside ports, top and bottom alternating
    let mut placed = 0;
    'storage: for &c in &port_cols {
        for &row in &[0, rows - 1] {
            for cand in [c + 1, c.wrapping_sub(1)] {
                if placed == num_storage {
                    break 'storage;
                }
                if cand < cols && grid[row * cols + cand].is_none() {
                    grid[row * cols + cand] = Some(TileRole::MagicStorage);
                    placed += 1;
                }
            }
        }
    }

    Layout {
        kind,
        rows,
        cols,
        grid,
        data_positions,
        boundary_ports,
        bulk: (2, 1, pitch * cells_y, pitch * cells_x),
    }
}

impl Layout {
    /// Parses the text grid written by [`Layout::to_text`]. Data qubits are
    /// numbered in row-major order. Used for hand-built (possibly invalid)
    /// layouts; call [`Layout::validate`] to check invariants.
    pub fn from_text(kind: LayoutKind, text: &str) -> Result<Self, LayoutError> {
        let lines: Vec<&str> = text.lines().collect();
        let rows = lines.len();
        let cols = lines.iter().map(|l| l.chars().count()).max().unwrap_or(0);
        if rows == 0 || cols == 0 {
            return Err(LayoutError::Text("empty grid".into()));
        }
        let mut grid = vec![None; rows * cols];
        let mut data_positions = Vec::new();
        let mut boundary_ports = Vec::new();
        for (r, line) in lines.iter().enumerate() {
            for (c, ch) in line.chars().enumerate() {
                let role = TileRole::from_symbol(ch)
                    .ok_or_else(|| LayoutError::Text(format!("unknown symbol `{ch}`")))?;
                grid[r * cols + c] = role;
                match role {
                    Some(TileRole::Data) => data_positions.push(Tile::new(r, c)),
                    Some(TileRole::FactoryPort) => boundary_ports.push(Tile::new(r, c)),
                    _ => {}
                }
            }
        }
        Ok(Self {
            kind,
            rows,
            cols,
            grid,
            data_positions,
            boundary_ports,
            bulk: (0, 0, rows, cols),
        })
    }

    pub fn kind(&self) -> LayoutKind {
        self.kind
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn num_lq(&self) -> usize {
        self.data_positions.len()
    }

    pub fn data_positions(&self) -> &[Tile] {
        &self.data_positions
    }

    pub fn data_tile(&self, qubit: usize) -> Tile {
        self.data_positions[qubit]
    }

    pub fn boundary_ports(&self) -> &[Tile] {
        &self.boundary_ports
    }

    pub fn role(&self, t: Tile) -> Option<TileRole> {
        if t.row < self.rows && t.col < self.cols {
            self.grid[t.row * self.cols + t.col]
        } else {
            None
        }
    }

    /// Dense index for per-tile tables, `row * cols + col`.
    pub fn index(&self, t: Tile) -> usize {
        t.row * self.cols + t.col
    }

    pub fn cell_count(&self) -> usize {
        self.rows * self.cols
    }

    pub fn tiles(&self) -> impl Iterator<Item = (Tile, TileRole)> + '_ {
        self.grid
            .iter()
            .enumerate()
            .filter_map(move |(i, r)| r.map(|role| (Tile::new(i / self.cols, i % self.cols), role)))
    }

    pub fn tile_count(&self) -> usize {
        self.grid.iter().flatten().count()
    }

    pub fn count_role(&self, role: TileRole) -> usize {
        self.grid.iter().flatten().filter(|&&r| r == role).count()
    }

    /// Tiles from which magic states can be merged into the layout.
    pub fn magic_sources(&self) -> Vec<Tile> {
        self.tiles()
            .filter(|(_, r)| r.is_magic_source())
            .map(|(t, _)| t)
            .collect()
    }

    /// `(routing, data)` counts over the region tiled by whole unit cells.
    pub fn bulk_role_counts(&self) -> (usize, usize) {
        let (r0, c0, h, w) = self.bulk;
        let mut routing = 0;
        let mut data = 0;
        for r in r0..r0 + h {
            for c in c0..c0 + w {
                match self.role(Tile::new(r, c)) {
                    Some(TileRole::Routing) => routing += 1,
                    Some(TileRole::Data) => data += 1,
                    _ => {}
                }
            }
        }
        (routing, data)
    }

    /// 4-neighbors that are tiles, in fixed order up, down, left, right.
    pub fn neighbors(&self, t: Tile) -> impl Iterator<Item = Tile> + '_ {
        let up = t.row.checked_sub(1).map(|r| Tile::new(r, t.col));
        let down = Some(Tile::new(t.row + 1, t.col));
        let left = t.col.checked_sub(1).map(|c| Tile::new(t.row, c));
        let right = Some(Tile::new(t.row, t.col + 1));
        [up, down, left, right]
            .into_iter()
            .flatten()
            .filter(move |n| self.role(*n).is_some())
    }

    /// Grid adjacency as a sorted edge list. Route interiors are restricted
    /// to routing tiles by the router, not here.
    pub fn adjacency(&self) -> Vec<(Tile, Tile)> {
        let mut edges = Vec::new();
        for (t, _) in self.tiles() {
            for n in [Tile::new(t.row + 1, t.col), Tile::new(t.row, t.col + 1)] {
                if self.role(n).is_some() {
                    edges.push((t, n));
                }
            }
        }
        edges
    }

    fn boundary(&self, t: Tile) -> bool {
        t.row == 0
            || t.col == 0
            || t.row + 1 == self.rows
            || t.col + 1 == self.cols
            || [(0isize, 1isize), (0, -1), (1, 0), (-1, 0)]
                .iter()
                .any(|(dr, dc)| {
                    let r = t.row as isize + dr;
                    let c = t.col as isize + dc;
                    r >= 0 && c >= 0 && self.role(Tile::new(r as usize, c as usize)).is_none()
                })
    }

    pub fn validate(&self) -> Result<(), LayoutError> {
        let has_routing = |t: Tile| {
            self.neighbors(t)
                .any(|n| self.role(n) == Some(TileRole::Routing))
        };
        for &d in &self.data_positions {
            if !has_routing(d) {
                return Err(LayoutError::IsolatedData(d));
            }
        }
        for (t, role) in self.tiles() {
            if role == TileRole::FactoryPort && !self.boundary(t) {
                return Err(LayoutError::InteriorPort(t));
            }
            if role.is_magic_source()
                && !has_routing(t)
                && !self
                    .neighbors(t)
                    .any(|n| self.role(n) == Some(TileRole::Data))
            {
                return Err(LayoutError::UnreachableSource(t));
            }
        }
        // every data tile reachable from the first through routing tiles
        if let Some(&first) = self.data_positions.first() {
            let mut seen = vec![false; self.cell_count()];
            let mut queue = VecDeque::new();
            for n in self.neighbors(first) {
                if self.role(n) == Some(TileRole::Routing) {
                    seen[self.index(n)] = true;
                    queue.push_back(n);
                }
            }
            while let Some(t) = queue.pop_front() {
                for n in self.neighbors(t) {
                    if self.role(n) == Some(TileRole::Routing) && !seen[self.index(n)] {
                        seen[self.index(n)] = true;
                        queue.push_back(n);
                    }
                }
            }
            for &d in &self.data_positions[1..] {
                if !self.neighbors(d).any(|n| seen[self.index(n)]) {
                    return Err(LayoutError::Disconnected(first, d));
                }
            }
        }
        Ok(())
    }

    /// One character per cell: `D` data, `.` routing, `M` magic storage,
    /// `Y` Y state, `P` factory port, space for no tile.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity((self.cols + 1) * self.rows);
        for r in 0..self.rows {
            let line: String = (0..self.cols)
                .map(|c| self.role(Tile::new(r, c)).map_or(' ', TileRole::symbol))
                .collect();
            out.push_str(line.trim_end());
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_tile_counts() {
        assert_eq!(
            plan_layout(100, LayoutKind::SpbcLinear, 1).tile_count(),
            204
        );
        let l = plan_layout(1, LayoutKind::SpbcLinear, 1);
        assert_eq!(l.tile_count(), 6);
        assert_eq!(l.count_role(TileRole::YState), 1);
        assert_eq!(l.count_role(TileRole::MagicStorage), 1);
        l.validate().unwrap();
        for n in 1..=10_000 {
            assert_eq!(
                plan_layout(n, LayoutKind::SpbcLinear, 1).tile_count(),
                2 * (n + 2)
            );
        }
    }

    #[test]
    fn linear_two_adjacency() {
        let l = plan_layout(2, LayoutKind::SpbcLinear, 1);
        assert_eq!(l.to_text(), "YDDM\n....\n");
        // 2x4 ladder: 3 + 3 horizontal, 4 vertical
        let edges = l.adjacency();
        assert_eq!(edges.len(), 10);
        // the routing row alone is a path
        let routing_edges = edges
            .iter()
            .filter(|(a, b)| {
                l.role(*a) == Some(TileRole::Routing) && l.role(*b) == Some(TileRole::Routing)
            })
            .count();
        assert_eq!(routing_edges, 3);
    }

    #[test]
    fn single_edge_grid() {
        let l = Layout::from_text(LayoutKind::OneLane, "D.").unwrap();
        assert_eq!(l.adjacency(), vec![(Tile::new(0, 0), Tile::new(0, 1))]);
    }

    #[test]
    fn isolated_data_is_reported() {
        let l = Layout::from_text(LayoutKind::OneLane, "D..\n.YY\nYDY").unwrap();
        assert_eq!(
            l.validate(),
            Err(LayoutError::IsolatedData(Tile::new(2, 1)))
        );
        let l = Layout::from_text(LayoutKind::OneLane, "D.Y.D").unwrap();
        assert_eq!(
            l.validate(),
            Err(LayoutError::Disconnected(Tile::new(0, 0), Tile::new(0, 4)))
        );
    }

    fn bulk_counts_by_hand(l: &Layout, r0: usize, c0: usize, h: usize, w: usize) -> (usize, usize) {
        let text = l.to_text();
        let lines: Vec<Vec<char>> = text.lines().map(|s| s.chars().collect()).collect();
        let mut routing = 0;
        let mut data = 0;
        for line in &lines[r0..r0 + h] {
            for c in c0..c0 + w {
                match line.get(c) {
                    Some('.') => routing += 1,
                    Some('D') => data += 1,
                    _ => {}
                }
            }
        }
        (routing, data)
    }

    #[test]
    fn condensed_bulk_ratio() {
        let l = plan_layout(16, LayoutKind::OneLaneCondensed, 4);
        l.validate().unwrap();
        // two cells square, each 3x3, below the port row and leading lane
        assert_eq!(bulk_counts_by_hand(&l, 2, 1, 6, 6), (20, 16));
        assert_eq!(l.bulk_role_counts(), (20, 16));
        assert_eq!(l.count_role(TileRole::MagicStorage), 4);
        assert_eq!(l.count_role(TileRole::Data), 16);
    }

    #[test]
    fn one_lane_bulk_ratio() {
        let l = plan_layout(9, LayoutKind::OneLane, 0);
        l.validate().unwrap();
        assert_eq!(bulk_counts_by_hand(&l, 2, 1, 6, 6), (27, 9));
        assert_eq!(l.bulk_role_counts(), (27, 9));
    }

    #[test]
    fn lane_layouts_valid_for_many_sizes() {
        for kind in [LayoutKind::OneLane, LayoutKind::OneLaneCondensed] {
            for n in 1..=120 {
                let l = plan_layout(n, kind, n % 5);
                assert_eq!(l.num_lq(), n);
                l.validate().unwrap_or_else(|e| panic!("{kind} n={n}: {e}"));
                let mut seen = l.data_positions().to_vec();
                seen.sort();
                seen.dedup();
                assert_eq!(seen.len(), n);
                for p in l.boundary_ports() {
                    assert!(p.row == 0 || p.row + 1 == l.rows());
                }
            }
        }
    }

    #[test]
    fn text_round_trip() {
        let l = plan_layout(7, LayoutKind::OneLaneCondensed, 2);
        let back = Layout::from_text(LayoutKind::OneLaneCondensed, &l.to_text()).unwrap();
        assert_eq!(back.to_text(), l.to_text());
        let sorted = |l: &Layout| {
            let mut v = l.data_positions().to_vec();
            v.sort();
            v
        };
        assert_eq!(sorted(&back), sorted(&l));
        assert_eq!(plan_layout(7, LayoutKind::OneLaneCondensed, 2), l);
    }
}
