//! Direct Clifford+T to lattice-surgery compilation.
//!
//! Gates are scheduled slice by slice onto a [`Layout`]. At every slice the
//! DAG-ready gates are visited in ascending index and admitted greedily when
//! their data tiles are free and, for merges, a shortest route through free
//! routing tiles exists. Routes within one slice are vertex-disjoint. There is
//! no backtracking.
//!
//! Timing (in slices): H occupies its tile and one routing neighbor for 3, S
//! and Sdg for 2 (Y state initialized in place), CX is a 2-slice merge through
//! routing tiles, T/Tdg is a 1-slice merge with a magic source followed, per
//! the [`CorrectionPolicy`], by a 2-slice S correction. Paulis are frame
//! updates and take no time.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashSet, VecDeque};
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::circuit::{build_dag, CircuitSummary, GateKind, LogicalCircuit};
use crate::layout::{Layout, Tile, TileRole};
use crate::magic::ConsumptionProfile;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GateTiming {
    pub h: usize,
    pub s: usize,
    pub t_merge: usize,
    pub cx: usize,
    pub pauli: usize,
}

impl Default for GateTiming {
    fn default() -> Self {
        Self {
            h: 3,
            s: 2,
            t_merge: 1,
            cx: 2,
            pauli: 0,
        }
    }
}

/// Which T gates need the S correction after their merge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorrectionPolicy {
    /// Every second T gate in circuit order (the 2nd, 4th, ...).
    Alternate,
    Always,
    Never,
    /// Each T independently with probability 1/2.
    Seeded(u64),
}

impl CorrectionPolicy {
    /// Correction flag for each T/Tdg gate, indexed by T ordinal.
    pub fn flags(self, t_count: usize) -> Vec<bool> {
        match self {
            CorrectionPolicy::Alternate => (0..t_count).map(|i| i % 2 == 1).collect(),
            CorrectionPolicy::Always => vec![true; t_count],
            CorrectionPolicy::Never => vec![false; t_count],
            CorrectionPolicy::Seeded(seed) => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                (0..t_count).map(|_| rng.gen_bool(0.5)).collect()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompilerConfig {
    pub timing: GateTiming,
    pub correction: CorrectionPolicy,
    /// A stalled schedule fails after this many times the slice count
    /// reached when it stalled.
    pub retry_factor: usize,
}

impl Default for CompilerConfig {
    fn default() -> Self {
        Self {
            timing: GateTiming::default(),
            correction: CorrectionPolicy::Alternate,
            retry_factor: 10,
        }
    }
}

/// Number of magic states the factories can hand over in a given slice.
pub trait MagicAvailability {
    fn granted(&mut self, slice: usize) -> usize;
}

/// States are always available; min-storage sizes the factories afterwards.
#[derive(Debug, Clone, Copy, Default)]
pub struct Unlimited;

impl MagicAvailability for Unlimited {
    fn granted(&mut self, _slice: usize) -> usize {
        usize::MAX
    }
}

impl<F: FnMut(usize) -> usize> MagicAvailability for F {
    fn granted(&mut self, slice: usize) -> usize {
        self(slice)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OpKind {
    /// Merge along a route. Endpoints are data tiles or magic sources, the
    /// interior is routing tiles.
    MergeRoute(Vec<Tile>),
    /// Single-patch operation, optionally using one adjacent routing tile.
    PatchLocal { tile: Tile, ancilla: Option<Tile> },
    /// Zero-time Pauli frame update.
    PauliFrame { tile: Tile },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SliceOp {
    pub gate: usize,
    pub kind: OpKind,
    pub start: usize,
    pub duration: usize,
    pub magic_consumed: u8,
}

impl SliceOp {
    pub fn end(&self) -> usize {
        self.start + self.duration
    }

    pub fn tiles(&self) -> Vec<Tile> {
        match &self.kind {
            OpKind::MergeRoute(route) => route.clone(),
            OpKind::PatchLocal { tile, ancilla } => {
                std::iter::once(*tile).chain(*ancilla).collect()
            }
            OpKind::PauliFrame { tile } => vec![*tile],
        }
    }

    pub fn is_active(&self, slice: usize) -> bool {
        self.start <= slice && slice < self.end()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Slice<'a> {
    pub index: usize,
    pub ops: Vec<&'a SliceOp>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompilationResult {
    pub num_slices: usize,
    pub profile: ConsumptionProfile,
    /// Tile-slices: every data tile in every slice, plus the routing and
    /// ancilla tiles held by operations.
    pub active_volume: u64,
    pub layout_tiles: usize,
    pub num_lq: usize,
    pub ops: Vec<SliceOp>,
    /// States granted by the availability callback per slice.
    pub granted: Vec<usize>,
}

impl CompilationResult {
    pub fn slices(&self) -> Vec<Slice<'_>> {
        let mut slices: Vec<Slice<'_>> = (0..self.num_slices)
            .map(|index| Slice {
                index,
                ops: Vec::new(),
            })
            .collect();
        for op in &self.ops {
            let end = op.end().min(self.num_slices);
            for slice in slices.iter_mut().take(end).skip(op.start) {
                slice.ops.push(op);
            }
        }
        slices
    }

    /// One line per slice listing its operations and routes. Operations
    /// consuming a magic state are marked with `*`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let fmt_op = |op: &SliceOp| {
            let tiles: Vec<String> = op.tiles().iter().map(Tile::to_string).collect();
            let (name, sep) = match op.kind {
                OpKind::MergeRoute(_) => ("merge", "-"),
                OpKind::PatchLocal { .. } => ("local", "+"),
                OpKind::PauliFrame { .. } => ("frame", ""),
            };
            let star = if op.magic_consumed > 0 { "*" } else { "" };
            format!("g{} {}{} {}", op.gate, name, star, tiles.join(sep))
        };
        for slice in self.slices() {
            let mut ops: Vec<String> = slice.ops.iter().map(|op| fmt_op(op)).collect();
            ops.extend(
                self.ops
                    .iter()
                    .filter(|op| op.duration == 0 && op.start == slice.index)
                    .map(fmt_op),
            );
            let _ = writeln!(out, "slice {}: {}", slice.index, ops.join(" | "));
        }
        let trailing: Vec<String> = self
            .ops
            .iter()
            .filter(|op| op.duration == 0 && op.start >= self.num_slices)
            .map(fmt_op)
            .collect();
        if !trailing.is_empty() {
            let _ = writeln!(out, "frame: {}", trailing.join(" | "));
        }
        out
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CompileError {
    #[error("layout has {available} data tiles but the circuit needs {needed}")]
    Uncovered { needed: usize, available: usize },
    #[error("gate {gate} could not be scheduled (stalled since slice {since}, gave up at slice {slice})")]
    Unroutable {
        gate: usize,
        since: usize,
        slice: usize,
    },
}

/// Breadth-first search state reused across queries.
struct Router {
    epoch: u32,
    seen: Vec<u32>,
    parent: Vec<usize>,
    queue: VecDeque<usize>,
}

impl Router {
    fn new(cells: usize) -> Self {
        Self {
            epoch: 0,
            seen: vec![0; cells],
            parent: vec![usize::MAX; cells],
            queue: VecDeque::new(),
        }
    }

    /// Shortest path of free routing cells from any routing neighbor of
    /// `start` to a cell satisfying `goal`.
    fn search(
        &mut self,
        grid: &Grid,
        start: usize,
        free: impl Fn(usize) -> bool,
        goal: impl Fn(usize) -> bool,
    ) -> Option<Vec<usize>> {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.seen.fill(0);
            self.epoch = 1;
        }
        self.queue.clear();
        for &n in &grid.neighbors[start] {
            if grid.routing[n] && free(n) {
                self.seen[n] = self.epoch;
                self.parent[n] = usize::MAX;
                self.queue.push_back(n);
            }
        }
        while let Some(cur) = self.queue.pop_front() {
            if goal(cur) {
                let mut path = vec![cur];
                let mut p = self.parent[cur];
                while p != usize::MAX {
                    path.push(p);
                    p = self.parent[p];
                }
                path.reverse();
                return Some(path);
            }
            for &n in &grid.neighbors[cur] {
                if grid.routing[n] && self.seen[n] != self.epoch && free(n) {
                    self.seen[n] = self.epoch;
                    self.parent[n] = cur;
                    self.queue.push_back(n);
                }
            }
        }
        None
    }
}

struct Grid {
    cols: usize,
    routing: Vec<bool>,
    source: Vec<bool>,
    neighbors: Vec<Vec<usize>>,
}

impl Grid {
    fn new(layout: &Layout) -> Self {
        let cells = layout.cell_count();
        let mut routing = vec![false; cells];
        let mut source = vec![false; cells];
        let mut neighbors = vec![Vec::new(); cells];
        for (t, role) in layout.tiles() {
            let i = layout.index(t);
            routing[i] = role == TileRole::Routing;
            source[i] = role.is_magic_source();
            neighbors[i] = layout.neighbors(t).map(|n| layout.index(n)).collect();
        }
        Self {
            cols: layout.cols(),
            routing,
            source,
            neighbors,
        }
    }

    fn tile(&self, i: usize) -> Tile {
        Tile::new(i / self.cols, i % self.cols)
    }
}

/// Shortest route from `src` to `dst` whose interior avoids `occupied` and
/// uses only routing tiles. Adjacent endpoints give a two-tile route.
pub fn route(occupied: &HashSet<Tile>, src: Tile, dst: Tile, layout: &Layout) -> Option<Vec<Tile>> {
    if src.is_adjacent(dst) {
        return Some(vec![src, dst]);
    }
    let grid = Grid::new(layout);
    let mut router = Router::new(layout.cell_count());
    let dst_i = layout.index(dst);
    let free = |i: usize| !occupied.contains(&grid.tile(i));
    let path = router.search(&grid, layout.index(src), free, |i| {
        grid.neighbors[i].contains(&dst_i)
    })?;
    let mut tiles = vec![src];
    tiles.extend(path.into_iter().map(|i| grid.tile(i)));
    tiles.push(dst);
    Some(tiles)
}

pub fn compile(
    circuit: &LogicalCircuit,
    layout: &Layout,
    availability: &mut dyn MagicAvailability,
) -> Result<CompilationResult, CompileError> {
    compile_with(circuit, layout, availability, &CompilerConfig::default())
}

struct Scheduler<'a> {
    grid: Grid,
    router: Router,
    layout: &'a Layout,
    busy_until: Vec<usize>,
    timing: GateTiming,
    ops: Vec<SliceOp>,
}

impl Scheduler<'_> {
    fn free(&self, i: usize, t: usize) -> bool {
        self.busy_until[i] <= t
    }

    fn first_free_routing_neighbor(&self, i: usize, t: usize) -> Option<usize> {
        self.grid.neighbors[i]
            .iter()
            .copied()
            .find(|&n| self.grid.routing[n] && self.free(n, t))
    }

    fn lock(&mut self, cells: &[usize], until: usize) {
        for &c in cells {
            self.busy_until[c] = self.busy_until[c].max(until);
        }
    }

    fn push(&mut self, gate: usize, kind: OpKind, start: usize, duration: usize, magic: u8) {
        self.ops.push(SliceOp {
            gate,
            kind,
            start,
            duration,
            magic_consumed: magic,
        });
    }

    /// Returns the completion slice if the gate was admitted at slice `t`.
    fn try_admit(
        &mut self,
        gate: usize,
        kind: GateKind,
        qubits: &[usize],
        corrected: bool,
        t: usize,
        magic_left: usize,
    ) -> Option<usize> {
        let data: Vec<usize> = qubits
            .iter()
            .map(|&q| self.layout.index(self.layout.data_tile(q)))
            .collect();
        if data.iter().any(|&d| !self.free(d, t)) {
            return None;
        }
        let tm = self.timing;
        match kind {
            GateKind::X | GateKind::Y | GateKind::Z => {
                let tile = self.grid.tile(data[0]);
                if tm.pauli == 0 {
                    self.push(gate, OpKind::PauliFrame { tile }, t, 0, 0);
                } else {
                    self.lock(&data, t + tm.pauli);
                    self.push(
                        gate,
                        OpKind::PatchLocal {
                            tile,
                            ancilla: None,
                        },
                        t,
                        tm.pauli,
                        0,
                    );
                }
                Some(t + tm.pauli)
            }
            GateKind::H | GateKind::S | GateKind::Sdg => {
                let dur = if kind == GateKind::H { tm.h } else { tm.s };
                let anc = self.first_free_routing_neighbor(data[0], t)?;
                self.lock(&[data[0], anc], t + dur);
                let kind = OpKind::PatchLocal {
                    tile: self.grid.tile(data[0]),
                    ancilla: Some(self.grid.tile(anc)),
                };
                self.push(gate, kind, t, dur, 0);
                Some(t + dur)
            }
            GateKind::CX => {
                let (a, b) = (data[0], data[1]);
                let busy = &self.busy_until;
                let grid = &self.grid;
                let path = self.router.search(
                    grid,
                    a,
                    |i| busy[i] <= t,
                    |i| grid.neighbors[i].contains(&b),
                )?;
                let mut cells = vec![a];
                cells.extend(path);
                cells.push(b);
                self.lock(&cells, t + tm.cx);
                let route = cells.iter().map(|&c| self.grid.tile(c)).collect();
                self.push(gate, OpKind::MergeRoute(route), t, tm.cx, 0);
                Some(t + tm.cx)
            }
            GateKind::T | GateKind::Tdg => {
                if magic_left == 0 {
                    return None;
                }
                let d = data[0];
                let busy = &self.busy_until;
                let grid = &self.grid;
                let direct = grid.neighbors[d]
                    .iter()
                    .copied()
                    .find(|&n| grid.source[n] && busy[n] <= t);
                let cells = match direct {
                    Some(src) => vec![d, src],
                    None => {
                        let is_goal = |i: usize| {
                            grid.neighbors[i]
                                .iter()
                                .any(|&n| grid.source[n] && busy[n] <= t)
                        };
                        let path = self.router.search(grid, d, |i| busy[i] <= t, is_goal)?;
                        let last = *path.last().expect("nonempty path");
                        let src = grid.neighbors[last]
                            .iter()
                            .copied()
                            .find(|&n| grid.source[n] && busy[n] <= t)
                            .expect("goal has a free source");
                        let mut cells = vec![d];
                        cells.extend(path);
                        cells.push(src);
                        cells
                    }
                };
                let ancilla = if corrected {
                    if cells.len() > 2 {
                        Some(cells[1])
                    } else {
                        Some(self.first_free_routing_neighbor(d, t)?)
                    }
                } else {
                    None
                };
                let merge_end = t + tm.t_merge;
                self.lock(&cells, merge_end);
                let route = cells.iter().map(|&c| self.grid.tile(c)).collect();
                self.push(gate, OpKind::MergeRoute(route), t, tm.t_merge, 1);
                match ancilla {
                    Some(anc) => {
                        let end = merge_end + tm.s;
                        self.lock(&[d, anc], end);
                        let kind = OpKind::PatchLocal {
                            tile: self.grid.tile(d),
                            ancilla: Some(self.grid.tile(anc)),
                        };
                        self.push(gate, kind, merge_end, tm.s, 0);
                        Some(end)
                    }
                    None => Some(merge_end),
                }
            }
        }
    }
}

pub fn compile_with(
    circuit: &LogicalCircuit,
    layout: &Layout,
    availability: &mut dyn MagicAvailability,
    config: &CompilerConfig,
) -> Result<CompilationResult, CompileError> {
    if layout.num_lq() < circuit.qubit_count() {
        return Err(CompileError::Uncovered {
            needed: circuit.qubit_count(),
            available: layout.num_lq(),
        });
    }
    let gates = circuit.gates();
    let dag = build_dag(circuit);
    let flags = config.correction.flags(circuit.t_count());
    let mut corrected = vec![false; gates.len()];
    for (ordinal, idx) in gates
        .iter()
        .enumerate()
        .filter(|(_, g)| g.kind.is_t())
        .map(|(i, _)| i)
        .enumerate()
    {
        corrected[idx] = flags[ordinal];
    }

    let mut sched = Scheduler {
        grid: Grid::new(layout),
        router: Router::new(layout.cell_count()),
        layout,
        busy_until: vec![0; layout.cell_count()],
        timing: config.timing,
        ops: Vec::with_capacity(gates.len() + circuit.t_count() / 2),
    };

    let mut pending: Vec<usize> = (0..gates.len())
        .map(|g| dag.predecessors(g).len())
        .collect();
    let mut ready: BTreeSet<usize> = (0..gates.len()).filter(|&g| pending[g] == 0).collect();
    let mut in_flight: BinaryHeap<Reverse<(usize, usize)>> = BinaryHeap::new();
    let mut granted = Vec::new();
    let mut done = 0;
    let mut t = 0;
    let mut last_progress = 0;

    while done < gates.len() {
        while let Some(&Reverse((end, g))) = in_flight.peek() {
            if end > t {
                break;
            }
            in_flight.pop();
            for &s in dag.successors(g) {
                pending[s] -= 1;
                if pending[s] == 0 {
                    ready.insert(s);
                }
            }
        }

        let grant = availability.granted(t);
        granted.push(grant);
        let mut used = 0;
        let mut progressed = false;
        let mut batch: Vec<usize> = ready.iter().copied().collect();
        while !batch.is_empty() {
            let mut next = Vec::new();
            for g in batch {
                let gate = &gates[g];
                let Some(end) =
                    sched.try_admit(g, gate.kind, gate.qubits(), corrected[g], t, grant - used)
                else {
                    continue;
                };
                ready.remove(&g);
                done += 1;
                progressed = true;
                if gate.kind.is_t() {
                    used += 1;
                }
                if end == t {
                    // zero-time gate: successors may start in this slice
                    for &s in dag.successors(g) {
                        pending[s] -= 1;
                        if pending[s] == 0 {
                            ready.insert(s);
                            next.push(s);
                        }
                    }
                } else {
                    in_flight.push(Reverse((end, g)));
                }
            }
            next.sort_unstable();
            batch = next;
        }

        if progressed || !in_flight.is_empty() {
            last_progress = t;
        } else if done < gates.len() {
            let limit = config.retry_factor * last_progress.max(1);
            if t - last_progress > limit {
                return Err(CompileError::Unroutable {
                    gate: *ready.first().expect("stalled with no ready gate"),
                    since: last_progress,
                    slice: t,
                });
            }
        }
        t += 1;
    }

    let ops = sched.ops;
    let num_slices = ops
        .iter()
        .filter(|op| op.duration > 0)
        .map(SliceOp::end)
        .max()
        .unwrap_or(0);
    let mut profile = vec![0u32; num_slices];
    let mut volume = (num_slices * layout.num_lq()) as u64;
    for op in &ops {
        if op.magic_consumed > 0 {
            profile[op.start] += u32::from(op.magic_consumed);
        }
        let extra = op
            .tiles()
            .into_iter()
            .filter(|&tile| layout.role(tile) == Some(TileRole::Routing))
            .count();
        volume += (extra * op.duration) as u64;
    }
    granted.truncate(num_slices);

    Ok(CompilationResult {
        num_slices,
        profile: ConsumptionProfile::new(profile),
        active_volume: volume,
        layout_tiles: layout.tile_count(),
        num_lq: layout.num_lq(),
        ops,
        granted,
    })
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RatioError {
    #[error("circuit has zero depth")]
    ZeroDepth,
    #[error("circuit has no T gates")]
    NoTGates,
}

/// Compiled slices per logical layer of one occurrence.
pub fn slices_per_layer(
    result: &CompilationResult,
    summary: &CircuitSummary,
) -> Result<f64, RatioError> {
    if summary.depth == 0 {
        return Err(RatioError::ZeroDepth);
    }
    let per_occurrence = summary.depth as f64 / summary.occurrences.max(1) as f64;
    Ok(result.num_slices as f64 / per_occurrence)
}

/// Compiled slices per T gate of one occurrence. SPBC spends about 12.
pub fn slices_per_t(
    result: &CompilationResult,
    summary: &CircuitSummary,
) -> Result<f64, RatioError> {
    if summary.num_t == 0 {
        return Err(RatioError::NoTGates);
    }
    let per_occurrence = summary.num_t as f64 / summary.occurrences.max(1) as f64;
    Ok(result.num_slices as f64 / per_occurrence)
}
