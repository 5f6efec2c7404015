//! Clifford+T logical circuits, their gate-list text format, and the
//! logical-layer resource estimates (qubits, gates, T count, depth, density).

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GateKind {
    H,
    S,
    Sdg,
    T,
    Tdg,
    X,
    Y,
    Z,
    CX,
}

impl GateKind {
    pub const ALL: [GateKind; 9] = [
        GateKind::H,
        GateKind::S,
        GateKind::Sdg,
        GateKind::T,
        GateKind::Tdg,
        GateKind::X,
        GateKind::Y,
        GateKind::Z,
        GateKind::CX,
    ];

    pub fn arity(self) -> usize {
        match self {
            GateKind::CX => 2,
            _ => 1,
        }
    }

    /// T and Tdg each consume one magic state.
    pub fn is_t(self) -> bool {
        matches!(self, GateKind::T | GateKind::Tdg)
    }

    pub fn is_pauli(self) -> bool {
        matches!(self, GateKind::X | GateKind::Y | GateKind::Z)
    }

    /// Weight in the gate count: CX counts once per operand.
    pub fn weight(self) -> u64 {
        self.arity() as u64
    }

    pub fn token(self) -> &'static str {
        match self {
            GateKind::H => "H",
            GateKind::S => "S",
            GateKind::Sdg => "SDG",
            GateKind::T => "T",
            GateKind::Tdg => "TDG",
            GateKind::X => "X",
            GateKind::Y => "Y",
            GateKind::Z => "Z",
            GateKind::CX => "CX",
        }
    }
}

impl FromStr for GateKind {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let upper = s.to_ascii_uppercase();
        GateKind::ALL
            .iter()
            .copied()
            .find(|k| k.token() == upper)
            .ok_or(())
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Gate {
    pub kind: GateKind,
    operands: [usize; 2],
}

impl Gate {
    pub fn single(kind: GateKind, qubit: usize) -> Self {
        assert_eq!(kind.arity(), 1, "{kind} is not a single-qubit gate");
        Self {
            kind,
            operands: [qubit, qubit],
        }
    }

    pub fn cx(control: usize, target: usize) -> Self {
        Self {
            kind: GateKind::CX,
            operands: [control, target],
        }
    }

    pub fn qubits(&self) -> &[usize] {
        &self.operands[..self.kind.arity()]
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind)?;
        for q in self.qubits() {
            write!(f, " {q}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CircuitError {
    #[error("circuit must declare at least one qubit")]
    NoQubits,
    #[error("gate {index}: qubit {qubit} out of range for {qubit_count} qubits")]
    QubitOutOfRange {
        index: usize,
        qubit: usize,
        qubit_count: usize,
    },
    #[error("gate {index}: CX operands are equal ({qubit})")]
    EqualOperands { index: usize, qubit: usize },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("missing `qubits <N>` header")]
    MissingHeader,
    #[error("line {line}")]
    Invalid {
        line: usize,
        #[source]
        source: CircuitError,
    },
}

/// A fully decomposed Clifford+T circuit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogicalCircuit {
    qubit_count: usize,
    gates: Vec<Gate>,
}

impl LogicalCircuit {
    pub fn new(qubit_count: usize, gates: Vec<Gate>) -> Result<Self, CircuitError> {
        if qubit_count == 0 {
            return Err(CircuitError::NoQubits);
        }
        for (index, gate) in gates.iter().enumerate() {
            check_gate(index, gate, qubit_count)?;
        }
        Ok(Self { qubit_count, gates })
    }

    pub fn empty(qubit_count: usize) -> Result<Self, CircuitError> {
        Self::new(qubit_count, Vec::new())
    }

    pub fn push(&mut self, gate: Gate) -> Result<(), CircuitError> {
        check_gate(self.gates.len(), &gate, self.qubit_count)?;
        self.gates.push(gate);
        Ok(())
    }

    pub fn qubit_count(&self) -> usize {
        self.qubit_count
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn t_count(&self) -> usize {
        self.gates.iter().filter(|g| g.kind.is_t()).count()
    }

    /// Gate-list text accepted by [`parse_circuit`].
    pub fn to_text(&self) -> String {
        let mut out = format!("qubits {}\n", self.qubit_count);
        for g in &self.gates {
            out.push_str(&g.to_string());
            out.push('\n');
        }
        out
    }
}

fn check_gate(index: usize, gate: &Gate, qubit_count: usize) -> Result<(), CircuitError> {
    for &qubit in gate.qubits() {
        if qubit >= qubit_count {
            return Err(CircuitError::QubitOutOfRange {
                index,
                qubit,
                qubit_count,
            });
        }
    }
    if gate.kind == GateKind::CX && gate.operands[0] == gate.operands[1] {
        return Err(CircuitError::EqualOperands {
            index,
            qubit: gate.operands[0],
        });
    }
    Ok(())
}

/// Parses the gate-list format: a `qubits <N>` header followed by one gate
/// per line (`<GATE> <q>` or `CX <q1> <q2>`). `#` starts a comment.
pub fn parse_circuit(text: &str) -> Result<LogicalCircuit, ParseError> {
    let mut circuit: Option<LogicalCircuit> = None;

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = content.split_whitespace().collect();
        let malformed = |message: String| ParseError::Malformed { line, message };

        let Some(circ) = circuit.as_mut() else {
            if tokens.len() != 2 || !tokens[0].eq_ignore_ascii_case("qubits") {
                return Err(ParseError::MissingHeader);
            }
            let n: usize = tokens[1]
                .parse()
                .map_err(|_| malformed(format!("bad qubit count `{}`", tokens[1])))?;
            circuit = Some(
                LogicalCircuit::empty(n).map_err(|source| ParseError::Invalid { line, source })?,
            );
            continue;
        };

        let kind: GateKind = tokens[0]
            .parse()
            .map_err(|_| malformed(format!("unknown gate `{}`", tokens[0])))?;
        if tokens.len() != 1 + kind.arity() {
            return Err(malformed(format!(
                "{kind} takes {} operand(s), got {}",
                kind.arity(),
                tokens.len() - 1
            )));
        }
        let mut qs = [0usize; 2];
        for (slot, tok) in qs.iter_mut().zip(&tokens[1..]) {
            *slot = tok
                .parse()
                .map_err(|_| malformed(format!("bad qubit index `{tok}`")))?;
        }
        let gate = if kind == GateKind::CX {
            Gate::cx(qs[0], qs[1])
        } else {
            Gate::single(kind, qs[0])
        };
        circ.push(gate)
            .map_err(|source| ParseError::Invalid { line, source })?;
    }

    circuit.ok_or(ParseError::MissingHeader)
}

/// Same-qubit precedence graph, reduced to consecutive gates on each qubit line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependencyDag {
    preds: Vec<Vec<usize>>,
    succs: Vec<Vec<usize>>,
}

impl DependencyDag {
    pub fn node_count(&self) -> usize {
        self.preds.len()
    }

    pub fn predecessors(&self, gate: usize) -> &[usize] {
        &self.preds[gate]
    }

    pub fn successors(&self, gate: usize) -> &[usize] {
        &self.succs[gate]
    }

    /// All edges `(i, j)` with `i < j`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut edges: Vec<_> = self
            .succs
            .iter()
            .enumerate()
            .flat_map(|(i, s)| s.iter().map(move |&j| (i, j)))
            .collect();
        edges.sort_unstable();
        edges
    }
}

pub fn build_dag(circuit: &LogicalCircuit) -> DependencyDag {
    let n = circuit.len();
    let mut preds = vec![Vec::new(); n];
    let mut succs = vec![Vec::new(); n];
    let mut last: Vec<Option<usize>> = vec![None; circuit.qubit_count()];

    for (j, gate) in circuit.gates().iter().enumerate() {
        for &q in gate.qubits() {
            if let Some(i) = last[q] {
                // a CX following another CX on the same pair yields one edge
                if !preds[j].contains(&i) {
                    preds[j].push(i);
                    succs[i].push(j);
                }
            }
            last[q] = Some(j);
        }
    }
    DependencyDag { preds, succs }
}

/// Logical-layer resource estimate for a sub-circuit repeated `occurrences`
/// times. Counts are totals over all occurrences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircuitSummary {
    pub occurrences: u64,
    pub num_lq: u64,
    pub num_gates: u64,
    pub num_t: u64,
    pub depth: u64,
    pub density: f64,
    pub t_fraction: f64,
}

impl CircuitSummary {
    /// Builds a summary from published totals, deriving density and T
    /// fraction. Zero denominators yield zero ratios.
    pub fn from_totals(
        occurrences: u64,
        num_lq: u64,
        num_gates: u64,
        num_t: u64,
        depth: u64,
    ) -> Self {
        let (density, t_fraction) =
            derive_metrics(num_gates as f64, num_lq as f64, depth as f64, num_t as f64)
                .unwrap_or((0.0, 0.0));
        Self {
            occurrences,
            num_lq,
            num_gates,
            num_t,
            depth,
            density,
            t_fraction,
        }
    }
}

/// Per-gate ASAP layer index (1-based). A gate occupies one layer on every
/// operand qubit.
pub fn asap_layers(circuit: &LogicalCircuit) -> Vec<u64> {
    let mut frontier = vec![0u64; circuit.qubit_count()];
    circuit
        .gates()
        .iter()
        .map(|g| {
            let layer = g.qubits().iter().map(|&q| frontier[q]).max().unwrap_or(0) + 1;
            for &q in g.qubits() {
                frontier[q] = layer;
            }
            layer
        })
        .collect()
}

pub fn compute_lre(circuit: &LogicalCircuit, occurrences: u64) -> CircuitSummary {
    let num_gates: u64 = circuit.gates().iter().map(|g| g.kind.weight()).sum();
    let num_t = circuit.t_count() as u64;
    let depth = asap_layers(circuit).into_iter().max().unwrap_or(0);
    CircuitSummary::from_totals(
        occurrences,
        circuit.qubit_count() as u64,
        num_gates * occurrences,
        num_t * occurrences,
        depth * occurrences,
    )
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("zero denominator in derived metrics")]
pub struct ZeroDenominator;

/// Returns `(density, t_fraction)`.
pub fn derive_metrics(
    num_gates: f64,
    num_lq: f64,
    depth: f64,
    num_t: f64,
) -> Result<(f64, f64), ZeroDenominator> {
    if num_gates <= 0.0 || num_lq <= 0.0 || depth <= 0.0 {
        return Err(ZeroDenominator);
    }
    Ok((num_gates / (num_lq * depth), num_t / num_gates))
}
