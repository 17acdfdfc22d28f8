//! Gate-level circuit representation, the JSON circuit format, and the
//! benchmark circuit families (random CX layers, QFT, Bernstein-Vazirani).

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A single gate acting on one or two logical qubits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateOp {
    pub kind: String,
    pub operands: Vec<usize>,
    #[serde(default = "default_duration")]
    pub duration: usize,
    #[serde(default = "default_fidelity")]
    pub fidelity: f64,
}

fn default_duration() -> usize {
    1
}

fn default_fidelity() -> f64 {
    1.0
}

impl GateOp {
    pub fn new(kind: &str, operands: &[usize]) -> Self {
        Self {
            kind: kind.to_string(),
            operands: operands.to_vec(),
            duration: 1,
            fidelity: 1.0,
        }
    }

    pub fn with_duration(mut self, duration: usize) -> Self {
        self.duration = duration;
        self
    }

    pub fn with_fidelity(mut self, fidelity: f64) -> Self {
        self.fidelity = fidelity;
        self
    }

    pub fn is_two_qubit(&self) -> bool {
        self.operands.len() == 2
    }
}

/// An ordered gate list over `qubit_count` logical qubits. Program order on
/// each qubit defines the dependency relation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuantumCircuit {
    #[serde(rename = "qubits")]
    pub qubit_count: usize,
    pub gates: Vec<GateOp>,
}

impl QuantumCircuit {
    /// Builds a circuit and checks every gate invariant.
    pub fn new(qubit_count: usize, gates: Vec<GateOp>) -> Result<Self> {
        let circuit = Self { qubit_count, gates };
        circuit.validate()?;
        Ok(circuit)
    }

    pub fn empty(qubit_count: usize) -> Self {
        Self {
            qubit_count,
            gates: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (index, gate) in self.gates.iter().enumerate() {
            let invalid = |message: String| Error::Validation {
                gate: index,
                message,
            };
            match gate.operands.len() {
                1 | 2 => {}
                0 => return Err(invalid("gate has no operands".into())),
                arity => return Err(Error::UnsupportedGate { gate: index, arity }),
            }
            if let Some(&q) = gate.operands.iter().find(|&&q| q >= self.qubit_count) {
                return Err(invalid(format!(
                    "operand {q} out of range for {} qubits",
                    self.qubit_count
                )));
            }
            if gate.is_two_qubit() && gate.operands[0] == gate.operands[1] {
                return Err(invalid(format!(
                    "duplicate operand {}",
                    gate.operands[0]
                )));
            }
            if gate.duration == 0 {
                return Err(invalid("duration must be at least 1".into()));
            }
            if !(gate.fidelity > 0.0 && gate.fidelity <= 1.0) {
                return Err(invalid(format!(
                    "fidelity {} outside (0, 1]",
                    gate.fidelity
                )));
            }
        }
        Ok(())
    }

    pub fn push(&mut self, gate: GateOp) {
        self.gates.push(gate);
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Immediate predecessors of every gate: for each operand, the previous
    /// gate in program order touching that qubit.
    pub fn predecessors(&self) -> Vec<Vec<usize>> {
        let mut last: Vec<Option<usize>> = vec![None; self.qubit_count];
        let mut preds = Vec::with_capacity(self.gates.len());
        for (index, gate) in self.gates.iter().enumerate() {
            let mut p: Vec<usize> = gate.operands.iter().filter_map(|&q| last[q]).collect();
            p.sort_unstable();
            p.dedup();
            preds.push(p);
            for &q in &gate.operands {
                last[q] = Some(index);
            }
        }
        preds
    }

    /// Sum of `-ln f_c` over all gates. Constant for a given circuit.
    pub fn gate_log_cost(&self) -> f64 {
        self.gates.iter().map(|g| -g.fidelity.ln()).sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("circuit serializes")
    }
}

pub fn parse_circuit(text: &str) -> Result<QuantumCircuit> {
    let circuit: QuantumCircuit = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    circuit.validate()?;
    Ok(circuit)
}

/// Longest dependency chain, weighted by gate durations.
pub fn logical_depth(circuit: &QuantumCircuit) -> usize {
    let mut ready = vec![0usize; circuit.qubit_count];
    let mut depth = 0;
    for gate in &circuit.gates {
        let start = gate.operands.iter().map(|&q| ready[q]).max().unwrap_or(0);
        let end = start + gate.duration;
        for &q in &gate.operands {
            ready[q] = end;
        }
        depth = depth.max(end);
    }
    depth
}

/// `n_layers` layers of CX gates, each pairing `n_qubits / 2` disjoint
/// random qubit pairs. The lower index of a pair is the control.
pub fn gen_random_cx_layers(n_qubits: usize, n_layers: usize, seed: u64) -> Result<QuantumCircuit> {
    if n_qubits < 2 {
        return Err(Error::Argument(format!(
            "random CX layers need at least 2 qubits, got {n_qubits}"
        )));
    }
    if n_layers < 1 {
        return Err(Error::Argument("at least one layer is required".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut qubits: Vec<usize> = (0..n_qubits).collect();
    let mut circuit = QuantumCircuit::empty(n_qubits);
    for _ in 0..n_layers {
        qubits.shuffle(&mut rng);
        for pair in qubits.chunks_exact(2) {
            circuit.push(GateOp::new("cx", &[pair[0].min(pair[1]), pair[0].max(pair[1])]));
        }
    }
    Ok(circuit)
}

/// Textbook QFT: `h` and controlled phases per qubit, then the reversal swaps
/// as explicit `swap_logical` gates.
pub fn gen_qft(n_qubits: usize) -> Result<QuantumCircuit> {
    if n_qubits < 1 {
        return Err(Error::Argument("QFT needs at least one qubit".into()));
    }
    let mut circuit = QuantumCircuit::empty(n_qubits);
    for i in 0..n_qubits {
        circuit.push(GateOp::new("h", &[i]));
        for j in i + 1..n_qubits {
            circuit.push(GateOp::new("cp", &[j, i]));
        }
    }
    for i in 0..n_qubits / 2 {
        circuit.push(GateOp::new("swap_logical", &[i, n_qubits - 1 - i]));
    }
    Ok(circuit)
}

/// Bernstein-Vazirani with the last qubit as oracle ancilla. `secret[i] == '1'`
/// adds `cx(i, ancilla)`.
pub fn gen_bv(n_qubits: usize, secret: &str) -> Result<QuantumCircuit> {
    if n_qubits < 2 || secret.chars().count() != n_qubits - 1 {
        return Err(Error::Argument(format!(
            "secret must have n_qubits - 1 = {} bits, got {:?}",
            n_qubits.saturating_sub(1),
            secret
        )));
    }
    let ancilla = n_qubits - 1;
    let mut circuit = QuantumCircuit::empty(n_qubits);
    for q in 0..n_qubits {
        circuit.push(GateOp::new("h", &[q]));
    }
    for (i, bit) in secret.chars().enumerate() {
        match bit {
            '1' => circuit.push(GateOp::new("cx", &[i, ancilla])),
            '0' => {}
            other => {
                return Err(Error::Argument(format!(
                    "secret contains non-binary character {other:?}"
                )))
            }
        }
    }
    for q in 0..ancilla {
        circuit.push(GateOp::new("h", &[q]));
    }
    Ok(circuit)
}

/// Six-qubit circuit for the 2x3 grid in three layers: CX(0,1), CX(2,5) run
/// on the identity layout; CX(1,3), CX(4,2) need the bottom row one column to
/// the right; CX(1,2), CX(3,4) are row-internal again. With identity placement
/// the optimum is `3 + 2t` steps with swaps only and `3 + t` with
/// displacements, for equal runtimes `t`.
pub fn displacement_fixture() -> QuantumCircuit {
    let gates = [[0, 1], [2, 5], [1, 3], [4, 2], [1, 2], [3, 4]]
        .iter()
        .map(|ops| GateOp::new("cx", ops))
        .collect();
    QuantumCircuit::new(6, gates).expect("fixture is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn defaults_applied() {
        let c = parse_circuit(r#"{"qubits":2,"gates":[{"kind":"cx","operands":[0,1]}]}"#).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.gates[0].duration, 1);
        assert_eq!(c.gates[0].fidelity, 1.0);
    }

    #[test]
    fn duplicate_operands_rejected() {
        let err = parse_circuit(r#"{"qubits":1,"gates":[{"kind":"cx","operands":[0,0]}]}"#)
            .unwrap_err();
        assert!(matches!(err, Error::Validation { gate: 0, .. }), "{err}");
    }

    #[test]
    fn out_of_range_names_gate() {
        let err = parse_circuit(
            r#"{"qubits":2,"gates":[{"kind":"h","operands":[0]},{"kind":"cx","operands":[0,2]}]}"#,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Validation { gate: 1, .. }), "{err}");
    }

    #[test]
    fn three_operands_unsupported() {
        let err = parse_circuit(r#"{"qubits":3,"gates":[{"kind":"ccx","operands":[0,1,2]}]}"#)
            .unwrap_err();
        assert!(matches!(err, Error::UnsupportedGate { gate: 0, arity: 3 }));
    }

    #[test]
    fn malformed_json_reports_line() {
        let err = parse_circuit("{\n\"qubits\": 2,\n\"gates\": [\n").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert!(line >= 3),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn unknown_fields_rejected() {
        assert!(parse_circuit(r#"{"qubits":2,"gates":[],"name":"x"}"#).is_err());
        assert!(parse_circuit(
            r#"{"qubits":2,"gates":[{"kind":"cx","operands":[0,1],"angle":1.0}]}"#
        )
        .is_err());
    }

    #[test]
    fn bad_fidelity_and_duration() {
        assert!(parse_circuit(
            r#"{"qubits":2,"gates":[{"kind":"cx","operands":[0,1],"fidelity":0.0}]}"#
        )
        .is_err());
        assert!(parse_circuit(
            r#"{"qubits":2,"gates":[{"kind":"cx","operands":[0,1],"duration":0}]}"#
        )
        .is_err());
    }

    #[test]
    fn fixture_file_parses() {
        let text = include_str!("../../../fixtures/displacement_fixture.json");
        let c = parse_circuit(text).unwrap();
        assert_eq!(c.qubit_count, 6);
        assert_eq!(c.len(), 6);
        assert!(c.gates.iter().all(GateOp::is_two_qubit));
        assert_eq!(c, displacement_fixture());
    }

    #[test]
    fn random_layers_single_pair() {
        let c = gen_random_cx_layers(2, 3, 7).unwrap();
        assert_eq!(c.len(), 3);
        for g in &c.gates {
            let mut ops = g.operands.clone();
            ops.sort();
            assert_eq!(ops, vec![0, 1]);
        }
    }

    #[test]
    fn random_layers_disjoint() {
        let c = gen_random_cx_layers(5, 2, 1).unwrap();
        assert_eq!(c.len(), 4);
        for layer in c.gates.chunks(2) {
            let mut seen: Vec<usize> = layer.iter().flat_map(|g| g.operands.clone()).collect();
            seen.sort();
            seen.dedup();
            assert_eq!(seen.len(), 4);
        }
        assert_eq!(c, gen_random_cx_layers(5, 2, 1).unwrap());
        assert!(gen_random_cx_layers(1, 2, 1).is_err());
    }

    #[test]
    fn qft_small() {
        let c = gen_qft(1).unwrap();
        assert_eq!(c.len(), 1);
        let c = gen_qft(2).unwrap();
        let expected = vec![
            GateOp::new("h", &[0]),
            GateOp::new("cp", &[1, 0]),
            GateOp::new("h", &[1]),
            GateOp::new("swap_logical", &[0, 1]),
        ];
        assert_eq!(c.gates, expected);
        assert_eq!(gen_qft(3).unwrap().len(), 7);
    }

    #[test]
    fn bv_constructions() {
        let c = gen_bv(2, "1").unwrap();
        let kinds: Vec<_> = c.gates.iter().map(|g| g.kind.as_str()).collect();
        assert_eq!(kinds, ["h", "h", "cx", "h"]);
        assert_eq!(c.gates[2].operands, vec![0, 1]);

        let c = gen_bv(3, "00").unwrap();
        assert_eq!(c.len(), 5);
        assert!(c.gates.iter().all(|g| g.kind == "h"));

        let c = gen_bv(3, "11").unwrap();
        let cx: Vec<_> = c.gates.iter().filter(|g| g.kind == "cx").map(|g| g.operands.clone()).collect();
        assert_eq!(cx, vec![vec![0, 2], vec![1, 2]]);

        assert!(gen_bv(3, "1").is_err());
        assert!(gen_bv(3, "1x").is_err());
    }

    #[test]
    fn depth_examples() {
        assert_eq!(logical_depth(&QuantumCircuit::empty(3)), 0);
        let single = QuantumCircuit::new(2, vec![GateOp::new("cx", &[0, 1])]).unwrap();
        assert_eq!(logical_depth(&single), 1);
        let chain = QuantumCircuit::new(
            3,
            vec![
                GateOp::new("cx", &[0, 1]).with_duration(2),
                GateOp::new("cx", &[1, 2]).with_duration(2),
                GateOp::new("cx", &[0, 1]).with_duration(2),
            ],
        )
        .unwrap();
        assert_eq!(logical_depth(&chain), 6);
        assert_eq!(logical_depth(&displacement_fixture()), 3);
    }

    #[test]
    fn predecessors_follow_qubit_order() {
        let p = displacement_fixture().predecessors();
        assert_eq!(p, vec![vec![], vec![], vec![0], vec![1], vec![2, 3], vec![2, 3]]);
    }

    fn arb_circuit() -> impl Strategy<Value = QuantumCircuit> {
        (2usize..6).prop_flat_map(|n| {
            let gate = (0..n, 0..n, 1usize..4, 1u32..=100, any::<bool>()).prop_map(
                move |(a, b, d, f, two)| {
                    let ops = if two && a != b { vec![a, b] } else { vec![a] };
                    GateOp {
                        kind: if ops.len() == 2 { "cx".into() } else { "h".into() },
                        operands: ops,
                        duration: d,
                        fidelity: f as f64 / 100.0,
                    }
                },
            );
            proptest::collection::vec(gate, 0..12).prop_map(move |gates| QuantumCircuit {
                qubit_count: n,
                gates,
            })
        })
    }

    proptest! {
        #[test]
        fn json_round_trip(c in arb_circuit()) {
            let back = parse_circuit(&c.to_json()).unwrap();
            prop_assert_eq!(back, c);
        }

        #[test]
        fn depth_bounds_and_monotone(c in arb_circuit(), extra in 0usize..2) {
            let total: usize = c.gates.iter().map(|g| g.duration).sum();
            let d = logical_depth(&c);
            prop_assert!(d <= total);
            let mut longer = c.clone();
            longer.push(GateOp::new("h", &[extra % c.qubit_count]));
            prop_assert!(logical_depth(&longer) >= d);
        }

        #[test]
        fn random_layers_never_reuse_qubit(n in 2usize..9, layers in 1usize..5, seed in any::<u64>()) {
            let c = gen_random_cx_layers(n, layers, seed).unwrap();
            let per_layer = n / 2;
            prop_assert_eq!(c.len(), per_layer * layers);
            for layer in c.gates.chunks(per_layer) {
                let mut seen: Vec<usize> = layer.iter().flat_map(|g| g.operands.clone()).collect();
                let len = seen.len();
                seen.sort();
                seen.dedup();
                prop_assert_eq!(seen.len(), len);
            }
        }

        #[test]
        fn qft_gate_count(n in 1usize..12) {
            prop_assert_eq!(gen_qft(n).unwrap().len(), n + n * (n - 1) / 2 + n / 2);
        }
    }
}
