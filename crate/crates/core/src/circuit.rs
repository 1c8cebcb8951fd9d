//! Gate-level IR and deterministic synthesis of the preparation circuits.
//!
//! Qubit indices are 1-based and address sites directly: gate qubit `q` acts
//! on bit `q - 1` of the basis index. The two- and three-qubit splitting
//! blocks follow the Givens convention: on the splitting pair the block acts
//! as a real rotation with determinant +1,
//! `|01> -> theta |01> + sqrt(1-theta^2) |10>` with the leading `1` on the
//! lower site, and the reverse pair picks up the minus sign. The complement
//! sign is unobservable when preparing from the reference determinant but is
//! fixed so the block matrices are fully specified.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::esp::AngleTable;
use crate::states::{BtsCoefficients, GeminalVector, PairOrdering};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum GateKind {
    X,
    Ry,
    Rz,
    Cnot,
    CRy,
    CCRy,
    Swap,
}

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            GateKind::X | GateKind::Ry | GateKind::Rz => 1,
            GateKind::Cnot | GateKind::CRy | GateKind::Swap => 2,
            GateKind::CCRy => 3,
        }
    }
}

/// One gate: `qubits` lists controls first, target last (SWAP: the two
/// exchanged wires).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Gate {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub angle: Option<f64>,
}

impl Gate {
    pub fn x(q: usize) -> Self {
        Gate {
            kind: GateKind::X,
            qubits: vec![q],
            angle: None,
        }
    }

    pub fn ry(q: usize, angle: f64) -> Self {
        Gate {
            kind: GateKind::Ry,
            qubits: vec![q],
            angle: Some(angle),
        }
    }

    pub fn rz(q: usize, angle: f64) -> Self {
        Gate {
            kind: GateKind::Rz,
            qubits: vec![q],
            angle: Some(angle),
        }
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Gate {
            kind: GateKind::Cnot,
            qubits: vec![control, target],
            angle: None,
        }
    }

    pub fn cry(control: usize, target: usize, angle: f64) -> Self {
        Gate {
            kind: GateKind::CRy,
            qubits: vec![control, target],
            angle: Some(angle),
        }
    }

    pub fn ccry(c1: usize, c2: usize, target: usize, angle: f64) -> Self {
        Gate {
            kind: GateKind::CCRy,
            qubits: vec![c1, c2, target],
            angle: Some(angle),
        }
    }

    pub fn swap(a: usize, b: usize) -> Self {
        Gate {
            kind: GateKind::Swap,
            qubits: vec![a, b],
            angle: None,
        }
    }

    /// Target qubit (last index; for SWAP, the second wire).
    pub fn target(&self) -> usize {
        *self.qubits.last().unwrap()
    }

    pub fn controls(&self) -> &[usize] {
        match self.kind {
            GateKind::Cnot | GateKind::CRy => &self.qubits[..1],
            GateKind::CCRy => &self.qubits[..2],
            _ => &[],
        }
    }

    fn validate(&self, width: usize) {
        assert_eq!(self.qubits.len(), self.kind.arity(), "gate arity mismatch");
        for &q in &self.qubits {
            assert!(q >= 1 && q <= width, "qubit {q} outside width {width}");
        }
        for (i, &a) in self.qubits.iter().enumerate() {
            assert!(
                self.qubits[i + 1..].iter().all(|&b| b != a),
                "duplicate qubit index {a}"
            );
        }
        if let Some(a) = self.angle {
            assert!(a.is_finite(), "non-finite gate angle");
        }
    }
}

/// Provenance of each gate, used by the fixed-weight simulation path to
/// recover composite blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BlockLabel {
    /// Reference-determinant X layer.
    Init,
    /// Two-qubit splitting block of the (p, q) shift stage.
    C2 { p: usize, scs_q: usize },
    /// Three-qubit splitting block, window offset r, of the (p, q) stage.
    C3 { p: usize, r: usize, scs_q: usize },
    /// Phase layer.
    Jastrow,
    /// CNOT fan-out entangling each site with its partner.
    PairingCnot,
    /// Wire permutation appended for the interlaced layout.
    SwapNetwork,
}

/// Ordered gate list plus per-gate provenance labels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Circuit {
    width: usize,
    gates: Vec<Gate>,
    labels: Vec<BlockLabel>,
    /// Hamming weight of the prepared sector, when the circuit targets one.
    sector: Option<usize>,
}

impl Circuit {
    pub fn new(width: usize) -> Self {
        Circuit {
            width,
            gates: Vec::new(),
            labels: Vec::new(),
            sector: None,
        }
    }

    pub fn push(&mut self, gate: Gate, label: BlockLabel) {
        gate.validate(self.width);
        self.gates.push(gate);
        self.labels.push(label);
    }

    pub fn extend(&mut self, gates: Vec<Gate>, label: BlockLabel) {
        for g in gates {
            self.push(g, label);
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn labels(&self) -> &[BlockLabel] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn sector(&self) -> Option<usize> {
        self.sector
    }

    pub fn set_sector(&mut self, n: Option<usize>) {
        self.sector = n;
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Gate, BlockLabel)> {
        self.gates.iter().zip(self.labels.iter().copied())
    }

    /// Rewrites every CCRy into the standard five-gate {CRy, CNOT} identity;
    /// all other gates pass through. The result is unitarily identical.
    pub fn lowered(&self) -> Circuit {
        let mut out = Circuit::new(self.width);
        out.sector = self.sector;
        for (g, label) in self.iter() {
            if g.kind == GateKind::CCRy {
                let (c1, c2, t) = (g.qubits[0], g.qubits[1], g.qubits[2]);
                let tau = g.angle.unwrap();
                out.push(Gate::cry(c2, t, tau / 2.0), label);
                out.push(Gate::cnot(c1, c2), label);
                out.push(Gate::cry(c2, t, -tau / 2.0), label);
                out.push(Gate::cnot(c1, c2), label);
                out.push(Gate::cry(c1, t, tau / 2.0), label);
            } else {
                out.push(g.clone(), label);
            }
        }
        out
    }

    /// Fully elementary form: only {X, Ry, Rz, CNOT} remain. CRy expands to
    /// the two-CNOT conjugation and SWAP to three CNOTs. Each gate maps to
    /// one emitted QASM instruction.
    pub fn emission_form(&self) -> Circuit {
        let mut out = Circuit::new(self.width);
        out.sector = self.sector;
        for (g, label) in self.lowered().iter() {
            match g.kind {
                GateKind::CRy => {
                    let (c, t) = (g.qubits[0], g.qubits[1]);
                    let tau = g.angle.unwrap();
                    out.push(Gate::ry(t, tau / 2.0), label);
                    out.push(Gate::cnot(c, t), label);
                    out.push(Gate::ry(t, -tau / 2.0), label);
                    out.push(Gate::cnot(c, t), label);
                }
                GateKind::Swap => {
                    let (a, b) = (g.qubits[0], g.qubits[1]);
                    out.push(Gate::cnot(a, b), label);
                    out.push(Gate::cnot(b, a), label);
                    out.push(Gate::cnot(a, b), label);
                }
                _ => out.push(g.clone(), label),
            }
        }
        out
    }

    /// Deterministic JSON dump of the gate list.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("circuit serialization cannot fail")
    }
}

/// Two-qubit splitting block on sites `(M-p+1, M-p+2)`:
/// `|0_hi 1_lo> -> theta |0_hi 1_lo> + sqrt(1-theta^2) |1_hi 0_lo>`,
/// identity on the other window states; `theta = cos(tau/2)`.
pub fn build_c2(m: usize, p: usize, tau: f64) -> Vec<Gate> {
    let lo = m - p + 1;
    let hi = m - p + 2;
    vec![
        Gate::cnot(hi, lo),
        Gate::cry(lo, hi, tau),
        Gate::cnot(hi, lo),
    ]
}

/// Three-qubit splitting block on sites `(M-p+1, M-p+r, M-p+r+1)`:
/// with the middle site occupied, rotates the pair
/// `(lo occupied, hi empty) <-> (hi occupied, lo empty)` by `tau`; identity
/// on every other pattern of the touched sites.
pub fn build_c3(m: usize, p: usize, r: usize, tau: f64) -> Vec<Gate> {
    let lo = m - p + 1;
    let mid = m - p + r;
    let hi = m - p + r + 1;
    vec![
        Gate::cnot(hi, lo),
        Gate::ccry(mid, lo, hi, tau),
        Gate::cnot(hi, lo),
    ]
}

/// Split-and-cyclic-shift stage `(p, q)`: the two-qubit block first, then the
/// three-qubit blocks for window offsets `r = 2..=q`.
pub fn build_scs(angles: &AngleTable, p: usize, q: usize) -> Result<Circuit> {
    let m = angles.m();
    let mut c = Circuit::new(m);
    append_scs(&mut c, angles, p, q)?;
    Ok(c)
}

fn append_scs(c: &mut Circuit, angles: &AngleTable, p: usize, q: usize) -> Result<()> {
    let m = angles.m();
    let tau = angles
        .tau(p, 1)
        .ok_or(Error::DegenerateCoefficient { p, q: 1 })?;
    c.extend(build_c2(m, p, tau), BlockLabel::C2 { p, scs_q: q });
    for r in 2..=q {
        let tau = angles
            .tau(p, r)
            .ok_or(Error::DegenerateCoefficient { p, q: r })?;
        c.extend(build_c3(m, p, r, tau), BlockLabel::C3 { p, r, scs_q: q });
    }
    Ok(())
}

/// The full magnitude-preparation unitary: stages `(M,N), ..., (N+1,N)`
/// followed by the triangular tail `(N,N-1), ..., (2,1)`, in that temporal
/// order.
pub fn build_u_mn(angles: &AngleTable) -> Result<Circuit> {
    let (m, n) = (angles.m(), angles.n());
    let mut c = Circuit::new(m);
    c.set_sector(Some(n));
    for p in (n + 1..=m).rev() {
        append_scs(&mut c, angles, p, n)?;
    }
    for p in (2..=n).rev() {
        append_scs(&mut c, angles, p, p - 1)?;
    }
    Ok(c)
}

/// One Rz per site; realizes the coefficient phases as a depth-1 layer.
pub fn build_jastrow(phases: &[f64]) -> Circuit {
    let mut c = Circuit::new(phases.len());
    for (i, &alpha) in phases.iter().enumerate() {
        c.push(Gate::rz(i + 1, alpha), BlockLabel::Jastrow);
    }
    c
}

fn append_init(c: &mut Circuit, n: usize) {
    for q in 1..=n {
        c.push(Gate::x(q), BlockLabel::Init);
    }
}

fn append_circuit(c: &mut Circuit, other: Circuit) {
    for (g, label) in other.iter() {
        c.push(g.clone(), label);
    }
}

/// Complete preparation circuit for the ESP state of `g`: X layer on sites
/// `1..=N`, the shift cascade, and the phase layer (omitted when every phase
/// is zero).
pub fn build_agp_circuit(g: &GeminalVector) -> Result<Circuit> {
    let angles = AngleTable::agp(g.magnitudes(), g.n())?;
    let mut c = Circuit::new(g.m());
    c.set_sector(Some(g.n()));
    append_init(&mut c, g.n());
    append_circuit(&mut c, build_u_mn(&angles)?);
    if g.has_phases() {
        append_circuit(&mut c, build_jastrow(g.phases()));
    }
    Ok(c)
}

/// Preparation circuit for the binary-tree state of `b`; identical structure
/// to the ESP circuit with independently chosen angles.
pub fn build_bts_circuit(b: &BtsCoefficients) -> Result<Circuit> {
    let angles = AngleTable::bts(b.magnitudes(), b.m(), b.n())?;
    let mut c = Circuit::new(b.m());
    c.set_sector(Some(b.n()));
    append_init(&mut c, b.n());
    append_circuit(&mut c, build_u_mn(&angles)?);
    if b.has_phases() {
        append_circuit(&mut c, build_jastrow(b.phases()));
    }
    Ok(c)
}

/// Doubles the register to 2M qubits: the paired-site circuit runs on sites
/// `1..=M`, then a CNOT fan-out copies each occupation onto its partner. The
/// interlaced layout appends the swap network that moves partner `p` next to
/// site `p`.
pub fn build_fermionic_circuit(g: &GeminalVector, ordering: PairOrdering) -> Result<Circuit> {
    let m = g.m();
    let mut c = Circuit::new(2 * m);
    c.set_sector(Some(2 * g.n()));
    append_circuit(&mut c, grow(build_agp_circuit(g)?, 2 * m));
    for p in 1..=m {
        c.push(Gate::cnot(p, m + p), BlockLabel::PairingCnot);
    }
    if ordering == PairOrdering::Interlaced {
        for gate in interlace_swaps(m) {
            c.push(gate, BlockLabel::SwapNetwork);
        }
    }
    Ok(c)
}

fn grow(c: Circuit, width: usize) -> Circuit {
    let mut out = Circuit::new(width);
    for (g, label) in c.iter() {
        out.push(g.clone(), label);
    }
    out
}

/// Selection-sort swap sequence taking the block layout (partner of site p at
/// wire M+p) to the interlaced layout (partners adjacent).
fn interlace_swaps(m: usize) -> Vec<Gate> {
    let n = 2 * m;
    // desired wire (0-based) for each position: even slots take sites,
    // odd slots take partners
    let desired: Vec<usize> = (0..n)
        .map(|pos| if pos % 2 == 0 { pos / 2 } else { m + pos / 2 })
        .collect();
    let mut at: Vec<usize> = (0..n).collect(); // position -> wire
    let mut of: Vec<usize> = (0..n).collect(); // wire -> position
    let mut swaps = Vec::new();
    for pos in 0..n {
        let want = desired[pos];
        if at[pos] != want {
            let from = of[want];
            swaps.push(Gate::swap(pos + 1, from + 1));
            let a = at[pos];
            at.swap(pos, from);
            of[want] = pos;
            of[a] = from;
        }
    }
    swaps
}

/// ESP preparation on a doubled register without a pairing scheme: requires
/// an even number of coefficients and an even target weight.
pub fn build_qagp_circuit(g: &GeminalVector) -> Result<Circuit> {
    if g.m() % 2 != 0 || g.n() % 2 != 0 {
        return Err(Error::InvalidShape { m: g.m(), n: g.n() });
    }
    build_agp_circuit(g)
}

/// Gate census and a greedy depth estimate (disjoint-qubit gates share a
/// layer).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GateStats {
    pub counts: BTreeMap<GateKind, usize>,
    pub total: usize,
    pub two_qubit: usize,
    pub depth: usize,
}

pub fn gate_stats(c: &Circuit) -> GateStats {
    let mut counts = BTreeMap::new();
    let mut two_qubit = 0;
    let mut frontier = vec![0usize; c.width() + 1];
    let mut depth = 0;
    for g in c.gates() {
        *counts.entry(g.kind).or_insert(0) += 1;
        if g.kind.arity() == 2 {
            two_qubit += 1;
        }
        let layer = 1 + g.qubits.iter().map(|&q| frontier[q]).max().unwrap_or(0);
        for &q in &g.qubits {
            frontier[q] = layer;
        }
        depth = depth.max(layer);
    }
    GateStats {
        counts,
        total: c.len(),
        two_qubit,
        depth,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn c2_touches_the_stated_sites() {
        let gates = build_c2(5, 4, 0.3);
        // p = 4 over M = 5: sites 2 and 3
        assert_eq!(gates[0], Gate::cnot(3, 2));
        assert_eq!(gates[1], Gate::cry(2, 3, 0.3));
        assert_eq!(gates[2], Gate::cnot(3, 2));
    }

    #[test]
    fn c3_touches_the_stated_sites() {
        let gates = build_c3(5, 5, 3, 0.7);
        // p = 5, r = 3 over M = 5: sites 1, 3, 4
        assert_eq!(gates[0], Gate::cnot(4, 1));
        assert_eq!(gates[1], Gate::ccry(3, 1, 4, 0.7));
        assert_eq!(gates[2], Gate::cnot(4, 1));
    }

    #[test]
    fn u_mn_stage_order_matches_the_cascade() {
        let angles = AngleTable::agp(&[1.0; 5], 3).unwrap();
        let c = build_u_mn(&angles).unwrap();
        let mut stages: Vec<(usize, usize)> = c
            .labels()
            .iter()
            .filter_map(|l| match l {
                BlockLabel::C2 { p, scs_q } => Some((*p, *scs_q)),
                _ => None,
            })
            .collect();
        stages.dedup();
        assert_eq!(stages, vec![(5, 3), (4, 3), (3, 2), (2, 1)]);
    }

    #[test]
    fn full_register_circuit_is_x_layer_only() {
        let g = GeminalVector::unit(3, 3).unwrap();
        let c = build_agp_circuit(&g).unwrap();
        assert!(c
            .iter()
            .all(|(g, l)| l == BlockLabel::Init && g.kind == GateKind::X
                || l != BlockLabel::Init));
        // N = M: the cascade has only the triangular tail, acting on |1..1>
        let inits = c.labels().iter().filter(|l| **l == BlockLabel::Init).count();
        assert_eq!(inits, 3);
    }

    #[test]
    fn jastrow_layer_has_unit_depth() {
        let c = build_jastrow(&[0.1, 0.2, 0.3, 0.4]);
        let stats = gate_stats(&c);
        assert_eq!(stats.depth, 1);
        assert_eq!(stats.counts[&GateKind::Rz], 4);
    }

    #[test]
    fn zero_phases_skip_the_jastrow_layer() {
        let g = GeminalVector::unit(4, 2).unwrap();
        let c = build_agp_circuit(&g).unwrap();
        assert!(c.labels().iter().all(|l| *l != BlockLabel::Jastrow));
        let g2 = GeminalVector::new(4, 2, vec![1.0; 4], vec![0.0, 0.5, 0.0, 0.0]).unwrap();
        let c2 = build_agp_circuit(&g2).unwrap();
        assert!(c2.labels().iter().any(|l| *l == BlockLabel::Jastrow));
    }

    #[test]
    fn circuits_are_deterministic() {
        let g = GeminalVector::new(
            5,
            2,
            vec![0.3, 1.2, 0.8, 0.5, 0.9],
            vec![0.1, 0.0, 2.2, 0.0, 1.0],
        )
        .unwrap();
        let a = build_agp_circuit(&g).unwrap();
        let b = build_agp_circuit(&g).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_json(), b.to_json());
    }

    #[test]
    fn interlace_network_is_a_permutation() {
        for m in 1..=6 {
            let swaps = interlace_swaps(m);
            // apply to a wire vector and confirm the final layout
            let mut wires: Vec<usize> = (0..2 * m).collect();
            for s in &swaps {
                wires.swap(s.qubits[0] - 1, s.qubits[1] - 1);
            }
            for pos in 0..2 * m {
                let want = if pos % 2 == 0 { pos / 2 } else { m + pos / 2 };
                assert_eq!(wires[pos], want);
            }
        }
    }

    #[test]
    fn fermionic_block_has_cnot_fanout() {
        let g = GeminalVector::unit(3, 2).unwrap();
        let c = build_fermionic_circuit(&g, PairOrdering::Block).unwrap();
        assert_eq!(c.width(), 6);
        assert_eq!(c.sector(), Some(4));
        let cnots: Vec<&Gate> = c
            .iter()
            .filter(|(_, l)| *l == BlockLabel::PairingCnot)
            .map(|(g, _)| g)
            .collect();
        assert_eq!(cnots.len(), 3);
        assert_eq!(*cnots[0], Gate::cnot(1, 4));
    }

    #[test]
    fn qagp_requires_even_shape() {
        let g = GeminalVector::unit(6, 2).unwrap();
        assert!(build_qagp_circuit(&g).is_ok());
        let odd = GeminalVector::unit(5, 2).unwrap();
        assert!(build_qagp_circuit(&odd).is_err());
    }

    #[test]
    fn lowering_removes_ccry_and_keeps_labels() {
        let angles = AngleTable::agp(&[1.0; 4], 2).unwrap();
        let c = build_u_mn(&angles).unwrap();
        let low = c.lowered();
        assert!(low.gates().iter().all(|g| g.kind != GateKind::CCRy));
        assert_eq!(low.labels().len(), low.gates().len());
        let em = c.emission_form();
        assert!(em.gates().iter().all(|g| matches!(
            g.kind,
            GateKind::X | GateKind::Ry | GateKind::Rz | GateKind::Cnot
        )));
    }

    #[test]
    fn stats_on_empty_circuit_are_zero() {
        let stats = gate_stats(&Circuit::new(4));
        assert_eq!(stats.total, 0);
        assert_eq!(stats.two_qubit, 0);
        assert_eq!(stats.depth, 0);
        assert!(stats.counts.is_empty());
    }

    #[test]
    #[should_panic(expected = "outside width")]
    fn out_of_range_qubit_is_rejected() {
        let mut c = Circuit::new(2);
        c.push(Gate::x(3), BlockLabel::Init);
    }
}
