//! Exact statevector execution: a dense 2^n path for generality and a
//! fixed-weight path that applies composite blocks directly on the
//! binomial-dimension sector.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::circuit::{BlockLabel, Circuit, Gate, GateKind};
use crate::combin::{binomial, masks_of_weight, rank_colex};
use crate::error::{Error, Result};
use crate::states::{DenseState, SubspaceState, DENSE_QUBIT_LIMIT};

/// Final state plus bookkeeping from a run.
#[derive(Debug, Clone)]
pub struct SimulationResult<S> {
    pub final_state: S,
    /// Norm outside the circuit's declared weight sector; `None` when the
    /// circuit declares no sector. Only the dense path can leak.
    pub leaked_norm: Option<f64>,
    /// Number of composite blocks traversed.
    pub block_applications: usize,
}

fn count_blocks(c: &Circuit) -> usize {
    let mut blocks = 0;
    let mut prev: Option<BlockLabel> = None;
    for &label in c.labels() {
        if Some(label) != prev {
            blocks += 1;
            prev = Some(label);
        }
    }
    blocks
}

/// Applies one gate in place. Qubit q addresses bit q - 1.
pub(crate) fn apply_gate(amps: &mut [Complex64], gate: &Gate) {
    match gate.kind {
        GateKind::X => {
            let bit = 1usize << (gate.qubits[0] - 1);
            for i in 0..amps.len() {
                if i & bit == 0 {
                    amps.swap(i, i | bit);
                }
            }
        }
        GateKind::Ry | GateKind::CRy | GateKind::CCRy => {
            let bit = 1usize << (gate.target() - 1);
            let cmask: usize = gate
                .controls()
                .iter()
                .map(|&q| 1usize << (q - 1))
                .sum();
            let half = gate.angle.unwrap() / 2.0;
            let (s, c) = half.sin_cos();
            for i in 0..amps.len() {
                if i & bit == 0 && i & cmask == cmask {
                    let j = i | bit;
                    let a0 = amps[i];
                    let a1 = amps[j];
                    amps[i] = c * a0 - s * a1;
                    amps[j] = s * a0 + c * a1;
                }
            }
        }
        GateKind::Rz => {
            let bit = 1usize << (gate.qubits[0] - 1);
            let half = gate.angle.unwrap() / 2.0;
            let minus = Complex64::from_polar(1.0, -half);
            let plus = Complex64::from_polar(1.0, half);
            for (i, a) in amps.iter_mut().enumerate() {
                *a *= if i & bit == 0 { minus } else { plus };
            }
        }
        GateKind::Cnot => {
            let cbit = 1usize << (gate.qubits[0] - 1);
            let tbit = 1usize << (gate.qubits[1] - 1);
            for i in 0..amps.len() {
                if i & cbit == cbit && i & tbit == 0 {
                    amps.swap(i, i | tbit);
                }
            }
        }
        GateKind::Swap => {
            let a = 1usize << (gate.qubits[0] - 1);
            let b = 1usize << (gate.qubits[1] - 1);
            for i in 0..amps.len() {
                if i & a == a && i & b == 0 {
                    amps.swap(i, i ^ a ^ b);
                }
            }
        }
    }
}

/// Runs the circuit on the given initial register, gate by gate.
pub fn run_dense(c: &Circuit, init: DenseState) -> Result<SimulationResult<DenseState>> {
    if c.width() > DENSE_QUBIT_LIMIT {
        return Err(Error::MemoryGuard {
            qubits: c.width(),
            max: DENSE_QUBIT_LIMIT,
        });
    }
    if c.width() != init.n_qubits() {
        return Err(Error::WidthMismatch {
            circuit: c.width(),
            register: init.n_qubits(),
        });
    }
    let mut state = init;
    for g in c.gates() {
        apply_gate(state.amplitudes_mut(), g);
    }
    let leaked_norm = c.sector().map(|n| {
        let mut sector = 0.0f64;
        for &mask in &masks_of_weight(state.n_qubits(), n) {
            sector += state.amplitudes()[mask as usize].norm_sqr();
        }
        (state.norm_sq() - sector).max(0.0)
    });
    Ok(SimulationResult {
        final_state: state,
        leaked_norm,
        block_applications: count_blocks(c),
    })
}

/// Runs the circuit from the all-zeros register.
pub fn run_dense_from_vacuum(c: &Circuit) -> Result<SimulationResult<DenseState>> {
    if c.width() > DENSE_QUBIT_LIMIT {
        return Err(Error::MemoryGuard {
            qubits: c.width(),
            max: DENSE_QUBIT_LIMIT,
        });
    }
    run_dense(c, DenseState::zero_state(c.width())?)
}

const SUBSPACE_SITE_LIMIT: usize = 24;

struct SectorIndex {
    masks: Vec<u64>,
    rank_of: Vec<u32>,
}

impl SectorIndex {
    fn build(m: usize, n: usize) -> Result<Self> {
        if m > SUBSPACE_SITE_LIMIT {
            return Err(Error::DimensionGuard {
                dim: binomial(m, n),
                max: binomial(SUBSPACE_SITE_LIMIT, SUBSPACE_SITE_LIMIT / 2),
            });
        }
        let masks = masks_of_weight(m, n);
        let mut rank_of = vec![u32::MAX; 1usize << m];
        for (r, &mask) in masks.iter().enumerate() {
            rank_of[mask as usize] = r as u32;
        }
        Ok(Self { masks, rank_of })
    }

    fn rank(&self, mask: u64) -> usize {
        self.rank_of[mask as usize] as usize
    }
}

/// Composite splitting rotation on the sector vector. `mid` is `None` for the
/// two-qubit block. Rotates `(lo in, hi out) <-> (hi in, lo out)` by the
/// block's Givens angle.
fn apply_split_block(
    amps: &mut [Complex64],
    index: &SectorIndex,
    lo: usize,
    mid: Option<usize>,
    hi: usize,
    tau: f64,
) {
    let lo_bit = 1u64 << (lo - 1);
    let hi_bit = 1u64 << (hi - 1);
    let mid_bit = mid.map(|q| 1u64 << (q - 1)).unwrap_or(0);
    let (s, c) = (tau / 2.0).sin_cos();
    for r in 0..amps.len() {
        let mask = index.masks[r];
        if mask & lo_bit != 0 && mask & hi_bit == 0 && mask & mid_bit == mid_bit {
            let partner = index.rank((mask ^ lo_bit) | hi_bit);
            let keep = amps[r];
            let shift = amps[partner];
            // |lo> branch keeps theta = cos(tau/2); the shifted ket gains
            // sin(tau/2); the reverse pair carries the opposite sign.
            amps[r] = c * keep - s * shift;
            amps[partner] = s * keep + c * shift;
        }
    }
}

/// Executes a weight-conserving circuit directly on the fixed-weight sector.
///
/// Supported blocks: the initial X layer (defining the start determinant),
/// the splitting blocks, and the phase layer. Pairing fan-outs and swap
/// networks change or permute the sector and are rejected.
pub fn run_subspace(c: &Circuit, m: usize, n: usize) -> Result<SimulationResult<SubspaceState>> {
    if c.width() != m {
        return Err(Error::WidthMismatch {
            circuit: c.width(),
            register: m,
        });
    }
    if n > m {
        return Err(Error::InvalidShape { m, n });
    }
    let index = SectorIndex::build(m, n)?;
    let dim = index.masks.len();
    let mut amps = vec![Complex64::ZERO; dim];
    let mut blocks = 0usize;

    // Determine the start determinant from the Init block, defaulting to the
    // reference |0..01..1> when the circuit carries no X layer.
    let mut init_mask = 0u64;
    let mut explicit_init = false;
    for (g, label) in c.iter() {
        if label == BlockLabel::Init {
            if g.kind != GateKind::X {
                return Err(Error::UnsupportedCircuit {
                    reason: format!("init block contains non-X gate {:?}", g.kind),
                });
            }
            explicit_init = true;
            init_mask ^= 1u64 << (g.qubits[0] - 1);
        }
    }
    if !explicit_init {
        init_mask = (1u64 << n) - 1;
    }
    if init_mask.count_ones() as usize != n {
        return Err(Error::UnsupportedCircuit {
            reason: format!(
                "init layer prepares weight {}, expected {}",
                init_mask.count_ones(),
                n
            ),
        });
    }
    amps[index.rank(init_mask)] = Complex64::ONE;

    let mut i = 0usize;
    let gates = c.gates();
    let labels = c.labels();
    while i < gates.len() {
        let label = labels[i];
        match label {
            BlockLabel::Init => {
                blocks += 1;
                while i < gates.len() && labels[i] == BlockLabel::Init {
                    i += 1;
                }
            }
            BlockLabel::C2 { p, scs_q } => {
                let end = block_end(labels, i);
                let tau = rotation_angle(&gates[i..end]).ok_or_else(|| {
                    Error::UnsupportedCircuit {
                        reason: format!("malformed C2 block at stage ({p},{scs_q})"),
                    }
                })?;
                let lo = m - p + 1;
                apply_split_block(&mut amps, &index, lo, None, lo + 1, tau);
                blocks += 1;
                i = end;
            }
            BlockLabel::C3 { p, r, .. } => {
                let end = block_end(labels, i);
                let tau =
                    rotation_angle(&gates[i..end]).ok_or_else(|| Error::UnsupportedCircuit {
                        reason: format!("malformed C3 block at ({p},{r})"),
                    })?;
                let lo = m - p + 1;
                apply_split_block(&mut amps, &index, lo, Some(m - p + r), m - p + r + 1, tau);
                blocks += 1;
                i = end;
            }
            BlockLabel::Jastrow => {
                let end = block_end(labels, i);
                for g in &gates[i..end] {
                    if g.kind != GateKind::Rz {
                        return Err(Error::UnsupportedCircuit {
                            reason: format!("phase layer contains non-Rz gate {:?}", g.kind),
                        });
                    }
                    let bit = 1u64 << (g.qubits[0] - 1);
                    let half = g.angle.unwrap() / 2.0;
                    let minus = Complex64::from_polar(1.0, -half);
                    let plus = Complex64::from_polar(1.0, half);
                    for (r, a) in amps.iter_mut().enumerate() {
                        *a *= if index.masks[r] & bit == 0 { minus } else { plus };
                    }
                }
                blocks += 1;
                i = end;
            }
            BlockLabel::PairingCnot | BlockLabel::SwapNetwork => {
                return Err(Error::UnsupportedCircuit {
                    reason: "pairing fan-out and swap networks leave the fixed-weight sector"
                        .into(),
                });
            }
        }
    }

    Ok(SimulationResult {
        final_state: SubspaceState::new(m, n, amps)?,
        leaked_norm: None,
        block_applications: blocks,
    })
}

fn block_end(labels: &[BlockLabel], start: usize) -> usize {
    let label = labels[start];
    let mut end = start + 1;
    while end < labels.len() && labels[end] == label {
        end += 1;
    }
    end
}

/// The single rotation angle carried by a splitting block.
fn rotation_angle(gates: &[Gate]) -> Option<f64> {
    let mut angle = None;
    for g in gates {
        match g.kind {
            GateKind::CRy | GateKind::CCRy => {
                if angle.is_some() {
                    return None;
                }
                angle = g.angle;
            }
            GateKind::Cnot => {}
            _ => return None,
        }
    }
    angle
}

/// Exact composite matrix of a gate list restricted to <= 3 touched qubits.
/// Column k is the image of the touched-qubit basis state k (bit j of k is
/// the occupation of `touched[j]`).
pub fn block_unitary(gates: &[Gate], touched: &[usize]) -> Result<DMatrix<Complex64>> {
    if touched.len() > 3 {
        return Err(Error::UnsupportedCircuit {
            reason: format!("block_unitary supports at most 3 qubits, got {}", touched.len()),
        });
    }
    let k = touched.len();
    let dim = 1usize << k;
    // remap gate qubits onto a compact register
    let mut remapped = Vec::with_capacity(gates.len());
    for g in gates {
        let mut ng = g.clone();
        for q in &mut ng.qubits {
            let pos = touched
                .iter()
                .position(|&t| t == *q)
                .ok_or_else(|| Error::UnsupportedCircuit {
                    reason: format!("gate touches qubit {q} outside the block"),
                })?;
            *q = pos + 1;
        }
        remapped.push(ng);
    }
    let mut mat = DMatrix::<Complex64>::zeros(dim, dim);
    for col in 0..dim {
        let mut amps = vec![Complex64::ZERO; dim];
        amps[col] = Complex64::ONE;
        for g in &remapped {
            apply_gate(&mut amps, g);
        }
        for row in 0..dim {
            mat[(row, col)] = amps[row];
        }
    }
    Ok(mat)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{
        build_agp_circuit, build_c2, build_c3, build_fermionic_circuit, build_jastrow,
    };
    use crate::states::{build_esp_state, embed, project, GeminalVector, PairOrdering};

    fn lcg(seed: &mut u64) -> f64 {
        *seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((*seed >> 11) as f64) / ((1u64 << 53) as f64)
    }

    fn random_geminal(m: usize, n: usize, seed: u64) -> GeminalVector {
        let mut s = seed;
        let mags: Vec<f64> = (0..m).map(|_| 0.1 + 1.5 * lcg(&mut s)).collect();
        let phases: Vec<f64> = (0..m)
            .map(|_| 2.0 * std::f64::consts::PI * lcg(&mut s))
            .collect();
        GeminalVector::new(m, n, mags, phases).unwrap()
    }

    #[test]
    fn empty_circuit_leaves_the_register() {
        let c = Circuit::new(3);
        let init = DenseState::zero_state(3).unwrap();
        let out = run_dense(&c, init).unwrap();
        assert_eq!(out.final_state.amplitude(0), Complex64::ONE);
        assert_eq!(out.block_applications, 0);
    }

    #[test]
    fn x_flips_qubit_one() {
        let mut c = Circuit::new(1);
        c.push(Gate::x(1), BlockLabel::Init);
        let out = run_dense_from_vacuum(&c).unwrap();
        assert_eq!(out.final_state.amplitude(1), Complex64::ONE);
    }

    #[test]
    fn memory_guard_triggers_before_allocation() {
        let c = Circuit::new(30);
        assert!(matches!(
            run_dense_from_vacuum(&c),
            Err(Error::MemoryGuard { qubits: 30, .. })
        ));
    }

    #[test]
    fn width_mismatch_is_rejected() {
        let c = Circuit::new(3);
        let init = DenseState::zero_state(2).unwrap();
        assert!(matches!(
            run_dense(&c, init),
            Err(Error::WidthMismatch { .. })
        ));
    }

    #[test]
    fn c2_block_matrix_is_the_stated_givens() {
        let theta: f64 = 0.6;
        let tau = 2.0 * theta.acos();
        let bar = (1.0 - theta * theta).sqrt();
        // sites (2, 3) for p = 4, M = 5; touched = [lo, hi]
        let u = block_unitary(&build_c2(5, 4, tau), &[2, 3]).unwrap();
        let re = |x: Complex64| {
            assert!(x.im.abs() < 1e-15);
            x.re
        };
        // basis order over (lo, hi): 0 = |00>, 1 = lo, 2 = hi, 3 = both
        assert!((re(u[(0, 0)]) - 1.0).abs() < 1e-14);
        assert!((re(u[(3, 3)]) - 1.0).abs() < 1e-14);
        assert!((re(u[(1, 1)]) - theta).abs() < 1e-14);
        assert!((re(u[(2, 1)]) - bar).abs() < 1e-14);
        assert!((re(u[(1, 2)]) + bar).abs() < 1e-14);
        assert!((re(u[(2, 2)]) - theta).abs() < 1e-14);
    }

    #[test]
    fn c2_c3_blocks_are_unitary_and_weight_conserving() {
        let mut seed = 5u64;
        for _ in 0..20 {
            let tau = 3.0 * lcg(&mut seed);
            let u2 = block_unitary(&build_c2(4, 3, tau), &[2, 3]).unwrap();
            let id2 = &u2 * u2.adjoint();
            assert!((id2 - DMatrix::identity(4, 4)).norm() < 1e-12);
            let u3 = block_unitary(&build_c3(5, 5, 2, tau), &[1, 2, 3]).unwrap();
            let id3 = &u3 * u3.adjoint();
            assert!((id3 - DMatrix::identity(8, 8)).norm() < 1e-12);
            // weight conservation: entries vanish unless popcounts agree
            for row in 0..8usize {
                for col in 0..8usize {
                    if row.count_ones() != col.count_ones() {
                        assert!(u3[(row, col)].norm() < 1e-14);
                    }
                }
            }
        }
    }

    #[test]
    fn c3_identity_at_tau_zero() {
        let u = block_unitary(&build_c3(5, 5, 3, 0.0), &[1, 3, 4]).unwrap();
        assert!((u - DMatrix::identity(8, 8)).norm() < 1e-14);
    }

    #[test]
    fn subspace_agrees_with_projected_dense() {
        for seed in 0..5u64 {
            let g = random_geminal(7, 3, 100 + seed);
            let c = build_agp_circuit(&g).unwrap();
            let dense = run_dense_from_vacuum(&c).unwrap();
            let (sector, leaked) = project(&dense.final_state, 3).unwrap();
            assert!(leaked <= 1e-12);
            let sub = run_subspace(&c, 7, 3).unwrap();
            assert!((sub.final_state.fidelity(&sector).unwrap() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn subspace_rejects_weight_breaking_blocks() {
        let g = random_geminal(3, 2, 9);
        let c = build_fermionic_circuit(&g, PairOrdering::Block).unwrap();
        assert!(matches!(
            run_subspace(&c, 6, 4),
            Err(Error::UnsupportedCircuit { .. })
        ));
    }

    #[test]
    fn jastrow_only_circuit_is_diagonal() {
        let phases = [0.3, -1.1, 0.7, 0.2];
        let c = build_jastrow(&phases);
        // no init layer: starts from the reference determinant |0011>
        let out = run_subspace(&c, 4, 2).unwrap();
        let expect = Complex64::from_polar(
            1.0,
            0.5 * (phases[0] + phases[1] - phases[2] - phases[3]),
        );
        assert!((out.final_state.amplitude(0b0011) - expect).norm() <= 1e-12);
    }

    #[test]
    fn dense_run_preserves_norm() {
        let g = random_geminal(6, 3, 77);
        let c = build_agp_circuit(&g).unwrap();
        let out = run_dense_from_vacuum(&c).unwrap();
        let tol = 1e-12 * (1.0 + c.len() as f64);
        assert!((out.final_state.norm_sq() - 1.0).abs() <= tol);
        assert!(out.leaked_norm.unwrap() <= 1e-12);
    }

    #[test]
    fn dense_run_is_linear() {
        let g = random_geminal(5, 2, 55);
        let c = build_agp_circuit(&g).unwrap();
        let mut seed = 123u64;
        let dim = 1usize << 5;
        let a: Vec<Complex64> = (0..dim)
            .map(|_| Complex64::new(lcg(&mut seed) - 0.5, lcg(&mut seed) - 0.5))
            .collect();
        let b: Vec<Complex64> = (0..dim)
            .map(|_| Complex64::new(lcg(&mut seed) - 0.5, lcg(&mut seed) - 0.5))
            .collect();
        let alpha = Complex64::new(0.3, -0.8);
        let beta = Complex64::new(-1.1, 0.25);
        let combo: Vec<Complex64> = a
            .iter()
            .zip(&b)
            .map(|(x, y)| alpha * x + beta * y)
            .collect();
        let run = |v: Vec<Complex64>| {
            run_dense(&c, DenseState::new(5, v).unwrap())
                .unwrap()
                .final_state
        };
        let ra = run(a);
        let rb = run(b);
        let rc = run(combo);
        for i in 0..dim {
            let want = alpha * ra.amplitudes()[i] + beta * rb.amplitudes()[i];
            assert!((want - rc.amplitudes()[i]).norm() <= 1e-12);
        }
    }

    #[test]
    fn circuit_output_matches_direct_state() {
        let g = random_geminal(6, 3, 4242);
        let c = build_agp_circuit(&g).unwrap();
        let oracle = embed(&build_esp_state(&g).unwrap()).unwrap();
        let out = run_dense_from_vacuum(&c).unwrap();
        let fid = out.final_state.fidelity(&oracle).unwrap();
        assert!((fid - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn block_unitary_rejects_wide_blocks() {
        assert!(block_unitary(&[], &[1, 2, 3, 4]).is_err());
    }
}
