//! Eigenanalysis of the excitation-conserving non-Hermitian Hamiltonian.
//!
//! The Hamiltonian commutes with the total photon number, so every
//! N-excitation block can be diagonalised on its own. Closed forms exist for
//! N = 1 (a quadratic) and N = 2 (a cubic); larger blocks go through the
//! dense eigensolver.

use faer::{c64, Mat};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hilbert::{FockBasis, Truncation};
use crate::linalg;
use crate::model::{build_hamiltonian, derived_rates, HamiltonianVariant, SystemParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum BranchLabel {
    Plus,
    Minus,
    Zero,
    Index(usize),
}

impl std::fmt::Display for BranchLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BranchLabel::Plus => write!(f, "+"),
            BranchLabel::Minus => write!(f, "-"),
            BranchLabel::Zero => write!(f, "0"),
            BranchLabel::Index(i) => write!(f, "#{i}"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SubspaceEigensystem {
    /// Excitation number of the block.
    pub n: usize,
    /// Block basis states (m, n), ascending m.
    pub states: Vec<(usize, usize)>,
    pub eigenvalues: Vec<c64>,
    /// Unit-norm eigenvectors over `states`.
    pub eigenvectors: Vec<Vec<c64>>,
    pub labels: Vec<BranchLabel>,
    /// Set when the discriminant is inside the degeneracy neighbourhood.
    pub degenerate: bool,
    /// Set when a closed form was replaced by the dense solve.
    pub fallback: bool,
}

impl SubspaceEigensystem {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn frequencies(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|l| l.re).collect()
    }

    /// κ = −2 Im λ.
    pub fn linewidths(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|l| -2.0 * l.im).collect()
    }

    pub fn by_label(&self, label: BranchLabel) -> Option<(c64, &[c64])> {
        let k = self.labels.iter().position(|&l| l == label)?;
        Some((self.eigenvalues[k], &self.eigenvectors[k]))
    }

    pub fn state_index(&self, m: usize, n: usize) -> Option<usize> {
        self.states.iter().position(|&s| s == (m, n))
    }
}

fn block_states(n: usize) -> Vec<(usize, usize)> {
    (0..=n).map(|m| (m, n - m)).collect()
}

/// Square root of J² − β² on the principal branch.
pub fn one_photon_splitting(p: &SystemParams) -> c64 {
    let beta = derived_rates(p).loss_contrast;
    c64::new(p.j * p.j - beta * beta, 0.0).sqrt()
}

/// λ₁± = ω_c − iΓ ± √(J² − β²) with closed-form eigenvectors.
pub fn one_photon_eigensystem_closed(p: &SystemParams) -> SubspaceEigensystem {
    let r = derived_rates(p);
    let s = one_photon_splitting(p);
    let centre = c64::new(p.omega_c, -r.total_loss);
    let ib = c64::new(0.0, r.loss_contrast);
    let j = c64::new(p.j, 0.0);
    let states = block_states(1); // (0,1), (1,0)
    let mut eigenvalues = Vec::new();
    let mut eigenvectors = Vec::new();
    for sign in [1.0, -1.0] {
        let lam = centre + s * sign;
        // from the first row: (C10, C01) = (J, −(iβ ∓ S)); from the second:
        // (iβ ± S, J). Use whichever is better conditioned.
        let a = (j, -(ib - s * sign));
        let b = (ib + s * sign, j);
        let (c10, c01) = if a.0.norm_sqr() + a.1.norm_sqr() >= b.0.norm_sqr() + b.1.norm_sqr() {
            a
        } else {
            b
        };
        let mut v = vec![c01, c10];
        linalg::normalize(&mut v);
        eigenvalues.push(lam);
        eigenvectors.push(v);
    }
    SubspaceEigensystem {
        n: 1,
        states,
        eigenvalues,
        eigenvectors,
        labels: vec![BranchLabel::Plus, BranchLabel::Minus],
        degenerate: s.norm() <= 1e-6 * p.j,
        fallback: false,
    }
}

/// γ_tip at which β = J: 4J + γ₁′ − γ₂.
pub fn hep_location(j: f64, gamma1_prime: f64, gamma2: f64) -> f64 {
    let g = 4.0 * j + gamma1_prime - gamma2;
    if g < 0.0 {
        log::warn!("exceptional point at negative tip loss ({g}); not reachable");
    }
    g
}

/// Intermediates of the two-photon cubic.
#[derive(Clone, Copy, Debug)]
pub struct CubicTerms {
    pub a: c64,
    pub b: c64,
    pub c: c64,
    pub d: c64,
    pub e: c64,
    pub f: c64,
    pub g: c64,
}

pub fn cubic_terms(p: &SystemParams) -> CubicTerms {
    let i = c64::new(0.0, 1.0);
    let (g1, g2) = (p.gamma1_prime(), p.gamma2_prime());
    let (w, chi, j) = (p.omega_c, p.chi, p.j);
    let dg = g1 - g2;
    let a = c64::new(2.0 * w + 2.0 * chi, -g1);
    let b = c64::new(2.0 * w, -(g1 + g2) / 2.0);
    let c = c64::new(2.0 * w, -g2);
    let d = c64::new(36.0 * j * j * chi + 4.5 * chi * dg * dg - 16.0 * chi.powi(3), 0.0)
        + i * (18.0 * chi * chi * dg);
    let e = c64::new(-12.0 * j * j + 0.75 * dg * dg - 4.0 * chi * chi, 0.0) + i * (3.0 * chi * dg);
    let f = (d + (e * e * e * 4.0 + d * d).sqrt()).powf(1.0 / 3.0);
    // pairwise sum keeps the centre accurate when ω_c dominates
    let g = ((a + c) + b) / 3.0;
    CubicTerms { a, b, c, d, e, f, g }
}

/// Cube-root closed forms for the three two-photon eigenvalues, in the
/// order (0, +, −).
pub fn two_photon_roots(t: &CubicTerms) -> [c64; 3] {
    let i3 = c64::new(0.0, 3f64.sqrt());
    let one = c64::new(1.0, 0.0);
    let c2 = 2f64.powf(2.0 / 3.0);
    let c1 = 2f64.powf(1.0 / 3.0);
    let zero = t.g - (one - i3) * t.e / (3.0 * c2 * t.f) + (one + i3) * t.f / (6.0 * c1);
    let plus = t.g - (one + i3) * t.e / (3.0 * c2 * t.f) + (one - i3) * t.f / (6.0 * c1);
    let minus = t.g + c1 * t.e / (3.0 * t.f) - t.f / (3.0 * c1);
    [zero, plus, minus]
}

fn cross(u: [c64; 3], v: [c64; 3]) -> [c64; 3] {
    [
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    ]
}

/// Null vector of the 3×3 matrix M − λ as the best-conditioned cross product
/// of two of its rows. For rows 1 and 3 this is the familiar
/// (√2J(C−λ), −(C−λ)(A−λ), √2J(A−λ)) form.
fn two_photon_vector(t: &CubicTerms, j: f64, lam: c64) -> [c64; 3] {
    let s = c64::new(2f64.sqrt() * j, 0.0);
    let z = c64::new(0.0, 0.0);
    let rows = [[t.a - lam, s, z], [s, t.b - lam, s], [z, s, t.c - lam]];
    let cands = [cross(rows[0], rows[2]), cross(rows[0], rows[1]), cross(rows[1], rows[2])];
    let nrm = |v: &[c64; 3]| v.iter().map(|x| x.norm_sqr()).sum::<f64>();
    let mut best = cands[0];
    for c in &cands[1..] {
        if nrm(c) > nrm(&best) * (1.0 + 1e-12) {
            best = *c;
        }
    }
    best
}

/// Two-photon eigenvalues and eigenvectors from the cubic closed form. The
/// block is ordered (2,0), (1,1), (0,2) internally; the returned states
/// follow the basis order (0,2), (1,1), (2,0).
pub fn two_photon_eigensystem_closed(p: &SystemParams) -> Result<SubspaceEigensystem> {
    let t = cubic_terms(p);
    let scale = p.rate_scale();
    if !(t.f.norm() > 1e-7 * scale) || !t.f.re.is_finite() {
        log::debug!("two-photon cubic ill-conditioned (|F| = {:e}); dense fallback", t.f.norm());
        let mut eig = subspace_eigensystem_numeric(p, 2)?;
        eig.fallback = true;
        return Ok(eig);
    }
    let roots = two_photon_roots(&t);
    let mut eigenvectors = Vec::with_capacity(3);
    for &lam in &roots {
        let v = two_photon_vector(&t, p.j, lam);
        let mut out = vec![v[2], v[1], v[0]];
        linalg::normalize(&mut out);
        eigenvectors.push(out);
    }
    let mut min_gap = f64::INFINITY;
    for a in 0..3 {
        for b in a + 1..3 {
            min_gap = min_gap.min((roots[a] - roots[b]).norm());
        }
    }
    Ok(SubspaceEigensystem {
        n: 2,
        states: block_states(2),
        eigenvalues: roots.to_vec(),
        eigenvectors,
        labels: vec![BranchLabel::Zero, BranchLabel::Plus, BranchLabel::Minus],
        degenerate: min_gap < 1e-6 * p.j.max(f64::MIN_POSITIVE),
        fallback: false,
    })
}

/// Dense N-excitation block of the excitation-conserving Hamiltonian.
pub fn subspace_block(p: &SystemParams, n: usize) -> Result<Mat<c64>> {
    let basis = FockBasis::shared(Truncation::Total(n));
    let h = build_hamiltonian(p, &basis, HamiltonianVariant::ExcitationConservingNonHermitian)?;
    let idx = basis.excitation_block(n);
    Ok(Mat::from_fn(idx.len(), idx.len(), |a, b| h.get(idx[a], idx[b])))
}

/// Dense eigensolve of the N-excitation block.
pub fn subspace_eigensystem_numeric(p: &SystemParams, n: usize) -> Result<SubspaceEigensystem> {
    p.validate()?;
    let block = subspace_block(p, n)?;
    let (vals, vecs) = linalg::eig(&block)?;
    let mut eigenvectors = Vec::with_capacity(vals.len());
    for k in 0..vals.len() {
        let mut v = linalg::column(&vecs, k);
        let nv = linalg::norm2(&v);
        if !(nv > 0.0) || !nv.is_finite() {
            return Err(Error::NumericalFailure(format!(
                "degenerate eigenvector {k} in the {n}-excitation block"
            )));
        }
        linalg::normalize(&mut v);
        eigenvectors.push(v);
    }
    let mut min_gap = f64::INFINITY;
    for a in 0..vals.len() {
        for b in a + 1..vals.len() {
            min_gap = min_gap.min((vals[a] - vals[b]).norm());
        }
    }
    Ok(SubspaceEigensystem {
        n,
        states: block_states(n),
        labels: (0..vals.len()).map(BranchLabel::Index).collect(),
        eigenvalues: vals,
        eigenvectors,
        degenerate: min_gap < 1e-6 * p.j.max(f64::MIN_POSITIVE),
        fallback: false,
    })
}

/// |amplitude|² of every eigenvector on every block state.
pub fn localization(eig: &SubspaceEigensystem) -> Vec<Vec<f64>> {
    eig.eigenvectors
        .iter()
        .map(|v| {
            let n: f64 = v.iter().map(|z| z.norm_sqr()).sum();
            v.iter().map(|z| z.norm_sqr() / n).collect()
        })
        .collect()
}

/// 1 / min over pairs of (1 − |⟨v_i|v_j⟩|²); infinite at a coalescence.
pub fn eigenvector_condition(eig: &SubspaceEigensystem) -> f64 {
    let v = &eig.eigenvectors;
    let mut worst = 1.0f64;
    for a in 0..v.len() {
        for b in a + 1..v.len() {
            let ov = linalg::inner(&v[a], &v[b]).norm_sqr();
            worst = worst.min(1.0 - ov);
        }
    }
    if worst <= 0.0 {
        f64::INFINITY
    } else {
        1.0 / worst
    }
}

/// Reorders each eigenvalue list so that entry k continues entry k of the
/// previous list (nearest-neighbour matching). Returns the permutations
/// applied: `out[s][k] = input[s][perm[s][k]]`.
pub fn continue_branches(sequence: &[Vec<c64>]) -> Vec<Vec<usize>> {
    let mut perms = Vec::with_capacity(sequence.len());
    let mut prev: Option<Vec<c64>> = None;
    for vals in sequence {
        let perm = match &prev {
            None => (0..vals.len()).collect::<Vec<_>>(),
            Some(pv) if pv.len() == vals.len() => linalg::match_pairs(pv, vals),
            Some(_) => (0..vals.len()).collect(),
        };
        prev = Some(perm.iter().map(|&k| vals[k]).collect());
        perms.push(perm);
    }
    perms
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::UnitSystem;

    fn preset(gamma_tip: f64) -> SystemParams {
        SystemParams {
            omega_c: 0.0,
            delta: 0.0,
            chi: 2.171_138_672_453_155_5,
            j: 2.0,
            gamma_1: 0.5,
            gamma_ex: 0.5,
            gamma_2: 0.1,
            gamma_tip,
            omega_drive: 0.01,
            drive_phase: 0.0,
            unit_system: UnitSystem::Normalized,
        }
    }

    #[test]
    fn hep_examples() {
        assert!((hep_location(2.0, 1.0, 0.1) - 8.9).abs() < 1e-14);
        assert_eq!(hep_location(1.0, 1.0, 1.0), 4.0);
        assert!((hep_location(3.0, 1.0, 0.1) - hep_location(2.0, 1.0, 0.1) - 4.0).abs() < 1e-14);
    }

    #[test]
    fn one_photon_at_ep_is_flagged() {
        let e = one_photon_eigensystem_closed(&preset(8.9));
        assert!(e.degenerate);
        assert!((e.eigenvalues[0] - e.eigenvalues[1]).norm() < 1e-6);
        assert!((e.eigenvalues[0].im + 2.5).abs() < 1e-12);
    }

    #[test]
    fn one_photon_decoupled() {
        let mut p = preset(2.0);
        p.j = 0.0;
        p.omega_c = 1.5;
        let e = one_photon_eigensystem_closed(&p);
        let want = [c64::new(1.5, -0.5), c64::new(1.5, -1.05)];
        assert!(linalg::multiset_rel_error(&e.eigenvalues, &want, 1.0) < 1e-14);
        for pops in localization(&e) {
            assert!(pops.iter().any(|&x| (x - 1.0).abs() < 1e-14));
        }
    }

    #[test]
    fn one_photon_preset_against_dense() {
        let p = preset(0.0);
        let e = one_photon_eigensystem_closed(&p);
        let s = (4.0f64 - 0.225 * 0.225).sqrt();
        assert!((e.frequencies()[0] - s).abs() < 1e-14);
        assert!((e.frequencies()[1] + s).abs() < 1e-14);
        let n = subspace_eigensystem_numeric(&p, 1).unwrap();
        assert!(linalg::multiset_rel_error(&e.eigenvalues, &n.eigenvalues, 1.0) < 1e-12);
    }

    #[test]
    fn closed_eigenvectors_solve_block() {
        for gt in [0.0, 3.0, 8.0, 12.0, 20.0] {
            let p = preset(gt);
            for e in [one_photon_eigensystem_closed(&p), two_photon_eigensystem_closed(&p).unwrap()] {
                let m = subspace_block(&p, e.n).unwrap();
                for (lam, v) in e.eigenvalues.iter().zip(&e.eigenvectors) {
                    for i in 0..v.len() {
                        let r: c64 = (0..v.len()).map(|k| m[(i, k)] * v[k]).sum::<c64>() - lam * v[i];
                        assert!(r.norm() < 1e-10, "gt={gt} n={} r={r}", e.n);
                    }
                }
            }
        }
    }

    #[test]
    fn two_photon_linear_symmetric() {
        let mut p = preset(0.0);
        p.chi = 0.0;
        p.gamma_2 = 1.0;
        p.omega_c = 0.3;
        let e = two_photon_eigensystem_closed(&p).unwrap();
        let want = [c64::new(0.6, -1.0), c64::new(4.6, -1.0), c64::new(-3.4, -1.0)];
        assert!(linalg::multiset_rel_error(&e.eigenvalues, &want, 1.0) < 1e-12);
    }

    #[test]
    fn two_photon_trace_identity_and_dense() {
        let p = preset(8.9);
        let t = cubic_terms(&p);
        let e = two_photon_eigensystem_closed(&p).unwrap();
        let sum: c64 = e.eigenvalues.iter().sum();
        assert!((sum - (t.a + t.b + t.c)).norm() < 1e-12);
        let n = subspace_eigensystem_numeric(&p, 2).unwrap();
        assert!(linalg::multiset_rel_error(&e.eigenvalues, &n.eigenvalues, 1.0) < 1e-9);
    }

    #[test]
    fn vacuum_block() {
        let e = subspace_eigensystem_numeric(&preset(1.0), 0).unwrap();
        assert_eq!(e.eigenvalues, vec![c64::new(0.0, 0.0)]);
        assert_eq!(e.states, vec![(0, 0)]);
    }

    #[test]
    fn localization_far_past_ep() {
        let p = preset(20.0);
        let e1 = one_photon_eigensystem_closed(&p);
        let pop = localization(&e1);
        let i10 = e1.state_index(1, 0).unwrap();
        // the branch with the narrow linewidth sits on the low-loss resonator
        let narrow = if e1.linewidths()[0] < e1.linewidths()[1] { 0 } else { 1 };
        assert!(pop[narrow][i10] > 0.9);
        let e2 = two_photon_eigensystem_closed(&p).unwrap();
        let mut dominant: Vec<usize> = localization(&e2)
            .iter()
            .map(|row| (0..3).max_by(|&a, &b| row[a].total_cmp(&row[b])).unwrap())
            .collect();
        dominant.sort();
        assert_eq!(dominant, vec![0, 1, 2]);
    }

    #[test]
    fn hybridised_when_loss_balanced() {
        let mut p = preset(0.0);
        p.gamma_2 = 1.0;
        for row in localization(&one_photon_eigensystem_closed(&p)) {
            assert!((row[0] - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn condition_grows_towards_ep() {
        let below: Vec<f64> = [6.0, 7.0, 8.0, 8.5, 8.8]
            .iter()
            .map(|&g| eigenvector_condition(&one_photon_eigensystem_closed(&preset(g))))
            .collect();
        assert!(below.windows(2).all(|w| w[1] > w[0]));
        let above: Vec<f64> = [12.0, 11.0, 10.0, 9.3, 9.0]
            .iter()
            .map(|&g| eigenvector_condition(&one_photon_eigensystem_closed(&preset(g))))
            .collect();
        assert!(above.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn branch_structure_swaps_across_ep() {
        let b = one_photon_eigensystem_closed(&preset(5.0));
        assert!((b.linewidths()[0] - b.linewidths()[1]).abs() < 1e-12);
        assert!(b.frequencies()[0] > b.frequencies()[1]);
        let a = one_photon_eigensystem_closed(&preset(12.0));
        assert!((a.frequencies()[0] - a.frequencies()[1]).abs() < 1e-12);
        assert!((a.linewidths()[0] - a.linewidths()[1]).abs() > 1.0);
    }

    #[test]
    fn continuation_follows_nearest() {
        let seq = vec![
            vec![c64::new(1.0, 0.0), c64::new(-1.0, 0.0)],
            vec![c64::new(-0.9, 0.0), c64::new(0.9, 0.0)],
        ];
        assert_eq!(continue_branches(&seq), vec![vec![0, 1], vec![1, 0]]);
    }
}
