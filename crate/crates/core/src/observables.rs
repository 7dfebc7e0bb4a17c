//! Moments, correlators, photon distributions and the excitation spectrum.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic;
use crate::error::{Error, Result};
use crate::hilbert::{mode_operator, ComplexOperator, FockBasis, LadderKind, Mode, Truncation};
use crate::liouvillian::{solve_steady, DensityMatrix};
use crate::model::SystemParams;

/// Below this N₁ correlators are reported as undefined.
pub const N1_FLOOR: f64 = 1e-30;

#[derive(Clone, Debug, Serialize)]
pub struct PhotonStatistics {
    pub n1: f64,
    pub n2: f64,
    pub g2: f64,
    pub g3: f64,
    /// (m, n, P_mn) in basis order.
    pub p_mn: Vec<(usize, usize, f64)>,
    /// Marginal distribution of mode 1, index m.
    pub p_m: Vec<f64>,
}

impl PhotonStatistics {
    pub fn population(&self, m: usize, n: usize) -> f64 {
        self.p_mn
            .iter()
            .find(|e| e.0 == m && e.1 == n)
            .map(|e| e.2)
            .unwrap_or(0.0)
    }
}

fn power(op: &ComplexOperator, k: usize) -> Result<ComplexOperator> {
    let mut out = ComplexOperator::identity(op.basis().clone());
    for _ in 0..k {
        out = out.matmul(op)?;
    }
    Ok(out)
}

/// ⟨a†^k a^k⟩ for `mode`, evaluated with operator products.
pub fn factorial_moment(rho: &DensityMatrix, mode: Mode, k: usize) -> Result<f64> {
    let a = mode_operator(rho.basis(), mode, LadderKind::Annihilate);
    let ak = power(&a, k)?;
    Ok(rho.expect(&ak.dagger().matmul(&ak)?)?.re)
}

pub fn marginal_mode1(basis: &FockBasis, populations: &[f64]) -> Vec<f64> {
    let mut p_m = vec![0.0; basis.max_mode1() + 1];
    for (&(m, _), &q) in basis.states().iter().zip(populations) {
        p_m[m] += q;
    }
    p_m
}

pub fn photon_statistics(rho: &DensityMatrix) -> Result<PhotonStatistics> {
    let basis = rho.basis();
    let n1 = factorial_moment(rho, Mode::One, 1)?;
    let n2 = factorial_moment(rho, Mode::Two, 1)?;
    if !(n1 >= N1_FLOOR) {
        return Err(Error::UndefinedCorrelation { n1 });
    }
    let g2 = factorial_moment(rho, Mode::One, 2)? / (n1 * n1);
    let g3 = factorial_moment(rho, Mode::One, 3)? / (n1 * n1 * n1);
    let pops = rho.populations();
    let p_mn = basis
        .states()
        .iter()
        .zip(&pops)
        .map(|(&(m, n), &q)| (m, n, q))
        .collect();
    Ok(PhotonStatistics {
        n1,
        n2,
        g2,
        g3,
        p_mn,
        p_m: marginal_mode1(basis, &pops),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct PoissonRow {
    pub m: usize,
    pub p: f64,
    pub poisson: f64,
    pub deviation: f64,
    /// p / poisson.
    pub ratio: f64,
}

/// Compares a distribution with the Poisson law of the same mean.
pub fn poisson_comparison(p_m: &[f64]) -> Vec<PoissonRow> {
    let mean: f64 = p_m.iter().enumerate().map(|(m, q)| m as f64 * q).sum();
    let mut term = (-mean).exp();
    p_m.iter()
        .enumerate()
        .map(|(m, &p)| {
            if m > 0 {
                term *= mean / m as f64;
            }
            PoissonRow {
                m,
                p,
                poisson: term,
                deviation: p - term,
                ratio: if term > 0.0 { p / term } else { f64::NAN },
            }
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    Analytic,
    Lindblad,
}

impl std::fmt::Display for Backend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Backend::Analytic => "analytic",
            Backend::Lindblad => "lindblad",
        })
    }
}

/// Steady-state observables from either backend.
#[derive(Clone, Debug, Serialize)]
pub struct PointObservables {
    pub n1: f64,
    pub n2: f64,
    pub g2: f64,
    pub g3: f64,
    pub populations: Vec<(usize, usize, f64)>,
}

impl PointObservables {
    pub fn population(&self, m: usize, n: usize) -> f64 {
        self.populations
            .iter()
            .find(|e| e.0 == m && e.1 == n)
            .map(|e| e.2)
            .unwrap_or(0.0)
    }

    pub fn mode1_distribution(&self) -> Vec<f64> {
        let top = self.populations.iter().map(|e| e.0).max().unwrap_or(0);
        let mut p = vec![0.0; top + 1];
        for &(m, _, q) in &self.populations {
            p[m] += q;
        }
        p
    }
}

/// Per-mode cutoff used by the Lindblad backend.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cutoff(pub usize, pub usize);

impl Default for Cutoff {
    fn default() -> Self {
        Cutoff(5, 5)
    }
}

impl Cutoff {
    pub fn basis(&self) -> Arc<FockBasis> {
        FockBasis::shared(Truncation::PerMode(self.0, self.1))
    }
}

pub fn evaluate_point(p: &SystemParams, backend: Backend, cutoff: Cutoff) -> Result<PointObservables> {
    match backend {
        Backend::Analytic => {
            let o = analytic::evaluate(p)?;
            Ok(PointObservables {
                n1: o.n1,
                n2: o.n2,
                g2: o.g2,
                g3: o.g3,
                populations: o.populations,
            })
        }
        Backend::Lindblad => lindblad_point(p, &cutoff.basis()),
    }
}

pub fn lindblad_point(p: &SystemParams, basis: &Arc<FockBasis>) -> Result<PointObservables> {
    let ss = solve_steady(p, basis)?;
    let s = photon_statistics(&ss.rho)?;
    Ok(PointObservables {
        n1: s.n1,
        n2: s.n2,
        g2: s.g2,
        g3: s.g3,
        populations: s.p_mn,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ExcitationSpectrum {
    pub deltas: Vec<f64>,
    /// S₁ = N₁/n₀; NaN where the backend failed.
    pub s1: Vec<f64>,
    pub failed: Vec<Option<String>>,
    pub n0: f64,
    pub peaks: Vec<f64>,
}

/// S₁(Δ) = N₁(Δ)/n₀ with n₀ = Ω²/(γ₁′+γ₂′)².
pub fn excitation_spectrum(
    p: &SystemParams,
    delta_grid: &[f64],
    backend: Backend,
    cutoff: Cutoff,
) -> Result<ExcitationSpectrum> {
    if delta_grid.is_empty() {
        return Err(Error::InvalidArgument("empty detuning grid".into()));
    }
    p.validate_dissipative()?;
    if p.omega_drive == 0.0 {
        return Err(Error::InvalidArgument("excitation spectrum needs a nonzero drive".into()));
    }
    let n0 = (p.omega_drive / (p.gamma1_prime() + p.gamma2_prime())).powi(2);
    let results: Vec<Result<f64>> = delta_grid
        .par_iter()
        .map(|&d| evaluate_point(&p.with_delta(d), backend, cutoff).map(|o| o.n1 / n0))
        .collect();
    let mut s1 = Vec::with_capacity(results.len());
    let mut failed = Vec::with_capacity(results.len());
    for r in results {
        match r {
            Ok(v) => {
                s1.push(v);
                failed.push(None);
            }
            Err(e) => {
                log::warn!("spectrum point skipped: {e}");
                s1.push(f64::NAN);
                failed.push(Some(e.to_string()));
            }
        }
    }
    let peaks = find_peaks(delta_grid, &s1).into_iter().map(|k| delta_grid[k]).collect();
    Ok(ExcitationSpectrum {
        deltas: delta_grid.to_vec(),
        s1,
        failed,
        n0,
        peaks,
    })
}

/// Relative height a peak must exceed the saddle between it and its
/// neighbour by.
pub const PEAK_PROMINENCE: f64 = 1.05;

/// Indices of interior local maxima after merging peaks closer than two
/// grid points and dropping peaks within 5% of the saddle to a neighbour.
/// NaN entries break the scan.
pub fn find_peaks(x: &[f64], y: &[f64]) -> Vec<usize> {
    assert_eq!(x.len(), y.len());
    let n = y.len();
    let mut peaks: Vec<usize> = (1..n.saturating_sub(1))
        .filter(|&i| y[i].is_finite() && y[i] > y[i - 1] && y[i] >= y[i + 1])
        .collect();
    loop {
        let before = peaks.len();
        let mut merged: Vec<usize> = Vec::with_capacity(peaks.len());
        for &k in &peaks {
            match merged.last_mut() {
                Some(last) if k - *last < 2 => {
                    if y[k] > y[*last] {
                        *last = k;
                    }
                }
                _ => merged.push(k),
            }
        }
        peaks = merged;
        let mut k = 0;
        while k + 1 < peaks.len() {
            let (a, b) = (peaks[k], peaks[k + 1]);
            let saddle = y[a..=b].iter().cloned().fold(f64::INFINITY, f64::min);
            let (lower, low_val) = if y[a] < y[b] { (k, y[a]) } else { (k + 1, y[b]) };
            if low_val < PEAK_PROMINENCE * saddle {
                peaks.remove(lower);
            } else {
                k += 1;
            }
        }
        if peaks.len() == before {
            break;
        }
    }
    peaks
}

#[cfg(test)]
mod tests {
    use super::*;
    use faer::c64;

    #[test]
    fn vacuum_has_undefined_correlators() {
        let b = FockBasis::shared(Truncation::PerMode(3, 1));
        let vac = DensityMatrix::fock(b, 0, 0).unwrap();
        assert!(matches!(photon_statistics(&vac), Err(Error::UndefinedCorrelation { .. })));
        assert_eq!(factorial_moment(&vac, Mode::Two, 1).unwrap(), 0.0);
    }

    #[test]
    fn two_photon_fock_state() {
        let b = FockBasis::shared(Truncation::PerMode(3, 1));
        let s = photon_statistics(&DensityMatrix::fock(b, 2, 0).unwrap()).unwrap();
        assert!((s.g2 - 0.5).abs() < 1e-14);
        assert!(s.g3.abs() < 1e-14);
        assert!((s.n1 - 2.0).abs() < 1e-14);
    }

    #[test]
    fn poisson_self_comparison() {
        let mu: f64 = 0.7;
        let mut p = Vec::new();
        let mut t = (-mu).exp();
        for m in 0..40 {
            if m > 0 {
                t *= mu / m as f64;
            }
            p.push(t);
        }
        for row in poisson_comparison(&p) {
            assert!(row.deviation.abs() < 1e-10);
        }
    }

    #[test]
    fn diagonal_sufficiency() {
        let b = FockBasis::shared(Truncation::PerMode(3, 2));
        let d = b.dim();
        let v: Vec<c64> = (0..d).map(|k| c64::new(1.0 / (k + 1) as f64, 0.3 * k as f64)).collect();
        let rho = DensityMatrix::pure(b.clone(), &v).unwrap();
        let s = photon_statistics(&rho).unwrap();
        let num: f64 = s.p_m.iter().enumerate().map(|(m, q)| (m * m.saturating_sub(1)) as f64 * q).sum();
        let den: f64 = s.p_m.iter().enumerate().map(|(m, q)| m as f64 * q).sum();
        assert!((s.g2 - num / (den * den)).abs() < 1e-10);
    }

    #[test]
    fn peak_rules() {
        let x: Vec<f64> = (0..101).map(|k| -5.0 + 0.1 * k as f64).collect();
        let two: Vec<f64> = x.iter().map(|&v| 1.0 / (1.0 + (v - 2.0).powi(2)) + 1.0 / (1.0 + (v + 2.0).powi(2))).collect();
        assert_eq!(find_peaks(&x, &two).len(), 2);
        let one: Vec<f64> = x.iter().map(|&v| 1.0 / (1.0 + v * v)).collect();
        assert_eq!(find_peaks(&x, &one), vec![50]);
        // shoulder barely above the saddle is dropped
        let sh: Vec<f64> = x.iter().map(|&v| 1.0 / (1.0 + 4.0 * v * v) + 0.02 / (1.0 + 25.0 * (v - 1.0).powi(2))).collect();
        assert_eq!(find_peaks(&x, &sh).len(), 1);
    }
}
