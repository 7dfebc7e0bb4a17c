//! Weak-drive perturbative steady state on the N ≤ 3 ladder.
//!
//! Amplitudes C_mn of |ψ⟩ = Σ C_mn |m,n⟩ (C₀₀ = 1) solve the stationary
//! Schrödinger equation of the effective non-Hermitian Hamiltonian order by
//! order in Ω, dropping feedback from order N+1 onto order N.

use faer::c64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::SystemParams;

/// Complex intermediates of the closed-form solution.
#[derive(Clone, Copy, Debug)]
pub struct Intermediates {
    pub delta1: c64,
    pub delta2: c64,
    pub delta3: c64,
    pub delta4: c64,
    pub delta5: c64,
    pub delta6: c64,
    pub eta1: c64,
    pub eta2: c64,
    pub eta3: c64,
    pub xi1: c64,
    pub xi2: c64,
    pub mu: c64,
}

impl Intermediates {
    pub fn new(p: &SystemParams) -> Self {
        let d1 = c64::new(p.delta, -p.gamma1_prime() / 2.0);
        let d2 = c64::new(p.delta, -p.gamma2_prime() / 2.0);
        let d3 = d1 + p.chi;
        let d4 = d1 + 2.0 * p.chi;
        let d5 = d3 * 2.0 + d2;
        let d6 = d1 + d2 * 2.0;
        let j2 = p.j * p.j;
        let eta1 = d1 * d2 - j2;
        let xi1 = d1 * d3 + d2 * d3 - j2;
        let eta2 = xi1 * d2 * 2.0 - d3 * (2.0 * j2);
        let eta3 = -(d2 * d6) + j2;
        let xi2 = -(d2 * d4 * 4.0) - d4 * d5 + j2;
        let mu = xi2 * j2 - d2 * d6 * j2 + d2 * d4 * d5 * d6;
        Intermediates {
            delta1: d1,
            delta2: d2,
            delta3: d3,
            delta4: d4,
            delta5: d5,
            delta6: d6,
            eta1,
            eta2,
            eta3,
            xi1,
            xi2,
            mu,
        }
    }
}

/// Amplitudes up to three photons plus the intermediates they came from.
#[derive(Clone, Debug)]
pub struct AmplitudeSet {
    pub c00: c64,
    pub c01: c64,
    pub c10: c64,
    pub c02: c64,
    pub c11: c64,
    pub c20: c64,
    pub c03: c64,
    pub c12: c64,
    pub c21: c64,
    pub c30: c64,
    pub intermediates: Intermediates,
}

impl AmplitudeSet {
    /// (m, n, C_mn) in basis order.
    pub fn entries(&self) -> [(usize, usize, c64); 10] {
        [
            (0, 0, self.c00),
            (0, 1, self.c01),
            (1, 0, self.c10),
            (0, 2, self.c02),
            (1, 1, self.c11),
            (2, 0, self.c20),
            (0, 3, self.c03),
            (1, 2, self.c12),
            (2, 1, self.c21),
            (3, 0, self.c30),
        ]
    }

    pub fn get(&self, m: usize, n: usize) -> c64 {
        self.entries()
            .iter()
            .find(|e| e.0 == m && e.1 == n)
            .map(|e| e.2)
            .unwrap_or(c64::new(0.0, 0.0))
    }
}

/// Closed-form perturbative amplitudes.
pub fn steady_amplitudes(p: &SystemParams) -> Result<AmplitudeSet> {
    p.validate()?;
    if p.omega_drive > 0.1 * p.gamma1_prime() {
        log::warn!(
            "drive {} exceeds 0.1 gamma1'; perturbative amplitudes lose accuracy",
            p.omega_drive
        );
    }
    let it = Intermediates::new(p);
    let s = p.rate_scale();
    for (name, v, order) in [("eta1", it.eta1, 2), ("eta2", it.eta2, 3), ("mu", it.mu, 4)] {
        if v.norm() < 1e-12 * s.powi(order) {
            return Err(Error::SingularParameter {
                name,
                modulus: v.norm(),
            });
        }
    }
    let Intermediates {
        delta1: d1,
        delta2: d2,
        delta3: d3,
        delta4: d4,
        delta5: d5,
        delta6: d6,
        eta1,
        eta2,
        eta3,
        xi2,
        mu,
        ..
    } = it;
    let (j, om) = (p.j, p.omega_drive);
    let (r2, r6) = (2f64.sqrt(), 6f64.sqrt());
    let j2 = j * j;
    let om2 = om * om;
    let om3 = om2 * om;

    let c01 = c64::new(j * om, 0.0) / eta1;
    let c10 = -d2 * om / eta1;

    let e12 = eta1 * eta2;
    let c02 = (d3 + d2) * (r2 * om2 * j2) / e12;
    let c20 = d2 * d2 * (d1 + d2) * (r2 * om2) / e12;
    let c11 = -(d2 * (d3 + d2)) * (2.0 * om2 * j) / e12;

    let e12m = e12 * mu;
    let br = xi2 * (d2 + d3) - d2 * d2 * (d1 + d2) * 2.0;
    let c03 = -br * (r6 * j2 * j * om3) / (e12m * 3.0);
    let c12 = d2 * br * (r2 * j2 * om3) / e12m;
    let c30 = (d2 * d2 * (d2 * (4.0 * j2) + d5 * eta3) * (d1 + d2)
        - d2 * d2 * d6 * (d2 + d3) * (2.0 * j2))
        * (r6 * om3)
        / (e12m * 3.0);
    let c21 = -(d2 * d2 * eta3 * (d1 + d2) - d2 * d2 * d4 * d6 * (d2 + d3) * 2.0) * (r2 * j * om3)
        / e12m;

    Ok(AmplitudeSet {
        c00: c64::new(1.0, 0.0),
        c01,
        c10,
        c02,
        c11,
        c20,
        c03,
        c12,
        c21,
        c30,
        intermediates: it,
    })
}

/// Largest residual of the order-by-order stationarity equations
/// E_mn C_mn + J(√m√(n+1) C_{m−1,n+1} + √(m+1)√n C_{m+1,n−1}) + Ω√m C_{m−1,n} = 0,
/// relative to the size of the individual terms.
pub fn stationarity_residual(p: &SystemParams, a: &AmplitudeSet) -> f64 {
    let it = &a.intermediates;
    let mut worst = 0.0f64;
    for (m, n, c) in a.entries() {
        if m + n == 0 {
            continue;
        }
        let (mf, nf) = (m as f64, n as f64);
        let e = it.delta1 * mf + it.delta2 * nf + p.chi * mf * (mf - 1.0);
        let mut terms = vec![e * c];
        if m >= 1 {
            terms.push(a.get(m - 1, n + 1) * (p.j * (mf * (nf + 1.0)).sqrt()));
            terms.push(a.get(m - 1, n) * (p.omega_drive * mf.sqrt()));
        }
        if n >= 1 {
            terms.push(a.get(m + 1, n - 1) * (p.j * ((mf + 1.0) * nf).sqrt()));
        }
        let sum: c64 = terms.iter().sum();
        let size = terms.iter().map(|t| t.norm()).fold(0.0, f64::max);
        if size > 0.0 {
            worst = worst.max(sum.norm() / size);
        }
    }
    worst
}

#[derive(Clone, Debug, Serialize)]
pub struct AnalyticObservables {
    pub n1: f64,
    pub n2: f64,
    /// (2P₂₀ + 6P₃₀ + 2P₂₁)/N₁².
    pub g2: f64,
    /// 2P₂₀/N₁².
    pub g2_approx: f64,
    /// Leading-order closed form 4|η₁(Δ₁+Δ₂)/η₂|², independent of Ω.
    pub g2_closed: f64,
    /// 6P₃₀/N₁³.
    pub g3: f64,
    /// (m, n, |C_mn|²) in basis order.
    pub populations: Vec<(usize, usize, f64)>,
}

impl AnalyticObservables {
    pub fn population(&self, m: usize, n: usize) -> f64 {
        self.populations
            .iter()
            .find(|e| e.0 == m && e.1 == n)
            .map(|e| e.2)
            .unwrap_or(0.0)
    }
}

pub fn analytic_observables(a: &AmplitudeSet) -> Result<AnalyticObservables> {
    let populations: Vec<(usize, usize, f64)> =
        a.entries().iter().map(|&(m, n, c)| (m, n, c.norm_sqr())).collect();
    let p = |m, n| a.get(m, n).norm_sqr();
    let n1: f64 = populations.iter().map(|&(m, _, q)| m as f64 * q).sum();
    let n2: f64 = populations.iter().map(|&(_, n, q)| n as f64 * q).sum();
    if !(n1 >= 1e-30) {
        return Err(Error::UndefinedCorrelation { n1 });
    }
    let it = &a.intermediates;
    let g2_closed = 4.0 * (it.eta1 * (it.delta1 + it.delta2) / it.eta2).norm_sqr();
    Ok(AnalyticObservables {
        n1,
        n2,
        g2: (2.0 * p(2, 0) + 6.0 * p(3, 0) + 2.0 * p(2, 1)) / (n1 * n1),
        g2_approx: 2.0 * p(2, 0) / (n1 * n1),
        g2_closed,
        g3: 6.0 * p(3, 0) / (n1 * n1 * n1),
        populations,
    })
}

/// Amplitudes and observables in one call.
pub fn evaluate(p: &SystemParams) -> Result<AnalyticObservables> {
    analytic_observables(&steady_amplitudes(p)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::UnitSystem;

    fn base() -> SystemParams {
        SystemParams {
            omega_c: 0.0,
            delta: -1.3,
            chi: 2.171_138_672_453_155_5,
            j: 2.0,
            gamma_1: 0.5,
            gamma_ex: 0.5,
            gamma_2: 0.1,
            gamma_tip: 3.0,
            omega_drive: 0.01,
            drive_phase: 0.0,
            unit_system: UnitSystem::Normalized,
        }
    }

    #[test]
    fn no_drive_is_vacuum() {
        let mut p = base();
        p.omega_drive = 0.0;
        let a = steady_amplitudes(&p).unwrap();
        for (m, n, c) in a.entries() {
            let want = if m + n == 0 { 1.0 } else { 0.0 };
            assert_eq!(c.norm(), want);
        }
        assert!(matches!(analytic_observables(&a), Err(Error::UndefinedCorrelation { .. })));
    }

    #[test]
    fn decoupled_leaves_linear_resonator_dark() {
        let mut p = base();
        p.j = 0.0;
        let a = steady_amplitudes(&p).unwrap();
        assert_eq!(a.c01.norm(), 0.0);
        assert_eq!(a.c02.norm(), 0.0);
        assert_eq!(a.c11.norm(), 0.0);
    }

    #[test]
    fn single_kerr_cavity_g2() {
        let mut p = base();
        p.j = 0.0;
        p.omega_drive = 1e-4;
        let o = evaluate(&p).unwrap();
        let g1 = p.gamma1_prime();
        let want = (p.delta.powi(2) + g1 * g1 / 4.0) / ((p.delta + p.chi).powi(2) + g1 * g1 / 4.0);
        assert!((o.g2_closed / want - 1.0).abs() < 1e-12);
        assert!((o.g2 / want - 1.0).abs() < 1e-5);
    }

    #[test]
    fn linear_system_is_coherent() {
        let mut p = base();
        p.chi = 0.0;
        let o = evaluate(&p).unwrap();
        assert!((o.g2_closed - 1.0).abs() < 1e-12);
        assert!((o.g2 - 1.0).abs() < 1e-3);
        let it = Intermediates::new(&p);
        let rhs = it.eta1 * (it.delta1 + it.delta2) * 2.0;
        assert!((it.eta2 - rhs).norm() < 1e-12 * it.eta2.norm());
    }

    #[test]
    fn amplitudes_are_stationary() {
        for gt in [0.0, 2.0, 5.3, 8.9, 15.0] {
            let p = base().with_gamma_tip(gt);
            let a = steady_amplitudes(&p).unwrap();
            assert!(stationarity_residual(&p, &a) < 1e-12, "gt={gt}");
        }
    }

    #[test]
    fn order_scaling() {
        let p = base();
        let a = steady_amplitudes(&p).unwrap();
        let mut h = p.clone();
        h.omega_drive /= 2.0;
        let b = steady_amplitudes(&h).unwrap();
        for ((m, n, x), (_, _, y)) in a.entries().iter().zip(b.entries()) {
            let k = 0.5f64.powi((m + n) as i32);
            assert!((y - x * k).norm() <= 1e-10 * (x * k).norm());
        }
    }

    #[test]
    fn singular_point_is_named() {
        let mut p = base();
        // η₁ = Δ₁Δ₂ − J² vanishes for lossless modes at Δ = ±J
        p.gamma_1 = 0.0;
        p.gamma_ex = 0.0;
        p.gamma_2 = 0.0;
        p.gamma_tip = 0.0;
        p.delta = p.j;
        match steady_amplitudes(&p) {
            Err(Error::SingularParameter { name, .. }) => assert_eq!(name, "eta1"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn approx_converges_at_weak_drive() {
        let mut p = base();
        p.omega_drive = 1e-3;
        let o = evaluate(&p).unwrap();
        assert!((o.g2_approx / o.g2 - 1.0).abs() < 1e-3);
    }
}
