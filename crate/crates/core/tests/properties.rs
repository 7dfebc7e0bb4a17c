use std::sync::Arc;

use faer::{c64, Mat};
use kerrpair::analytic::{evaluate, stationarity_residual, steady_amplitudes, Intermediates};
use kerrpair::config::GridSpec;
use kerrpair::liouvillian::{build_liouvillian, steady_state};
use kerrpair::spectral::{
    one_photon_eigensystem_closed, one_photon_splitting, subspace_block, subspace_eigensystem_numeric,
    two_photon_eigensystem_closed,
};
use kerrpair::{build_hamiltonian, FockBasis, HamiltonianVariant, SystemParams, Truncation, UnitSystem};
use proptest::prelude::*;

fn params(chi: f64, j: f64, g1: f64, gex: f64, g2: f64, gt: f64, delta: f64, wc: f64) -> SystemParams {
    SystemParams {
        omega_c: wc,
        delta,
        chi,
        j,
        gamma_1: g1,
        gamma_ex: gex,
        gamma_2: g2,
        gamma_tip: gt,
        omega_drive: 0.01 * (g1 + gex),
        drive_phase: 0.0,
        unit_system: UnitSystem::Normalized,
    }
}

prop_compose! {
    fn any_params()(
        chi in -5.0f64..5.0,
        j in 0.1f64..5.0,
        g1 in 0.05f64..5.0,
        gex in 0.05f64..5.0,
        g2 in 0.0f64..5.0,
        gt in 0.0f64..10.0,
        delta in -6.0f64..6.0,
        wc in -3.0f64..3.0,
    ) -> SystemParams {
        params(chi, j, g1, gex, g2, gt, delta, wc)
    }
}

fn rel_err(a: c64, b: c64, scale: f64) -> f64 {
    (a - b).norm() / b.norm().max(scale)
}

fn residual(m: &Mat<c64>, lambda: c64, v: &[c64]) -> f64 {
    let n = v.len();
    (0..n)
        .map(|i| {
            let mut s = -lambda * v[i];
            for k in 0..n {
                s += m[(i, k)] * v[k];
            }
            s.norm_sqr()
        })
        .sum::<f64>()
        .sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn basis_index_round_trip(n1 in 0i64..6, n2 in 0i64..6, total in 0i64..6) {
        for t in [Truncation::per_mode(n1, n2).unwrap(), Truncation::total(total).unwrap()] {
            let b = FockBasis::new(t);
            for (i, &(m, n)) in b.states().iter().enumerate() {
                prop_assert_eq!(b.index_of(m, n), Some(i));
            }
        }
        let pm = FockBasis::new(Truncation::per_mode(n1, n2).unwrap());
        prop_assert_eq!(pm.dim() as i64, (n1 + 1) * (n2 + 1));
        let tt = FockBasis::new(Truncation::total(total).unwrap());
        prop_assert_eq!(tt.dim() as i64, (total + 1) * (total + 2) / 2);
    }

    #[test]
    fn hermitian_variants(p in any_params()) {
        let basis = FockBasis::shared(Truncation::per_mode(3, 3).unwrap());
        for v in [HamiltonianVariant::Isolated, HamiltonianVariant::RotatingDriven] {
            let h = build_hamiltonian(&p, &basis, v).unwrap();
            prop_assert!(h.hermiticity_defect() < 1e-12);
        }
        // the anti-Hermitian part is the loss diagonal only
        let h = build_hamiltonian(&p, &basis, HamiltonianVariant::EffectiveNonHermitian).unwrap();
        let d = h.dim();
        for (i, &(m, n)) in basis.states().iter().enumerate() {
            for k in 0..d {
                let anti = (h.get(i, k) - h.get(k, i).conj()) * 0.5;
                let want = if i == k {
                    -0.5 * (p.gamma1_prime() * m as f64 + p.gamma2_prime() * n as f64)
                } else {
                    0.0
                };
                prop_assert!((anti - c64::new(0.0, want)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn excitation_number_is_conserved(p in any_params()) {
        let basis = FockBasis::shared(Truncation::total(3).unwrap());
        let h = build_hamiltonian(&p, &basis, HamiltonianVariant::ExcitationConservingNonHermitian).unwrap();
        let s = basis.states();
        for i in 0..s.len() {
            for k in 0..s.len() {
                if s[i].0 + s[i].1 != s[k].0 + s[k].1 {
                    prop_assert_eq!(h.get(i, k), c64::new(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn one_photon_closed_vs_numeric(p in any_params()) {
        let s = one_photon_splitting(&p);
        prop_assume!(s.norm() > 1e-3 * p.j);
        let closed = one_photon_eigensystem_closed(&p);
        let num = subspace_eigensystem_numeric(&p, 1).unwrap();
        let block = subspace_block(&p, 1).unwrap();
        let scale = p.rate_scale();
        for (k, v) in closed.eigenvalues.iter().enumerate() {
            let best = num.eigenvalues.iter().map(|w| rel_err(*w, *v, scale)).fold(f64::INFINITY, f64::min);
            prop_assert!(best < 1e-8, "{v} vs {:?}", num.eigenvalues);
            let x = &closed.eigenvectors[k];
            let norm: f64 = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            prop_assert!((norm - 1.0).abs() < 1e-12);
            prop_assert!(residual(&block, *v, x) < 1e-8 * scale);
        }
    }

    #[test]
    fn two_photon_closed_vs_numeric(p in any_params()) {
        let closed = two_photon_eigensystem_closed(&p).unwrap();
        let num = subspace_eigensystem_numeric(&p, 2).unwrap();
        let scale = p.rate_scale();
        let min_gap = {
            let e = &num.eigenvalues;
            (0..3).flat_map(|a| (a + 1..3).map(move |b| (a, b))).map(|(a, b)| (e[a] - e[b]).norm()).fold(f64::INFINITY, f64::min)
        };
        prop_assume!(min_gap > 1e-3 * scale);
        let block = subspace_block(&p, 2).unwrap();
        for (k, v) in closed.eigenvalues.iter().enumerate() {
            let best = num.eigenvalues.iter().map(|w| rel_err(*w, *v, scale)).fold(f64::INFINITY, f64::min);
            prop_assert!(best < 1e-8, "{v} vs {:?}", num.eigenvalues);
            prop_assert!(residual(&block, *v, &closed.eigenvectors[k]) < 1e-7 * scale);
        }
    }

    #[test]
    fn liouvillian_preserves_trace_and_hermiticity(p in any_params(), seed in 0u64..1000) {
        let basis = FockBasis::shared(Truncation::per_mode(2, 2).unwrap());
        let l = build_liouvillian(&p, &basis, true).unwrap();
        let d = basis.dim();
        let f = |i: usize, k: usize| (seed as f64 + 1.3 * i as f64 + 0.7 * (k * k) as f64).sin();
        let x = Mat::from_fn(d, d, |i, k| c64::new(f(i, k), f(k + 5, i)));
        let y = l.apply(&x);
        let tr: c64 = (0..d).map(|i| y[(i, i)]).sum();
        prop_assert!(tr.norm() < 1e-10 * l.scale());
        let xh = Mat::from_fn(d, d, |i, k| x[(k, i)].conj());
        let yh = l.apply(&xh);
        for i in 0..d {
            for k in 0..d {
                prop_assert!((yh[(i, k)] - y[(k, i)].conj()).norm() < 1e-10 * l.scale());
            }
        }
    }

    #[test]
    fn amplitudes_scale_with_drive_order(p in any_params(), factor in 0.1f64..0.9) {
        let a = match steady_amplitudes(&p) { Ok(a) => a, Err(_) => return Ok(()) };
        prop_assert!(stationarity_residual(&p, &a) < 1e-9);
        let mut q = p.clone();
        q.omega_drive *= factor;
        let b = steady_amplitudes(&q).unwrap();
        for ((m, n, x), (_, _, y)) in a.entries().iter().zip(b.entries()) {
            let k = factor.powi((m + n) as i32);
            prop_assert!((y - x * k).norm() <= 1e-10 * (x * k).norm() + 1e-300);
        }
    }

    #[test]
    fn linear_system_is_coherent(p in any_params()) {
        let mut q = p.clone();
        q.chi = 0.0;
        if let Ok(o) = evaluate(&q) {
            prop_assert!((o.g2_closed - 1.0).abs() < 1e-8);
        }
        let it = Intermediates::new(&q);
        prop_assert!((it.delta3 - it.delta1).norm() == 0.0);
    }

    #[test]
    fn grid_spec_display_round_trip(lo in -10.0f64..0.0, span in 0.1f64..10.0, n in 2usize..50) {
        let g = GridSpec::Range { lo, hi: lo + span, points: n };
        let back: GridSpec = g.to_string().parse().unwrap();
        prop_assert_eq!(back.values(), g.values());
        prop_assert_eq!(g.values().len(), n);
    }
}

#[test]
fn steady_state_is_a_density_matrix() {
    let basis: Arc<FockBasis> = FockBasis::shared(Truncation::per_mode(4, 4).unwrap());
    let p = params(2.17, 2.0, 0.5, 0.5, 0.1, 3.0, -1.5, 0.0);
    let ss = steady_state(&build_liouvillian(&p, &basis, true).unwrap()).unwrap();
    assert!((ss.rho.trace() - c64::new(1.0, 0.0)).norm() < 1e-10);
    assert!(ss.rho.hermiticity_defect() < 1e-10);
    assert!(ss.rho.min_eigenvalue().unwrap() > -1e-8);
}
