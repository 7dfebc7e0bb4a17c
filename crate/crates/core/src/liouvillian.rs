//! Lindblad generator, steady states, time evolution and the Liouvillian
//! spectrum.
//!
//! Density matrices are vectorised column by column: X[i, j] sits at index
//! i + j·d, so vec(A X B) = (Bᵀ ⊗ A) vec(X).

use std::sync::Arc;

use faer::{c64, Mat};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hilbert::{mode_operator, ComplexOperator, FockBasis, LadderKind, Mode, Truncation};
use crate::linalg;
use crate::model::{build_hamiltonian, HamiltonianVariant, SystemParams};
use crate::roots::golden_section;

/// Largest Hilbert-space dimension accepted (superoperator ≤ 4096²).
pub const MAX_DIM: usize = 64;

#[derive(Clone, Debug)]
pub struct Superoperator {
    basis: Arc<FockBasis>,
    data: Mat<c64>,
    scale: f64,
}

impl Superoperator {
    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn data(&self) -> &Mat<c64> {
        &self.data
    }

    /// Characteristic rate of the generator (largest |entry|).
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn apply_vec(&self, v: &[c64]) -> Vec<c64> {
        let n = self.dim();
        let mut out = vec![c64::new(0.0, 0.0); n];
        for j in 0..n {
            let x = v[j];
            if x == c64::new(0.0, 0.0) {
                continue;
            }
            let col = self.data.col(j);
            for i in 0..n {
                out[i] += col[i] * x;
            }
        }
        out
    }

    /// ℒ applied to a d×d matrix.
    pub fn apply(&self, rho: &Mat<c64>) -> Mat<c64> {
        let d = self.basis.dim();
        unvec(&self.apply_vec(&vec_of(rho)), d)
    }
}

pub fn vec_of(m: &Mat<c64>) -> Vec<c64> {
    let d = m.nrows();
    (0..d * m.ncols()).map(|k| m[(k % d, k / d)]).collect()
}

pub fn unvec(v: &[c64], d: usize) -> Mat<c64> {
    Mat::from_fn(d, d, |i, j| v[i + j * d])
}

/// ℒρ = −i[H, ρ] + Σ_j γ_j′ (a_j ρ a_j† − ½{a_j†a_j, ρ}). `driven` selects
/// the rotating driven Hamiltonian; otherwise the undriven lab-frame one.
pub fn build_liouvillian(p: &SystemParams, basis: &Arc<FockBasis>, driven: bool) -> Result<Superoperator> {
    let d = basis.dim();
    if d > MAX_DIM {
        return Err(Error::ResourceLimit(format!(
            "Hilbert dimension {d} exceeds the cap {MAX_DIM} (superoperator {}²)",
            d * d
        )));
    }
    let variant = if driven {
        HamiltonianVariant::RotatingDriven
    } else {
        HamiltonianVariant::Isolated
    };
    let h = build_hamiltonian(p, basis, variant)?;
    let hm = h.data();
    let n = d * d;
    let mut l = Mat::<c64>::zeros(n, n);
    let mi = c64::new(0.0, -1.0);

    // −i (I ⊗ H − Hᵀ ⊗ I)
    for j in 0..d {
        for i in 0..d {
            for k in 0..d {
                let hik = hm[(i, k)];
                if hik != c64::new(0.0, 0.0) {
                    l[(i + j * d, k + j * d)] += mi * hik;
                }
                let hkj = hm[(k, j)];
                if hkj != c64::new(0.0, 0.0) {
                    // (Hᵀ ⊗ I)[(i + j d), (i + k d)] = H[k, j]
                    l[(i + j * d, i + k * d)] -= mi * hkj;
                }
            }
        }
    }

    for (mode, gamma) in [(Mode::One, p.gamma1_prime()), (Mode::Two, p.gamma2_prime())] {
        if gamma == 0.0 {
            continue;
        }
        let a = mode_operator(basis, mode, LadderKind::Annihilate);
        let num = mode_operator(basis, mode, LadderKind::Number);
        let nz: Vec<(usize, usize, c64)> = (0..d)
            .flat_map(|i| (0..d).map(move |k| (i, k)))
            .filter_map(|(i, k)| {
                let v = a.get(i, k);
                (v != c64::new(0.0, 0.0)).then_some((i, k, v))
            })
            .collect();
        // (ā ⊗ a)[(i + j d), (k + l d)] = conj(a[j, l]) a[i, k]
        for &(j, ll, ajl) in &nz {
            for &(i, k, aik) in &nz {
                l[(i + j * d, k + ll * d)] += ajl.conj() * aik * gamma;
            }
        }
        // number operator is diagonal
        for j in 0..d {
            let nj = num.get(j, j).re;
            for i in 0..d {
                let ni = num.get(i, i).re;
                l[(i + j * d, i + j * d)] -= c64::new(0.5 * gamma * (ni + nj), 0.0);
            }
        }
    }
    let mut scale = 0.0f64;
    for j in 0..n {
        for i in 0..n {
            scale = scale.max(l[(i, j)].norm());
        }
    }
    Ok(Superoperator {
        basis: basis.clone(),
        data: l,
        scale: scale.max(f64::MIN_POSITIVE),
    })
}

/// Hermitian, unit-trace, positive (within tolerance) state.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    basis: Arc<FockBasis>,
    data: Mat<c64>,
}

pub const HERMITIAN_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
pub const PSD_TOL: f64 = 1e-8;

impl DensityMatrix {
    pub fn new(basis: Arc<FockBasis>, data: Mat<c64>) -> Result<Self> {
        Self::with_tolerance(basis, data, HERMITIAN_TOL, TRACE_TOL, PSD_TOL)
    }

    pub fn with_tolerance(
        basis: Arc<FockBasis>,
        data: Mat<c64>,
        herm_tol: f64,
        trace_tol: f64,
        psd_tol: f64,
    ) -> Result<Self> {
        let d = basis.dim();
        if data.nrows() != d || data.ncols() != d {
            return Err(Error::InvalidArgument(format!(
                "density matrix is {}x{}, basis has {d} states",
                data.nrows(),
                data.ncols()
            )));
        }
        let rho = DensityMatrix { basis, data };
        let herm = rho.hermiticity_defect();
        if herm > herm_tol {
            return Err(Error::NumericalFailure(format!("density matrix not Hermitian ({herm:e})")));
        }
        let tr = rho.trace();
        if (tr - c64::new(1.0, 0.0)).norm() > trace_tol {
            return Err(Error::NumericalFailure(format!("density matrix trace {tr}")));
        }
        let min = rho.min_eigenvalue()?;
        if min < -psd_tol {
            return Err(Error::NumericalFailure(format!("density matrix eigenvalue {min:e} < 0")));
        }
        Ok(rho)
    }

    pub fn pure(basis: Arc<FockBasis>, amplitudes: &[c64]) -> Result<Self> {
        let mut v = amplitudes.to_vec();
        linalg::normalize(&mut v);
        let d = basis.dim();
        if v.len() != d {
            return Err(Error::InvalidArgument("amplitude vector length != basis size".into()));
        }
        Self::new(basis, Mat::from_fn(d, d, |i, j| v[i] * v[j].conj()))
    }

    /// |m, n⟩⟨m, n|.
    pub fn fock(basis: Arc<FockBasis>, m: usize, n: usize) -> Result<Self> {
        let k = basis
            .index_of(m, n)
            .ok_or_else(|| Error::InvalidArgument(format!("|{m},{n}> not in basis")))?;
        let d = basis.dim();
        let data = Mat::from_fn(d, d, |i, j| {
            if i == k && j == k {
                c64::new(1.0, 0.0)
            } else {
                c64::new(0.0, 0.0)
            }
        });
        Self::new(basis, data)
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn data(&self) -> &Mat<c64> {
        &self.data
    }

    pub fn trace(&self) -> c64 {
        (0..self.basis.dim()).map(|i| self.data[(i, i)]).sum()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.basis.dim();
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                worst = worst.max((self.data[(i, j)] - self.data[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(linalg::hermitian_eigvals(&self.data)?.first().copied().unwrap_or(0.0))
    }

    /// Diagonal populations in basis order.
    pub fn populations(&self) -> Vec<f64> {
        (0..self.basis.dim()).map(|i| self.data[(i, i)].re).collect()
    }

    pub fn population(&self, m: usize, n: usize) -> f64 {
        self.basis.index_of(m, n).map(|i| self.data[(i, i)].re).unwrap_or(0.0)
    }

    /// Tr(ρ O).
    pub fn expect(&self, op: &ComplexOperator) -> Result<c64> {
        if op.basis().as_ref() != self.basis.as_ref() {
            return Err(Error::BasisMismatch {
                left: self.basis.truncation().to_string(),
                right: op.basis().truncation().to_string(),
            });
        }
        let d = self.basis.dim();
        let mut s = c64::new(0.0, 0.0);
        for i in 0..d {
            for k in 0..d {
                s += self.data[(i, k)] * op.get(k, i);
            }
        }
        Ok(s)
    }

    pub fn frobenius_distance(&self, other: &DensityMatrix) -> f64 {
        let d = self.basis.dim();
        let mut s = 0.0;
        for i in 0..d {
            for j in 0..d {
                s += (self.data[(i, j)] - other.data[(i, j)]).norm_sqr();
            }
        }
        s.sqrt()
    }

    /// JSON with basis labels and [re, im] entries, row-major.
    pub fn to_json(&self) -> serde_json::Value {
        let d = self.basis.dim();
        let rows: Vec<Vec<[f64; 2]>> = (0..d)
            .map(|i| (0..d).map(|j| [self.data[(i, j)].re, self.data[(i, j)].im]).collect())
            .collect();
        serde_json::json!({
            "basis": self.basis.states().iter().map(|&(m, n)| [m, n]).collect::<Vec<_>>(),
            "truncation": self.basis.truncation().to_string(),
            "rho": rows,
        })
    }
}

fn hermitize(m: &Mat<c64>) -> Mat<c64> {
    let d = m.nrows();
    Mat::from_fn(d, d, |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5)
}

#[derive(Clone, Debug)]
pub struct SteadyState {
    pub rho: DensityMatrix,
    /// max |(ℒρ)_k| / scale.
    pub residual: f64,
    /// smallest / largest |U_ii| of the bordered LU.
    pub pivot_ratio: f64,
}

/// Threshold on the pivot ratio below which the null space is taken to be
/// more than one-dimensional.
pub const DEGENERACY_TOL: f64 = 1e-13;

/// Solves ℒρ = 0, Tr ρ = 1 by replacing the first equation with the trace
/// condition.
pub fn steady_state(l: &Superoperator) -> Result<SteadyState> {
    let d = l.basis.dim();
    let n = d * d;
    let mut a = l.data.clone();
    for k in 0..n {
        a[(0, k)] = c64::new(0.0, 0.0);
    }
    for i in 0..d {
        a[(0, i + i * d)] = c64::new(1.0, 0.0);
    }
    let mut b = Mat::<c64>::zeros(n, 1);
    b[(0, 0)] = c64::new(1.0, 0.0);
    let (x, ratio) = linalg::lu_solve(&a, &b);
    let v: Vec<c64> = (0..n).map(|k| x[(k, 0)]).collect();
    if !(ratio > DEGENERACY_TOL) || v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::DegenerateSteadyState(format!(
            "bordered system is singular (pivot ratio {ratio:e})"
        )));
    }
    let residual = l.apply_vec(&v).iter().map(|z| z.norm()).fold(0.0, f64::max) / l.scale;
    let rho = hermitize(&unvec(&v, d));
    if residual > 1e-8 {
        return Err(Error::DegenerateSteadyState(format!("steady-state residual {residual:e}")));
    }
    Ok(SteadyState {
        rho: DensityMatrix::new(l.basis.clone(), rho)?,
        residual,
        pivot_ratio: ratio,
    })
}

/// Convenience: driven steady state of `p` on `basis`.
pub fn solve_steady(p: &SystemParams, basis: &Arc<FockBasis>) -> Result<SteadyState> {
    p.validate_dissipative()?;
    steady_state(&build_liouvillian(p, basis, true)?)
}

#[derive(Clone, Copy, Debug)]
pub struct EvolveOptions {
    pub rtol: f64,
    pub atol: f64,
    pub min_step: f64,
    pub max_steps: usize,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions {
            rtol: 1e-9,
            atol: 1e-12,
            min_step: 1e-12,
            max_steps: 1_000_000,
        }
    }
}

// Dormand–Prince 5(4) tableau
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrates dρ/dt = ℒρ with adaptive Dormand–Prince 5(4) steps, returning
/// a snapshot at every grid time.
pub fn time_evolve(
    l: &Superoperator,
    rho0: &DensityMatrix,
    t_grid: &[f64],
    opts: EvolveOptions,
) -> Result<Vec<DensityMatrix>> {
    if t_grid.is_empty() {
        return Ok(Vec::new());
    }
    if t_grid[0] < 0.0 || t_grid.windows(2).any(|w| !(w[1] >= w[0])) {
        return Err(Error::InvalidArgument("time grid must be ascending and start at t >= 0".into()));
    }
    if rho0.basis().as_ref() != l.basis.as_ref() {
        return Err(Error::BasisMismatch {
            left: l.basis.truncation().to_string(),
            right: rho0.basis().truncation().to_string(),
        });
    }
    let d = l.basis.dim();
    let mut y = vec_of(rho0.data());
    let mut t = 0.0f64;
    let mut h = (0.1 / l.scale).max(opts.min_step);
    let mut out = Vec::with_capacity(t_grid.len());
    let mut steps = 0usize;
    let snapshot = |y: &[c64]| {
        DensityMatrix::with_tolerance(l.basis.clone(), hermitize(&unvec(y, d)), 1e-8, 1e-8, 1e-6)
    };
    for &target in t_grid {
        while t < target {
            if steps >= opts.max_steps {
                return Err(Error::NumericalFailure(format!("time_evolve exceeded {} steps", opts.max_steps)));
            }
            let step = h.min(target - t);
            let mut k: Vec<Vec<c64>> = Vec::with_capacity(7);
            k.push(l.apply_vec(&y));
            for s in 1..7 {
                let mut ys = y.clone();
                for (r, kr) in k.iter().enumerate() {
                    let a = A[s][r];
                    if a != 0.0 {
                        for (yi, ki) in ys.iter_mut().zip(kr) {
                            *yi += ki * (a * step);
                        }
                    }
                }
                k.push(l.apply_vec(&ys));
            }
            let mut y5 = y.clone();
            let mut err = 0.0f64;
            for i in 0..y.len() {
                let mut d5 = c64::new(0.0, 0.0);
                let mut d4 = c64::new(0.0, 0.0);
                for s in 0..7 {
                    d5 += k[s][i] * B5[s];
                    d4 += k[s][i] * B4[s];
                }
                y5[i] += d5 * step;
                let sc = opts.atol + opts.rtol * y[i].norm().max(y5[i].norm());
                err = err.max(((d5 - d4) * step).norm() / sc);
            }
            steps += 1;
            if err <= 1.0 {
                t += step;
                y = y5;
                if t > target - 1e-15 * target.abs().max(1.0) {
                    t = target;
                }
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h = step * factor;
            if h < opts.min_step {
                return Err(Error::NumericalFailure(format!(
                    "step size underflow at t = {t} (h = {h:e})"
                )));
            }
        }
        out.push(snapshot(&y)?);
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct LiouvillianSpectrum {
    /// Sorted by descending real part.
    pub eigenvalues: Vec<c64>,
    pub eigenmatrices: Vec<Mat<c64>>,
}

/// The `count` eigenvalues of largest real part and their eigenmatrices.
pub fn liouvillian_spectrum(l: &Superoperator, count: usize) -> Result<LiouvillianSpectrum> {
    let n = l.dim();
    if count > n {
        return Err(Error::InvalidArgument(format!("count {count} exceeds {n}")));
    }
    let (vals, vecs) = linalg::eig(&l.data)?;
    let d = l.basis.dim();
    let mut eigenmatrices = Vec::with_capacity(count);
    for k in 0..count {
        eigenmatrices.push(unvec(&linalg::column(&vecs, k), d));
    }
    Ok(LiouvillianSpectrum {
        eigenvalues: vals[..count].to_vec(),
        eigenmatrices,
    })
}

/// Largest distance from any eigenvalue's conjugate to the spectrum, over
/// the spectrum scale.
pub fn conjugation_defect(vals: &[c64]) -> f64 {
    let scale = vals.iter().map(|z| z.norm()).fold(f64::MIN_POSITIVE, f64::max);
    vals.iter()
        .map(|z| vals.iter().map(|w| (w - z.conj()).norm()).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max)
        / scale
}

/// Fraction of |X|² in the block of rows with `row_n` excitations and columns
/// with `col_n` excitations.
pub fn block_weight(x: &Mat<c64>, basis: &FockBasis, row_n: usize, col_n: usize) -> f64 {
    let d = basis.dim();
    let ex: Vec<usize> = basis.states().iter().map(|&(m, n)| m + n).collect();
    let (mut w, mut total) = (0.0, 0.0);
    for j in 0..d {
        for i in 0..d {
            let a = x[(i, j)].norm_sqr();
            total += a;
            if ex[i] == row_n && ex[j] == col_n {
                w += a;
            }
        }
    }
    if total > 0.0 {
        w / total
    } else {
        0.0
    }
}

/// |⟨X, Y⟩| / (‖X‖‖Y‖) with the Frobenius inner product.
pub fn matrix_overlap(x: &Mat<c64>, y: &Mat<c64>) -> f64 {
    let (vx, vy) = (vec_of(x), vec_of(y));
    linalg::inner(&vx, &vy).norm() / (linalg::norm2(&vx) * linalg::norm2(&vy))
}

#[derive(Clone, Debug, Serialize)]
pub struct LepOptions {
    /// Total truncation used for the undriven generator.
    pub n_max: usize,
    /// Frame frequency used when ω_c = 0; `None` picks 10(J + |χ| + γ₁′ + γ₂′)
    /// evaluated at the top of the range.
    pub omega_ref: Option<f64>,
    pub gap_tol: f64,
    pub overlap_tol: f64,
    pub refine_tol: f64,
}

impl Default for LepOptions {
    fn default() -> Self {
        LepOptions {
            n_max: 2,
            omega_ref: None,
            gap_tol: 1e-3,
            overlap_tol: 0.99,
            refine_tol: 1e-10,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LepResult {
    pub gamma_tip: f64,
    /// |Λ_a − Λ_b| at the refined point, in units of γ₁′.
    pub gap: f64,
    /// Normalised overlap of the two eigenmatrices there.
    pub overlap: f64,
    pub bracket: (f64, f64),
    /// (γ_tip, gap) on the coarse grid.
    pub grid: Vec<(f64, f64)>,
}

/// The tracked pair: eigenvalues of the undriven generator whose
/// eigenmatrices live in the |1 excitation⟩⟨vacuum| block.
pub fn coherence_pair(p: &SystemParams, opts: &LepOptions) -> Result<[(c64, Mat<c64>); 2]> {
    let basis = FockBasis::shared(Truncation::Total(opts.n_max.max(1)));
    let l = build_liouvillian(p, &basis, false)?;
    let (vals, vecs) = linalg::eig(&l.data)?;
    let d = basis.dim();
    let mut picked: Vec<(f64, usize)> = (0..vals.len())
        .map(|k| (block_weight(&unvec(&linalg::column(&vecs, k), d), &basis, 1, 0), k))
        .collect();
    picked.sort_by(|a, b| b.0.total_cmp(&a.0));
    if picked.len() < 2 || picked[1].0 < 0.5 {
        return Err(Error::NumericalFailure("could not isolate the one-photon coherence pair".into()));
    }
    let mk = |k: usize| (vals[k], unvec(&linalg::column(&vecs, k), d));
    let (a, b) = (picked[0].1, picked[1].1);
    Ok([mk(a), mk(b)])
}

/// Parameters used for the LEP search: in the rotating frame (ω_c = 0) the
/// ±1 coherence sectors are exactly degenerate, so the frame is lifted to a
/// reference frequency that separates them.
pub fn lep_frame(p: &SystemParams, opts: &LepOptions, gamma_tip_max: f64) -> SystemParams {
    let mut q = p.clone();
    if q.omega_c == 0.0 {
        q.omega_c = opts.omega_ref.unwrap_or_else(|| {
            10.0 * (p.j + p.chi.abs() + p.gamma1_prime() + p.gamma_2 + gamma_tip_max)
        });
    }
    q
}

/// Locates the γ_tip where the one-photon coherence pair of the undriven
/// Liouvillian coalesces.
pub fn lep_locate(
    p: &SystemParams,
    range: (f64, f64),
    points: usize,
    opts: &LepOptions,
) -> Result<LepResult> {
    let (lo, hi) = range;
    if !(lo < hi) || points < 3 {
        return Err(Error::InvalidArgument("lep_locate needs lo < hi and >= 3 grid points".into()));
    }
    let q = lep_frame(p, opts, hi);
    let g1 = p.gamma1_prime().max(f64::MIN_POSITIVE);
    let gap = |gt: f64| -> Result<f64> {
        let [(a, _), (b, _)] = coherence_pair(&q.with_gamma_tip(gt), opts)?;
        Ok((a - b).norm() / g1)
    };
    let step = (hi - lo) / (points - 1) as f64;
    let mut grid = Vec::with_capacity(points);
    for k in 0..points {
        let gt = lo + step * k as f64;
        grid.push((gt, gap(gt)?));
    }
    let kmin = (0..points)
        .min_by(|&a, &b| grid[a].1.total_cmp(&grid[b].1))
        .unwrap();
    if kmin == 0 || kmin == points - 1 {
        return Err(Error::NotFound(format!(
            "coherence-pair gap has no interior minimum on [{lo}, {hi}]"
        )));
    }
    let r = golden_section(gap, grid[kmin - 1].0, grid[kmin + 1].0, opts.refine_tol)?;
    let [(_, xa), (_, xb)] = coherence_pair(&q.with_gamma_tip(r.x), opts)?;
    let overlap = matrix_overlap(&xa, &xb);
    let result = LepResult {
        gamma_tip: r.x,
        gap: r.value,
        overlap,
        bracket: r.bracket,
        grid,
    };
    if result.gap > opts.gap_tol || overlap < opts.overlap_tol {
        return Err(Error::NotFound(format!(
            "no coalescence: gap {:e}, overlap {overlap} at gamma_tip {}",
            result.gap, result.gamma_tip
        )));
    }
    Ok(result)
}
