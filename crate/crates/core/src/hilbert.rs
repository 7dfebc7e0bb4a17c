//! Two-mode truncated Fock space and elementary mode operators.
//!
//! States are ordered by ascending total excitation `N = m + n`, then by
//! ascending `m`. Matrix elements that would leave the truncated space are
//! dropped (set to zero), the usual Fock-truncation convention.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use faer::{c64, Mat};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rule selecting which two-mode Fock states are kept.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Truncation {
    /// All states with `m + n <= max`.
    Total(usize),
    /// All states with `m <= max.0` and `n <= max.1`.
    PerMode(usize, usize),
}

impl Truncation {
    pub fn total(n_max: i64) -> Result<Self> {
        if n_max < 0 {
            return Err(Error::InvalidArgument(format!(
                "total truncation must be >= 0, got {n_max}"
            )));
        }
        Ok(Truncation::Total(n_max as usize))
    }

    pub fn per_mode(n1_max: i64, n2_max: i64) -> Result<Self> {
        if n1_max < 0 || n2_max < 0 {
            return Err(Error::InvalidArgument(format!(
                "per-mode truncation must be >= 0, got ({n1_max}, {n2_max})"
            )));
        }
        Ok(Truncation::PerMode(n1_max as usize, n2_max as usize))
    }

    fn admits(&self, m: usize, n: usize) -> bool {
        match *self {
            Truncation::Total(nm) => m + n <= nm,
            Truncation::PerMode(a, b) => m <= a && n <= b,
        }
    }

    fn max_total(&self) -> usize {
        match *self {
            Truncation::Total(nm) => nm,
            Truncation::PerMode(a, b) => a + b,
        }
    }
}

impl fmt::Display for Truncation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Truncation::Total(n) => write!(f, "total({n})"),
            Truncation::PerMode(a, b) => write!(f, "per_mode({a},{b})"),
        }
    }
}

/// Ordered enumeration of `|m, n>` states with an index map.
#[derive(Clone, Debug)]
pub struct FockBasis {
    truncation: Truncation,
    states: Vec<(usize, usize)>,
    index_of: HashMap<(usize, usize), usize>,
}

impl PartialEq for FockBasis {
    fn eq(&self, other: &Self) -> bool {
        self.states == other.states
    }
}

impl FockBasis {
    pub fn new(truncation: Truncation) -> Self {
        let mut states = Vec::new();
        for total in 0..=truncation.max_total() {
            for m in 0..=total {
                let n = total - m;
                if truncation.admits(m, n) {
                    states.push((m, n));
                }
            }
        }
        let index_of = states.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        FockBasis {
            truncation,
            states,
            index_of,
        }
    }

    pub fn shared(truncation: Truncation) -> Arc<Self> {
        Arc::new(Self::new(truncation))
    }

    pub fn truncation(&self) -> Truncation {
        self.truncation
    }

    pub fn states(&self) -> &[(usize, usize)] {
        &self.states
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn index_of(&self, m: usize, n: usize) -> Option<usize> {
        self.index_of.get(&(m, n)).copied()
    }

    /// Positions of all states with exactly `n` excitations, in basis order.
    pub fn excitation_block(&self, n: usize) -> Vec<usize> {
        self.states
            .iter()
            .enumerate()
            .filter(|(_, &(a, b))| a + b == n)
            .map(|(i, _)| i)
            .collect()
    }

    /// Largest occupation of mode 1 present in the basis.
    pub fn max_mode1(&self) -> usize {
        self.states.iter().map(|s| s.0).max().unwrap_or(0)
    }

    /// JSON array of `[m, n]` pairs in canonical order.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.states).expect("basis labels serialize")
    }

    pub fn label(&self, i: usize) -> String {
        let (m, n) = self.states[i];
        format!("{m}{n}")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    One,
    Two,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LadderKind {
    Annihilate,
    Create,
    Number,
}

/// Dense square complex matrix tied to a [`FockBasis`].
#[derive(Clone, Debug)]
pub struct ComplexOperator {
    basis: Arc<FockBasis>,
    data: Mat<c64>,
}

impl ComplexOperator {
    pub fn new(basis: Arc<FockBasis>, data: Mat<c64>) -> Result<Self> {
        let d = basis.dim();
        if data.nrows() != d || data.ncols() != d {
            return Err(Error::InvalidArgument(format!(
                "matrix is {}x{} but basis has dimension {d}",
                data.nrows(),
                data.ncols()
            )));
        }
        Ok(ComplexOperator { basis, data })
    }

    pub fn zeros(basis: Arc<FockBasis>) -> Self {
        let d = basis.dim();
        ComplexOperator {
            basis,
            data: Mat::zeros(d, d),
        }
    }

    pub fn identity(basis: Arc<FockBasis>) -> Self {
        let d = basis.dim();
        ComplexOperator {
            basis,
            data: Mat::identity(d, d),
        }
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn data(&self) -> &Mat<c64> {
        &self.data
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn into_data(self) -> Mat<c64> {
        self.data
    }

    pub fn get(&self, i: usize, j: usize) -> c64 {
        self.data[(i, j)]
    }

    fn check_same_basis(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.basis, &other.basis) || *self.basis == *other.basis {
            Ok(())
        } else {
            Err(Error::BasisMismatch {
                left: self.basis.truncation().to_string(),
                right: other.basis.truncation().to_string(),
            })
        }
    }

    pub fn dagger(&self) -> Self {
        ComplexOperator {
            basis: self.basis.clone(),
            data: self.data.adjoint().to_owned(),
        }
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.check_same_basis(other)?;
        Ok(ComplexOperator {
            basis: self.basis.clone(),
            data: &self.data * &other.data,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_basis(other)?;
        Ok(self.zip_with(other, |a, b| a + b))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_basis(other)?;
        Ok(self.zip_with(other, |a, b| a - b))
    }

    pub fn scale(&self, factor: c64) -> Self {
        let d = self.dim();
        ComplexOperator {
            basis: self.basis.clone(),
            data: Mat::from_fn(d, d, |i, j| self.data[(i, j)] * factor),
        }
    }

    /// `[self, other]`
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.matmul(other)?.sub(&other.matmul(self)?)
    }

    pub fn trace(&self) -> c64 {
        (0..self.dim()).map(|i| self.data[(i, i)]).sum()
    }

    /// Largest element modulus.
    pub fn max_abs(&self) -> f64 {
        let d = self.dim();
        let mut m = 0.0f64;
        for j in 0..d {
            for i in 0..d {
                m = m.max(self.data[(i, j)].norm());
            }
        }
        m
    }

    /// Largest modulus of `self - self†`.
    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.dim();
        let mut m = 0.0f64;
        for j in 0..d {
            for i in 0..d {
                m = m.max((self.data[(i, j)] - self.data[(j, i)].conj()).norm());
            }
        }
        m
    }

    fn zip_with(&self, other: &Self, f: impl Fn(c64, c64) -> c64) -> Self {
        let d = self.dim();
        ComplexOperator {
            basis: self.basis.clone(),
            data: Mat::from_fn(d, d, |i, j| f(self.data[(i, j)], other.data[(i, j)])),
        }
    }
}

/// Ladder or number operator of one mode on `basis`.
pub fn mode_operator(basis: &Arc<FockBasis>, mode: Mode, kind: LadderKind) -> ComplexOperator {
    let d = basis.dim();
    let mut data = Mat::<c64>::zeros(d, d);
    for (col, &(m, n)) in basis.states().iter().enumerate() {
        let occupation = match mode {
            Mode::One => m,
            Mode::Two => n,
        };
        match kind {
            LadderKind::Number => {
                data[(col, col)] = c64::new(occupation as f64, 0.0);
            }
            LadderKind::Annihilate => {
                if occupation == 0 {
                    continue;
                }
                let target = match mode {
                    Mode::One => basis.index_of(m - 1, n),
                    Mode::Two => basis.index_of(m, n - 1),
                };
                if let Some(row) = target {
                    data[(row, col)] = c64::new((occupation as f64).sqrt(), 0.0);
                }
            }
            LadderKind::Create => {
                let target = match mode {
                    Mode::One => basis.index_of(m + 1, n),
                    Mode::Two => basis.index_of(m, n + 1),
                };
                if let Some(row) = target {
                    data[(row, col)] = c64::new(((occupation + 1) as f64).sqrt(), 0.0);
                }
            }
        }
    }
    ComplexOperator {
        basis: basis.clone(),
        data,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn per_mode(a: usize, b: usize) -> Arc<FockBasis> {
        FockBasis::shared(Truncation::PerMode(a, b))
    }

    #[test]
    fn basis_sizes_and_order() {
        assert_eq!(FockBasis::new(Truncation::Total(0)).states(), &[(0, 0)]);
        assert_eq!(
            FockBasis::new(Truncation::Total(1)).states(),
            &[(0, 0), (0, 1), (1, 0)]
        );
        assert_eq!(FockBasis::new(Truncation::Total(3)).dim(), 10);
        for n in 0..8 {
            assert_eq!(FockBasis::new(Truncation::Total(n)).dim(), (n + 1) * (n + 2) / 2);
        }
        assert_eq!(FockBasis::new(Truncation::PerMode(3, 2)).dim(), 12);
        let b = FockBasis::new(Truncation::PerMode(2, 2));
        let totals: Vec<_> = b.states().iter().map(|s| (s.0 + s.1, s.0)).collect();
        let mut sorted = totals.clone();
        sorted.sort();
        assert_eq!(totals, sorted);
        for (i, &(m, n)) in b.states().iter().enumerate() {
            assert_eq!(b.index_of(m, n), Some(i));
        }
    }

    #[test]
    fn negative_truncation_rejected() {
        assert!(matches!(Truncation::total(-1), Err(Error::InvalidArgument(_))));
        assert!(matches!(Truncation::per_mode(2, -3), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn basis_json_is_pairs() {
        let b = FockBasis::new(Truncation::Total(1));
        assert_eq!(b.to_json(), "[[0,0],[0,1],[1,0]]");
    }

    #[test]
    fn single_mode_annihilator_superdiagonal() {
        let b = per_mode(2, 0);
        let a = mode_operator(&b, Mode::One, LadderKind::Annihilate);
        assert_eq!(a.get(0, 1), c64::new(1.0, 0.0));
        assert_eq!(a.get(1, 2), c64::new(2f64.sqrt(), 0.0));
        let nonzero = (0..3)
            .flat_map(|i| (0..3).map(move |j| (i, j)))
            .filter(|&(i, j)| a.get(i, j).norm() > 0.0)
            .count();
        assert_eq!(nonzero, 2);
    }

    #[test]
    fn number_is_occupation_and_matches_product() {
        let b = FockBasis::shared(Truncation::Total(4));
        for mode in [Mode::One, Mode::Two] {
            let num = mode_operator(&b, mode, LadderKind::Number);
            let a = mode_operator(&b, mode, LadderKind::Annihilate);
            let ad = mode_operator(&b, mode, LadderKind::Create);
            let prod = ad.matmul(&a).unwrap();
            assert!(prod.sub(&num).unwrap().max_abs() < 1e-14);
            for (i, &(m, n)) in b.states().iter().enumerate() {
                let occ = if mode == Mode::One { m } else { n };
                assert_eq!(num.get(i, i).re, occ as f64);
            }
        }
    }

    #[test]
    fn truncated_commutator_artifact() {
        let nmax = 4;
        let b = per_mode(nmax, 0);
        let a = mode_operator(&b, Mode::One, LadderKind::Annihilate);
        let c = a.commutator(&a.dagger()).unwrap();
        for i in 0..=nmax {
            let expect = if i == nmax { -(nmax as f64) } else { 1.0 };
            assert!((c.get(i, i).re - expect).abs() < 1e-12);
        }
        assert!((c.trace().re).abs() < 1e-12);
    }

    #[test]
    fn create_is_exact_adjoint() {
        for t in [Truncation::Total(3), Truncation::PerMode(3, 2)] {
            let b = FockBasis::shared(t);
            for mode in [Mode::One, Mode::Two] {
                let a = mode_operator(&b, mode, LadderKind::Annihilate);
                let ad = mode_operator(&b, mode, LadderKind::Create);
                assert_eq!(a.dagger().sub(&ad).unwrap().max_abs(), 0.0);
            }
        }
    }

    #[test]
    fn modes_commute_on_per_mode_basis() {
        let b = per_mode(3, 3);
        let a1 = mode_operator(&b, Mode::One, LadderKind::Annihilate);
        let a2 = mode_operator(&b, Mode::Two, LadderKind::Annihilate);
        assert_eq!(a1.commutator(&a2).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn total_number_bounded_under_total_truncation() {
        let b = FockBasis::shared(Truncation::Total(3));
        let n1 = mode_operator(&b, Mode::One, LadderKind::Number);
        let n2 = mode_operator(&b, Mode::Two, LadderKind::Number);
        let tot = n1.add(&n2).unwrap();
        for i in 0..b.dim() {
            for j in 0..b.dim() {
                if i != j {
                    assert_eq!(tot.get(i, j).norm(), 0.0);
                }
            }
            let (m, n) = b.states()[i];
            assert_eq!(tot.get(i, i).re, (m + n) as f64);
            assert!(m + n <= 3);
        }
    }

    #[test]
    fn mismatched_bases_rejected() {
        let a = mode_operator(&per_mode(2, 2), Mode::One, LadderKind::Annihilate);
        let b = mode_operator(&per_mode(3, 1), Mode::One, LadderKind::Annihilate);
        assert!(matches!(a.matmul(&b), Err(Error::BasisMismatch { .. })));
        assert!(matches!(a.add(&b), Err(Error::BasisMismatch { .. })));
    }
}
