//! Loss sweeps, critical points, spectrum maps and HEP/LEP agreement.

use std::fmt;
use std::str::FromStr;

use faer::c64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::liouvillian::{lep_locate, LepOptions};
use crate::observables::{evaluate_point, find_peaks, Backend, Cutoff, PointObservables};
use crate::roots::{bisect, golden_section};
use crate::spectral::{self, one_photon_eigensystem_closed, BranchLabel};
use crate::model::SystemParams;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetuningProtocol {
    Fixed(f64),
    /// Drive resonant with the upper one-photon branch, Δ = ω_c − Re λ₁⁺.
    TrackUpperBranch,
}

impl Default for DetuningProtocol {
    fn default() -> Self {
        DetuningProtocol::TrackUpperBranch
    }
}

impl fmt::Display for DetuningProtocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DetuningProtocol::Fixed(d) => write!(f, "fixed:{d}"),
            DetuningProtocol::TrackUpperBranch => write!(f, "track_upper_branch"),
        }
    }
}

impl FromStr for DetuningProtocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "track_upper_branch" || s == "track" {
            return Ok(DetuningProtocol::TrackUpperBranch);
        }
        if let Some(v) = s.strip_prefix("fixed:").or_else(|| s.strip_prefix("fixed=")) {
            return v
                .parse::<f64>()
                .map(DetuningProtocol::Fixed)
                .map_err(|_| Error::Config(format!("bad fixed detuning '{v}'")));
        }
        Err(Error::Config(format!(
            "unknown detuning protocol '{s}' (use track_upper_branch or fixed:<delta>)"
        )))
    }
}

/// Detuning used at `p` under `protocol`.
pub fn resolve_delta(p: &SystemParams, protocol: DetuningProtocol) -> f64 {
    match protocol {
        DetuningProtocol::Fixed(d) => d,
        DetuningProtocol::TrackUpperBranch => {
            let e = one_photon_eigensystem_closed(p);
            p.omega_c - e.eigenvalues[0].re
        }
    }
}

/// `n` evenly spaced points on [lo, hi].
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|k| if k == n - 1 { hi } else { lo + (hi - lo) * k as f64 / (n - 1) as f64 })
            .collect(),
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepOptions {
    pub protocol: DetuningProtocol,
    pub backends: Vec<Backend>,
    pub cutoff: Cutoff,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            protocol: DetuningProtocol::TrackUpperBranch,
            backends: vec![Backend::Analytic, Backend::Lindblad],
            cutoff: Cutoff::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub gamma_tip: f64,
    pub delta: f64,
    pub lambda_plus: (f64, f64),
    pub lambda_minus: (f64, f64),
    pub analytic: Option<PointObservables>,
    pub lindblad: Option<PointObservables>,
    /// One message per failed backend.
    pub failures: Vec<String>,
}

impl SweepRow {
    pub fn get(&self, backend: Backend) -> Option<&PointObservables> {
        match backend {
            Backend::Analytic => self.analytic.as_ref(),
            Backend::Lindblad => self.lindblad.as_ref(),
        }
    }

    pub fn failed(&self) -> bool {
        !self.failures.is_empty()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepTable {
    pub params: SystemParams,
    pub options: SweepOptions,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn primary_backend(&self) -> Backend {
        if self.options.backends.contains(&Backend::Analytic) {
            Backend::Analytic
        } else {
            Backend::Lindblad
        }
    }

    pub fn gamma_tips(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.gamma_tip).collect()
    }
}

pub fn check_ascending(grid: &[f64], what: &str) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument(format!("{what} grid is empty")));
    }
    if grid.iter().any(|x| !x.is_finite()) || grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument(format!("{what} grid must be strictly ascending")));
    }
    Ok(())
}

/// Evaluates one sweep point for the given γ_tip.
pub fn sweep_point(p: &SystemParams, gamma_tip: f64, opts: &SweepOptions) -> SweepRow {
    let mut q = p.with_gamma_tip(gamma_tip);
    q.delta = resolve_delta(&q, opts.protocol);
    let e = one_photon_eigensystem_closed(&q);
    let mut row = SweepRow {
        gamma_tip,
        delta: q.delta,
        lambda_plus: (e.eigenvalues[0].re, e.eigenvalues[0].im),
        lambda_minus: (e.eigenvalues[1].re, e.eigenvalues[1].im),
        analytic: None,
        lindblad: None,
        failures: Vec::new(),
    };
    for &b in &opts.backends {
        match evaluate_point(&q, b, opts.cutoff) {
            Ok(o) => match b {
                Backend::Analytic => row.analytic = Some(o),
                Backend::Lindblad => row.lindblad = Some(o),
            },
            Err(err) => {
                log::warn!("gamma_tip={gamma_tip}: {b} backend failed: {err}");
                row.failures.push(format!("{b}: {err}"));
            }
        }
    }
    row
}

/// Steady-state observables along an ascending γ_tip grid.
pub fn sweep_loss(p: &SystemParams, gamma_tip_grid: &[f64], opts: &SweepOptions) -> Result<SweepTable> {
    check_ascending(gamma_tip_grid, "gamma_tip")?;
    p.validate()?;
    if opts.backends.is_empty() {
        return Err(Error::InvalidArgument("no backend selected".into()));
    }
    let rows: Vec<SweepRow> = gamma_tip_grid
        .par_iter()
        .map(|&g| sweep_point(p, g, opts))
        .collect();
    Ok(SweepTable {
        params: p.clone(),
        options: opts.clone(),
        rows,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CriticalValue {
    pub gamma_tip: f64,
    pub bracket: (f64, f64),
    /// Objective at the refined point: N₁ for the minimum, g⁽²⁾ − 1 for crossings.
    pub residual: f64,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct CriticalPoints {
    pub cp_c: Option<CriticalValue>,
    pub cp_q_down: Option<CriticalValue>,
    pub cp_q_up: Option<CriticalValue>,
    pub ep: Option<f64>,
    pub lep: Option<CriticalValue>,
}

/// Refinement tolerance on γ_tip.
pub const CP_TOL: f64 = 1e-4;

/// Critical points from (γ_tip, N₁, g⁽²⁾) samples plus a probe that
/// re-evaluates (N₁, g⁽²⁾) anywhere in the range.
pub fn critical_points_from_samples<F>(samples: &[(f64, f64, f64)], probe: F) -> Result<CriticalPoints>
where
    F: Fn(f64) -> Result<(f64, f64)>,
{
    let mut s: Vec<(f64, f64, f64)> = samples
        .iter()
        .copied()
        .filter(|r| r.1.is_finite() && r.2.is_finite())
        .collect();
    s.sort_by(|a, b| a.0.total_cmp(&b.0));
    s.dedup_by(|a, b| a.0 == b.0);
    if s.len() < 5 {
        return Err(Error::InvalidArgument(format!(
            "critical_points needs at least 5 valid rows, got {}",
            s.len()
        )));
    }
    let mut out = CriticalPoints::default();

    let k = (0..s.len()).min_by(|&a, &b| s[a].1.total_cmp(&s[b].1)).unwrap();
    if k > 0 && k + 1 < s.len() {
        let r = golden_section(|g| probe(g).map(|v| v.0), s[k - 1].0, s[k + 1].0, CP_TOL)?;
        out.cp_c = Some(CriticalValue {
            gamma_tip: r.x,
            bracket: r.bracket,
            residual: r.value,
        });
    }

    let crossing = |a: usize| -> Result<CriticalValue> {
        let r = bisect(|g| probe(g).map(|v| v.1 - 1.0), s[a].0, s[a + 1].0, CP_TOL)?;
        Ok(CriticalValue {
            gamma_tip: r.x,
            bracket: r.bracket,
            residual: r.value,
        })
    };
    let up = (0..s.len() - 1).find(|&a| s[a].2 < 1.0 && s[a + 1].2 >= 1.0);
    let start = up.map(|a| a + 1).unwrap_or(0);
    let down = (start..s.len() - 1).find(|&a| s[a].2 >= 1.0 && s[a + 1].2 < 1.0);
    if let Some(a) = up {
        out.cp_q_down = Some(crossing(a)?);
    }
    if let Some(a) = down {
        out.cp_q_up = Some(crossing(a)?);
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct CriticalOptions {
    /// Backend used for both the samples and the refinement.
    pub backend: Option<Backend>,
    /// Locate the LEP as well, on this γ_tip range.
    pub lep_range: Option<(f64, f64)>,
    pub lep_points: usize,
}

impl Default for CriticalOptions {
    fn default() -> Self {
        CriticalOptions {
            backend: None,
            lep_range: None,
            lep_points: 41,
        }
    }
}

/// Critical points of a sweep table; refinement re-evaluates the model with
/// the table's protocol.
pub fn critical_points(table: &SweepTable, opts: &CriticalOptions) -> Result<CriticalPoints> {
    let backend = opts.backend.unwrap_or_else(|| table.primary_backend());
    let samples: Vec<(f64, f64, f64)> = table
        .rows
        .iter()
        .filter_map(|r| r.get(backend).map(|o| (r.gamma_tip, o.n1, o.g2)))
        .collect();
    let p = &table.params;
    let sweep = SweepOptions {
        backends: vec![backend],
        ..table.options.clone()
    };
    let probe = |g: f64| -> Result<(f64, f64)> {
        let mut q = p.with_gamma_tip(g);
        q.delta = resolve_delta(&q, sweep.protocol);
        let o = evaluate_point(&q, backend, sweep.cutoff)?;
        Ok((o.n1, o.g2))
    };
    let mut cp = critical_points_from_samples(&samples, probe)?;
    cp.ep = Some(spectral::hep_location(p.j, p.gamma1_prime(), p.gamma_2));
    if let Some(range) = opts.lep_range {
        match lep_locate(p, range, opts.lep_points, &LepOptions::default()) {
            Ok(r) => {
                cp.lep = Some(CriticalValue {
                    gamma_tip: r.gamma_tip,
                    bracket: r.bracket,
                    residual: r.gap,
                })
            }
            Err(e) if e.is_numerical() => log::warn!("LEP not located: {e}"),
            Err(e) => return Err(e),
        }
    }
    Ok(cp)
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumMap {
    pub gamma_tips: Vec<f64>,
    pub deltas: Vec<f64>,
    /// s1[i][k] at gamma_tips[i], deltas[k].
    pub s1: Vec<Vec<f64>>,
    pub peaks: Vec<Vec<f64>>,
    /// Detunings resonant with ω₁⁺ and ω₁⁻: ω_c − Re λ₁±.
    pub branch_deltas: Vec<[f64; 2]>,
    pub failures: usize,
}

/// S₁(Δ) over a γ_tip × Δ grid.
pub fn spectrum_map(
    p: &SystemParams,
    gamma_tip_grid: &[f64],
    delta_grid: &[f64],
    backend: Backend,
    cutoff: Cutoff,
) -> Result<SpectrumMap> {
    check_ascending(gamma_tip_grid, "gamma_tip")?;
    check_ascending(delta_grid, "delta")?;
    p.validate_dissipative()?;
    let n0_of = |q: &SystemParams| (q.omega_drive / (q.gamma1_prime() + q.gamma2_prime())).powi(2);
    let cells: Vec<(usize, usize)> = (0..gamma_tip_grid.len())
        .flat_map(|i| (0..delta_grid.len()).map(move |k| (i, k)))
        .collect();
    let values: Vec<Option<f64>> = cells
        .par_iter()
        .map(|&(i, k)| {
            let q = p.with_gamma_tip(gamma_tip_grid[i]).with_delta(delta_grid[k]);
            evaluate_point(&q, backend, cutoff).ok().map(|o| o.n1 / n0_of(&q))
        })
        .collect();
    let nd = delta_grid.len();
    let failures = values.iter().filter(|v| v.is_none()).count();
    let s1: Vec<Vec<f64>> = values
        .chunks(nd)
        .map(|c| c.iter().map(|v| v.unwrap_or(f64::NAN)).collect())
        .collect();
    let peaks = s1
        .iter()
        .map(|row| find_peaks(delta_grid, row).into_iter().map(|k| delta_grid[k]).collect())
        .collect();
    let branch_deltas = gamma_tip_grid
        .iter()
        .map(|&g| {
            let e = one_photon_eigensystem_closed(&p.with_gamma_tip(g));
            [p.omega_c - e.eigenvalues[0].re, p.omega_c - e.eigenvalues[1].re]
        })
        .collect();
    Ok(SpectrumMap {
        gamma_tips: gamma_tip_grid.to_vec(),
        deltas: delta_grid.to_vec(),
        s1,
        peaks,
        branch_deltas,
        failures,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct EpRow {
    pub j: f64,
    pub hep: f64,
    pub lep: Option<f64>,
    pub gap: Option<f64>,
    pub overlap: Option<f64>,
    pub rel_discrepancy: Option<f64>,
    pub error: Option<String>,
}

/// HEP from the closed form and LEP from the Liouvillian, per J. The LEP is
/// searched on [0, 2·hep] unless `range` is given.
pub fn ep_agreement(
    p: &SystemParams,
    j_grid: &[f64],
    points: usize,
    range: Option<(f64, f64)>,
) -> Result<Vec<EpRow>> {
    check_ascending(j_grid, "J")?;
    if j_grid[0] <= 0.0 {
        return Err(Error::InvalidArgument("J grid must be positive".into()));
    }
    let rows = j_grid
        .par_iter()
        .map(|&j| {
            let mut q = p.clone();
            q.j = j;
            let hep = spectral::hep_location(j, q.gamma1_prime(), q.gamma_2);
            let r = range.unwrap_or((0.0, 2.0 * hep.max(0.0)));
            match lep_locate(&q, r, points, &LepOptions::default()) {
                Ok(l) => EpRow {
                    j,
                    hep,
                    lep: Some(l.gamma_tip),
                    gap: Some(l.gap),
                    overlap: Some(l.overlap),
                    rel_discrepancy: Some((l.gamma_tip - hep).abs() / hep.abs()),
                    error: None,
                },
                Err(e) => EpRow {
                    j,
                    hep,
                    lep: None,
                    gap: None,
                    overlap: None,
                    rel_discrepancy: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    Ok(rows)
}

#[derive(Clone, Debug, Serialize)]
pub struct BranchPoint {
    pub gamma_tip: f64,
    pub n: usize,
    /// Position after nearest-neighbour continuation.
    pub branch: usize,
    /// Label from the closed form at this point.
    pub label: String,
    pub lambda: (f64, f64),
    /// Populations over the block states (ascending m).
    pub populations: Vec<f64>,
}

/// One- and two-photon eigen-branches along γ_tip, continued by nearest
/// neighbour and tagged with the closed-form labels.
pub fn eigen_branches(p: &SystemParams, gamma_tip_grid: &[f64]) -> Result<Vec<BranchPoint>> {
    check_ascending(gamma_tip_grid, "gamma_tip")?;
    let mut out = Vec::new();
    for n in [1usize, 2] {
        let systems: Vec<spectral::SubspaceEigensystem> = gamma_tip_grid
            .iter()
            .map(|&g| {
                let q = p.with_gamma_tip(g);
                if n == 1 {
                    Ok(one_photon_eigensystem_closed(&q))
                } else {
                    spectral::two_photon_eigensystem_closed(&q)
                }
            })
            .collect::<Result<_>>()?;
        let seq: Vec<Vec<c64>> = systems.iter().map(|s| s.eigenvalues.clone()).collect();
        let perms = spectral::continue_branches(&seq);
        for ((g, sys), perm) in gamma_tip_grid.iter().zip(&systems).zip(&perms) {
            let pops = spectral::localization(sys);
            for (branch, &k) in perm.iter().enumerate() {
                let label = match sys.labels[k] {
                    BranchLabel::Index(i) => format!("#{i}"),
                    l => l.to_string(),
                };
                out.push(BranchPoint {
                    gamma_tip: *g,
                    n,
                    branch,
                    label,
                    lambda: (sys.eigenvalues[k].re, sys.eigenvalues[k].im),
                    populations: pops[k].clone(),
                });
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_minimum() {
        let f = |g: f64| (g - 5.0).powi(2) + 0.01;
        let samples: Vec<(f64, f64, f64)> = linspace(0.0, 10.0, 21).iter().map(|&g| (g, f(g), 0.5)).collect();
        let cp = critical_points_from_samples(&samples, |g| Ok((f(g), 0.5))).unwrap();
        assert!((cp.cp_c.unwrap().gamma_tip - 5.0).abs() < 1e-3);
        assert!(cp.cp_q_down.is_none() && cp.cp_q_up.is_none());
    }

    #[test]
    fn synthetic_crossings_order_independent() {
        let g2 = |g: f64| 1.0 + 0.5 * (g - 2.0) * (6.0 - g) / 4.0;
        let f = |g: f64| (g - 5.0).powi(2);
        let mut samples: Vec<(f64, f64, f64)> = linspace(0.0, 9.0, 31).iter().map(|&g| (g, f(g), g2(g))).collect();
        let a = critical_points_from_samples(&samples, |g| Ok((f(g), g2(g)))).unwrap();
        samples.reverse();
        let b = critical_points_from_samples(&samples, |g| Ok((f(g), g2(g)))).unwrap();
        assert!((a.cp_q_down.unwrap().gamma_tip - 2.0).abs() < 1e-3);
        assert!((a.cp_q_up.unwrap().gamma_tip - 6.0).abs() < 1e-3);
        assert_eq!(a.cp_q_down, b.cp_q_down);
        assert_eq!(a.cp_q_up, b.cp_q_up);
        assert_eq!(a.cp_c, b.cp_c);
    }

    #[test]
    fn protocol_parse() {
        assert_eq!("track_upper_branch".parse::<DetuningProtocol>().unwrap(), DetuningProtocol::TrackUpperBranch);
        assert_eq!("fixed:-1.5".parse::<DetuningProtocol>().unwrap(), DetuningProtocol::Fixed(-1.5));
        assert!("upper".parse::<DetuningProtocol>().is_err());
    }

    #[test]
    fn linspace_endpoints() {
        let g = linspace(0.0, 12.0, 7);
        assert_eq!(g, vec![0.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0]);
        assert!(check_ascending(&[1.0, 1.0], "x").is_err());
    }
}
