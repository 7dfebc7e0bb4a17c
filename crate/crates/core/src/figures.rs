//! Figure-level dataset builders shared by the CLI and the tests.

use serde_json::json;

use crate::config::Defaults;
use crate::dataset::{Cell, Dataset, Provenance};
use crate::error::{Error, Result};
use crate::experiments::{
    critical_points, eigen_branches, ep_agreement, resolve_delta, spectrum_map, sweep_loss,
    CriticalOptions, CriticalPoints, CriticalValue, DetuningProtocol, SweepOptions, SweepTable,
};
use crate::liouvillian::{coherence_pair, lep_frame, lep_locate, matrix_overlap, LepOptions};
use crate::model::SystemParams;
use crate::observables::{evaluate_point, poisson_comparison, Backend, Cutoff};

/// Shared inputs of every experiment.
#[derive(Clone, Debug)]
pub struct RunContext {
    pub preset: Option<String>,
    pub params: SystemParams,
    pub defaults: Defaults,
    pub overrides: Vec<String>,
    pub cutoff: Cutoff,
    /// γ₁′ in rad/s when the parameters came from SI device inputs.
    pub si_gamma1_prime: Option<f64>,
}

impl RunContext {
    pub fn new(params: SystemParams) -> Self {
        RunContext {
            preset: None,
            params,
            defaults: Defaults::default(),
            overrides: Vec::new(),
            cutoff: Cutoff::default(),
            si_gamma1_prime: None,
        }
    }

    fn provenance(&self, name: &str, details: serde_json::Value) -> Provenance {
        let mut d = details;
        if let (Some(g), Some(obj)) = (self.si_gamma1_prime, d.as_object_mut()) {
            obj.insert("si_gamma1_prime_rad_per_s".into(), json!(g));
        }
        Provenance::new(name, self.preset.as_deref(), &self.params, &self.overrides).with_details(d)
    }

    fn dataset(&self, name: &str, columns: &[&str]) -> Dataset {
        let mut d = Dataset::new(name, columns);
        d.meta("dataset", name);
        if let Some(p) = &self.preset {
            d.meta("preset", p);
        }
        d.params_meta(&self.params);
        for o in &self.overrides {
            d.meta("override", o);
        }
        d
    }
}

/// A finished dataset with its sidecar and a one-line summary.
#[derive(Clone, Debug)]
pub struct Output {
    pub dataset: Dataset,
    pub provenance: Provenance,
    pub summary: String,
}

const POP_STATES: [(usize, usize); 10] =
    [(0, 0), (0, 1), (1, 0), (0, 2), (1, 1), (2, 0), (0, 3), (1, 2), (2, 1), (3, 0)];

fn sweep_columns() -> Vec<String> {
    let mut c: Vec<String> = [
        "gamma_tip",
        "delta",
        "re_lambda_plus",
        "im_lambda_plus",
        "re_lambda_minus",
        "im_lambda_minus",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    for b in ["analytic", "lindblad"] {
        for q in ["n1", "n2", "g2", "g3"] {
            c.push(format!("{q}_{b}"));
        }
    }
    for (m, n) in POP_STATES {
        c.push(format!("p_{m}{n}"));
    }
    c.push("status".into());
    c
}

fn sweep_cells(table: &SweepTable, row: usize) -> Vec<Cell> {
    let r = &table.rows[row];
    let mut c: Vec<Cell> = vec![
        r.gamma_tip.into(),
        r.delta.into(),
        r.lambda_plus.0.into(),
        r.lambda_plus.1.into(),
        r.lambda_minus.0.into(),
        r.lambda_minus.1.into(),
    ];
    for b in [Backend::Analytic, Backend::Lindblad] {
        let o = r.get(b);
        c.push(o.map(|o| o.n1).into());
        c.push(o.map(|o| o.n2).into());
        c.push(o.map(|o| o.g2).into());
        c.push(o.map(|o| o.g3).into());
    }
    let snap = r.get(table.primary_backend()).or(r.lindblad.as_ref()).or(r.analytic.as_ref());
    for (m, n) in POP_STATES {
        c.push(snap.map(|o| o.population(m, n)).into());
    }
    c.push(if r.failed() { r.failures.join("; ") } else { "ok".to_string() }.into());
    c
}

fn fmt_cp(v: &Option<CriticalValue>) -> String {
    v.map(|c| format!("{:.4}", c.gamma_tip)).unwrap_or_else(|| "none".into())
}

fn cp_meta(d: &mut Dataset, cp: &CriticalPoints) {
    let found = [
        ("cp_c", cp.cp_c.map(|c| c.gamma_tip)),
        ("cp_q_down", cp.cp_q_down.map(|c| c.gamma_tip)),
        ("cp_q_up", cp.cp_q_up.map(|c| c.gamma_tip)),
        ("ep", cp.ep),
        ("lep", cp.lep.map(|c| c.gamma_tip)),
    ];
    for (k, v) in found {
        if let Some(v) = v {
            d.meta(k, v);
        }
    }
}

fn cp_summary(cp: &CriticalPoints) -> String {
    format!(
        "cp_c={} cp_q_down={} cp_q_up={} ep={} lep={}",
        fmt_cp(&cp.cp_c),
        fmt_cp(&cp.cp_q_down),
        fmt_cp(&cp.cp_q_up),
        cp.ep.map(|e| format!("{e:.4}")).unwrap_or_else(|| "none".into()),
        fmt_cp(&cp.lep)
    )
}

fn sweep_dataset(ctx: &RunContext, name: &str, tables: &[&SweepTable]) -> Dataset {
    let mut cols = vec!["protocol".to_string()];
    cols.extend(sweep_columns());
    let colrefs: Vec<&str> = cols.iter().map(String::as_str).collect();
    let mut d = ctx.dataset(name, &colrefs);
    for t in tables {
        for k in 0..t.rows.len() {
            let mut row: Vec<Cell> = vec![t.options.protocol.to_string().into()];
            row.extend(sweep_cells(t, k));
            d.push(row);
        }
    }
    d
}

/// N₁, g⁽²⁾, g⁽³⁾ along γ_tip with critical points.
pub fn fig2ab(ctx: &RunContext, grid: &[f64], opts: &SweepOptions) -> Result<Output> {
    let table = sweep_loss(&ctx.params, grid, opts)?;
    let cp = critical_points(&table, &CriticalOptions::default())?;
    let mut d = sweep_dataset(ctx, "fig2ab", &[&table]);
    d.meta("backends", backends_str(&opts.backends));
    cp_meta(&mut d, &cp);
    let failed = table.rows.iter().filter(|r| r.failed()).count();
    let summary = format!("fig2ab: {} rows ({failed} failed), {}", table.rows.len(), cp_summary(&cp));
    Ok(Output {
        provenance: ctx.provenance("fig2ab", json!({ "grid": grid, "options": opts, "critical_points": cp })),
        dataset: d,
        summary,
    })
}

/// Critical-point overview including the LEP.
pub fn fig1c(ctx: &RunContext, grid: &[f64], opts: &SweepOptions, lep_range: (f64, f64)) -> Result<Output> {
    let table = sweep_loss(&ctx.params, grid, opts)?;
    let cp = critical_points(
        &table,
        &CriticalOptions {
            lep_range: Some(lep_range),
            ..Default::default()
        },
    )?;
    let mut d = sweep_dataset(ctx, "fig1c", &[&table]);
    cp_meta(&mut d, &cp);
    Ok(Output {
        provenance: ctx.provenance(
            "fig1c",
            json!({ "grid": grid, "options": opts, "lep_range": lep_range, "critical_points": cp }),
        ),
        dataset: d,
        summary: format!("fig1c: {}", cp_summary(&cp)),
    })
}

/// g⁽²⁾ and g⁽³⁾ along γ_tip for the tracking protocol and for a fixed
/// detuning equal to the tracking value at the start of the grid.
pub fn fig3a(ctx: &RunContext, grid: &[f64], opts: &SweepOptions) -> Result<Output> {
    let first = grid
        .first()
        .copied()
        .ok_or_else(|| Error::InvalidArgument("empty gamma_tip grid".into()))?;
    let fixed = resolve_delta(&ctx.params.with_gamma_tip(first), DetuningProtocol::TrackUpperBranch);
    let tracked = sweep_loss(&ctx.params, grid, &SweepOptions { protocol: DetuningProtocol::TrackUpperBranch, ..opts.clone() })?;
    let pinned = sweep_loss(&ctx.params, grid, &SweepOptions { protocol: DetuningProtocol::Fixed(fixed), ..opts.clone() })?;
    let mut d = sweep_dataset(ctx, "fig3a", &[&tracked, &pinned]);
    d.meta("fixed_delta", fixed);
    let window = |t: &SweepTable| {
        t.rows
            .iter()
            .filter_map(|r| r.get(t.primary_backend()).map(|o| (r.gamma_tip, o.g2, o.g3)))
            .filter(|&(_, g2, g3)| g3 < 1.0 && g2 > 1.0)
            .map(|x| x.0)
            .collect::<Vec<_>>()
    };
    let span = |w: Vec<f64>| match (w.first(), w.last()) {
        (Some(a), Some(b)) => format!("[{a}, {b}]"),
        _ => "none".into(),
    };
    Ok(Output {
        provenance: ctx.provenance("fig3a", json!({ "grid": grid, "options": opts, "fixed_delta": fixed })),
        summary: format!(
            "fig3a: two-photon window (g3<1<g2) tracked {} fixed {}",
            span(window(&tracked)),
            span(window(&pinned))
        ),
        dataset: d,
    })
}

/// Photon-number distribution of mode 1 against Poisson at selected losses.
pub fn fig3b(ctx: &RunContext, gamma_tips: &[f64], protocol: DetuningProtocol, backend: Backend) -> Result<Output> {
    let mut d = ctx.dataset("fig3b", &["gamma_tip", "delta", "m", "p", "poisson", "deviation", "ratio"]);
    let mut parts = Vec::new();
    for &g in gamma_tips {
        let mut q = ctx.params.with_gamma_tip(g);
        q.delta = resolve_delta(&q, protocol);
        let o = evaluate_point(&q, backend, ctx.cutoff)?;
        let dist = o.mode1_distribution();
        let rows = poisson_comparison(&dist);
        let sign: String = rows
            .iter()
            .skip(1)
            .take(3)
            .map(|r| if r.deviation > 0.0 { '+' } else { '-' })
            .collect();
        parts.push(format!("gamma_tip={g}: P1..P3 vs Poisson {sign}"));
        for r in rows {
            d.push(vec![g.into(), q.delta.into(), r.m.into(), r.p.into(), r.poisson.into(), r.deviation.into(), r.ratio.into()]);
        }
    }
    d.meta("backend", backend);
    d.meta("protocol", protocol);
    Ok(Output {
        provenance: ctx.provenance("fig3b", json!({ "gamma_tips": gamma_tips, "protocol": protocol, "backend": backend, "cutoff": ctx.cutoff })),
        dataset: d,
        summary: format!("fig3b: {}", parts.join("; ")),
    })
}

/// S₁(Δ) at a few losses (long format, with peak flags).
pub fn fig2c(ctx: &RunContext, gamma_tips: &[f64], deltas: &[f64], backend: Backend) -> Result<Output> {
    let mut tips = gamma_tips.to_vec();
    tips.sort_by(f64::total_cmp);
    tips.dedup();
    let map = spectrum_map(&ctx.params, &tips, deltas, backend, ctx.cutoff)?;
    let d = map_dataset(ctx, "fig2c_map", &map);
    let counts: Vec<String> = map
        .gamma_tips
        .iter()
        .zip(&map.peaks)
        .map(|(g, p)| format!("{g}:{}", p.len()))
        .collect();
    Ok(Output {
        provenance: ctx.provenance("fig2c_map", json!({ "gamma_tips": tips, "deltas": deltas, "backend": backend })),
        dataset: d,
        summary: format!("fig2c_map: peak counts {}", counts.join(" ")),
    })
}

fn map_dataset(ctx: &RunContext, name: &str, map: &crate::experiments::SpectrumMap) -> Dataset {
    let mut d = ctx.dataset(
        name,
        &["gamma_tip", "delta", "s1", "is_peak", "delta_branch_plus", "delta_branch_minus", "peak_count"],
    );
    for (i, &g) in map.gamma_tips.iter().enumerate() {
        for (k, &x) in map.deltas.iter().enumerate() {
            let is_peak = map.peaks[i].contains(&x);
            d.push(vec![
                g.into(),
                x.into(),
                map.s1[i][k].into(),
                (is_peak as usize).into(),
                map.branch_deltas[i][0].into(),
                map.branch_deltas[i][1].into(),
                map.peaks[i].len().into(),
            ]);
        }
    }
    d
}

/// Dense S₁ map over γ_tip × Δ with the one-photon branches overlaid.
pub fn figs3(ctx: &RunContext, gamma_tips: &[f64], deltas: &[f64], backend: Backend) -> Result<Output> {
    let map = spectrum_map(&ctx.params, gamma_tips, deltas, backend, ctx.cutoff)?;
    let d = map_dataset(ctx, "figS3", &map);
    let merge = map
        .gamma_tips
        .iter()
        .zip(&map.peaks)
        .find(|(_, p)| p.len() == 1)
        .map(|(g, _)| g.to_string())
        .unwrap_or_else(|| "none".into());
    Ok(Output {
        provenance: ctx.provenance("figS3", json!({ "gamma_tips": gamma_tips, "deltas": deltas, "backend": backend })),
        dataset: d,
        summary: format!("figS3: {}x{} map, single peak from gamma_tip={merge}, {} failed cells", gamma_tips.len(), deltas.len(), map.failures),
    })
}

/// One- and two-photon eigen-branches with localisation.
pub fn figs4(ctx: &RunContext, gamma_tips: &[f64]) -> Result<Output> {
    let pts = eigen_branches(&ctx.params, gamma_tips)?;
    let mut d = ctx.dataset(
        "figS4",
        &["gamma_tip", "n", "branch", "label", "re_lambda", "im_lambda", "pop_0", "pop_1", "pop_2", "states"],
    );
    for p in &pts {
        let states = match p.n {
            1 => "01|10",
            _ => "02|11|20",
        };
        let pop = |k: usize| -> Cell { p.populations.get(k).copied().into() };
        d.push(vec![
            p.gamma_tip.into(),
            p.n.into(),
            p.branch.into(),
            p.label.clone().into(),
            p.lambda.0.into(),
            p.lambda.1.into(),
            pop(0),
            pop(1),
            pop(2),
            states.into(),
        ]);
    }
    Ok(Output {
        provenance: ctx.provenance("figS4", json!({ "gamma_tips": gamma_tips })),
        dataset: d,
        summary: format!("figS4: {} branch points over {} losses", pts.len(), gamma_tips.len()),
    })
}

/// HEP versus LEP over a J grid.
pub fn fig1b(ctx: &RunContext, j_grid: &[f64], points: usize) -> Result<Output> {
    let rows = ep_agreement(&ctx.params, j_grid, points, None)?;
    let mut d = ctx.dataset("fig1b_ep", &["j", "hep", "lep", "gap", "overlap", "rel_discrepancy", "status"]);
    let mut worst = 0.0f64;
    for r in &rows {
        if let Some(x) = r.rel_discrepancy {
            worst = worst.max(x);
        }
        d.push(vec![
            r.j.into(),
            r.hep.into(),
            r.lep.into(),
            r.gap.into(),
            r.overlap.into(),
            r.rel_discrepancy.into(),
            r.error.clone().unwrap_or_else(|| "ok".into()).into(),
        ]);
    }
    let missing = rows.iter().filter(|r| r.lep.is_none()).count();
    Ok(Output {
        provenance: ctx.provenance("fig1b_ep", json!({ "j_grid": j_grid, "points": points })),
        dataset: d,
        summary: format!("fig1b_ep: {} J values, max |hep-lep|/hep = {worst:.2e}, {missing} not located", rows.len()),
    })
}

/// Coherence-pair gap along γ_tip plus the located LEP.
pub fn lep_scan(ctx: &RunContext, range: (f64, f64), points: usize) -> Result<Output> {
    let opts = LepOptions::default();
    let located = lep_locate(&ctx.params, range, points, &opts);
    let q = lep_frame(&ctx.params, &opts, range.1);
    let mut d = ctx.dataset("lep", &["gamma_tip", "branch", "re_Lambda", "im_Lambda", "gap", "overlap"]);
    d.meta("frame_omega_c", q.omega_c);
    for g in crate::experiments::linspace(range.0, range.1, points) {
        let [(a, xa), (b, xb)] = coherence_pair(&q.with_gamma_tip(g), &opts)?;
        let gap = (a - b).norm() / q.gamma1_prime();
        let ov = matrix_overlap(&xa, &xb);
        for (k, l) in [a, b].iter().enumerate() {
            d.push(vec![g.into(), k.into(), l.re.into(), l.im.into(), gap.into(), ov.into()]);
        }
    }
    let summary = match &located {
        Ok(r) => {
            d.meta("lep", r.gamma_tip);
            format!("lep: gamma_tip={:.6} gap={:.2e} overlap={:.6}", r.gamma_tip, r.gap, r.overlap)
        }
        Err(e) => format!("lep: not located ({e})"),
    };
    let details = json!({ "range": range, "points": points, "result": located.as_ref().ok() });
    located?;
    Ok(Output {
        provenance: ctx.provenance("lep", details),
        dataset: d,
        summary,
    })
}

pub fn backends_str(b: &[Backend]) -> String {
    b.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("+")
}
