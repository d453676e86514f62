//! Subcommands that turn a [`RunConfig`] into result tables.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use super::config::{DomainChoice, Resolution, RunConfig, SolverSettings};
use super::table::{Provenance, ResultTable};
use crate::discretization::{assemble_hamiltonian, suggest_domain_with, Grid};
use crate::eigensolver::{solve_lowest_with, EigenSolution, SolverOptions};
use crate::error::{Error, Result};
use crate::observables::{count_bound, level_spacings, moments, node_count};
use crate::potentials::{landmarks, Family, PotentialSpec};
use crate::semiclassics::{action_integral_with, classical_period_with, powerlaw_wkb_closed_form, wkb_levels};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    GsSweep,
    Spectrum,
    States,
    Powerlaw,
    Wkb,
    Period,
}

impl Subcommand {
    pub const ALL: [Subcommand; 6] = [
        Subcommand::GsSweep,
        Subcommand::Spectrum,
        Subcommand::States,
        Subcommand::Powerlaw,
        Subcommand::Wkb,
        Subcommand::Period,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Subcommand::GsSweep => "gs-sweep",
            Subcommand::Spectrum => "spectrum",
            Subcommand::States => "states",
            Subcommand::Powerlaw => "powerlaw",
            Subcommand::Wkb => "wkb",
            Subcommand::Period => "period",
        }
    }
}

impl fmt::Display for Subcommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Subcommand {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Subcommand::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::config(format!("unknown subcommand `{s}`")))
    }
}

/// Rough energy of level `n` of `½ α |q|^β`, from the closed-form WKB rule
/// rescaled to general `α`, `ħ`, `m`.
pub fn powerlaw_level_estimate(spec: &PotentialSpec, n: usize, hbar: f64, mass: f64) -> f64 {
    let beta = spec.beta;
    let scale = (hbar * hbar / mass).powf(beta / (beta + 2.0)) * spec.alpha.powf(2.0 / (beta + 2.0));
    powerlaw_wkb_closed_form(n, beta) * scale
}

/// Grid for the lowest `k` states of `spec` under `settings`.
pub fn grid_for(spec: &PotentialSpec, settings: &SolverSettings, k: usize) -> Result<Grid> {
    let e_cap = match (settings.e_cap, spec.family) {
        (Some(e), _) => Some(e),
        // a little headroom above the highest requested level
        (None, Family::PowerLaw) => Some(1.05 * powerlaw_level_estimate(spec, k.saturating_sub(1), settings.hbar, settings.mass)),
        (None, _) => None,
    };
    let suggestion = || suggest_domain_with(spec, e_cap, settings.hbar, settings.mass, &settings.domain_options);
    let (lo, hi, auto_points) = match settings.domain {
        DomainChoice::Fixed { lo, hi } => {
            let points = match settings.resolution {
                Resolution::Auto => {
                    let s = suggestion()?;
                    let h = (s.q_hi - s.q_lo) / (s.n_points + 1) as f64;
                    Some(((hi - lo) / h).ceil() as usize)
                }
                _ => None,
            };
            (lo, hi, points.map(|p| p.saturating_sub(1)))
        }
        DomainChoice::Auto => {
            let s = suggestion()?;
            (s.q_lo, s.q_hi, Some(s.n_points))
        }
    };
    match settings.resolution {
        Resolution::Spacing(h) => Grid::with_spacing(lo, hi, h),
        Resolution::Points(n) => Grid::new(lo, hi, n),
        Resolution::Auto => Grid::new(lo, hi, auto_points.unwrap_or(0)),
    }
}

/// Lowest `k` eigenpairs of `spec` on the configured grid.
pub fn solve_spec(spec: &PotentialSpec, settings: &SolverSettings, k: usize) -> Result<EigenSolution> {
    let grid = grid_for(spec, settings, k)?;
    let ham = assemble_hamiltonian(&grid, spec, settings.hbar, settings.mass)?;
    let opts = SolverOptions::with_tol(settings.tol);
    solve_lowest_with(&ham, k, &opts)
}

/// `(v_v, v_max)`; NaN where the family has no such level.
fn thresholds(spec: &PotentialSpec) -> (f64, f64) {
    match landmarks(spec) {
        Ok(lm) => (lm.v_v, lm.v_max),
        Err(_) => (f64::NAN, spec.well().v_max().unwrap_or(f64::INFINITY)),
    }
}

fn opt(x: Option<f64>) -> f64 {
    x.unwrap_or(f64::NAN)
}

fn require_nonempty<T>(list: &[T], key: &str, cmd: Subcommand) -> Result<()> {
    if list.is_empty() {
        return Err(Error::config(format!("`{cmd}` needs a non-empty {key}")));
    }
    Ok(())
}

/// Computes every table of one subcommand; nothing is written here.
pub fn run_subcommand(cfg: &RunConfig, cmd: Subcommand) -> Result<Vec<ResultTable>> {
    let prov = Provenance::new(cfg, cmd.name());
    match cmd {
        Subcommand::GsSweep => gs_sweep(cfg, prov),
        Subcommand::Spectrum => spectrum(cfg, prov),
        Subcommand::States => states(cfg, prov),
        Subcommand::Powerlaw => powerlaw(cfg, prov),
        Subcommand::Wkb => wkb(cfg, prov),
        Subcommand::Period => period(cfg, prov),
    }
}

fn gs_sweep(cfg: &RunConfig, prov: Provenance) -> Result<Vec<ResultTable>> {
    let alphas = &cfg.analysis.sweep;
    require_nonempty(alphas, "analysis.sweep", Subcommand::GsSweep)?;
    let mm = cfg.analysis.moment_max;
    let mut columns: Vec<(String, String)> = vec![
        ("alpha".into(), "energy".into()),
        ("e_gs".into(), "energy".into()),
        ("v_v".into(), "energy".into()),
        ("v_max".into(), "energy".into()),
        ("mu".into(), "length".into()),
    ];
    for n in 2..=mm {
        columns.push((format!("m{n}"), format!("length^{n}")));
    }
    let rows = alphas
        .par_iter()
        .map(|&alpha| {
            let spec = cfg.potential.with_alpha(alpha);
            let run = || -> Result<Vec<f64>> {
                let sol = solve_spec(&spec, &cfg.solver, 1)?;
                let report = moments(&sol.states[0], &sol.grid, mm)?;
                let (v_v, v_max) = thresholds(&spec);
                let mut row = vec![alpha, sol.energies[0], v_v, v_max, report.mu];
                row.extend(report.central_moments.iter().skip(2));
                Ok(row)
            };
            run().map_err(|e| e.annotate(format!("alpha = {alpha}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let cols: Vec<(&str, &str)> = columns.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
    let mut table = ResultTable::new("gs_sweep", &cols, prov);
    for row in rows {
        table.push(row)?;
    }
    Ok(vec![table])
}

fn spectrum(cfg: &RunConfig, prov: Provenance) -> Result<Vec<ResultTable>> {
    let spec = cfg.potential;
    let alpha = spec.alpha;
    let sol = solve_spec(&spec, &cfg.solver, cfg.solver.k_states).map_err(|e| e.annotate(format!("alpha = {alpha}")))?;
    let (v_v, v_max) = thresholds(&spec);
    let (spacings, scaled) = level_spacings(&sol.energies)?;
    let mut table = ResultTable::new(
        "spectrum",
        &[
            ("n", "1"),
            ("energy", "energy"),
            ("spacing", "energy"),
            ("scaled_spacing", "1"),
            ("bound", "1"),
        ],
        prov.clone(),
    );
    for (n, &e) in sol.energies.iter().enumerate() {
        let bound = if e < v_max { 1.0 } else { 0.0 };
        table.push(vec![n as f64, e, opt(spacings[n]), opt(scaled[n]), bound])?;
    }
    let branch = sol.energies.iter().position(|&e| e > v_v).map_or(f64::NAN, |i| i as f64);
    let mut summary = ResultTable::new(
        "spectrum_summary",
        &[
            ("alpha", "energy"),
            ("k", "1"),
            ("bound_count", "1"),
            ("branch_index", "1"),
            ("v_v", "energy"),
            ("v_max", "energy"),
        ],
        prov,
    );
    summary.push(vec![
        alpha,
        sol.len() as f64,
        count_bound(&sol.energies, v_max) as f64,
        branch,
        v_v,
        v_max,
    ])?;
    Ok(vec![table, summary])
}

fn states(cfg: &RunConfig, prov: Provenance) -> Result<Vec<ResultTable>> {
    let alphas = if cfg.analysis.sweep.is_empty() { vec![cfg.potential.alpha] } else { cfg.analysis.sweep.clone() };
    let indices = if cfg.analysis.states.is_empty() { vec![0] } else { cfg.analysis.states.clone() };
    let k = cfg.solver.k_states.max(indices.iter().max().map_or(1, |m| m + 1));
    let results = alphas
        .par_iter()
        .map(|&alpha| {
            let spec = cfg.potential.with_alpha(alpha);
            let run = || -> Result<(Vec<Vec<f64>>, Vec<ResultTable>)> {
                let sol = solve_spec(&spec, &cfg.solver, k)?;
                let mut summary = Vec::with_capacity(sol.len());
                for (n, psi) in sol.states.iter().enumerate() {
                    let m = moments(psi, &sol.grid, 2)?;
                    summary.push(vec![alpha, n as f64, sol.energies[n], m.mu, m.central_moments[2], node_count(psi) as f64]);
                }
                let mut profiles = Vec::with_capacity(indices.len());
                for &n in &indices {
                    let mut t = ResultTable::new(format!("state_a{alpha}_n{n}"), &[("q", "length"), ("psi", "length^-1/2")], prov.clone());
                    for (i, &p) in sol.states[n].iter().enumerate() {
                        t.push(vec![sol.grid.point(i), p])?;
                    }
                    profiles.push(t);
                }
                Ok((summary, profiles))
            };
            run().map_err(|e| e.annotate(format!("alpha = {alpha}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut summary = ResultTable::new(
        "states_summary",
        &[
            ("alpha", "energy"),
            ("n", "1"),
            ("energy", "energy"),
            ("mu", "length"),
            ("m2", "length^2"),
            ("nodes", "1"),
        ],
        prov,
    );
    let mut tables = Vec::new();
    for (rows, profiles) in results {
        for row in rows {
            summary.push(row)?;
        }
        tables.extend(profiles);
    }
    tables.insert(0, summary);
    Ok(tables)
}

fn powerlaw(cfg: &RunConfig, prov: Provenance) -> Result<Vec<ResultTable>> {
    let betas = if cfg.analysis.betas.is_empty() && cfg.potential.family == Family::PowerLaw {
        vec![cfg.potential.beta]
    } else {
        cfg.analysis.betas.clone()
    };
    require_nonempty(&betas, "analysis.betas", Subcommand::Powerlaw)?;
    let k = cfg.solver.k_states;
    let blocks = betas
        .par_iter()
        .map(|&beta| {
            let spec = PotentialSpec::power_law(cfg.potential.alpha, beta).with_energy_cap(cfg.potential.energy_cap);
            let run = || -> Result<Vec<Vec<f64>>> {
                let sol = solve_spec(&spec, &cfg.solver, k)?;
                let (spacings, scaled) = level_spacings(&sol.energies)?;
                Ok(sol
                    .energies
                    .iter()
                    .enumerate()
                    .map(|(n, &e)| vec![beta, n as f64, e, opt(spacings[n]), opt(scaled[n])])
                    .collect())
            };
            run().map_err(|e| e.annotate(format!("beta = {beta}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut table = ResultTable::new(
        "powerlaw",
        &[
            ("beta", "1"),
            ("n", "1"),
            ("energy", "energy"),
            ("spacing", "energy"),
            ("scaled_spacing", "1"),
        ],
        prov,
    );
    for row in blocks.into_iter().flatten() {
        table.push(row)?;
    }
    Ok(vec![table])
}

fn wkb(cfg: &RunConfig, prov: Provenance) -> Result<Vec<ResultTable>> {
    let is_power = cfg.potential.family == Family::PowerLaw;
    let (label, params) = if is_power {
        let betas = if cfg.analysis.betas.is_empty() { vec![cfg.potential.beta] } else { cfg.analysis.betas.clone() };
        ("beta", betas)
    } else {
        let alphas = if cfg.analysis.sweep.is_empty() { vec![cfg.potential.alpha] } else { cfg.analysis.sweep.clone() };
        ("alpha", alphas)
    };
    let count = cfg.analysis.wkb_levels;
    if count == 0 {
        return Err(Error::config("`wkb` needs analysis.wkb_levels of at least 1"));
    }
    let blocks = params
        .par_iter()
        .map(|&p| {
            let spec = if is_power {
                PotentialSpec::power_law(cfg.potential.alpha, p).with_energy_cap(cfg.potential.energy_cap)
            } else {
                cfg.potential.with_alpha(p)
            };
            let run = || -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
                let exact = solve_spec(&spec, &cfg.solver, count)?;
                let semi = wkb_levels(&spec, count, &cfg.analysis.wkb, cfg.solver.mass)?;
                let rows = (0..count)
                    .map(|n| {
                        let e = exact.energies[n];
                        let w = semi.energies.get(n).copied().unwrap_or(f64::NAN);
                        vec![p, n as f64, w, e, (w - e).abs() / e.abs()]
                    })
                    .collect();
                Ok((rows, vec![p, count as f64, semi.count() as f64]))
            };
            run().map_err(|e| e.annotate(format!("{label} = {p}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut table = ResultTable::new(
        "wkb",
        &[
            ("param", "1"),
            ("n", "1"),
            ("e_wkb", "energy"),
            ("e_exact", "energy"),
            ("rel_error", "1"),
        ],
        prov.clone(),
    );
    let mut summary = ResultTable::new("wkb_summary", &[("param", "1"), ("requested", "1"), ("wkb_count", "1")], prov);
    for (rows, s) in blocks {
        for row in rows {
            table.push(row)?;
        }
        summary.push(s)?;
    }
    Ok(vec![table, summary])
}

/// Sample energies for `period`: the configured list, or evenly spaced
/// interior points of the well.
pub fn period_energies(cfg: &RunConfig) -> Result<Vec<f64>> {
    if !cfg.analysis.period_energies.is_empty() {
        return Ok(cfg.analysis.period_energies.clone());
    }
    let well = cfg.potential.well();
    let top = match (cfg.analysis.period_e_max, well.v_max()) {
        (Some(e), _) => e,
        (None, Some(v_max)) => v_max,
        (None, None) => {
            return Err(Error::config(
                "`period` on a power law needs analysis.period_energies or analysis.period_e_max",
            ))
        }
    };
    let n = cfg.analysis.period_samples;
    Ok((1..=n)
        .map(|i| well.v_min + (top - well.v_min) * i as f64 / (n + 1) as f64)
        .collect())
}

fn period(cfg: &RunConfig, prov: Provenance) -> Result<Vec<ResultTable>> {
    let spec = cfg.potential;
    let energies = period_energies(cfg)?;
    let quad = cfg.analysis.wkb.quad_points;
    let mass = cfg.solver.mass;
    let rows = energies
        .par_iter()
        .map(|&e| {
            let run = || -> Result<Vec<f64>> {
                let t = classical_period_with(&spec, e, mass, quad)?;
                let s = action_integral_with(&spec, e, mass, quad)?;
                Ok(vec![e, t.period, t.q1, t.q2, s])
            };
            run().map_err(|err| err.annotate(format!("energy = {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut table = ResultTable::new(
        "period",
        &[
            ("energy", "energy"),
            ("period", "time"),
            ("q1", "length"),
            ("q2", "length"),
            ("action", "action"),
        ],
        prov,
    );
    for row in rows {
        table.push(row)?;
    }
    Ok(vec![table])
}
