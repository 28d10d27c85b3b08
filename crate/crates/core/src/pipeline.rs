//! Scenario orchestration: initial state, synchronized propagation of `Ψ` and
//! `ρ`, accumulation, and spectra.

use std::path::Path;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::eigenbasis::{continuum_weights, ContinuumWeights, EigenBasis};
use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::hamiltonian::Hamiltonian;
use crate::lindblad::{DensityPropagator, OneBodyDensity, SourceBuilder, TraceLedger};
use crate::matrix::CMat;
use crate::scenario::ScenarioConfig;
use crate::spectra::{duration, spectrum_first, spectrum_second, ExtentTracker, SpectralAccumulator, Spectrum};
use crate::twobody::{init_scattering_state, relax_two_body, SplitOperator, TwoBodyState};

/// Threshold shared by the extent and duration diagnostics.
pub const DIAGNOSTIC_THRESHOLD: f64 = 0.01;
/// Squared norms above `1 + BLOWUP_MARGIN` abort a run.
pub const BLOWUP_MARGIN: f64 = 1e-6;

/// Everything that does not depend on the absorber strength.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub grid: Grid1D,
    pub basis: EigenBasis,
    pub weights: ContinuumWeights,
    /// Hamiltonian without absorber.
    pub hamiltonian: Hamiltonian,
    pub initial: TwoBodyState,
    /// Energy of the relaxed two-body ground state, when that is the start.
    pub ground_energy: Option<f64>,
}

fn basis_cache_key(cfg: &ScenarioConfig) -> String {
    let key = serde_json::to_string(&(&cfg.grid, &cfg.potential)).expect("serializable");
    hex::encode(&Sha256::digest(key.as_bytes())[..16])
}

/// Build the eigenbasis, its weights and the initial state. With a cache
/// directory the eigenbasis is read from or written to it.
pub fn prepare(cfg: &ScenarioConfig, cache_dir: Option<&Path>) -> Result<Prepared> {
    cfg.validate()?;
    let grid = cfg.build_grid()?;
    let basis = match cache_dir {
        Some(dir) => {
            let path = dir.join(format!("basis-{}.bin", basis_cache_key(cfg)));
            match EigenBasis::load(&path, &grid) {
                Ok(b) => b,
                Err(_) => {
                    let b = EigenBasis::from_potential(&grid, &cfg.potential)?;
                    b.save(&path)?;
                    b
                }
            }
        }
        None => EigenBasis::from_potential(&grid, &cfg.potential)?,
    };
    let weights = continuum_weights(&basis)?;
    let mut hamiltonian = Hamiltonian::new(&grid, &cfg.potential)?;
    if let Some(w) = &cfg.interaction {
        hamiltonian = hamiltonian.with_interaction(w)?;
    }
    if let Some(p) = cfg.pulse {
        hamiltonian = hamiltonian.with_pulse(p)?;
    }
    let (initial, ground_energy) = if cfg.uses_packet() {
        let packet = cfg.packet.as_ref().expect("validated");
        (init_scattering_state(&grid, &basis, &cfg.cap_spec(0.0), packet)?, None)
    } else {
        let (state, e) = relax_two_body(&hamiltonian, &cfg.relax)?;
        (state, Some(e))
    };
    Ok(Prepared { grid, basis, weights, hamiltonian, initial, ground_energy })
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunScalars {
    /// `∫ dP2/dε dε`
    pub p2: f64,
    /// `∫ dP1/dε dε`
    pub p1: f64,
    pub p0_final: f64,
    pub norm2_final: f64,
    pub trace_rho1_final: f64,
    /// Trace-ledger residual; only defined when `ρ` is propagated.
    pub residual_final: Option<f64>,
    pub max_abs_residual: Option<f64>,
    /// Negative content of `dP2/dε`.
    pub neg_content: f64,
    pub neg_content_p1: f64,
    pub extent: f64,
    pub duration: f64,
    /// False when `|Ψ|²` never fell below 1 % (the duration is then `t_max`).
    pub duration_reached: bool,
    /// Time at which the two-body propagation stopped.
    pub t_psi_end: f64,
    /// Time at which the whole run stopped.
    pub t_end: f64,
    pub steps: usize,
    pub max_antihermiticity: f64,
    pub ground_energy: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub norm2_psi: f64,
    pub trace_rho1: f64,
    pub p0: f64,
    pub residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub config: ScenarioConfig,
    pub gamma0: f64,
    pub scalars: RunScalars,
    pub first: Spectrum,
    pub second: Spectrum,
    pub samples: Vec<Sample>,
    /// Not persisted, so that outputs stay reproducible byte for byte.
    pub wall_time: Duration,
}

/// Observer hook called at every diagnostic sample; used by tests to inspect
/// intermediate states.
pub trait RunObserver {
    fn sample(&mut self, _psi: &TwoBodyState, _rho: Option<&OneBodyDensity>, _ledger: &TraceLedger) {}
}

impl RunObserver for () {}

pub fn run_scenario(cfg: &ScenarioConfig, gamma0: f64) -> Result<RunRecord> {
    let prepared = prepare(cfg, None)?;
    run_prepared(cfg, &prepared, gamma0, &mut ())
}

pub fn run_prepared(
    cfg: &ScenarioConfig,
    prep: &Prepared,
    gamma0: f64,
    observer: &mut dyn RunObserver,
) -> Result<RunRecord> {
    let started = Instant::now();
    let p = &cfg.propagation;
    let tau = p.tau;
    let h = prep.grid.h();
    let n = prep.grid.len();
    let ham = prep.hamiltonian.clone().with_cap(&cfg.cap_spec(gamma0))?;
    let cap = ham.cap().to_vec();

    let mut psi = prep.initial.clone();
    psi.set_t(0.0);
    let mut split = SplitOperator::real_time(&ham, tau)?;
    let mut acc = SpectralAccumulator::new(&cap, h, p.scope);
    let mut tracker = ExtentTracker::new(n, h);
    tracker.record(psi.psi());

    struct Density {
        rho: OneBodyDensity,
        prop: DensityPropagator,
        source: SourceBuilder,
        s_now: CMat,
        s_next: CMat,
        peak: f64,
    }
    let mut density = if p.track_rho1 {
        let mut source = SourceBuilder::new(&cap, n);
        let mut s_now = CMat::zeros(n, n);
        source.compute(psi.psi(), h, &mut s_now);
        Some(Density {
            rho: OneBodyDensity::zeros(n, h),
            prop: DensityPropagator::new(&ham, tau)?,
            source,
            s_now,
            s_next: CMat::zeros(n, n),
            peak: 0.0,
        })
    } else {
        None
    };

    let mut ledger = TraceLedger::new(psi.norm2());
    let tracked = density.is_some();
    let sample_of = |l: &TraceLedger| Sample {
        t: l.t,
        norm2_psi: l.norm2_psi,
        trace_rho1: l.trace_rho1,
        p0: l.p0,
        residual: tracked.then(|| l.residual()),
    };
    let mut samples = vec![sample_of(&ledger)];
    let mut norm_series = vec![(0.0, ledger.norm2_psi)];
    let mut max_abs_residual = 0.0f64;
    let mut max_antiherm = 0.0f64;
    let mut psi_alive = true;
    let mut t_psi_end = p.t_max;
    let mut step = 0usize;
    let max_steps = (p.t_max / tau).round() as usize;

    while step < max_steps {
        step += 1;
        let t_new = step as f64 * tau;
        if psi_alive {
            split.step(&ham, &mut psi);
            psi.set_t(t_new);
            let n2 = psi.norm2();
            if !(n2 <= 1.0 + BLOWUP_MARGIN) {
                return Err(Error::BlowUp { t: t_new, norm2: n2 });
            }
            if step % p.stride == 0 {
                acc.accumulate_psi(psi.psi(), p.stride as f64 * tau);
            }
        }
        if let Some(d) = density.as_mut() {
            if psi_alive {
                d.source.compute(psi.psi(), h, &mut d.s_next);
                d.prop.step(&ham, &mut d.rho, Some((&d.s_now, &d.s_next)));
                std::mem::swap(&mut d.s_now, &mut d.s_next);
            } else {
                d.prop.step(&ham, &mut d.rho, None);
            }
            acc.accumulate_rho(d.rho.rho(), tau);
            ledger.update_p0(&d.rho, &cap, tau);
            d.peak = d.peak.max(ledger.trace_rho1);
        }
        ledger.t = t_new;
        if psi_alive {
            ledger.norm2_psi = psi.norm2();
        }
        max_abs_residual = max_abs_residual.max(ledger.residual().abs());

        let sample_now = step % p.sample_every == 0;
        if sample_now {
            samples.push(sample_of(&ledger));
            if psi_alive {
                norm_series.push((t_new, ledger.norm2_psi));
                tracker.record(psi.psi());
            }
            if let Some(d) = density.as_ref() {
                max_antiherm = max_antiherm.max(d.rho.rho().max_antihermiticity());
            }
            observer.sample(&psi, density.as_ref().map(|d| &d.rho), &ledger);
        }

        if psi_alive && ledger.norm2_psi < p.norm_stop {
            psi_alive = false;
            t_psi_end = t_new;
            if !sample_now {
                norm_series.push((t_new, ledger.norm2_psi));
                tracker.record(psi.psi());
            }
        }
        let done = match density.as_ref() {
            None => !psi_alive,
            Some(d) => !psi_alive && ledger.trace_rho1 < p.rho_stop * d.peak,
        };
        if done {
            break;
        }
    }
    let t_end = step as f64 * tau;
    if samples.last().map(|s| s.t) != Some(t_end) {
        samples.push(sample_of(&ledger));
    }

    let first = spectrum_first(&acc, &prep.basis, &prep.weights)?;
    let second = if density.is_some() {
        spectrum_second(&acc, &prep.basis, &prep.weights)?
    } else {
        Spectrum::zeros(first.energies.clone())
    };
    let reached = duration(&norm_series, DIAGNOSTIC_THRESHOLD);
    let scalars = RunScalars {
        p2: first.integral(),
        p1: second.integral(),
        p0_final: ledger.p0,
        norm2_final: ledger.norm2_psi,
        trace_rho1_final: ledger.trace_rho1,
        residual_final: density.as_ref().map(|_| ledger.residual()),
        max_abs_residual: density.as_ref().map(|_| max_abs_residual),
        neg_content: first.negative_content(),
        neg_content_p1: second.negative_content(),
        extent: tracker.extent(DIAGNOSTIC_THRESHOLD),
        duration: reached.unwrap_or(p.t_max),
        duration_reached: reached.is_some(),
        t_psi_end: if psi_alive { t_end } else { t_psi_end },
        t_end,
        steps: step,
        max_antihermiticity: max_antiherm,
        ground_energy: prep.ground_energy,
    };
    Ok(RunRecord { config: cfg.clone(), gamma0, scalars, first, second, samples, wall_time: started.elapsed() })
}

/// Largest ladder value from which every weaker absorber gives an L¹ distance
/// to the weakest one below `tolerance` times the weakest one's total.
pub fn self_convergence_gamma0(gammas: &[f64], spectra: &[&Spectrum], tolerance: f64) -> Option<f64> {
    let mut order: Vec<usize> = (0..gammas.len()).collect();
    order.sort_by(|&a, &b| gammas[a].total_cmp(&gammas[b]));
    let reference = spectra[*order.first()?];
    let total = reference.integral().abs();
    let mut converged = None;
    for &i in &order {
        if spectra[i].l1_distance(reference) < tolerance * total {
            converged = Some(gammas[i]);
        } else {
            break;
        }
    }
    converged
}

#[derive(Debug)]
pub struct SweepResult {
    pub gamma0: Vec<f64>,
    pub runs: Vec<std::result::Result<RunRecord, String>>,
}

impl SweepResult {
    pub fn successes(&self) -> impl Iterator<Item = &RunRecord> {
        self.runs.iter().filter_map(|r| r.as_ref().ok())
    }

    /// The successful run with the weakest absorber.
    pub fn reference(&self) -> Option<&RunRecord> {
        self.successes().min_by(|a, b| a.gamma0.total_cmp(&b.gamma0))
    }
}

/// Run every `γ0` of the ladder against one shared preparation. Failed runs
/// are recorded and the sweep continues.
pub fn sweep_gamma(cfg: &ScenarioConfig, cache_dir: Option<&Path>) -> Result<SweepResult> {
    let prepared = prepare(cfg, cache_dir)?;
    Ok(sweep_prepared(cfg, &prepared))
}

pub fn sweep_prepared(cfg: &ScenarioConfig, prepared: &Prepared) -> SweepResult {
    let gamma0 = cfg.cap.gamma0.clone();
    let runs = gamma0.par_iter().map(|&g| run_prepared(cfg, prepared, g, &mut ()).map_err(|e| e.to_string())).collect();
    SweepResult { gamma0, runs }
}
