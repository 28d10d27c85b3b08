//! Scenario configuration (TOML), validation and the built-in presets.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::grid::{CapSpec, Grid1D, InteractionSpec, PotentialSpec, PulseSpec};
use crate::spectra::AccumulationScope;
use crate::twobody::{fraction_in_cap, RelaxSpec, WavePacketSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioKind {
    /// Projectile packet on a bound target; requires `[packet]`.
    Scattering,
    /// Relaxed two-body ground state driven by a pulse; requires `[pulse]`.
    Photoionization,
    /// Packet if `[packet]` is present, relaxed ground state otherwise.
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub half_extent: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapConfig {
    pub onset: f64,
    /// Absorber strengths to run; a sweep visits every entry.
    pub gamma0: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PropagationConfig {
    pub tau: f64,
    pub t_max: f64,
    /// The two-body propagation stops once `|Ψ|²` falls below this.
    pub norm_stop: f64,
    /// The one-body propagation stops once `h tr ρ` falls below this fraction
    /// of its peak (after the two-body propagation has stopped).
    pub rho_stop: f64,
    pub track_rho1: bool,
    /// Accumulate `Φ` every `stride` steps with weight `stride·τ`.
    pub stride: usize,
    /// Diagnostics cadence in steps.
    pub sample_every: usize,
    pub scope: AccumulationScope,
}

impl Default for PropagationConfig {
    fn default() -> Self {
        PropagationConfig {
            tau: 0.05,
            t_max: 1000.0,
            norm_stop: 0.01,
            rho_stop: 1e-3,
            track_rho1: true,
            stride: 1,
            sample_every: 10,
            scope: AccumulationScope::CapColumns,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    pub grid: GridConfig,
    pub potential: PotentialSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interaction: Option<InteractionSpec>,
    pub cap: CapConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub packet: Option<WavePacketSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pulse: Option<PulseSpec>,
    #[serde(default)]
    pub propagation: PropagationConfig,
    #[serde(default)]
    pub relax: RelaxSpec,
}

pub const PRESETS: [&str; 4] = ["scattering", "scattering-double", "photo03", "photo10"];

/// `2^-k` for `k = 0..count`.
pub fn power_ladder(count: u32) -> Vec<f64> {
    (0..count).map(|k| 0.5f64.powi(k as i32)).collect()
}

impl ScenarioConfig {
    /// Elastic/inelastic scattering of a projectile with mean momentum 2 on a
    /// particle bound in a Gaussian well.
    pub fn scattering() -> Self {
        ScenarioConfig {
            kind: ScenarioKind::Scattering,
            grid: GridConfig { half_extent: 64.0, points: 512 },
            potential: PotentialSpec::Gaussian { strength: 4.0, width: 3.0 / (2.0 * 2f64.sqrt()) },
            interaction: Some(InteractionSpec { strength: 1.0, smoothness: 0.1925 }),
            cap: CapConfig { onset: 35.0, gamma0: power_ladder(7) },
            packet: Some(WavePacketSpec { center: -20.0, momentum: 2.0, momentum_width: 0.1 }),
            pulse: None,
            propagation: PropagationConfig { track_rho1: false, norm_stop: 1e-4, ..Default::default() },
            relax: RelaxSpec::default(),
        }
    }

    /// Faster projectile (momentum 3.5, width 0.2) for which both particles
    /// can be liberated.
    pub fn scattering_double() -> Self {
        let mut cfg = Self::scattering();
        cfg.packet = Some(WavePacketSpec { center: -20.0, momentum: 3.5, momentum_width: 0.2 });
        cfg.propagation.track_rho1 = true;
        cfg
    }

    /// Two-electron model atom in a seven-cycle pulse with `ω = 0.3`.
    pub fn photo03() -> Self {
        ScenarioConfig {
            kind: ScenarioKind::Photoionization,
            grid: GridConfig { half_extent: 80.0, points: 400 },
            potential: PotentialSpec::SoftCoulomb { strength: 0.5, width: 0.5 },
            interaction: Some(InteractionSpec { strength: 0.5, smoothness: 0.5 }),
            cap: CapConfig { onset: 50.0, gamma0: power_ladder(7) },
            packet: None,
            pulse: Some(PulseSpec { field: 0.1, omega: 0.3, cycles: 7 }),
            propagation: PropagationConfig { t_max: 600.0, ..Default::default() },
            relax: RelaxSpec::default(),
        }
    }

    /// As [`photo03`](Self::photo03) with `ω = 1` and the absorber at 20.
    pub fn photo10() -> Self {
        let mut cfg = Self::photo03();
        cfg.grid = GridConfig { half_extent: 44.8, points: 224 };
        cfg.cap.onset = 20.0;
        cfg.pulse = Some(PulseSpec { field: 0.1, omega: 1.0, cycles: 7 });
        cfg.propagation.t_max = 300.0;
        cfg
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "scattering" => Ok(Self::scattering()),
            "scattering-double" => Ok(Self::scattering_double()),
            "photo03" => Ok(Self::photo03()),
            "photo10" => Ok(Self::photo10()),
            other => Err(Error::Config(vec![format!("unknown preset `{other}` (available: {})", PRESETS.join(", "))])),
        }
    }

    pub fn from_toml(text: &str, path: &Path) -> Result<Self> {
        let cfg: ScenarioConfig =
            toml::from_str(text).map_err(|e| Error::Parse { path: path.to_path_buf(), message: e.to_string() })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text, path)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario configs always serialize")
    }

    /// SHA-256 of the canonical JSON serialization.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("scenario configs always serialize");
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    pub fn build_grid(&self) -> Result<Grid1D> {
        Grid1D::new(self.grid.half_extent, self.grid.points)
    }

    pub fn cap_spec(&self, gamma0: f64) -> CapSpec {
        CapSpec { gamma0, onset: self.cap.onset }
    }

    /// Whether the initial state is a projectile packet (otherwise it is the
    /// relaxed two-body ground state).
    pub fn uses_packet(&self) -> bool {
        match self.kind {
            ScenarioKind::Scattering => true,
            ScenarioKind::Photoionization => false,
            ScenarioKind::Custom => self.packet.is_some(),
        }
    }

    /// Check everything; every problem found is reported.
    pub fn validate(&self) -> Result<()> {
        let mut errors = Vec::new();
        let mut check = |r: Result<()>| {
            if let Err(e) = r {
                errors.push(e.to_string());
            }
        };
        let grid = Grid1D::new(self.grid.half_extent, self.grid.points);
        if let Err(e) = &grid {
            check(Err(Error::Grid(e.to_string())));
        }
        check(self.potential.validate());
        if let Some(w) = &self.interaction {
            check(w.validate());
        }
        if self.cap.gamma0.is_empty() {
            check(Err(Error::param("cap.gamma0", "needs at least one value")));
        }
        for &g in &self.cap.gamma0 {
            if !(g >= 0.0) || !g.is_finite() {
                check(Err(Error::param("cap.gamma0", format!("every value must be finite and >= 0, got {g}"))));
            }
        }
        if !(self.cap.onset > 0.0) || self.cap.onset >= self.grid.half_extent {
            check(Err(Error::param(
                "cap.onset",
                format!("must lie in (0, L = {}), got {}", self.grid.half_extent, self.cap.onset),
            )));
        }
        let p = &self.propagation;
        if !(p.tau > 0.0) || !p.tau.is_finite() {
            check(Err(Error::param("propagation.tau", format!("must be positive, got {}", p.tau))));
        }
        if !(p.t_max >= p.tau) || !p.t_max.is_finite() {
            check(Err(Error::param("propagation.t_max", format!("must be finite and at least tau, got {}", p.t_max))));
        }
        if !(p.norm_stop > 0.0 && p.norm_stop < 1.0) {
            check(Err(Error::param("propagation.norm_stop", "must lie in (0, 1)")));
        }
        if !(p.rho_stop > 0.0 && p.rho_stop < 1.0) {
            check(Err(Error::param("propagation.rho_stop", "must lie in (0, 1)")));
        }
        if p.stride == 0 || p.sample_every == 0 {
            check(Err(Error::param("propagation", "stride and sample_every must be at least 1")));
        }
        check(self.relax.validate());
        match self.kind {
            ScenarioKind::Scattering if self.packet.is_none() => {
                check(Err(Error::param("packet", "required for a scattering scenario")))
            }
            ScenarioKind::Photoionization if self.pulse.is_none() => {
                check(Err(Error::param("pulse", "required for a photoionization scenario")))
            }
            _ => {}
        }
        if let Some(pulse) = &self.pulse {
            check(pulse.validate());
        }
        if let Some(packet) = &self.packet {
            check(packet.validate());
            if let (Ok(g), Ok(())) = (&grid, packet.validate()) {
                if self.uses_packet() && self.cap.onset > 0.0 {
                    let fraction = fraction_in_cap(g, self.cap.onset, &packet.sample(g));
                    if fraction > 0.01 {
                        check(Err(Error::PacketInCap { fraction }));
                    }
                }
            }
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errors))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate_and_round_trip() {
        for name in PRESETS {
            let cfg = ScenarioConfig::preset(name).unwrap();
            cfg.validate().unwrap();
            let back = ScenarioConfig::from_toml(&cfg.to_toml(), Path::new("preset.toml")).unwrap();
            assert_eq!(back, cfg);
            assert_eq!(back.hash(), cfg.hash());
        }
        assert!(ScenarioConfig::preset("nope").is_err());
    }

    #[test]
    fn ladder_is_powers_of_two() {
        assert_eq!(power_ladder(4), vec![1.0, 0.5, 0.25, 0.125]);
    }

    #[test]
    fn all_problems_are_listed() {
        let mut cfg = ScenarioConfig::scattering();
        cfg.grid.points = 481;
        cfg.cap.gamma0 = vec![1.0, -0.5];
        cfg.propagation.tau = 0.0;
        cfg.packet = None;
        match cfg.validate() {
            Err(Error::Config(list)) => assert_eq!(list.len(), 4, "{list:?}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn packet_in_absorber_is_rejected() {
        let mut cfg = ScenarioConfig::scattering();
        cfg.packet.as_mut().unwrap().center = -34.0;
        assert!(matches!(cfg.validate(), Err(Error::Config(list)) if list[0].contains("absorber")));
    }

    #[test]
    fn hash_tracks_content() {
        let a = ScenarioConfig::photo03();
        let mut b = a.clone();
        b.propagation.tau = 0.025;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }
}
