use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::active_space::Species;
use crate::bcs::BcsSettings;
use crate::error::{Error, Result};
use crate::nilsson::MAX_SHELL;
use crate::routhian::{DEFAULT_G, DEFAULT_LAMBDA_P};
use crate::vqe::OptimizerSettings;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Isotope {
    pub name: String,
    pub protons: usize,
    pub neutrons: usize,
}

impl Isotope {
    pub fn new(name: &str, protons: usize, neutrons: usize) -> Self {
        Isotope { name: name.to_string(), protons, neutrons }
    }

    pub fn mass_number(&self) -> u32 {
        (self.protons + self.neutrons) as u32
    }

    pub fn particles(&self, species: Species) -> usize {
        match species {
            Species::Proton => self.protons,
            Species::Neutron => self.neutrons,
        }
    }
}

/// Evenly spaced `count` points on `[min, max]`, endpoints included.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Mesh {
    pub count: usize,
    pub min: f64,
    pub max: f64,
}

impl Mesh {
    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        let span = self.max - self.min;
        (0..self.count).map(|i| self.min + span * i as f64 / (self.count - 1) as f64).collect()
    }

    fn validate(&self, what: &str) -> Result<()> {
        if self.count == 0 || !self.min.is_finite() || !self.max.is_finite() || (self.count > 1 && self.max <= self.min) {
            return Err(Error::Config(format!("{what} mesh needs count >= 1 and max > min")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PairingConfig {
    /// MeV; ignored when `calibrate` is set.
    pub g: f64,
    pub calibrate: bool,
    /// MeV
    pub reference_gap: f64,
    /// Name of the isotope whose windows fix G; defaults to the last one listed.
    pub calibration_isotope: Option<String>,
    pub calibration_delta: f64,
}

impl Default for PairingConfig {
    fn default() -> Self {
        PairingConfig { g: DEFAULT_G, calibrate: false, reference_gap: 1.878, calibration_isotope: None, calibration_delta: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Methods {
    pub vqe: bool,
    pub bcs: bool,
    /// Exact diagonalization where the fixed-N basis allows it.
    pub oracle: bool,
}

impl Default for Methods {
    fn default() -> Self {
        Methods { vqe: true, bcs: true, oracle: false }
    }
}

/// Multistart robustness point (one species, one deformation and frequency).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MultistartConfig {
    pub enabled: bool,
    pub isotope: Option<String>,
    pub species: Species,
    pub m: usize,
    pub delta: f64,
    pub omega: f64,
}

impl Default for MultistartConfig {
    fn default() -> Self {
        MultistartConfig { enabled: true, isotope: None, species: Species::Proton, m: 6, delta: -0.25, omega: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensitivityConfig {
    pub isotope: Option<String>,
    pub m_values: Vec<usize>,
    pub delta: f64,
    pub omegas: Vec<f64>,
}

impl Default for SensitivityConfig {
    fn default() -> Self {
        SensitivityConfig { isotope: None, m_values: vec![6, 8], delta: -0.25, omegas: vec![0.0, 1.0] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanConfig {
    #[serde(rename = "isotope")]
    pub isotopes: Vec<Isotope>,
    pub species: Vec<Species>,
    /// Active window size (levels).
    pub m: usize,
    /// Oscillator shell cutoff of the Nilsson basis.
    pub n_max: u32,
    pub delta_mesh: Mesh,
    /// MeV
    pub omega_mesh: Mesh,
    pub lambda_p: f64,
    pub jx_threshold: f64,
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
    pub pairing: PairingConfig,
    pub methods: Methods,
    pub optimizer: OptimizerSettings,
    pub bcs: BcsSettings,
    pub multistart: MultistartConfig,
    pub sensitivity: SensitivityConfig,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            isotopes: vec![Isotope::new("80Zr", 40, 40), Isotope::new("82Zr", 40, 42), Isotope::new("84Zr", 40, 44)],
            species: vec![Species::Proton, Species::Neutron],
            m: 8,
            n_max: MAX_SHELL,
            delta_mesh: Mesh { count: 25, min: -0.5, max: 0.5 },
            omega_mesh: Mesh { count: 10, min: 0.0, max: 1.0 },
            lambda_p: DEFAULT_LAMBDA_P,
            jx_threshold: crate::ansatz::DEFAULT_JX_THRESHOLD,
            seed: 2024,
            output_dir: None,
            pairing: PairingConfig::default(),
            methods: Methods::default(),
            optimizer: OptimizerSettings::default(),
            bcs: BcsSettings::default(),
            multistart: MultistartConfig::default(),
            sensitivity: SensitivityConfig::default(),
        }
    }
}

impl ScanConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: ScanConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.isotopes.is_empty() || self.species.is_empty() {
            return Err(Error::Config("at least one isotope and one species required".into()));
        }
        for iso in &self.isotopes {
            if iso.protons == 0 || iso.neutrons == 0 || iso.protons % 2 == 1 || iso.neutrons % 2 == 1 {
                return Err(Error::Config(format!("isotope {} needs even, positive Z and N", iso.name)));
            }
        }
        let mut names: Vec<&str> = self.isotopes.iter().map(|i| i.name.as_str()).collect();
        names.sort();
        names.dedup();
        if names.len() != self.isotopes.len() {
            return Err(Error::Config("isotope names must be unique".into()));
        }
        if self.m < 2 || 2 * self.m > crate::statevector::MAX_QUBITS {
            return Err(Error::Config(format!("window size m = {} outside 2..=10", self.m)));
        }
        if self.n_max > MAX_SHELL {
            return Err(Error::Config(format!("n_max = {} exceeds {MAX_SHELL}", self.n_max)));
        }
        self.delta_mesh.validate("delta")?;
        self.omega_mesh.validate("omega")?;
        if self.delta_mesh.min < -0.5 || self.delta_mesh.max > 0.5 {
            return Err(Error::Config("delta mesh must lie in [-0.5, 0.5]".into()));
        }
        if self.omega_mesh.min < 0.0 {
            return Err(Error::Config("omega mesh must be non-negative".into()));
        }
        if !(self.lambda_p >= 0.0) || !(self.pairing.g >= 0.0) || !(self.pairing.reference_gap > 0.0) {
            return Err(Error::Config("lambda_p and G must be non-negative, reference_gap positive".into()));
        }
        for name in [&self.pairing.calibration_isotope, &self.multistart.isotope, &self.sensitivity.isotope]
            .into_iter()
            .flatten()
        {
            self.isotope(name)?;
        }
        Ok(())
    }

    pub fn isotope(&self, name: &str) -> Result<&Isotope> {
        self.isotopes
            .iter()
            .find(|i| i.name == name)
            .ok_or_else(|| Error::Config(format!("unknown isotope '{name}'")))
    }

    /// Named isotope, or the given fallback index when unnamed.
    pub(crate) fn isotope_or(&self, name: &Option<String>, fallback_last: bool) -> Result<&Isotope> {
        match name {
            Some(n) => self.isotope(n),
            None if fallback_last => Ok(self.isotopes.last().unwrap()),
            None => Ok(&self.isotopes[0]),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_meshes() {
        let c = ScanConfig::default();
        let d = c.delta_mesh.points();
        assert_eq!(d.len(), 25);
        assert_eq!(d[0], -0.5);
        assert_eq!(d[24], 0.5);
        assert!(d.contains(&-0.25) && d.contains(&0.0) && d.contains(&0.25));
        let w = c.omega_mesh.points();
        assert_eq!(w.len(), 10);
        assert!((w[8] - 0.8889).abs() < 1e-4);
        assert_eq!(w[9], 1.0);
        assert_eq!(c.pairing.g, 0.5202);
        assert_eq!(c.lambda_p, 5.0);
    }

    #[test]
    fn toml_round_trip() {
        let c = ScanConfig::default();
        let back = ScanConfig::from_toml(&c.to_toml()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(ScanConfig::from_toml("m = 4\nbogus = 1\n").is_err());
        assert!(ScanConfig::from_toml("[delta_mesh]\ncount = 3\nmin = -0.1\nmax = 0.1\nstep = 2\n").is_err());
    }

    #[test]
    fn partial_document_uses_defaults() {
        let text = "m = 2\nspecies = [\"neutron\"]\n[[isotope]]\nname = \"X\"\nprotons = 8\nneutrons = 8\n[omega_mesh]\ncount = 2\nmin = 0.0\nmax = 0.5\n";
        let c = ScanConfig::from_toml(text).unwrap();
        assert_eq!(c.m, 2);
        assert_eq!(c.isotopes.len(), 1);
        assert_eq!(c.species, vec![Species::Neutron]);
        assert_eq!(c.delta_mesh.count, 25);
    }

    #[test]
    fn invalid_values_rejected() {
        assert!(ScanConfig::from_toml("m = 1\n").is_err());
        assert!(ScanConfig::from_toml("[delta_mesh]\ncount = 3\nmin = -0.7\nmax = 0.1\n").is_err());
        assert!(ScanConfig::from_toml("[[isotope]]\nname = \"odd\"\nprotons = 9\nneutrons = 8\n").is_err());
    }
}
