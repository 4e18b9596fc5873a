use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{Isotope, MultistartConfig};
use super::ScanRecord;
use crate::active_space::Species;
use crate::error::Result;
use crate::oracle::binomial;
use crate::vqe::MultistartReport;

/// Largest final-step energy change quoted for the reference runs, MeV.
pub const REFERENCE_LAST_STEP_MEV: f64 = 1.6e-12;

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records(path: &Path) -> Result<Vec<ScanRecord>> {
    let mut rd = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for row in rd.deserialize() {
        out.push(row?);
    }
    Ok(out)
}

fn key(x: f64) -> i64 {
    (x * 1e9).round() as i64
}

type Lookup<'a> = BTreeMap<(&'a str, &'a str, &'a str, i64, i64), &'a ScanRecord>;

fn index(records: &[ScanRecord]) -> Lookup<'_> {
    records
        .iter()
        .map(|r| ((r.method.as_str(), r.isotope.as_str(), r.species.as_str(), key(r.delta), key(r.omega)), r))
        .collect()
}

/// Total rows flagged as the deformation minimum, ascending in omega.
fn minima<'a>(records: &'a [ScanRecord], method: &str, isotope: &str) -> Vec<&'a ScanRecord> {
    let mut v: Vec<&ScanRecord> = records
        .iter()
        .filter(|r| r.is_minimum && r.species == "total" && r.method == method && r.isotope == isotope)
        .collect();
    v.sort_by(|a, b| a.omega.total_cmp(&b.omega));
    v
}

fn species_at<'a>(idx: &Lookup<'a>, t: &ScanRecord, species: Species) -> Option<&'a ScanRecord> {
    idx.get(&(t.method.as_str(), t.isotope.as_str(), species.as_str(), key(t.delta), key(t.omega))).copied()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathRow {
    pub isotope: String,
    pub method: String,
    #[serde(rename = "omega_MeV")]
    pub omega: f64,
    pub delta_star: f64,
    #[serde(rename = "routhian_total_MeV")]
    pub routhian_total: Option<f64>,
    #[serde(rename = "jx_proton_hbar")]
    pub jx_proton: Option<f64>,
    #[serde(rename = "jx_neutron_hbar")]
    pub jx_neutron: Option<f64>,
    #[serde(rename = "jx_total_hbar")]
    pub jx_total: Option<f64>,
    #[serde(rename = "j2_total_hbar2_per_MeV")]
    pub j2_total: Option<f64>,
    pub one_sided: Option<bool>,
}

/// `delta*(omega)` with alignment and `J2` per method and isotope.
pub fn derive_paths(records: &[ScanRecord], isotopes: &[String]) -> Vec<PathRow> {
    let idx = index(records);
    let mut out = Vec::new();
    for iso in isotopes {
        for method in super::METHOD_ORDER {
            for t in minima(records, method, iso) {
                out.push(PathRow {
                    isotope: iso.clone(),
                    method: method.into(),
                    omega: t.omega,
                    delta_star: t.delta,
                    routhian_total: t.routhian,
                    jx_proton: species_at(&idx, t, Species::Proton).and_then(|r| r.jx),
                    jx_neutron: species_at(&idx, t, Species::Neutron).and_then(|r| r.jx),
                    jx_total: t.jx,
                    j2_total: t.j2,
                    one_sided: t.one_sided,
                });
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairingRow {
    pub isotope: String,
    #[serde(rename = "omega_MeV")]
    pub omega: f64,
    pub vqe_delta_star: Option<f64>,
    #[serde(rename = "delta_coh_proton_MeV")]
    pub delta_coh_proton: Option<f64>,
    #[serde(rename = "delta_coh_neutron_MeV")]
    pub delta_coh_neutron: Option<f64>,
    #[serde(rename = "delta_kappa_proton_MeV")]
    pub delta_kappa_proton: Option<f64>,
    #[serde(rename = "delta_kappa_neutron_MeV")]
    pub delta_kappa_neutron: Option<f64>,
    pub bcs_delta_star: Option<f64>,
    #[serde(rename = "bcs_gap_proton_MeV")]
    pub bcs_gap_proton: Option<f64>,
    #[serde(rename = "bcs_gap_neutron_MeV")]
    pub bcs_gap_neutron: Option<f64>,
    pub bcs_branch_proton: Option<String>,
    pub bcs_branch_neutron: Option<String>,
}

fn omegas_of(records: &[ScanRecord], isotope: &str) -> Vec<f64> {
    let mut w: Vec<f64> = records.iter().filter(|r| r.isotope == isotope).map(|r| r.omega).collect();
    w.sort_by(f64::total_cmp);
    w.dedup_by(|a, b| key(*a) == key(*b));
    w
}

fn minimum_at<'a>(records: &'a [ScanRecord], method: &str, isotope: &str, omega: f64) -> Option<&'a ScanRecord> {
    records
        .iter()
        .find(|r| r.is_minimum && r.species == "total" && r.method == method && r.isotope == isotope && key(r.omega) == key(omega))
}

/// Coherent pairing along the VQE path and the BCS gap along the BCS path.
pub fn derive_pairing(records: &[ScanRecord], isotopes: &[String]) -> Vec<PairingRow> {
    let idx = index(records);
    let mut out = Vec::new();
    for iso in isotopes {
        for w in omegas_of(records, iso) {
            let v = minimum_at(records, "vqe", iso, w);
            let b = minimum_at(records, "bcs", iso, w);
            let vs = |s| v.and_then(|t| species_at(&idx, t, s));
            let bs = |s| b.and_then(|t| species_at(&idx, t, s));
            if v.is_none() && b.is_none() {
                continue;
            }
            out.push(PairingRow {
                isotope: iso.clone(),
                omega: w,
                vqe_delta_star: v.map(|t| t.delta),
                delta_coh_proton: vs(Species::Proton).and_then(|r| r.delta_coh),
                delta_coh_neutron: vs(Species::Neutron).and_then(|r| r.delta_coh),
                delta_kappa_proton: vs(Species::Proton).and_then(|r| r.delta_kappa),
                delta_kappa_neutron: vs(Species::Neutron).and_then(|r| r.delta_kappa),
                bcs_delta_star: b.map(|t| t.delta),
                bcs_gap_proton: bs(Species::Proton).and_then(|r| r.delta_kappa),
                bcs_gap_neutron: bs(Species::Neutron).and_then(|r| r.delta_kappa),
                bcs_branch_proton: bs(Species::Proton).and_then(|r| r.branch.clone()),
                bcs_branch_neutron: bs(Species::Neutron).and_then(|r| r.branch.clone()),
            });
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub isotope: String,
    #[serde(rename = "omega_MeV")]
    pub omega: f64,
    pub delta_star: Option<f64>,
    #[serde(rename = "jx_proton_hbar")]
    pub jx_proton: Option<f64>,
    #[serde(rename = "jx_neutron_hbar")]
    pub jx_neutron: Option<f64>,
    #[serde(rename = "jx_total_hbar")]
    pub jx_total: Option<f64>,
    #[serde(rename = "delta_coh_proton_MeV")]
    pub delta_coh_proton: Option<f64>,
    #[serde(rename = "delta_coh_neutron_MeV")]
    pub delta_coh_neutron: Option<f64>,
    pub bcs_delta_star: Option<f64>,
    #[serde(rename = "bcs_jx_total_hbar")]
    pub bcs_jx_total: Option<f64>,
    #[serde(rename = "bcs_gap_proton_MeV")]
    pub bcs_gap_proton: Option<f64>,
    #[serde(rename = "bcs_gap_neutron_MeV")]
    pub bcs_gap_neutron: Option<f64>,
}

/// Endpoint frequencies (lowest and highest) per isotope.
pub fn derive_summary(records: &[ScanRecord], isotopes: &[String]) -> Vec<SummaryRow> {
    let idx = index(records);
    let mut out = Vec::new();
    for iso in isotopes {
        let w = omegas_of(records, iso);
        let mut ends = vec![];
        if let Some(first) = w.first() {
            ends.push(*first);
        }
        if w.len() > 1 {
            ends.push(*w.last().unwrap());
        }
        for w in ends {
            let v = minimum_at(records, "vqe", iso, w);
            let b = minimum_at(records, "bcs", iso, w);
            let vs = |s| v.and_then(|t| species_at(&idx, t, s));
            let bs = |s| b.and_then(|t| species_at(&idx, t, s));
            out.push(SummaryRow {
                isotope: iso.clone(),
                omega: w,
                delta_star: v.map(|t| t.delta),
                jx_proton: vs(Species::Proton).and_then(|r| r.jx),
                jx_neutron: vs(Species::Neutron).and_then(|r| r.jx),
                jx_total: v.and_then(|t| t.jx),
                delta_coh_proton: vs(Species::Proton).and_then(|r| r.delta_coh),
                delta_coh_neutron: vs(Species::Neutron).and_then(|r| r.delta_coh),
                bcs_delta_star: b.map(|t| t.delta),
                bcs_jx_total: b.and_then(|t| t.jx),
                bcs_gap_proton: bs(Species::Proton).and_then(|r| r.delta_kappa),
                bcs_gap_neutron: bs(Species::Neutron).and_then(|r| r.delta_kappa),
            });
        }
    }
    out
}

fn cell(x: Option<f64>, digits: usize) -> String {
    x.map(|v| format!("{v:.digits$}")).unwrap_or_else(|| "-".into())
}

pub fn render_summary_markdown(rows: &[SummaryRow]) -> String {
    let mut s = String::from(
        "| isotope | omega (MeV) | delta* | Jx p | Jx n | Jx total | Dcoh p (MeV) | Dcoh n (MeV) | BCS delta* | BCS Jx | BCS gap p | BCS gap n |\n\
         |---|---|---|---|---|---|---|---|---|---|---|---|\n",
    );
    for r in rows {
        s += &format!(
            "| {} | {:.4} | {} | {} | {} | {} | {} | {} | {} | {} | {} | {} |\n",
            r.isotope,
            r.omega,
            cell(r.delta_star, 4),
            cell(r.jx_proton, 2),
            cell(r.jx_neutron, 2),
            cell(r.jx_total, 2),
            cell(r.delta_coh_proton, 3),
            cell(r.delta_coh_neutron, 3),
            cell(r.bcs_delta_star, 4),
            cell(r.bcs_jx_total, 2),
            cell(r.bcs_gap_proton, 3),
            cell(r.bcs_gap_neutron, 3),
        );
    }
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndpointDiagnostics {
    pub isotope: String,
    pub species: String,
    #[serde(rename = "omega_MeV")]
    pub omega: f64,
    pub delta: f64,
    pub n_fev: Option<usize>,
    pub n_it: Option<usize>,
    #[serde(rename = "last_step_MeV")]
    pub last_step: Option<f64>,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultistartDiagnostics {
    pub isotope: String,
    pub species: Species,
    pub m: usize,
    pub delta: f64,
    #[serde(rename = "omega_MeV")]
    pub omega: f64,
    pub parameters: usize,
    #[serde(rename = "energies_MeV")]
    pub energies: Vec<f64>,
    pub n_fev: Vec<usize>,
    #[serde(rename = "best_MeV")]
    pub best: f64,
    #[serde(rename = "spread_keV")]
    pub spread_kev: f64,
}

impl MultistartDiagnostics {
    pub fn from_report(iso: &Isotope, cfg: &MultistartConfig, parameters: usize, report: &MultistartReport) -> Self {
        MultistartDiagnostics {
            isotope: iso.name.clone(),
            species: cfg.species,
            m: cfg.m,
            delta: cfg.delta,
            omega: cfg.omega,
            parameters,
            energies: report.runs.iter().map(|r| r.energy).collect(),
            n_fev: report.runs.iter().map(|r| r.n_fev).collect(),
            best: report.best_energy,
            spread_kev: report.spread * 1e3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    #[serde(rename = "g_MeV")]
    pub g: f64,
    pub g_calibrated: bool,
    pub points: usize,
    pub failed: usize,
    pub unconverged: usize,
    #[serde(rename = "reference_last_step_MeV")]
    pub reference_last_step: f64,
    #[serde(rename = "max_last_step_MeV")]
    pub max_last_step: Option<f64>,
    #[serde(rename = "max_endpoint_last_step_MeV")]
    pub max_endpoint_last_step: Option<f64>,
    pub endpoints: Vec<EndpointDiagnostics>,
    pub multistart: Option<MultistartDiagnostics>,
}

impl Diagnostics {
    /// Optimizer statistics of the VQE species rows; endpoints are the lowest
    /// and highest frequency on the VQE path.
    pub fn from_records(records: &[ScanRecord], isotopes: &[String], g: f64, g_calibrated: bool) -> Self {
        let species_rows: Vec<&ScanRecord> = records.iter().filter(|r| r.species != "total").collect();
        let vqe: Vec<&&ScanRecord> = species_rows.iter().filter(|r| r.method == "vqe").collect();
        let max_last_step = vqe.iter().filter_map(|r| r.last_step).reduce(f64::max);
        let idx = index(records);
        let mut endpoints = Vec::new();
        for iso in isotopes {
            let path = minima(records, "vqe", iso);
            let mut ends: Vec<&ScanRecord> = path.first().into_iter().copied().collect();
            if path.len() > 1 {
                ends.push(path[path.len() - 1]);
            }
            for t in ends {
                for s in [Species::Proton, Species::Neutron] {
                    if let Some(r) = species_at(&idx, t, s) {
                        endpoints.push(EndpointDiagnostics {
                            isotope: iso.clone(),
                            species: s.as_str().into(),
                            omega: r.omega,
                            delta: r.delta,
                            n_fev: r.n_fev,
                            n_it: r.n_it,
                            last_step: r.last_step,
                            status: r.status.clone(),
                        });
                    }
                }
            }
        }
        Diagnostics {
            g,
            g_calibrated,
            points: species_rows.len(),
            failed: species_rows.iter().filter(|r| r.failed()).count(),
            unconverged: species_rows.iter().filter(|r| r.status == "unconverged").count(),
            reference_last_step: REFERENCE_LAST_STEP_MEV,
            max_last_step,
            max_endpoint_last_step: endpoints.iter().filter_map(|e| e.last_step).reduce(f64::max),
            endpoints,
            multistart: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub m: usize,
    pub qubits: usize,
    /// `C(2M, M)`
    pub fixed_n_dimension: u64,
    /// `C(M, M/2)`, pair (seniority-zero) sector at half filling
    pub pair_sector_dimension: u64,
    /// `2^(2M)`
    pub register_dimension: u64,
}

pub fn scaling_table(m_min: usize, m_max: usize) -> Vec<ScalingRow> {
    (m_min..=m_max)
        .map(|m| ScalingRow {
            m,
            qubits: 2 * m,
            fixed_n_dimension: binomial(2 * m as u64, m as u64),
            pair_sector_dimension: binomial(m as u64, m as u64 / 2),
            register_dimension: 1u64 << (2 * m),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scaling_values() {
        let t = scaling_table(2, 12);
        let m8 = t.iter().find(|r| r.m == 8).unwrap();
        assert_eq!(m8.fixed_n_dimension, 12870);
        assert_eq!(m8.qubits, 16);
        assert_eq!(m8.pair_sector_dimension, 70);
        assert_eq!(t[0].fixed_n_dimension, 6);
        assert_eq!(t.last().unwrap().register_dimension, 1 << 24);
    }

    #[test]
    fn markdown_has_one_line_per_row() {
        let row = SummaryRow {
            isotope: "X".into(),
            omega: 1.0,
            delta_star: Some(-0.25),
            jx_proton: Some(1.0),
            jx_neutron: None,
            jx_total: Some(1.0),
            delta_coh_proton: Some(0.5),
            delta_coh_neutron: None,
            bcs_delta_star: None,
            bcs_jx_total: None,
            bcs_gap_proton: None,
            bcs_gap_neutron: None,
        };
        let md = render_summary_markdown(&[row.clone(), row]);
        assert_eq!(md.lines().count(), 4);
        assert!(md.contains("| X | 1.0000 | -0.2500 |"));
    }
}
