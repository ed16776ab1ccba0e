//! Scenario configuration: a single JSON document with unit-suffixed keys,
//! converted to SI at load time.

use serde::{Deserialize, Serialize};
use std::path::Path;

use biphoton::spdc::{DoubleGaussianParams, SpdcParams};
use biphoton::{Error, Result};

/// Which source model the scenario builds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    Spdc,
    DoubleGaussian,
}

/// On-disk scenario format. Every length key names its unit in the suffix;
/// omitted sections fall back to the reference experimental configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioFile {
    pub model: Model,
    pub spdc: SpdcFile,
    pub double_gaussian: DoubleGaussianFile,
    pub grid: GridFile,
    pub optics: OpticsFile,
    pub detection: DetectionFile,
    pub sweep: SweepFile,
    pub outputs: OutputsFile,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpdcFile {
    pub lambda_pump_nm: f64,
    pub crystal_length_mm: f64,
    pub pump_waist_um: f64,
    /// External angle of the selected emission direction; 0 = collinear.
    pub emission_angle_deg: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DoubleGaussianFile {
    pub sigma_plus_radpm: f64,
    pub sigma_minus_radpm: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridFile {
    pub n: usize,
    pub momentum_halfwidth_factor: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OpticsFile {
    pub lens_focal_mm: f64,
    pub lens_position_mm: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DetectionFile {
    pub slit_fedorov_um: f64,
    pub slit_schmidt_um: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepFile {
    pub z_start_mm: f64,
    pub z_stop_mm: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputsFile {
    pub csv_path: String,
    pub summary_path: String,
}

impl Default for ScenarioFile {
    fn default() -> Self {
        ScenarioFile {
            model: Model::Spdc,
            spdc: SpdcFile::default(),
            double_gaussian: DoubleGaussianFile::default(),
            grid: GridFile::default(),
            optics: OpticsFile::default(),
            detection: DetectionFile::default(),
            sweep: SweepFile::default(),
            outputs: OutputsFile::default(),
        }
    }
}

impl Default for SpdcFile {
    fn default() -> Self {
        SpdcFile {
            lambda_pump_nm: 404.0,
            crystal_length_mm: 2.0,
            pump_waist_um: 245.0,
            emission_angle_deg: 2.0,
        }
    }
}

impl Default for DoubleGaussianFile {
    fn default() -> Self {
        DoubleGaussianFile { sigma_plus_radpm: 4.0e3, sigma_minus_radpm: 1.0e5 }
    }
}

impl Default for GridFile {
    fn default() -> Self {
        GridFile { n: 1024, momentum_halfwidth_factor: 4.0 }
    }
}

impl Default for OpticsFile {
    fn default() -> Self {
        // lens placed so the image plane of the crystal sits at z = 1550 mm
        // from the lens while the Fourier plane sits at z = f = 500 mm
        OpticsFile { lens_focal_mm: 500.0, lens_position_mm: 500.0 * 1550.0 / 1050.0 }
    }
}

impl Default for DetectionFile {
    fn default() -> Self {
        DetectionFile { slit_fedorov_um: 30.0, slit_schmidt_um: 200.0 }
    }
}

impl Default for SweepFile {
    fn default() -> Self {
        SweepFile { z_start_mm: 450.0, z_stop_mm: 1600.0, steps: 24 }
    }
}

impl Default for OutputsFile {
    fn default() -> Self {
        OutputsFile { csv_path: "scan.csv".into(), summary_path: "summary.json".into() }
    }
}

/// Fully resolved scenario in SI units; this is what run summaries embed.
#[derive(Debug, Clone, Serialize)]
pub struct Scenario {
    pub model: Model,
    pub lambda_pump_m: f64,
    pub crystal_length_m: f64,
    pub pump_waist_m: f64,
    pub emission_offset_radpm: f64,
    pub dg_sigma_plus_radpm: f64,
    pub dg_sigma_minus_radpm: f64,
    pub grid_n: usize,
    pub momentum_halfwidth_factor: f64,
    pub lens_focal_m: f64,
    pub lens_position_m: f64,
    pub slit_fedorov_m: f64,
    pub slit_schmidt_m: f64,
    pub z_start_m: f64,
    pub z_stop_m: f64,
    pub steps: usize,
    pub csv_path: String,
    pub summary_path: String,
}

impl ScenarioFile {
    pub fn load(path: &Path) -> Result<ScenarioFile> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Config(format!("cannot read scenario file {}: {e}", path.display()))
        })?;
        serde_json::from_str(&text).map_err(|e| {
            Error::Config(format!("invalid scenario file {}: {e}", path.display()))
        })
    }

    pub fn resolve(&self) -> Result<Scenario> {
        let s = Scenario {
            model: self.model,
            lambda_pump_m: self.spdc.lambda_pump_nm * 1e-9,
            crystal_length_m: self.spdc.crystal_length_mm * 1e-3,
            pump_waist_m: self.spdc.pump_waist_um * 1e-6,
            emission_offset_radpm: {
                let k_photon = std::f64::consts::PI / (self.spdc.lambda_pump_nm * 1e-9);
                k_photon * self.spdc.emission_angle_deg.to_radians().sin()
            },
            dg_sigma_plus_radpm: self.double_gaussian.sigma_plus_radpm,
            dg_sigma_minus_radpm: self.double_gaussian.sigma_minus_radpm,
            grid_n: self.grid.n,
            momentum_halfwidth_factor: self.grid.momentum_halfwidth_factor,
            lens_focal_m: self.optics.lens_focal_mm * 1e-3,
            lens_position_m: self.optics.lens_position_mm * 1e-3,
            slit_fedorov_m: self.detection.slit_fedorov_um * 1e-6,
            slit_schmidt_m: self.detection.slit_schmidt_um * 1e-6,
            z_start_m: self.sweep.z_start_mm * 1e-3,
            z_stop_m: self.sweep.z_stop_mm * 1e-3,
            steps: self.sweep.steps,
            csv_path: self.outputs.csv_path.clone(),
            summary_path: self.outputs.summary_path.clone(),
        };
        s.validate()?;
        Ok(s)
    }
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if self.steps < 1 {
            return Err(Error::Config("sweep.steps must be >= 1".into()));
        }
        if self.z_stop_m < self.z_start_m {
            return Err(Error::Config(format!(
                "sweep range inverted: z_stop {} < z_start {}",
                self.z_stop_m, self.z_start_m
            )));
        }
        if !(self.lens_focal_m != 0.0) {
            return Err(Error::Config("lens focal length must be nonzero".into()));
        }
        if self.lens_position_m < 0.0 {
            return Err(Error::Config("lens position must be >= 0".into()));
        }
        for (name, v) in [
            ("slit_fedorov", self.slit_fedorov_m),
            ("slit_schmidt", self.slit_schmidt_m),
        ] {
            if v < 0.0 || !v.is_finite() {
                return Err(Error::Config(format!("{name} must be >= 0, got {v}")));
            }
        }
        self.spdc_params().validate()?;
        if self.model == Model::DoubleGaussian {
            self.double_gaussian_params().validate()?;
        }
        Ok(())
    }

    pub fn spdc_params(&self) -> SpdcParams {
        SpdcParams {
            lambda_pump: self.lambda_pump_m,
            crystal_length: self.crystal_length_m,
            pump_waist: self.pump_waist_m,
            emission_offset: self.emission_offset_radpm,
        }
    }

    pub fn double_gaussian_params(&self) -> DoubleGaussianParams {
        DoubleGaussianParams {
            sigma_plus: self.dg_sigma_plus_radpm,
            sigma_minus: self.dg_sigma_minus_radpm,
        }
    }

    /// Sweep planes, z measured from the lens (m).
    pub fn sweep_planes(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.z_start_m];
        }
        let step = (self.z_stop_m - self.z_start_m) / (self.steps - 1) as f64;
        (0..self.steps).map(|j| self.z_start_m + j as f64 * step).collect()
    }

    pub fn reference() -> Scenario {
        ScenarioFile::default().resolve().expect("default scenario is valid")
    }
}
