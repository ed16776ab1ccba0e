//! Named experiments over a scenario: source construction, propagation to the
//! detection planes, and the per-plane measurements behind each CLI command.

use rayon::prelude::*;

use biphoton::amplitude::Photon;
use biphoton::interferometer::{
    conditional_rates, interfere, phase_scan, schmidt_from_rates, PhaseScan, Port, Window,
};
use biphoton::measures::{fedorov_ratio, Fixing};
use biphoton::optics::{Abcd, Element};
use biphoton::schmidt::{decompose, fit_geometric, parity_classification, schmidt_number};
use biphoton::spdc::{build_double_gaussian, build_spdc};
use biphoton::{Domain, Error, Result, TwoPhotonAmplitude};

use crate::scenario::{Model, Scenario};

/// Build the scenario's source state in the momentum representation.
pub fn source_state(scenario: &Scenario) -> Result<TwoPhotonAmplitude> {
    match scenario.model {
        Model::Spdc => {
            let params = scenario.spdc_params();
            let axis =
                params.default_axis(scenario.grid_n, scenario.momentum_halfwidth_factor)?;
            build_spdc(&params, &axis)
        }
        Model::DoubleGaussian => {
            let params = scenario.double_gaussian_params();
            let axis =
                params.default_axis(scenario.grid_n, scenario.momentum_halfwidth_factor)?;
            build_double_gaussian(&params, &axis)
        }
    }
}

/// Crystal-to-detector ray matrix for a detection plane at distance z from
/// the lens.
pub fn detection_system(scenario: &Scenario, z: f64) -> Abcd {
    Abcd::from_elements(&[
        Element::FreeSpace(scenario.lens_position_m),
        Element::ThinLens(scenario.lens_focal_m),
        Element::FreeSpace(z),
    ])
}

/// Propagate the source (given in the position representation) to the plane
/// at distance z from the lens; both arms see the same system.
pub fn plane_state(
    scenario: &Scenario,
    source_position: &TwoPhotonAmplitude,
    z: f64,
) -> Result<TwoPhotonAmplitude> {
    let sys = detection_system(scenario, z);
    let mut out = biphoton::optics::propagate_abcd(source_position, &sys, &sys)?;
    out.z_label = scenario.lens_position_m + z;
    Ok(out)
}

/// Install the worker pool requested via `BIPHOTON_WORKERS` (default: all
/// available parallelism). Safe to call more than once.
pub fn configure_workers() {
    if let Ok(v) = std::env::var("BIPHOTON_WORKERS") {
        if let Ok(n) = v.trim().parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
                biphoton::set_worker_threads(n);
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct FedorovRow {
    pub z_m: f64,
    pub width_unconditional: Option<f64>,
    pub width_conditional: Option<f64>,
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct FedorovScan {
    pub rows: Vec<FedorovRow>,
    pub warnings: Vec<String>,
}

/// Fedorov ratio at every sweep plane. Fit failures leave null cells and a
/// warning; a sweep with no valid row is a numerical failure.
pub fn run_fedorov_scan(scenario: &Scenario) -> Result<FedorovScan> {
    let source = source_state(scenario)?.to_position()?;
    let planes = scenario.sweep_planes();
    let results: Vec<(f64, Result<biphoton::measures::FedorovResult>)> = planes
        .par_iter()
        .map(|&z| {
            let r = plane_state(scenario, &source, z).and_then(|state| {
                fedorov_ratio(
                    &state,
                    Photon::Signal,
                    scenario.slit_fedorov_m,
                    Fixing::AtMarginalPeak,
                )
            });
            (z, r)
        })
        .collect();

    let mut rows = Vec::with_capacity(results.len());
    let mut warnings = Vec::new();
    let mut hard_error: Option<Error> = None;
    for (z, r) in results {
        match r {
            Ok(f) => rows.push(FedorovRow {
                z_m: z,
                width_unconditional: Some(f.width_unconditional),
                width_conditional: Some(f.width_conditional),
                ratio: Some(f.ratio),
            }),
            Err(e @ (Error::FitNonConvergence(_) | Error::DegenerateInput(_))) => {
                warnings.push(format!("z = {:.1} mm: {e}", z * 1e3));
                rows.push(FedorovRow {
                    z_m: z,
                    width_unconditional: None,
                    width_conditional: None,
                    ratio: None,
                });
            }
            Err(e) => {
                hard_error.get_or_insert(e);
            }
        }
    }
    if let Some(e) = hard_error {
        return Err(e);
    }
    if rows.iter().all(|r| r.ratio.is_none()) {
        return Err(Error::FitNonConvergence(
            "no sweep plane produced a valid Fedorov ratio".into(),
        ));
    }
    Ok(FedorovScan { rows, warnings })
}

#[derive(Debug, Clone)]
pub struct SchmidtRow {
    pub z_m: f64,
    pub k_svd: Option<f64>,
    pub k_visibility: Option<f64>,
    pub p_plus: Option<f64>,
    pub p_minus: Option<f64>,
    pub geometric_alpha: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct SchmidtScan {
    pub rows: Vec<SchmidtRow>,
    pub warnings: Vec<String>,
}

/// Per plane: Schmidt number from the SVD and from the interferometric
/// visibility estimator at theta in {0, pi}.
///
/// The visibility rates integrate over the full grid: the experiment's
/// Schmidt slits are oriented along the scanned direction and amount to an
/// integration over it.
pub fn run_schmidt_scan(scenario: &Scenario) -> Result<SchmidtScan> {
    let source = source_state(scenario)?.to_position()?;
    let planes = scenario.sweep_planes();
    type PlaneOut = (f64, Result<(f64, f64, f64, f64, Option<f64>)>);
    let results: Vec<PlaneOut> = planes
        .par_iter()
        .map(|&z| {
            let r = plane_state(scenario, &source, z).and_then(|state| {
                let dec = decompose(&state)?;
                let k_svd = schmidt_number(&dec);
                // degenerate spectra (separable sources) have no geometric tail
                let alpha = fit_geometric(&dec.lambdas, 10).ok().map(|f| f.alpha);
                let ports = interfere(&state, 0.0)?;
                let (p_plus, p_minus) = conditional_rates(&ports, Window::Full, Window::Full)?;
                let k_vis = schmidt_from_rates(p_plus, p_minus)?;
                Ok((k_svd, k_vis, p_plus, p_minus, alpha))
            });
            (z, r)
        })
        .collect();

    let mut rows = Vec::with_capacity(results.len());
    let mut warnings = Vec::new();
    let mut hard_error: Option<Error> = None;
    for (z, r) in results {
        match r {
            Ok((k_svd, k_vis, p_plus, p_minus, alpha)) => rows.push(SchmidtRow {
                z_m: z,
                k_svd: Some(k_svd),
                k_visibility: Some(k_vis),
                p_plus: Some(p_plus),
                p_minus: Some(p_minus),
                geometric_alpha: alpha,
            }),
            Err(e @ (Error::FitNonConvergence(_) | Error::Saturated { .. })) => {
                warnings.push(format!("z = {:.1} mm: {e}", z * 1e3));
                rows.push(SchmidtRow {
                    z_m: z,
                    k_svd: None,
                    k_visibility: None,
                    p_plus: None,
                    p_minus: None,
                    geometric_alpha: None,
                });
            }
            Err(e) => {
                hard_error.get_or_insert(e);
            }
        }
    }
    if let Some(e) = hard_error {
        return Err(e);
    }
    if rows.iter().all(|r| r.k_svd.is_none()) {
        return Err(Error::FitNonConvergence("no sweep plane produced a Schmidt number".into()));
    }
    Ok(SchmidtScan { rows, warnings })
}

#[derive(Debug, Clone)]
pub struct ModesOutput {
    /// Signal-mode samples: coordinate column plus one column per mode
    /// (global phase fixed so the largest sample is real positive).
    pub coordinates: Vec<f64>,
    pub modes: Vec<Vec<f64>>,
    /// (index, lambda, parity sign, parity score) per retained mode.
    pub eigenvalues: Vec<(usize, f64, f64, f64)>,
    pub warnings: Vec<String>,
}

/// Schmidt modes and spectrum of the source state in the position
/// representation.
pub fn run_modes(scenario: &Scenario, n_modes: usize) -> Result<ModesOutput> {
    if n_modes == 0 {
        return Err(Error::Config("n_modes must be >= 1".into()));
    }
    let source = source_state(scenario)?.to_position()?;
    let dec = decompose(&source)?;
    let parity = parity_classification(&dec)?;

    let rank = dec
        .lambdas
        .iter()
        .take_while(|l| **l >= biphoton::schmidt::LAMBDA_TRUNCATION)
        .count();
    let mut warnings = Vec::new();
    let kept = if n_modes > rank {
        warnings.push(format!(
            "requested {n_modes} modes but only {rank} carry weight above the truncation \
             threshold; writing {rank}"
        ));
        rank
    } else {
        n_modes
    };

    let n = dec.modes_signal.nrows();
    let coordinates = dec.axis_signal.coordinates();
    let mut modes = Vec::with_capacity(kept);
    for k in 0..kept {
        // rotate the global phase so the largest-magnitude sample is real
        let col = dec.modes_signal.column(k);
        let (jmax, _) = col
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .expect("modes are nonempty");
        let phase = col[jmax] / col[jmax].norm();
        let rotated: Vec<f64> = (0..n).map(|j| (col[j] * phase.conj()).re).collect();
        modes.push(rotated);
    }
    let eigenvalues = (0..kept)
        .map(|k| (k, dec.lambdas[k], parity[k].sign, parity[k].score))
        .collect();
    Ok(ModesOutput { coordinates, modes, eigenvalues, warnings })
}

/// Phase scan of the interferometer at one detection plane.
pub fn run_phase_scan(scenario: &Scenario, z: f64, n_thetas: usize) -> Result<PhaseScan> {
    if n_thetas < 3 {
        return Err(Error::Config(format!(
            "phase scan needs at least 3 phases to bracket the extrema, got {n_thetas}"
        )));
    }
    let source = source_state(scenario)?.to_position()?;
    let state = plane_state(scenario, &source, z)?;
    let thetas: Vec<f64> = (0..n_thetas)
        .map(|j| 2.0 * std::f64::consts::PI * j as f64 / n_thetas as f64)
        .collect();
    phase_scan(&state, &thetas, Window::Full, Window::Full, Port::Constructive)
}

#[derive(Debug, Clone)]
pub struct AmplitudeDump {
    /// (signal coordinate, idler coordinate, intensity) triples, decimated.
    pub rows: Vec<(f64, f64, f64)>,
    pub domain: Domain,
    /// Pearson correlation coefficient of the full-resolution intensity.
    pub pearson: f64,
    pub decimation: usize,
}

/// Joint intensity |phi|^2 at one detection plane, decimated to at most
/// 256 samples per axis.
pub fn run_amplitude_dump(scenario: &Scenario, z: f64, domain: Domain) -> Result<AmplitudeDump> {
    let source = source_state(scenario)?.to_position()?;
    let state = plane_state(scenario, &source, z)?;
    let state = match domain {
        Domain::Position => state,
        Domain::Momentum => state.to_momentum()?,
    };
    let n_s = state.values.nrows();
    let n_i = state.values.ncols();
    let stride = n_s.max(n_i).div_ceil(256);

    let pearson = intensity_pearson(&state);
    let mut rows = Vec::new();
    let mut i = 0;
    while i < n_s {
        let xs = state.axis_signal().coordinate(i);
        let mut j = 0;
        while j < n_i {
            rows.push((xs, state.axis_idler().coordinate(j), state.values[(i, j)].norm_sqr()));
            j += stride;
        }
        i += stride;
    }
    Ok(AmplitudeDump { rows, domain, pearson, decimation: stride })
}

/// Pearson correlation of the coordinates under the joint intensity.
pub fn intensity_pearson(state: &TwoPhotonAmplitude) -> f64 {
    let xs: Vec<f64> = state.axis_signal().coordinates();
    let xi: Vec<f64> = state.axis_idler().coordinates();
    let mut w_tot = 0.0;
    let (mut mx, mut my) = (0.0, 0.0);
    for (row, &x) in state.values.outer_iter().zip(&xs) {
        for (v, &y) in row.iter().zip(&xi) {
            let w = v.norm_sqr();
            w_tot += w;
            mx += w * x;
            my += w * y;
        }
    }
    mx /= w_tot;
    my /= w_tot;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (row, &x) in state.values.outer_iter().zip(&xs) {
        for (v, &y) in row.iter().zip(&xi) {
            let w = v.norm_sqr();
            let dx = x - mx;
            let dy = y - my;
            sxx += w * dx * dx;
            syy += w * dy * dy;
            sxy += w * dx * dy;
        }
    }
    sxy / (sxx * syy).sqrt()
}
