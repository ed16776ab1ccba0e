//! The dove-prism Mach-Zehnder: overlap of the signal with its spatially
//! inverted copy, output-port intensities, conditional count rates, the phase
//! scan, and the visibility Schmidt estimator.
//!
//! The interferometer is ideal and balanced: 50/50 splitters, lossless
//! inversion. Port amplitudes for interferometer phase theta are
//! `(phi(x_s, x_i) +- e^{i theta} phi(-x_s, x_i)) / 2`.

use ndarray::Array2;
use num_complex::Complex64;

use crate::amplitude::{Photon, TwoPhotonAmplitude};
use crate::error::{Error, Result};
use crate::grid::{Axis, Domain};
use crate::optics::reverse_axis;

/// Two-photon intensity maps at both output ports for one phase setting.
#[derive(Debug, Clone)]
pub struct PortIntensities {
    pub p_constructive: Array2<f64>,
    pub p_destructive: Array2<f64>,
    pub theta: f64,
    pub axis_signal: Axis,
    pub axis_idler: Axis,
}

/// Detection window along one coordinate.
#[derive(Debug, Clone, Copy)]
pub enum Window {
    /// Integrate over the whole grid.
    Full,
    /// Slit of the given width centered at `center`.
    Slit { center: f64, width: f64 },
}

/// Monitored output port.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Port {
    Constructive,
    Destructive,
}

/// Coincidence rate versus interferometer phase, with the visibility estimator.
#[derive(Debug, Clone)]
pub struct PhaseScan {
    pub thetas: Vec<f64>,
    pub rates: Vec<f64>,
    pub visibility: f64,
    pub k_estimate: f64,
    /// Visibility at the numeric floor: the estimator diverges.
    pub saturated: bool,
}

/// Mirror one photon's coordinate about zero by index reversal
/// (`j -> (n - j) mod n`; the edge sample j = 0 maps to itself).
pub fn invert_arm(tpa: &TwoPhotonAmplitude, photon: Photon) -> Result<TwoPhotonAmplitude> {
    tpa.require_domain(Domain::Position)?;
    tpa.axis(photon).require_centered()?;
    let mut out = tpa.clone();
    reverse_axis(&mut out, photon);
    Ok(out)
}

fn check_input(tpa: &TwoPhotonAmplitude) -> Result<()> {
    tpa.require_domain(Domain::Position)?;
    tpa.axis_signal().require_centered()?;
    let norm = tpa.norm();
    if (norm - 1.0).abs() > 1e-8 {
        return Err(Error::Config(format!(
            "interferometer input must be normalized (norm = {norm:.12})"
        )));
    }
    Ok(())
}

/// Overlap the signal with its inverted copy at phase `theta` and return both
/// port intensity maps.
pub fn interfere(tpa: &TwoPhotonAmplitude, theta: f64) -> Result<PortIntensities> {
    check_input(tpa)?;
    let phase = Complex64::from_polar(1.0, theta);
    let n_s = tpa.values.nrows();
    let n_i = tpa.values.ncols();
    let mut p_c = Array2::zeros((n_s, n_i));
    let mut p_d = Array2::zeros((n_s, n_i));
    for j in 0..n_s {
        let jr = (n_s - j) % n_s;
        for i in 0..n_i {
            let direct = tpa.values[(j, i)];
            let inverted = tpa.values[(jr, i)] * phase;
            p_c[(j, i)] = ((direct + inverted) * 0.5).norm_sqr();
            p_d[(j, i)] = ((direct - inverted) * 0.5).norm_sqr();
        }
    }
    Ok(PortIntensities {
        p_constructive: p_c,
        p_destructive: p_d,
        theta,
        axis_signal: tpa.axis_signal().clone(),
        axis_idler: tpa.axis_idler().clone(),
    })
}

fn window_range(axis: &Axis, window: Window) -> Result<(usize, usize)> {
    match window {
        Window::Full => Ok((0, axis.n() - 1)),
        Window::Slit { center, width } => {
            if width < 0.0 {
                return Err(Error::Config(format!("slit width must be >= 0, got {width}")));
            }
            let c = axis.nearest_index(center)?;
            let half = (width / (2.0 * axis.spacing())).floor() as usize;
            Ok((c.saturating_sub(half), (c + half).min(axis.n() - 1)))
        }
    }
}

impl PortIntensities {
    /// Integrated rate of one port over the detection windows.
    pub fn rate(&self, port: Port, slit_signal: Window, slit_idler: Window) -> Result<f64> {
        let (s_lo, s_hi) = window_range(&self.axis_signal, slit_signal)?;
        let (i_lo, i_hi) = window_range(&self.axis_idler, slit_idler)?;
        let map = match port {
            Port::Constructive => &self.p_constructive,
            Port::Destructive => &self.p_destructive,
        };
        let cell = self.axis_signal.spacing() * self.axis_idler.spacing();
        let mut sum = 0.0;
        for j in s_lo..=s_hi {
            for i in i_lo..=i_hi {
                sum += map[(j, i)];
            }
        }
        Ok(sum * cell)
    }

    /// Single-arm (signal) count rates of both ports, idler traced out.
    pub fn signal_singles(&self) -> (Vec<f64>, Vec<f64>) {
        let di = self.axis_idler.spacing();
        let fold = |m: &Array2<f64>| -> Vec<f64> {
            m.outer_iter().map(|row| row.sum() * di).collect()
        };
        (fold(&self.p_constructive), fold(&self.p_destructive))
    }
}

/// Both conditional count rates through the detection windows.
pub fn conditional_rates(
    ports: &PortIntensities,
    slit_signal: Window,
    slit_idler: Window,
) -> Result<(f64, f64)> {
    Ok((
        ports.rate(Port::Constructive, slit_signal, slit_idler)?,
        ports.rate(Port::Destructive, slit_signal, slit_idler)?,
    ))
}

/// `K = (P+ + P-) / (P+ - P-)`.
pub fn schmidt_from_rates(p_plus: f64, p_minus: f64) -> Result<f64> {
    if p_minus < 0.0 || p_plus < 0.0 {
        return Err(Error::Config("count rates must be nonnegative".into()));
    }
    let sum = p_plus + p_minus;
    let diff = p_plus - p_minus;
    if diff < 0.0 {
        return Err(Error::PortLabeling { p_plus, p_minus });
    }
    if diff <= 1e-12 * sum {
        return Err(Error::Saturated { difference: diff });
    }
    Ok(sum / diff)
}

/// Rate versus phase through the windows of the monitored port, plus the
/// visibility estimator `K = 1/V`.
///
/// The rate at phase theta is exactly sinusoidal,
/// `r(theta) = (S_dd + S_ii)/4 + Re(e^{i theta} S_di)/2`, with the three
/// window sums independent of theta, so they are accumulated once.
pub fn phase_scan(
    tpa: &TwoPhotonAmplitude,
    thetas: &[f64],
    slit_signal: Window,
    slit_idler: Window,
    port: Port,
) -> Result<PhaseScan> {
    check_input(tpa)?;
    if thetas.len() < 2 {
        return Err(Error::Config(format!(
            "phase scan needs at least 2 phases, got {}",
            thetas.len()
        )));
    }
    let (s_lo, s_hi) = window_range(tpa.axis_signal(), slit_signal)?;
    let (i_lo, i_hi) = window_range(tpa.axis_idler(), slit_idler)?;
    let n_s = tpa.values.nrows();
    let cell = tpa.cell_area();

    let mut s_dd = 0.0; // sum |phi|^2
    let mut s_ii = 0.0; // sum |phi inverted|^2
    let mut s_di = Complex64::default(); // sum phi^* phi_inverted
    for j in s_lo..=s_hi {
        let jr = (n_s - j) % n_s;
        for i in i_lo..=i_hi {
            let d = tpa.values[(j, i)];
            let inv = tpa.values[(jr, i)];
            s_dd += d.norm_sqr();
            s_ii += inv.norm_sqr();
            s_di += d.conj() * inv;
        }
    }
    s_dd *= cell;
    s_ii *= cell;
    s_di *= cell;

    let sign = match port {
        Port::Constructive => 1.0,
        Port::Destructive => -1.0,
    };
    let rates: Vec<f64> = thetas
        .iter()
        .map(|&th| {
            let cross = (Complex64::from_polar(1.0, th) * s_di).re;
            0.25 * (s_dd + s_ii) + sign * 0.5 * cross
        })
        .collect();

    let max = rates.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = rates.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(max > 0.0) {
        return Err(Error::DegenerateInput("zero rate through the detection windows".into()));
    }
    let visibility = (max - min) / (max + min);
    let saturated = visibility <= 1e-12;
    let k_estimate = if saturated { f64::INFINITY } else { 1.0 / visibility };
    Ok(PhaseScan { thetas: thetas.to_vec(), rates, visibility, k_estimate, saturated })
}
