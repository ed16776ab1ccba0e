//! Source two-photon amplitudes at the crystal exit plane.
//!
//! `build_spdc` is the physical model: pump angular spectrum times the
//! phase-matching sinc of a uniform crystal,
//!
//! ```text
//! phi(p, q) = N exp(-w0^2 (p+q)^2 / 4) sinc(L (d^2 + 4 kappa |d|) / (4 k_p)),   d = p - q,
//! ```
//!
//! with `sinc(u) = sin(u)/u`. `kappa` is the transverse wavevector of the
//! selected emission direction; `kappa = 0` is the collinear case where the
//! argument reduces to `L (p-q)^2 / (4 k_p)`. For a noncollinear process the
//! longitudinal mismatch grows linearly with the detuning `d` around the
//! selected pair of directions; the `|d|` form keeps the kept branch and its
//! mirror image degenerate, so exchange symmetry and joint parity stay exact
//! on the grid. The mirror phase-matching solution at `d = -4 kappa` (the
//! opposite points of the emission ring, removed by the alignment apertures)
//! is excluded by construction.
//!
//! `build_double_gaussian` is the analytic benchmark in which the sinc is
//! replaced by a Gaussian; its Schmidt data are closed-form.

use ndarray::Array2;
use num_complex::Complex64;
use std::f64::consts::PI;

use crate::amplitude::TwoPhotonAmplitude;
use crate::error::{Error, Result};
use crate::grid::{Axis, Domain};

/// Degenerate SPDC source parameters. All lengths in meters.
#[derive(Debug, Clone, Copy)]
pub struct SpdcParams {
    /// Pump vacuum wavelength.
    pub lambda_pump: f64,
    /// Crystal length L.
    pub crystal_length: f64,
    /// Pump waist w0 at the crystal, 1/e^2 intensity radius
    /// (pump amplitude ~ exp(-x^2/w0^2)).
    pub pump_waist: f64,
    /// Transverse wavevector of the selected emission direction (rad/m);
    /// zero for collinear emission.
    pub emission_offset: f64,
}

impl SpdcParams {
    pub fn validate(&self) -> Result<()> {
        let pos = [
            ("lambda_pump", self.lambda_pump),
            ("crystal_length", self.crystal_length),
            ("pump_waist", self.pump_waist),
        ];
        for (name, v) in pos {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.emission_offset < 0.0 || !self.emission_offset.is_finite() {
            return Err(Error::Config(format!(
                "emission_offset must be nonnegative, got {}",
                self.emission_offset
            )));
        }
        Ok(())
    }

    /// Pump wavenumber 2*pi/lambda_pump.
    pub fn k_pump(&self) -> f64 {
        2.0 * PI / self.lambda_pump
    }

    /// Degenerate signal/idler wavenumber, half the pump's.
    pub fn k_photon(&self) -> f64 {
        self.k_pump() / 2.0
    }

    /// First zero of the sinc factor in the difference coordinate d = p - q:
    /// the root of `L (d^2 + 4 kappa d) / (4 k_p) = pi`.
    pub fn sinc_first_zero(&self) -> f64 {
        let kappa = self.emission_offset;
        let c = 4.0 * PI * self.k_pump() / self.crystal_length;
        -2.0 * kappa + (4.0 * kappa * kappa + c).sqrt()
    }

    /// Momentum half-extent of the default grid: `factor * max(d_zero, 4/w0)`.
    pub fn default_halfwidth(&self, factor: f64) -> f64 {
        factor * self.sinc_first_zero().max(4.0 / self.pump_waist)
    }

    /// Default momentum axis for this source (factor 4 covers the support
    /// with comfortable margin).
    pub fn default_axis(&self, n: usize, halfwidth_factor: f64) -> Result<Axis> {
        Axis::centered_from_halfwidth(n, self.default_halfwidth(halfwidth_factor), Domain::Momentum)
    }
}

/// Double-Gaussian benchmark parameters, widths in rad/m.
#[derive(Debug, Clone, Copy)]
pub struct DoubleGaussianParams {
    /// Width of the momentum-sum factor `exp(-(p+q)^2/(4 sigma_plus^2))`.
    pub sigma_plus: f64,
    /// Width of the momentum-difference factor.
    pub sigma_minus: f64,
}

impl DoubleGaussianParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_plus > 0.0) || !(self.sigma_minus > 0.0) {
            return Err(Error::Config("double-Gaussian widths must be positive".into()));
        }
        Ok(())
    }

    pub fn default_axis(&self, n: usize, halfwidth_factor: f64) -> Result<Axis> {
        let hw = halfwidth_factor * self.sigma_plus.max(self.sigma_minus);
        Axis::centered_from_halfwidth(n, hw, Domain::Momentum)
    }

    /// Exact Schmidt number of the benchmark: `(r + 1/r)/2`, r = ratio of widths.
    pub fn schmidt_number(&self) -> f64 {
        let r = self.sigma_minus / self.sigma_plus;
        0.5 * (r + 1.0 / r)
    }

    /// Exact geometric ratio of the Schmidt spectrum, `lambda_m = (1-mu) mu^m`.
    pub fn geometric_ratio(&self) -> f64 {
        let (lo, hi) = if self.sigma_plus <= self.sigma_minus {
            (self.sigma_plus, self.sigma_minus)
        } else {
            (self.sigma_minus, self.sigma_plus)
        };
        let t = (hi - lo) / (hi + lo);
        t * t
    }
}

fn sinc(u: f64) -> f64 {
    if u.abs() < 1e-8 {
        1.0 - u * u / 6.0
    } else {
        u.sin() / u
    }
}

/// Build the normalized SPDC amplitude on a centered momentum axis
/// (same axis for signal and idler), `z_label = 0`.
pub fn build_spdc(params: &SpdcParams, axis: &Axis) -> Result<TwoPhotonAmplitude> {
    params.validate()?;
    axis_checks(
        axis,
        params.sinc_first_zero().max(4.0 / params.pump_waist),
        (1.0 / params.pump_waist).min(params.sinc_first_zero() / 4.0),
    )?;

    let kp = params.k_pump();
    let w0 = params.pump_waist;
    let len = params.crystal_length;
    let kappa = params.emission_offset;
    let n = axis.n();
    let p: Vec<f64> = axis.coordinates();

    let mut values = Array2::default((n, n));
    for i in 0..n {
        for j in 0..n {
            let sum = p[i] + p[j];
            let d = p[i] - p[j];
            let pump = (-w0 * w0 * sum * sum / 4.0).exp();
            let mismatch = len * (d * d + 4.0 * kappa * d.abs()) / (4.0 * kp);
            values[(i, j)] = Complex64::new(pump * sinc(mismatch), 0.0);
        }
    }

    let k = params.k_photon();
    TwoPhotonAmplitude::new(values, axis.clone(), axis.clone(), k, k)?.normalize()
}

/// Build the normalized double-Gaussian benchmark amplitude.
///
/// The photon wavenumber is not part of the benchmark definition; propagation
/// of this state uses the same degenerate convention as the SPDC model with a
/// default 808 nm photon (callers needing a different one can adjust the
/// returned state's wavenumbers).
pub fn build_double_gaussian(
    params: &DoubleGaussianParams,
    axis: &Axis,
) -> Result<TwoPhotonAmplitude> {
    params.validate()?;
    axis_checks(
        axis,
        2.0 * params.sigma_plus.max(params.sigma_minus),
        params.sigma_plus.min(params.sigma_minus),
    )?;

    let sp2 = 4.0 * params.sigma_plus * params.sigma_plus;
    let sm2 = 4.0 * params.sigma_minus * params.sigma_minus;
    let n = axis.n();
    let p: Vec<f64> = axis.coordinates();

    let mut values = Array2::default((n, n));
    for i in 0..n {
        for j in 0..n {
            let sum = p[i] + p[j];
            let d = p[i] - p[j];
            values[(i, j)] = Complex64::new((-sum * sum / sp2 - d * d / sm2).exp(), 0.0);
        }
    }

    let k = 2.0 * PI / 808e-9;
    TwoPhotonAmplitude::new(values, axis.clone(), axis.clone(), k, k)?.normalize()
}

/// The sampling check from the module contract: the axis must cover the model
/// support and resolve its narrowest feature.
fn axis_checks(axis: &Axis, support: f64, feature: f64) -> Result<()> {
    if axis.domain() != Domain::Momentum {
        return Err(Error::DomainMismatch { expected: "momentum", got: axis.domain().name() });
    }
    axis.require_centered()?;
    if axis.halfwidth() < support {
        return Err(Error::Config(format!(
            "axis too narrow: half-extent {:.3e} rad/m < model support {support:.3e} rad/m",
            axis.halfwidth()
        )));
    }
    if axis.spacing() > feature {
        return Err(Error::Config(format!(
            "axis too coarse: spacing {:.3e} rad/m > narrowest model feature {feature:.3e} rad/m",
            axis.spacing()
        )));
    }
    Ok(())
}

/// Reference defaults: 404 nm pump focused to w0 = 245 um on a 2 mm crystal,
/// emission selected 2.0 degrees off axis.
impl Default for SpdcParams {
    fn default() -> Self {
        let lambda_pump = 404e-9;
        let k_photon = PI / lambda_pump; // half of 2 pi / lambda
        SpdcParams {
            lambda_pump,
            crystal_length: 2e-3,
            pump_waist: 245e-6,
            emission_offset: k_photon * (2.0_f64.to_radians()).sin(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn collinear() -> SpdcParams {
        SpdcParams { emission_offset: 0.0, ..SpdcParams::default() }
    }

    #[test]
    fn peak_at_origin() {
        let params = SpdcParams::default();
        let axis = params.default_axis(256, 4.0).unwrap();
        let t = build_spdc(&params, &axis).unwrap();
        let n = axis.n();
        let center = t.values[(n / 2, n / 2)].norm();
        for v in t.values.iter() {
            assert!(v.norm() <= center + 1e-15);
        }
    }

    #[test]
    fn exchange_and_joint_parity_exact() {
        for params in [collinear(), SpdcParams::default()] {
            let axis = params.default_axis(256, 1.5).unwrap();
            let t = build_spdc(&params, &axis).unwrap();
            let n = axis.n();
            for i in 0..n {
                for j in 0..n {
                    assert_eq!(t.values[(i, j)], t.values[(j, i)], "exchange at ({i},{j})");
                }
            }
            // joint parity about the center sample; row/col 0 has no partner
            for i in 1..n {
                for j in 1..n {
                    assert_eq!(
                        t.values[(i, j)],
                        t.values[(n - i, n - j)],
                        "parity at ({i},{j})"
                    );
                }
            }
        }
    }

    #[test]
    fn collinear_sinc_zero_matches_closed_form() {
        // independent evaluation of the zero condition L d^2/(4 k_p) = pi
        let params = collinear();
        let d0 = (4.0 * PI * params.k_pump() / params.crystal_length).sqrt();
        assert!((params.sinc_first_zero() - d0).abs() < 1e-9 * d0);
        assert!((d0 - 3.126e5).abs() < 0.002e5, "reference-parameter zero should be ~3.13e5 rad/m");

        // the built amplitude changes sign across d0 along the antidiagonal
        let axis = params.default_axis(1024, 4.0).unwrap();
        let t = build_spdc(&params, &axis).unwrap();
        let n = axis.n();
        let dp = axis.spacing();
        // along row i, col j with i + j = n (p = -q): d = 2 p_i
        let j_before = n / 2 + ((d0 / 2.0) / dp).floor() as usize;
        let j_after = j_before + 1;
        let a = t.values[(j_before, n - j_before)].re;
        let b = t.values[(j_after, n - j_after)].re;
        assert!(a > 0.0 && b < 0.0, "sinc sign change expected across d0 ({a:.3e}, {b:.3e})");
    }

    #[test]
    fn normalized_to_one() {
        let params = SpdcParams::default();
        let axis = params.default_axis(256, 4.0).unwrap();
        let t = build_spdc(&params, &axis).unwrap();
        assert!((t.norm() - 1.0).abs() < 1e-12);
        assert_eq!(t.z_label, 0.0);
    }

    #[test]
    fn too_narrow_axis_rejected() {
        let params = SpdcParams::default();
        let narrow = Axis::centered_from_halfwidth(64, 1e3, Domain::Momentum).unwrap();
        assert!(build_spdc(&params, &narrow).is_err());
    }

    #[test]
    fn too_coarse_axis_rejected() {
        let params = SpdcParams::default();
        // wide enough but with far too few samples to resolve the pump factor
        let coarse = Axis::centered_from_halfwidth(16, 4e6, Domain::Momentum).unwrap();
        assert!(build_spdc(&params, &coarse).is_err());
    }

    #[test]
    fn double_gaussian_separable_when_widths_equal() {
        let params = DoubleGaussianParams { sigma_plus: 2e4, sigma_minus: 2e4 };
        let axis = params.default_axis(64, 4.0).unwrap();
        let t = build_double_gaussian(&params, &axis).unwrap();
        assert!((params.schmidt_number() - 1.0).abs() < 1e-12);
        // separable: phi(p,q) phi(0,0) = phi(p,0) phi(0,q)
        let n = axis.n();
        let c = t.values[(n / 2, n / 2)];
        for i in (0..n).step_by(7) {
            for j in (0..n).step_by(7) {
                let lhs = t.values[(i, j)] * c;
                let rhs = t.values[(i, n / 2)] * t.values[(n / 2, j)];
                assert!((lhs - rhs).norm() <= 1e-12 * c.norm());
            }
        }
    }

    #[test]
    fn double_gaussian_width_swap_same_k() {
        let a = DoubleGaussianParams { sigma_plus: 1e4, sigma_minus: 2.5e5 };
        let b = DoubleGaussianParams { sigma_plus: 2.5e5, sigma_minus: 1e4 };
        assert!((a.schmidt_number() - b.schmidt_number()).abs() < 1e-12);
    }
}
