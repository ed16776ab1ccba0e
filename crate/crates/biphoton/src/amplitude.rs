//! The two-photon amplitude container and its unitary changes of representation.
//!
//! The discrete transform between position and momentum grids carries a
//! `spacing/sqrt(2*pi)` scaling per axis so that it is exactly unitary:
//! `sum |phi|^2 dx_s dx_i` is preserved to machine precision, and
//! `to_position(to_momentum(t)) == t` up to rounding.

use ndarray::Array2;
use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};
use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{Axis, Domain};

/// Complex two-photon amplitude sampled on (signal, idler) grids.
///
/// Rows index the signal coordinate, columns the idler coordinate. Both axes
/// carry the same domain tag. `k_signal` / `k_idler` are the photon
/// wavenumbers (rad/m) used by propagation phases; `z_label` is bookkeeping
/// for the distance the state has traveled.
#[derive(Debug, Clone)]
pub struct TwoPhotonAmplitude {
    pub values: Array2<Complex64>,
    axis_signal: Axis,
    axis_idler: Axis,
    pub k_signal: f64,
    pub k_idler: f64,
    pub z_label: f64,
}

/// Which photon an operation addresses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Photon {
    Signal,
    Idler,
}

impl TwoPhotonAmplitude {
    pub fn new(
        values: Array2<Complex64>,
        axis_signal: Axis,
        axis_idler: Axis,
        k_signal: f64,
        k_idler: f64,
    ) -> Result<Self> {
        if axis_signal.domain() != axis_idler.domain() {
            return Err(Error::Config(format!(
                "signal axis is {} but idler axis is {}",
                axis_signal.domain().name(),
                axis_idler.domain().name()
            )));
        }
        if values.nrows() != axis_signal.n() || values.ncols() != axis_idler.n() {
            return Err(Error::Config(format!(
                "value matrix is {}x{} but axes are {}x{}",
                values.nrows(),
                values.ncols(),
                axis_signal.n(),
                axis_idler.n()
            )));
        }
        if !(k_signal > 0.0) || !(k_idler > 0.0) {
            return Err(Error::Config("photon wavenumbers must be positive".into()));
        }
        Ok(Self { values, axis_signal, axis_idler, k_signal, k_idler, z_label: 0.0 })
    }

    pub fn axis(&self, photon: Photon) -> &Axis {
        match photon {
            Photon::Signal => &self.axis_signal,
            Photon::Idler => &self.axis_idler,
        }
    }

    pub fn axis_signal(&self) -> &Axis {
        &self.axis_signal
    }

    pub fn axis_idler(&self) -> &Axis {
        &self.axis_idler
    }

    pub fn domain(&self) -> Domain {
        self.axis_signal.domain()
    }

    pub fn wavenumber(&self, photon: Photon) -> f64 {
        match photon {
            Photon::Signal => self.k_signal,
            Photon::Idler => self.k_idler,
        }
    }

    /// Area element `spacing_signal * spacing_idler`.
    pub fn cell_area(&self) -> f64 {
        self.axis_signal.spacing() * self.axis_idler.spacing()
    }

    pub fn require_domain(&self, domain: Domain) -> Result<()> {
        if self.domain() == domain {
            Ok(())
        } else {
            Err(Error::DomainMismatch { expected: domain.name(), got: self.domain().name() })
        }
    }

    /// `sum sum |phi|^2 dx_s dx_i` (compensated summation: the million-cell
    /// accumulation must stay well below the 1e-12 unitarity tolerance).
    pub fn norm(&self) -> f64 {
        kahan_sum(self.values.iter().map(|v| v.norm_sqr())) * self.cell_area()
    }

    /// Rescale so that `norm() == 1`. Errors on an all-zero amplitude.
    pub fn normalize(mut self) -> Result<Self> {
        let n = self.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::DegenerateInput(format!(
                "cannot normalize amplitude with norm {n}"
            )));
        }
        let scale = Complex64::new(1.0 / n.sqrt(), 0.0);
        self.values.mapv_inplace(|v| v * scale);
        Ok(self)
    }

    /// Unitary transform to the momentum representation on the conjugate grid.
    pub fn to_momentum(&self) -> Result<Self> {
        self.require_domain(Domain::Position)?;
        self.transform()
    }

    /// Unitary transform to the position representation on the conjugate grid.
    pub fn to_position(&self) -> Result<Self> {
        self.require_domain(Domain::Momentum)?;
        self.transform()
    }

    /// Representation change in the stated direction regardless of the current
    /// domain tag: position -> momentum uses `e^{-ipx}`, the inverse `e^{+ipx}`.
    fn transform(&self) -> Result<Self> {
        self.axis_signal.require_centered()?;
        self.axis_idler.require_centered()?;
        let direction = match self.domain() {
            Domain::Position => FftDirection::Forward,
            Domain::Momentum => FftDirection::Inverse,
        };
        let mut values = self.values.clone();
        let scale_s = self.axis_signal.spacing() / (2.0 * PI).sqrt();
        let scale_i = self.axis_idler.spacing() / (2.0 * PI).sqrt();
        transform_rows(&mut values, direction, scale_i);
        values = values.reversed_axes().as_standard_layout().into_owned();
        transform_rows(&mut values, direction, scale_s);
        values = values.reversed_axes().as_standard_layout().into_owned();
        Ok(Self {
            values,
            axis_signal: self.axis_signal.conjugate(),
            axis_idler: self.axis_idler.conjugate(),
            k_signal: self.k_signal,
            k_idler: self.k_idler,
            z_label: self.z_label,
        })
    }

    /// Multiply in place by `factor(coordinate)` along one photon's axis.
    pub fn apply_axis_phase<F>(&mut self, photon: Photon, factor: F)
    where
        F: Fn(f64) -> Complex64,
    {
        match photon {
            Photon::Signal => {
                for (j, mut row) in self.values.outer_iter_mut().enumerate() {
                    let f = factor(self.axis_signal.coordinate(j));
                    row.mapv_inplace(|v| v * f);
                }
            }
            Photon::Idler => {
                let fs: Vec<Complex64> =
                    (0..self.axis_idler.n()).map(|j| factor(self.axis_idler.coordinate(j))).collect();
                for mut row in self.values.outer_iter_mut() {
                    for (v, f) in row.iter_mut().zip(&fs) {
                        *v *= *f;
                    }
                }
            }
        }
    }
}

/// Kahan-compensated sum.
pub(crate) fn kahan_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for v in values {
        let y = v - c;
        let t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    sum
}

/// Centered unitary DFT along one axis of `values` (0 = signal, 1 = idler).
pub(crate) fn centered_dft_axis(
    values: &mut Array2<Complex64>,
    axis: usize,
    direction: FftDirection,
    scale: f64,
) {
    if axis == 1 {
        transform_rows(values, direction, scale);
    } else {
        let mut t = values.view().reversed_axes().as_standard_layout().into_owned();
        transform_rows(&mut t, direction, scale);
        values.assign(&t.reversed_axes());
    }
}

/// Centered unitary DFT applied to every row of `values`.
///
/// With coordinates `x_j = (j - n/2) dx` and `p_k = (k - n/2) dp`,
/// `dp = 2 pi/(n dx)`, the centered kernel `e^{-i p_k x_j}` equals the plain
/// DFT kernel conjugated by half-length rotations (n even), so the transform
/// is rotate -> FFT -> rotate with a unitary scale.
fn transform_rows(values: &mut Array2<Complex64>, direction: FftDirection, scale: f64) {
    let n = values.ncols();
    let fft = plan(n, direction);
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    let s = Complex64::new(scale, 0.0);
    for mut row in values.outer_iter_mut() {
        let slice = row.as_slice_mut().expect("rows are contiguous");
        slice.rotate_left(n / 2);
        fft.process_with_scratch(slice, &mut scratch);
        slice.rotate_left(n / 2);
        for v in slice.iter_mut() {
            *v *= s;
        }
    }
}

fn plan(n: usize, direction: FftDirection) -> Arc<dyn Fft<f64>> {
    FftPlanner::new().plan_fft(n, direction)
}

/// Nonnegative 1D sample weights over an axis.
#[derive(Debug, Clone)]
pub struct Distribution1D {
    pub axis: Axis,
    pub weights: Vec<f64>,
}

impl Distribution1D {
    pub fn new(axis: Axis, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != axis.n() {
            return Err(Error::Config(format!(
                "distribution has {} samples but the axis has {}",
                weights.len(),
                axis.n()
            )));
        }
        if weights.iter().any(|w| *w < 0.0 || !w.is_finite()) {
            return Err(Error::DegenerateInput("distribution weights must be nonnegative".into()));
        }
        let d = Self { axis, weights };
        let integral = d.integral();
        if !(integral > 0.0) || !integral.is_finite() {
            return Err(Error::DegenerateInput(format!(
                "distribution integral must be positive, got {integral}"
            )));
        }
        Ok(d)
    }

    /// `sum weights * spacing`.
    pub fn integral(&self) -> f64 {
        self.weights.iter().sum::<f64>() * self.axis.spacing()
    }

    pub fn normalized(mut self) -> Self {
        let integral = self.integral();
        for w in &mut self.weights {
            *w /= integral;
        }
        self
    }

    /// Index of the largest weight.
    pub fn peak_index(&self) -> usize {
        self.weights
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap_or(0)
    }
}
