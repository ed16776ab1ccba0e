//! Paraxial propagation of the two-photon amplitude through per-arm chains of
//! free space and thin lenses.
//!
//! Two routes are provided.
//!
//! * Element-wise phase masks on a fixed grid (`propagate_free`, `apply_lens`,
//!   `apply_chain`): faithful to the textbook transfer functions, but only
//!   valid while the quadratic phases stay sampled on the grid — every mask is
//!   guarded by the aliasing check and refuses to run otherwise.
//! * A single-step Collins propagator (`propagate_abcd`): folds a whole arm
//!   chain into its ray matrix and lands directly on the detection plane with
//!   a rescaled output grid. This is the route that can reach the far field,
//!   where the physical beam outgrows any fixed source grid. Near an image
//!   plane (B -> 0) it switches to the exact scaling map plus a residual
//!   free-space chirp; the two methods' validity regions overlap.

use num_complex::Complex64;
use rustfft::FftDirection;
use std::f64::consts::PI;

use crate::amplitude::{centered_dft_axis, Photon, TwoPhotonAmplitude};
use crate::error::{Error, Result};
use crate::grid::{Axis, Domain};

/// One element of an optical chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Element {
    /// Free-space propagation by a nonnegative distance (m).
    FreeSpace(f64),
    /// Ideal thin lens of focal length f (m), f != 0.
    ThinLens(f64),
}

impl Element {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Element::FreeSpace(z) if z < 0.0 || !z.is_finite() => {
                Err(Error::Config(format!("free-space distance must be >= 0, got {z}")))
            }
            Element::ThinLens(f) if f == 0.0 || !f.is_finite() => {
                Err(Error::Config("lens focal length must be nonzero".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn abcd(&self) -> Abcd {
        match *self {
            Element::FreeSpace(z) => Abcd { a: 1.0, b: z, c: 0.0, d: 1.0 },
            Element::ThinLens(f) => Abcd { a: 1.0, b: 0.0, c: -1.0 / f, d: 1.0 },
        }
    }
}

/// Ordered element lists for the two arms. Empty lists are the identity.
#[derive(Debug, Clone, Default)]
pub struct ArmChain {
    pub signal: Vec<Element>,
    pub idler: Vec<Element>,
}

impl ArmChain {
    /// The same chain in both arms.
    pub fn symmetric(elements: Vec<Element>) -> Self {
        ArmChain { signal: elements.clone(), idler: elements }
    }

    pub fn validate(&self) -> Result<()> {
        for el in self.signal.iter().chain(self.idler.iter()) {
            el.validate()?;
        }
        Ok(())
    }
}

/// Paraxial ray matrix, det = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Abcd {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Abcd {
    pub fn identity() -> Self {
        Abcd { a: 1.0, b: 0.0, c: 0.0, d: 1.0 }
    }

    /// `self` applied after `first`.
    pub fn after(&self, first: &Abcd) -> Abcd {
        Abcd {
            a: self.a * first.a + self.b * first.c,
            b: self.a * first.b + self.b * first.d,
            c: self.c * first.a + self.d * first.c,
            d: self.c * first.b + self.d * first.d,
        }
    }

    /// Fold an element list, left to right, into one matrix.
    pub fn from_elements(elements: &[Element]) -> Abcd {
        elements
            .iter()
            .fold(Abcd::identity(), |acc, el| el.abcd().after(&acc))
    }
}

/// Phase increment between adjacent samples at the grid edge for the
/// quadratic phase `alpha * u^2`.
fn edge_phase_step(alpha: f64, edge: f64, spacing: f64) -> f64 {
    2.0 * alpha.abs() * edge * spacing
}

fn check_sampling(context: &'static str, alpha: f64, axis: &Axis) -> Result<()> {
    let step = edge_phase_step(alpha, axis.halfwidth(), axis.spacing());
    if step > PI {
        Err(Error::SamplingViolation { context, phase_step: step })
    } else {
        Ok(())
    }
}

/// Free-space transfer over `z_signal` / `z_idler` meters as a momentum-domain
/// phase mask `exp(-i p^2 z / (2k))` on the fixed grid. Returns the amplitude
/// in the caller's original domain.
pub fn propagate_free(
    tpa: &TwoPhotonAmplitude,
    z_signal: f64,
    z_idler: f64,
) -> Result<TwoPhotonAmplitude> {
    if z_signal < 0.0 || z_idler < 0.0 {
        return Err(Error::Config("propagation distances must be >= 0".into()));
    }
    let original = tpa.domain();
    let mut state = match original {
        Domain::Momentum => tpa.clone(),
        Domain::Position => tpa.to_momentum()?,
    };
    for (photon, z) in [(Photon::Signal, z_signal), (Photon::Idler, z_idler)] {
        if z == 0.0 {
            continue;
        }
        let k = state.wavenumber(photon);
        let alpha = z / (2.0 * k);
        check_sampling("free-space propagation", alpha, state.axis(photon))?;
        state.apply_axis_phase(photon, |p| Complex64::from_polar(1.0, -alpha * p * p));
    }
    state.z_label += z_signal;
    match original {
        Domain::Momentum => Ok(state),
        Domain::Position => state.to_position(),
    }
}

/// Ideal thin-lens phase `exp(-i k x^2 / (2f))` on the selected arm(s),
/// applied in the position domain; returns the caller's original domain.
pub fn apply_lens(tpa: &TwoPhotonAmplitude, f: f64, arm: LensArm) -> Result<TwoPhotonAmplitude> {
    Element::ThinLens(f).validate()?;
    let original = tpa.domain();
    let mut state = match original {
        Domain::Position => tpa.clone(),
        Domain::Momentum => tpa.to_position()?,
    };
    let photons: &[Photon] = match arm {
        LensArm::Signal => &[Photon::Signal],
        LensArm::Idler => &[Photon::Idler],
        LensArm::Both => &[Photon::Signal, Photon::Idler],
    };
    for &photon in photons {
        let k = state.wavenumber(photon);
        let alpha = k / (2.0 * f);
        check_sampling("thin lens", alpha, state.axis(photon))?;
        state.apply_axis_phase(photon, |x| Complex64::from_polar(1.0, -alpha * x * x));
    }
    match original {
        Domain::Position => Ok(state),
        Domain::Momentum => state.to_momentum(),
    }
}

/// Arm selector for `apply_lens`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LensArm {
    Signal,
    Idler,
    Both,
}

/// Sequential element-wise application of a chain, left to right per arm.
pub fn apply_chain(tpa: &TwoPhotonAmplitude, chain: &ArmChain) -> Result<TwoPhotonAmplitude> {
    chain.validate()?;
    let mut state = tpa.clone();
    for el in &chain.signal {
        state = match *el {
            Element::FreeSpace(z) => propagate_free(&state, z, 0.0)?,
            Element::ThinLens(f) => apply_lens(&state, f, LensArm::Signal)?,
        };
    }
    for el in &chain.idler {
        state = match *el {
            Element::FreeSpace(z) => propagate_free(&state, 0.0, z)?,
            Element::ThinLens(f) => apply_lens(&state, f, LensArm::Idler)?,
        };
    }
    Ok(state)
}

/// Apply a whole per-arm ABCD system in one step (Collins integral), landing
/// on the output plane in the position representation with per-arm rescaled
/// axes. The input may be in either domain.
pub fn propagate_abcd(
    tpa: &TwoPhotonAmplitude,
    system_signal: &Abcd,
    system_idler: &Abcd,
) -> Result<TwoPhotonAmplitude> {
    let mut state = match tpa.domain() {
        Domain::Position => tpa.clone(),
        Domain::Momentum => tpa.to_position()?,
    };
    state.axis_signal().require_centered()?;
    state.axis_idler().require_centered()?;

    let k_s = state.k_signal;
    let k_i = state.k_idler;
    let axis_s = apply_arm_abcd(&mut state, Photon::Signal, system_signal, k_s)?;
    let axis_i = apply_arm_abcd(&mut state, Photon::Idler, system_idler, k_i)?;
    let mut out = TwoPhotonAmplitude::new(
        std::mem::take(&mut state.values),
        axis_s,
        axis_i,
        k_s,
        k_i,
    )?;
    out.z_label = tpa.z_label;
    Ok(out)
}

/// One arm of the Collins step. Mutates the values along `photon`'s axis and
/// returns that arm's output axis.
fn apply_arm_abcd(
    state: &mut TwoPhotonAmplitude,
    photon: Photon,
    sys: &Abcd,
    k: f64,
) -> Result<Axis> {
    let axis = state.axis(photon).clone();
    let n = axis.n();
    let dxi = axis.spacing();
    let edge = axis.halfwidth();

    if *sys == Abcd::identity() {
        return Ok(axis);
    }

    // Direct Collins step is valid while its input chirp stays sampled.
    let collins_ok = sys.b != 0.0 && {
        let alpha_in = k * sys.a / (2.0 * sys.b);
        edge_phase_step(alpha_in, edge, dxi) <= PI
    };

    if collins_ok {
        let b = sys.b;
        let alpha_in = k * sys.a / (2.0 * b);
        state.apply_axis_phase(photon, |xi| Complex64::from_polar(1.0, alpha_in * xi * xi));

        let direction = if b > 0.0 { FftDirection::Forward } else { FftDirection::Inverse };
        let dx_out = 2.0 * PI * b.abs() / (k * n as f64 * dxi);
        let scale = dxi * (k / (2.0 * PI * b.abs())).sqrt();
        let ax_index = if photon == Photon::Signal { 0 } else { 1 };
        centered_dft_axis(&mut state.values, ax_index, direction, scale);

        let out_axis = Axis::centered(n, dx_out, Domain::Position)?;
        // The output quadratic phase may be undersampled at extreme planes;
        // it is even in x, so every downstream quantity (intensities, port
        // interference, Schmidt weights, the inverted overlap) is blind to it.
        let alpha_out = k * sys.d / (2.0 * b);
        apply_phase_on_axis(state, photon, &out_axis, |x| {
            Complex64::from_polar(1.0, alpha_out * x * x)
        });
        return Ok(out_axis);
    }

    // Near-image route: M = FreeSpace(delta) * M0 with M0 = [[1/D, 0], [C, D]],
    // delta = B/D. The B = 0 part is an exact coordinate scaling by m = 1/D
    // with an even phase; the residual is a momentum chirp on the scaled grid.
    if sys.d == 0.0 {
        return Err(Error::SamplingViolation {
            context: "collins step (B too small, D = 0 leaves no scaling route)",
            phase_step: f64::INFINITY,
        });
    }
    let m = 1.0 / sys.d;
    let delta = sys.b / sys.d;
    let out_axis = Axis::centered(n, m.abs() * dxi, Domain::Position)?;
    let conj = out_axis.conjugate();
    let chirp_alpha = delta / (2.0 * k);
    let step = edge_phase_step(chirp_alpha, conj.halfwidth(), conj.spacing());
    if step > PI {
        return Err(Error::SamplingViolation {
            context: "residual free-space chirp after image-plane scaling",
            phase_step: step,
        });
    }

    if m < 0.0 {
        reverse_axis(state, photon);
    }
    let amp = Complex64::new(1.0 / m.abs().sqrt(), 0.0);
    state.values.mapv_inplace(|v| v * amp);
    let phase_alpha = k * sys.c * sys.d / 2.0;
    apply_phase_on_axis(state, photon, &out_axis, |x| {
        Complex64::from_polar(1.0, phase_alpha * x * x)
    });

    if delta != 0.0 {
        let ax_index = if photon == Photon::Signal { 0 } else { 1 };
        let fwd_scale = out_axis.spacing() / (2.0 * PI).sqrt();
        centered_dft_axis(&mut state.values, ax_index, FftDirection::Forward, fwd_scale);
        apply_phase_on_axis(state, photon, &conj, |p| {
            Complex64::from_polar(1.0, -chirp_alpha * p * p)
        });
        let inv_scale = conj.spacing() / (2.0 * PI).sqrt();
        centered_dft_axis(&mut state.values, ax_index, FftDirection::Inverse, inv_scale);
    }
    Ok(out_axis)
}

/// Multiply along `photon`'s axis using coordinates from `axis` (which may
/// differ from the axis currently stored on the state).
fn apply_phase_on_axis<F>(state: &mut TwoPhotonAmplitude, photon: Photon, axis: &Axis, factor: F)
where
    F: Fn(f64) -> Complex64,
{
    let fs: Vec<Complex64> = (0..axis.n()).map(|j| factor(axis.coordinate(j))).collect();
    match photon {
        Photon::Signal => {
            for (j, mut row) in state.values.outer_iter_mut().enumerate() {
                let f = fs[j];
                row.mapv_inplace(|v| v * f);
            }
        }
        Photon::Idler => {
            for mut row in state.values.outer_iter_mut() {
                for (v, f) in row.iter_mut().zip(&fs) {
                    *v *= *f;
                }
            }
        }
    }
}

/// Index reversal `j -> (n - j) mod n` along one axis (coordinate x -> -x on a
/// centered grid; the j = 0 edge sample maps to itself).
pub(crate) fn reverse_axis(state: &mut TwoPhotonAmplitude, photon: Photon) {
    let (rows, cols) = (state.values.nrows(), state.values.ncols());
    match photon {
        Photon::Signal => {
            for i in 1..=(rows - 1) / 2 {
                for j in 0..cols {
                    let a = state.values[(i, j)];
                    state.values[(i, j)] = state.values[(rows - i, j)];
                    state.values[(rows - i, j)] = a;
                }
            }
        }
        Photon::Idler => {
            for i in 0..rows {
                for j in 1..=(cols - 1) / 2 {
                    let a = state.values[(i, j)];
                    state.values[(i, j)] = state.values[(i, cols - j)];
                    state.values[(i, cols - j)] = a;
                }
            }
        }
    }
}
