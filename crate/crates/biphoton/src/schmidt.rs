//! Schmidt decomposition of the discretized amplitude, the Schmidt number,
//! mode parity, the geometric-spectrum fit, the inverted first-order-coherence
//! overlap, and the SVD-free purity oracle.

use faer::{c64, Mat};
use ndarray::Array2;
use num_complex::Complex64;

use crate::amplitude::{Photon, TwoPhotonAmplitude};
use crate::error::{Error, Result};
use crate::grid::Axis;

/// Eigenvalues below this are treated as factorization noise and truncated.
pub const LAMBDA_TRUNCATION: f64 = 1e-12;

/// Schmidt data: descending eigenvalues summing to one and the grid-orthonormal
/// mode functions of both photons (one column per mode,
/// `sum |phi_n|^2 spacing = 1`).
#[derive(Debug, Clone)]
pub struct SchmidtDecomposition {
    pub lambdas: Vec<f64>,
    pub modes_signal: Array2<Complex64>,
    pub modes_idler: Array2<Complex64>,
    pub axis_signal: Axis,
    pub axis_idler: Axis,
}

/// Parity of one Schmidt mode under coordinate inversion.
#[derive(Debug, Clone, Copy)]
pub struct ModeParity {
    /// +1 or -1, the sign of the inversion expectation.
    pub sign: f64,
    /// |<phi|P|phi>|, 1 for definite parity.
    pub score: f64,
    /// Scores below 0.9 indicate parity mixing (degenerate eigenvalues).
    pub ambiguous: bool,
}

/// Least-squares fit of `lambda_m = lambda0 * alpha^m` in log space.
#[derive(Debug, Clone, Copy)]
pub struct GeometricFit {
    pub lambda0: f64,
    pub alpha: f64,
    /// Relative rms residual over the fitted modes.
    pub rms_residual: f64,
    pub n_modes_used: usize,
    /// |lambda0 - (1 - alpha)|: zero for an exactly geometric normalized spectrum.
    pub lambda0_consistency: f64,
}

/// Singular value decomposition of `phi * sqrt(dx_s dx_i)`.
pub fn decompose(tpa: &TwoPhotonAmplitude) -> Result<SchmidtDecomposition> {
    let norm = tpa.norm();
    if (norm - 1.0).abs() > 1e-8 {
        return Err(Error::Config(format!(
            "decompose requires a normalized amplitude (norm = {norm:.12}); call normalize() first"
        )));
    }
    let (n_s, n_i) = (tpa.values.nrows(), tpa.values.ncols());
    let scale = tpa.cell_area().sqrt();
    let m = Mat::from_fn(n_s, n_i, |i, j| {
        let v = tpa.values[(i, j)];
        c64::new(v.re * scale, v.im * scale)
    });
    let svd = m
        .thin_svd()
        .map_err(|e| Error::Factorization(format!("SVD did not converge: {e:?}")))?;

    let rank = n_s.min(n_i);
    let mut lambdas: Vec<f64> = (0..rank).map(|k| svd.S()[k].re * svd.S()[k].re).collect();
    let total: f64 = lambdas.iter().sum();
    for l in &mut lambdas {
        *l /= total;
    }

    let ds = tpa.axis_signal().spacing().sqrt();
    let di = tpa.axis_idler().spacing().sqrt();
    let mut modes_signal = Array2::default((n_s, rank));
    let mut modes_idler = Array2::default((n_i, rank));
    for k in 0..rank {
        for j in 0..n_s {
            let u = svd.U()[(j, k)];
            modes_signal[(j, k)] = Complex64::new(u.re, u.im) / ds;
        }
        for j in 0..n_i {
            // A = U S V^H: the idler mode function is conj(V column)
            let v = svd.V()[(j, k)];
            modes_idler[(j, k)] = Complex64::new(v.re, -v.im) / di;
        }
    }

    Ok(SchmidtDecomposition {
        lambdas,
        modes_signal,
        modes_idler,
        axis_signal: tpa.axis_signal().clone(),
        axis_idler: tpa.axis_idler().clone(),
    })
}

/// Effective mode count `K = 1 / sum lambda_n^2`, summing over eigenvalues
/// above the truncation floor.
pub fn schmidt_number(dec: &SchmidtDecomposition) -> f64 {
    1.0 / dec
        .lambdas
        .iter()
        .take_while(|l| **l >= LAMBDA_TRUNCATION)
        .map(|l| l * l)
        .sum::<f64>()
}

/// Purity of the reduced signal state, `tr rho_s^2`, by direct summation —
/// the SVD-free oracle for `1/K`.
pub fn purity(tpa: &TwoPhotonAmplitude) -> f64 {
    let (n_s, n_i) = (tpa.values.nrows(), tpa.values.ncols());
    let a = Mat::from_fn(n_s, n_i, |i, j| {
        let v = tpa.values[(i, j)];
        c64::new(v.re, v.im)
    });
    // rho_s = A A^H * dx_i; purity = sum |rho_s|^2 dx_s^2
    let rho = &a * a.adjoint();
    let di = tpa.axis_idler().spacing();
    let ds = tpa.axis_signal().spacing();
    let frob2: f64 = (0..n_s)
        .map(|i| (0..n_s).map(|j| rho[(i, j)].norm_sqr()).sum::<f64>())
        .sum();
    frob2 * di * di * ds * ds
}

/// `sum_x rho_s(x, -x) dx`: overlap of the signal's reduced state with its
/// spatially inverted copy. Representation-independent (inversion commutes
/// with the transform); requires centered axes.
pub fn g1_inverted_overlap(tpa: &TwoPhotonAmplitude) -> Result<Complex64> {
    tpa.axis_signal().require_centered()?;
    let n_s = tpa.values.nrows();
    let weight = tpa.axis_signal().spacing() * tpa.axis_idler().spacing();
    let mut sum = Complex64::default();
    for j in 0..n_s {
        let jr = (n_s - j) % n_s;
        let row = tpa.values.row(j);
        let row_inv = tpa.values.row(jr);
        for (a, b) in row.iter().zip(row_inv.iter()) {
            sum += a * b.conj();
        }
    }
    Ok(sum * weight)
}

/// Sign and definiteness of each signal mode under inversion:
/// `s_n = sum phi_n^*(x) phi_n(-x) dx`.
pub fn parity_classification(dec: &SchmidtDecomposition) -> Result<Vec<ModeParity>> {
    dec.axis_signal.require_centered()?;
    let n = dec.modes_signal.nrows();
    let dx = dec.axis_signal.spacing();
    let mut out = Vec::with_capacity(dec.lambdas.len());
    for k in 0..dec.lambdas.len() {
        let mut s = Complex64::default();
        for j in 0..n {
            let jr = (n - j) % n;
            s += dec.modes_signal[(j, k)].conj() * dec.modes_signal[(jr, k)];
        }
        let val = (s * dx).re;
        let score = val.abs();
        out.push(ModeParity {
            sign: if val >= 0.0 { 1.0 } else { -1.0 },
            score,
            ambiguous: score < 0.9,
        });
    }
    Ok(out)
}

/// Fit `log lambda_m` linearly in `m` over the first `n_modes` eigenvalues.
pub fn fit_geometric(lambdas: &[f64], n_modes: usize) -> Result<GeometricFit> {
    let usable = lambdas.iter().take(n_modes).take_while(|l| **l > 0.0).count();
    if n_modes < 3 || usable < 3 {
        return Err(Error::Config(format!(
            "geometric fit needs at least 3 positive eigenvalues, have {usable} of {n_modes} requested"
        )));
    }
    let logs: Vec<f64> = lambdas[..usable].iter().map(|l| l.ln()).collect();
    let m_mean = (usable - 1) as f64 / 2.0;
    let log_mean = logs.iter().sum::<f64>() / usable as f64;
    let mut num = 0.0;
    let mut den = 0.0;
    for (m, lg) in logs.iter().enumerate() {
        let dm = m as f64 - m_mean;
        num += dm * (lg - log_mean);
        den += dm * dm;
    }
    let slope = num / den;
    let intercept = log_mean - slope * m_mean;
    let alpha = slope.exp();
    let lambda0 = intercept.exp();
    let mut ss = 0.0;
    for (m, l) in lambdas[..usable].iter().enumerate() {
        let pred = lambda0 * alpha.powi(m as i32);
        let rel = (l - pred) / l;
        ss += rel * rel;
    }
    Ok(GeometricFit {
        lambda0,
        alpha,
        rms_residual: (ss / usable as f64).sqrt(),
        n_modes_used: usable,
        lambda0_consistency: (lambda0 - (1.0 - alpha)).abs(),
    })
}

/// Reconstruct `sum_n sqrt(lambda_n) phi_n(x_s) psi_n(x_i)` on the grid.
pub fn reconstruct(dec: &SchmidtDecomposition) -> Array2<Complex64> {
    let (n_s, n_i) = (dec.modes_signal.nrows(), dec.modes_idler.nrows());
    let mut out = Array2::default((n_s, n_i));
    for (k, l) in dec.lambdas.iter().enumerate() {
        let w = l.sqrt();
        for i in 0..n_s {
            let f = dec.modes_signal[(i, k)] * w;
            for j in 0..n_i {
                out[(i, j)] += f * dec.modes_idler[(j, k)];
            }
        }
    }
    out
}

/// Orthonormality defect of the first `m` modes of one arm:
/// `max |<phi_a, phi_b> - delta_ab|`.
pub fn orthonormality_defect(dec: &SchmidtDecomposition, photon: Photon, m: usize) -> f64 {
    let (modes, dx) = match photon {
        Photon::Signal => (&dec.modes_signal, dec.axis_signal.spacing()),
        Photon::Idler => (&dec.modes_idler, dec.axis_idler.spacing()),
    };
    let m = m.min(dec.lambdas.len());
    let n = modes.nrows();
    let mut worst: f64 = 0.0;
    for a in 0..m {
        for b in a..m {
            let mut s = Complex64::default();
            for j in 0..n {
                s += modes[(j, a)].conj() * modes[(j, b)];
            }
            let s = s * dx;
            let target = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((s - Complex64::new(target, 0.0)).norm());
        }
    }
    worst
}
