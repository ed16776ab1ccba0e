//! Intensity distributions, Gaussian fitting, the Fedorov ratio and the EPR
//! uncertainty witness.
//!
//! Widths are always the sigma of a fitted Gaussian (with a free constant
//! offset), not raw second moments: the sinc-model distributions have fat
//! tails whose second moments are not meaningful on a finite grid.

use crate::amplitude::{Distribution1D, Photon, TwoPhotonAmplitude};
use crate::error::{Error, Result};
use crate::grid::Domain;

/// Result of a 1D Gaussian least-squares fit
/// `A exp(-(x - x0)^2 / (2 sigma^2)) + B`.
#[derive(Debug, Clone, Copy)]
pub struct GaussianFit {
    pub amplitude: f64,
    pub center: f64,
    pub sigma: f64,
    pub offset: f64,
    pub rms_residual: f64,
    pub converged: bool,
}

/// Fedorov ratio data: unconditional width, conditional width, their ratio,
/// and the coordinate where the conditioning slit sat.
#[derive(Debug, Clone, Copy)]
pub struct FedorovResult {
    pub width_unconditional: f64,
    pub width_conditional: f64,
    pub ratio: f64,
    pub fixed_coordinate: f64,
}

/// Where to place the conditioning slit.
#[derive(Debug, Clone, Copy)]
pub enum Fixing {
    /// At the fitted peak of the conditioning arm's marginal (the measurement
    /// convention: the slit sits at the maximum intensity).
    AtMarginalPeak,
    /// At an explicit coordinate.
    At(f64),
}

/// EPR uncertainty witness: conditional position and momentum widths of the
/// source state and their product, against the bound 1/2 (in m * rad/m units).
#[derive(Debug, Clone, Copy)]
pub struct EprWitness {
    pub delta_x: f64,
    pub delta_p: f64,
    pub product: f64,
    pub violated: bool,
}

fn other(photon: Photon) -> Photon {
    match photon {
        Photon::Signal => Photon::Idler,
        Photon::Idler => Photon::Signal,
    }
}

/// Marginal intensity of one photon: `w_j = sum_other |phi|^2 * spacing_other`.
pub fn marginal(tpa: &TwoPhotonAmplitude, photon: Photon) -> Result<Distribution1D> {
    let d_other = tpa.axis(other(photon)).spacing();
    let n = tpa.axis(photon).n();
    let mut weights = vec![0.0; n];
    match photon {
        Photon::Signal => {
            for (i, row) in tpa.values.outer_iter().enumerate() {
                weights[i] = row.iter().map(|v| v.norm_sqr()).sum::<f64>() * d_other;
            }
        }
        Photon::Idler => {
            for row in tpa.values.outer_iter() {
                for (j, v) in row.iter().enumerate() {
                    weights[j] += v.norm_sqr() * d_other;
                }
            }
        }
    }
    Distribution1D::new(tpa.axis(photon).clone(), weights)
}

/// Conditional intensity of `photon` with the partner fixed at `fixed_value`,
/// averaged over the grid columns covered by a slit of width `slit_width`
/// centered there (a single column when `slit_width < spacing`). The result
/// is renormalized to unit integral.
pub fn conditional(
    tpa: &TwoPhotonAmplitude,
    photon: Photon,
    fixed_value: f64,
    slit_width: f64,
) -> Result<Distribution1D> {
    if slit_width < 0.0 {
        return Err(Error::Config(format!("slit width must be >= 0, got {slit_width}")));
    }
    let cond_axis = tpa.axis(other(photon));
    let center_idx = cond_axis.nearest_index(fixed_value)?;
    let spacing = cond_axis.spacing();
    let half_cells = (slit_width / (2.0 * spacing)).floor() as usize;
    let lo = center_idx.saturating_sub(half_cells);
    let hi = (center_idx + half_cells).min(cond_axis.n() - 1);

    let n = tpa.axis(photon).n();
    let mut weights = vec![0.0; n];
    let cols = (hi - lo + 1) as f64;
    match photon {
        Photon::Signal => {
            for (i, row) in tpa.values.outer_iter().enumerate() {
                weights[i] = (lo..=hi).map(|j| row[j].norm_sqr()).sum::<f64>() / cols;
            }
        }
        Photon::Idler => {
            for (j, w) in weights.iter_mut().enumerate() {
                *w = (lo..=hi).map(|i| tpa.values[(i, j)].norm_sqr()).sum::<f64>() / cols;
            }
        }
    }
    Ok(Distribution1D::new(tpa.axis(photon).clone(), weights)?.normalized())
}

/// Boxcar convolution with a slit of width `width`; kernel length is the odd
/// cell count `2 floor(width / (2 spacing)) + 1`, so widths below one spacing
/// leave the data unchanged. Edges renormalize over the included cells.
pub fn convolve_slit(dist: &Distribution1D, width: f64) -> Result<Distribution1D> {
    if width < 0.0 {
        return Err(Error::Config(format!("slit width must be >= 0, got {width}")));
    }
    let spacing = dist.axis.spacing();
    let half = (width / (2.0 * spacing)).floor() as usize;
    if half == 0 {
        return Ok(dist.clone());
    }
    let n = dist.weights.len();
    let mut out = vec![0.0; n];
    for (j, o) in out.iter_mut().enumerate() {
        let lo = j.saturating_sub(half);
        let hi = (j + half).min(n - 1);
        *o = dist.weights[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64;
    }
    Distribution1D::new(dist.axis.clone(), out)
}

/// Least-squares Gaussian fit with offset, initialized from sample moments and
/// refined by damped Gauss-Newton steps. `converged` is false when the
/// relative parameter change never drops below 1e-8 within 200 iterations.
pub fn fit_gaussian(dist: &Distribution1D) -> Result<GaussianFit> {
    let x: Vec<f64> = dist.axis.coordinates();
    let y = &dist.weights;
    let n = y.len();
    if n < 8 {
        return Err(Error::Config(format!("gaussian fit needs >= 8 samples, got {n}")));
    }
    let (min, max) = y.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
        (lo.min(v), hi.max(v))
    });
    if !(max > min) {
        // flat data: no peak to fit
        return Ok(GaussianFit {
            amplitude: 0.0,
            center: 0.0,
            sigma: 0.0,
            offset: min,
            rms_residual: 0.0,
            converged: false,
        });
    }

    // moment initialization on the background-subtracted weights
    let w: Vec<f64> = y.iter().map(|v| (v - min).max(0.0)).collect();
    let wsum: f64 = w.iter().sum();
    let x0 = w.iter().zip(&x).map(|(wi, xi)| wi * xi).sum::<f64>() / wsum;
    let var = w.iter().zip(&x).map(|(wi, xi)| wi * (xi - x0) * (xi - x0)).sum::<f64>() / wsum;
    let mut p = [max - min, x0, var.sqrt().max(dist.axis.spacing()), min];

    let sse = |p: &[f64; 4]| -> f64 {
        x.iter()
            .zip(y)
            .map(|(&xi, &yi)| {
                let e = (-(xi - p[1]) * (xi - p[1]) / (2.0 * p[2] * p[2])).exp();
                let r = yi - (p[0] * e + p[3]);
                r * r
            })
            .sum()
    };

    let mut lambda = 1e-3;
    let mut current = sse(&p);
    let mut converged = false;
    // characteristic scales keep the relative-change test meaningful for
    // parameters whose optimum is zero (typically the offset)
    let char_scale = [max - min, dist.axis.halfwidth(), dist.axis.halfwidth(), max - min];
    for _ in 0..200 {
        // residuals and Jacobian of the model
        let mut jtj = [[0.0f64; 4]; 4];
        let mut jtr = [0.0f64; 4];
        let s2 = p[2] * p[2];
        for (&xi, &yi) in x.iter().zip(y) {
            let dx = xi - p[1];
            let e = (-dx * dx / (2.0 * s2)).exp();
            let model = p[0] * e + p[3];
            let r = yi - model;
            let j = [e, p[0] * e * dx / s2, p[0] * e * dx * dx / (s2 * p[2]), 1.0];
            for a in 0..4 {
                jtr[a] += j[a] * r;
                for b in 0..4 {
                    jtj[a][b] += j[a] * j[b];
                }
            }
        }
        let mut damped = jtj;
        for (a, row) in damped.iter_mut().enumerate() {
            row[a] *= 1.0 + lambda;
        }
        let Some(step) = solve4(&damped, &jtr) else {
            lambda *= 10.0;
            if lambda > 1e12 {
                break;
            }
            continue;
        };
        // a negligible proposed step means the parameters are stationary,
        // whether or not it improves the residual
        let rel_change = (0..4)
            .map(|a| step[a].abs() / (p[a].abs() + 1e-3 * char_scale[a]))
            .fold(0.0f64, f64::max);
        let mut trial = p;
        for a in 0..4 {
            trial[a] += step[a];
        }
        trial[2] = trial[2].abs().max(1e-3 * dist.axis.spacing());
        let trial_sse = sse(&trial);
        if trial_sse <= current {
            p = trial;
            current = trial_sse;
            lambda = (lambda * 0.3).max(1e-12);
        } else {
            lambda *= 10.0;
            if lambda > 1e12 {
                break;
            }
        }
        if rel_change < 1e-8 {
            converged = true;
            break;
        }
    }

    Ok(GaussianFit {
        amplitude: p[0],
        center: p[1],
        sigma: p[2].abs(),
        offset: p[3],
        rms_residual: (current / n as f64).sqrt(),
        converged,
    })
}

fn solve4(a: &[[f64; 4]; 4], b: &[f64; 4]) -> Option<[f64; 4]> {
    let mut m = *a;
    let mut rhs = *b;
    for col in 0..4 {
        let mut piv = col;
        for row in col + 1..4 {
            if m[row][col].abs() > m[piv][col].abs() {
                piv = row;
            }
        }
        if m[piv][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, piv);
        rhs.swap(col, piv);
        for row in col + 1..4 {
            let f = m[row][col] / m[col][col];
            let pivot_row = m[col];
            for (k, cell) in m[row].iter_mut().enumerate().skip(col) {
                *cell -= f * pivot_row[k];
            }
            rhs[row] -= f * rhs[col];
        }
    }
    let mut x = [0.0; 4];
    for i in (0..4).rev() {
        let mut s = rhs[i];
        for k in i + 1..4 {
            s -= m[i][k] * x[k];
        }
        x[i] = s / m[i][i];
    }
    Some(x)
}

fn fit_converged(dist: &Distribution1D, what: &str) -> Result<GaussianFit> {
    let fit = fit_gaussian(dist)?;
    if !fit.converged {
        return Err(Error::FitNonConvergence(format!(
            "{what}: gaussian fit did not converge (rms residual {:.3e})",
            fit.rms_residual
        )));
    }
    Ok(fit)
}

/// Fedorov ratio R = (fitted marginal sigma) / (fitted conditional sigma).
///
/// In the position domain both distributions are convolved with the detection
/// slit before fitting; momentum-domain analysis (the source plane) uses the
/// bare distributions.
pub fn fedorov_ratio(
    tpa: &TwoPhotonAmplitude,
    photon: Photon,
    slit_width: f64,
    fixing: Fixing,
) -> Result<FedorovResult> {
    let with_slit = tpa.domain() == Domain::Position && slit_width > 0.0;
    let smooth = |d: &Distribution1D| -> Result<Distribution1D> {
        if with_slit {
            convolve_slit(d, slit_width)
        } else {
            Ok(d.clone())
        }
    };

    let marg = smooth(&marginal(tpa, photon)?)?;
    let marg_fit = fit_converged(&marg, "unconditional distribution")?;

    let fixed = match fixing {
        Fixing::At(v) => v,
        Fixing::AtMarginalPeak => {
            let cond_marg = smooth(&marginal(tpa, other(photon))?)?;
            fit_converged(&cond_marg, "conditioning-arm marginal")?.center
        }
    };

    let cond = smooth(&conditional(tpa, photon, fixed, slit_width)?)?;
    let cond_fit = fit_converged(&cond, "conditional distribution")?;

    Ok(FedorovResult {
        width_unconditional: marg_fit.sigma,
        width_conditional: cond_fit.sigma,
        ratio: marg_fit.sigma / cond_fit.sigma,
        fixed_coordinate: fixed,
    })
}

/// EPR witness on the source state (`z_label = 0`): conditional position and
/// momentum widths at the respective marginal peaks, and the product against
/// the separability bound `delta_x * delta_p >= 1/2`.
pub fn epr_witness(tpa: &TwoPhotonAmplitude) -> Result<EprWitness> {
    if tpa.z_label != 0.0 {
        return Err(Error::Config(format!(
            "EPR witness applies to the source state; z_label = {} m",
            tpa.z_label
        )));
    }
    let (pos, mom) = match tpa.domain() {
        Domain::Momentum => (tpa.to_position()?, tpa.clone()),
        Domain::Position => (tpa.clone(), tpa.to_momentum()?),
    };
    // source-plane analysis: no slit convolution in either representation
    let cond_width = |state: &TwoPhotonAmplitude| -> Result<f64> {
        let peak = fit_converged(&marginal(state, Photon::Idler)?, "idler marginal")?.center;
        let cond = conditional(state, Photon::Signal, peak, 0.0)?;
        Ok(fit_converged(&cond, "conditional distribution")?.sigma)
    };
    let delta_x = cond_width(&pos)?;
    let delta_p = cond_width(&mom)?;
    let product = delta_x * delta_p;
    Ok(EprWitness { delta_x, delta_p, product, violated: product < 0.5 })
}
