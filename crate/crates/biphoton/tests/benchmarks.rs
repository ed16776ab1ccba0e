//! Closed-form benchmarks: the double-Gaussian family (exact Schmidt data),
//! Hermite-Gauss mode shapes, the brute-force fit oracle, and the imaging /
//! Fourier mappings of the lens systems.

use num_complex::Complex64;

use biphoton::amplitude::Photon;
use biphoton::measures::{conditional, convolve_slit, fedorov_ratio, fit_gaussian, marginal, Fixing};
use biphoton::optics::{propagate_abcd, propagate_free, Abcd, Element};
use biphoton::schmidt::{decompose, fit_geometric, parity_classification, schmidt_number};
use biphoton::spdc::{build_double_gaussian, build_spdc, DoubleGaussianParams, SpdcParams};
use biphoton::{Axis, Distribution1D, Domain};

/// Exact Schmidt spectrum of the double-Gaussian amplitude:
/// `lambda_m = (1 - mu) mu^m` with `mu = ((r - 1)/(r + 1))^2`, r the width ratio.
fn mehler_spectrum(params: &DoubleGaussianParams, count: usize) -> Vec<f64> {
    let r = if params.sigma_minus >= params.sigma_plus {
        params.sigma_minus / params.sigma_plus
    } else {
        params.sigma_plus / params.sigma_minus
    };
    let mu = ((r - 1.0) / (r + 1.0)).powi(2);
    (0..count).map(|m| (1.0 - mu) * mu.powi(m as i32)).collect()
}

#[test]
fn double_gaussian_spectrum_matches_mehler_oracle() {
    let params = DoubleGaussianParams { sigma_plus: 4.0e3, sigma_minus: 1.0e5 };
    let axis = params.default_axis(1024, 4.0).unwrap();
    let t = build_double_gaussian(&params, &axis).unwrap();
    let dec = decompose(&t).unwrap();
    let oracle = mehler_spectrum(&params, 12);
    for (m, (got, want)) in dec.lambdas.iter().zip(&oracle).enumerate() {
        assert!(
            (got - want).abs() <= 1e-6 * want.max(1e-9),
            "lambda_{m}: {got:.9e} vs oracle {want:.9e}"
        );
    }
    // exact mode count: K = (r + 1/r)/2
    let k = schmidt_number(&dec);
    assert!((k - params.schmidt_number()).abs() < 1e-4 * k);
}

#[test]
fn double_gaussian_fedorov_equals_schmidt_number() {
    // sigma_minus / sigma_plus = 25: K and R agree within 1 percent
    let params = DoubleGaussianParams { sigma_plus: 4.0e3, sigma_minus: 1.0e5 };
    let axis = params.default_axis(1024, 4.0).unwrap();
    let t = build_double_gaussian(&params, &axis).unwrap();
    let k = schmidt_number(&decompose(&t).unwrap());
    let r = fedorov_ratio(&t, Photon::Signal, 0.0, Fixing::AtMarginalPeak).unwrap().ratio;
    assert!(
        (k - r).abs() <= 0.01 * k,
        "K = {k:.6} vs R = {r:.6}: relative gap {:.4}",
        (k - r).abs() / k
    );
    // cross-checked against the purity oracle
    let p = biphoton::schmidt::purity(&t);
    assert!((1.0 / k - p).abs() <= 1e-6 * p);
}

#[test]
fn double_gaussian_width_swap_preserves_spectrum() {
    let a = DoubleGaussianParams { sigma_plus: 5.0e3, sigma_minus: 8.0e4 };
    let b = DoubleGaussianParams { sigma_plus: 8.0e4, sigma_minus: 5.0e3 };
    let axis = a.default_axis(512, 4.0).unwrap();
    let da = decompose(&build_double_gaussian(&a, &axis).unwrap()).unwrap();
    let db = decompose(&build_double_gaussian(&b, &axis).unwrap()).unwrap();
    for m in 0..10 {
        assert!(
            (da.lambdas[m] - db.lambdas[m]).abs() <= 1e-9,
            "lambda_{m} differs across the width swap"
        );
    }
}

#[test]
fn double_gaussian_modes_are_hermite_gauss() {
    let params = DoubleGaussianParams { sigma_plus: 4.0e3, sigma_minus: 1.0e5 };
    let axis = params.default_axis(1024, 4.0).unwrap();
    let t = build_double_gaussian(&params, &axis).unwrap();
    let dec = decompose(&t).unwrap();

    // waist from a Gaussian fit to |mode 0|^2
    let n = dec.modes_signal.nrows();
    let dx = dec.axis_signal.spacing();
    let w0: Vec<f64> = (0..n).map(|j| dec.modes_signal[(j, 0)].norm_sqr()).collect();
    let fit = fit_gaussian(&Distribution1D::new(dec.axis_signal.clone(), w0).unwrap()).unwrap();
    assert!(fit.converged);
    let waist = fit.sigma * std::f64::consts::SQRT_2;

    let hermite = |order: usize, xi: f64| -> f64 {
        match order {
            0 => 1.0,
            1 => 2.0 * xi,
            2 => 4.0 * xi * xi - 2.0,
            _ => unreachable!(),
        }
    };
    for order in 0..3 {
        let mut hg: Vec<f64> = (0..n)
            .map(|j| {
                let xi = dec.axis_signal.coordinate(j) / waist;
                hermite(order, xi) * (-xi * xi / 2.0).exp()
            })
            .collect();
        let norm = (hg.iter().map(|v| v * v).sum::<f64>() * dx).sqrt();
        for v in &mut hg {
            *v /= norm;
        }
        let overlap: Complex64 = (0..n)
            .map(|j| dec.modes_signal[(j, order)].conj() * hg[j])
            .sum::<Complex64>()
            * dx;
        assert!(
            overlap.norm() > 0.999,
            "mode {order}: |<phi, HG>| = {:.6}",
            overlap.norm()
        );
    }
}

#[test]
fn double_gaussian_parities_alternate() {
    let params = DoubleGaussianParams { sigma_plus: 4.0e3, sigma_minus: 1.0e5 };
    let axis = params.default_axis(512, 4.0).unwrap();
    let t = build_double_gaussian(&params, &axis).unwrap();
    let dec = decompose(&t).unwrap();
    let parity = parity_classification(&dec).unwrap();
    for (m, p) in parity.iter().take(6).enumerate() {
        let expected = if m % 2 == 0 { 1.0 } else { -1.0 };
        assert_eq!(p.sign, expected, "mode {m} parity");
        assert!(p.score > 0.999, "mode {m} score {}", p.score);
    }
}

#[test]
fn double_gaussian_geometric_fit() {
    let params = DoubleGaussianParams { sigma_plus: 4.0e3, sigma_minus: 1.0e5 };
    let axis = params.default_axis(1024, 4.0).unwrap();
    let t = build_double_gaussian(&params, &axis).unwrap();
    let dec = decompose(&t).unwrap();
    let fit = fit_geometric(&dec.lambdas, 10).unwrap();
    assert!(fit.rms_residual < 1e-3, "relative rms {:.3e}", fit.rms_residual);
    assert!((fit.alpha - params.geometric_ratio()).abs() < 1e-4);
    assert!(fit.lambda0_consistency < 1e-4);

    // geometric decay consequence: sum of alternating differences equals 1/K
    let alt: f64 = dec
        .lambdas
        .iter()
        .enumerate()
        .map(|(m, l)| if m % 2 == 0 { *l } else { -*l })
        .sum();
    let k = schmidt_number(&dec);
    assert!(
        (alt - 1.0 / k).abs() <= 1e-3 / k,
        "sum(lambda_even - lambda_odd) = {alt:.6e} vs 1/K = {:.6e}",
        1.0 / k
    );
}

#[test]
fn fedorov_invariant_under_grid_rescale() {
    // magnifying both detection axes must not move R
    let params = DoubleGaussianParams { sigma_plus: 4.0e3, sigma_minus: 8.0e4 };
    let axis = params.default_axis(512, 4.0).unwrap();
    let t = build_double_gaussian(&params, &axis).unwrap().to_position().unwrap();
    let r1 = fedorov_ratio(&t, Photon::Signal, 0.0, Fixing::AtMarginalPeak).unwrap().ratio;

    let m = 3.0;
    let scaled_axis =
        Axis::centered(t.axis_signal().n(), m * t.axis_signal().spacing(), Domain::Position)
            .unwrap();
    let scaled = biphoton::TwoPhotonAmplitude::new(
        t.values.mapv(|v| v / m),
        scaled_axis.clone(),
        scaled_axis,
        t.k_signal,
        t.k_idler,
    )
    .unwrap();
    assert!((scaled.norm() - 1.0).abs() < 1e-10);
    let r2 = fedorov_ratio(&scaled, Photon::Signal, 0.0, Fixing::AtMarginalPeak).unwrap().ratio;
    assert!((r1 - r2).abs() <= 0.005 * r1, "R {r1:.5} vs rescaled {r2:.5}");
}

#[test]
fn fit_matches_brute_force_oracle_on_sinc_marginal() {
    // far-field marginal of the reference source is sinc^2-shaped;
    // the Gauss-Newton fit must land on the same least-squares optimum as an
    // exhaustive 4D lattice search refined twice
    let params = SpdcParams::default();
    let axis = params.default_axis(512, 4.0).unwrap();
    let t = build_spdc(&params, &axis).unwrap();
    let marg = marginal(&t, Photon::Signal).unwrap();
    let fit = fit_gaussian(&marg).unwrap();
    assert!(fit.converged);

    let x = marg.axis.coordinates();
    let y = &marg.weights;
    let sse = |a: f64, x0: f64, s: f64, b: f64| -> f64 {
        x.iter()
            .zip(y)
            .map(|(&xi, &yi)| {
                let m = a * (-(xi - x0) * (xi - x0) / (2.0 * s * s)).exp() + b;
                (yi - m) * (yi - m)
            })
            .sum()
    };

    let peak = y.iter().cloned().fold(0.0, f64::max);
    let hw = marg.axis.halfwidth();
    let mut best = (f64::INFINITY, 0.0, 0.0, 0.0, 0.0);
    let mut ranges = (
        (0.5 * peak, 1.5 * peak),
        (-0.1 * hw, 0.1 * hw),
        (0.01 * hw, 0.5 * hw),
        (-0.1 * peak, 0.1 * peak),
    );
    // the objective is nearly flat along a thin diagonal (sigma, A, B)
    // valley; shrink gently so the box-minimum tracks the valley floor
    // instead of locking onto an early graze point
    for _refine in 0..16 {
        let steps = 17;
        let grid = |lo: f64, hi: f64, i: usize| lo + (hi - lo) * i as f64 / (steps - 1) as f64;
        for ia in 0..steps {
            let a = grid(ranges.0 .0, ranges.0 .1, ia);
            for ix in 0..steps {
                let x0 = grid(ranges.1 .0, ranges.1 .1, ix);
                for is in 0..steps {
                    let s = grid(ranges.2 .0, ranges.2 .1, is);
                    for ib in 0..steps {
                        let b = grid(ranges.3 .0, ranges.3 .1, ib);
                        let v = sse(a, x0, s, b);
                        if v < best.0 {
                            best = (v, a, x0, s, b);
                        }
                    }
                }
            }
        }
        // shrink every range around the incumbent
        let shrink = |lo: f64, hi: f64, c: f64| {
            let w = (hi - lo) / 3.0;
            (c - w, c + w)
        };
        ranges = (
            shrink(ranges.0 .0, ranges.0 .1, best.1),
            shrink(ranges.1 .0, ranges.1 .1, best.2),
            shrink(ranges.2 .0, ranges.2 .1, best.3.max(1e-6 * hw)),
            shrink(ranges.3 .0, ranges.3 .1, best.4),
        );
    }
    // the iterative optimum must not be worse than the lattice optimum
    let fit_sse = sse(fit.amplitude, fit.center, fit.sigma, fit.offset);
    assert!(
        fit_sse <= best.0 * (1.0 + 1e-6),
        "fit sse {:.8e} (sigma {:.5e}) vs lattice sse {:.8e} (sigma {:.5e})",
        fit_sse,
        fit.sigma,
        best.0,
        best.3
    );
    assert!(
        (fit.sigma - best.3.abs()).abs() <= 0.02 * best.3.abs(),
        "fit sigma {:.5e} vs brute-force {:.5e}",
        fit.sigma,
        best.3
    );
}

fn compact_dg() -> biphoton::TwoPhotonAmplitude {
    let params = DoubleGaussianParams { sigma_plus: 3.0e3, sigma_minus: 1.5e4 };
    let axis = Axis::centered(512, 500.0, Domain::Momentum).unwrap();
    build_double_gaussian(&params, &axis).unwrap()
}

#[test]
fn imaging_chain_reproduces_magnified_source() {
    // [FreeSpace(d_o), ThinLens(f), FreeSpace(d_i)] with the conjugate-plane
    // condition: output magnitude is the source rescaled by m = -d_i/d_o
    let t = compact_dg().to_position().unwrap();
    let f = 0.5;
    let d_o = 0.75;
    let d_i = 1.0 / (1.0 / f - 1.0 / d_o); // 1.5
    let sys = Abcd::from_elements(&[
        Element::FreeSpace(d_o),
        Element::ThinLens(f),
        Element::FreeSpace(d_i),
    ]);
    let mag = d_i / d_o;
    let out = propagate_abcd(&t, &sys, &sys).unwrap();

    let src_fit = fit_gaussian(&marginal(&t, Photon::Signal).unwrap()).unwrap();
    let out_fit = fit_gaussian(&marginal(&out, Photon::Signal).unwrap()).unwrap();
    assert!(src_fit.converged && out_fit.converged);
    assert!(
        (out_fit.sigma - mag * src_fit.sigma).abs() <= 0.01 * mag * src_fit.sigma,
        "imaged marginal width {:.5e} vs magnified source {:.5e}",
        out_fit.sigma,
        mag * src_fit.sigma
    );
    // conditional width scales the same way: |phi| reproduced up to scaling
    let src_cond = fit_gaussian(&conditional(&t, Photon::Signal, 0.0, 0.0).unwrap()).unwrap();
    let out_cond = fit_gaussian(&conditional(&out, Photon::Signal, 0.0, 0.0).unwrap()).unwrap();
    assert!(
        (out_cond.sigma - mag * src_cond.sigma).abs() <= 0.01 * mag * src_cond.sigma,
        "imaged conditional width {:.5e} vs {:.5e}",
        out_cond.sigma,
        mag * src_cond.sigma
    );
}

#[test]
fn fourier_chains_map_momentum_marginal_to_position() {
    // both Fourier-plane systems: [Lens(f), Free(f)] and [Free(f), Lens(f), Free(f)]
    let t = compact_dg();
    let k = t.k_signal;
    let f = 0.5;
    let mom_fit = fit_gaussian(&marginal(&t, Photon::Signal).unwrap()).unwrap();

    let pos = t.to_position().unwrap();
    for chain in [
        vec![Element::ThinLens(f), Element::FreeSpace(f)],
        vec![Element::FreeSpace(f), Element::ThinLens(f), Element::FreeSpace(f)],
    ] {
        let sys = Abcd::from_elements(&chain);
        assert!(sys.a.abs() < 1e-12, "Fourier system has A = 0");
        let out = propagate_abcd(&pos, &sys, &sys).unwrap();
        let out_fit = fit_gaussian(&marginal(&out, Photon::Signal).unwrap()).unwrap();
        // x = p f / k
        let expected = mom_fit.sigma * f / k;
        assert!(
            (out_fit.sigma - expected).abs() <= 0.01 * expected,
            "chain {chain:?}: {:.5e} vs {:.5e}",
            out_fit.sigma,
            expected
        );
    }
}

#[test]
fn collins_agrees_with_elementwise_free_space() {
    let t = compact_dg();
    let z = 0.35;
    let fixed = propagate_free(&t, z, z).unwrap().to_position().unwrap();
    let sys = Abcd::from_elements(&[Element::FreeSpace(z)]);
    let collins = propagate_abcd(&t.to_position().unwrap(), &sys, &sys).unwrap();

    let a = fit_gaussian(&marginal(&fixed, Photon::Signal).unwrap()).unwrap();
    let b = fit_gaussian(&marginal(&collins, Photon::Signal).unwrap()).unwrap();
    assert!(a.converged && b.converged);
    assert!(
        (a.sigma - b.sigma).abs() <= 1e-3 * a.sigma,
        "fixed-grid {:.6e} vs collins {:.6e}",
        a.sigma,
        b.sigma
    );
}

#[test]
fn schmidt_spectrum_invariant_under_chains() {
    let params = SpdcParams::default();
    let axis = params.default_axis(512, 4.0).unwrap();
    let t = build_spdc(&params, &axis).unwrap();
    let dec0 = decompose(&t).unwrap();
    let k0 = schmidt_number(&dec0);

    let pos = t.to_position().unwrap();
    for z in [0.5, 1.44] {
        let sys = Abcd::from_elements(&[
            Element::FreeSpace(0.7380952380952381),
            Element::ThinLens(0.5),
            Element::FreeSpace(z),
        ]);
        let out = propagate_abcd(&pos, &sys, &sys).unwrap();
        let dec = decompose(&out).unwrap();
        let k = schmidt_number(&dec);
        assert!(
            (k - k0).abs() <= 0.005 * k0,
            "K changed across the chain at z = {z}: {k0:.6} -> {k:.6}"
        );
        for m in 0..8 {
            assert!(
                (dec.lambdas[m] - dec0.lambdas[m]).abs() <= 0.005 * dec0.lambdas[m],
                "lambda_{m} changed at z = {z}"
            );
        }
    }

    // free-space propagation at fixed grid: modest distance for this grid
    let short = propagate_free(&t, 0.02, 0.02).unwrap();
    let k_short = schmidt_number(&decompose(&short).unwrap());
    assert!((k_short - k0).abs() <= 0.005 * k0);
}

#[test]
fn double_gaussian_fedorov_matches_abcd_beam_law_at_every_plane() {
    // Both rotated coordinates of the double-Gaussian state are Gaussian
    // beams with waists at the crystal, so the width at any plane follows
    // the ray-matrix law w_out^2 = A^2 w0^2 + B^2/(k w0)^2 and
    //
    //   R(z) = (w_u^2 + w_v^2) / (2 w_u w_v),
    //
    // a closed form covering far field, intermediate zone and image plane.
    let params = DoubleGaussianParams { sigma_plus: 4.0e3, sigma_minus: 4.0e4 };
    let axis = params.default_axis(512, 4.0).unwrap();
    let t = build_double_gaussian(&params, &axis).unwrap();
    let k = t.k_signal;
    let pos = t.to_position().unwrap();

    let lens_at = 0.7380952380952381;
    for z in [0.5, 0.9, 1.2, 1.44, 1.55, 1.6] {
        let sys = Abcd::from_elements(&[
            Element::FreeSpace(lens_at),
            Element::ThinLens(0.5),
            Element::FreeSpace(z),
        ]);
        let out = propagate_abcd(&pos, &sys, &sys).unwrap();
        let r = fedorov_ratio(&out, Photon::Signal, 0.0, Fixing::AtMarginalPeak).unwrap().ratio;

        let beam = |sigma: f64| -> f64 {
            let w0 = 1.0 / sigma;
            (sys.a * sys.a * w0 * w0 + sys.b * sys.b / (k * k * w0 * w0)).sqrt()
        };
        let (wu, wv) = (beam(params.sigma_plus), beam(params.sigma_minus));
        let analytic = (wu * wu + wv * wv) / (2.0 * wu * wv);
        assert!(
            (r - analytic).abs() <= 0.01 * analytic,
            "z = {z}: fitted R = {r:.5} vs beam-law R = {analytic:.5}"
        );
    }
}

#[test]
fn slit_convolution_widens_distribution() {
    let axis = Axis::centered(256, 1.0e-5, Domain::Position).unwrap();
    let weights: Vec<f64> = axis
        .coordinates()
        .iter()
        .map(|x| (-(x / 3.0e-4) * (x / 3.0e-4)).exp())
        .collect();
    let d = Distribution1D::new(axis, weights).unwrap();
    let smeared = convolve_slit(&d, 2.0e-4).unwrap();
    let f0 = fit_gaussian(&d).unwrap();
    let f1 = fit_gaussian(&smeared).unwrap();
    assert!(f1.sigma > f0.sigma);
    // integral preserved by the boxcar away from edges
    assert!((smeared.integral() - d.integral()).abs() < 1e-6 * d.integral());
}
