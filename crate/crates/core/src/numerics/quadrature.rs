use std::f64::consts::{LN_2, PI};

use crate::error::{Error, Result};

/// Gauss-Hermite rule size and the residual tolerance that decides whether
/// the rule is trusted or the adaptive fallback runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    node_count: usize,
    tolerance: f64,
}

impl QuadratureSpec {
    pub const MIN_NODES: usize = 8;

    pub fn new(node_count: usize, tolerance: f64) -> Result<Self> {
        if node_count < Self::MIN_NODES {
            return Err(Error::domain(format!(
                "quadrature needs at least {} nodes, got {node_count}",
                Self::MIN_NODES
            )));
        }
        if !(tolerance > 0.0) {
            return Err(Error::domain(format!(
                "quadrature tolerance must be positive, got {tolerance}"
            )));
        }
        Ok(QuadratureSpec {
            node_count,
            tolerance,
        })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            node_count: 96,
            tolerance: 1e-10,
        }
    }
}

/// Nodes and weights for `∫ e^{-x²} f(x) dx` over the real line.
#[derive(Debug, Clone)]
pub struct GaussHermite {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussHermite {
    /// Newton iteration on the orthonormal Hermite recurrence, seeded with
    /// the usual asymptotic root estimates.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        const PI_M4: f64 = 0.751_125_544_464_942_5; // π^{-1/4}
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        let mut z = 0.0f64;
        for i in 0..n.div_ceil(2) {
            z = match i {
                0 => (2.0 * nf + 1.0).sqrt() - 1.855_75 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
                1 => z - 1.14 * nf.powf(0.426) / z,
                2 => 1.86 * z - 0.86 * nodes[0],
                3 => 1.91 * z - 0.91 * nodes[1],
                _ => 2.0 * z - nodes[i - 2],
            };
            let mut pp = 0.0;
            for _ in 0..100 {
                let mut p1 = PI_M4;
                let mut p2 = 0.0;
                for j in 0..n {
                    let p3 = p2;
                    p2 = p1;
                    let jf = j as f64;
                    p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
                }
                pp = (2.0 * nf).sqrt() * p2;
                let z1 = z;
                z = z1 - p1 / pp;
                if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                    break;
                }
            }
            nodes[i] = z;
            nodes[n - 1 - i] = -z;
            weights[i] = 2.0 / (pp * pp);
            weights[n - 1 - i] = weights[i];
        }
        GaussHermite { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `∫ e^{-x²} f(x) dx`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        super::compensated_sum(
            self.nodes
                .iter()
                .zip(&self.weights)
                .map(|(&x, &w)| w * f(x)),
        )
    }

    /// `E[f(t)]` for a standard normal `t`.
    pub fn expect_standard_normal<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.integrate(|x| f(std::f64::consts::SQRT_2 * x)) / PI.sqrt()
    }
}

/// `log2(1 + exp(-2(1 + σt)/σ²))`: the BI-AWGN log-likelihood penalty for a
/// received value `1 + σt` when `+1` was sent.
pub fn awgn_integrand(t: f64, sigma: f64) -> f64 {
    let u = -2.0 * (1.0 + sigma * t) / (sigma * sigma);
    // softplus without overflow
    (u.max(0.0) + (-u.abs()).exp().ln_1p()) / LN_2
}

/// `E[log2(1 + e^{-2y/σ²})]` with `y = 1 + z`, `z ~ N(0, σ²)`; one minus
/// this is the BI-AWGN capacity with unit-energy BPSK.
pub fn awgn_expectation(sigma: f64) -> Result<f64> {
    awgn_expectation_with(sigma, &QuadratureSpec::default())
}

pub fn awgn_expectation_with(sigma: f64, spec: &QuadratureSpec) -> Result<f64> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::domain(format!(
            "sigma must be positive and finite, got {sigma}"
        )));
    }
    let f = |t: f64| awgn_integrand(t, sigma);
    let fine = GaussHermite::new(spec.node_count()).expect_standard_normal(f);
    let coarse_nodes = spec.node_count() * 3 / 4;
    let coarse = GaussHermite::new(coarse_nodes).expect_standard_normal(f);
    let residual = (fine - coarse).abs();
    if residual <= spec.tolerance() {
        return Ok(fine.clamp(0.0, 1.0));
    }
    simpson_expectation(sigma, spec.tolerance())
}

/// The adaptive Simpson fallback on its own.
pub(crate) fn simpson_expectation(sigma: f64, tolerance: f64) -> Result<f64> {
    let f = |t: f64| awgn_integrand(t, sigma);
    // The integrand has a kink of width ~σ/2 at t = -1/σ; integrate the
    // Gaussian-weighted integrand on [-12, 12] with a break there. Unit
    // panels keep the first Simpson estimate from sampling only the tails.
    let weighted = |t: f64| (-0.5 * t * t).exp() / (2.0 * PI).sqrt() * f(t);
    let kink = -1.0 / sigma;
    let mut breaks: Vec<f64> = (-12..=12).map(f64::from).collect();
    if kink > -12.0 && kink < 12.0 && kink.fract() != 0.0 {
        breaks.push(kink);
        breaks.sort_by(f64::total_cmp);
    }
    let pieces = breaks.len() - 1;
    let mut total = 0.0;
    for w in breaks.windows(2) {
        let (value, err, converged) =
            adaptive_simpson(&weighted, w[0], w[1], tolerance / pieces as f64);
        if !converged {
            return Err(Error::Numerical {
                message: format!("adaptive Simpson did not converge for sigma = {sigma}"),
                residual: err,
            });
        }
        total += value;
    }
    Ok(total.clamp(0.0, 1.0))
}

/// Returns (integral, error estimate, converged).
fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> (f64, f64, bool) {
    const MAX_DEPTH: u32 = 48;
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> (f64, f64, bool) {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        return (left + right + delta / 15.0, delta.abs() / 15.0, true);
    }
    if depth == 0 {
        return (left + right + delta / 15.0, delta.abs() / 15.0, false);
    }
    let (l, le, lc) = simpson_step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1);
    let (r, re, rc) = simpson_step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
    (l + r, le + re, lc && rc)
}
