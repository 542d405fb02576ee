//! Orthonormal Hermite functions and Gauss–Hermite quadrature.

use std::f64::consts::PI;

use crate::{Error, Result};

/// Values `ψ₀(x) … ψ_{count-1}(x)` of the orthonormal Hermite functions
/// `ψ_n(x) = (2ⁿ n! √π)^{-1/2} H_n(x) e^{-x²/2}`.
pub fn hermite_functions(count: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return out;
    }
    let psi0 = PI.powf(-0.25) * (-0.5 * x * x).exp();
    out.push(psi0);
    if count == 1 {
        return out;
    }
    out.push(std::f64::consts::SQRT_2 * x * psi0);
    for n in 1..count - 1 {
        let nf = n as f64;
        let next = (2.0 / (nf + 1.0)).sqrt() * x * out[n] - (nf / (nf + 1.0)).sqrt() * out[n - 1];
        out.push(next);
    }
    out
}

/// Normalised Hermite polynomials `p_n(x) = ψ_n(x) e^{x²/2}` for `n < count`.
pub fn hermite_polynomials(count: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return out;
    }
    out.push(PI.powf(-0.25));
    if count == 1 {
        return out;
    }
    out.push(std::f64::consts::SQRT_2 * x * out[0]);
    for n in 1..count - 1 {
        let nf = n as f64;
        let next = (2.0 / (nf + 1.0)).sqrt() * x * out[n] - (nf / (nf + 1.0)).sqrt() * out[n - 1];
        out.push(next);
    }
    out
}

/// First derivatives `ψ_n'(x)` for `n < count`.
pub fn hermite_derivatives(count: usize, x: f64) -> Vec<f64> {
    let psi = hermite_functions(count + 1, x);
    (0..count)
        .map(|n| {
            let nf = n as f64;
            let lower = if n > 0 { (nf / 2.0).sqrt() * psi[n - 1] } else { 0.0 };
            lower - ((nf + 1.0) / 2.0).sqrt() * psi[n + 1]
        })
        .collect()
}

/// Second derivatives `ψ_n''(x)`, from the ladder relations.
pub fn hermite_second_derivatives(count: usize, x: f64) -> Vec<f64> {
    let psi = hermite_functions(count + 2, x);
    (0..count)
        .map(|n| {
            let nf = n as f64;
            let mut acc = -(nf + 0.5) * psi[n];
            if n >= 2 {
                acc += 0.5 * (nf * (nf - 1.0)).sqrt() * psi[n - 2];
            }
            acc += 0.5 * ((nf + 1.0) * (nf + 2.0)).sqrt() * psi[n + 2];
            acc
        })
        .collect()
}

/// Gauss–Hermite rule for `∫ f(x) e^{-x²} dx`.
///
/// `scaled_weights[i] = weights[i] · e^{x_i²}` integrate `∫ g(x) dx` directly
/// for `g = polynomial · e^{-x²}`; they stay finite for large node counts.
#[derive(Debug, Clone)]
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub scaled_weights: Vec<f64>,
}

const NEWTON_MAX_ITER: usize = 100;

/// Nodes and weights of the `n`-point Gauss–Hermite rule (ascending nodes).
pub fn gauss_hermite(n: usize) -> Result<GaussHermite> {
    if n == 0 {
        return Err(Error::Quadrature("zero nodes requested".into()));
    }
    let pim4 = PI.powf(-0.25);
    let nf = n as f64;
    let m = n.div_ceil(2);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let mut scaled = vec![0.0; n];
    let mut z = 0.0f64;
    for i in 0..m {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * nodes[n - 1],
            3 => 1.91 * z - 0.91 * nodes[n - 2],
            _ => 2.0 * z - nodes[n - i + 1],
        };
        let mut converged = false;
        let mut pp = 0.0;
        let mut p_prev = 0.0;
        for _ in 0..NEWTON_MAX_ITER {
            // Normalised Hermite polynomials (ψ_n without the Gaussian factor).
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            p_prev = p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                converged = true;
                break;
            }
        }
        if !converged || !z.is_finite() {
            return Err(Error::Quadrature(format!(
                "Newton iteration for root {i} of the {n}-point rule did not converge"
            )));
        }
        let w = 2.0 / (pp * pp);
        // w e^{z²} = 1 / (n ψ_{n-1}(z)²) with ψ_{n-1}(z) = p_prev e^{-z²/2}.
        let psi_prev = p_prev * (-0.5 * z * z).exp();
        let ws = 1.0 / (nf * psi_prev * psi_prev);
        let ws = if ws.is_finite() { ws } else { w * (z * z).exp() };
        nodes[n - 1 - i] = z;
        nodes[i] = -z;
        weights[n - 1 - i] = w;
        weights[i] = w;
        scaled[n - 1 - i] = ws;
        scaled[i] = ws;
    }
    Ok(GaussHermite {
        nodes,
        weights,
        scaled_weights: scaled,
    })
}
