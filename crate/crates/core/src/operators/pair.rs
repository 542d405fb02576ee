//! Galerkin matrix of a Gaussian pair interaction in the single-particle basis.
//!
//! For a Gaussian `A exp(−|x₁−x₂|²/(2σ_x²) − (z₁−z₂)²/(2σ_z²))` the matrix
//! factorises into a transverse part, itself a product over the two axes, and
//! a longitudinal part that conserves total momentum:
//!
//! `⟨a₁p₁, a₂p₂|V|a₁'p₁', a₂'p₂'⟩ = A · K_x[a₁a₂; a₁'a₂'] · ĝ(k_{p₁} − k_{p₁'})/L · δ_{p₁+p₂, p₁'+p₂'}`
//!
//! with `ĝ(κ) = σ_z √(2π) e^{−κ²σ_z²/2}`, the exact Fourier coefficient of the
//! periodised Gaussian. The axis integrals are evaluated exactly by Gauss–Hermite
//! quadrature after rotating to centre-of-mass and relative coordinates.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::potential::ScaledGaussian;
use crate::spectral::{gauss_hermite, hermite_polynomials, SingleParticleBasis};
use crate::tensor::Shape;
use crate::Result;

/// `K[n, n', m, m'] = ∫∫ ψ_n(u) ψ_{n'}(v) e^{−(u−v)²/(2σ²)} ψ_m(u) ψ_{m'}(v) du dv`
/// for `n, n', m, m' < levels`, row-major.
pub fn axis_pair_matrix(levels: usize, sigma: f64) -> Result<Vec<f64>> {
    // Q = u² + v² + (u−v)²/(2σ²) = ξ² + λ²η² with ξ, η the rotated coordinates.
    let lambda = (1.0 + 1.0 / (sigma * sigma)).sqrt();
    let rule = gauss_hermite(2 * levels + 4)?;
    let l = levels;
    let mut out = vec![0.0; l.pow(4)];
    for (&xi, &wi) in rule.nodes.iter().zip(&rule.weights) {
        for (&t, &wj) in rule.nodes.iter().zip(&rule.weights) {
            let eta = t / lambda;
            let u = (xi + eta) / std::f64::consts::SQRT_2;
            let v = (xi - eta) / std::f64::consts::SQRT_2;
            let pu = hermite_polynomials(l, u);
            let pv = hermite_polynomials(l, v);
            let w = wi * wj / lambda;
            for n in 0..l {
                for np in 0..l {
                    let a = w * pu[n] * pv[np];
                    for m in 0..l {
                        let b = a * pu[m];
                        let base = ((n * l + np) * l + m) * l;
                        for mp in 0..l {
                            out[base + mp] += b * pv[mp];
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// `Q[n, n', m, m'] = ∫ ψ_n ψ_{n'} ψ_m ψ_{m'} dx` for `n, n', m, m' < levels`, row-major.
pub fn axis_delta_matrix(levels: usize) -> Result<Vec<f64>> {
    // The integrand is a degree ≤ 4(levels − 1) polynomial times e^{−2x²}.
    let rule = gauss_hermite(2 * levels + 2)?;
    let l = levels;
    let mut out = vec![0.0; l.pow(4)];
    for (&y, &w) in rule.nodes.iter().zip(&rule.weights) {
        let p = hermite_polynomials(l, y / std::f64::consts::SQRT_2);
        let w = w / std::f64::consts::SQRT_2;
        for n in 0..l {
            for np in 0..l {
                let a = w * p[n] * p[np];
                for m in 0..l {
                    let b = a * p[m];
                    let base = ((n * l + np) * l + m) * l;
                    for mp in 0..l {
                        out[base + mp] += b * p[mp];
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Product of two axis factors over the 2D modes, row-major in `(a₁a₂; a₁'a₂')`.
fn transverse_factor(basis: &SingleParticleBasis, k1: &[f64]) -> Vec<f64> {
    let mx = basis.mx();
    let levels = basis.x_basis().max_level();
    let modes = basis.x_basis().modes();
    let idx = |n: usize, np: usize, m: usize, mp: usize| ((n * levels + np) * levels + m) * levels + mp;
    let mut kx = vec![0.0; mx.pow(4)];
    for (a1, m1) in modes.iter().enumerate() {
        for (a2, m2) in modes.iter().enumerate() {
            for (b1, n1) in modes.iter().enumerate() {
                for (b2, n2) in modes.iter().enumerate() {
                    kx[((a1 * mx + a2) * mx + b1) * mx + b2] =
                        k1[idx(m1.n1, m2.n1, n1.n1, n2.n1)] * k1[idx(m1.n2, m2.n2, n1.n2, n2.n2)];
                }
            }
        }
    }
    kx
}

/// `T[a₁a₂; a₁'a₂'] = ∫_{ℝ²} φ_{a₁} φ_{a₂} φ_{a₁'} φ_{a₂'} dx` over the 2D modes.
pub fn transverse_delta_matrix(basis: &SingleParticleBasis) -> Result<Vec<f64>> {
    Ok(transverse_factor(basis, &axis_delta_matrix(basis.x_basis().max_level())?))
}

#[derive(Debug, Clone)]
struct PairTerm {
    /// `mx⁴` transverse factor, row-major in `(a₁a₂; a₁'a₂')`.
    kx: Vec<f64>,
    /// Longitudinal factor indexed by momentum transfer `q + M_z − 1`.
    gz: Vec<f64>,
}

/// Pair interaction operator acting on two-particle blocks `X[s₁][s₂]`.
#[derive(Debug, Clone)]
pub struct PairOperator {
    mx: usize,
    mz: usize,
    terms: Vec<PairTerm>,
}

impl PairOperator {
    /// Operator `scale · Σ_t V_t(r₁ − r₂)` for the given rescaled Gaussians.
    pub fn new(basis: &SingleParticleBasis, gaussians: &[ScaledGaussian], scale: f64) -> Result<Self> {
        let mx = basis.mx();
        let mz = basis.mz();
        let levels = basis.x_basis().max_level();
        let lz = basis.z_grid().box_length();
        let mut terms = Vec::new();
        for g in gaussians {
            if g.amplitude == 0.0 {
                continue;
            }
            let k1 = axis_pair_matrix(levels, g.sigma_x)?;
            let gz = (0..2 * mz - 1)
                .map(|i| {
                    let q = i as f64 - (mz - 1) as f64;
                    let kappa = 2.0 * PI * q / lz;
                    scale * g.amplitude * g.sigma_z * (2.0 * PI).sqrt()
                        * (-0.5 * kappa * kappa * g.sigma_z * g.sigma_z).exp()
                        / lz
                })
                .collect();
            terms.push(PairTerm {
                kx: transverse_factor(basis, &k1),
                gz,
            });
        }
        Ok(Self { mx, mz, terms })
    }

    /// Operator `scale · δ(r₁ − r₂)`, the `σ → 0` limit of a unit-mass Gaussian.
    pub fn delta(basis: &SingleParticleBasis, scale: f64) -> Result<Self> {
        let (mx, mz) = (basis.mx(), basis.mz());
        let k1 = axis_delta_matrix(basis.x_basis().max_level())?;
        let lz = basis.z_grid().box_length();
        let terms = if scale == 0.0 {
            Vec::new()
        } else {
            vec![PairTerm {
                kx: transverse_factor(basis, &k1),
                gz: vec![scale / lz; 2 * mz - 1],
            }]
        };
        Ok(Self { mx, mz, terms })
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.mx * self.mz
    }

    /// Matrix element `⟨s₁ s₂|V|t₁ t₂⟩`.
    pub fn element(&self, s1: usize, s2: usize, t1: usize, t2: usize) -> f64 {
        let (a1, p1) = (s1 / self.mz, s1 % self.mz);
        let (a2, p2) = (s2 / self.mz, s2 % self.mz);
        let (b1, q1) = (t1 / self.mz, t1 % self.mz);
        let (b2, q2) = (t2 / self.mz, t2 % self.mz);
        if p1 + p2 != q1 + q2 {
            return 0.0;
        }
        let mx = self.mx;
        let zi = p1 + self.mz - 1 - q1;
        self.terms
            .iter()
            .map(|t| t.kx[((a1 * mx + a2) * mx + b1) * mx + b2] * t.gz[zi])
            .sum()
    }

    /// `out += V x` for a two-particle block stored as `x[s₁ · d + s₂]`.
    pub fn apply_block(&self, x: &[Complex64], out: &mut [Complex64]) {
        let mx = self.mx;
        let mz = self.mz;
        let d = mx * mz;
        let mz2 = mz * mz;
        let zero = Complex64::new(0.0, 0.0);
        let mut y = vec![zero; mx * mx * mz2];
        for term in &self.terms {
            y.iter_mut().for_each(|v| *v = zero);
            for a1 in 0..mx {
                for a2 in 0..mx {
                    let ybase = (a1 * mx + a2) * mz2;
                    for p1 in 0..mz {
                        for p2 in 0..mz {
                            let tot = p1 + p2;
                            let lo = tot.saturating_sub(mz - 1);
                            let hi = tot.min(mz - 1);
                            let mut acc = zero;
                            for q1 in lo..=hi {
                                let g = term.gz[p1 + mz - 1 - q1];
                                acc += x[(a1 * mz + q1) * d + a2 * mz + (tot - q1)] * g;
                            }
                            y[ybase + p1 * mz + p2] = acc;
                        }
                    }
                }
            }
            let mx2 = mx * mx;
            for a in 0..mx2 {
                let (a1, a2) = (a / mx, a % mx);
                let row = &term.kx[a * mx2..(a + 1) * mx2];
                for p1 in 0..mz {
                    let obase = (a1 * mz + p1) * d + a2 * mz;
                    for p2 in 0..mz {
                        let mut acc = zero;
                        for (b, &k) in row.iter().enumerate() {
                            if k != 0.0 {
                                acc += y[b * mz2 + p1 * mz + p2] * k;
                            }
                        }
                        out[obase + p2] += acc;
                    }
                }
            }
        }
    }

    /// `Σ_{i<j} V(r_i − r_j) ψ` on an `N`-particle tensor.
    pub(crate) fn apply_all_pairs(&self, psi: &[Complex64], shape: Shape) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); psi.len()];
        if self.is_zero() {
            return out;
        }
        for i in 0..shape.n {
            for j in i + 1..shape.n {
                self.apply_pair_into(psi, shape, i, j, &mut out);
            }
        }
        out
    }

    /// `out += V(r_i − r_j) ψ`.
    pub(crate) fn apply_pair_into(&self, psi: &[Complex64], shape: Shape, i: usize, j: usize, out: &mut [Complex64]) {
        let d = shape.d;
        let (si, sj) = (shape.stride(i), shape.stride(j));
        let bases = shape.bases(&[i, j]);
        let blocks: Vec<Vec<Complex64>> = bases
            .par_iter()
            .map(|&base| {
                let mut x = vec![Complex64::new(0.0, 0.0); d * d];
                for s1 in 0..d {
                    for s2 in 0..d {
                        x[s1 * d + s2] = psi[base + s1 * si + s2 * sj];
                    }
                }
                let mut y = vec![Complex64::new(0.0, 0.0); d * d];
                self.apply_block(&x, &mut y);
                y
            })
            .collect();
        for (&base, y) in bases.iter().zip(&blocks) {
            for s1 in 0..d {
                for s2 in 0..d {
                    out[base + s1 * si + s2 * sj] += y[s1 * d + s2];
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::hermite_functions;

    /// Brute-force axis integral on a fine trapezoid grid.
    fn brute_axis(n: usize, np: usize, m: usize, mp: usize, sigma: f64) -> f64 {
        let h = 0.02;
        let pts: Vec<f64> = (-450..=450).map(|i| i as f64 * h).collect();
        let tab: Vec<Vec<f64>> = pts.iter().map(|&x| hermite_functions(4, x)).collect();
        let mut acc = 0.0;
        for (iu, &u) in pts.iter().enumerate() {
            for (iv, &v) in pts.iter().enumerate() {
                let g = (-(u - v) * (u - v) / (2.0 * sigma * sigma)).exp();
                acc += tab[iu][n] * tab[iu][m] * tab[iv][np] * tab[iv][mp] * g;
            }
        }
        acc * h * h
    }

    #[test]
    fn axis_matrix_matches_brute_force() {
        let sigma = 0.4;
        let k = axis_pair_matrix(4, sigma).unwrap();
        for &(n, np, m, mp) in &[(0, 0, 0, 0), (1, 0, 0, 1), (2, 1, 3, 0), (3, 3, 1, 1), (2, 0, 0, 0)] {
            let exact = k[((n * 4 + np) * 4 + m) * 4 + mp];
            let brute = brute_axis(n, np, m, mp, sigma);
            assert!((exact - brute).abs() < 1e-9, "{n}{np}{m}{mp}: {exact} vs {brute}");
        }
    }

    #[test]
    fn ground_axis_element_closed_form() {
        // ∫∫ π^{-1} e^{-u²-v²} e^{-(u-v)²/(2σ²)} = 1/√(1 + 1/σ²)
        for &sigma in &[0.05, 0.3, 2.0] {
            let k = axis_pair_matrix(2, sigma).unwrap();
            let expect = 1.0 / (1.0 + 1.0 / (sigma * sigma)).sqrt();
            assert!((k[0] - expect).abs() < 1e-13);
        }
    }

    #[test]
    fn delta_axis_matrix_is_the_narrow_gaussian_limit() {
        let q = axis_delta_matrix(4).unwrap();
        assert!((q[0] - 1.0 / (2.0 * PI).sqrt()).abs() < 1e-14);
        let sigma = 1e-4;
        let k = axis_pair_matrix(4, sigma).unwrap();
        let norm = sigma * (2.0 * PI).sqrt();
        for (a, b) in q.iter().zip(&k) {
            assert!((a - b / norm).abs() < 1e-7);
        }
    }

    #[test]
    fn block_apply_matches_elements() {
        let basis = SingleParticleBasis::new(2, 5, 8, 6.0).unwrap();
        let g = [ScaledGaussian {
            amplitude: -2.0,
            sigma_x: 0.6,
            sigma_z: 0.5,
        }];
        let op = PairOperator::new(&basis, &g, 0.5).unwrap();
        let d = basis.dim();
        let x: Vec<Complex64> = (0..d * d)
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let mut y = vec![Complex64::new(0.0, 0.0); d * d];
        op.apply_block(&x, &mut y);
        for s1 in 0..d {
            for s2 in 0..d {
                let mut acc = Complex64::new(0.0, 0.0);
                for t1 in 0..d {
                    for t2 in 0..d {
                        acc += x[t1 * d + t2] * op.element(s1, s2, t1, t2);
                    }
                }
                assert!((acc - y[s1 * d + s2]).norm() < 1e-12);
            }
        }
        // Real symmetric and exchange symmetric.
        assert!((op.element(3, 9, 10, 2) - op.element(10, 2, 3, 9)).abs() < 1e-15);
        assert!((op.element(3, 9, 10, 2) - op.element(9, 3, 2, 10)).abs() < 1e-15);
    }
}
