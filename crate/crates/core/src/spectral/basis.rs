//! Truncated 2D Hermite eigenbasis (transverse) and the tensor product
//! single-particle basis.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::fourier::FourierGrid1D;
use super::hermite::{gauss_hermite, hermite_functions, GaussHermite};
use crate::{Error, Result};

/// Version of the mode ordering documented on [`SingleParticleBasis`].
pub const ORDERING_VERSION: u32 = 1;

/// A 2D Hermite mode `ψ_{n₁}(x₁) ψ_{n₂}(x₂)` of level `ℓ = n₁ + n₂`.
///
/// Within a level the degeneracy index `m` runs over `0..=ℓ` with `n₂ = m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HermiteMode {
    pub level: usize,
    pub m: usize,
    pub n1: usize,
    pub n2: usize,
}

#[derive(Debug, Clone)]
pub struct Hermite2DBasis {
    max_level: usize,
    modes: Vec<HermiteMode>,
    rule: GaussHermite,
}

impl Hermite2DBasis {
    /// Levels `0..max_level` with `quad_nodes` Gauss–Hermite nodes per axis.
    pub fn new(max_level: usize, quad_nodes: usize) -> Result<Self> {
        if max_level == 0 {
            return Err(Error::Domain("at least one Hermite level is required".into()));
        }
        if quad_nodes < max_level + 1 {
            return Err(Error::Domain(format!(
                "{quad_nodes} quadrature nodes cannot resolve {max_level} levels"
            )));
        }
        let mut modes = Vec::with_capacity(max_level * (max_level + 1) / 2);
        for level in 0..max_level {
            for m in 0..=level {
                modes.push(HermiteMode {
                    level,
                    m,
                    n1: level - m,
                    n2: m,
                });
            }
        }
        Ok(Self {
            max_level,
            modes,
            rule: gauss_hermite(quad_nodes)?,
        })
    }

    pub fn max_level(&self) -> usize {
        self.max_level
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn modes(&self) -> &[HermiteMode] {
        &self.modes
    }

    pub fn mode(&self, index: usize) -> HermiteMode {
        self.modes[index]
    }

    pub fn quad_nodes(&self) -> usize {
        self.rule.nodes.len()
    }

    pub fn rule(&self) -> &GaussHermite {
        &self.rule
    }

    /// Eigenvalue `2(ℓ+1)` of `−Δ_x + |x|²` on each mode.
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.modes.iter().map(|m| 2.0 * (m.level + 1) as f64).collect()
    }

    /// Value of mode `index` at `x ∈ ℝ²`.
    pub fn eval_mode(&self, index: usize, x: [f64; 2]) -> f64 {
        let mode = self.modes[index];
        let a = hermite_functions(mode.n1 + 1, x[0]);
        let b = hermite_functions(mode.n2 + 1, x[1]);
        a[mode.n1] * b[mode.n2]
    }

    /// Mode values on the `G × G` quadrature grid, row-major in `(a, b)`
    /// with `x = (node_a, node_b)`.
    pub fn quadrature_values(&self) -> Vec<Vec<f64>> {
        let top = self.max_level;
        let per_node: Vec<Vec<f64>> = self
            .rule
            .nodes
            .iter()
            .map(|&x| hermite_functions(top, x))
            .collect();
        let g = self.quad_nodes();
        self.modes
            .iter()
            .map(|mode| {
                let mut v = Vec::with_capacity(g * g);
                for a in 0..g {
                    for b in 0..g {
                        v.push(per_node[a][mode.n1] * per_node[b][mode.n2]);
                    }
                }
                v
            })
            .collect()
    }

    /// Quadrature weights of the 2D grid matching [`Self::quadrature_values`].
    pub fn quadrature_weights(&self) -> Vec<f64> {
        let w = &self.rule.scaled_weights;
        let mut out = Vec::with_capacity(w.len() * w.len());
        for &wa in w {
            for &wb in w {
                out.push(wa * wb);
            }
        }
        out
    }

    /// Empirical sup-norm ratio `‖f_ω‖_∞ / (ω^{1/2} ‖f_ω‖₂)` over random unit
    /// functions `f` of level `level`, where `f_ω(x) = ω^{1/2} f(ω^{1/2} x)`.
    ///
    /// The sup is taken on a grid of spacing `0.075/√ω` covering `|x_i| ≤ 6/√ω`
    /// and containing the origin. The pure product modes of the level are
    /// always included among the samples.
    pub fn hermite_linf_ratio(&self, level: usize, omega: f64, samples: usize, seed: u64) -> Result<f64> {
        if level >= self.max_level {
            return Err(Error::Domain(format!(
                "level {level} outside the truncation 0..{}",
                self.max_level
            )));
        }
        if !(omega >= 1.0) {
            return Err(Error::Domain(format!("omega = {omega} must be at least 1")));
        }
        hermite_linf_ratio(level, omega, samples, seed)
    }
}

const LINF_HALF_POINTS: usize = 80;
const LINF_EXTENT: f64 = 6.0;

/// See [`Hermite2DBasis::hermite_linf_ratio`]; this variant is not tied to a
/// truncation.
pub fn hermite_linf_ratio(level: usize, omega: f64, samples: usize, seed: u64) -> Result<f64> {
    if !(omega.is_finite() && omega > 0.0) {
        return Err(Error::Domain(format!("omega = {omega} must be positive")));
    }
    let root = omega.sqrt();
    let step = LINF_EXTENT / LINF_HALF_POINTS as f64 / root;
    // Sample points in the physical (unscaled) frame.
    let ys: Vec<f64> = (0..=2 * LINF_HALF_POINTS)
        .map(|j| (j as f64 - LINF_HALF_POINTS as f64) * step)
        .collect();
    let table: Vec<Vec<f64>> = ys.iter().map(|&y| hermite_functions(level + 1, root * y)).collect();
    let dim = level + 1;

    let mut coeff_sets: Vec<Vec<Complex64>> = (0..dim)
        .map(|m| {
            let mut c = vec![Complex64::new(0.0, 0.0); dim];
            c[m] = Complex64::new(1.0, 0.0);
            c
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let mut c: Vec<Complex64> = (0..dim)
            .map(|_| {
                Complex64::new(
                    StandardNormal.sample(&mut rng),
                    StandardNormal.sample(&mut rng),
                )
            })
            .collect();
        let norm = c.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        c.iter_mut().for_each(|v| *v /= norm);
        coeff_sets.push(c);
    }

    let mut best = 0.0f64;
    for c in &coeff_sets {
        for ta in &table {
            for tb in &table {
                let mut v = Complex64::new(0.0, 0.0);
                for (m, cm) in c.iter().enumerate() {
                    v += cm * (ta[level - m] * tb[m]);
                }
                // f_ω = ω^{1/2} f(ω^{1/2}·), divided by ω^{1/2}.
                let value = (v * root).norm() / root;
                best = best.max(value);
            }
        }
    }
    Ok(best)
}

/// Serializable description of a single-particle basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasisDescriptor {
    pub max_level: usize,
    pub quad_nodes: usize,
    pub z_points: usize,
    pub box_length: f64,
    pub ordering_version: u32,
}

/// Tensor product of the transverse Hermite modes and the longitudinal
/// Fourier modes.
///
/// Single-particle index `s = a · M_z + m` where `a` enumerates the Hermite
/// modes level by level and `m` is the centred Fourier slot.
#[derive(Debug, Clone)]
pub struct SingleParticleBasis {
    x: Hermite2DBasis,
    z: FourierGrid1D,
    wavenumbers: Vec<f64>,
}

impl SingleParticleBasis {
    pub fn new(max_level: usize, quad_nodes: usize, z_points: usize, box_length: f64) -> Result<Self> {
        let x = Hermite2DBasis::new(max_level, quad_nodes)?;
        let z = FourierGrid1D::new(box_length, z_points)?;
        let wavenumbers = z.wavenumbers();
        Ok(Self { x, z, wavenumbers })
    }

    /// Same as [`Self::new`] with the default `G_x = L + 3` quadrature nodes.
    pub fn with_defaults(max_level: usize, z_points: usize, box_length: f64) -> Result<Self> {
        Self::new(max_level, max_level + 3, z_points, box_length)
    }

    pub fn from_descriptor(d: &BasisDescriptor) -> Result<Self> {
        if d.ordering_version != ORDERING_VERSION {
            return Err(Error::Incompatible(format!(
                "basis ordering version {} (expected {ORDERING_VERSION})",
                d.ordering_version
            )));
        }
        Self::new(d.max_level, d.quad_nodes, d.z_points, d.box_length)
    }

    pub fn descriptor(&self) -> BasisDescriptor {
        BasisDescriptor {
            max_level: self.x.max_level(),
            quad_nodes: self.x.quad_nodes(),
            z_points: self.z.points(),
            box_length: self.z.box_length(),
            ordering_version: ORDERING_VERSION,
        }
    }

    pub fn x_basis(&self) -> &Hermite2DBasis {
        &self.x
    }

    pub fn z_grid(&self) -> &FourierGrid1D {
        &self.z
    }

    pub fn mx(&self) -> usize {
        self.x.len()
    }

    pub fn mz(&self) -> usize {
        self.z.points()
    }

    pub fn dim(&self) -> usize {
        self.mx() * self.mz()
    }

    pub fn index(&self, x_mode: usize, z_slot: usize) -> usize {
        x_mode * self.mz() + z_slot
    }

    pub fn split(&self, s: usize) -> (usize, usize) {
        (s / self.mz(), s % self.mz())
    }

    pub fn level(&self, s: usize) -> usize {
        self.x.mode(s / self.mz()).level
    }

    pub fn wavenumber(&self, s: usize) -> f64 {
        self.wavenumbers[s % self.mz()]
    }

    pub fn momentum_index(&self, s: usize) -> i64 {
        self.z.momentum_index(s % self.mz())
    }

    /// Diagonal of the one-body operator `−∂_z² + ω(−Δ_x + |x|²)`.
    pub fn one_body_diagonal(&self, omega: f64) -> Vec<f64> {
        (0..self.dim())
            .map(|s| {
                let k = self.wavenumber(s);
                k * k + omega * 2.0 * (self.level(s) + 1) as f64
            })
            .collect()
    }

    /// Diagonal of `S̃² = 1 − ∂_z² + ω(−Δ_x + |x|² − 2)`.
    pub fn stilde_sq_diagonal(&self, omega: f64) -> Vec<f64> {
        (0..self.dim())
            .map(|s| {
                let k = self.wavenumber(s);
                1.0 + k * k + omega * 2.0 * self.level(s) as f64
            })
            .collect()
    }

    /// Coefficients of `h ⊗ φ` where `φ` is given by its centred Fourier
    /// coefficients.
    pub fn embed_ground(&self, z_coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
        if z_coeffs.len() != self.mz() {
            return Err(Error::Shape {
                expected: self.mz(),
                got: z_coeffs.len(),
            });
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim()];
        out[..self.mz()].copy_from_slice(z_coeffs);
        Ok(out)
    }

    /// Number of points of the position grid (`G_x² · M_z`).
    pub fn grid_len(&self) -> usize {
        self.x.quad_nodes().pow(2) * self.mz()
    }

    /// Single-particle coefficients to values on the `(x₁, x₂, z)` grid,
    /// ordered with `z` fastest.
    pub fn to_grid(&self, coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
        if coeffs.len() != self.dim() {
            return Err(Error::Shape {
                expected: self.dim(),
                got: coeffs.len(),
            });
        }
        let mz = self.mz();
        let gx2 = self.x.quad_nodes().pow(2);
        let xvals = self.x.quadrature_values();
        let mut z_rows = Vec::with_capacity(self.mx());
        for a in 0..self.mx() {
            z_rows.push(self.z.inverse(&coeffs[a * mz..(a + 1) * mz])?);
        }
        let mut out = vec![Complex64::new(0.0, 0.0); gx2 * mz];
        for (a, row) in z_rows.iter().enumerate() {
            for (g, &xv) in xvals[a].iter().enumerate() {
                if xv == 0.0 {
                    continue;
                }
                let dst = &mut out[g * mz..(g + 1) * mz];
                for (o, r) in dst.iter_mut().zip(row) {
                    *o += r * xv;
                }
            }
        }
        Ok(out)
    }

    /// Quadrature projection of grid values onto the retained modes.
    pub fn from_grid(&self, values: &[Complex64]) -> Result<Vec<Complex64>> {
        if values.len() != self.grid_len() {
            return Err(Error::Shape {
                expected: self.grid_len(),
                got: values.len(),
            });
        }
        let mz = self.mz();
        let xvals = self.x.quadrature_values();
        let weights = self.x.quadrature_weights();
        let mut out = Vec::with_capacity(self.dim());
        for xv in &xvals {
            let mut row = vec![Complex64::new(0.0, 0.0); mz];
            for (g, (&v, &w)) in xv.iter().zip(&weights).enumerate() {
                let f = v * w;
                for (r, val) in row.iter_mut().zip(&values[g * mz..(g + 1) * mz]) {
                    *r += val * f;
                }
            }
            out.extend(self.z.forward(&row)?);
        }
        Ok(out)
    }

    /// Grid `L²` norm with the quadrature weights in `x` and `Δz` in `z`.
    pub fn grid_norm(&self, values: &[Complex64]) -> f64 {
        let mz = self.mz();
        let weights = self.x.quadrature_weights();
        let mut acc = 0.0;
        for (g, w) in weights.iter().enumerate() {
            acc += w * values[g * mz..(g + 1) * mz].iter().map(|v| v.norm_sqr()).sum::<f64>();
        }
        (acc * self.z.spacing()).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn dimensions_and_eigenvalues() {
        let b = SingleParticleBasis::new(1, 4, 8, 16.0).unwrap();
        assert_eq!(b.dim(), 8);
        let b = SingleParticleBasis::new(3, 8, 16, 16.0).unwrap();
        assert_eq!(b.mx(), 6);
        assert_eq!(b.dim(), 96);
        let h = Hermite2DBasis::new(2, 5).unwrap();
        assert_eq!(h.eigenvalues(), vec![2.0, 4.0, 4.0]);
    }

    #[test]
    fn ground_mode_values() {
        let h = Hermite2DBasis::new(2, 5).unwrap();
        assert!((h.eval_mode(0, [0.0, 0.0]) - PI.powf(-0.5)).abs() < 1e-15);
        assert!(h.eval_mode(0, [40.0, -35.0]).abs() < 1e-300);
    }

    #[test]
    fn rejects_insufficient_quadrature() {
        assert!(Hermite2DBasis::new(4, 4).is_err());
        assert!(Hermite2DBasis::new(0, 4).is_err());
    }

    #[test]
    fn linf_ratio_of_ground_level() {
        let h = Hermite2DBasis::new(3, 6).unwrap();
        let r1 = h.hermite_linf_ratio(0, 1.0, 4, 1).unwrap();
        assert!((r1 - PI.powf(-0.5)).abs() < 1e-12);
        let r4 = h.hermite_linf_ratio(0, 4.0, 4, 1).unwrap();
        assert!((r1 - r4).abs() < 1e-10);
        assert!(h.hermite_linf_ratio(3, 1.0, 4, 1).is_err());
    }
}
