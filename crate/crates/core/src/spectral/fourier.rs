//! Periodic Fourier grid on `[−L/2, L/2)`.
//!
//! Coefficients are stored in centred order: slot `m` holds the plane wave
//! `e^{i k_p z}/√L` with `p = m − M/2` and `k_p = 2πp/L`. The transform pair is
//! unitary between coefficient space and the grid inner product
//! `Δz Σ_n f̄(z_n) g(z_n)`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::{Error, Result};

#[derive(Clone)]
pub struct FourierGrid1D {
    box_length: f64,
    points: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for FourierGrid1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FourierGrid1D")
            .field("box_length", &self.box_length)
            .field("points", &self.points)
            .finish()
    }
}

impl PartialEq for FourierGrid1D {
    fn eq(&self, other: &Self) -> bool {
        self.box_length == other.box_length && self.points == other.points
    }
}

impl FourierGrid1D {
    pub fn new(box_length: f64, points: usize) -> Result<Self> {
        if !(box_length.is_finite() && box_length > 0.0) {
            return Err(Error::Domain(format!("box length {box_length} must be positive")));
        }
        if points < 4 || !points.is_power_of_two() {
            return Err(Error::Domain(format!(
                "grid size {points} must be a power of two and at least 4"
            )));
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            box_length,
            points,
            forward: planner.plan_fft_forward(points),
            inverse: planner.plan_fft_inverse(points),
        })
    }

    pub fn box_length(&self) -> f64 {
        self.box_length
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn spacing(&self) -> f64 {
        self.box_length / self.points as f64
    }

    /// Signed momentum index `p` of coefficient slot `m`.
    pub fn momentum_index(&self, slot: usize) -> i64 {
        slot as i64 - (self.points / 2) as i64
    }

    /// Coefficient slot of momentum index `p`, if it is retained.
    pub fn slot_of(&self, p: i64) -> Option<usize> {
        let m = p + (self.points / 2) as i64;
        (m >= 0 && (m as usize) < self.points).then_some(m as usize)
    }

    pub fn wavenumber(&self, slot: usize) -> f64 {
        2.0 * PI * self.momentum_index(slot) as f64 / self.box_length
    }

    pub fn wavenumbers(&self) -> Vec<f64> {
        (0..self.points).map(|m| self.wavenumber(m)).collect()
    }

    pub fn node(&self, n: usize) -> f64 {
        -0.5 * self.box_length + n as f64 * self.spacing()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.points).map(|n| self.node(n)).collect()
    }

    /// Grid values to centred coefficients.
    pub fn forward(&self, values: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_len(values.len())?;
        let mut buf = values.to_vec();
        self.forward.process(&mut buf);
        // FFT slot j carries p ≡ j (mod M); the grid offset −L/2 adds a phase (−1)^p.
        let scale = self.box_length.sqrt() / self.points as f64;
        let half = self.points / 2;
        let mut out = vec![Complex64::new(0.0, 0.0); self.points];
        for (m, c) in out.iter_mut().enumerate() {
            let p = m as i64 - half as i64;
            let j = p.rem_euclid(self.points as i64) as usize;
            let sign = if p.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            *c = buf[j] * (scale * sign);
        }
        Ok(out)
    }

    /// Centred coefficients to grid values.
    pub fn inverse(&self, coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_len(coeffs.len())?;
        let half = self.points / 2;
        let scale = 1.0 / self.box_length.sqrt();
        let mut buf = vec![Complex64::new(0.0, 0.0); self.points];
        for (m, c) in coeffs.iter().enumerate() {
            let p = m as i64 - half as i64;
            let j = p.rem_euclid(self.points as i64) as usize;
            let sign = if p.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            buf[j] = c * (scale * sign);
        }
        self.inverse.process(&mut buf);
        Ok(buf)
    }

    /// Grid inner product `Δz Σ f̄ g`.
    pub fn inner(&self, f: &[Complex64], g: &[Complex64]) -> Complex64 {
        f.iter().zip(g).map(|(a, b)| a.conj() * b).sum::<Complex64>() * self.spacing()
    }

    pub fn norm(&self, f: &[Complex64]) -> f64 {
        (f.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.spacing()).sqrt()
    }

    /// Mass of `f` within a distance `margin` of the box ends.
    pub fn tail_mass(&self, f: &[Complex64], margin: f64) -> f64 {
        let edge = 0.5 * self.box_length - margin;
        self.nodes()
            .iter()
            .zip(f)
            .filter(|(z, _)| z.abs() >= edge)
            .map(|(_, v)| v.norm_sqr())
            .sum::<f64>()
            * self.spacing()
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len == self.points {
            Ok(())
        } else {
            Err(Error::Shape {
                expected: self.points,
                got: len,
            })
        }
    }
}
