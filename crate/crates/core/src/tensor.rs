//! Index bookkeeping for row-major `d^N` coefficient tensors (particle 0 slowest).

use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Shape {
    pub d: usize,
    pub n: usize,
}

impl Shape {
    pub fn new(d: usize, n: usize) -> Self {
        Self { d, n }
    }

    pub fn len(&self) -> usize {
        self.d.pow(self.n as u32)
    }

    pub fn stride(&self, particle: usize) -> usize {
        self.d.pow((self.n - 1 - particle) as u32)
    }

    pub fn digits(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.n];
        for slot in out.iter_mut().rev() {
            *slot = idx % self.d;
            idx /= self.d;
        }
        out
    }

    pub fn compose(&self, digits: &[usize]) -> usize {
        digits.iter().fold(0, |acc, &s| acc * self.d + s)
    }

    /// Offsets of all entries whose digits at `particles` are zero.
    pub fn bases(&self, particles: &[usize]) -> Vec<usize> {
        let free: Vec<usize> = (0..self.n).filter(|p| !particles.contains(p)).collect();
        let count = self.d.pow(free.len() as u32);
        let mut out = Vec::with_capacity(count);
        for r in 0..count {
            let mut rem = r;
            let mut off = 0;
            for &p in free.iter().rev() {
                off += (rem % self.d) * self.stride(p);
                rem /= self.d;
            }
            out.push(off);
        }
        out
    }
}

/// `(Pψ)(s₀, …, s_{N−1}) = ψ(s_{perm[0]}, …, s_{perm[N−1]})`.
pub(crate) fn permute(psi: &[Complex64], shape: Shape, perm: &[usize]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); psi.len()];
    for (idx, o) in out.iter_mut().enumerate() {
        let digits = shape.digits(idx);
        let src: Vec<usize> = perm.iter().map(|&p| digits[p]).collect();
        *o = psi[shape.compose(&src)];
    }
    out
}

pub(crate) fn transpose(psi: &[Complex64], shape: Shape, i: usize, j: usize) -> Vec<Complex64> {
    let mut perm: Vec<usize> = (0..shape.n).collect();
    perm.swap(i, j);
    permute(psi, shape, &perm)
}

pub(crate) fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for rest in permutations(n - 1) {
        for pos in 0..n {
            let mut p = rest.clone();
            p.insert(pos, n - 1);
            out.push(p);
        }
    }
    out
}

pub(crate) fn symmetrize(psi: &[Complex64], shape: Shape) -> Vec<Complex64> {
    let perms = permutations(shape.n);
    let mut out = vec![Complex64::new(0.0, 0.0); psi.len()];
    for perm in &perms {
        for (o, v) in out.iter_mut().zip(permute(psi, shape, perm)) {
            *o += v;
        }
    }
    let scale = 1.0 / perms.len() as f64;
    out.iter_mut().for_each(|v| *v *= scale);
    out
}

pub(crate) fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

pub(crate) fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

#[cfg(test)]
pub(crate) fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub(crate) fn diff_norm(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}
