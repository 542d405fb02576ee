//! The collision operator `B_{j,k+1} γ = Tr_{k+1}[δ(z_j − z_{k+1}), γ]`.
//!
//! On the periodic grid the delta function is the band-limited Dirichlet
//! kernel. Under the grid quadrature it is diagonal, `δ(z_n − z_m) = δ_{nm}/Δz`,
//! so in the unitary grid representation `u_n = √Δz f(z_n)`
//!
//! `BΓ(N; N') = Δz⁻¹ [Γ(N, N_j; N', N_j) − Γ(N, N'_j; N', N'_j)]`.
//!
//! For a factor `Γ = F F†` this is `X Y† − Y X†`, where the columns of `Y` are
//! the slices `F(·, n)` and `X` keeps only the rows with `N_j = n`. The coupled
//! operator additionally contracts a transverse delta function and traces out
//! all transverse labels.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::marginals::{DensityMatrix, ReducedZDensity, DENSE_LIMIT};
use crate::operators::transverse_delta_matrix;
use crate::spectral::FourierGrid1D;
use crate::{Error, Result};

type C = Complex64;

/// Applies `f` to every longitudinal fiber of a `parts`-particle vector whose
/// single-particle index is `a · m + n` with `a < mx`.
fn map_z_axes(v: &mut [C], mx: usize, m: usize, parts: usize, f: &dyn Fn(&[C]) -> Result<Vec<C>>) -> Result<()> {
    let d = mx * m;
    let mut fiber = vec![C::new(0.0, 0.0); m];
    for p in 0..parts {
        let stride = d.pow((parts - 1 - p) as u32);
        let outer = d.pow(p as u32);
        for o in 0..outer {
            for a in 0..mx {
                for i in 0..stride {
                    let base = o * d * stride + a * m * stride + i;
                    for (n, x) in fiber.iter_mut().enumerate() {
                        *x = v[base + n * stride];
                    }
                    let out = f(&fiber)?;
                    for (n, x) in out.into_iter().enumerate() {
                        v[base + n * stride] = x;
                    }
                }
            }
        }
    }
    Ok(())
}

fn map_columns(f: &mut DMatrix<C>, mx: usize, m: usize, parts: usize, map: &dyn Fn(&[C]) -> Result<Vec<C>>) -> Result<()> {
    for mut col in f.column_iter_mut() {
        map_z_axes(col.as_mut_slice(), mx, m, parts, map)?;
    }
    Ok(())
}

/// Coefficients to unitary grid samples, per longitudinal axis.
pub(crate) fn coeffs_to_samples(f: &mut DMatrix<C>, grid: &FourierGrid1D, mx: usize, parts: usize) -> Result<()> {
    let s = grid.spacing().sqrt();
    map_columns(f, mx, grid.points(), parts, &|c| {
        Ok(grid.inverse(c)?.into_iter().map(|x| x * s).collect())
    })
}

/// Inverse of [`coeffs_to_samples`].
pub(crate) fn samples_to_coeffs(f: &mut DMatrix<C>, grid: &FourierGrid1D, mx: usize, parts: usize) -> Result<()> {
    let s = 1.0 / grid.spacing().sqrt();
    map_columns(f, mx, grid.points(), parts, &|u| {
        Ok(grid.forward(u)?.into_iter().map(|x| x * s).collect())
    })
}

/// `(X, Y)` with `B_{j,k+1} = X Y† − Y X†` in longitudinal coefficients.
///
/// `factor` has rows over `k + 1` particles with `mx` transverse labels each;
/// `t` is the transverse delta matrix (`[1.0]` when `mx = 1`).
pub(crate) fn collision_pair(
    factor: &DMatrix<C>,
    grid: &FourierGrid1D,
    mx: usize,
    t: &[f64],
    k: usize,
    j: usize,
) -> Result<(DMatrix<C>, DMatrix<C>)> {
    let m = grid.points();
    let d = mx * m;
    let parts = k + 1;
    if j >= k {
        return Err(Error::Precondition(format!("collision index j = {j} must be below k = {k}")));
    }
    if factor.nrows() != d.pow(parts as u32) {
        return Err(Error::Shape {
            expected: d.pow(parts as u32),
            got: factor.nrows(),
        });
    }
    let rows = m.pow(k as u32);
    let mut fu = factor.clone();
    coeffs_to_samples(&mut fu, grid, mx, parts)?;
    let inv = 1.0 / grid.spacing().sqrt();
    let xcount = mx.pow(parts as u32);
    let row_of = |xs: &[usize], zs: usize, n: usize| -> usize {
        // zs enumerates the first k longitudinal slots, particle 0 slowest.
        let mut idx = 0;
        let mut zr = zs;
        let mut z = vec![0; k];
        for slot in z.iter_mut().rev() {
            *slot = zr % m;
            zr /= m;
        }
        for p in 0..k {
            idx = idx * d + xs[p] * m + z[p];
        }
        idx * d + xs[k] * m + n
    };
    let zj_of = |zs: usize| (zs / m.pow((k - 1 - j) as u32)) % m;
    let mut xcols: Vec<Vec<C>> = Vec::new();
    let mut ycols: Vec<Vec<C>> = Vec::new();
    let mut xs = vec![0; parts];
    let mut ys = vec![0; parts];
    for r in 0..fu.ncols() {
        let col = fu.column(r);
        for xi in 0..xcount {
            let mut rem = xi;
            for slot in xs.iter_mut().rev() {
                *slot = rem % mx;
                rem /= mx;
            }
            for n in 0..m {
                let y: Vec<C> = (0..rows).map(|zs| col[row_of(&xs, zs, n)] * inv).collect();
                let mut x = vec![C::new(0.0, 0.0); rows];
                for (zs, out) in x.iter_mut().enumerate() {
                    if zj_of(zs) != n {
                        continue;
                    }
                    let mut acc = C::new(0.0, 0.0);
                    for bj in 0..mx {
                        for bk in 0..mx {
                            let w = t[((xs[j] * mx + xs[k]) * mx + bj) * mx + bk];
                            if w == 0.0 {
                                continue;
                            }
                            ys.copy_from_slice(&xs);
                            ys[j] = bj;
                            ys[k] = bk;
                            acc += col[row_of(&ys, zs, n)] * w;
                        }
                    }
                    *out = acc * inv;
                }
                let live = |v: &[C]| v.iter().any(|c| c.norm_sqr() > 0.0);
                if live(&x) && live(&y) {
                    xcols.push(x);
                    ycols.push(y);
                }
            }
        }
    }
    let assemble = |cols: &[Vec<C>]| -> DMatrix<C> {
        DMatrix::from_fn(rows, cols.len(), |a, c| cols[c][a])
    };
    let (mut x, mut y) = (assemble(&xcols), assemble(&ycols));
    samples_to_coeffs(&mut x, grid, 1, k)?;
    samples_to_coeffs(&mut y, grid, 1, k)?;
    Ok((x, y))
}

/// Orthonormal `Q` with `‖Y − Q Q†Y‖ ≤ 1e−14 ‖Y‖`, by Gram–Schmidt with
/// largest-residual pivoting and one reorthogonalisation pass.
fn range_basis(y: &DMatrix<C>) -> DMatrix<C> {
    let mut res = y.clone();
    let top = res.column_iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut q: Vec<nalgebra::DVector<C>> = Vec::new();
    while q.len() < y.ncols() {
        let (piv, norm) = res
            .column_iter()
            .map(|c| c.norm())
            .enumerate()
            .fold((0, 0.0), |best, (i, n)| if n > best.1 { (i, n) } else { best });
        if norm <= 1e-14 * top || norm == 0.0 {
            break;
        }
        let mut v = res.column(piv).into_owned();
        for u in &q {
            let c = u.dotc(&v);
            v -= u * c;
        }
        let v = v.unscale(v.norm());
        for mut col in res.column_iter_mut() {
            let c = v.dotc(&col);
            col -= &v * c;
        }
        q.push(v);
    }
    if q.is_empty() {
        return DMatrix::zeros(y.nrows(), 0);
    }
    DMatrix::from_columns(&q)
}

/// `X Y† − Y X†`, evaluated as `[XC†, Q][Q, −XC†]†` with `Y ≈ Q C` from
/// [`range_basis`]. For product data `Q` has a single column.
pub(crate) fn commutator_from_pair(x: &DMatrix<C>, y: &DMatrix<C>) -> DMatrix<C> {
    let q = range_basis(y);
    let r = q.ncols();
    if r == 0 {
        return DMatrix::zeros(x.nrows(), x.nrows());
    }
    let xc = x * (q.adjoint() * y).adjoint();
    let mut left = DMatrix::zeros(x.nrows(), 2 * r);
    let mut right = DMatrix::zeros(x.nrows(), 2 * r);
    left.columns_mut(0, r).copy_from(&xc);
    left.columns_mut(r, r).copy_from(&q);
    right.columns_mut(0, r).copy_from(&q);
    right.columns_mut(r, r).copy_from(&(-xc));
    left * right.adjoint()
}

fn check_dense_output(m: usize, k: usize) -> Result<()> {
    let rows = m.pow(k as u32);
    if rows > DENSE_LIMIT {
        return Err(Error::TooLarge(format!("collision output of dimension {rows} exceeds {DENSE_LIMIT}")));
    }
    Ok(())
}

/// `B_{j,k+1} γ_z^{(k+1)}` for 0-based `j < k`, as a dense, trace-free,
/// anti-Hermitian kernel over `k` particles.
pub fn collision_op(gamma_z: &ReducedZDensity, j: usize) -> Result<ReducedZDensity> {
    let parts = gamma_z.k();
    if parts < 2 {
        return Err(Error::Precondition("the collision operator needs k + 1 ≥ 2 particles".into()));
    }
    let k = parts - 1;
    check_dense_output(gamma_z.grid().points(), k)?;
    let (x, y) = collision_pair(&gamma_z.factor()?, gamma_z.grid(), 1, &[1.0], k, j)?;
    ReducedZDensity::from_dense(gamma_z.grid().clone(), k, commutator_from_pair(&x, &y))
}

/// `Tr_x Tr_{z_{k+1}} [δ(r_j − r_{k+1}), γ^{(k+1)}]` for a full density.
pub fn coupled_collision_op(gamma: &DensityMatrix, j: usize) -> Result<ReducedZDensity> {
    let parts = gamma.k();
    if parts < 2 {
        return Err(Error::Precondition("the collision operator needs k + 1 ≥ 2 particles".into()));
    }
    let k = parts - 1;
    let basis = gamma.basis();
    check_dense_output(basis.mz(), k)?;
    let t = transverse_delta_matrix(basis)?;
    let (x, y) = collision_pair(&gamma.factor()?, basis.z_grid(), basis.mx(), &t, k, j)?;
    ReducedZDensity::from_dense(basis.z_grid().clone(), k, commutator_from_pair(&x, &y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::marginals::{max_abs, trace_x};
    use crate::scaling::h_quartic_integral;
    use crate::spectral::SingleParticleBasis;
    use std::sync::Arc;

    fn grid() -> FourierGrid1D {
        FourierGrid1D::new(10.0, 16).unwrap()
    }

    fn field(g: &FourierGrid1D, shift: f64) -> Vec<C> {
        let vals: Vec<C> = g
            .nodes()
            .iter()
            .map(|z| C::new((-(z - shift).powi(2) / 2.0).exp(), 0.3 * (z * 0.7).sin()))
            .collect();
        let n = g.norm(&vals);
        vals.into_iter().map(|v| v / n).collect()
    }

    /// Direct oracle on grid values: `(|φ(z_j)|² − |φ(z'_j)|²) ∏ φ(z_i) φ̄(z'_i)`.
    fn rank_one_oracle(g: &FourierGrid1D, phi: &[C], k: usize, j: usize) -> DMatrix<C> {
        let m = g.points();
        let rows = m.pow(k as u32);
        let h = g.spacing();
        let digits = |mut idx: usize| {
            let mut z = vec![0; k];
            for s in z.iter_mut().rev() {
                *s = idx % m;
                idx /= m;
            }
            z
        };
        let kernel = DMatrix::from_fn(rows, rows, |a, b| {
            let (za, zb) = (digits(a), digits(b));
            let mut prod = C::new(1.0, 0.0);
            for i in 0..k {
                prod *= phi[za[i]] * phi[zb[i]].conj() * h;
            }
            prod * (phi[za[j]].norm_sqr() - phi[zb[j]].norm_sqr())
        });
        // Unitary samples back to coefficients on both sides.
        let mut w = kernel;
        samples_to_coeffs(&mut w, g, 1, k).unwrap();
        let mut wt = w.adjoint();
        samples_to_coeffs(&mut wt, g, 1, k).unwrap();
        wt.adjoint()
    }

    #[test]
    fn rank_one_matches_direct_substitution() {
        let g = grid();
        let phi = field(&g, 0.4);
        let coeffs = g.forward(&phi).unwrap();
        for (k, j) in [(1, 0), (2, 0), (2, 1)] {
            let gamma = ReducedZDensity::product(g.clone(), k + 1, &coeffs).unwrap();
            let b = collision_op(&gamma, j).unwrap().to_dense().unwrap();
            let oracle = rank_one_oracle(&g, &phi, k, j);
            assert!(max_abs(&(&b - &oracle)) < 1e-13, "k={k} j={j}");
            let tr: C = b.diagonal().iter().sum();
            assert!(tr.norm() < 1e-12);
            let ib = &b * C::new(0.0, 1.0);
            assert!(max_abs(&(&ib - ib.adjoint())) < 1e-12);
        }
    }

    #[test]
    fn real_even_field_vanishes_on_the_diagonal() {
        let g = grid();
        let phi: Vec<C> = g.nodes().iter().map(|z| C::new((-z * z).exp(), 0.0)).collect();
        let gamma = ReducedZDensity::product(g.clone(), 2, &g.forward(&phi).unwrap()).unwrap();
        let b = collision_op(&gamma, 0).unwrap().to_dense().unwrap();
        let mut u = b.clone();
        coeffs_to_samples(&mut u, &g, 1, 1).unwrap();
        let mut ut = u.adjoint();
        coeffs_to_samples(&mut ut, &g, 1, 1).unwrap();
        let grid_kernel = ut.adjoint();
        for n in 0..g.points() {
            assert!(grid_kernel[(n, n)].norm() < 1e-14);
        }
    }

    #[test]
    fn mixed_input_is_linear() {
        let g = grid();
        let (a, b) = (g.forward(&field(&g, 0.0)).unwrap(), g.forward(&field(&g, 1.0)).unwrap());
        let ga = ReducedZDensity::product(g.clone(), 2, &a).unwrap();
        let gb = ReducedZDensity::product(g.clone(), 2, &b).unwrap();
        let mixed = ReducedZDensity::from_dense(
            g.clone(),
            2,
            ga.to_dense().unwrap() * C::new(0.3, 0.0) + gb.to_dense().unwrap() * C::new(0.7, 0.0),
        )
        .unwrap();
        let lhs = collision_op(&mixed, 0).unwrap().to_dense().unwrap();
        let rhs = collision_op(&ga, 0).unwrap().to_dense().unwrap() * C::new(0.3, 0.0)
            + collision_op(&gb, 0).unwrap().to_dense().unwrap() * C::new(0.7, 0.0);
        assert!(max_abs(&(lhs - rhs)) < 1e-12);
    }

    #[test]
    fn coupled_product_reduces_to_one_dimensional() {
        let basis = Arc::new(SingleParticleBasis::new(3, 8, 16, 10.0).unwrap());
        let g = basis.z_grid().clone();
        let coeffs = g.forward(&field(&g, 0.2)).unwrap();
        let single = basis.embed_ground(&coeffs).unwrap();
        let pair: Vec<C> = single.iter().flat_map(|a| single.iter().map(move |b| a * b)).collect();
        let gamma = DensityMatrix::pure(basis.clone(), 2, &pair).unwrap();
        let coupled = coupled_collision_op(&gamma, 0).unwrap().to_dense().unwrap();
        let oned = collision_op(&ReducedZDensity::product(g, 2, &coeffs).unwrap(), 0)
            .unwrap()
            .to_dense()
            .unwrap();
        let scale = h_quartic_integral().unwrap();
        assert!(max_abs(&(coupled - oned * C::new(scale, 0.0))) < 1e-13);
    }

    #[test]
    fn coupled_output_is_trace_free_for_entangled_input() {
        let basis = Arc::new(SingleParticleBasis::new(2, 6, 8, 8.0).unwrap());
        let psi = crate::dynamics::ManyBodyState::random_symmetric(basis.clone(), 2, 5).unwrap();
        let gamma = crate::marginals::reduce_marginal(&psi, 2).unwrap();
        let b = coupled_collision_op(&gamma, 0).unwrap().to_dense().unwrap();
        let tr: C = b.diagonal().iter().sum();
        assert!(tr.norm() < 1e-12);
        assert!(max_abs(&(&b + b.adjoint())) < 1e-12);
        // The x-trace of the input is unaffected by the collision structure.
        assert!((trace_x(&gamma).unwrap().trace() - 1.0).abs() < 1e-12);
    }
}
