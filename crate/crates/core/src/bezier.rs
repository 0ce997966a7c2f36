//! Bernstein bases, tensor-product Bézier surfaces and the derivatives of the
//! squared point-to-surface distance.
//!
//! Control points are stored flattened with the u-index running fastest:
//! row `i + (n_u + 1) * j` of the flat matrix holds `A[i, j, :]`. With that
//! ordering the surface is `Āᵀ (b(v) ⊗ b(u))`, and every column of the
//! design matrix is the same Kronecker product.

use nalgebra::{DMatrix, Matrix2, Matrix2x3, Vector2, Vector3};

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;

/// Binomial coefficients `C(n, 0..=n)` from one Pascal row.
pub fn pascal_row(n: usize) -> Vec<f64> {
    let mut row = vec![1.0; n + 1];
    for k in 1..n {
        for i in (1..=k).rev() {
            row[i] += row[i - 1];
        }
    }
    row
}

/// `C(n, i) u^i (1 - u)^(n - i)`, evaluated as a polynomial for any real `u`.
pub fn bernstein(u: f64, i: usize, n: usize) -> Result<f64> {
    if i > n {
        return Err(Error::Domain(format!(
            "Bernstein index {i} outside [0, {n}]"
        )));
    }
    Ok(pascal_row(n)[i] * pow(u, i as i64) * pow(1.0 - u, (n - i) as i64))
}

#[inline]
fn pow(x: f64, e: i64) -> f64 {
    if e <= 0 {
        1.0
    } else {
        x.powi(e as i32)
    }
}

/// Which derivative of the basis a [`BasisVector`] holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Derivative {
    Value,
    First,
    Second,
}

impl Derivative {
    pub fn from_level(level: u8) -> Result<Self> {
        match level {
            0 => Ok(Derivative::Value),
            1 => Ok(Derivative::First),
            2 => Ok(Derivative::Second),
            _ => Err(Error::Domain(format!(
                "derivative level {level} not in {{0, 1, 2}}"
            ))),
        }
    }
}

/// All `n + 1` Bernstein values (or their u-derivatives) at one parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisVector {
    pub values: Vec<f64>,
    pub order: usize,
    pub derivative: Derivative,
}

impl BasisVector {
    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }
}

/// `b(u; n)`, `b'(u; n)` or `b''(u; n)` by the product rule applied to each
/// Bernstein polynomial.
pub fn basis_vector(u: f64, n: usize, deriv: Derivative) -> Result<BasisVector> {
    if n < 1 {
        return Err(Error::Domain("Bézier order must be at least 1".into()));
    }
    Ok(BasisVector {
        values: basis_values(u, n, deriv),
        order: n,
        derivative: deriv,
    })
}

pub(crate) fn basis_values(u: f64, n: usize, deriv: Derivative) -> Vec<f64> {
    let binom = pascal_row(n);
    let w = 1.0 - u;
    // u^a (1-u)^b with a zero coefficient short-circuiting negative exponents
    let term = |coef: f64, a: i64, b: i64| -> f64 {
        if coef == 0.0 {
            0.0
        } else {
            coef * pow(u, a) * pow(w, b)
        }
    };
    (0..=n)
        .map(|i| {
            let (i, m) = (i as i64, (n - i) as i64);
            let c = binom[i as usize];
            match deriv {
                Derivative::Value => c * pow(u, i) * pow(w, m),
                Derivative::First => c * (term(i as f64, i - 1, m) - term(m as f64, i, m - 1)),
                Derivative::Second => {
                    c * (term((i * (i - 1)) as f64, i - 2, m)
                        - term((2 * i * m) as f64, i - 1, m - 1)
                        + term((m * (m - 1)) as f64, i, m - 2))
                }
            }
        })
        .collect()
}

/// `b(v) ⊗ b(u)`: entry `i + (len_u) * j` is `bv[j] * bu[i]`.
pub fn kron(bv: &[f64], bu: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(bv.len() * bu.len());
    for &y in bv {
        for &x in bu {
            out.push(y * x);
        }
    }
    out
}

/// A tensor-product Bézier surface of orders `(n_u, n_v)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BezierSurface {
    n_u: usize,
    n_v: usize,
    /// Flattened control points, u-index fastest.
    control: Vec<Vec3>,
}

impl BezierSurface {
    /// Builds a surface from `A[i][j]` with `i` the u-index.
    pub fn from_tensor(control: &[Vec<Vec3>]) -> Result<Self> {
        let rows = control.len();
        if rows < 2 {
            return Err(Error::Dimension(
                "control tensor needs at least 2 rows in u".into(),
            ));
        }
        let cols = control[0].len();
        if cols < 2 || control.iter().any(|r| r.len() != cols) {
            return Err(Error::Dimension(
                "control tensor rows must share a length of at least 2".into(),
            ));
        }
        let mut flat = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for row in control {
                flat.push(row[j]);
            }
        }
        Self::from_flat(rows - 1, cols - 1, flat)
    }

    /// Builds a surface from the flattened `Ā` rows (u-index fastest).
    pub fn from_flat(n_u: usize, n_v: usize, control: Vec<Vec3>) -> Result<Self> {
        if n_u < 1 || n_v < 1 {
            return Err(Error::Domain(format!(
                "surface orders must be positive, got ({n_u}, {n_v})"
            )));
        }
        if control.len() != (n_u + 1) * (n_v + 1) {
            return Err(Error::Dimension(format!(
                "expected {} control points for orders ({n_u}, {n_v}), got {}",
                (n_u + 1) * (n_v + 1),
                control.len()
            )));
        }
        if control.iter().any(|p| !p.iter().all(|c| c.is_finite())) {
            return Err(Error::Domain("control points must be finite".into()));
        }
        Ok(Self { n_u, n_v, control })
    }

    /// Builds a surface from an `m × 3` matrix `Ā`.
    pub fn from_matrix(n_u: usize, n_v: usize, a_bar: &DMatrix<f64>) -> Result<Self> {
        if a_bar.ncols() != 3 {
            return Err(Error::Dimension(format!(
                "Ā must have 3 columns, got {}",
                a_bar.ncols()
            )));
        }
        let control = a_bar
            .row_iter()
            .map(|r| Vec3::new(r[0], r[1], r[2]))
            .collect();
        Self::from_flat(n_u, n_v, control)
    }

    pub fn n_u(&self) -> usize {
        self.n_u
    }

    pub fn n_v(&self) -> usize {
        self.n_v
    }

    pub fn orders(&self) -> (usize, usize) {
        (self.n_u, self.n_v)
    }

    /// Number of control points, `(n_u + 1)(n_v + 1)`.
    pub fn size(&self) -> usize {
        self.control.len()
    }

    pub fn flat(&self) -> &[Vec3] {
        &self.control
    }

    pub fn control_point(&self, i: usize, j: usize) -> Vec3 {
        self.control[i + (self.n_u + 1) * j]
    }

    /// `A[i][j]` with `i` the u-index.
    pub fn to_tensor(&self) -> Vec<Vec<Vec3>> {
        (0..=self.n_u)
            .map(|i| (0..=self.n_v).map(|j| self.control_point(i, j)).collect())
            .collect()
    }

    /// The `m × 3` matrix `Ā`.
    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.control.len(), 3, |r, c| self.control[r][c])
    }

    /// Squared Frobenius norm of `Ā`.
    pub fn frobenius_sq(&self) -> f64 {
        self.control.iter().map(|p| p.norm_squared()).sum()
    }

    /// Shifts every control point by `offset`.
    pub fn translated(&self, offset: &Vec3) -> Self {
        Self {
            n_u: self.n_u,
            n_v: self.n_v,
            control: self.control.iter().map(|p| p + offset).collect(),
        }
    }

    fn contract(&self, bu: &[f64], bv: &[f64]) -> Vec3 {
        let k = kron(bv, bu);
        self.control
            .iter()
            .zip(&k)
            .fold(Vec3::zeros(), |acc, (p, w)| acc + p * *w)
    }

    pub fn eval(&self, u: f64, v: f64) -> Vec3 {
        surface_eval(u, v, self)
    }
}

/// `s(u, v; A) = Āᵀ (b(v) ⊗ b(u))`.
pub fn surface_eval(u: f64, v: f64, surface: &BezierSurface) -> Vec3 {
    let bu = basis_values(u, surface.n_u, Derivative::Value);
    let bv = basis_values(v, surface.n_v, Derivative::Value);
    surface.contract(&bu, &bv)
}

/// Horizontally stacked `b(v_i) ⊗ b(u_i)` columns, shape `(n_u+1)(n_v+1) × n_x`.
pub fn design_matrix(u: &[f64], v: &[f64], n_u: usize, n_v: usize) -> Result<DMatrix<f64>> {
    if u.len() != v.len() {
        return Err(Error::Dimension(format!(
            "u has {} entries but v has {}",
            u.len(),
            v.len()
        )));
    }
    if u.is_empty() {
        return Err(Error::Dimension("design matrix needs at least one point".into()));
    }
    if n_u < 1 || n_v < 1 {
        return Err(Error::Domain("orders must be positive".into()));
    }
    let m = (n_u + 1) * (n_v + 1);
    let mut b = DMatrix::zeros(m, u.len());
    for (col, (&ui, &vi)) in u.iter().zip(v).enumerate() {
        let k = kron(
            &basis_values(vi, n_v, Derivative::Value),
            &basis_values(ui, n_u, Derivative::Value),
        );
        for (row, val) in k.into_iter().enumerate() {
            b[(row, col)] = val;
        }
    }
    Ok(b)
}

/// `J_s`: row 0 is `∂s/∂u`, row 1 is `∂s/∂v`.
pub fn surface_jacobian(u: f64, v: f64, surface: &BezierSurface) -> Matrix2x3<f64> {
    let (n_u, n_v) = surface.orders();
    let bu = basis_values(u, n_u, Derivative::Value);
    let bv = basis_values(v, n_v, Derivative::Value);
    let du = basis_values(u, n_u, Derivative::First);
    let dv = basis_values(v, n_v, Derivative::First);
    let su = surface.contract(&du, &bv);
    let sv = surface.contract(&bu, &dv);
    Matrix2x3::from_rows(&[su.transpose(), sv.transpose()])
}

/// Value, gradient and Hessian of `g(u, v) = ½‖x − s(u, v)‖²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GEval {
    pub value: f64,
    pub gradient: Vector2<f64>,
    pub hessian: Matrix2<f64>,
    /// `x − s(u, v)`.
    pub residual: Vec3,
}

/// Analytic `g`, `∇g = −J_s r` and `∇²g = J_s J_sᵀ − [[c_u, c_uv], [c_uv, c_v]]`
/// where the `c` terms are second surface derivatives dotted with `r`.
pub fn g_eval(x: &Vec3, u: f64, v: f64, surface: &BezierSurface) -> GEval {
    let (n_u, n_v) = surface.orders();
    let bu = basis_values(u, n_u, Derivative::Value);
    let bv = basis_values(v, n_v, Derivative::Value);
    let du = basis_values(u, n_u, Derivative::First);
    let dv = basis_values(v, n_v, Derivative::First);
    let ddu = basis_values(u, n_u, Derivative::Second);
    let ddv = basis_values(v, n_v, Derivative::Second);

    let s = surface.contract(&bu, &bv);
    let su = surface.contract(&du, &bv);
    let sv = surface.contract(&bu, &dv);
    let suu = surface.contract(&ddu, &bv);
    let svv = surface.contract(&bu, &ddv);
    let suv = surface.contract(&du, &dv);

    let r = x - s;
    let c_u = suu.dot(&r);
    let c_v = svv.dot(&r);
    let c_uv = suv.dot(&r);
    let off = su.dot(&sv) - c_uv;
    GEval {
        value: 0.5 * r.norm_squared(),
        gradient: Vector2::new(-su.dot(&r), -sv.dot(&r)),
        hessian: Matrix2::new(su.norm_squared() - c_u, off, off, sv.norm_squared() - c_v),
        residual: r,
    }
}

/// `½‖x − s(u, v)‖²` without derivatives.
pub fn g_value(x: &Vec3, u: f64, v: f64, surface: &BezierSurface) -> f64 {
    0.5 * (x - surface_eval(u, v, surface)).norm_squared()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ln_gamma_binom(n: usize, i: usize) -> f64 {
        // Stirling-free oracle: sum of logs.
        let lf = |k: usize| (1..=k).map(|x| (x as f64).ln()).sum::<f64>();
        (lf(n) - lf(i) - lf(n - i)).exp()
    }

    fn random_surface(rng: &mut impl Rng, n_u: usize, n_v: usize) -> BezierSurface {
        let pts = (0..(n_u + 1) * (n_v + 1))
            .map(|_| Vec3::new(rng.random(), rng.random(), rng.random()) * 2.0 - Vec3::repeat(1.0))
            .collect();
        BezierSurface::from_flat(n_u, n_v, pts).unwrap()
    }

    #[test]
    fn bernstein_endpoint_and_midpoint() {
        assert_eq!(bernstein(0.0, 0, 3).unwrap(), 1.0);
        assert_eq!(bernstein(1.0, 3, 3).unwrap(), 1.0);
        assert_eq!(bernstein(0.0, 1, 3).unwrap(), 0.0);
        assert_eq!(bernstein(0.5, 1, 2).unwrap(), 0.5);
    }

    #[test]
    fn bernstein_matches_log_gamma_oracle() {
        let expect = ln_gamma_binom(5, 2) * 0.3f64.powi(2) * 0.7f64.powi(3);
        assert_relative_eq!(bernstein(0.3, 2, 5).unwrap(), expect, max_relative = 1e-13);
    }

    #[test]
    fn bernstein_rejects_out_of_range_index() {
        assert!(matches!(bernstein(0.5, 4, 3), Err(Error::Domain(_))));
    }

    #[test]
    fn basis_examples() {
        let b = basis_vector(0.5, 2, Derivative::Value).unwrap();
        assert_eq!(b.values, vec![0.25, 0.5, 0.25]);
        for u in [-2.0, 0.0, 0.3, 1.0, 4.5] {
            let d = basis_vector(u, 1, Derivative::First).unwrap();
            assert_eq!(d.values, vec![-1.0, 1.0]);
            let dd = basis_vector(u, 1, Derivative::Second).unwrap();
            assert_eq!(dd.values, vec![0.0, 0.0]);
        }
        assert!(basis_vector(0.5, 0, Derivative::Value).is_err());
    }

    #[test]
    fn basis_derivatives_match_finite_differences() {
        let h = 1e-5;
        for n in 1..=6 {
            for &u in &[0.4, -0.3, 0.0, 1.0, 1.7] {
                let d1 = basis_values(u, n, Derivative::First);
                let d2 = basis_values(u, n, Derivative::Second);
                let p = basis_values(u + h, n, Derivative::Value);
                let m = basis_values(u - h, n, Derivative::Value);
                let p1 = basis_values(u + h, n, Derivative::First);
                let m1 = basis_values(u - h, n, Derivative::First);
                for i in 0..=n {
                    let fd1 = (p[i] - m[i]) / (2.0 * h);
                    let fd2 = (p1[i] - m1[i]) / (2.0 * h);
                    assert_relative_eq!(d1[i], fd1, epsilon = 1e-7, max_relative = 1e-6);
                    assert_relative_eq!(d2[i], fd2, epsilon = 1e-6, max_relative = 1e-6);
                }
            }
        }
    }

    #[test]
    fn derivative_sums_vanish() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let u: f64 = rng.random_range(-1.0..2.0);
            let n = rng.random_range(1..=6);
            let b = basis_vector(u, n, Derivative::Value).unwrap();
            assert!((b.sum() - 1.0).abs() < 1e-12);
            assert_eq!(b.values.len(), n + 1);
            let d1 = basis_vector(u, n, Derivative::First).unwrap();
            let d2 = basis_vector(u, n, Derivative::Second).unwrap();
            assert_eq!(d1.values.len(), n + 1);
            assert!(d1.sum().abs() < 1e-10);
            assert!(d2.sum().abs() < 1e-9);
        }
    }

    #[test]
    fn surface_corner_and_bilinear_midpoint() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let s = random_surface(&mut rng, 3, 2);
        assert_eq!(s.eval(0.0, 0.0), s.control_point(0, 0));
        assert_eq!(s.eval(1.0, 1.0), s.control_point(3, 2));
        assert_eq!(s.eval(1.0, 0.0), s.control_point(3, 0));

        let bl = random_surface(&mut rng, 1, 1);
        let mean = (bl.control_point(0, 0)
            + bl.control_point(1, 0)
            + bl.control_point(0, 1)
            + bl.control_point(1, 1))
            / 4.0;
        assert_relative_eq!(bl.eval(0.5, 0.5), mean, epsilon = 1e-15);
    }

    #[test]
    fn surface_eval_matches_double_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let s = random_surface(&mut rng, 2, 2);
        let (u, v) = (0.3, 0.7);
        let mut expect = Vec3::zeros();
        for i in 0..=2 {
            for j in 0..=2 {
                expect += s.control_point(i, j)
                    * bernstein(u, i, 2).unwrap()
                    * bernstein(v, j, 2).unwrap();
            }
        }
        assert_relative_eq!(s.eval(u, v), expect, epsilon = 1e-14);
    }

    #[test]
    fn tensor_round_trip_is_lossless() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s = random_surface(&mut rng, 3, 1);
        let back = BezierSurface::from_tensor(&s.to_tensor()).unwrap();
        assert_eq!(back, s);
        let back = BezierSurface::from_matrix(3, 1, &s.to_matrix()).unwrap();
        assert_eq!(back, s);
        // u-index fastest in the flat layout
        assert_eq!(s.flat()[1], s.control_point(1, 0));
        assert_eq!(s.flat()[4], s.control_point(0, 1));
    }

    #[test]
    fn design_matrix_columns() {
        let b = design_matrix(&[0.0], &[0.0], 1, 1).unwrap();
        assert_eq!(b.column(0).as_slice(), &[1.0, 0.0, 0.0, 0.0]);

        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let u: Vec<f64> = (0..5).map(|_| rng.random()).collect();
        let v: Vec<f64> = (0..5).map(|_| rng.random()).collect();
        let b = design_matrix(&u, &v, 2, 3).unwrap();
        assert_eq!(b.shape(), (12, 5));
        let s = random_surface(&mut rng, 2, 3);
        let ab = s.to_matrix();
        for i in 0..5 {
            let k = kron(
                &basis_values(v[i], 3, Derivative::Value),
                &basis_values(u[i], 2, Derivative::Value),
            );
            assert_eq!(b.column(i).as_slice(), k.as_slice());
            let via_b = ab.transpose() * b.column(i);
            let direct = s.eval(u[i], v[i]);
            for c in 0..3 {
                assert!((via_b[c] - direct[c]).abs() < 1e-12);
            }
        }
        assert!(matches!(
            design_matrix(&[0.1, 0.2], &[0.3], 1, 1),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn jacobian_of_plane_and_constant() {
        // s(u,v) = (2u, 3v, 0)
        let plane = BezierSurface::from_tensor(&[
            vec![Vec3::new(0.0, 0.0, 0.0), Vec3::new(0.0, 3.0, 0.0)],
            vec![Vec3::new(2.0, 0.0, 0.0), Vec3::new(2.0, 3.0, 0.0)],
        ])
        .unwrap();
        let j = surface_jacobian(0.37, -0.2, &plane);
        assert_relative_eq!(j, Matrix2x3::new(2.0, 0.0, 0.0, 0.0, 3.0, 0.0), epsilon = 1e-14);

        let c = BezierSurface::from_flat(2, 3, vec![Vec3::new(1.0, -2.0, 5.0); 12]).unwrap();
        assert!(surface_jacobian(0.2, 0.9, &c).norm() < 1e-13);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let h = 1e-6;
        for _ in 0..20 {
            let (nu, nv) = (rng.random_range(1..5), rng.random_range(1..5));
            let s = random_surface(&mut rng, nu, nv);
            let (u, v) = (rng.random::<f64>(), rng.random::<f64>());
            let j = surface_jacobian(u, v, &s);
            let fu = (s.eval(u + h, v) - s.eval(u - h, v)) / (2.0 * h);
            let fv = (s.eval(u, v + h) - s.eval(u, v - h)) / (2.0 * h);
            for c in 0..3 {
                assert_relative_eq!(j[(0, c)], fu[c], epsilon = 1e-7, max_relative = 1e-6);
                assert_relative_eq!(j[(1, c)], fv[c], epsilon = 1e-7, max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn g_eval_on_surface_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let s = random_surface(&mut rng, 3, 3);
        let x = s.eval(0.4, 0.6);
        let g = g_eval(&x, 0.4, 0.6, &s);
        let j = surface_jacobian(0.4, 0.6, &s);
        assert_eq!(g.value, 0.0);
        assert_eq!(g.gradient, Vector2::zeros());
        assert_relative_eq!(g.hessian, j * j.transpose(), epsilon = 1e-14);
    }

    #[test]
    fn g_eval_bilinear_has_only_cross_term() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let s = random_surface(&mut rng, 1, 1);
        let x = Vec3::new(0.3, -1.2, 2.0);
        let (u, v) = (0.25, 0.8);
        let g = g_eval(&x, u, v, &s);
        let j = surface_jacobian(u, v, &s);
        let jj = j * j.transpose();
        let r = x - s.eval(u, v);
        let suv = s.control_point(1, 1) - s.control_point(1, 0) - s.control_point(0, 1)
            + s.control_point(0, 0);
        let c_uv = suv.dot(&r);
        assert_relative_eq!(g.hessian[(0, 0)], jj[(0, 0)], epsilon = 1e-14);
        assert_relative_eq!(g.hessian[(1, 1)], jj[(1, 1)], epsilon = 1e-14);
        assert_relative_eq!(g.hessian[(0, 1)], jj[(0, 1)] - c_uv, epsilon = 1e-13);
    }

    #[test]
    fn g_eval_hessian_is_exactly_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..50 {
            let s = random_surface(&mut rng, 4, 2);
            let x = Vec3::new(rng.random(), rng.random(), rng.random());
            let g = g_eval(&x, rng.random(), rng.random(), &s);
            assert_eq!(g.hessian[(0, 1)], g.hessian[(1, 0)]);
        }
    }
}
