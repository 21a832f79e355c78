//! Dense operators on M_d with the normalized trace τ = tr/d, and the
//! singular-value functional calculus built on [`crate::eigen`].

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::eigen::{hermitian_eigen, HermitianEigen};
use crate::error::{Error, Result};
use crate::orlicz::OrliczFunction;

/// Relative width of the band around a spectral cut that counts as "at" the cut.
pub const SPECTRAL_TIE_TOL: f64 = 1e-12;
/// Relative tolerance of the Luxemburg-norm bisection.
pub const NORM_REL_TOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// A d×d complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct Operator {
    dim: usize,
    data: Vec<Complex64>,
}

impl fmt::Debug for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Operator({}×{})", self.dim, self.dim)?;
        for i in 0..self.dim {
            let row: Vec<String> = (0..self.dim)
                .map(|j| {
                    let z = self[(i, j)];
                    format!("{:+.4e}{:+.4e}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl std::ops::Index<(usize, usize)> for Operator {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.dim + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Operator {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.dim + j]
    }
}

/// μ_t(x) as a right-continuous step function on [0, 1).
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction {
    /// 0 = b_0 < b_1 < … < b_m = 1.
    pub breakpoints: Vec<f64>,
    /// Value on [b_i, b_{i+1}); nonincreasing.
    pub values: Vec<f64>,
}

impl StepFunction {
    pub fn at(&self, t: f64) -> f64 {
        assert!((0.0..1.0).contains(&t), "μ_t is defined on [0, 1), got t={t}");
        let k = self.breakpoints[1..].partition_point(|b| *b <= t);
        self.values[k.min(self.values.len() - 1)]
    }

    /// ∫₀¹ g(μ_t) dt.
    pub fn integrate(&self, g: impl Fn(f64) -> f64) -> f64 {
        self.values
            .iter()
            .enumerate()
            .map(|(i, v)| (self.breakpoints[i + 1] - self.breakpoints[i]) * g(*v))
            .sum()
    }
}

impl Operator {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be positive");
        Self { dim, data: vec![ZERO; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut x = Self::zeros(dim);
        for i in 0..dim {
            x[(i, i)] = ONE;
        }
        x
    }

    pub fn scalar(dim: usize, c: Complex64) -> Self {
        Self::identity(dim).scale(c)
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let mut x = Self::zeros(diag.len());
        for (i, v) in diag.iter().enumerate() {
            x[(i, i)] = Complex64::new(*v, 0.0);
        }
        x
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Self {
        let mut x = Self::zeros(diag.len());
        for (i, v) in diag.iter().enumerate() {
            x[(i, i)] = *v;
        }
        x
    }

    /// Builds from row-major entries; fails on non-square length or non-finite data.
    pub fn from_row_major(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if dim == 0 || data.len() != dim * dim {
            return Err(Error::InvalidArgument(format!(
                "expected {} entries for dim {dim}, got {}",
                dim * dim,
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidArgument("operator entries must be finite".into()));
        }
        Ok(Self { dim, data })
    }

    pub fn from_fn(dim: usize, f: impl Fn(usize, usize) -> Complex64) -> Self {
        let mut x = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                x[(i, j)] = f(i, j);
            }
        }
        x
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.dim).map(|i| self[(i, i)]).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|z| *z == ZERO)
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { left: self.dim, right: other.dim });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Ok(Self { dim: self.dim, data })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(Self { dim: self.dim, data })
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let n = self.dim;
        let mut out = vec![ZERO; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                let row = &other.data[k * n..(k + 1) * n];
                let dst = &mut out[i * n..(i + 1) * n];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        Ok(Self { dim: n, data: out })
    }

    /// x* x.
    pub fn gram(&self) -> Self {
        self.adjoint() * self
    }

    /// x x*.
    pub fn co_gram(&self) -> Self {
        self * &self.adjoint()
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|z| z * c).collect() }
    }

    pub fn scale_real(&self, c: f64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|z| z * c).collect() }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    /// τ(x) = tr(x)/d.
    pub fn tau(&self) -> Complex64 {
        self.trace() / self.dim as f64
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Frobenius distance ‖x − y‖_F.
    pub fn distance(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn hermitian_defect(&self) -> f64 {
        self.distance(&self.adjoint())
    }

    pub fn eigen(&self) -> HermitianEigen {
        hermitian_eigen(&self.data, self.dim)
    }

    /// V f(Λ) V* for the Hermitian part of `self`.
    pub fn hermitian_function(&self, f: impl Fn(f64) -> f64) -> Self {
        let e = self.eigen();
        from_eigen(&e, |_, v| f(v))
    }

    /// Positive square root of a positive semidefinite operator; negative
    /// rounding in the spectrum is clamped at zero.
    pub fn psd_sqrt(&self) -> Self {
        self.hermitian_function(|v| v.max(0.0).sqrt())
    }

    /// |x| = (x* x)^{1/2}.
    pub fn abs(&self) -> Self {
        self.gram().psd_sqrt()
    }

    /// Singular values in descending order.
    pub fn singular_value_list(&self) -> Vec<f64> {
        let mut s: Vec<f64> = self.gram().eigen().values.iter().map(|v| v.max(0.0).sqrt()).collect();
        s.reverse();
        s
    }

    /// μ_t(x): each singular value on an interval of length 1/d.
    pub fn singular_values(&self) -> StepFunction {
        let d = self.dim;
        StepFunction {
            breakpoints: (0..=d).map(|i| i as f64 / d as f64).collect(),
            values: self.singular_value_list(),
        }
    }

    pub fn operator_norm(&self) -> f64 {
        self.singular_value_list()[0]
    }

    /// λ_s(x): fraction of singular values strictly above s.
    pub fn distribution(&self, s: f64) -> f64 {
        distribution_of(&self.singular_value_list(), s)
    }

    /// Projection onto the eigenvectors of |x| with eigenvalue strictly above
    /// s. Eigenvalues within [`SPECTRAL_TIE_TOL`]·‖x‖_∞ of s count as ≤ s.
    pub fn spectral_projection(&self, s: f64) -> Self {
        let e = self.gram().eigen();
        let sigma: Vec<f64> = e.values.iter().map(|v| v.max(0.0).sqrt()).collect();
        let norm = sigma.iter().copied().fold(0.0, f64::max);
        let cut = s + SPECTRAL_TIE_TOL * norm;
        from_eigen(&e, |k, _| if sigma[k] > cut { 1.0 } else { 0.0 })
    }

    /// τ(Φ(|x|)).
    pub fn trace_phi_moment(&self, phi: &OrliczFunction) -> f64 {
        phi_moment_of_values(phi, &self.singular_value_list())
    }

    /// ∫₀^∞ λ_s(x) dΦ(s), summed exactly over the jumps of λ.
    pub fn layer_cake_trace(&self, phi: &OrliczFunction) -> f64 {
        layer_cake_of_values(phi, &self.singular_value_list())
    }

    /// Luxemburg norm ‖x‖_Φ; the returned c satisfies τ(Φ(|x|/c)) ≤ 1.
    pub fn orlicz_norm(&self, phi: &OrliczFunction) -> f64 {
        luxemburg_norm_of_values(phi, &self.singular_value_list())
    }

    /// ‖x‖_p = τ(|x|^p)^{1/p}; the operator norm for p = ∞.
    pub fn lp_norm(&self, p: f64) -> f64 {
        lp_norm_of_values(&self.singular_value_list(), p)
    }

    /// (y, z) with y = (x + x*)/2, z = (x − x*)/(2i), so x = y + iz.
    pub fn hermitian_parts(&self) -> (Self, Self) {
        let adj = self.adjoint();
        let y = (self + &adj).scale_real(0.5);
        let z = (self - &adj).scale(Complex64::new(0.0, -0.5));
        (y, z)
    }

    /// Block-diagonal embedding of `self` at position `slot` of `slots` blocks.
    pub fn embed_block(&self, slot: usize, slots: usize) -> Self {
        assert!(slot < slots);
        let d = self.dim;
        let mut out = Self::zeros(d * slots);
        for i in 0..d {
            for j in 0..d {
                out[(slot * d + i, slot * d + j)] = self[(i, j)];
            }
        }
        out
    }

    /// The d×d block at (row_block, col_block) of a (d·k)×(d·k) operator.
    pub fn block(&self, d: usize, row_block: usize, col_block: usize) -> Self {
        Self::from_fn(d, |i, j| self[(row_block * d + i, col_block * d + j)])
    }
}

fn from_eigen(e: &HermitianEigen, f: impl Fn(usize, f64) -> f64) -> Operator {
    let n = e.n;
    let weights: Vec<f64> = e.values.iter().enumerate().map(|(k, v)| f(k, *v)).collect();
    let mut out = Operator::zeros(n);
    for k in 0..n {
        let w = weights[k];
        if w == 0.0 {
            continue;
        }
        for i in 0..n {
            let vik = e.vector_entry(i, k) * w;
            for j in 0..n {
                out.data[i * n + j] += vik * e.vector_entry(j, k).conj();
            }
        }
    }
    out
}

/// Fraction of `values` strictly above s.
pub fn distribution_of(values: &[f64], s: f64) -> f64 {
    values.iter().filter(|v| **v > s).count() as f64 / values.len() as f64
}

/// Mean of Φ over the given singular values.
pub fn phi_moment_of_values(phi: &OrliczFunction, values: &[f64]) -> f64 {
    values.iter().map(|v| phi.eval(*v)).sum::<f64>() / values.len() as f64
}

/// Stieltjes sum Σ_j (Φ(s_j) − Φ(s_{j−1}))·#{σ ≥ s_j}/d over the distinct jumps s_j.
pub fn layer_cake_of_values(phi: &OrliczFunction, values: &[f64]) -> f64 {
    let d = values.len() as f64;
    let mut jumps: Vec<f64> = values.iter().copied().filter(|v| *v > 0.0).collect();
    jumps.sort_by(f64::total_cmp);
    jumps.dedup();
    let mut prev = 0.0;
    let mut total = 0.0;
    for s in jumps {
        let mass = values.iter().filter(|v| **v >= s).count() as f64 / d;
        let phis = phi.eval(s);
        total += (phis - prev) * mass;
        prev = phis;
    }
    total
}

pub fn lp_norm_of_values(values: &[f64], p: f64) -> f64 {
    assert!(p > 0.0, "lp norm needs p > 0");
    if p.is_infinite() {
        return values.iter().copied().fold(0.0, f64::max);
    }
    let mean = values.iter().map(|v| v.powf(p)).sum::<f64>() / values.len() as f64;
    mean.powf(1.0 / p)
}

/// Bisection in ln c for τ(Φ(σ/c)) = 1, returning the upper end of the bracket.
pub fn luxemburg_norm_of_values(phi: &OrliczFunction, values: &[f64]) -> f64 {
    let top = values.iter().copied().fold(0.0, f64::max);
    if top == 0.0 {
        return 0.0;
    }
    let modular = |c: f64| phi_moment_of_values(phi, &values.iter().map(|v| v / c).collect::<Vec<_>>());
    let mut lo = top;
    while modular(lo) <= 1.0 {
        lo *= 0.5;
    }
    let mut hi = top;
    while modular(hi) > 1.0 {
        hi *= 2.0;
    }
    while (hi - lo) > NORM_REL_TOL * 0.25 * hi {
        let mid = (lo * hi).sqrt();
        if modular(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Σ x_k* x_k.
pub fn column_gram(xs: &[Operator]) -> Result<Operator> {
    sum_of(xs, Operator::gram)
}

/// Σ x_k x_k*.
pub fn row_gram(xs: &[Operator]) -> Result<Operator> {
    sum_of(xs, Operator::co_gram)
}

fn sum_of(xs: &[Operator], f: impl Fn(&Operator) -> Operator) -> Result<Operator> {
    let first = xs
        .first()
        .ok_or_else(|| Error::InvalidArgument("empty operator sequence".into()))?;
    let mut acc = Operator::zeros(first.dim());
    for x in xs {
        acc = acc.try_add(&f(x))?;
    }
    Ok(acc)
}

/// (Σ |x_k|²)^{1/2}.
pub fn column_square(xs: &[Operator]) -> Result<Operator> {
    Ok(column_gram(xs)?.psd_sqrt())
}

/// (Σ |x_k*|²)^{1/2}.
pub fn row_square(xs: &[Operator]) -> Result<Operator> {
    Ok(row_gram(xs)?.psd_sqrt())
}

/// τ(Φ(h^{1/2})) for positive semidefinite h, read directly off the spectrum of h.
pub fn phi_moment_of_sqrt(phi: &OrliczFunction, h: &Operator) -> f64 {
    let sigma: Vec<f64> = h.eigen().values.iter().map(|v| v.max(0.0).sqrt()).collect();
    phi_moment_of_values(phi, &sigma)
}

/// τ(Φ((Σ|x_k|²)^{1/2})).
pub fn column_modular(phi: &OrliczFunction, xs: &[Operator]) -> Result<f64> {
    Ok(phi_moment_of_sqrt(phi, &column_gram(xs)?))
}

/// τ(Φ((Σ|x_k*|²)^{1/2})).
pub fn row_modular(phi: &OrliczFunction, xs: &[Operator]) -> Result<f64> {
    Ok(phi_moment_of_sqrt(phi, &row_gram(xs)?))
}

macro_rules! binop {
    ($trait:ident, $method:ident, $try:ident) => {
        impl $trait<&Operator> for &Operator {
            type Output = Operator;
            fn $method(self, rhs: &Operator) -> Operator {
                self.$try(rhs).expect("operator dimension mismatch")
            }
        }
        impl $trait<Operator> for Operator {
            type Output = Operator;
            fn $method(self, rhs: Operator) -> Operator {
                (&self).$try(&rhs).expect("operator dimension mismatch")
            }
        }
        impl $trait<&Operator> for Operator {
            type Output = Operator;
            fn $method(self, rhs: &Operator) -> Operator {
                (&self).$try(rhs).expect("operator dimension mismatch")
            }
        }
        impl $trait<Operator> for &Operator {
            type Output = Operator;
            fn $method(self, rhs: Operator) -> Operator {
                self.$try(&rhs).expect("operator dimension mismatch")
            }
        }
    };
}

binop!(Add, add, try_add);
binop!(Sub, sub, try_sub);
binop!(Mul, mul, try_mul);

impl Neg for &Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        self.scale_real(-1.0)
    }
}

impl Neg for Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        self.scale_real(-1.0)
    }
}

/// Exchange format: `{"dim": d, "entries": [[re, im], ...]}` in row-major order.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OperatorJson {
    dim: usize,
    entries: Vec<[f64; 2]>,
}

impl Serialize for Operator {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        OperatorJson { dim: self.dim, entries: self.data.iter().map(|z| [z.re, z.im]).collect() }
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Operator {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = OperatorJson::deserialize(d)?;
        let data = raw.entries.iter().map(|[re, im]| Complex64::new(*re, *im)).collect();
        Operator::from_row_major(raw.dim, data).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{gaussian_operator, stream_rng};
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn random_op(d: usize, seed: u64) -> Operator {
        gaussian_operator(&mut stream_rng(seed, 0, 0), d, 0.0, false)
    }

    #[test]
    fn abs_examples() {
        let x = Operator::from_real_diagonal(&[-3.0, 2.0]);
        assert!(x.abs().distance(&Operator::from_real_diagonal(&[3.0, 2.0])) < 1e-14);
        let (s, t) = (0.6, 0.8);
        let u = Operator::from_row_major(2, vec![c(s), c(-t), c(t), c(s)]).unwrap();
        assert!(u.abs().distance(&Operator::identity(2)) < 1e-14);
        let x = random_op(16, 1);
        let a = x.abs();
        assert!((&a * &a).distance(&x.gram()) <= 1e-10);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let a = Operator::identity(2);
        let b = Operator::identity(3);
        assert!(matches!(a.try_mul(&b), Err(Error::DimensionMismatch { left: 2, right: 3 })));
        assert!(a.try_add(&b).is_err());
    }

    #[test]
    fn singular_value_examples() {
        let x = Operator::from_real_diagonal(&[3.0, 1.0, 2.0]);
        let mu = x.singular_values();
        assert!((mu.at(0.0) - 3.0).abs() < 1e-14);
        assert!((mu.at(0.4) - 2.0).abs() < 1e-14);
        assert!((mu.at(0.9) - 1.0).abs() < 1e-14);
        assert!(Operator::zeros(4).singular_value_list().iter().all(|v| *v == 0.0));
        let x = random_op(8, 2);
        let parseval = x.singular_values().integrate(|v| v * v);
        assert!((parseval - x.gram().tau().re).abs() < 1e-10);
    }

    #[test]
    fn distribution_and_projection_examples() {
        let x = Operator::from_real_diagonal(&[3.0, 1.0, 2.0]);
        assert!((x.distribution(1.5) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(x.distribution(3.0), 0.0);
        let p = x.spectral_projection(1.5);
        assert!(p.distance(&Operator::from_real_diagonal(&[1.0, 0.0, 1.0])) < 1e-14);
        let inv = Operator::from_real_diagonal(&[0.5, 1.0, 2.0]);
        assert!(inv.spectral_projection(0.0).distance(&Operator::identity(3)) < 1e-14);
        // tie rule: eigenvalue equal to the cut is excluded
        assert!(x.spectral_projection(2.0).distance(&Operator::from_real_diagonal(&[1.0, 0.0, 0.0])) < 1e-14);
        let x = random_op(16, 3);
        let s = x.singular_value_list()[5] * 0.999;
        let p = x.spectral_projection(s);
        assert!((&p * &p).distance(&p) < 1e-12);
        assert!(p.hermitian_defect() < 1e-12);
        assert!((p.tau().re - 6.0 / 16.0).abs() < 1e-12);
    }

    #[test]
    fn modular_examples() {
        let phi = OrliczFunction::power_log(1.2, 0.5).unwrap();
        assert!((Operator::identity(5).trace_phi_moment(&phi) - phi.eval(1.0)).abs() < 1e-15);
        let sq = OrliczFunction::power(2.0).unwrap();
        let x = Operator::from_real_diagonal(&[1.0, 2.0, 3.0]);
        assert!((x.trace_phi_moment(&sq) - 14.0 / 3.0).abs() < 1e-13);
        assert_eq!(Operator::zeros(3).layer_cake_trace(&phi), 0.0);
        let cc = Operator::scalar(4, c(1.7));
        assert!((cc.layer_cake_trace(&phi) - phi.eval(1.7)).abs() < 1e-14);
        for seed in 0..20 {
            let x = random_op(8, 100 + seed);
            let a = x.trace_phi_moment(&phi);
            let b = x.layer_cake_trace(&phi);
            assert!((a - b).abs() <= 1e-12 * a, "{a} vs {b}");
        }
    }

    #[test]
    fn orlicz_norm_examples() {
        let phi = OrliczFunction::power_log(1.2, 0.5).unwrap();
        assert_eq!(Operator::zeros(3).orlicz_norm(&phi), 0.0);
        for p in [1.0, 2.0, 3.5] {
            let pw = OrliczFunction::power(p).unwrap();
            let x = random_op(8, 7);
            let n = x.orlicz_norm(&pw);
            assert!((n - x.lp_norm(p)).abs() <= 1e-9 * n);
        }
        // Φ⁻¹(1) by an independent scalar bisection
        let (mut lo, mut hi) = (0.0f64, 10.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if phi.eval(mid) < 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let x = Operator::scalar(4, c(2.5));
        assert!((x.orlicz_norm(&phi) - 2.5 / hi).abs() < 1e-9);
    }

    #[test]
    fn lp_norm_examples() {
        for p in [0.5, 1.0, 3.0, f64::INFINITY] {
            assert!((Operator::identity(6).lp_norm(p) - 1.0).abs() < 1e-14);
        }
        let x = Operator::from_real_diagonal(&[3.0, 1.0, 2.0]);
        assert!((x.lp_norm(f64::INFINITY) - 3.0).abs() < 1e-14);
    }

    #[test]
    fn column_and_row_squares() {
        let x = random_op(6, 9);
        assert!(column_square(&[x.clone()]).unwrap().distance(&x.abs()) < 1e-10);
        assert!(row_square(&[x.clone()]).unwrap().distance(&x.adjoint().abs()) < 1e-10);
        let a = Operator::from_real_diagonal(&[3.0, 0.0, 1.0]);
        let b = Operator::from_real_diagonal(&[4.0, 2.0, 0.0]);
        let sc = column_square(&[a.clone(), b.clone()]).unwrap();
        assert!(sc.distance(&Operator::from_real_diagonal(&[5.0, 2.0, 1.0])) < 1e-12);
        let xs: Vec<Operator> = (0..4).map(|k| random_op(8, 20 + k)).collect();
        let total: f64 = xs.iter().map(|x| x.gram().tau().re).sum();
        let c2 = column_square(&xs).unwrap();
        let r2 = row_square(&xs).unwrap();
        assert!(((&c2 * &c2).tau().re - total).abs() < 1e-10 * total);
        assert!(((&r2 * &r2).tau().re - total).abs() < 1e-10 * total);
    }

    #[test]
    fn hermitian_parts_examples() {
        let h = random_op(5, 30);
        let h = (&h + &h.adjoint()).scale_real(0.5);
        let (y, z) = h.hermitian_parts();
        assert!(y.distance(&h) < 1e-15 && z.frobenius_norm() < 1e-15);
        let (y, z) = h.scale(Complex64::i()).hermitian_parts();
        assert!(y.frobenius_norm() < 1e-15 && z.distance(&h) < 1e-14);
        let x = random_op(16, 31);
        let (y, z) = x.hermitian_parts();
        let lhs = &y * &y + &z * &z;
        let rhs = (x.gram() + x.co_gram()).scale_real(0.5);
        assert!(lhs.distance(&rhs) < 1e-12);
        assert!((y + z.scale(Complex64::i())).distance(&x) < 1e-14);
    }

    #[test]
    fn json_round_trip() {
        let x = random_op(3, 40);
        let s = serde_json::to_string(&x).unwrap();
        assert!(s.starts_with("{\"dim\":3,\"entries\":[["));
        let back: Operator = serde_json::from_str(&s).unwrap();
        assert_eq!(back, x);
        assert!(serde_json::from_str::<Operator>(r#"{"dim":2,"entries":[[1,0]]}"#).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn singular_function_invariants(seed in 0u64..10_000, d in 1usize..10) {
            let x = random_op(d, seed);
            let mu = x.singular_values();
            prop_assert!(mu.values.windows(2).all(|w| w[0] >= w[1]));
            let mu_adj = x.adjoint().singular_values();
            let mu_abs = x.abs().singular_values();
            for k in 0..d {
                let tol = 1e-9 * mu.values[0].max(1e-300);
                prop_assert!((mu.values[k] - mu_adj.values[k]).abs() <= tol);
                prop_assert!((mu.values[k] - mu_abs.values[k]).abs() <= tol);
            }
            for s in [0.1, 0.5, 1.0, 2.0] {
                let lam = x.distribution(s);
                let measure = mu.values.iter().filter(|v| **v > s).count() as f64 / d as f64;
                prop_assert_eq!(lam, measure);
            }
        }

        #[test]
        fn kolmogorov_and_power_moment(seed in 0u64..10_000, d in 2usize..9) {
            let x = random_op(d, seed);
            for p in [1.0, 2.0, 4.0] {
                let norm_p = x.lp_norm(p).powf(p);
                for j in 0..10 {
                    let s = 0.05 * (j + 1) as f64 * x.operator_norm();
                    prop_assert!(x.distribution(s) <= norm_p / s.powf(p) * (1.0 + 1e-12));
                }
                let pw = OrliczFunction::power(p).unwrap();
                let m = x.trace_phi_moment(&pw);
                prop_assert!((m - norm_p).abs() <= 1e-12 * norm_p);
            }
        }

        #[test]
        fn luxemburg_normalization(seed in 0u64..10_000, d in 1usize..9) {
            let x = random_op(d, seed);
            let phi = OrliczFunction::power_sin(4.0, 0.2).unwrap();
            let n = x.orlicz_norm(&phi);
            let normalized = x.scale_real(1.0 / n);
            prop_assert!(normalized.trace_phi_moment(&phi) <= 1.0 + 1e-9);
        }

        #[test]
        fn lp_norms_are_monotone(seed in 0u64..10_000, d in 1usize..9) {
            let x = random_op(d, seed);
            let ps = [0.5, 1.0, 1.5, 2.0, 4.0, f64::INFINITY];
            for w in ps.windows(2) {
                prop_assert!(x.lp_norm(w[0]) <= x.lp_norm(w[1]) * (1.0 + 1e-12));
            }
        }
    }
}
