//! Dense square complex matrices carrying an optional subsystem [`Shape`].

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::shape::{Radix, Shape};

pub type C64 = Complex64;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Dense square complex matrix, row-major storage.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<C64>,
    shape: Option<Shape>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        ComplexMatrix { dim, data: vec![ZERO; dim * dim], shape: None }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = ONE;
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                data.push(f(r, c));
            }
        }
        ComplexMatrix { dim, data, shape: None }
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::DimMismatch("rows of unequal length".into()));
        }
        Ok(ComplexMatrix { dim, data: rows.concat(), shape: None })
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let dim = values.len();
        let mut m = Self::zeros(dim);
        for (i, &v) in values.iter().enumerate() {
            m.data[i * dim + i] = C64::new(v, 0.0);
        }
        m
    }

    /// Rank-one projector |v⟩⟨v| / ⟨v|v⟩.
    pub fn projector(v: &[C64]) -> Self {
        let dim = v.len();
        let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        ComplexMatrix::from_fn(dim, |r, c| v[r] * v[c].conj() / norm)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn shape(&self) -> Option<&Shape> {
        self.shape.as_ref()
    }

    /// Attach a shape; its total dimension must match the matrix dimension.
    pub fn with_shape(mut self, shape: Shape) -> Result<Self> {
        if shape.total_dim() != self.dim {
            return Err(Error::DimMismatch(format!(
                "shape dim {} vs matrix dim {}",
                shape.total_dim(),
                self.dim
            )));
        }
        self.shape = Some(shape);
        Ok(self)
    }

    pub fn without_shape(mut self) -> Self {
        self.shape = None;
        self
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.data[r * self.dim + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: C64) {
        self.data[r * self.dim + c] = v;
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn row(&self, r: usize) -> &[C64] {
        &self.data[r * self.dim..(r + 1) * self.dim]
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a - b)
    }

    fn zip(&self, other: &Self, f: impl Fn(C64, C64) -> C64) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimMismatch(format!("{} vs {}", self.dim, other.dim)));
        }
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect();
        Ok(ComplexMatrix { dim: self.dim, data, shape: self.shape.clone() })
    }

    pub fn scale(&self, s: C64) -> Self {
        let data = self.data.iter().map(|&a| a * s).collect();
        ComplexMatrix { dim: self.dim, data, shape: self.shape.clone() }
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.dim);
        for r in 0..self.dim {
            for c in 0..self.dim {
                out.data[c * self.dim + r] = self.get(r, c).conj();
            }
        }
        out.shape = self.shape.clone();
        out
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.dim);
        for r in 0..self.dim {
            for c in 0..self.dim {
                out.data[c * self.dim + r] = self.get(r, c);
            }
        }
        out.shape = self.shape.clone();
        out
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimMismatch(format!("{} vs {}", self.dim, other.dim)));
        }
        let n = self.dim;
        let mut out = Self::zeros(n);
        for r in 0..n {
            let row = &self.data[r * n..(r + 1) * n];
            let orow = &mut out.data[r * n..(r + 1) * n];
            for (k, &a) in row.iter().enumerate() {
                if a == ZERO {
                    continue;
                }
                let brow = &other.data[k * n..(k + 1) * n];
                for c in 0..n {
                    orow[c] += a * brow[c];
                }
            }
        }
        out.shape = self.shape.clone();
        Ok(out)
    }

    /// Matrix–vector product.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let n = self.dim;
        let mut out = vec![ZERO; n];
        for r in 0..n {
            let mut acc = ZERO;
            for c in 0..n {
                acc += self.data[r * n + c] * v[c];
            }
            out[r] = acc;
        }
        out
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// max |A − A†| over entries.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut defect: f64 = 0.0;
        for r in 0..self.dim {
            for c in r..self.dim {
                defect = defect.max((self.get(r, c) - self.get(c, r).conj()).norm());
            }
        }
        defect
    }

    /// max |A†A − 1| over entries.
    pub fn unitarity_defect(&self) -> f64 {
        let prod = self.adjoint().mul(self).expect("same dim");
        let mut defect: f64 = 0.0;
        for r in 0..self.dim {
            for c in 0..self.dim {
                let expect = if r == c { ONE } else { ZERO };
                defect = defect.max((prod.get(r, c) - expect).norm());
            }
        }
        defect
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_defect() <= tol
    }

    /// (A + A†)/2, keeping the shape.
    pub fn symmetrize(&self) -> Self {
        let adj = self.adjoint();
        let mut out = self.add(&adj).expect("same dim").scale_re(0.5);
        out.shape = self.shape.clone();
        out
    }

    /// At most one nonzero entry per row and per column (within `tol`).
    pub fn is_monomial(&self, tol: f64) -> bool {
        let n = self.dim;
        let mut col_seen = vec![false; n];
        for r in 0..n {
            let mut row_seen = false;
            for c in 0..n {
                if self.get(r, c).norm() > tol {
                    if row_seen || col_seen[c] {
                        return false;
                    }
                    row_seen = true;
                    col_seen[c] = true;
                }
            }
        }
        true
    }

    fn shape_or_err(&self) -> Result<&Shape> {
        self.shape.as_ref().ok_or(Error::MissingShape)
    }

    /// Partial transpose over the listed parties (key and shield factors of
    /// each listed party jointly). Involution on the same party set.
    pub fn partial_transpose(&self, parties: &[usize]) -> Result<Self> {
        let shape = self.shape_or_err()?.clone();
        let mut positions = Vec::with_capacity(parties.len() * 2);
        for &p in parties {
            positions.extend_from_slice(&shape.party_factors(p)?);
        }
        let radix = Radix::new(shape.factor_dims());
        let n = self.dim;
        let nf = radix.dims().len();
        let mut digits = vec![vec![0usize; nf]; n];
        for (i, d) in digits.iter_mut().enumerate() {
            radix.decompose(i, d);
        }
        let mut out = Self::zeros(n);
        for r in 0..n {
            for c in 0..n {
                let src_r = radix.swap_in(&digits[r], &digits[c], &positions);
                let src_c = radix.swap_in(&digits[c], &digits[r], &positions);
                out.data[r * n + c] = self.data[src_r * n + src_c];
            }
        }
        out.shape = Some(shape);
        Ok(out)
    }

    /// Trace out the listed parties; the result keeps the remaining parties.
    pub fn partial_trace(&self, parties: &[usize]) -> Result<Self> {
        let shape = self.shape_or_err()?.clone();
        let np = shape.num_parties();
        for &p in parties {
            if p >= np {
                return Err(Error::BadSubsystem { index: p, parties: np });
            }
        }
        let keep: Vec<usize> = (0..np).filter(|p| !parties.contains(p)).collect();
        if keep.is_empty() {
            let mut out = Self::zeros(1);
            out.data[0] = self.trace();
            return Ok(out);
        }
        let radix = Radix::new(shape.factor_dims());
        let kept_parties: Vec<crate::shape::Party> =
            keep.iter().map(|&p| shape.parties()[p]).collect();
        let out_shape = Shape::new(kept_parties)?;
        let out_radix = Radix::new(out_shape.factor_dims());
        let out_dim = out_shape.total_dim();

        // Factor positions of kept parties in original layout, ordered to
        // match the output's canonical layout (kept keys, kept shields).
        let mut kept_positions: Vec<usize> = keep.clone();
        kept_positions.extend(keep.iter().map(|&p| np + p));
        let traced_positions: Vec<usize> = (0..np)
            .filter(|p| parties.contains(p))
            .flat_map(|p| [p, np + p])
            .collect();
        let traced_dims: Vec<usize> =
            traced_positions.iter().map(|&f| radix.dims()[f]).collect();
        let traced_radix = Radix::new(traced_dims);
        let traced_total = traced_radix.total();

        let nf = radix.dims().len();
        let mut out = Self::zeros(out_dim);
        let mut out_digits_r = vec![0usize; kept_positions.len()];
        let mut out_digits_c = vec![0usize; kept_positions.len()];
        let mut tr_digits = vec![0usize; traced_positions.len()];
        let mut full_r = vec![0usize; nf];
        let mut full_c = vec![0usize; nf];
        for out_r in 0..out_dim {
            out_radix.decompose(out_r, &mut out_digits_r);
            for out_c in 0..out_dim {
                out_radix.decompose(out_c, &mut out_digits_c);
                let mut acc = ZERO;
                for t in 0..traced_total {
                    traced_radix.decompose(t, &mut tr_digits);
                    for (slot, &pos) in kept_positions.iter().enumerate() {
                        full_r[pos] = out_digits_r[slot];
                        full_c[pos] = out_digits_c[slot];
                    }
                    for (slot, &pos) in traced_positions.iter().enumerate() {
                        full_r[pos] = tr_digits[slot];
                        full_c[pos] = tr_digits[slot];
                    }
                    acc += self.data[radix.compose(&full_r) * self.dim + radix.compose(&full_c)];
                }
                out.data[out_r * out_dim + out_c] = acc;
            }
        }
        out.shape = Some(out_shape);
        Ok(out)
    }
}

/// Kronecker product; shapes concatenate when both operands carry one.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (na, nb) = (a.dim(), b.dim());
    let n = na * nb;
    let mut out = ComplexMatrix::zeros(n);
    for ra in 0..na {
        for ca in 0..na {
            let v = a.get(ra, ca);
            if v == ZERO {
                continue;
            }
            for rb in 0..nb {
                let dst = (ra * nb + rb) * n + ca * nb;
                let src = rb * nb;
                for cb in 0..nb {
                    out.data[dst + cb] = v * b.data[src + cb];
                }
            }
        }
    }
    if let (Some(sa), Some(sb)) = (a.shape(), b.shape()) {
        debug_assert!(sa.kron_compatible(sb), "kron factor order would not be canonical");
        out.shape = Some(sa.concat(sb));
    }
    out
}

/// k-fold Kronecker power.
pub fn tensor_power(a: &ComplexMatrix, k: u32) -> ComplexMatrix {
    assert!(k >= 1, "tensor power needs k >= 1");
    let mut out = a.clone();
    for _ in 1..k {
        out = tensor(&out, a);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shape::Shape;

    fn sigma_z() -> ComplexMatrix {
        ComplexMatrix::diagonal(&[1.0, -1.0])
    }

    #[test]
    fn tensor_identities() {
        let i2 = ComplexMatrix::identity(2);
        let i4 = tensor(&i2, &i2);
        assert_eq!(i4, ComplexMatrix::identity(4));

        let zz = tensor(&sigma_z(), &sigma_z());
        let expect = ComplexMatrix::diagonal(&[1.0, -1.0, -1.0, 1.0]);
        assert_eq!(zz, expect);
    }

    #[test]
    fn tensor_concatenates_shapes() {
        let a = ComplexMatrix::identity(2).with_shape(Shape::keys(2, 1)).unwrap();
        let b = ComplexMatrix::identity(3).with_shape(Shape::shields(3, 1)).unwrap();
        let t = tensor(&a, &b);
        let s = t.shape().unwrap();
        assert_eq!(s.num_parties(), 2);
        assert_eq!(s.total_dim(), 6);
        assert_eq!(s.parties()[0].key_dim, 2);
        assert_eq!(s.parties()[1].shield_dim, 3);
    }

    #[test]
    fn partial_transpose_requires_shape() {
        let m = ComplexMatrix::identity(4);
        assert!(matches!(m.partial_transpose(&[0]), Err(Error::MissingShape)));
    }

    #[test]
    fn partial_transpose_all_parties_is_full_transpose() {
        let shape = Shape::keys(2, 2);
        let m = ComplexMatrix::from_fn(4, |r, c| C64::new((r * 4 + c) as f64, (r + c) as f64))
            .with_shape(shape)
            .unwrap();
        let pt = m.partial_transpose(&[0, 1]).unwrap();
        assert_eq!(pt.without_shape(), m.transpose().without_shape());
    }

    #[test]
    fn partial_trace_of_product_state() {
        let a = ComplexMatrix::from_fn(2, |r, c| C64::new((1 + r + 2 * c) as f64, 0.0))
            .with_shape(Shape::keys(2, 1))
            .unwrap();
        let b = ComplexMatrix::from_fn(3, |r, c| C64::new((r * 3 + c) as f64, 1.0))
            .with_shape(Shape::keys(3, 1))
            .unwrap();
        let prod = tensor(&a, &b);
        let reduced = prod.partial_trace(&[1]).unwrap();
        let expect = a.scale(b.trace());
        for r in 0..2 {
            for c in 0..2 {
                assert!((reduced.get(r, c) - expect.get(r, c)).norm() < 1e-12);
            }
        }
        // Trace is preserved.
        assert!((reduced.trace() - prod.trace()).norm() < 1e-12);
    }
}
