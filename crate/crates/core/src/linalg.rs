//! Small dense complex matrices and matrix-valued forms at a single point.

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::graded::form::{mask_degree, merge_sign, Mask};
use crate::C64;

pub type CMat = DMatrix<C64>;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn zeros(n: usize) -> CMat {
    CMat::zeros(n, n)
}

pub fn eye(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn scalar(n: usize, s: C64) -> CMat {
    CMat::identity(n, n) * s
}

pub fn dagger(m: &CMat) -> CMat {
    m.adjoint()
}

/// Kronecker product `a (x) b`, with the index of `b` fastest.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Block-diagonal `a (+) b`.
pub fn block_diag(a: &CMat, b: &CMat) -> CMat {
    let (n, m) = (a.nrows(), b.nrows());
    let mut out = zeros(n + m);
    out.view_mut((0, 0), (n, n)).copy_from(a);
    out.view_mut((n, n), (m, m)).copy_from(b);
    out
}

/// Largest entry modulus.
pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// `max |U^* U - 1|`.
pub fn unitarity_defect(u: &CMat) -> f64 {
    max_abs(&(u.adjoint() * u - eye(u.nrows())))
}

/// Matrix exponential.
pub fn expm(m: &CMat) -> CMat {
    if m.nrows() == 1 {
        return CMat::from_element(1, 1, m[(0, 0)].exp());
    }
    m.clone().exp()
}

/// Eigenvalues of a normal matrix, via the complex Schur form.
pub fn normal_eigenvalues(m: &CMat) -> Vec<C64> {
    if m.nrows() == 1 {
        return vec![m[(0, 0)]];
    }
    let schur = nalgebra::linalg::Schur::new(m.clone());
    let (_, t) = schur.unpack();
    (0..t.nrows()).map(|i| t[(i, i)]).collect()
}

pub fn det(m: &CMat) -> C64 {
    if m.nrows() == 0 {
        return c(1.0, 0.0);
    }
    m.determinant()
}

pub fn trace(m: &CMat) -> C64 {
    m.trace()
}

/// Supertrace with the first `plus` basis vectors even.
pub fn supertrace(m: &CMat, plus: usize) -> C64 {
    let mut s = c(0.0, 0.0);
    for i in 0..m.nrows() {
        if i < plus {
            s += m[(i, i)];
        } else {
            s -= m[(i, i)];
        }
    }
    s
}

/// Matrix-valued differential form at one point, sparse by coordinate mask.
#[derive(Clone, Debug, PartialEq)]
pub struct MatForm {
    pub rank: usize,
    pub comps: BTreeMap<Mask, CMat>,
}

impl MatForm {
    pub fn zero(rank: usize) -> Self {
        Self { rank, comps: BTreeMap::new() }
    }

    pub fn scalar_unit(rank: usize) -> Self {
        let mut f = Self::zero(rank);
        f.comps.insert(0, eye(rank));
        f
    }

    /// One-form from per-coordinate matrices.
    pub fn one_form(a: &[CMat]) -> Self {
        let rank = a.first().map(|m| m.nrows()).unwrap_or(0);
        let mut f = Self::zero(rank);
        for (k, m) in a.iter().enumerate() {
            if max_abs(m) > 0.0 {
                f.comps.insert(1 << k, m.clone());
            }
        }
        f
    }

    pub fn add_comp(&mut self, mask: Mask, m: CMat) {
        match self.comps.get_mut(&mask) {
            Some(e) => *e += m,
            None => {
                self.comps.insert(mask, m);
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, v) in &other.comps {
            out.add_comp(*k, v.clone());
        }
        out
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { rank: self.rank, comps: self.comps.iter().map(|(k, v)| (*k, v * s)).collect() }
    }

    /// Wedge product with matrix multiplication, dropping terms above `max_degree`.
    pub fn wedge(&self, other: &Self, max_degree: usize) -> Self {
        let mut out = Self::zero(self.rank);
        for (ma, a) in &self.comps {
            for (mb, b) in &other.comps {
                if ma & mb != 0 || mask_degree(ma | mb) > max_degree {
                    continue;
                }
                let s = merge_sign(*ma, *mb);
                out.add_comp(ma | mb, (a * b) * c(s, 0.0));
            }
        }
        out
    }

    /// Applies a matrix map to every component.
    pub fn map(&self, f: impl Fn(&CMat) -> CMat) -> Self {
        let comps: BTreeMap<Mask, CMat> = self.comps.iter().map(|(k, v)| (*k, f(v))).collect();
        let rank = comps.values().next().map(|m| m.nrows()).unwrap_or(self.rank);
        Self { rank, comps }
    }

    pub fn conj_by(&self, g: &CMat, ginv: &CMat) -> Self {
        self.map(|m| g * m * ginv)
    }

    pub fn component(&self, mask: Mask) -> CMat {
        self.comps.get(&mask).cloned().unwrap_or_else(|| zeros(self.rank))
    }

    pub fn max_abs(&self) -> f64 {
        self.comps.values().map(max_abs).fold(0.0, f64::max)
    }

    /// Scalar form `mask -> str(component)`.
    pub fn supertrace(&self, plus: usize) -> BTreeMap<Mask, C64> {
        self.comps.iter().map(|(k, v)| (*k, supertrace(v, plus))).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kron_and_blocks() {
        let a = CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(4.0, 0.0)]);
        let b = eye(2);
        let k = kron(&a, &b);
        assert_eq!(k[(0, 2)], c(2.0, 0.0));
        assert_eq!(k[(1, 3)], c(2.0, 0.0));
        let d = block_diag(&a, &eye(1));
        assert_eq!(d.nrows(), 3);
        assert_eq!(d[(2, 2)], c(1.0, 0.0));
        assert_eq!(supertrace(&d, 2), c(4.0, 0.0));
    }

    #[test]
    fn one_forms_anticommute_in_trace() {
        let a = CMat::from_row_slice(2, 2, &[c(0.0, 1.0), c(1.0, 0.0), c(-1.0, 0.0), c(0.0, -2.0)]);
        let b = CMat::from_row_slice(2, 2, &[c(0.0, 0.5), c(0.0, 1.0), c(0.0, 1.0), c(0.0, 0.0)]);
        let x = MatForm::one_form(&[a.clone(), zeros(2)]);
        let y = MatForm::one_form(&[zeros(2), b.clone()]);
        let xy = x.wedge(&y, 2);
        let yx = y.wedge(&x, 2);
        let t1 = trace(&xy.component(0b11));
        let t2 = trace(&yx.component(0b11));
        assert!((t1 + t2).norm() < 1e-14);
    }

    #[test]
    fn eigenvalues_of_unitary() {
        let h = CMat::from_row_slice(2, 2, &[c(0.3, 0.0), c(0.1, 0.2), c(0.1, -0.2), c(-0.7, 0.0)]);
        let u = expm(&(h * c(0.0, 1.0)));
        assert!(unitarity_defect(&u) < 1e-13);
        let ev = normal_eigenvalues(&u);
        for e in &ev {
            assert!((e.norm() - 1.0).abs() < 1e-12);
        }
        let prod = ev[0] * ev[1];
        assert!((prod - det(&u)).norm() < 1e-12);
    }
}
