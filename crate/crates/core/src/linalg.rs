//! Dense symmetric linear algebra: eigendecomposition, matrix functions,
//! inverses, and covariance-to-correlation transforms.
//!
//! Matrix functions go through a full symmetric eigendecomposition. The
//! dimensions in play (p up to a few hundred) make the O(p^3) spectral route
//! cheap, and it keeps square roots and inverses mutually consistent.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Dense symmetric p x p matrix, row-major, exactly symmetric by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(dim: usize) -> Self {
        SymMatrix {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = 1.0;
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &v) in diag.iter().enumerate() {
            assert!(v.is_finite(), "non-finite diagonal entry {i}: {v}");
            m.data[i * diag.len() + i] = v;
        }
        m
    }

    /// Builds a symmetric matrix by evaluating `f` on the upper triangle
    /// (j >= i) and mirroring, so `get(i, j) == get(j, i)` holds exactly.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in i..dim {
                let v = f(i, j);
                assert!(v.is_finite(), "non-finite entry at ({i}, {j}): {v}");
                data[i * dim + j] = v;
                data[j * dim + i] = v;
            }
        }
        SymMatrix { dim, data }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |a, &v| a.max(v.abs()))
    }

    pub fn is_identity(&self) -> bool {
        for i in 0..self.dim {
            for j in 0..self.dim {
                let want = if i == j { 1.0 } else { 0.0 };
                if self.get(i, j) != want {
                    return false;
                }
            }
        }
        true
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.dim, "matvec dimension mismatch");
        (0..self.dim)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .map(|(&a, &b)| a * b)
                    .sum::<f64>()
            })
            .collect()
    }

    /// Quadratic form v' M v.
    pub fn quad_form(&self, v: &[f64]) -> f64 {
        assert_eq!(v.len(), self.dim, "quad_form dimension mismatch");
        let mut acc = 0.0;
        for i in 0..self.dim {
            let ri: f64 = self
                .row(i)
                .iter()
                .zip(v)
                .map(|(&a, &b)| a * b)
                .sum();
            acc += v[i] * ri;
        }
        acc
    }
}

/// Eigendecomposition M = Q diag(values) Q' with eigenvalues in descending
/// order. Eigenvectors are stored row-wise: `eigenvector(k)` is the k-th
/// column of Q.
#[derive(Debug, Clone)]
pub struct EigenDecomp {
    dim: usize,
    values: Vec<f64>,
    vectors_t: Vec<f64>,
}

impl EigenDecomp {
    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn eigenvector(&self, k: usize) -> &[f64] {
        &self.vectors_t[k * self.dim..(k + 1) * self.dim]
    }

    /// The decomposition of M + delta I: same basis, shifted eigenvalues.
    pub(crate) fn shifted(&self, delta: f64) -> EigenDecomp {
        EigenDecomp {
            dim: self.dim,
            values: self.values.iter().map(|v| v + delta).collect(),
            vectors_t: self.vectors_t.clone(),
        }
    }

    /// Reassembles Q f(Lambda) Q' as an exactly symmetric matrix.
    pub fn assemble(&self, f: impl Fn(f64) -> f64) -> SymMatrix {
        let p = self.dim;
        let mut data = vec![0.0; p * p];
        for k in 0..p {
            let fk = f(self.values[k]);
            if fk == 0.0 {
                continue;
            }
            let vk = self.eigenvector(k);
            for i in 0..p {
                let a = fk * vk[i];
                let row = &mut data[i * p..(i + 1) * p];
                for (out, &q) in row[i..].iter_mut().zip(&vk[i..]) {
                    *out += a * q;
                }
            }
        }
        for i in 0..p {
            for j in (i + 1)..p {
                data[j * p + i] = data[i * p + j];
            }
        }
        let m = SymMatrix { dim: p, data };
        assert!(
            m.data.iter().all(|v| v.is_finite()),
            "non-finite entry in assembled spectral function"
        );
        m
    }
}

/// Symmetric eigendecomposition with eigenvalues sorted descending.
///
/// Fails explicitly if the iterative solver does not converge or produces
/// non-finite output; it never returns silent NaNs.
pub fn eigh(m: &SymMatrix) -> Result<EigenDecomp> {
    let p = m.dim();
    let dm = DMatrix::from_fn(p, p, |i, j| m.get(i, j));
    let se = SymmetricEigen::try_new(dm, f64::EPSILON, 500 * p.max(1))
        .ok_or(Error::EighNoConvergence { dim: p })?;

    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| {
        se.eigenvalues[b]
            .partial_cmp(&se.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });

    let mut values = Vec::with_capacity(p);
    let mut vectors_t = vec![0.0; p * p];
    for (k, &src) in order.iter().enumerate() {
        values.push(se.eigenvalues[src]);
        for i in 0..p {
            vectors_t[k * p + i] = se.eigenvectors[(i, src)];
        }
    }
    if values.iter().any(|v| !v.is_finite()) || vectors_t.iter().any(|v| !v.is_finite()) {
        return Err(Error::EighNoConvergence { dim: p });
    }
    Ok(EigenDecomp {
        dim: p,
        values,
        vectors_t,
    })
}

/// Relative tolerance for calling a slightly negative eigenvalue "zero".
const PSD_TOL_REL: f64 = 1e-8;

/// Default eigenvalue clamp floor for [`sqrt_psd_auto`], relative to the
/// largest eigenvalue.
const SQRT_CLAMP_REL: f64 = 1e-10;

/// Relative eigenvalue threshold below which [`inverse_psd`] refuses to invert.
const INVERT_MIN_REL: f64 = 1e-10;

/// Symmetric PSD square root via the spectral route.
///
/// Eigenvalues below `clamp_floor` are clamped to `clamp_floor` before the
/// square root; a materially negative eigenvalue is an error naming it.
pub fn sqrt_psd(m: &SymMatrix, clamp_floor: f64) -> Result<SymMatrix> {
    if !(clamp_floor >= 0.0) {
        return Err(Error::config(
            "clamp_floor",
            format!("must be >= 0, got {clamp_floor}"),
        ));
    }
    let decomp = eigh(m)?;
    let max_abs = decomp
        .values()
        .iter()
        .fold(0.0f64, |a, &v| a.max(v.abs()));
    let tol = PSD_TOL_REL * max_abs;
    let min = *decomp.values().last().expect("nonempty spectrum");
    if min < -tol {
        return Err(Error::NotPsd {
            eigenvalue: min,
            tol,
        });
    }
    Ok(decomp.assemble(|l| l.max(clamp_floor).sqrt()))
}

/// [`sqrt_psd`] with the default clamp floor of 1e-10 times the largest
/// eigenvalue.
pub fn sqrt_psd_auto(m: &SymMatrix) -> Result<SymMatrix> {
    let decomp = eigh(m)?;
    let max = decomp.values()[0].max(0.0);
    let max_abs = decomp
        .values()
        .iter()
        .fold(0.0f64, |a, &v| a.max(v.abs()));
    let tol = PSD_TOL_REL * max_abs;
    let min = *decomp.values().last().expect("nonempty spectrum");
    if min < -tol {
        return Err(Error::NotPsd {
            eigenvalue: min,
            tol,
        });
    }
    let floor = SQRT_CLAMP_REL * max;
    Ok(decomp.assemble(|l| l.max(floor).sqrt()))
}

/// Inverse of a symmetric positive definite matrix.
///
/// Requires the smallest eigenvalue to exceed 1e-10 times the largest;
/// otherwise fails with a condition-number estimate.
pub fn inverse_psd(m: &SymMatrix) -> Result<SymMatrix> {
    let decomp = eigh(m)?;
    let max = decomp.values()[0];
    let min = *decomp.values().last().expect("nonempty spectrum");
    if !(min > INVERT_MIN_REL * max && min > 0.0) {
        let condition = if min > 0.0 { max / min } else { f64::INFINITY };
        return Err(Error::NearSingular { condition });
    }
    Ok(decomp.assemble(|l| 1.0 / l))
}

/// Correlation matrix R = D^{-1/2} M D^{-1/2} with an exact unit diagonal.
pub fn correlation_of(sigma: &SymMatrix) -> Result<SymMatrix> {
    let p = sigma.dim();
    let mut inv_sd = Vec::with_capacity(p);
    for i in 0..p {
        let v = sigma.get(i, i);
        if !(v > 0.0) {
            return Err(Error::NonPositiveDiagonal { index: i, value: v });
        }
        inv_sd.push(1.0 / v.sqrt());
    }
    Ok(SymMatrix::from_fn(p, |i, j| {
        if i == j {
            1.0
        } else {
            sigma.get(i, j) * inv_sd[i] * inv_sd[j]
        }
    }))
}

/// Sum of squared entries, which equals tr(M^2) for symmetric M.
pub fn trace_sq(m: &SymMatrix) -> f64 {
    m.data.iter().map(|v| v * v).sum()
}

/// Row-major dense product `out = x * m` for an n x p matrix `x` and a
/// symmetric p x p matrix `m`. The ikj loop order keeps both operands
/// streaming.
pub(crate) fn mul_rows_by_sym(x: &[f64], n: usize, p: usize, m: &SymMatrix, out: &mut [f64]) {
    assert_eq!(x.len(), n * p);
    assert_eq!(out.len(), n * p);
    assert_eq!(m.dim(), p);
    out.fill(0.0);
    for i in 0..n {
        let xr = &x[i * p..(i + 1) * p];
        let or = &mut out[i * p..(i + 1) * p];
        for (k, &a) in xr.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (o, &mk) in or.iter_mut().zip(m.row(k)) {
                *o += a * mk;
            }
        }
    }
}
