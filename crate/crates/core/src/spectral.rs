//! Laplacian spectra and heat kernel signatures.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::graph::Graph;
use crate::math;
use crate::{Error, Result};

/// Dense square matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_rows(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::Contract(format!("{} entries for a {n}x{n} matrix", data.len())));
        }
        Ok(Self { n, data })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, &x| m.max(math::abs(x)))
    }

    pub fn matmul(&self, other: &Self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == 0.0 {
                    continue;
                }
                let row = &other.data[k * n..(k + 1) * n];
                for (o, &b) in out.data[i * n..(i + 1) * n].iter_mut().zip(row) {
                    *o += a * b;
                }
            }
        }
        out
    }
}

/// Combinatorial Laplacian `L = D - A`.
pub fn laplacian(graph: &Graph) -> SquareMatrix {
    let n = graph.num_nodes();
    let mut l = SquareMatrix::zeros(n);
    for &(u, v) in graph.edges() {
        l.set(u, v, -1.0);
        l.set(v, u, -1.0);
        l.data[u * n + u] += 1.0;
        l.data[v * n + v] += 1.0;
    }
    l
}

/// Eigenpairs of a symmetric matrix, eigenvalues ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    /// Row-major `n × n`; column `i` is the unit eigenvector for `eigenvalues[i]`.
    pub eigenvectors: SquareMatrix,
}

impl SpectralDecomposition {
    /// Entry `i` of eigenvector `k`.
    #[inline]
    pub fn component(&self, i: usize, k: usize) -> f64 {
        self.eigenvectors.get(i, k)
    }

    /// `Φ Λ Φᵀ`.
    pub fn reconstruct(&self) -> SquareMatrix {
        let n = self.eigenvalues.len();
        let mut out = SquareMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let s: f64 = (0..n)
                    .map(|k| self.component(i, k) * self.eigenvalues[k] * self.component(j, k))
                    .sum();
                out.set(i, j, s);
            }
        }
        out
    }
}

const SYMMETRY_TOL: f64 = 1e-10;

/// Full eigendecomposition of a symmetric matrix by Householder
/// tridiagonalization followed by the implicit QL algorithm.
pub fn eig_sym(matrix: &SquareMatrix) -> Result<SpectralDecomposition> {
    let n = matrix.dim();
    for i in 0..n {
        for j in (i + 1)..n {
            if math::abs(matrix.get(i, j) - matrix.get(j, i)) > SYMMETRY_TOL {
                return Err(Error::Contract(format!(
                    "matrix not symmetric at ({i}, {j}): {} vs {}",
                    matrix.get(i, j),
                    matrix.get(j, i)
                )));
            }
        }
    }
    if n == 0 {
        return Ok(SpectralDecomposition { eigenvalues: Vec::new(), eigenvectors: SquareMatrix::zeros(0) });
    }
    let mut v = matrix.clone();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tridiagonalize(&mut v, &mut d, &mut e);
    tridiagonal_ql(&mut v, &mut d, &mut e);
    Ok(SpectralDecomposition { eigenvalues: d, eigenvectors: v })
}

/// Householder reduction to tridiagonal form; `v` accumulates the transform,
/// `d` receives the diagonal and `e` the sub-diagonal (in `e[1..]`).
fn tridiagonalize(v: &mut SquareMatrix, d: &mut [f64], e: &mut [f64]) {
    let n = v.dim();
    for j in 0..n {
        d[j] = v.get(n - 1, j);
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for dk in d.iter().take(i) {
            scale += math::abs(*dk);
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v.get(i - 1, j);
                v.set(i, j, 0.0);
                v.set(j, i, 0.0);
            }
        } else {
            for dk in d.iter_mut().take(i) {
                *dk /= scale;
                h += *dk * *dk;
            }
            let mut f = d[i - 1];
            let mut g = math::sqrt(h);
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }
            for j in 0..i {
                f = d[j];
                v.set(j, i, f);
                g = e[j] + v.get(j, j) * f;
                for k in (j + 1)..i {
                    g += v.get(k, j) * d[k];
                    e[k] += v.get(k, j) * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    let x = v.get(k, j) - (f * e[k] + g * d[k]);
                    v.set(k, j, x);
                }
                d[j] = v.get(i - 1, j);
                v.set(i, j, 0.0);
            }
        }
        d[i] = h;
    }

    for i in 0..n - 1 {
        let diag = v.get(i, i);
        v.set(n - 1, i, diag);
        v.set(i, i, 1.0);
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v.get(k, i + 1) / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v.get(k, i + 1) * v.get(k, j);
                }
                for k in 0..=i {
                    let x = v.get(k, j) - g * d[k];
                    v.set(k, j, x);
                }
            }
        }
        for k in 0..=i {
            v.set(k, i + 1, 0.0);
        }
    }
    for j in 0..n {
        d[j] = v.get(n - 1, j);
        v.set(n - 1, j, 0.0);
    }
    v.set(n - 1, n - 1, 1.0);
    e[0] = 0.0;
}

/// Implicit QL iterations on the tridiagonal form, then an ascending sort.
fn tridiagonal_ql(v: &mut SquareMatrix, d: &mut [f64], e: &mut [f64]) {
    let n = v.dim();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(math::abs(d[l]) + math::abs(e[l]));
        let mut m = l;
        while m < n {
            if math::abs(e[m]) <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            loop {
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = math::hypot(p, 1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = math::hypot(p, e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for k in 0..n {
                        let hk = v.get(k, i + 1);
                        let vki = v.get(k, i);
                        v.set(k, i + 1, s * vki + c * hk);
                        v.set(k, i, c * vki - s * hk);
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if math::abs(e[l]) <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }

    // selection sort keeps the eigenvector columns in step
    for i in 0..n.saturating_sub(1) {
        let mut k = i;
        let mut p = d[i];
        for (j, &dj) in d.iter().enumerate().skip(i + 1) {
            if dj < p {
                k = j;
                p = dj;
            }
        }
        if k != i {
            d[k] = d[i];
            d[i] = p;
            for row in 0..n {
                let tmp = v.get(row, i);
                v.set(row, i, v.get(row, k));
                v.set(row, k, tmp);
            }
        }
    }
}

/// Heat kernel signature values for every node at every diffusion time.
#[derive(Debug, Clone, PartialEq)]
pub struct HksField {
    /// Row-major `[num_nodes × times.len()]`.
    pub values: Vec<f64>,
    pub times: Vec<f64>,
}

impl HksField {
    pub fn num_nodes(&self) -> usize {
        if self.times.is_empty() {
            0
        } else {
            self.values.len() / self.times.len()
        }
    }

    #[inline]
    pub fn get(&self, node: usize, scale: usize) -> f64 {
        self.values[node * self.times.len() + scale]
    }

    /// Values of every node at one scale.
    pub fn scale_column(&self, scale: usize) -> Vec<f64> {
        (0..self.num_nodes()).map(|v| self.get(v, scale)).collect()
    }
}

/// `count` diffusion times spaced evenly in log scale over `[lo, hi]`.
pub fn log_spaced_times(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let ratio = hi / lo;
            (0..count)
                .map(|k| lo * math::powf(ratio, k as f64 / (count - 1) as f64))
                .collect()
        }
    }
}

/// `f(v, t) = Σ_i exp(-λ_i t) φ_i(v)²` from the spectrum of `L = D - A`.
pub fn hks(graph: &Graph, times: &[f64]) -> Result<HksField> {
    if times.iter().any(|&t| !(t > 0.0)) {
        return Err(Error::Contract("diffusion times must be positive".into()));
    }
    if times.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Contract("diffusion times must be strictly ascending".into()));
    }
    let spectrum = eig_sym(&laplacian(graph))?;
    Ok(hks_from_spectrum(&spectrum, times))
}

pub fn hks_from_spectrum(spectrum: &SpectralDecomposition, times: &[f64]) -> HksField {
    let n = spectrum.eigenvalues.len();
    let s = times.len();
    let mut values = vec![0.0; n * s];
    for (j, &t) in times.iter().enumerate() {
        let decay: Vec<f64> = spectrum.eigenvalues.iter().map(|&l| math::exp(-l * t)).collect();
        for v in 0..n {
            let mut acc = 0.0;
            for (k, &w) in decay.iter().enumerate() {
                let phi = spectrum.component(v, k);
                acc += w * phi * phi;
            }
            values[v * s + j] = acc;
        }
    }
    HksField { values, times: times.to_vec() }
}

/// `exp(-t L)` by scaling and squaring with a truncated Taylor series. It
/// never touches an eigenbasis, so it checks [`hks`] independently.
pub fn heat_kernel_oracle(graph: &Graph, t: f64) -> Result<SquareMatrix> {
    if !(t >= 0.0) {
        return Err(Error::Contract(format!("diffusion time must be non-negative, got {t}")));
    }
    let l = laplacian(graph);
    let n = l.dim();
    let mut a = SquareMatrix::zeros(n);
    for (dst, &src) in a.data.iter_mut().zip(&l.data) {
        *dst = -t * src;
    }
    let norm = (0..n)
        .map(|i| (0..n).map(|j| math::abs(a.get(i, j))).sum::<f64>())
        .fold(0.0, f64::max);
    let mut squarings = 0u32;
    let mut scaled = norm;
    while scaled > 0.5 {
        scaled /= 2.0;
        squarings += 1;
    }
    let factor = 1.0 / (1u64 << squarings) as f64;
    for x in &mut a.data {
        *x *= factor;
    }

    let mut result = SquareMatrix::identity(n);
    let mut term = SquareMatrix::identity(n);
    for k in 1..=40 {
        term = term.matmul(&a);
        let inv = 1.0 / k as f64;
        for x in &mut term.data {
            *x *= inv;
        }
        for (r, &x) in result.data.iter_mut().zip(&term.data) {
            *r += x;
        }
        if term.max_abs() < 1e-20 {
            break;
        }
    }
    for _ in 0..squarings {
        result = result.matmul(&result);
    }
    Ok(result)
}
