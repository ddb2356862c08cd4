//! Brute-force Levi-Civita geometry of a Riemannian metric `a_ij(x)`, by
//! fourth-order central differences of the matrix field.

pub type MatrixField<'a> = &'a dyn Fn(&[f64]) -> Vec<f64>;

const H: f64 = 1e-3;

/// Fourth-order central difference of a vector-valued function along `x^k`.
fn diff(f: &dyn Fn(&[f64]) -> Vec<f64>, x: &[f64], k: usize) -> Vec<f64> {
    let shifted = |s: f64| {
        let mut z = x.to_vec();
        z[k] += s * H;
        f(&z)
    };
    let (p1, m1, p2, m2) = (shifted(1.0), shifted(-1.0), shifted(2.0), shifted(-2.0));
    (0..p1.len())
        .map(|i| (8.0 * (p1[i] - m1[i]) - (p2[i] - m2[i])) / (12.0 * H))
        .collect()
}

fn invert(a: &[f64], n: usize) -> Vec<f64> {
    let mut m: Vec<f64> = a.to_vec();
    let mut inv = vec![0.0; n * n];
    for i in 0..n {
        inv[i * n + i] = 1.0;
    }
    for c in 0..n {
        let p = (c..n).max_by(|&r, &s| m[r * n + c].abs().total_cmp(&m[s * n + c].abs())).unwrap();
        for j in 0..n {
            m.swap(c * n + j, p * n + j);
            inv.swap(c * n + j, p * n + j);
        }
        let d = m[c * n + c];
        for j in 0..n {
            m[c * n + j] /= d;
            inv[c * n + j] /= d;
        }
        for r in 0..n {
            if r != c {
                let f = m[r * n + c];
                for j in 0..n {
                    m[r * n + j] -= f * m[c * n + j];
                    inv[r * n + j] -= f * inv[c * n + j];
                }
            }
        }
    }
    inv
}

/// Christoffel symbols `Γ^i_jk` at `x`, flattened as `(i * n + j) * n + k`.
pub fn christoffel(a: MatrixField, n: usize, x: &[f64]) -> Vec<f64> {
    let inv = invert(&a(x), n);
    let da: Vec<Vec<f64>> = (0..n).map(|k| diff(a, x, k)).collect();
    let mut out = vec![0.0; n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                out[(i * n + j) * n + k] = 0.5
                    * (0..n)
                        .map(|l| inv[i * n + l] * (da[j][l * n + k] + da[k][l * n + j] - da[l][j * n + k]))
                        .sum::<f64>();
            }
        }
    }
    out
}

/// `(R(∂_k, ∂_l)∂_j)^i`, flattened as `((i * n + j) * n + k) * n + l`, with
/// `R(X,Y) = ∇_X∇_Y − ∇_Y∇_X − ∇_[X,Y]`.
pub fn riemann(a: MatrixField, n: usize, x: &[f64]) -> Vec<f64> {
    let gamma = christoffel(a, n, x);
    let field = |z: &[f64]| christoffel(a, n, z);
    let dg: Vec<Vec<f64>> = (0..n).map(|k| diff(&field, x, k)).collect();
    let g = |i: usize, j: usize, k: usize| gamma[(i * n + j) * n + k];
    let mut out = vec![0.0; n * n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let mut v = dg[k][(i * n + l) * n + j] - dg[l][(i * n + k) * n + j];
                    for m in 0..n {
                        v += g(i, k, m) * g(m, l, j) - g(i, l, m) * g(m, k, j);
                    }
                    out[((i * n + j) * n + k) * n + l] = v;
                }
            }
        }
    }
    out
}

/// Jacobi operator `v ↦ R(v, y)y` as the matrix `J^i_j`.
pub fn jacobi(riem: &[f64], n: usize, y: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            for a in 0..n {
                for b in 0..n {
                    out[i * n + j] += riem[((i * n + a) * n + j) * n + b] * y[a] * y[b];
                }
            }
        }
    }
    out
}

/// Sectional curvature of the plane spanned by `u, v`.
pub fn sectional(riem: &[f64], a: &[f64], n: usize, u: &[f64], v: &[f64]) -> f64 {
    let ip = |p: &[f64], q: &[f64]| -> f64 { (0..n).map(|i| (0..n).map(|j| a[i * n + j] * p[i] * q[j]).sum::<f64>()).sum() };
    let ruv = jacobi(riem, n, v);
    let r_u: Vec<f64> = (0..n).map(|i| (0..n).map(|j| ruv[i * n + j] * u[j]).sum()).collect();
    ip(&r_u, u) / (ip(u, u) * ip(v, v) - ip(u, v).powi(2))
}

/// Conformal space-form matrix `δ_ij / (1 + κ|x|²/4)²`.
pub fn space_form(kappa: f64) -> impl Fn(&[f64]) -> Vec<f64> {
    move |x: &[f64]| {
        let n = x.len();
        let s = 1.0 + kappa / 4.0 * x.iter().map(|c| c * c).sum::<f64>();
        (0..n * n).map(|ij| if ij / n == ij % n { 1.0 / (s * s) } else { 0.0 }).collect()
    }
}

/// Relative Frobenius distance, floored at `unit`.
pub fn rel(a: &[f64], b: &[f64], unit: f64) -> f64 {
    let d = a.iter().zip(b).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
    let s = a.iter().map(|p| p * p).sum::<f64>().sqrt().max(b.iter().map(|p| p * p).sum::<f64>().sqrt());
    d / s.max(unit)
}
