//! Truncated multivariate Taylor arithmetic ("jets") over the variables
//! `(x¹..xⁿ, y¹..yⁿ)` of a chart of the tangent bundle.
//!
//! A [`Jet`] holds the Taylor coefficients of a smooth function about a fixed
//! base point, truncated to a box `deg_x ≤ X, deg_y ≤ Y`. Every jet also carries
//! its *validity*: the sub-box on which its coefficients are exact. Products
//! keep the smaller validity, a `∂/∂yⁱ` lowers the y-validity by one, and so on.
//! Asking for a derivative beyond what the validity supports is an
//! [`Error::OrderUnsupported`], never a silently wrong number.
//!
//! Coefficients are stored densely as `c[xi * ny + yi]`, with x- and
//! y-monomials each sorted by total degree so that every validity sub-box is a
//! prefix block.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::Error;
use crate::scalar::Scalar;

/// Validity marker for jets that are exact polynomials (constants, variables).
pub const EXACT: u8 = u8::MAX;

#[derive(Debug)]
struct MonomialSet {
    exps: Vec<Vec<u8>>,
    /// `end[d]` = number of monomials of degree ≤ d.
    end: Vec<usize>,
    lookup: HashMap<Vec<u8>, usize>,
    /// `(a, b, a·b)` sorted by degree of the product.
    pairs: Vec<(u32, u32, u32)>,
    pair_end: Vec<usize>,
    /// Per variable: `(src, dst, exponent)` with `dst = src − e_var`.
    deriv: Vec<Vec<(u32, u32, f64)>>,
    /// `α!` per monomial.
    factorial: Vec<f64>,
}

impl MonomialSet {
    fn new(nvars: usize, max_deg: u8) -> Self {
        let mut exps: Vec<Vec<u8>> = Vec::new();
        let mut end = Vec::with_capacity(max_deg as usize + 1);
        for d in 0..=max_deg {
            let mut cur = vec![0u8; nvars];
            push_compositions(&mut exps, &mut cur, 0, d);
            end.push(exps.len());
        }
        let lookup: HashMap<Vec<u8>, usize> = exps
            .iter()
            .enumerate()
            .map(|(i, e)| (e.clone(), i))
            .collect();
        let degree = |e: &[u8]| e.iter().map(|&v| v as u32).sum::<u32>();

        let mut pairs = Vec::new();
        for (a, ea) in exps.iter().enumerate() {
            for (b, eb) in exps.iter().enumerate() {
                if degree(ea) + degree(eb) <= max_deg as u32 {
                    let ec: Vec<u8> = ea.iter().zip(eb).map(|(p, q)| p + q).collect();
                    pairs.push((a as u32, b as u32, lookup[&ec] as u32));
                }
            }
        }
        pairs.sort_by_key(|&(_, _, c)| (degree(&exps[c as usize]), c));
        let mut pair_end = vec![0; max_deg as usize + 1];
        for d in 0..=max_deg as usize {
            pair_end[d] = pairs
                .iter()
                .take_while(|&&(_, _, c)| degree(&exps[c as usize]) as usize <= d)
                .count();
        }

        let mut deriv = vec![Vec::new(); nvars];
        for (src, e) in exps.iter().enumerate() {
            for (v, dv) in deriv.iter_mut().enumerate() {
                if e[v] > 0 {
                    let mut lowered = e.clone();
                    lowered[v] -= 1;
                    dv.push((src as u32, lookup[&lowered] as u32, e[v] as f64));
                }
            }
        }
        let factorial = exps
            .iter()
            .map(|e| e.iter().map(|&k| factorial(k as usize)).product())
            .collect();

        MonomialSet {
            exps,
            end,
            lookup,
            pairs,
            pair_end,
            deriv,
            factorial,
        }
    }

    fn len(&self) -> usize {
        self.exps.len()
    }

    fn unit(&self, var: usize) -> usize {
        let mut e = vec![0u8; self.exps[0].len()];
        e[var] = 1;
        self.lookup[&e]
    }
}

fn push_compositions(out: &mut Vec<Vec<u8>>, cur: &mut Vec<u8>, pos: usize, remaining: u8) {
    if pos + 1 == cur.len() {
        cur[pos] = remaining;
        out.push(cur.clone());
        cur[pos] = 0;
        return;
    }
    for k in (0..=remaining).rev() {
        cur[pos] = k;
        push_compositions(out, cur, pos + 1, remaining - k);
    }
    cur[pos] = 0;
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|v| v as f64).product()
}

/// Monomial tables for one chart dimension and truncation box. Shared by all
/// jets expanded at the same order; obtain through [`JetSpace::get`].
#[derive(Debug)]
pub struct JetSpace {
    n: usize,
    max_x: u8,
    max_y: u8,
    x: MonomialSet,
    y: MonomialSet,
}

impl JetSpace {
    /// Cached space for dimension `n` truncated at `deg_x ≤ max_x, deg_y ≤ max_y`.
    pub fn get(n: usize, max_x: u8, max_y: u8) -> Arc<JetSpace> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, u8, u8), Arc<JetSpace>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("jet space cache poisoned");
        guard
            .entry((n, max_x, max_y))
            .or_insert_with(|| {
                Arc::new(JetSpace {
                    n,
                    max_x,
                    max_y,
                    x: MonomialSet::new(n, max_x),
                    y: MonomialSet::new(n, max_y),
                })
            })
            .clone()
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn max_orders(&self) -> (u8, u8) {
        (self.max_x, self.max_y)
    }

    fn len(&self) -> usize {
        self.x.len() * self.y.len()
    }

    fn clip(&self, valid: (u8, u8)) -> (u8, u8) {
        (valid.0.min(self.max_x), valid.1.min(self.max_y))
    }

    /// Row/column extents of the coefficient block for a validity box.
    fn block(&self, valid: (u8, u8)) -> (usize, usize) {
        let (vx, vy) = self.clip(valid);
        (self.x.end[vx as usize], self.y.end[vy as usize])
    }
}

/// Truncated Taylor expansion of a scalar germ about a base point.
#[derive(Clone)]
pub struct Jet {
    space: Option<Arc<JetSpace>>,
    valid: (u8, u8),
    c: Vec<f64>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("value", &self.c[0])
            .field("valid", &self.valid)
            .finish()
    }
}

impl Jet {
    pub fn constant(v: f64) -> Jet {
        Jet {
            space: None,
            valid: (EXACT, EXACT),
            c: vec![v],
        }
    }

    /// The coordinate function `xⁱ`, expanded about `value`.
    pub fn variable_x(space: &Arc<JetSpace>, i: usize, value: f64) -> Jet {
        let mut c = vec![0.0; space.len()];
        c[0] = value;
        if space.max_x > 0 {
            c[space.x.unit(i) * space.y.len()] = 1.0;
        }
        Jet {
            space: Some(space.clone()),
            valid: (EXACT, EXACT),
            c,
        }
    }

    /// The fibre coordinate `yⁱ`, expanded about `value`.
    pub fn variable_y(space: &Arc<JetSpace>, i: usize, value: f64) -> Jet {
        let mut c = vec![0.0; space.len()];
        c[0] = value;
        if space.max_y > 0 {
            c[space.y.unit(i)] = 1.0;
        }
        Jet {
            space: Some(space.clone()),
            valid: (EXACT, EXACT),
            c,
        }
    }

    /// Validity box `(x, y)`; [`EXACT`] marks an untruncated polynomial.
    pub fn validity(&self) -> (u8, u8) {
        match &self.space {
            Some(s) if self.valid != (EXACT, EXACT) => s.clip(self.valid),
            _ => self.valid,
        }
    }

    /// Value at the expansion point.
    pub fn value(&self) -> f64 {
        self.c[0]
    }

    pub fn is_constant(&self) -> bool {
        self.space.is_none()
    }

    /// `∂^{|α|+|β|} f / ∂x^α ∂y^β` at the base point, indices listed with repetition.
    pub fn partial(&self, xs: &[usize], ys: &[usize]) -> Result<f64, Error> {
        let Some(space) = &self.space else {
            return Ok(if xs.is_empty() && ys.is_empty() {
                self.c[0]
            } else {
                0.0
            });
        };
        let (vx, vy) = self.validity();
        if (vx != EXACT && xs.len() > vx as usize) || (vy != EXACT && ys.len() > vy as usize) {
            return Err(Error::OrderUnsupported {
                requested: (xs.len(), ys.len()),
                available: (vx as usize, vy as usize),
            });
        }
        if xs.len() > space.max_x as usize || ys.len() > space.max_y as usize {
            return Ok(0.0);
        }
        let mut ex = vec![0u8; space.n];
        for &i in xs {
            ex[i] += 1;
        }
        let mut ey = vec![0u8; space.n];
        for &i in ys {
            ey[i] += 1;
        }
        let xi = space.x.lookup[&ex];
        let yi = space.y.lookup[&ey];
        Ok(self.c[xi * space.y.len() + yi] * space.x.factorial[xi] * space.y.factorial[yi])
    }

    pub fn d_x(&self, i: usize) -> Result<Jet, Error> {
        self.derivative(i, true)
    }

    pub fn d_y(&self, i: usize) -> Result<Jet, Error> {
        self.derivative(i, false)
    }

    fn derivative(&self, var: usize, along_x: bool) -> Result<Jet, Error> {
        let Some(space) = &self.space else {
            return Ok(Jet::constant(0.0));
        };
        let (vx, vy) = self.validity();
        let lowered = |v: u8| -> Result<u8, Error> {
            match v {
                EXACT => Ok(EXACT),
                0 => Err(Error::OrderUnsupported {
                    requested: if along_x { (1, 0) } else { (0, 1) },
                    available: (vx as usize, vy as usize),
                }),
                v => Ok(v - 1),
            }
        };
        let valid = if along_x {
            (lowered(vx)?, vy)
        } else {
            (vx, lowered(vy)?)
        };
        let ny = space.y.len();
        let mut c = vec![0.0; space.len()];
        if along_x {
            for &(src, dst, f) in &space.x.deriv[var] {
                let (s, d) = (src as usize * ny, dst as usize * ny);
                for yi in 0..ny {
                    c[d + yi] += f * self.c[s + yi];
                }
            }
        } else {
            let nx = space.x.len();
            for &(src, dst, f) in &space.y.deriv[var] {
                for xi in 0..nx {
                    c[xi * ny + dst as usize] += f * self.c[xi * ny + src as usize];
                }
            }
        }
        Ok(Jet {
            space: Some(space.clone()),
            valid,
            c,
        })
    }

    /// `Σ_m a_m (self − self(0))^m`: composition with a univariate Taylor series
    /// whose coefficients `a_m = f⁽ᵐ⁾(c₀)/m!` are produced by `coeff`.
    fn compose(&self, coeff: impl Fn(f64, usize) -> f64) -> Jet {
        let c0 = self.c[0];
        let Some(space) = &self.space else {
            return Jet::constant(coeff(c0, 0));
        };
        let (vx, vy) = space.clip(self.valid);
        let order = vx as usize + vy as usize;
        let mut h = self.clone();
        h.valid = (vx, vy);
        h.c[0] = 0.0;
        let mut acc = Jet::constant(coeff(c0, order));
        for m in (0..order).rev() {
            acc = (acc * h.clone()).add_f64(coeff(c0, m));
        }
        acc
    }

    fn zip_linear(&self, other: &Jet, alpha: f64, beta: f64) -> Jet {
        match (&self.space, &other.space) {
            (None, None) => Jet::constant(alpha * self.c[0] + beta * other.c[0]),
            (Some(_), None) => {
                let mut r = self.scale(alpha);
                r.c[0] += beta * other.c[0];
                r
            }
            (None, Some(_)) => {
                let mut r = other.scale(beta);
                r.c[0] += alpha * self.c[0];
                r
            }
            (Some(sa), Some(sb)) => {
                debug_assert!(Arc::ptr_eq(sa, sb), "jets from different spaces");
                let valid = (self.valid.0.min(other.valid.0), self.valid.1.min(other.valid.1));
                let (rx, ry) = sa.block(valid);
                let ny = sa.y.len();
                let mut c = vec![0.0; sa.len()];
                for xi in 0..rx {
                    let row = xi * ny;
                    for yi in row..row + ry {
                        c[yi] = alpha * self.c[yi] + beta * other.c[yi];
                    }
                }
                Jet {
                    space: Some(sa.clone()),
                    valid,
                    c,
                }
            }
        }
    }

    fn product(&self, other: &Jet) -> Jet {
        let (space, a, b) = match (&self.space, &other.space) {
            (None, None) => return Jet::constant(self.c[0] * other.c[0]),
            (Some(_), None) => return self.scale(other.c[0]),
            (None, Some(_)) => return other.scale(self.c[0]),
            (Some(s), Some(_)) => (s, self, other),
        };
        let valid = space.clip((a.valid.0.min(b.valid.0), a.valid.1.min(b.valid.1)));
        let ny = space.y.len();
        let xp = &space.x.pairs[..space.x.pair_end[valid.0 as usize]];
        let yp = &space.y.pairs[..space.y.pair_end[valid.1 as usize]];
        let row_nonzero = |j: &Jet, xi: usize| j.c[xi * ny..(xi + 1) * ny].iter().any(|&v| v != 0.0);
        let nx = space.x.end[valid.0 as usize];
        let a_rows: Vec<bool> = (0..nx).map(|xi| row_nonzero(a, xi)).collect();
        let b_rows: Vec<bool> = (0..nx).map(|xi| row_nonzero(b, xi)).collect();
        let mut c = vec![0.0; space.len()];
        for &(xa, xb, xc) in xp {
            if !a_rows[xa as usize] || !b_rows[xb as usize] {
                continue;
            }
            let (ra, rb, rc) = (xa as usize * ny, xb as usize * ny, xc as usize * ny);
            let arow = &a.c[ra..ra + ny];
            let brow = &b.c[rb..rb + ny];
            let crow = &mut c[rc..rc + ny];
            for &(ya, yb, yc) in yp {
                crow[yc as usize] += arow[ya as usize] * brow[yb as usize];
            }
        }
        Jet {
            space: Some(space.clone()),
            valid,
            c,
        }
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        self.zip_linear(&rhs, 1.0, 1.0)
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        self.zip_linear(&rhs, 1.0, -1.0)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        self.product(&rhs)
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, rhs: Jet) -> Jet {
        if rhs.is_constant() {
            return self.scale(1.0 / rhs.c[0]);
        }
        self.product(&rhs.recip())
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Scalar for Jet {
    fn from_f64(v: f64) -> Self {
        Jet::constant(v)
    }

    fn value(&self) -> f64 {
        self.c[0]
    }

    fn scale(&self, factor: f64) -> Self {
        let mut r = self.clone();
        r.c.iter_mut().for_each(|v| *v *= factor);
        r
    }

    fn add_f64(&self, c: f64) -> Self {
        let mut r = self.clone();
        r.c[0] += c;
        r
    }

    fn recip(&self) -> Self {
        self.compose(|c0, m| {
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            sign / c0.powi(m as i32 + 1)
        })
    }

    fn sqrt(&self) -> Self {
        self.powf(0.5)
    }

    fn powf(&self, p: f64) -> Self {
        self.compose(|c0, m| {
            // binom(p, m) c0^(p−m)
            let mut coef = c0.powf(p - m as f64);
            for j in 0..m {
                coef *= (p - j as f64) / (j as f64 + 1.0);
            }
            coef
        })
    }

    fn exp(&self) -> Self {
        self.compose(|c0, m| c0.exp() / factorial(m))
    }

    fn ln(&self) -> Self {
        self.compose(|c0, m| {
            if m == 0 {
                c0.ln()
            } else {
                let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
                sign / (m as f64 * c0.powi(m as i32))
            }
        })
    }

    fn sin(&self) -> Self {
        self.compose(|c0, m| (c0 + m as f64 * std::f64::consts::FRAC_PI_2).sin() / factorial(m))
    }

    fn cos(&self) -> Self {
        self.compose(|c0, m| (c0 + m as f64 * std::f64::consts::FRAC_PI_2).cos() / factorial(m))
    }

    fn powi(&self, p: i32) -> Self {
        match p {
            0 => Jet::constant(1.0),
            1 => self.clone(),
            2 => self.product(self),
            p if p < 0 => self.recip().powi(-p),
            p => {
                let half = self.powi(p / 2);
                let sq = half.product(&half);
                if p % 2 == 1 {
                    sq.product(self)
                } else {
                    sq
                }
            }
        }
    }
}
