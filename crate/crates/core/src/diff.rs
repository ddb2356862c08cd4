//! Mixed partial derivatives of scalar fields over `(x, y)`.
//!
//! Two backends: [`jet_eval`] reads exact derivatives off a truncated Taylor
//! expansion, [`fd_eval`] uses central differences with one Richardson level
//! and serves as an independent oracle.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::SamplePoint;
use crate::jet::{Jet, JetSpace};
use crate::metric::FinslerMetric;
use crate::scalar::Scalar;
use crate::tensor::{Signature, Tensor};

/// A scalar field on (an open part of) the slit tangent bundle.
pub trait ScalarField: Send + Sync {
    fn dimension(&self) -> usize;

    fn eval<S: Scalar>(&self, x: &[S], y: &[S]) -> Result<S>;

    fn check_point(&self, p: &SamplePoint) -> Result<()> {
        if p.dim() != self.dimension() {
            return Err(Error::InvalidPoint(format!(
                "point has dimension {} but the field has dimension {}",
                p.dim(),
                self.dimension()
            )));
        }
        Ok(())
    }
}

/// The fundamental function `L` of a metric, viewed as a scalar field.
#[derive(Debug, Clone, Copy)]
pub struct FundamentalFunction<M>(pub M);

impl<M: FinslerMetric> ScalarField for FundamentalFunction<M> {
    fn dimension(&self) -> usize {
        self.0.dimension()
    }
    fn eval<S: Scalar>(&self, x: &[S], y: &[S]) -> Result<S> {
        self.0.eval(x, y)
    }
    fn check_point(&self, p: &SamplePoint) -> Result<()> {
        self.0.check_point(p)
    }
}

/// The energy `E = ½L²` of a metric.
#[derive(Debug, Clone, Copy)]
pub struct Energy<M>(pub M);

impl<M: FinslerMetric> ScalarField for Energy<M> {
    fn dimension(&self) -> usize {
        self.0.dimension()
    }
    fn eval<S: Scalar>(&self, x: &[S], y: &[S]) -> Result<S> {
        Ok(self.0.eval(x, y)?.square().scale(0.5))
    }
    fn check_point(&self, p: &SamplePoint) -> Result<()> {
        self.0.check_point(p)
    }
}

pub const MAX_X_ORDER: usize = 2;
pub const MAX_Y_ORDER: usize = 4;
pub const MAX_TOTAL_ORDER: usize = 6;
pub const MAX_FD_TOTAL_ORDER: usize = 3;

/// Which partials of which field to compute, and where.
#[derive(Debug, Clone, Copy)]
pub struct JetRequest<'a, F> {
    pub field: &'a F,
    pub point: &'a SamplePoint,
    pub x_order: usize,
    pub y_order: usize,
}

impl<'a, F: ScalarField> JetRequest<'a, F> {
    pub fn new(field: &'a F, point: &'a SamplePoint, x_order: usize, y_order: usize) -> Result<Self> {
        if x_order > MAX_X_ORDER || y_order > MAX_Y_ORDER || x_order + y_order > MAX_TOTAL_ORDER {
            return Err(Error::OrderUnsupported {
                requested: (x_order, y_order),
                available: (MAX_X_ORDER, MAX_Y_ORDER),
            });
        }
        Ok(JetRequest {
            field,
            point,
            x_order,
            y_order,
        })
    }
}

/// All mixed partials `∂^{|α|+|β|} f / ∂x^α ∂y^β` with `|α| ≤ x_order`,
/// `|β| ≤ y_order`, keyed by sorted index lists.
#[derive(Debug, Clone, PartialEq)]
pub struct JetResult {
    n: usize,
    x_order: usize,
    y_order: usize,
    partials: BTreeMap<(Vec<usize>, Vec<usize>), f64>,
}

impl JetResult {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn orders(&self) -> (usize, usize) {
        (self.x_order, self.y_order)
    }

    pub fn value(&self) -> f64 {
        self.partials[&(vec![], vec![])]
    }

    /// The partial derivative along the listed x- and y-indices, in any order.
    pub fn get(&self, xs: &[usize], ys: &[usize]) -> Option<f64> {
        let mut xs = xs.to_vec();
        let mut ys = ys.to_vec();
        xs.sort_unstable();
        ys.sort_unstable();
        self.partials.get(&(xs, ys)).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[usize], &[usize], f64)> {
        self.partials.iter().map(|((xs, ys), v)| (xs.as_slice(), ys.as_slice(), *v))
    }
}

/// Sorted index multisets of size `0..=order` over `0..n`.
fn multisets(n: usize, order: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    let mut frontier = vec![vec![]];
    for _ in 0..order {
        let mut next = Vec::new();
        for m in &frontier {
            let start = m.last().copied().unwrap_or(0);
            for i in start..n {
                let mut e: Vec<usize> = m.clone();
                e.push(i);
                next.push(e);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

fn jet_of<F: ScalarField>(field: &F, p: &SamplePoint, x_order: usize, y_order: usize) -> Result<Jet> {
    field.check_point(p)?;
    let n = p.dim();
    let space = JetSpace::get(n, x_order as u8, y_order as u8);
    let x: Vec<Jet> = (0..n).map(|i| Jet::variable_x(&space, i, p.x()[i])).collect();
    let y: Vec<Jet> = (0..n).map(|i| Jet::variable_y(&space, i, p.y()[i])).collect();
    field.eval(&x, &y)
}

/// Exact partials from a Taylor expansion of the field.
pub fn jet_eval<F: ScalarField>(req: &JetRequest<'_, F>) -> Result<JetResult> {
    let jet = jet_of(req.field, req.point, req.x_order, req.y_order)?;
    let n = req.point.dim();
    let mut partials = BTreeMap::new();
    for xs in multisets(n, req.x_order) {
        for ys in multisets(n, req.y_order) {
            let v = jet.partial(&xs, &ys)?;
            partials.insert((xs.clone(), ys), v);
        }
    }
    Ok(JetResult {
        n,
        x_order: req.x_order,
        y_order: req.y_order,
        partials,
    })
}

/// Symmetric tensor of fibre derivatives `∂^r f/∂y^{i₁}…∂y^{i_r}` as a `(0,r)` tensor.
pub fn vertical_jet<F: ScalarField>(field: &F, p: &SamplePoint, order: usize) -> Result<Tensor<f64>> {
    if order > 3 {
        return Err(Error::OrderUnsupported {
            requested: (0, order),
            available: (0, 3),
        });
    }
    let jet = jet_of(field, p, 0, order)?;
    let n = p.dim();
    Tensor::try_from_fn(n, Signature::new(0, order), |idx| jet.partial(&[], idx))
}

/// Step for coordinate value `c` at relative step `step`.
pub(crate) fn step_for(step: f64, c: f64) -> f64 {
    step * (1.0 + c.abs())
}

/// Nested central difference of a vector-valued `f` on the stacked coordinates
/// `z = (x, y)` along `vars`, with steps `scale · h_v`.
fn nested_central<G>(f: &G, z: &mut Vec<f64>, vars: &[usize], steps: &[f64], scale: f64) -> Result<Vec<f64>>
where
    G: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let Some((&v, rest)) = vars.split_first() else {
        return f(z);
    };
    let h = steps[0] * scale;
    let orig = z[v];
    z[v] = orig + h;
    let plus = nested_central(f, z, rest, &steps[1..], scale);
    z[v] = orig - h;
    let minus = nested_central(f, z, rest, &steps[1..], scale);
    z[v] = orig;
    let (plus, minus) = (plus?, minus?);
    Ok(plus.iter().zip(&minus).map(|(a, b)| (a - b) / (2.0 * h)).collect())
}

/// Richardson-extrapolated mixed partial of a vector-valued function of `z`.
///
/// `noise` is the relative accuracy of `f` itself; when the difference between
/// successive step levels is above that noise floor and grows as the step
/// shrinks, cancellation dominates and [`Error::StepTooSmall`] is returned.
pub(crate) fn richardson_partial<G>(f: &G, z: &[f64], vars: &[usize], step: f64, noise: f64) -> Result<Vec<f64>>
where
    G: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let mut zz = z.to_vec();
    if vars.is_empty() {
        return f(&zz);
    }
    let steps: Vec<f64> = vars.iter().map(|&v| step_for(step, z[v])).collect();
    let d1 = nested_central(f, &mut zz, vars, &steps, 1.0)?;
    let d2 = nested_central(f, &mut zz, vars, &steps, 2.0)?;
    let d4 = nested_central(f, &mut zz, vars, &steps, 4.0)?;
    let f0 = f(z)?;
    let fscale = f0.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    let hprod: f64 = steps.iter().product();
    let floor = 64.0 * noise.max(f64::EPSILON) * fscale / hprod;
    let mut out = Vec::with_capacity(d1.len());
    for c in 0..d1.len() {
        let fine = (d2[c] - d1[c]).abs();
        let coarse = (d4[c] - d2[c]).abs();
        if fine > floor && fine > coarse {
            return Err(Error::StepTooSmall(format!(
                "partial along {vars:?}: |D(2h)-D(h)| = {fine:e} exceeds |D(4h)-D(2h)| = {coarse:e}"
            )));
        }
        out.push((4.0 * d1[c] - d2[c]) / 3.0);
    }
    Ok(out)
}

/// Finite-difference partials, total order at most [`MAX_FD_TOTAL_ORDER`].
pub fn fd_eval<F: ScalarField>(req: &JetRequest<'_, F>, step: f64) -> Result<JetResult> {
    if req.x_order + req.y_order > MAX_FD_TOTAL_ORDER {
        return Err(Error::OrderUnsupported {
            requested: (req.x_order, req.y_order),
            available: (MAX_FD_TOTAL_ORDER, MAX_FD_TOTAL_ORDER),
        });
    }
    if !(step > 0.0) {
        return Err(Error::StepTooSmall(format!("step must be positive, got {step}")));
    }
    let p = req.point;
    req.field.check_point(p)?;
    let n = p.dim();
    let z: Vec<f64> = p.x().iter().chain(p.y()).copied().collect();
    let f = |z: &[f64]| -> Result<Vec<f64>> { Ok(vec![req.field.eval(&z[..n], &z[n..])?]) };
    let mut partials = BTreeMap::new();
    for xs in multisets(n, req.x_order) {
        for ys in multisets(n, req.y_order) {
            if xs.len() + ys.len() > MAX_FD_TOTAL_ORDER {
                continue;
            }
            let vars: Vec<usize> = xs.iter().copied().chain(ys.iter().map(|i| i + n)).collect();
            let v = richardson_partial(&f, &z, &vars, step, f64::EPSILON)?[0];
            partials.insert((xs.clone(), ys), v);
        }
    }
    Ok(JetResult {
        n,
        x_order: req.x_order,
        y_order: req.y_order,
        partials,
    })
}

/// Derivative backend.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    Jet,
    Fd,
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::Jet => "jet",
            Backend::Fd => "fd",
        })
    }
}

impl FromStr for Backend {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "jet" => Ok(Backend::Jet),
            "fd" => Ok(Backend::Fd),
            other => Err(Error::Config(format!("unknown backend `{other}` (expected jet or fd)"))),
        }
    }
}

/// Default relative step of the finite-difference backend.
pub const DEFAULT_FD_STEP: f64 = 1e-3;
