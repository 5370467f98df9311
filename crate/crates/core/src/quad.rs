//! Composite tensor-product quadrature on intervals, rectangles and boxes.
//!
//! Every estimate comes with `err_est = |Q(n) - Q(n * refinement_factor)|`,
//! the difference between the rule at `n` panels per axis and one refinement
//! pass. The reported value is `Q(n)`.
//!
//! Sums are accumulated axis by axis in a fixed order and normalised by the
//! accumulated weight at each level, so results are reproducible bit for bit
//! and the mean of a constant `1` is exactly `1`.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::expr::{EvalError, Evaluable, Point3};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Axis {
        Axis::ALL[i]
    }

    pub fn name(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval<T> {
    pub lo: T,
    pub hi: T,
}

impl<T: Scalar> Interval<T> {
    pub fn mid(&self) -> T {
        (self.lo + self.hi) / T::lit(2.0)
    }

    pub fn width(&self) -> T {
        self.hi - self.lo
    }
}

/// An interval `[a,b]`, rectangle `[a,b]x[c,d]` or box `[a,b]x[c,d]x[e,f]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxNd<T> {
    bounds: Vec<Interval<T>>,
}

impl<T: Scalar> BoxNd<T> {
    /// Builds a box from per-axis `(lo, hi)` pairs in x, y, z order.
    pub fn new(bounds: &[(T, T)]) -> Result<Self> {
        if !(1..=3).contains(&bounds.len()) {
            return Err(Error::InvalidBox(format!(
                "expected 1 to 3 axes, got {}",
                bounds.len()
            )));
        }
        for (i, &(lo, hi)) in bounds.iter().enumerate() {
            let axis = Axis::from_index(i);
            if !lo.is_finite() || !hi.is_finite() {
                return Err(Error::InvalidBox(format!(
                    "axis {axis}: bounds must be finite"
                )));
            }
            if lo >= hi {
                return Err(Error::InvalidBox(format!(
                    "axis {axis}: lower bound {lo} must be strictly below upper bound {hi}"
                )));
            }
        }
        Ok(Self {
            bounds: bounds.iter().map(|&(lo, hi)| Interval { lo, hi }).collect(),
        })
    }

    /// Builds a box from a flat `lo,hi` list per axis, e.g. `[0,1,0,1,0,1]`.
    pub fn from_flat(flat: &[T]) -> Result<Self> {
        if flat.is_empty() || !flat.len().is_multiple_of(2) {
            return Err(Error::InvalidBox(format!(
                "expected an even number of bounds (lo,hi per axis), got {}",
                flat.len()
            )));
        }
        let pairs: Vec<(T, T)> = flat.chunks(2).map(|c| (c[0], c[1])).collect();
        Self::new(&pairs)
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn bound(&self, axis: Axis) -> Interval<T> {
        self.bounds[axis.index()]
    }

    pub fn bounds(&self) -> &[Interval<T>] {
        &self.bounds
    }

    pub fn axes(&self) -> impl Iterator<Item = Axis> + '_ {
        (0..self.dim()).map(Axis::from_index)
    }

    pub fn center(&self) -> Point3<T> {
        let mut p = Point3::default();
        for (i, b) in self.bounds.iter().enumerate() {
            p.set(i, b.mid());
        }
        p
    }

    pub fn volume(&self) -> T {
        self.bounds.iter().fold(T::one(), |acc, b| acc * b.width())
    }

    /// The `2^dim` corners, x-major (the last axis varies fastest).
    pub fn vertices(&self) -> Vec<Point3<T>> {
        let d = self.dim();
        (0..1usize << d)
            .map(|mask| {
                let mut p = Point3::default();
                for (i, b) in self.bounds.iter().enumerate() {
                    let hi = mask >> (d - 1 - i) & 1 == 1;
                    p.set(i, if hi { b.hi } else { b.lo });
                }
                p
            })
            .collect()
    }
}

impl<T: Scalar> Serialize for BoxNd<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<[T; 2]> = self.bounds.iter().map(|b| [b.lo, b.hi]).collect();
        pairs.serialize(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Rule {
    Midpoint,
    Simpson,
    Gauss5,
}

impl Rule {
    pub fn name(self) -> &'static str {
        match self {
            Rule::Midpoint => "midpoint",
            Rule::Simpson => "simpson",
            Rule::Gauss5 => "gauss5",
        }
    }

    /// Nodes on [-1, 1] and their weights (summing to 2).
    fn reference<T: Scalar>(self) -> Vec<(T, T)> {
        let l = T::lit;
        match self {
            Rule::Midpoint => vec![(l(0.0), l(2.0))],
            Rule::Simpson => vec![
                (l(-1.0), l(1.0) / l(3.0)),
                (l(0.0), l(4.0) / l(3.0)),
                (l(1.0), l(1.0) / l(3.0)),
            ],
            Rule::Gauss5 => {
                let r = (l(10.0) / l(7.0)).sqrt();
                let inner = (l(5.0) - l(2.0) * r).sqrt() / l(3.0);
                let outer = (l(5.0) + l(2.0) * r).sqrt() / l(3.0);
                let s70 = l(70.0).sqrt();
                let w_inner = (l(322.0) + l(13.0) * s70) / l(900.0);
                let w_outer = (l(322.0) - l(13.0) * s70) / l(900.0);
                vec![
                    (-outer, w_outer),
                    (-inner, w_inner),
                    (l(0.0), l(128.0) / l(225.0)),
                    (inner, w_inner),
                    (outer, w_outer),
                ]
            }
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Rule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "midpoint" => Ok(Rule::Midpoint),
            "simpson" => Ok(Rule::Simpson),
            "gauss5" => Ok(Rule::Gauss5),
            other => Err(Error::InvalidSpec(format!(
                "unknown rule `{other}` (expected midpoint, simpson or gauss5)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct QuadSpec {
    pub rule: Rule,
    /// Panels per axis.
    pub subdivisions: usize,
    pub refinement_factor: usize,
}

impl Default for QuadSpec {
    fn default() -> Self {
        Self {
            rule: Rule::Gauss5,
            subdivisions: 8,
            refinement_factor: 2,
        }
    }
}

impl QuadSpec {
    pub fn new(rule: Rule, subdivisions: usize) -> Self {
        Self {
            rule,
            subdivisions,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.subdivisions == 0 {
            return Err(Error::InvalidSpec("subdivisions must be at least 1".into()));
        }
        if self.refinement_factor < 2 {
            return Err(Error::InvalidSpec(
                "refinement factor must be at least 2".into(),
            ));
        }
        Ok(())
    }
}

/// A quadrature value with its refinement error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate<T> {
    pub value: T,
    pub err_est: T,
}

impl<T: Scalar> Estimate<T> {
    pub fn exact(value: T) -> Self {
        Self {
            value,
            err_est: T::zero(),
        }
    }

    pub fn scale(self, s: T) -> Self {
        Self {
            value: self.value * s,
            err_est: self.err_est * s.abs(),
        }
    }
}

/// How one coordinate is treated by a slice mean.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Span<T> {
    Pinned(T),
    Range(Interval<T>),
}

fn axis_nodes<T: Scalar>(span: Span<T>, reference: &[(T, T)], panels: usize) -> Vec<(T, T)> {
    match span {
        Span::Pinned(v) => vec![(v, T::one())],
        Span::Range(iv) => {
            let h = iv.width() / T::from_usize(panels).expect("panel count");
            let half = h / T::lit(2.0);
            let mut nodes = Vec::with_capacity(panels * reference.len());
            for k in 0..panels {
                let lo = iv.lo + h * T::from_usize(k).expect("panel index");
                let c = lo + half;
                nodes.extend(reference.iter().map(|&(x, w)| (c + half * x, w)));
            }
            nodes
        }
    }
}

fn weighted_mean<T, I>(terms: I) -> Result<T, EvalError>
where
    T: Scalar,
    I: Iterator<Item = Result<(T, T), EvalError>>,
{
    let mut acc = T::zero();
    let mut weight = T::zero();
    for term in terms {
        let (w, v) = term?;
        acc = acc + w * v;
        weight = weight + w;
    }
    Ok(acc / weight)
}

fn rule_mean<T, F>(f: &F, spans: &[Span<T>; 3], rule: Rule, panels: usize) -> Result<T, EvalError>
where
    T: Scalar,
    F: Evaluable<T> + ?Sized,
{
    let reference = rule.reference::<T>();
    let [nx, ny, nz] = spans.map(|s| axis_nodes(s, &reference, panels));
    weighted_mean(nx.iter().map(|&(x, wx)| {
        let vy = weighted_mean(ny.iter().map(|&(y, wy)| {
            let vz = weighted_mean(
                nz.iter()
                    .map(|&(z, wz)| f.eval(&Point3::new(x, y, z)).map(|v| (wz, v))),
            )?;
            Ok((wy, vz))
        }))?;
        Ok((wx, vy))
    }))
}

fn spans_for<T: Scalar>(bx: &BoxNd<T>, fixed: &[(Axis, T)]) -> Result<[Span<T>; 3]> {
    let mut spans = [Span::Pinned(T::zero()); 3];
    for (i, b) in bx.bounds().iter().enumerate() {
        spans[i] = Span::Range(*b);
    }
    let mut seen = [false; 3];
    for &(axis, v) in fixed {
        let i = axis.index();
        if i >= bx.dim() {
            return Err(Error::InvalidBox(format!(
                "cannot pin axis {axis} of a {}-dimensional box",
                bx.dim()
            )));
        }
        if seen[i] {
            return Err(Error::InvalidBox(format!("axis {axis} pinned twice")));
        }
        if !v.is_finite() {
            return Err(Error::InvalidBox(format!(
                "axis {axis} pinned to a non-finite value"
            )));
        }
        seen[i] = true;
        spans[i] = Span::Pinned(v);
    }
    if !spans.iter().any(|s| matches!(s, Span::Range(_))) {
        return Err(Error::InvalidBox(
            "a slice needs at least one free axis".into(),
        ));
    }
    Ok(spans)
}

fn estimate<T, F>(f: &F, spans: &[Span<T>; 3], spec: &QuadSpec) -> Result<Estimate<T>>
where
    T: Scalar,
    F: Evaluable<T> + ?Sized,
{
    spec.validate()?;
    let coarse = rule_mean(f, spans, spec.rule, spec.subdivisions)?;
    let fine = rule_mean(
        f,
        spans,
        spec.rule,
        spec.subdivisions * spec.refinement_factor,
    )?;
    Ok(Estimate {
        value: coarse,
        err_est: (coarse - fine).abs(),
    })
}

/// Mean of `f` over the box.
pub fn mean<T, F>(f: &F, bx: &BoxNd<T>, spec: &QuadSpec) -> Result<Estimate<T>>
where
    T: Scalar,
    F: Evaluable<T> + ?Sized,
{
    estimate(f, &spans_for(bx, &[])?, spec)
}

/// Integral of `f` over the box: the mean scaled by the volume.
pub fn integrate<T, F>(f: &F, bx: &BoxNd<T>, spec: &QuadSpec) -> Result<Estimate<T>>
where
    T: Scalar,
    F: Evaluable<T> + ?Sized,
{
    Ok(mean(f, bx, spec)?.scale(bx.volume()))
}

/// Mean of `f` over the sub-box obtained by pinning the `fixed` axes.
pub fn mean_on_slice<T, F>(
    f: &F,
    bx: &BoxNd<T>,
    fixed: &[(Axis, T)],
    spec: &QuadSpec,
) -> Result<Estimate<T>>
where
    T: Scalar,
    F: Evaluable<T> + ?Sized,
{
    estimate(f, &spans_for(bx, fixed)?, spec)
}
