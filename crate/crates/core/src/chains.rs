//! Inequality chains on intervals, rectangles and boxes.
//!
//! Each chain is a list of terms that must be nondecreasing for a convex
//! function:
//!
//! * `hadamard1d`: midpoint value, mean, endpoint average.
//! * `dragomir2d` (`M1`..`M5`): centre value, average of the two axis lines
//!   through the centre, area mean, average of the four edge means, vertex
//!   average.
//! * `box3d` (`L1`..`L5`): centre value, average of the three axis lines
//!   through the centre, volume mean, average of the six face means, vertex
//!   average (sum of the eight vertices over 8).
//! * `ineq-2.2`..`ineq-2.10`: the two- and three-term steps the 3D chain is
//!   assembled from.
//!
//! Every term is an exact rational combination of slice means (a slice pins
//! some coordinates at a bound or the midpoint and averages over the rest).
//! Slice means are computed once per evaluator and shared by all terms, and
//! combinations are summed in exact rational arithmetic before a single
//! rounding, so two terms with the same coefficients have identical bits.
//!
//! The statement `L4 <= L5` uses the vertex average. The doubled form
//! `sum/4 + sum/4` of the same eight values is kept in the `box3d` report
//! under `notes` so both can be compared.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::expr::Evaluable;
use crate::quad::{mean_on_slice, Axis, BoxNd, Estimate, QuadSpec};
use crate::scalar::Scalar;

/// Absolute tolerances shared by the chain, convexity and H-mapping checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances<T> {
    /// Added to the error estimates of two compared values to form the slack.
    pub abs: T,
    pub convexity: T,
}

impl<T: Scalar> Default for Tolerances<T> {
    fn default() -> Self {
        let eps = T::epsilon();
        Self {
            abs: T::lit(1e-10).max(eps * T::lit(256.0)),
            convexity: T::lit(1e-9).max(eps * T::lit(1024.0)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pin {
    Lo,
    Mid,
    Hi,
    Free,
}

/// A sub-box of the domain: each axis pinned to its lower bound, midpoint or
/// upper bound, or left free.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Slice(Vec<Pin>);

impl Slice {
    pub fn new(pins: &[Pin]) -> Self {
        Slice(pins.to_vec())
    }

    pub fn pins(&self) -> &[Pin] {
        &self.0
    }
}

impl fmt::Display for Slice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = ["x", "y", "z"];
        f.write_str("(")?;
        for (i, pin) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            match pin {
                Pin::Free => write!(f, "{}", names[i])?,
                Pin::Lo => write!(f, "{}=lo", names[i])?,
                Pin::Mid => write!(f, "{}=mid", names[i])?,
                Pin::Hi => write!(f, "{}=hi", names[i])?,
            }
        }
        f.write_str(")")
    }
}

/// A rational linear combination of slice means.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Combination(BTreeMap<Slice, BigRational>);

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

impl Combination {
    pub fn of(slice: Slice) -> Self {
        Self::average(vec![slice], 1)
    }

    /// `(s_1 + ... + s_k) / divisor`
    pub fn average(slices: Vec<Slice>, divisor: i64) -> Self {
        let mut c = Combination::default();
        for s in slices {
            c.add_term(s, ratio(1, divisor));
        }
        c
    }

    fn add_term(&mut self, s: Slice, coeff: BigRational) {
        let entry = self.0.entry(s).or_insert_with(BigRational::zero);
        *entry += coeff;
        self.0.retain(|_, c| !c.is_zero());
    }

    pub fn plus(mut self, other: &Combination) -> Self {
        for (s, c) in &other.0 {
            self.add_term(s.clone(), c.clone());
        }
        self
    }

    pub fn scaled(mut self, n: i64, d: i64) -> Self {
        let r = ratio(n, d);
        for c in self.0.values_mut() {
            *c *= &r;
        }
        self.0.retain(|_, c| !c.is_zero());
        self
    }

    pub fn slices(&self) -> impl Iterator<Item = &Slice> {
        self.0.keys()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Inequality {
    I2_2,
    I2_3,
    I2_4,
    I2_5,
    I2_6,
    I2_7,
    I2_8,
    I2_9,
    I2_10,
}

impl Inequality {
    pub const ALL: [Inequality; 9] = [
        Inequality::I2_2,
        Inequality::I2_3,
        Inequality::I2_4,
        Inequality::I2_5,
        Inequality::I2_6,
        Inequality::I2_7,
        Inequality::I2_8,
        Inequality::I2_9,
        Inequality::I2_10,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Inequality::I2_2 => "ineq-2.2",
            Inequality::I2_3 => "ineq-2.3",
            Inequality::I2_4 => "ineq-2.4",
            Inequality::I2_5 => "ineq-2.5",
            Inequality::I2_6 => "ineq-2.6",
            Inequality::I2_7 => "ineq-2.7",
            Inequality::I2_8 => "ineq-2.8",
            Inequality::I2_9 => "ineq-2.9",
            Inequality::I2_10 => "ineq-2.10",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainId {
    Hadamard1d,
    Dragomir2d,
    Box3d,
    Intermediate(Inequality),
}

impl ChainId {
    pub fn label(self) -> &'static str {
        match self {
            ChainId::Hadamard1d => "hadamard1d",
            ChainId::Dragomir2d => "dragomir2d",
            ChainId::Box3d => "box3d",
            ChainId::Intermediate(i) => i.label(),
        }
    }
}

impl fmt::Display for ChainId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl Serialize for ChainId {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Term<T> {
    pub label: String,
    pub value: T,
    pub err_est: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkVerdict {
    /// `margin > slack`
    Holds,
    /// `|margin| <= slack`: equality up to quadrature error.
    WithinTolerance,
    /// `margin < -slack`
    Violated,
}

impl LinkVerdict {
    pub fn classify<T: Scalar>(margin: T, slack: T) -> Self {
        if margin < -slack {
            LinkVerdict::Violated
        } else if margin > slack {
            LinkVerdict::Holds
        } else {
            LinkVerdict::WithinTolerance
        }
    }

    pub fn is_ok(self) -> bool {
        self != LinkVerdict::Violated
    }
}

/// Comparison of two adjacent terms: `margin = next - term`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Link<T> {
    pub from: String,
    pub to: String,
    pub margin: T,
    pub slack: T,
    pub verdict: LinkVerdict,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainReport<T> {
    pub chain: ChainId,
    pub terms: Vec<Term<T>>,
    pub links: Vec<Link<T>>,
    pub abs_tol: T,
    /// Informational values that are not part of the ordering.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<Term<T>>,
}

impl<T: Scalar> ChainReport<T> {
    pub fn from_terms(chain: ChainId, terms: Vec<Term<T>>, abs_tol: T) -> Self {
        let links = terms
            .windows(2)
            .map(|w| {
                let margin = w[1].value - w[0].value;
                let slack = abs_tol + w[0].err_est + w[1].err_est;
                Link {
                    from: w[0].label.clone(),
                    to: w[1].label.clone(),
                    margin,
                    slack,
                    verdict: LinkVerdict::classify(margin, slack),
                }
            })
            .collect();
        Self {
            chain,
            terms,
            links,
            abs_tol,
            notes: Vec::new(),
        }
    }

    /// No link is violated.
    pub fn holds(&self) -> bool {
        self.links.iter().all(|l| l.verdict.is_ok())
    }

    /// Every link is equality within slack.
    pub fn is_sharp(&self) -> bool {
        self.links
            .iter()
            .all(|l| l.verdict == LinkVerdict::WithinTolerance)
    }

    pub fn violated_links(&self) -> usize {
        self.links
            .iter()
            .filter(|l| l.verdict == LinkVerdict::Violated)
            .count()
    }

    pub fn values(&self) -> Vec<T> {
        self.terms.iter().map(|t| t.value).collect()
    }

    pub fn term(&self, label: &str) -> Option<&Term<T>> {
        self.terms.iter().find(|t| t.label == label)
    }
}

/// The nine intermediate inequalities together with the consistency checks
/// tying them to the `box3d` chain.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Intermediates<T> {
    pub reports: Vec<ChainReport<T>>,
    /// One third of the summed right-hand sides of 2.5..2.7 has the same
    /// coefficients and the same bits as `L2`.
    pub l2_reconstruction_exact: bool,
    /// One third of the summed face averages of 2.8..2.10 has the same
    /// coefficients and the same bits as `L4`.
    pub l4_reconstruction_exact: bool,
    /// If 2.2..2.4 all hold, the `L2 <= L3` link of `box3d` holds too.
    pub l2_l3_agreement: bool,
}

impl<T: Scalar> Intermediates<T> {
    pub fn all_hold(&self) -> bool {
        self.reports.iter().all(ChainReport::holds)
    }

    pub fn consistent(&self) -> bool {
        self.l2_reconstruction_exact && self.l4_reconstruction_exact && self.l2_l3_agreement
    }
}

fn full(dim: usize, pin: Pin) -> Vec<Pin> {
    vec![pin; dim]
}

fn with(dim: usize, base: Pin, overrides: &[(usize, Pin)]) -> Slice {
    let mut pins = full(dim, base);
    for &(i, p) in overrides {
        pins[i] = p;
    }
    Slice(pins)
}

/// Line through the centre along `axis`.
fn line(dim: usize, axis: usize) -> Slice {
    with(dim, Pin::Mid, &[(axis, Pin::Free)])
}

/// The two faces with `axis` pinned to a bound.
fn faces(dim: usize, axis: usize) -> Vec<Slice> {
    [Pin::Lo, Pin::Hi]
        .iter()
        .map(|&p| with(dim, Pin::Free, &[(axis, p)]))
        .collect()
}

/// Edges running along `axis` (all other axes at a bound).
fn edges(dim: usize, axis: usize) -> Vec<Slice> {
    let others: Vec<usize> = (0..dim).filter(|&i| i != axis).collect();
    let mut out = Vec::new();
    for mask in 0..1usize << others.len() {
        let mut pins = full(dim, Pin::Free);
        for (k, &i) in others.iter().enumerate() {
            let hi = mask >> (others.len() - 1 - k) & 1 == 1;
            pins[i] = if hi { Pin::Hi } else { Pin::Lo };
        }
        out.push(Slice(pins));
    }
    out
}

fn vertices(dim: usize) -> Vec<Slice> {
    (0..1usize << dim)
        .map(|mask| {
            Slice(
                (0..dim)
                    .map(|i| {
                        if mask >> (dim - 1 - i) & 1 == 1 {
                            Pin::Hi
                        } else {
                            Pin::Lo
                        }
                    })
                    .collect(),
            )
        })
        .collect()
}

/// Evaluates chain terms for one function on one box, computing each slice
/// mean once.
pub struct ChainEvaluator<'a, T: Scalar, F: ?Sized> {
    f: &'a F,
    bx: &'a BoxNd<T>,
    spec: QuadSpec,
    table: BTreeMap<Slice, Estimate<T>>,
}

impl<'a, T, F> ChainEvaluator<'a, T, F>
where
    T: Scalar,
    F: Evaluable<T> + ?Sized,
{
    pub fn new(f: &'a F, bx: &'a BoxNd<T>, spec: QuadSpec) -> Result<Self> {
        spec.validate()?;
        if f.arity() > bx.dim() {
            return Err(Error::Arity {
                arity: f.arity(),
                dim: bx.dim(),
                required: "arity <= box dimension",
            });
        }
        Ok(Self {
            f,
            bx,
            spec,
            table: BTreeMap::new(),
        })
    }

    pub fn dim(&self) -> usize {
        self.bx.dim()
    }

    /// Mean of `f` over a slice.
    pub fn slice_mean(&mut self, slice: &Slice) -> Result<Estimate<T>> {
        if let Some(e) = self.table.get(slice) {
            return Ok(*e);
        }
        assert_eq!(slice.0.len(), self.bx.dim(), "slice dimension mismatch");
        let mut point = self.bx.center();
        let mut fixed = Vec::new();
        for (i, pin) in slice.0.iter().enumerate() {
            let b = self.bx.bounds()[i];
            let v = match pin {
                Pin::Lo => b.lo,
                Pin::Mid => b.mid(),
                Pin::Hi => b.hi,
                Pin::Free => continue,
            };
            point.set(i, v);
            fixed.push((Axis::from_index(i), v));
        }
        let est = if fixed.len() == self.bx.dim() {
            Estimate::exact(self.f.eval(&point)?)
        } else {
            mean_on_slice(self.f, self.bx, &fixed, &self.spec)?
        };
        self.table.insert(slice.clone(), est);
        Ok(est)
    }

    /// Rounds the exact rational value of the combination once; the error
    /// estimate is `sum |c_i| err_i`.
    pub fn evaluate(&mut self, c: &Combination) -> Result<Estimate<T>> {
        let mut exact = BigRational::zero();
        let mut err = T::zero();
        for (slice, coeff) in &c.0 {
            let e = self.slice_mean(slice)?;
            let v =
                BigRational::from_float(e.value.to_f64_lossy()).expect("slice means are finite");
            exact += coeff * v;
            let weight = T::lit(coeff.abs().to_f64().expect("small coefficient"));
            err = err + weight * e.err_est;
        }
        let value = T::lit(exact.to_f64().expect("finite combination"));
        Ok(Estimate {
            value,
            err_est: err,
        })
    }

    fn term(&mut self, label: &str, c: &Combination) -> Result<Term<T>> {
        let e = self.evaluate(c)?;
        Ok(Term {
            label: label.to_string(),
            value: e.value,
            err_est: e.err_est,
        })
    }

    fn report(
        &mut self,
        chain: ChainId,
        terms: &[(&str, Combination)],
        abs_tol: T,
    ) -> Result<ChainReport<T>> {
        let terms = terms
            .iter()
            .map(|(label, c)| self.term(label, c))
            .collect::<Result<Vec<_>>>()?;
        Ok(ChainReport::from_terms(chain, terms, abs_tol))
    }

    fn require_dim(&self, dim: usize) -> Result<()> {
        if self.bx.dim() != dim {
            return Err(Error::InvalidBox(format!(
                "chain needs a {dim}-dimensional box, got {}",
                self.bx.dim()
            )));
        }
        Ok(())
    }

    pub fn center(&self) -> Combination {
        Combination::of(Slice(full(self.dim(), Pin::Mid)))
    }

    pub fn whole(&self) -> Combination {
        Combination::of(Slice(full(self.dim(), Pin::Free)))
    }

    pub fn vertex_average(&self) -> Combination {
        let d = self.dim();
        Combination::average(vertices(d), 1 << d)
    }

    /// Average of the axis lines through the centre.
    pub fn line_average(&self) -> Combination {
        let d = self.dim();
        Combination::average((0..d).map(|i| line(d, i)).collect(), d as i64)
    }

    /// Average of all `2 * dim` facets (edges of a rectangle, faces of a box).
    pub fn facet_average(&self) -> Combination {
        let d = self.dim();
        Combination::average((0..d).flat_map(|i| faces(d, i)).collect(), 2 * d as i64)
    }

    pub fn chain_1d(&mut self, abs_tol: T) -> Result<ChainReport<T>> {
        self.require_dim(1)?;
        let terms = [
            ("midpoint", self.center()),
            ("mean", self.whole()),
            ("endpoint-average", self.vertex_average()),
        ];
        self.report(ChainId::Hadamard1d, &terms, abs_tol)
    }

    pub fn chain_2d(&mut self, abs_tol: T) -> Result<ChainReport<T>> {
        self.require_dim(2)?;
        let terms = [
            ("M1", self.center()),
            ("M2", self.line_average()),
            ("M3", self.whole()),
            ("M4", self.facet_average()),
            ("M5", self.vertex_average()),
        ];
        self.report(ChainId::Dragomir2d, &terms, abs_tol)
    }

    pub fn chain_3d(&mut self, abs_tol: T) -> Result<ChainReport<T>> {
        self.require_dim(3)?;
        let terms = [
            ("L1", self.center()),
            ("L2", self.line_average()),
            ("L3", self.whole()),
            ("L4", self.facet_average()),
            ("L5", self.vertex_average()),
        ];
        let mut report = self.report(ChainId::Box3d, &terms, abs_tol)?;
        // the same eight vertex values written as sum/4 + sum/4
        let doubled = self.vertex_average().scaled(2, 1);
        report.notes.push(self.term("L5-doubled", &doubled)?);
        Ok(report)
    }

    /// Terms of one intermediate inequality, as exact combinations.
    pub fn intermediate_terms(&self, which: Inequality) -> Vec<(&'static str, Combination)> {
        let d = 3;
        let half = |a: usize, b: usize| Combination::average(vec![line(d, a), line(d, b)], 2);
        let quarter_faces = |a: usize, b: usize| {
            let mut s = faces(d, a);
            s.extend(faces(d, b));
            Combination::average(s, 4)
        };
        let quarter_edges = |axis: usize| Combination::average(edges(d, axis), 4);
        let l1 = || ("L1", self.center());
        let l3 = || ("L3", self.whole());
        match which {
            Inequality::I2_2 => vec![("line-x", Combination::of(line(d, 0))), l3()],
            Inequality::I2_3 => vec![("line-y", Combination::of(line(d, 1))), l3()],
            Inequality::I2_4 => vec![("line-z", Combination::of(line(d, 2))), l3()],
            Inequality::I2_5 => vec![l1(), ("lines-yz", half(1, 2))],
            Inequality::I2_6 => vec![l1(), ("lines-xz", half(0, 2))],
            Inequality::I2_7 => vec![l1(), ("lines-xy", half(0, 1))],
            Inequality::I2_8 => vec![
                l3(),
                ("faces-zy", quarter_faces(2, 1)),
                ("edges-x", quarter_edges(0)),
            ],
            Inequality::I2_9 => vec![
                l3(),
                ("faces-zx", quarter_faces(2, 0)),
                ("edges-y", quarter_edges(1)),
            ],
            Inequality::I2_10 => vec![
                l3(),
                ("faces-yx", quarter_faces(1, 0)),
                ("edges-z", quarter_edges(2)),
            ],
        }
    }

    pub fn intermediates_3d(&mut self, abs_tol: T) -> Result<Intermediates<T>> {
        self.require_dim(3)?;
        let mut reports = Vec::with_capacity(9);
        for which in Inequality::ALL {
            let terms = self.intermediate_terms(which);
            reports.push(self.report(ChainId::Intermediate(which), &terms, abs_tol)?);
        }

        // 1/3 of the summed right-hand sides of 2.5..2.7 against L2
        let rhs = |ineq: Inequality, idx: usize| self.intermediate_terms(ineq)[idx].1.clone();
        let l2_rebuilt = rhs(Inequality::I2_5, 1)
            .plus(&rhs(Inequality::I2_6, 1))
            .plus(&rhs(Inequality::I2_7, 1))
            .scaled(1, 3);
        let l4_rebuilt = rhs(Inequality::I2_8, 1)
            .plus(&rhs(Inequality::I2_9, 1))
            .plus(&rhs(Inequality::I2_10, 1))
            .scaled(1, 3);
        let l2 = self.line_average();
        let l4 = self.facet_average();
        let same_bits = |a: Estimate<T>, b: Estimate<T>| {
            a.value.to_f64_lossy().to_bits() == b.value.to_f64_lossy().to_bits()
        };
        let l2_reconstruction_exact =
            l2_rebuilt == l2 && same_bits(self.evaluate(&l2_rebuilt)?, self.evaluate(&l2)?);
        let l4_reconstruction_exact =
            l4_rebuilt == l4 && same_bits(self.evaluate(&l4_rebuilt)?, self.evaluate(&l4)?);

        let chain = self.chain_3d(abs_tol)?;
        let singles_hold = reports[..3].iter().all(ChainReport::holds);
        let l2_l3_agreement = !singles_hold || chain.links[1].verdict.is_ok();

        Ok(Intermediates {
            reports,
            l2_reconstruction_exact,
            l4_reconstruction_exact,
            l2_l3_agreement,
        })
    }
}

/// Midpoint value, mean and endpoint average on an interval.
pub fn chain_1d<T, F>(
    f: &F,
    bx: &BoxNd<T>,
    spec: &QuadSpec,
    tol: &Tolerances<T>,
) -> Result<ChainReport<T>>
where
    T: Scalar,
    F: Evaluable<T> + ?Sized,
{
    ChainEvaluator::new(f, bx, *spec)?.chain_1d(tol.abs)
}

/// The five-term chain `M1..M5` on a rectangle.
pub fn chain_2d<T, F>(
    f: &F,
    bx: &BoxNd<T>,
    spec: &QuadSpec,
    tol: &Tolerances<T>,
) -> Result<ChainReport<T>>
where
    T: Scalar,
    F: Evaluable<T> + ?Sized,
{
    ChainEvaluator::new(f, bx, *spec)?.chain_2d(tol.abs)
}

/// The five-term chain `L1..L5` on a box.
pub fn chain_3d<T, F>(
    f: &F,
    bx: &BoxNd<T>,
    spec: &QuadSpec,
    tol: &Tolerances<T>,
) -> Result<ChainReport<T>>
where
    T: Scalar,
    F: Evaluable<T> + ?Sized,
{
    ChainEvaluator::new(f, bx, *spec)?.chain_3d(tol.abs)
}

pub fn intermediates_3d<T, F>(
    f: &F,
    bx: &BoxNd<T>,
    spec: &QuadSpec,
    tol: &Tolerances<T>,
) -> Result<Intermediates<T>>
where
    T: Scalar,
    F: Evaluable<T> + ?Sized,
{
    ChainEvaluator::new(f, bx, *spec)?.intermediates_3d(tol.abs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn tol() -> Tolerances<f64> {
        Tolerances::default()
    }

    fn unit(dim: usize) -> BoxNd<f64> {
        BoxNd::new(&vec![(0.0, 1.0); dim]).unwrap()
    }

    fn assert_values(report: &ChainReport<f64>, expected: &[f64]) {
        let got = report.values();
        assert_eq!(got.len(), expected.len());
        for (g, e) in got.iter().zip(expected) {
            assert!((g - e).abs() < 1e-12, "{got:?} vs {expected:?}");
        }
    }

    #[test]
    fn hadamard_chain_for_a_square() {
        let r = chain_1d(
            &parse("x^2").unwrap(),
            &unit(1),
            &QuadSpec::default(),
            &tol(),
        )
        .unwrap();
        assert_values(&r, &[0.25, 1.0 / 3.0, 0.5]);
        assert!(r.links.iter().all(|l| l.verdict == LinkVerdict::Holds));
        assert_eq!(r.links.len(), r.terms.len() - 1);
    }

    #[test]
    fn hadamard_chain_is_flat_for_affine() {
        let bx = BoxNd::new(&[(2.0, 4.0)]).unwrap();
        let r = chain_1d(&parse("x").unwrap(), &bx, &QuadSpec::default(), &tol()).unwrap();
        assert_values(&r, &[3.0, 3.0, 3.0]);
        assert!(r.is_sharp());
    }

    #[test]
    fn hadamard_chain_reverses_for_concave() {
        let r = chain_1d(
            &parse("-x^2").unwrap(),
            &unit(1),
            &QuadSpec::default(),
            &tol(),
        )
        .unwrap();
        assert_values(&r, &[-0.25, -1.0 / 3.0, -0.5]);
        assert_eq!(r.links[0].verdict, LinkVerdict::Violated);
        assert_eq!(r.violated_links(), 2);
    }

    #[test]
    fn rectangle_chain_for_sum_of_squares() {
        let r = chain_2d(
            &parse("x^2+y^2").unwrap(),
            &unit(2),
            &QuadSpec::default(),
            &tol(),
        )
        .unwrap();
        assert_values(&r, &[0.5, 7.0 / 12.0, 2.0 / 3.0, 5.0 / 6.0, 1.0]);
        assert!(r.links.iter().all(|l| l.verdict == LinkVerdict::Holds));
    }

    #[test]
    fn rectangle_chain_degenerate_cases() {
        let spec = QuadSpec::default();
        let bx = BoxNd::from_flat(&[-1.0, 3.0, 2.0, 2.5]).unwrap();
        let r = chain_2d(&parse("x+y").unwrap(), &bx, &spec, &tol()).unwrap();
        assert_values(&r, &[3.25; 5]);
        assert!(r.is_sharp());
        let r = chain_2d(&parse("1").unwrap(), &bx, &spec, &tol()).unwrap();
        assert_values(&r, &[1.0; 5]);
    }

    #[test]
    fn box_chain_for_sum_of_squares() {
        let r = chain_3d(
            &parse("x^2+y^2+z^2").unwrap(),
            &unit(3),
            &QuadSpec::default(),
            &tol(),
        )
        .unwrap();
        assert_values(&r, &[0.75, 5.0 / 6.0, 1.0, 7.0 / 6.0, 1.5]);
        assert!(r.links.iter().all(|l| l.verdict == LinkVerdict::Holds));
        assert_eq!(r.notes[0].label, "L5-doubled");
        assert_eq!(r.notes[0].value, 3.0);
    }

    #[test]
    fn chains_check_arity_and_dimension() {
        let spec = QuadSpec::default();
        let f = parse("x+z").unwrap();
        assert!(matches!(
            chain_2d(&f, &unit(2), &spec, &tol()),
            Err(Error::Arity { .. })
        ));
        assert!(chain_2d(&parse("x").unwrap(), &unit(3), &spec, &tol()).is_err());
        // a one-variable function on a box is allowed
        let r = chain_3d(&parse("x^2").unwrap(), &unit(3), &spec, &tol()).unwrap();
        assert_values(&r, &[0.25, 5.0 / 18.0, 1.0 / 3.0, 7.0 / 18.0, 0.5]);
    }

    #[test]
    fn intermediate_labels_and_term_counts() {
        let f = parse("x^2+y^2+z^2").unwrap();
        let r = intermediates_3d(&f, &unit(3), &QuadSpec::default(), &tol()).unwrap();
        let labels: Vec<_> = r.reports.iter().map(|c| c.chain.label()).collect();
        assert_eq!(labels[0], "ineq-2.2");
        assert_eq!(labels[8], "ineq-2.10");
        let counts: Vec<_> = r.reports.iter().map(|c| c.terms.len()).collect();
        assert_eq!(counts, vec![2, 2, 2, 2, 2, 2, 3, 3, 3]);
        assert!(r.all_hold());
        assert!(r.consistent());
    }

    #[test]
    fn combinations_cancel_and_compare_structurally() {
        let a = Combination::of(Slice::new(&[Pin::Lo]));
        let b = Combination::of(Slice::new(&[Pin::Hi]));
        let sum = a.clone().plus(&b).scaled(1, 2);
        assert_eq!(
            sum,
            Combination::average(vec![Slice::new(&[Pin::Lo]), Slice::new(&[Pin::Hi])], 2)
        );
        let zero = a.clone().plus(&a.clone().scaled(-1, 1));
        assert_eq!(zero, Combination::default());
    }

    #[test]
    fn single_precision_chain() {
        let f = parse("x^2+y^2+z^2").unwrap();
        let bx = BoxNd::<f32>::new(&[(0.0, 1.0); 3]).unwrap();
        let r = chain_3d(
            &f,
            &bx,
            &QuadSpec::new(crate::quad::Rule::Gauss5, 2),
            &Tolerances::default(),
        )
        .unwrap();
        let expected = [0.75f32, 5.0 / 6.0, 1.0, 7.0 / 6.0, 1.5];
        for (g, e) in r.values().iter().zip(expected) {
            assert!((g - e).abs() < 1e-5);
        }
        assert!(r.holds());
    }
}
