//! The contraction mapping `H` on `[0,1]^d` for a rectangle (`d = 2`) or box
//! (`d = 3`):
//!
//! ```text
//! H(t, s, r) = mean over the box of f(t x + (1-t) m_x, s y + (1-s) m_y, r z + (1-r) m_z)
//! ```
//!
//! where `m` is the centre of the box. `H(0,..,0)` is the centre value and
//! `H(1,..,1)` the mean of `f`. For convex `f` the mapping is convex and
//! nondecreasing along every coordinate; the checks here test those
//! properties on a uniform `k`-point grid, with a slack built from the
//! quadrature error estimates of the compared nodes.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::{EvalError, Evaluable, Point3};
use crate::quad::{mean, Axis, BoxNd, Estimate, QuadSpec};
use crate::scalar::Scalar;

/// `f` with its arguments contracted toward the box centre.
struct Contracted<'a, T, F: ?Sized> {
    f: &'a F,
    center: Point3<T>,
    params: [T; 3],
    dim: usize,
}

impl<T: Scalar, F: Evaluable<T> + ?Sized> Evaluable<T> for Contracted<'_, T, F> {
    fn eval(&self, p: &Point3<T>) -> Result<T, EvalError> {
        let mut q = *p;
        for i in 0..self.dim {
            let t = self.params[i];
            q.set(i, t * p.get(i) + (T::one() - t) * self.center.get(i));
        }
        self.f.eval(&q)
    }

    fn arity(&self) -> usize {
        self.f.arity()
    }
}

fn check_dim<T: Scalar>(bx: &BoxNd<T>) -> Result<()> {
    if !(2..=3).contains(&bx.dim()) {
        return Err(Error::InvalidGrid(format!(
            "H is defined on rectangles and boxes, got a {}-dimensional domain",
            bx.dim()
        )));
    }
    Ok(())
}

/// Value of `H` at `params` (one per box axis, each in `[0, 1]`).
pub fn h_eval<T, F>(f: &F, bx: &BoxNd<T>, params: &[T], spec: &QuadSpec) -> Result<Estimate<T>>
where
    T: Scalar,
    F: Evaluable<T> + ?Sized,
{
    check_dim(bx)?;
    if params.len() != bx.dim() {
        return Err(Error::InvalidGrid(format!(
            "expected {} parameters, got {}",
            bx.dim(),
            params.len()
        )));
    }
    if params.iter().any(|&t| !(t >= T::zero() && t <= T::one())) {
        return Err(Error::InvalidGrid("parameters must lie in [0, 1]".into()));
    }
    if f.arity() > bx.dim() {
        return Err(Error::Arity {
            arity: f.arity(),
            dim: bx.dim(),
            required: "arity <= box dimension",
        });
    }
    let mut p = [T::zero(); 3];
    p[..params.len()].copy_from_slice(params);
    let g = Contracted {
        f,
        center: bx.center(),
        params: p,
        dim: bx.dim(),
    };
    mean(&g, bx, spec)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HNode<T> {
    pub index: Vec<usize>,
    pub params: Vec<T>,
    pub value: T,
    pub err_est: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Extremum<T> {
    pub value: T,
    pub err_est: T,
    pub params: Vec<T>,
}

/// `H` sampled on a uniform grid of `k` points per axis, nodes in row-major
/// order (first parameter slowest).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HGrid<T> {
    pub dim: usize,
    pub k: usize,
    pub abs_tol: T,
    pub nodes: Vec<HNode<T>>,
    pub inf: Extremum<T>,
    pub sup: Extremum<T>,
}

impl<T: Scalar> HGrid<T> {
    fn flat(&self, index: &[usize]) -> usize {
        index.iter().fold(0, |acc, &i| acc * self.k + i)
    }

    pub fn node(&self, index: &[usize]) -> &HNode<T> {
        &self.nodes[self.flat(index)]
    }

    /// `H(0, .., 0)`
    pub fn origin(&self) -> &HNode<T> {
        &self.nodes[0]
    }

    /// `H(1, .., 1)`
    pub fn ones(&self) -> &HNode<T> {
        &self.nodes[self.nodes.len() - 1]
    }

    /// Adjacent node pairs along `axis`, `(prev, next)`, in node order.
    fn pairs_along(&self, axis: usize, step: usize) -> Vec<(usize, usize)> {
        let stride = self.k.pow((self.dim - 1 - axis) as u32);
        self.nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| n.index[axis] + step < self.k)
            .map(|(i, _)| (i, i + step * stride))
            .collect()
    }
}

/// Evaluates `H` on the `k^d` grid nodes (`k >= 3`).
pub fn h_scan<T, F>(f: &F, bx: &BoxNd<T>, k: usize, spec: &QuadSpec, abs_tol: T) -> Result<HGrid<T>>
where
    T: Scalar,
    F: Evaluable<T> + ?Sized,
{
    check_dim(bx)?;
    if k < 3 {
        return Err(Error::InvalidGrid(format!(
            "grid needs at least 3 points per axis, got {k}"
        )));
    }
    let dim = bx.dim();
    let axis_values: Vec<T> = (0..k)
        .map(|i| {
            if i + 1 == k {
                T::one()
            } else {
                T::from_usize(i).unwrap() / T::from_usize(k - 1).unwrap()
            }
        })
        .collect();

    let total = k.pow(dim as u32);
    let mut nodes = Vec::with_capacity(total);
    for flat in 0..total {
        let mut index = vec![0; dim];
        let mut rest = flat;
        for slot in index.iter_mut().rev() {
            *slot = rest % k;
            rest /= k;
        }
        let params: Vec<T> = index.iter().map(|&i| axis_values[i]).collect();
        let e = h_eval(f, bx, &params, spec)?;
        nodes.push(HNode {
            index,
            params,
            value: e.value,
            err_est: e.err_est,
        });
    }

    let extremum = |n: &HNode<T>| Extremum {
        value: n.value,
        err_est: n.err_est,
        params: n.params.clone(),
    };
    let mut inf = &nodes[0];
    let mut sup = &nodes[0];
    for n in &nodes {
        if n.value < inf.value {
            inf = n;
        }
        if n.value > sup.value {
            sup = n;
        }
    }
    let (inf, sup) = (extremum(inf), extremum(sup));
    Ok(HGrid {
        dim,
        k,
        abs_tol,
        nodes,
        inf,
        sup,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisVerdict {
    Holds,
    Violated,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxisCheck<T> {
    pub axis: Axis,
    pub comparisons: usize,
    pub violations: usize,
    /// Most negative margin seen (0 if none was negative).
    pub worst: T,
    /// Largest `|margin|` seen; 0 for a flat grid.
    pub max_abs_margin: T,
    /// Largest `|margin| - slack`; non-positive when every margin is zero within slack.
    pub max_excess_over_slack: T,
    pub verdict: AxisVerdict,
}

fn axis_check<T: Scalar>(axis: usize, margins: Vec<(T, T)>) -> AxisCheck<T> {
    let mut check = AxisCheck {
        axis: Axis::from_index(axis),
        comparisons: margins.len(),
        violations: 0,
        worst: T::zero(),
        max_abs_margin: T::zero(),
        max_excess_over_slack: T::neg_infinity(),
        verdict: AxisVerdict::Holds,
    };
    for (margin, slack) in margins {
        if margin < -slack {
            check.violations += 1;
        }
        check.worst = check.worst.min(margin);
        check.max_abs_margin = check.max_abs_margin.max(margin.abs());
        check.max_excess_over_slack = check.max_excess_over_slack.max(margin.abs() - slack);
    }
    if check.violations > 0 {
        check.verdict = AxisVerdict::Violated;
    }
    check
}

/// `H(next) - H(prev) >= -slack` for every adjacent pair along each axis.
pub fn h_check_monotone<T: Scalar>(grid: &HGrid<T>) -> Vec<AxisCheck<T>> {
    (0..grid.dim)
        .map(|axis| {
            let margins = grid
                .pairs_along(axis, 1)
                .into_iter()
                .map(|(a, b)| {
                    let (na, nb) = (&grid.nodes[a], &grid.nodes[b]);
                    (nb.value - na.value, grid.abs_tol + na.err_est + nb.err_est)
                })
                .collect();
            axis_check(axis, margins)
        })
        .collect()
}

/// `H(prev) + H(next) - 2 H(mid) >= -slack` at every interior node along each
/// axis.
pub fn h_check_coordinate_convex<T: Scalar>(grid: &HGrid<T>) -> Vec<AxisCheck<T>> {
    let two = T::lit(2.0);
    (0..grid.dim)
        .map(|axis| {
            let margins = grid
                .pairs_along(axis, 2)
                .into_iter()
                .map(|(a, c)| {
                    let stride = grid.k.pow((grid.dim - 1 - axis) as u32);
                    let b = a + stride;
                    let (na, nb, nc) = (&grid.nodes[a], &grid.nodes[b], &grid.nodes[c]);
                    (
                        na.value + nc.value - two * nb.value,
                        grid.abs_tol + na.err_est + nc.err_est + two * nb.err_est,
                    )
                })
                .collect();
            axis_check(axis, margins)
        })
        .collect()
}

/// Where the grid extremes sit relative to the corner nodes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsCheck<T> {
    pub origin: T,
    pub ones: T,
    pub inf: T,
    pub sup: T,
    /// No node lies below `H(0,..,0)` by more than the slack.
    pub inf_at_origin: bool,
    /// No node lies above `H(1,..,1)` by more than the slack.
    pub sup_at_ones: bool,
}

impl<T: Scalar> BoundsCheck<T> {
    pub fn holds(&self) -> bool {
        self.inf_at_origin && self.sup_at_ones
    }
}

pub fn h_check_bounds<T: Scalar>(grid: &HGrid<T>) -> BoundsCheck<T> {
    let (o, u) = (grid.origin(), grid.ones());
    let below = grid
        .nodes
        .iter()
        .all(|n| n.value >= o.value - (grid.abs_tol + o.err_est + n.err_est));
    let above = grid
        .nodes
        .iter()
        .all(|n| n.value <= u.value + (grid.abs_tol + u.err_est + n.err_est));
    BoundsCheck {
        origin: o.value,
        ones: u.value,
        inf: grid.inf.value,
        sup: grid.sup.value,
        inf_at_origin: below,
        sup_at_ones: above,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::quad::Rule;

    fn unit(dim: usize) -> BoxNd<f64> {
        BoxNd::new(&vec![(0.0, 1.0); dim]).unwrap()
    }

    const TOL: f64 = 1e-10;

    #[test]
    fn corner_values_for_sum_of_squares() {
        let f = parse("x^2+y^2+z^2").unwrap();
        let spec = QuadSpec::default();
        let ones = h_eval(&f, &unit(3), &[1.0, 1.0, 1.0], &spec).unwrap();
        assert!((ones.value - 1.0).abs() < 1e-12);
        let origin = h_eval(&f, &unit(3), &[0.0, 0.0, 0.0], &spec).unwrap();
        assert!((origin.value - 0.75).abs() < 1e-15);
        // mean over x of (x/2 + 1/4)^2 is 13/48, plus 1/4 + 1/4
        let half = h_eval(&f, &unit(3), &[0.5, 0.0, 0.0], &spec).unwrap();
        assert!((half.value - (13.0 / 48.0 + 0.5)).abs() < 1e-12);
    }

    #[test]
    fn affine_mapping_is_constant() {
        let f = parse("x+y+z").unwrap();
        for params in [[0.0, 0.0, 0.0], [0.3, 0.9, 0.1], [1.0, 0.5, 1.0]] {
            let v = h_eval(&f, &unit(3), &params, &QuadSpec::default()).unwrap();
            assert!((v.value - 1.5).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        let f = parse("x+y").unwrap();
        let spec = QuadSpec::default();
        assert!(h_eval(&f, &unit(2), &[0.5], &spec).is_err());
        assert!(h_eval(&f, &unit(2), &[1.5, 0.0], &spec).is_err());
        assert!(h_eval(&f, &unit(1), &[0.5], &spec).is_err());
        assert!(h_eval(&parse("z").unwrap(), &unit(2), &[0.5, 0.5], &spec).is_err());
        assert!(h_scan(&f, &unit(2), 2, &spec, TOL).is_err());
    }

    #[test]
    fn scan_of_sum_of_squares_has_corner_extremes() {
        let f = parse("x^2+y^2+z^2").unwrap();
        let grid = h_scan(&f, &unit(3), 3, &QuadSpec::new(Rule::Gauss5, 2), TOL).unwrap();
        assert_eq!(grid.nodes.len(), 27);
        assert_eq!(grid.inf.params, vec![0.0, 0.0, 0.0]);
        assert_eq!(grid.sup.params, vec![1.0, 1.0, 1.0]);
        assert!((grid.origin().value - 0.75).abs() < 1e-15);
        assert!((grid.ones().value - 1.0).abs() < 1e-12);
        assert_eq!(grid.node(&[1, 0, 2]).params, vec![0.5, 0.0, 1.0]);
        assert!(h_check_bounds(&grid).holds());
        for c in h_check_monotone(&grid) {
            assert_eq!(c.verdict, AxisVerdict::Holds);
            assert_eq!(c.comparisons, 18);
        }
        for c in h_check_coordinate_convex(&grid) {
            assert_eq!(c.verdict, AxisVerdict::Holds);
            assert_eq!(c.comparisons, 9);
        }
    }

    #[test]
    fn concave_function_decreases() {
        let f = parse("-(x^2+y^2+z^2)").unwrap();
        let grid = h_scan(&f, &unit(3), 3, &QuadSpec::new(Rule::Gauss5, 2), TOL).unwrap();
        assert!((grid.ones().value + 1.0).abs() < 1e-12);
        assert!((grid.origin().value + 0.75).abs() < 1e-15);
        let mono = h_check_monotone(&grid);
        assert!(mono.iter().all(|c| c.verdict == AxisVerdict::Violated));
        assert!(!h_check_bounds(&grid).holds());
    }

    #[test]
    fn exp_mapping_is_strictly_convex_along_each_axis() {
        let f = parse("exp(x+y+z)").unwrap();
        let grid = h_scan(&f, &unit(3), 5, &QuadSpec::new(Rule::Gauss5, 2), TOL).unwrap();
        for c in h_check_coordinate_convex(&grid) {
            assert_eq!(c.violations, 0);
        }
        // along t with s = r = 0: H(t) = e^{1.5} sinh(t/2) / (t/2), strictly convex
        let h = |i: usize| grid.node(&[i, 0, 0]).value;
        for i in 1..4 {
            assert!(h(i - 1) + h(i + 1) - 2.0 * h(i) > 1e-4);
        }
    }

    #[test]
    fn rectangle_mapping() {
        let f = parse("x^2+y^2").unwrap();
        let grid = h_scan(&f, &unit(2), 4, &QuadSpec::default(), TOL).unwrap();
        assert_eq!(grid.nodes.len(), 16);
        assert!((grid.origin().value - 0.5).abs() < 1e-15);
        assert!((grid.ones().value - 2.0 / 3.0).abs() < 1e-12);
        assert!(h_check_monotone(&grid).iter().all(|c| c.violations == 0));
    }
}
