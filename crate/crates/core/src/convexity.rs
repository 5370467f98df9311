//! Sampling-based convexity checks.
//!
//! [`check_joint`] tests `f(t p + (1-t) q) <= t f(p) + (1-t) f(q)` over sampled
//! pairs of the box; [`check_coordinates`] runs the same test on every partial
//! mapping obtained by pinning one coordinate at grid values.
//!
//! A `CertifiedSampled` verdict is evidence gathered on finitely many pairs,
//! not a proof of convexity. A single pair violating the inequality by more
//! than the tolerance is a genuine counterexample and is reported as a
//! witness.
//!
//! Pairs are visited in a fixed order: for each `t` in `{1/2, 1/4, 3/4}` the
//! box vertices first, then the full grid, then `random_pairs` seeded triples
//! `(p, q, t)` with uniform `t`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::{EvalError, Evaluable, Point3};
use crate::quad::{Axis, BoxNd, Interval};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SamplingPlan {
    pub grid_points_per_axis: usize,
    pub random_pairs: usize,
    pub seed: u64,
}

impl Default for SamplingPlan {
    fn default() -> Self {
        Self {
            grid_points_per_axis: 5,
            random_pairs: 256,
            seed: 0,
        }
    }
}

impl SamplingPlan {
    pub fn validate(&self) -> Result<()> {
        if self.grid_points_per_axis < 2 {
            return Err(Error::InvalidPlan(
                "grid needs at least 2 points per axis".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Joint,
    PerCoordinate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    CertifiedSampled,
    Refuted,
    /// The function could not be evaluated somewhere in the box.
    Inconclusive,
}

/// A pair and weight violating the convexity inequality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Witness<T> {
    pub p: Point3<T>,
    pub q: Point3<T>,
    pub t: T,
    /// `f(t p + (1-t) q)`
    pub lhs: T,
    /// `t f(p) + (1-t) f(q)`
    pub rhs: T,
    pub violation: T,
}

impl<T: Scalar> Witness<T> {
    /// Re-evaluates `f` at the witness and returns the violation found.
    pub fn recompute<F: Evaluable<T> + ?Sized>(&self, f: &F) -> Result<T> {
        let t = self.t;
        let s = T::one() - t;
        let m = Point3::new(
            t * self.p.x + s * self.q.x,
            t * self.p.y + s * self.q.y,
            t * self.p.z + s * self.q.z,
        );
        let lhs = f.eval(&m)?;
        let rhs = t * f.eval(&self.p)? + s * f.eval(&self.q)?;
        Ok(lhs - rhs)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationFailure {
    pub point: [f64; 3],
    pub message: String,
}

impl From<&EvalError> for EvaluationFailure {
    fn from(e: &EvalError) -> Self {
        Self {
            point: e.point,
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvexityCertificate<T> {
    pub mode: Mode,
    /// For per-coordinate certificates, the coordinate held fixed.
    pub pinned_axis: Option<Axis>,
    pub grid_points_per_axis: usize,
    pub random_pairs: usize,
    pub seed: u64,
    pub tol: T,
    pub pairs_tested: u64,
    /// Largest `f(mid) - combination` seen, clamped below at 0.
    pub worst_violation: T,
    pub verdict: Verdict,
    pub witness: Option<Witness<T>>,
    pub failure: Option<EvaluationFailure>,
}

impl<T: Scalar> ConvexityCertificate<T> {
    pub fn is_certified(&self) -> bool {
        self.verdict == Verdict::CertifiedSampled
    }
}

const GRID_WEIGHTS: [f64; 3] = [0.5, 0.25, 0.75];

enum Stop<T> {
    Refuted(Witness<T>),
    Failed(EvalError),
}

struct Sampler<'a, T, F: ?Sized> {
    f: &'a F,
    tol: T,
    worst: T,
    tested: u64,
}

impl<'a, T: Scalar, F: Evaluable<T> + ?Sized> Sampler<'a, T, F> {
    fn new(f: &'a F, tol: T) -> Self {
        Self {
            f,
            tol,
            worst: T::zero(),
            tested: 0,
        }
    }

    fn value(&self, p: &Point3<T>) -> Result<T, Stop<T>> {
        self.f.eval(p).map_err(Stop::Failed)
    }

    fn test(
        &mut self,
        free: &[(usize, Interval<T>)],
        (p, fp): (&Point3<T>, T),
        (q, fq): (&Point3<T>, T),
        t: T,
    ) -> Result<(), Stop<T>> {
        let s = T::one() - t;
        let mut m = *p;
        for &(i, iv) in free {
            let c = t * p.get(i) + s * q.get(i);
            m.set(i, c.max(iv.lo).min(iv.hi));
        }
        let lhs = self.value(&m)?;
        let rhs = t * fp + s * fq;
        let violation = lhs - rhs;
        self.tested += 1;
        if violation > self.worst {
            self.worst = violation;
        }
        if violation > self.tol {
            return Err(Stop::Refuted(Witness {
                p: *p,
                q: *q,
                t,
                lhs,
                rhs,
                violation,
            }));
        }
        Ok(())
    }

    fn all_pairs(
        &mut self,
        free: &[(usize, Interval<T>)],
        points: &[(Point3<T>, T)],
    ) -> Result<(), Stop<T>> {
        for &t in &GRID_WEIGHTS {
            let t = T::lit(t);
            for (i, (p, fp)) in points.iter().enumerate() {
                for (q, fq) in &points[i + 1..] {
                    self.test(free, (p, *fp), (q, *fq), t)?;
                }
            }
        }
        Ok(())
    }

    /// Tests the slice through `base` spanned by the `free` axes.
    fn run(
        &mut self,
        base: Point3<T>,
        free: &[(usize, Interval<T>)],
        plan: &SamplingPlan,
        rng: &mut ChaCha8Rng,
    ) -> Result<(), Stop<T>> {
        let vertices = self.evaluated(lattice(base, free, 2))?;
        self.all_pairs(free, &vertices)?;
        let grid = self.evaluated(lattice(base, free, plan.grid_points_per_axis))?;
        self.all_pairs(free, &grid)?;
        for _ in 0..plan.random_pairs {
            let mut p = base;
            let mut q = base;
            for &(i, iv) in free {
                p.set(i, iv.lo + T::lit(rng.gen::<f64>()) * iv.width());
                q.set(i, iv.lo + T::lit(rng.gen::<f64>()) * iv.width());
            }
            let t = T::lit(rng.gen::<f64>());
            let (fp, fq) = (self.value(&p)?, self.value(&q)?);
            self.test(free, (&p, fp), (&q, fq), t)?;
        }
        Ok(())
    }

    fn evaluated(&self, points: Vec<Point3<T>>) -> Result<Vec<(Point3<T>, T)>, Stop<T>> {
        points
            .into_iter()
            .map(|p| Ok((p, self.value(&p)?)))
            .collect()
    }
}

/// Uniform `k`-point lattice over the free axes, endpoints included, in
/// lexicographic order with the first free axis slowest.
fn lattice<T: Scalar>(base: Point3<T>, free: &[(usize, Interval<T>)], k: usize) -> Vec<Point3<T>> {
    let coords = |iv: Interval<T>| -> Vec<T> {
        let last = T::from_usize(k - 1).expect("grid size");
        (0..k)
            .map(|j| {
                if j + 1 == k {
                    iv.hi
                } else {
                    iv.lo + iv.width() * T::from_usize(j).expect("grid index") / last
                }
            })
            .collect()
    };
    let mut points = vec![base];
    for &(i, iv) in free {
        let cs = coords(iv);
        points = points
            .into_iter()
            .flat_map(|p| {
                cs.iter().map(move |&c| {
                    let mut q = p;
                    q.set(i, c);
                    q
                })
            })
            .collect();
    }
    points
}

fn certificate<T: Scalar>(
    mode: Mode,
    pinned_axis: Option<Axis>,
    plan: &SamplingPlan,
    tol: T,
    worst: T,
    tested: u64,
    stop: Option<Stop<T>>,
) -> ConvexityCertificate<T> {
    let (verdict, witness, failure) = match stop {
        None => (Verdict::CertifiedSampled, None, None),
        Some(Stop::Refuted(w)) => (Verdict::Refuted, Some(w), None),
        Some(Stop::Failed(e)) => (Verdict::Inconclusive, None, Some((&e).into())),
    };
    ConvexityCertificate {
        mode,
        pinned_axis,
        grid_points_per_axis: plan.grid_points_per_axis,
        random_pairs: plan.random_pairs,
        seed: plan.seed,
        tol,
        pairs_tested: tested,
        worst_violation: worst,
        verdict,
        witness,
        failure,
    }
}

fn free_axes<T: Scalar>(bx: &BoxNd<T>, pinned: Option<Axis>) -> Vec<(usize, Interval<T>)> {
    bx.axes()
        .filter(|&a| Some(a) != pinned)
        .map(|a| (a.index(), bx.bound(a)))
        .collect()
}

/// Samples the convexity inequality over pairs of points of the whole box.
pub fn check_joint<T, F>(
    f: &F,
    bx: &BoxNd<T>,
    plan: &SamplingPlan,
    tol: T,
) -> Result<ConvexityCertificate<T>>
where
    T: Scalar,
    F: Evaluable<T> + ?Sized,
{
    plan.validate()?;
    let mut sampler = Sampler::new(f, tol);
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    let free = free_axes(bx, None);
    let stop = sampler.run(bx.center(), &free, plan, &mut rng).err();
    Ok(certificate(
        Mode::Joint,
        None,
        plan,
        tol,
        sampler.worst,
        sampler.tested,
        stop,
    ))
}

/// One certificate per coordinate: the partial mappings with that coordinate
/// pinned at each grid value, tested jointly in the remaining coordinates.
/// On an interval there is nothing left to pin, and the single certificate
/// covers `f` itself.
pub fn check_coordinates<T, F>(
    f: &F,
    bx: &BoxNd<T>,
    plan: &SamplingPlan,
    tol: T,
) -> Result<Vec<ConvexityCertificate<T>>>
where
    T: Scalar,
    F: Evaluable<T> + ?Sized,
{
    plan.validate()?;
    if bx.dim() == 1 {
        let mut cert = check_joint(f, bx, plan, tol)?;
        cert.mode = Mode::PerCoordinate;
        return Ok(vec![cert]);
    }
    let center = bx.center();
    let mut certs = Vec::with_capacity(bx.dim());
    for axis in bx.axes() {
        let mut sampler = Sampler::new(f, tol);
        let mut rng = ChaCha8Rng::seed_from_u64(plan.seed.wrapping_add(axis.index() as u64 + 1));
        let free = free_axes(bx, Some(axis));
        let pins = lattice(
            center,
            &[(axis.index(), bx.bound(axis))],
            plan.grid_points_per_axis,
        );
        let mut stop = None;
        for base in pins {
            if let Err(s) = sampler.run(base, &free, plan, &mut rng) {
                stop = Some(s);
                break;
            }
        }
        certs.push(certificate(
            Mode::PerCoordinate,
            Some(axis),
            plan,
            tol,
            sampler.worst,
            sampler.tested,
            stop,
        ));
    }
    Ok(certs)
}
