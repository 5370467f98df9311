//! Runs the library checks for one function on one box and collects the
//! results into serializable sections.

use std::time::Instant;

use hhbox::chains::{ChainEvaluator, ChainReport, Intermediates};
use hhbox::convexity::{check_coordinates, check_joint, ConvexityCertificate, Verdict};
use hhbox::hmap::{
    h_check_bounds, h_check_coordinate_convex, h_check_monotone, h_scan, AxisCheck, AxisVerdict,
    BoundsCheck, Extremum, HGrid, HNode,
};
use hhbox::{Box64, Error, Estimate64, Function, QuadSpec};
use serde::Serialize;

use crate::config::{ConvexityMode, Settings};

/// What to compute.
#[derive(Debug, Clone, Copy)]
pub struct Plan {
    pub convexity: ConvexityMode,
    pub chain: bool,
    pub intermediates: bool,
    pub hgrid: Option<usize>,
    /// Keep every H node in the report, not only the summary.
    pub h_nodes: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvexitySection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub joint: Option<ConvexityCertificate<f64>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub coordinates: Vec<ConvexityCertificate<f64>>,
    /// The recorded joint witness, re-evaluated from scratch.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness_recheck: Option<f64>,
}

impl ConvexitySection {
    fn certs(&self) -> impl Iterator<Item = &ConvexityCertificate<f64>> {
        self.joint.iter().chain(self.coordinates.iter())
    }
}

/// `|H(0,..,0) - L1|` and `|H(1,..,1) - L3|` against their slacks, with
/// `L1` and `L3` taken from the chain quadrature.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EndpointCheck {
    pub l1: Estimate64,
    pub l3: Estimate64,
    pub origin_gap: f64,
    pub origin_slack: f64,
    pub ones_gap: f64,
    pub ones_slack: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HSection {
    pub k: usize,
    pub dim: usize,
    pub quad: QuadSpec,
    pub origin: Estimate64,
    pub ones: Estimate64,
    pub inf: Extremum<f64>,
    pub sup: Extremum<f64>,
    pub bounds: BoundsCheck<f64>,
    pub endpoints: EndpointCheck,
    pub monotone: Vec<AxisCheck<f64>>,
    pub coordinate_convex: Vec<AxisCheck<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nodes: Option<Vec<HNode<f64>>>,
}

impl HSection {
    pub fn holds(&self) -> bool {
        let axes_ok = |v: &[AxisCheck<f64>]| v.iter().all(|c| c.verdict == AxisVerdict::Holds);
        self.bounds.holds()
            && self.endpoints.holds
            && axes_ok(&self.monotone)
            && axes_ok(&self.coordinate_convex)
    }

    /// Every adjacent difference and second difference vanishes within slack.
    pub fn is_flat(&self) -> bool {
        self.monotone
            .iter()
            .chain(&self.coordinate_convex)
            .all(|c| c.max_excess_over_slack <= 0.0)
    }

    pub fn decreasing_pairs(&self) -> usize {
        self.monotone.iter().map(|c| c.violations).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Timing {
    pub section: &'static str,
    pub millis: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    /// The function could not be evaluated somewhere in the box.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Analysis {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub convexity: Option<ConvexitySection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chain: Option<ChainReport<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub intermediates: Option<Intermediates<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hmap: Option<HSection>,
    /// Evaluation failures that stopped a section.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub errors: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub timings: Vec<Timing>,
}

impl Analysis {
    /// Overall status: every requested check passed, or at least one
    /// failed, or evaluation broke down before a verdict was reached.
    pub fn status(&self) -> Status {
        let inconclusive = !self.errors.is_empty()
            || self
                .convexity
                .iter()
                .flat_map(ConvexitySection::certs)
                .any(|c| c.verdict == Verdict::Inconclusive);
        if inconclusive {
            return Status::Inconclusive;
        }
        let ok = self
            .convexity
            .iter()
            .flat_map(ConvexitySection::certs)
            .all(ConvexityCertificate::is_certified)
            && self.chain.as_ref().is_none_or(ChainReport::holds)
            && self
                .intermediates
                .as_ref()
                .is_none_or(|i| i.all_hold() && i.consistent())
            && self.hmap.as_ref().is_none_or(HSection::holds);
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

struct Clock {
    enabled: bool,
    started: Instant,
}

impl Clock {
    fn new(enabled: bool) -> Self {
        Self {
            enabled,
            started: Instant::now(),
        }
    }

    fn lap(&mut self, section: &'static str, out: &mut Vec<Timing>) {
        if self.enabled {
            out.push(Timing {
                section,
                millis: self.started.elapsed().as_secs_f64() * 1e3,
            });
        }
        self.started = Instant::now();
    }
}

fn convexity_section(
    f: &Function,
    bx: &Box64,
    mode: ConvexityMode,
    settings: &Settings,
) -> Result<ConvexitySection, Error> {
    let tol = settings.tolerances.convexity;
    let joint = if mode.joint() {
        Some(check_joint(f, bx, &settings.sampling, tol)?)
    } else {
        None
    };
    let coordinates = if mode.coordinates() {
        check_coordinates(f, bx, &settings.sampling, tol)?
    } else {
        Vec::new()
    };
    let witness_recheck = joint
        .as_ref()
        .and_then(|c| c.witness.as_ref())
        .map(|w| w.recompute(f))
        .transpose()?;
    Ok(ConvexitySection {
        joint,
        coordinates,
        witness_recheck,
    })
}

fn chain_for_dim(
    ev: &mut ChainEvaluator<'_, f64, Function>,
    abs: f64,
) -> Result<ChainReport<f64>, Error> {
    match ev.dim() {
        1 => ev.chain_1d(abs),
        2 => ev.chain_2d(abs),
        _ => ev.chain_3d(abs),
    }
}

fn h_section(
    f: &Function,
    bx: &Box64,
    k: usize,
    settings: &Settings,
    ev: &mut ChainEvaluator<'_, f64, Function>,
    keep_nodes: bool,
) -> Result<HSection, Error> {
    let abs = settings.tolerances.abs;
    let grid: HGrid<f64> = h_scan(f, bx, k, &settings.h_quad, abs)?;
    let l1 = ev.evaluate(&ev.center())?;
    let l3 = ev.evaluate(&ev.whole())?;
    let (o, u) = (grid.origin(), grid.ones());
    let origin_gap = (o.value - l1.value).abs();
    let origin_slack = abs + o.err_est + l1.err_est;
    let ones_gap = (u.value - l3.value).abs();
    let ones_slack = abs + u.err_est + l3.err_est;
    let endpoints = EndpointCheck {
        l1,
        l3,
        origin_gap,
        origin_slack,
        ones_gap,
        ones_slack,
        holds: origin_gap <= origin_slack && ones_gap <= ones_slack,
    };
    let estimate = |n: &HNode<f64>| Estimate64 {
        value: n.value,
        err_est: n.err_est,
    };
    Ok(HSection {
        k,
        dim: grid.dim,
        quad: settings.h_quad,
        origin: estimate(o),
        ones: estimate(u),
        inf: grid.inf.clone(),
        sup: grid.sup.clone(),
        bounds: h_check_bounds(&grid),
        endpoints,
        monotone: h_check_monotone(&grid),
        coordinate_convex: h_check_coordinate_convex(&grid),
        nodes: keep_nodes.then(|| grid.nodes.clone()),
    })
}

/// Runs the requested sections. An evaluation failure stops the section it
/// occurred in and is recorded; other sections still run. Structural errors
/// (bad box, bad spec) are returned.
pub fn analyze(
    f: &Function,
    bx: &Box64,
    settings: &Settings,
    plan: &Plan,
    timings: bool,
) -> Result<Analysis, Error> {
    let mut out = Analysis::default();
    let mut clock = Clock::new(timings);
    let record = |r: Result<(), Error>, out: &mut Analysis| match r {
        Err(Error::Eval(e)) => {
            out.errors.push(e.to_string());
            Ok(())
        }
        other => other,
    };

    if plan.convexity != ConvexityMode::None {
        let r = convexity_section(f, bx, plan.convexity, settings).map(|s| out.convexity = Some(s));
        record(r, &mut out)?;
        clock.lap("convexity", &mut out.timings);
    }

    let mut ev = ChainEvaluator::new(f, bx, settings.quad)?;
    let abs = settings.tolerances.abs;
    if plan.chain {
        let r = chain_for_dim(&mut ev, abs).map(|c| out.chain = Some(c));
        record(r, &mut out)?;
        clock.lap("chain", &mut out.timings);
    }
    if plan.intermediates && bx.dim() == 3 {
        let r = ev
            .intermediates_3d(abs)
            .map(|i| out.intermediates = Some(i));
        record(r, &mut out)?;
        clock.lap("intermediates", &mut out.timings);
    }
    if let Some(k) = plan.hgrid {
        let r = h_section(f, bx, k, settings, &mut ev, plan.h_nodes).map(|h| out.hmap = Some(h));
        record(r, &mut out)?;
        clock.lap("hmap", &mut out.timings);
    }
    Ok(out)
}
