//! The `corpus` command: every builtin function on every box of its
//! dimension, each checked against the expectations of its class.

use hhbox::corpus::{Class, Corpus, Member, NamedBox};
use hhbox::{Box64, Function};
use serde::Serialize;

use crate::analysis::{analyze, Analysis, Plan, Status};
use crate::config::{ConvexityMode, RunConfig};
use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MemberReport {
    pub function: String,
    pub expr: String,
    pub class: Class,
    #[serde(rename = "box")]
    pub box_name: String,
    pub bounds: Box64,
    pub checks: Vec<Check>,
    pub passed: bool,
    pub analysis: Analysis,
}

impl MemberReport {
    pub fn failed_checks(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusSummary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub members: Vec<MemberReport>,
}

/// The member added by `--inject-concave`: concave, but filed as convex so
/// every detector should turn its checks red.
pub fn injected_member() -> Member {
    Member {
        name: "injected-concave".into(),
        expr: "-(x^2 + y^2 + z^2)".into(),
        class: Class::Convex,
        dim: 3,
    }
}

fn checks_for(class: Class, dim: usize, a: &Analysis) -> Vec<Check> {
    let mut out = Vec::new();
    let mut push = |name, passed| out.push(Check { name, passed });
    let conv = a.convexity.as_ref();
    let joint = conv.and_then(|c| c.joint.as_ref());
    let joint_certified = joint.is_some_and(|c| c.is_certified());
    let coords_certified = conv.is_some_and(|c| {
        !c.coordinates.is_empty() && c.coordinates.iter().all(|c| c.is_certified())
    });
    let chain = a.chain.as_ref();
    let h = a.hmap.as_ref();
    push("evaluated", a.errors.is_empty());

    match class {
        Class::Convex | Class::Affine | Class::Coordinate => {
            if class == Class::Coordinate {
                let refuted = joint.is_some_and(|c| c.witness.is_some());
                push("joint-convexity-refuted", refuted);
            } else {
                push("joint-convexity-certified", joint_certified);
            }
            push("coordinate-convexity-certified", coords_certified);
            push("chain-holds", chain.is_some_and(|c| c.holds()));
            if class == Class::Affine {
                push("chain-sharp", chain.is_some_and(|c| c.is_sharp()));
            }
            if dim == 3 {
                let i = a.intermediates.as_ref();
                push("intermediates-hold", i.is_some_and(|i| i.all_hold()));
                push(
                    "intermediates-consistent",
                    i.is_some_and(|i| i.consistent()),
                );
                if class == Class::Affine {
                    push(
                        "intermediates-sharp",
                        i.is_some_and(|i| i.reports.iter().all(|r| r.is_sharp())),
                    );
                }
            }
            if dim >= 2 {
                push("h-bounds", h.is_some_and(|h| h.bounds.holds()));
                push("h-endpoints", h.is_some_and(|h| h.endpoints.holds));
                push(
                    "h-monotone",
                    h.is_some_and(|h| h.monotone.iter().all(|c| c.violations == 0)),
                );
                push(
                    "h-coordinate-convex",
                    h.is_some_and(|h| h.coordinate_convex.iter().all(|c| c.violations == 0)),
                );
                if class == Class::Affine {
                    push("h-flat", h.is_some_and(|h| h.is_flat()));
                }
            }
        }
        Class::Concave => {
            let tol = joint.map_or(f64::INFINITY, |c| c.tol);
            let reverified = conv
                .and_then(|c| c.witness_recheck)
                .is_some_and(|v| v > tol);
            push(
                "joint-convexity-refuted",
                joint.is_some_and(|c| c.witness.is_some()),
            );
            push("witness-reverified", reverified);
            push(
                "chain-violated",
                chain.is_some_and(|c| c.violated_links() > 0),
            );
            if dim >= 2 {
                push("h-decreasing", h.is_some_and(|h| h.decreasing_pairs() > 0));
            }
        }
    }
    out
}

fn run_member(m: &Member, b: &NamedBox, config: &RunConfig) -> Result<MemberReport, CliError> {
    let f = Function::new(m.parse()?);
    let bx = b.to_box()?;
    let plan = Plan {
        convexity: ConvexityMode::Both,
        chain: true,
        intermediates: true,
        hgrid: if bx.dim() >= 2 { config.hgrid } else { None },
        h_nodes: false,
    };
    let analysis = analyze(&f, &bx, &config.settings, &plan, config.timings)?;
    let checks = checks_for(m.class, bx.dim(), &analysis);
    let passed = checks.iter().all(|c| c.passed);
    Ok(MemberReport {
        function: m.name.clone(),
        expr: m.expr.clone(),
        class: m.class,
        box_name: b.name.clone(),
        bounds: bx,
        checks,
        passed,
        analysis,
    })
}

pub fn run_corpus(config: &RunConfig) -> Result<(CorpusSummary, Status), CliError> {
    let corpus = Corpus::builtin();
    let mut members: Vec<Member> = corpus.functions.clone();
    if config.inject_concave {
        members.push(injected_member());
    }
    if let Some(filter) = &config.filter {
        members.retain(|m| m.name.contains(filter.as_str()));
    }
    let mut reports = Vec::new();
    for m in &members {
        let boxes: Vec<&NamedBox> = if m.name == "injected-concave" {
            corpus.boxes_of_dim(3).take(1).collect()
        } else {
            corpus.boxes_of_dim(m.dim).collect()
        };
        for b in boxes {
            reports.push(run_member(m, b, config)?);
        }
    }
    let passed = reports.iter().filter(|r| r.passed).count();
    let summary = CorpusSummary {
        total: reports.len(),
        passed,
        failed: reports.len() - passed,
        members: reports,
    };
    let status = if summary.failed == 0 {
        Status::Pass
    } else {
        Status::Fail
    };
    Ok((summary, status))
}
