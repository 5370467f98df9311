use hhbox::convexity::{check_coordinates, check_joint, SamplingPlan, Verdict};
use hhbox::{parse, Box64, Function, Point3};
use proptest::prelude::*;

const TOL: f64 = 1e-9;

fn unit(dim: usize) -> Box64 {
    Box64::new(&vec![(0.0, 1.0); dim]).unwrap()
}

/// a x^2 + b y^2 + c z^2 + d xy + e yz + g xz with small coefficients.
fn quadratic() -> impl Strategy<Value = String> {
    prop::array::uniform6(-2i32..=2).prop_map(|[a, b, c, d, e, g]| {
        format!("{a}*x^2 + {b}*y^2 + {c}*z^2 + {d}*x*y + {e}*y*z + {g}*x*z").replace("+ -", "- ")
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// A grid-only joint pass covers every pinned-coordinate pair the
    /// per-coordinate check will test, so the latter must pass too.
    #[test]
    fn joint_certificate_implies_coordinate_certificates(src in quadratic()) {
        let f = Function::new(parse(&src).unwrap());
        let plan = SamplingPlan { grid_points_per_axis: 3, random_pairs: 0, seed: 0 };
        let joint = check_joint(&f, &unit(3), &plan, TOL).unwrap();
        let coords = check_coordinates(&f, &unit(3), &plan, TOL).unwrap();
        if joint.is_certified() {
            for c in &coords {
                prop_assert!(c.is_certified(), "{}: {:?}", src, c.witness);
            }
        }
    }

    #[test]
    fn witnesses_violate_the_inequality_when_recomputed(src in quadratic(), seed in 0u64..1000) {
        let f = Function::new(parse(&src).unwrap());
        let plan = SamplingPlan { seed, ..SamplingPlan::default() };
        let mut certs = vec![check_joint(&f, &unit(3), &plan, TOL).unwrap()];
        certs.extend(check_coordinates(&f, &unit(3), &plan, TOL).unwrap());
        for c in certs {
            prop_assert!(c.worst_violation >= 0.0);
            match c.verdict {
                Verdict::Refuted => {
                    let w = c.witness.unwrap();
                    let again = w.recompute(&f).unwrap();
                    prop_assert!(again > TOL);
                    prop_assert_eq!(again.to_bits(), w.violation.to_bits());
                    prop_assert_eq!(w.violation, c.worst_violation);
                }
                Verdict::CertifiedSampled => prop_assert!(c.worst_violation <= TOL),
                Verdict::Inconclusive => prop_assert!(false, "polynomials are defined everywhere"),
            }
        }
    }

    #[test]
    fn same_seed_same_certificate(seed in 0u64..u64::MAX) {
        let f = Function::new(parse("x^2 - y^2 + z").unwrap());
        let plan = SamplingPlan { seed, ..SamplingPlan::default() };
        prop_assert_eq!(
            check_coordinates(&f, &unit(3), &plan, TOL).unwrap(),
            check_coordinates(&f, &unit(3), &plan, TOL).unwrap()
        );
    }
}

#[test]
fn product_separates_coordinate_and_joint_convexity() {
    let f = parse("x*y").unwrap();
    let plan = SamplingPlan::default();
    let joint = check_joint(&f, &unit(2), &plan, TOL).unwrap();
    assert_eq!(joint.verdict, Verdict::Refuted);
    let w = joint.witness.unwrap();
    assert_eq!((w.p.x, w.p.y), (0.0, 1.0));
    assert_eq!((w.q.x, w.q.y), (1.0, 0.0));
    assert_eq!(w.t, 0.5);
    assert!(w.violation >= 0.2);
    let coords = check_coordinates(&f, &unit(2), &plan, TOL).unwrap();
    assert_eq!(coords.len(), 2);
    assert!(coords.iter().all(|c| c.is_certified()));
}

#[test]
fn convex_examples_are_certified_everywhere() {
    let skew = Box64::from_flat(&[-1.0, 1.0, -0.5, 2.0, -2.0, 1.0]).unwrap();
    for src in [
        "x^2 + y^2 + z^2",
        "exp(x + y + z)",
        "abs(x) + abs(y) + abs(z)",
        "x + 2*y - z",
    ] {
        let f = Function::new(parse(src).unwrap());
        for bx in [unit(3), skew.clone()] {
            let plan = SamplingPlan::default();
            let joint = check_joint(&f, &bx, &plan, TOL).unwrap();
            assert!(joint.is_certified(), "{src}: {:?}", joint.witness);
            for c in check_coordinates(&f, &bx, &plan, TOL).unwrap() {
                assert!(c.is_certified(), "{src}: {:?}", c.witness);
            }
        }
    }
    let affine = parse("x + 2*y - z").unwrap();
    let c = check_joint(&affine, &unit(3), &SamplingPlan::default(), TOL).unwrap();
    assert!(c.worst_violation < 1e-15);
}

#[test]
fn logarithm_touching_zero_is_inconclusive() {
    let f = parse("log(x) + y").unwrap();
    let c = check_joint(&f, &unit(2), &SamplingPlan::default(), TOL).unwrap();
    assert_eq!(c.verdict, Verdict::Inconclusive);
    assert_eq!(
        c.failure.unwrap().point,
        Point3::new(0.0, 0.0, 0.0).to_f64()
    );
}
