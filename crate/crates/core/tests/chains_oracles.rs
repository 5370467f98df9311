use std::f64::consts::E;

use hhbox::chains::{chain_1d, chain_2d, chain_3d, intermediates_3d, LinkVerdict, Tolerances};
use hhbox::corpus::{Class, Corpus};
use hhbox::{parse, Box64, Function, QuadSpec};

fn unit(dim: usize) -> Box64 {
    Box64::new(&vec![(0.0, 1.0); dim]).unwrap()
}

fn assert_values(got: &[f64], want: &[f64], tol: f64) {
    assert_eq!(got.len(), want.len());
    for (g, w) in got.iter().zip(want) {
        assert!(
            (g - w).abs() <= tol * w.abs().max(1.0),
            "{got:?} vs {want:?}"
        );
    }
}

/// Per-axis centre value, mean and endpoint average of `exp` on [lo, hi].
fn exp_axis(lo: f64, hi: f64) -> (f64, f64, f64) {
    let mid = ((lo + hi) / 2.0).exp();
    let mean = (hi.exp() - lo.exp()) / (hi - lo);
    let ends = (lo.exp() + hi.exp()) / 2.0;
    (mid, mean, ends)
}

/// The five box-chain terms of exp(x + y + z), which factor over the axes.
fn exp_chain_oracle(bx: &Box64) -> [f64; 5] {
    let b = bx.bounds();
    let [(m1, a1, e1), (m2, a2, e2), (m3, a3, e3)] = [0, 1, 2].map(|i| exp_axis(b[i].lo, b[i].hi));
    [
        m1 * m2 * m3,
        (a1 * m2 * m3 + m1 * a2 * m3 + m1 * m2 * a3) / 3.0,
        a1 * a2 * a3,
        (e3 * a1 * a2 + e2 * a1 * a3 + e1 * a2 * a3) / 3.0,
        e1 * e2 * e3,
    ]
}

#[test]
fn exp_chain_on_the_unit_cube_matches_closed_forms() {
    let f = Function::new(parse("exp(x + y + z)").unwrap());
    let r = chain_3d(&f, &unit(3), &QuadSpec::default(), &Tolerances::default()).unwrap();
    let closed = [
        E.powf(1.5),
        E * (E - 1.0),
        (E - 1.0).powi(3),
        (1.0 + E) * (E - 1.0).powi(2) / 2.0,
        (1.0 + E).powi(3) / 8.0,
    ];
    assert_values(&r.values(), &closed, 1e-12);
    assert_values(&closed, &exp_chain_oracle(&unit(3)), 1e-14);
    assert!(r
        .links
        .iter()
        .all(|l| l.verdict == LinkVerdict::Holds && l.margin > 0.0));
}

#[test]
fn exp_chain_matches_the_factored_oracle_on_every_box() {
    let f = Function::new(parse("exp(x + y + z)").unwrap());
    for b in Corpus::builtin().boxes_of_dim(3) {
        let bx = b.to_box().unwrap();
        let r = chain_3d(&f, &bx, &QuadSpec::default(), &Tolerances::default()).unwrap();
        assert_values(&r.values(), &exp_chain_oracle(&bx), 1e-11);
        assert!(r.holds(), "{}", b.name);
    }
}

#[test]
fn documented_chain_values() {
    let tol = Tolerances::default();
    let spec = QuadSpec::default();
    let sq = parse("x^2").unwrap();
    assert_values(
        &chain_1d(&sq, &unit(1), &spec, &tol).unwrap().values(),
        &[0.25, 1.0 / 3.0, 0.5],
        1e-14,
    );
    let x = parse("x").unwrap();
    let r = chain_1d(&x, &Box64::from_flat(&[2.0, 4.0]).unwrap(), &spec, &tol).unwrap();
    assert_values(&r.values(), &[3.0, 3.0, 3.0], 1e-14);
    assert!(r.is_sharp());
    let neg = parse("-x^2").unwrap();
    let r = chain_1d(&neg, &unit(1), &spec, &tol).unwrap();
    assert_eq!(r.links[0].verdict, LinkVerdict::Violated);

    let sumsq2 = parse("x^2 + y^2").unwrap();
    let r = chain_2d(&sumsq2, &unit(2), &spec, &tol).unwrap();
    assert_values(
        &r.values(),
        &[0.5, 7.0 / 12.0, 2.0 / 3.0, 5.0 / 6.0, 1.0],
        1e-13,
    );
    assert!(r.links.iter().all(|l| l.verdict == LinkVerdict::Holds));
    let one = parse("1").unwrap();
    assert_values(
        &chain_2d(&one, &unit(2), &spec, &tol).unwrap().values(),
        &[1.0; 5],
        0.0,
    );

    let sumsq = parse("x^2 + y^2 + z^2").unwrap();
    let r = chain_3d(&sumsq, &unit(3), &spec, &tol).unwrap();
    assert_values(&r.values(), &[0.75, 5.0 / 6.0, 1.0, 7.0 / 6.0, 1.5], 1e-13);
    assert_eq!(r.links.len(), r.terms.len() - 1);
}

#[test]
fn face_and_edge_averages_of_the_sum_of_squares() {
    let f = parse("x^2 + y^2 + z^2").unwrap();
    let i = intermediates_3d(&f, &unit(3), &QuadSpec::default(), &Tolerances::default()).unwrap();
    assert_eq!(i.reports.len(), 9);
    // each of the three-term inequalities: volume mean, four faces, four edges
    for r in &i.reports[6..] {
        assert_values(&r.values(), &[1.0, 7.0 / 6.0, 4.0 / 3.0], 1e-13);
    }
    assert_values(&i.reports[0].values(), &[5.0 / 6.0, 1.0], 1e-13);
    assert_eq!(i.reports[0].chain.label(), "ineq-2.2");
    assert_values(&i.reports[3].values(), &[0.75, 5.0 / 6.0], 1e-13);
    assert!(i.all_hold() && i.consistent());
}

#[test]
fn exp_face_and_edge_averages() {
    let f = Function::new(parse("exp(x + y + z)").unwrap());
    let i = intermediates_3d(&f, &unit(3), &QuadSpec::default(), &Tolerances::default()).unwrap();
    let faces = (1.0 + E) * (E - 1.0).powi(2) / 2.0;
    let edges = (E - 1.0) * (1.0 + E).powi(2) / 4.0;
    for r in &i.reports[6..] {
        assert_values(&r.values(), &[(E - 1.0).powi(3), faces, edges], 1e-12);
    }
}

fn every_chain(f: &Function, bx: &Box64) -> Vec<hhbox::ChainReport64> {
    let tol = Tolerances::default();
    let spec = QuadSpec::default();
    match bx.dim() {
        1 => vec![chain_1d(f, bx, &spec, &tol).unwrap()],
        2 => vec![chain_2d(f, bx, &spec, &tol).unwrap()],
        _ => {
            let mut v = vec![chain_3d(f, bx, &spec, &tol).unwrap()];
            let i = intermediates_3d(f, bx, &spec, &tol).unwrap();
            assert!(i.l2_reconstruction_exact && i.l4_reconstruction_exact && i.l2_l3_agreement);
            v.extend(i.reports);
            v
        }
    }
}

#[test]
fn convex_corpus_never_violates_a_link() {
    let c = Corpus::builtin();
    for (m, b) in c.pairs().filter(|(m, _)| m.class.is_convex()) {
        let f = Function::new(m.parse().unwrap());
        for r in every_chain(&f, &b.to_box().unwrap()) {
            assert!(r.holds(), "{} on {}: {:?}", m.name, b.name, r.links);
        }
    }
}

#[test]
fn affine_corpus_is_sharp() {
    let c = Corpus::builtin();
    for (m, b) in c.pairs().filter(|(m, _)| m.class == Class::Affine) {
        let f = Function::new(m.parse().unwrap());
        for r in every_chain(&f, &b.to_box().unwrap()) {
            assert!(r.is_sharp(), "{} on {}: {:?}", m.name, b.name, r.links);
            assert!(r.links.iter().all(|l| l.slack <= 1e-9));
        }
    }
}

#[test]
fn concave_corpus_reverses_the_chain() {
    let c = Corpus::builtin();
    for (m, b) in c.pairs().filter(|(m, _)| m.class == Class::Concave) {
        let f = Function::new(m.parse().unwrap());
        let r = &every_chain(&f, &b.to_box().unwrap())[0];
        assert!(r.violated_links() >= 1, "{} on {}", m.name, b.name);
    }
}

#[test]
fn lower_arity_function_on_a_box_collapses_predictably() {
    // x^2 on [0,1]^3: the y and z directions contribute nothing
    let f = parse("x^2").unwrap();
    let r = chain_3d(&f, &unit(3), &QuadSpec::default(), &Tolerances::default()).unwrap();
    assert_values(
        &r.values(),
        &[0.25, 5.0 / 18.0, 1.0 / 3.0, 7.0 / 18.0, 0.5],
        1e-13,
    );
    let doubled = &r.notes[0];
    assert_eq!(doubled.label, "L5-doubled");
    assert_eq!(doubled.value, 2.0 * r.terms[4].value);
}
