//! Acceptance run: nine criteria, one PASS/FAIL line each.
//!
//! Criteria listed in `KNOWN_FAILURES` are evaluated exactly like the
//! others and print FAIL; the test then checks that they fail in the
//! recorded way rather than passing or breaking differently.

mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use proptest::prelude::any;
use proptest::test_runner::{Config, TestCaseError, TestRunner};
use uomkit::budget::Budget;
use uomkit::catalog::{catalog_get, catalog_matrix};
use uomkit::constructions::{
    compose_disjoint, double, double_renamed, genshift, klein_four, perm_family, theta_reference, CosetSide,
    FamilyKind, Perm,
};
use uomkit::numeric::{
    complexify, pyramid_perpendicular, pyramid_upb, pyramid_vector, qudit_pptes_report, secondary_pptes_report,
    ProductState, Tolerances, Verdict,
};
use uomkit::{
    are_equivalent, enumerate_orthogonal_rows, enumerate_uom_classes, find_uom, is_uom, max_mutually_orthogonal,
    parse_matrix, FormalMatrix, Var,
};

/// Criteria that cannot pass as stated, with the reason.
const KNOWN_FAILURES: &[(usize, &str)] = &[(
    7,
    "the Pyramid minus psi_4 is separable: the listed u_24 (x) v_3 is not in the range, the sixth range vector is \
     u_03 (x) u_24, and it completes the four orthogonal range vectors to a basis of the range",
)];

#[derive(Default)]
struct Report {
    lines: Vec<(bool, String)>,
}

impl Report {
    fn check(&mut self, ok: bool, what: impl Into<String>) {
        self.lines.push((ok, what.into()));
    }

    fn info(&mut self, what: impl Into<String>) {
        self.lines.push((true, format!("note: {}", what.into())));
    }

    fn passed(&self) -> bool {
        self.lines.iter().all(|(ok, _)| *ok)
    }

    fn failed(&self) -> Vec<&str> {
        self.lines.iter().filter(|(ok, _)| !ok).map(|(_, s)| s.as_str()).collect()
    }
}

fn m(name: &str) -> FormalMatrix {
    catalog_matrix(name).unwrap()
}

fn within(r: &mut Report, start: Instant, limit: Duration) {
    let t = start.elapsed();
    r.check(t < limit, format!("runtime {t:.2?} < {limit:?}"));
}

const TABLE_SIZES: &[&str] = &[
    "uom-11x5", "uom-10x6", "uom-11x6", "uom-13x6-a", "uom-13x6-b", "uom-13x7-a", "uom-13x7-b", "uom-14x7", "uom-15x7",
    "uom-19x7", "uom-13x8", "uom-14x8", "uom-15x8", "uom-17x8", "uom-18x8", "uom-19x8",
];

fn new_size_matrices() -> Report {
    let start = Instant::now();
    let mut r = Report::default();
    let mut suspects = Vec::new();
    for name in TABLE_SIZES {
        let e = catalog_get(name).unwrap();
        let x = e.matrix().unwrap();
        let (sm, sn) = e.claims.size.unwrap();
        let ok = (x.nrows(), x.ncols()) == (sm, sn) && is_uom(x);
        if e.source_suspect() {
            r.info(format!("{name} suspect, {}x{} uom {}: {}", x.nrows(), x.ncols(), is_uom(x), e.notes.last().unwrap()));
            suspects.push(name);
        } else {
            r.check(ok, format!("{name} ({:?}) is a {sm}x{sn} UOM", e.status));
        }
    }
    r.check(suspects.len() <= 2, format!("{} suspect entries (at most 2)", suspects.len()));
    within(&mut r, start, Duration::from_secs(10));
    r
}

/// Rows of `listed`, written in the notation of `base`, as variable rows.
fn listed_rows(base: &str, listed: &str) -> BTreeSet<Vec<Var>> {
    let k = parse_matrix(base).unwrap().nrows();
    parse_matrix(&format!("{base}, {listed}")).unwrap().to_rows().into_iter().skip(k).collect()
}

fn worked_examples() -> Report {
    let mut r = Report::default();

    let t = Instant::now();
    let q_text = "x' b d e, a y' d' f, a' c z' e', a b' d w', x' c' d' f'";
    let q = parse_matrix(q_text).unwrap();
    r.check(q.normalized() == m("uom-6x4").without_rows(&[0]).unwrap().normalized(), "Q is the 6x4 UOM without its first row");
    let found = enumerate_orthogonal_rows(&q).unwrap();
    let printed = listed_rows(
        q_text,
        "a' b' z f, a' b' d e, a' c' d' f, a' c' d e', a' c d' e, a' c z e', x y z w, x y d' e, \
         x c' d w, x c' d' f', x b d e, x b z f', a y d' f, a c d' f', a b' d w, a b d e'",
    );
    r.check(found.is_finite() && found.len() == 16, format!("Q has {} orthogonal rows (16)", found.len()));
    r.check(found.rows.iter().cloned().collect::<BTreeSet<_>>() == printed, "they are the listed rows");
    let clique = max_mutually_orthogonal(&found.rows);
    r.check(clique == 11, format!("at most {clique} of them are mutually orthogonal (11)"));
    within(&mut r, t, Duration::from_secs(1));

    let t = Instant::now();
    let x_text = "a c e g, a c' f h, a d f' g', a' c e i, a' d f i', b c' f' g, b' d' e' h'";
    let y = m("uom-7x4").without_rows(&[0]).unwrap();
    let found = enumerate_orthogonal_rows(&y).unwrap();
    let uvw = listed_rows(x_text, "a c e g, a c f h, a d f h'");
    r.check(
        found.is_finite() && found.rows.iter().cloned().collect::<BTreeSet<_>>() == uvw,
        format!("7x4 UOM minus row 1: {} orthogonal rows, exactly u, v, w", found.len()),
    );
    within(&mut r, t, Duration::from_secs(1));

    let t = Instant::now();
    let ten = "baBCc, cbaBC, CcbaB, BCcba, AAAAA, CaCcb, aACbb, cBbBa, CABBa, caCbC";
    let y = m("uom-10x5").without_rows(&[8, 9]).unwrap();
    let found = enumerate_orthogonal_rows(&y).unwrap();
    let found_set: BTreeSet<Vec<Var>> = found.rows.iter().cloned().collect();
    r.check(found.is_finite() && found.len() == 6, format!("10x5 UOM minus two rows: {} orthogonal rows (6)", found.len()));
    let agreeing = listed_rows(ten, "CABBa, caCbC, caAcA, cabbA, CAaBb");
    r.check(agreeing.is_subset(&found_set), "five of them are as listed");
    let listed_typo = listed_rows(ten, "aABbc");
    let actual = listed_rows(ten, "aABBc");
    r.check(actual.is_subset(&found_set), "the sixth is aABBc");
    if !listed_typo.is_subset(&found_set) {
        r.info("the listed sixth row aABbc is not orthogonal to aACbb");
    }
    within(&mut r, t, Duration::from_secs(1));
    r
}

fn family(kind: FamilyKind) -> uomkit::constructions::PermFamily {
    perm_family(&kind, 4).unwrap()
}

fn constructions() -> Report {
    let start = Instant::now();
    let mut r = Report::default();
    let g5 = genshift(5).unwrap();
    r.check(are_equivalent(&g5, &m("genshift-6x5")).is_some(), "GenShift(5) matches the listed 6x5 matrix");

    let seed = m("doubling-seed-4x3");
    let x2 = seed.with_id_offsets(&[10, 10, 10]);
    let block = |z: &FormalMatrix| z.select_columns(&[3, 4, 5, 6]).unwrap().normalized();
    let cyclic = family(FamilyKind::Cyclic(Perm::from_cycles(4, "(1432)").unwrap()));
    let z = double(&seed, &x2, &cyclic).unwrap();
    r.check(block(&z) == m("rotated-pair-8x4").normalized(), "cycle (1432) gives the rotated perpendicular block");
    let klein = family(FamilyKind::Explicit(klein_four()));
    let z = double(&seed, &x2, &klein).unwrap();
    r.check(block(&z) == m("klein-pair-8x4").normalized(), "Klein four-group gives its perpendicular block");

    let js: Vec<FormalMatrix> = (1..=6).map(|k| m(&format!("uom-8x7-{k}"))).collect();
    let c4 = Perm::from_cycles(4, "(1234)").unwrap().generated_group();
    let variants = [
        ("K", FamilyKind::Explicit(klein_four()), 1),
        ("(123)K", FamilyKind::Coset { rep: Perm::from_cycles(4, "(123)").unwrap(), group: klein_four(), side: CosetSide::Left }, 2),
        ("C", FamilyKind::Explicit(c4.clone()), 6),
        ("(12)C", FamilyKind::Coset { rep: Perm::from_cycles(4, "(12)").unwrap(), group: c4, side: CosetSide::Left }, 5),
    ];
    for (name, kind, want) in variants {
        let z = double_renamed(&seed, &family(kind)).unwrap();
        let hits: Vec<usize> = (0..6).filter(|&i| are_equivalent(&z, &js[i]).is_some()).map(|i| i + 1).collect();
        r.check(is_uom(&z) && hits == vec![want], format!("doubling with {name} is 8x7 class {want} (found {hits:?})"));
    }
    let g7 = genshift(7).unwrap();
    let hits: Vec<usize> = (0..6).filter(|&i| are_equivalent(&g7, &js[i]).is_some()).map(|i| i + 1).collect();
    r.check(hits == vec![3], format!("GenShift(7) is 8x7 class 3 (found {hits:?})"));
    for i in 0..6 {
        for k in i + 1..6 {
            r.check(are_equivalent(&js[i], &js[k]).is_none(), format!("8x7 classes {} and {} differ", i + 1, k + 1));
        }
    }
    within(&mut r, start, Duration::from_secs(30));
    r
}

fn class_counts() -> Report {
    let mut r = Report::default();
    for ((mm, n), want) in [((4, 2), 2), ((4, 3), 1), ((5, 3), 0), ((6, 4), 1), ((7, 4), 1), ((7, 5), 0)] {
        let t = Instant::now();
        let census = enumerate_uom_classes(mm, n, &Budget::unlimited());
        r.check(
            census.complete && census.count() == want,
            format!("({mm},{n}): {} classes ({want}) in {:.2?}", census.count(), t.elapsed()),
        );
    }
    r
}

type Tuple = (usize, usize, bool, Verdict);

fn tuples(x: &FormalMatrix, drop: &[usize]) -> Vec<Tuple> {
    let tol = Tolerances::default();
    (0..3)
        .map(|seed| {
            let p = secondary_pptes_report(x, drop, seed, &tol).unwrap();
            (p.rank, p.s, p.ppt_all, p.verdict)
        })
        .collect()
}

fn pptes(r: &mut Report, label: &str, x: &FormalMatrix, drop: &[usize], want: Tuple) {
    let got = tuples(x, drop);
    r.check(got.iter().all(|t| *t == want), format!("{label} drop {:?}: {:?} (want {want:?})", one_based(drop), got[0]));
}

fn one_based(drop: &[usize]) -> Vec<usize> {
    drop.iter().map(|i| i + 1).collect()
}

fn pptes_numerics() -> Report {
    let mut r = Report::default();
    use Verdict::*;
    pptes(&mut r, "7x4", &m("uom-7x4"), &[0], (10, 3, true, Entangled));
    let y = m("uom-6x4");
    for d in [1, 2, 4, 5] {
        pptes(&mut r, "6x4", &y, &[d], (11, 10, true, Entangled));
    }
    for d in [0, 3] {
        let got = tuples(&y, &[d]);
        r.check(
            got.iter().all(|t| t.3 == SeparableNumerical && t == &got[0]),
            format!("6x4 drop [{}]: {:?} (want separable)", d + 1, got[0]),
        );
    }
    pptes(&mut r, "10x5", &m("uom-10x5"), &[8, 9], (24, 6, true, Entangled));
    r
}

fn entangled_pairs(x: &FormalMatrix) -> BTreeSet<(usize, usize)> {
    let tol = Tolerances::default();
    (0..x.nrows())
        .filter_map(|d| {
            let p = secondary_pptes_report(x, &[d], 0, &tol).unwrap();
            (p.verdict == Verdict::Entangled).then_some((p.rank, p.s))
        })
        .collect()
}

fn secondary_sweep() -> Report {
    let mut r = Report::default();
    for (mm, name) in [(6, "uom-6x4"), (7, "uom-7x4")] {
        let census = enumerate_uom_classes(mm, 4, &Budget::unlimited());
        r.check(census.count() == 1, format!("one class in O({mm},4)"));
        r.check(are_equivalent(&census.classes[0], &m(name)).is_some(), format!("it is the {name} entry"));
    }
    let six = entangled_pairs(&m("uom-6x4"));
    r.check(six == BTreeSet::from([(11, 10)]), format!("m = 6 pairs {six:?}"));
    let allowed = BTreeSet::from([(10, 3), (10, 6), (10, 7), (10, 8)]);
    let seven = entangled_pairs(&m("uom-7x4"));
    r.check(seven.is_subset(&allowed), format!("m = 7 pairs {seven:?} within {allowed:?}"));
    for s in [3, 6, 7, 8] {
        r.check(seven.iter().any(|p| p.1 == s), format!("m = 7 realises s = {s}"));
    }
    r
}

fn product(a: nalgebra::Vector3<f64>, b: nalgebra::Vector3<f64>) -> ProductState {
    ProductState(vec![complexify(&a), complexify(&b)])
}

fn pyramid() -> Report {
    let start = Instant::now();
    let mut r = Report::default();
    let tol = Tolerances::default();
    let upb = pyramid_upb();
    let full = qudit_pptes_report(&upb, &[], &tol).unwrap();
    r.check(full.rank == 4 && full.s == 0, format!("full UPB: rank {} with {} range product vectors", full.rank, full.s));
    r.check(full.ppt_all && full.verdict == Verdict::Entangled, format!("full UPB: PPT {}, {:?}", full.ppt_all, full.verdict));

    let part = qudit_pptes_report(&upb, &[4], &tol).unwrap();
    r.check(part.rank == 5 && part.s == 6, format!("minus psi_4: rank {}, {} range product vectors", part.rank, part.s));
    let (v, u) = (pyramid_vector, pyramid_perpendicular);
    let listed = [
        ("v4 v3", product(v(4), v(3))),
        ("u24 v3", product(u(2, 4), v(3))),
        ("v0 u02", product(v(0), u(0, 2))),
        ("v3 u14", product(v(3), u(1, 4))),
        ("u13 v2", product(u(1, 3), v(2))),
        ("u02 v4", product(u(0, 2), v(4))),
    ];
    let found: Vec<ProductState> = part
        .vectors
        .iter()
        .map(|rv| {
            let amp: Vec<_> = rv.amplitudes.iter().map(|[re, im]| uomkit::numeric::C64::new(*re, *im)).collect();
            ProductState(vec![uomkit::numeric::CVector::from_vec(amp)])
        })
        .collect();
    let distance = |p: &ProductState| {
        let d = p.dense();
        found.iter().map(|f| 1.0 - f.0[0].dotc(&d).norm_sqr()).fold(f64::INFINITY, f64::min)
    };
    for (name, p) in &listed {
        let dist = distance(p);
        r.check(dist < 1e-8, format!("{name} is in the range (distance {dist:.1e})"));
    }
    let last4: Vec<&ProductState> = listed[2..].iter().map(|(_, p)| p).collect();
    let orth = |a: &ProductState, b: &ProductState| a.inner(b).norm() < 1e-12;
    let mutual = (0..4).all(|i| (i + 1..4).all(|k| orth(last4[i], last4[k])));
    let none_to_first = last4.iter().all(|p| !orth(p, &listed[0].1) && !orth(p, &listed[1].1));
    r.check(mutual, "the last four are mutually orthogonal");
    r.check(none_to_first, "none of them is orthogonal to the first two");
    r.check(part.ppt_all && part.verdict == Verdict::Entangled, format!("minus psi_4: PPT {}, {:?}", part.ppt_all, part.verdict));
    within(&mut r, start, Duration::from_secs(1));
    r
}

fn properties() -> Report {
    let mut r = Report::default();
    for (name, check) in common::PROPERTIES {
        let t = Instant::now();
        let mut runner = TestRunner::new(Config { cases: 100, failure_persistence: None, ..Config::default() });
        let result = runner.run(&any::<u64>(), |seed| check(seed).map_err(TestCaseError::fail));
        let detail = result.as_ref().err().map(|e| format!(": {e}")).unwrap_or_default();
        r.check(result.is_ok(), format!("{name}, 100 cases, {:.2?}{detail}", t.elapsed()));
    }
    r
}

fn uom_sizes() -> Report {
    let mut r = Report::default();
    let budget = || Budget::with_seconds(60.0);
    let mut four: BTreeSet<usize> = BTreeSet::new();
    for name in ["uom-6x4", "uom-7x4", "decomposable-8x4", "indecomposable-8x4", "reducible-8x4", "irreducible-8x4"] {
        let x = m(name);
        if is_uom(&x) {
            four.insert(x.nrows());
        }
    }
    // Compositions of a one-column basis with 3-column UOMs of sizes 4 and 8.
    let one = parse_matrix("a, a'").unwrap();
    let g3 = genshift(3).unwrap();
    let basis3 = parse_matrix("abc, abC, aBc, aBC, Abc, AbC, ABc, ABC").unwrap();
    for blocks in [[&g3, &g3], [&g3, &basis3], [&basis3, &basis3]] {
        let x = compose_disjoint(&one, &[blocks[0].clone(), blocks[1].clone()]).unwrap();
        if is_uom(&x) {
            four.insert(x.nrows());
        }
    }
    for mm in [9, 10] {
        match find_uom(mm, 4, &budget()) {
            Ok(Some(x)) if is_uom(&x) => {
                r.info(format!("found {mm}x4 UOM {}", x.to_text().replace('\n', ",")));
                four.insert(mm);
            }
            other => r.check(false, format!("no {mm}x4 UOM found: {other:?}")),
        }
    }
    let reference: BTreeSet<usize> = theta_reference(4).values().map(|v| v as usize).collect();
    let expected = BTreeSet::from([6, 7, 8, 9, 10, 12, 16]);
    r.check(four == expected, format!("4-qubit sizes {four:?}"));
    r.check(reference == expected, format!("4-qubit reference sizes {reference:?}"));

    let mut five: BTreeSet<usize> = BTreeSet::new();
    for x in [genshift(5).unwrap(), m("uom-10x5"), m("uom-11x5"), m("composed-16x5")] {
        if is_uom(&x) {
            five.insert(x.nrows());
        }
    }
    // One-column basis over two 4-qubit UOMs: sums of two 4-qubit sizes.
    let four_reps: Vec<FormalMatrix> = four
        .iter()
        .filter_map(|&mm| find_uom(mm, 4, &budget()).ok().flatten())
        .collect();
    for a in &four_reps {
        for b in &four_reps {
            let x = compose_disjoint(&one, &[a.clone(), b.clone()]).unwrap();
            if is_uom(&x) {
                five.insert(x.nrows());
            }
        }
    }
    let ref5 = theta_reference(5);
    r.check(five.contains(&11), "11x5 UOM present");
    r.check(five.iter().all(|&s| ref5.contains(s as u128)), format!("5-qubit sizes {five:?} lie in the admissible set"));
    let missing: Vec<u128> = ref5.values().filter(|v| !five.contains(&(*v as usize))).collect();
    r.info(format!("admissible 5-qubit sizes without a witness here: {missing:?}"));
    r
}

#[test]
fn acceptance() {
    let criteria: [(usize, &str, fn() -> Report); 9] = [
        (1, "new-size UOMs verify", new_size_matrices),
        (2, "worked examples of orthogonal rows", worked_examples),
        (3, "construction golden tests", constructions),
        (4, "class counts at desk scale", class_counts),
        (5, "secondary PPTES numerics", pptes_numerics),
        (6, "four-qubit secondary PPTES sweep", secondary_sweep),
        (7, "Pyramid UPB and its secondary PPTES", pyramid),
        (8, "property suites", properties),
        (9, "UOM sizes for four and five qubits", uom_sizes),
    ];
    let mut unexpected = Vec::new();
    for (id, title, run) in criteria {
        let t = Instant::now();
        let report = run();
        let pass = report.passed();
        println!("{} {id}. {title} ({:.2?})", if pass { "PASS" } else { "FAIL" }, t.elapsed());
        for (ok, line) in &report.lines {
            println!("      {} {line}", if *ok { "ok " } else { "BAD" });
        }
        let known = KNOWN_FAILURES.iter().find(|(k, _)| *k == id);
        match (pass, known) {
            (true, None) => {}
            (false, Some((_, why))) => println!("      known failure: {why}"),
            (true, Some(_)) => unexpected.push(format!("criterion {id} passed but is recorded as failing")),
            (false, None) => unexpected.push(format!("criterion {id}: {:?}", report.failed())),
        }
        if id == 7 && !pass {
            let failed = report.failed();
            let expected_failures = failed.len() == 2
                && failed.iter().any(|l| l.starts_with("u24 v3 is in the range"))
                && failed.iter().any(|l| l.contains("SeparableNumerical"));
            if !expected_failures {
                unexpected.push(format!("criterion 7 fails differently than recorded: {failed:?}"));
            }
        }
    }
    assert!(unexpected.is_empty(), "{unexpected:#?}");
}

#[test]
fn pyramid_sixth_range_vector() {
    let tol = Tolerances::default();
    let part = qudit_pptes_report(&pyramid_upb(), &[4], &tol).unwrap();
    let p = product(pyramid_perpendicular(0, 3), pyramid_perpendicular(2, 4)).dense();
    let best = part
        .vectors
        .iter()
        .map(|rv| {
            let v = uomkit::numeric::CVector::from_iterator(9, rv.amplitudes.iter().map(|[a, b]| uomkit::numeric::C64::new(*a, *b)));
            1.0 - v.dotc(&p).norm_sqr()
        })
        .fold(f64::INFINITY, f64::min);
    assert!(best < 1e-8);
    assert_eq!(part.verdict, Verdict::SeparableNumerical);
    assert!(part.separability.nnls_residual < 1e-8);
}

#[test]
#[ignore = "stretch census, run with --ignored"]
fn class_count_eight_by_three() {
    let census = enumerate_uom_classes(8, 3, &Budget::with_seconds(600.0));
    println!("(8,3): {} classes, complete {}", census.count(), census.complete);
    assert!(census.complete);
    assert_eq!(census.count(), 17);
}

#[test]
#[ignore = "stretch census with a ten-minute budget, run with --ignored"]
fn class_count_nine_by_four() {
    let census = enumerate_uom_classes(9, 4, &Budget::with_seconds(600.0));
    println!("(9,4): {} classes, complete {}, {} nodes", census.count(), census.complete, census.nodes);
    assert!(census.complete);
    assert_eq!(census.count(), 11);
}
