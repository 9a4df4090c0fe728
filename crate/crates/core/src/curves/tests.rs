use super::*;
use crate::data;
use crate::end_calculus::zeta_clopen;
use crate::windows::build_window;
use proptest::prelude::*;

fn w4() -> CombWindow {
    build_window(&data::figure4(), 0).unwrap()
}

/// Counts interlaced chord pairs of two curves put in minimal position by band ordering.
fn chord_count(w: &CombWindow, a: &[Letter], b: &[Letter]) -> usize {
    let real = Realization::new(w, vec![a, b]);
    let mut n = 0;
    for i in 0..a.len() {
        for j in 0..b.len() {
            if real.interlaced(real.chord(0, i), real.chord(1, j)) {
                n += 1;
            }
        }
    }
    n
}

#[test]
fn reduce_removes_backtracks_and_is_idempotent() {
    let w = w4();
    let c = Curve::new(&w, &[1, 2, -2, 2]).unwrap();
    assert_eq!(c.word, words::canonical(&[1, 2]));
    assert_eq!(Curve::new(&w, &c.word).unwrap(), c);
    assert_eq!(Curve::new(&w, &[1, -1]), Err(CnpError::NullHomotopic));
    assert_eq!(Curve::new(&w, &[1, 2, 1, 2]), Err(CnpError::NotSimple));
}

#[test]
fn boundary_parallel_loops_are_inessential() {
    let w = w4();
    for k in 0..3 {
        let c = Curve::new(&w, &[words::letter(k, true)]).unwrap();
        assert!(!is_essential(&c, &w));
    }
    let outer = Curve::new(&w, &w.boundary_word(w.outer())).unwrap();
    assert!(!is_essential(&outer, &w));
    assert!(is_essential(&Curve::new(&w, &[1, 2]).unwrap(), &w));
}

#[test]
fn seams_of_four_holed_sphere_meet_twice() {
    let w = w4();
    let a = Curve::new(&w, &[1, 2]).unwrap();
    let b = Curve::new(&w, &[2, 3]).unwrap();
    let c = Curve::new(&w, &[1, 3]).unwrap();
    assert_eq!(intersection_number(&w, &a, &b).unwrap(), 2);
    assert_eq!(intersection_number(&w, &a, &c).unwrap(), 2);
    assert_eq!(intersection_number(&w, &a, &a).unwrap(), 0);
    assert_eq!(chord_count(&w, &a.word, &b.word), 2);
}

#[test]
fn twisting_a_seam_squares_the_intersection() {
    let w = w4();
    let a = Curve::new(&w, &[1, 2]).unwrap();
    let b = Curve::new(&w, &[2, 3]).unwrap();
    let tb = twist_image(&w, &b, &a, 1).unwrap();
    assert!(is_simple_word(&w, &tb.word));
    assert_eq!(intersection_number(&w, &b, &tb).unwrap(), 4);
    assert_eq!(intersection_number(&w, &a, &tb).unwrap(), 2);
    assert_eq!(twist_image(&w, &b, &a, 0).unwrap(), b);
}

#[test]
fn disjoint_axis_leaves_curve_fixed() {
    let w = build_window(&data::figure5(), 0).unwrap();
    let a = Curve::new(&w, &[1, 2]).unwrap();
    let b = Curve::new(&w, &[3, 4]).unwrap();
    assert_eq!(intersection_number(&w, &a, &b).unwrap(), 0);
    assert_eq!(twist_image(&w, &b, &a, 5).unwrap(), b);
}

#[test]
fn planar_curves_separate_and_handles_do_not() {
    let w = build_window(&data::figure5(), 1).unwrap();
    let c = Curve::new(&w, &[2, 3, 4]).unwrap();
    assert!(is_separating(&c, &w));
    let g = build_window(&data::genus_one(), 0).unwrap();
    let (a, b) = g.handle_gens(0);
    let core = Curve::new(&g, &[words::letter(a, true)]).unwrap();
    assert!(!is_separating(&core, &g));
    assert!(is_essential(&core, &g));
    let info = cut(&g, &core.word);
    assert_eq!(info.sides.len(), 1);
    assert_eq!(info.sides[0].genus, 0);
    let (la, lb) = (words::letter(a, true), words::letter(b, true));
    let handle = Curve::new(&g, &[la, lb, -la, -lb]).unwrap();
    let info = cut(&g, &handle.word);
    assert!(info.separating());
    assert!(info.sides.iter().any(|s| s.labels.is_empty() && s.genus == 1));
    assert!(is_essential(&handle, &g));
}

#[test]
fn figure_four_alpha_splits_into_two_cantor_pairs() {
    let s = data::figure4();
    let w = build_window(&s, 0).unwrap();
    let alpha = Curve::new(&w, &[1, 2]).unwrap();
    assert!(is_separating(&alpha, &w));
    let p = end_partition(&alpha, &w, &s).unwrap();
    assert_eq!(p.labels_one, vec![0, 1]);
    assert_eq!(p.labels_two, vec![2, 3]);
    assert_eq!(zeta_clopen(&p.side_one, &s), 2);
    assert_eq!(zeta_clopen(&p.side_two, &s), 2);
    assert_eq!(p.side_one.complement(&s), p.side_two);
}

#[test]
fn figure_five_curve_around_xc() {
    let s = data::figure5();
    let w = build_window(&s, 0).unwrap();
    let c = Curve::new(&w, &[1]).unwrap();
    let p = end_partition(&c, &w, &s).unwrap();
    assert_eq!(p.labels_one, vec![0]);
    assert_eq!(zeta_clopen(&p.side_one, &s), 1);
}

#[test]
fn non_separating_partition_is_rejected() {
    let s = data::genus_one();
    let g = build_window(&s, 0).unwrap();
    let (a, _) = g.handle_gens(0);
    let core = Curve::new(&g, &[words::letter(a, true)]).unwrap();
    assert_eq!(end_partition(&core, &g, &s), Err(CnpError::NotSeparating));
}

#[test]
fn json_round_trip() {
    let w = build_window(&data::figure5(), 1).unwrap();
    let c = Curve::new(&w, &[2, 3, -5, 4]).unwrap_or_else(|_| Curve::new(&w, &[2, 3]).unwrap());
    let text = c.to_json(&w);
    assert_eq!(Curve::from_json(&text, &w).unwrap(), c);
    let w0 = build_window(&data::figure5(), 0).unwrap();
    assert!(matches!(Curve::from_json(&text, &w0), Err(CnpError::LevelMismatch(1, 0))));
}

fn simple_curve(w: &CombWindow, raw: &[i32]) -> Option<Curve> {
    let n = w.n_gen() as i32;
    let word: Vec<Letter> = raw.iter().map(|&x| if x > 0 { (x - 1) % n + 1 } else { -((-x - 1) % n + 1) }).collect();
    let c = Curve::new(w, &word).ok()?;
    is_essential(&c, w).then_some(c)
}

fn raw_word() -> impl Strategy<Value = Vec<i32>> {
    proptest::collection::vec(prop_oneof![-12i32..=-1, 1i32..=12], 1..9)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn intersection_is_symmetric_and_matches_chord_count(a in raw_word(), b in raw_word(), g in 0usize..2) {
        let space = if g == 0 { data::figure5() } else { data::genus_one() };
        let w = build_window(&space, 1).unwrap();
        let (Some(a), Some(b)) = (simple_curve(&w, &a), simple_curve(&w, &b)) else { return Ok(()); };
        let ab = intersection_number(&w, &a, &b).unwrap();
        prop_assert_eq!(ab, intersection_number(&w, &b, &a).unwrap());
        if a != b {
            prop_assert_eq!(ab, chord_count(&w, &a.word, &b.word));
        }
    }

    #[test]
    fn twist_laws(x in raw_word(), t in raw_word(), m in -3i64..=3, n in -3i64..=3) {
        let w = build_window(&data::figure5(), 1).unwrap();
        let (Some(x), Some(t)) = (simple_curve(&w, &x), simple_curve(&w, &t)) else { return Ok(()); };
        let i = intersection_number(&w, &x, &t).unwrap();
        prop_assume!(i <= 4);
        let tm = twist_image(&w, &x, &t, m).unwrap();
        let tmn = twist_image(&w, &tm, &t, n).unwrap();
        prop_assert_eq!(&tmn, &twist_image(&w, &x, &t, m + n).unwrap());
        prop_assert!(is_simple_word(&w, &tm.word));
        prop_assert_eq!(intersection_number(&w, &tm, &t).unwrap(), i);
        prop_assert_eq!(intersection_number(&w, &tm, &x).unwrap(), m.unsigned_abs() as usize * i * i);
    }

    #[test]
    fn partition_sides_are_complements(x in raw_word()) {
        let s = data::figure5();
        let w = build_window(&s, 1).unwrap();
        let Some(c) = simple_curve(&w, &x) else { return Ok(()); };
        let p = end_partition(&c, &w, &s).unwrap();
        prop_assert_eq!(p.side_one.complement(&s), p.side_two.clone());
        let mut all: Vec<usize> = p.labels_one.iter().chain(&p.labels_two).copied().collect();
        all.sort();
        prop_assert_eq!(all, (0..w.n_labels()).collect::<Vec<_>>());
    }
}

#[test]
fn random_words_yield_enough_simple_curves() {
    use rand::{Rng, SeedableRng};
    let w = build_window(&data::figure5(), 1).unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
    let mut simple = 0;
    let mut crossing_pairs = 0;
    let mut prev: Option<Curve> = None;
    for _ in 0..2000 {
        let len = rng.gen_range(1..9);
        let raw: Vec<i32> = (0..len).map(|_| if rng.gen() { rng.gen_range(1..=12) } else { -rng.gen_range(1..=12) }).collect();
        if let Some(c) = simple_curve(&w, &raw) {
            simple += 1;
            if let Some(p) = &prev {
                if intersection_number(&w, p, &c).unwrap() > 0 {
                    crossing_pairs += 1;
                }
            }
            prev = Some(c);
        }
    }
    assert!(simple > 100, "{simple}");
    assert!(crossing_pairs > 20, "{crossing_pairs}");
}
