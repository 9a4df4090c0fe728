use super::*;
use crate::curves::intersection_words;
use crate::data;
use crate::peripherality_cnp::enumerate_simple;
use proptest::prelude::*;

fn fig5(base: usize, headroom: usize) -> Ambient {
    Ambient::new(&data::figure5(), base, headroom).unwrap()
}

fn curve(amb: &Ambient, level: usize, lo: usize, hi: usize) -> Curve {
    let w = &amb.chain[level];
    Curve::new(w, &w.interval_word(lo, hi)).unwrap()
}

/// Essential curves of small complexity at `level`, used as a test set for actions.
fn test_curves(amb: &Ambient, level: usize, cap: u32) -> Vec<Curve> {
    let w = &amb.chain[level];
    enumerate_simple(w, cap)
        .into_iter()
        .map(|x| Curve::from_canonical(level, x))
        .filter(|c| crate::curves::is_essential(c, w))
        .collect()
}

#[test]
fn upper_norm_counts_reduced_letters() {
    let amb = fig5(0, 1);
    let a = curve(&amb, 0, 0, 1);
    assert_eq!(norm_upper(&Word::identity()), 0);
    let s = Generator::new(GenKind::ShiftAB(0));
    assert_eq!(norm_upper(&Word::from_letters(vec![s.clone(), s.inverse()])), 0);
    assert_eq!(norm_upper(&Word::twist_power(&a, -7)), 7);
    let w = Word::twist_power(&a, 3).concat(&Word::twist_power(&a, -2));
    assert_eq!(norm_upper(&w), 1);
}

#[test]
fn words_round_trip_through_json() {
    let amb = fig5(0, 1);
    let mut letters = amb.alphabet().unwrap();
    letters.push(Generator::twist(curve(&amb, 1, 1, 2)).inverse());
    let w = Word::from_letters(letters);
    let text = w.to_json(&amb);
    assert_eq!(Word::from_json(&text, &amb).unwrap(), w);
    assert!(Word::from_json(r#"{"letters":[{"kind":"ShiftA","arg":0,"inv":false}]}"#, &amb).is_err());
    assert!(Word::from_json(r#"{"letters":[{"kind":"Nope","arg":0}]}"#, &amb).is_err());
}

#[test]
fn alphabet_respects_end_types() {
    let amb = fig5(0, 1);
    let kinds: Vec<&str> = amb.alphabet().unwrap().iter().map(Generator::kind_name).collect();
    for k in ["ShiftAB", "ShiftA", "LocalHalfTwist", "LocalTwist", "VBlob"] {
        assert!(kinds.contains(&k), "{k} missing");
    }
    // xC and K#1 have different types.
    assert!(amb.check(&Generator::new(GenKind::LocalHalfTwist(0))).is_err());
    assert!(amb.check(&Generator::new(GenKind::ShiftA(0))).is_err());
}

#[test]
fn cabled_generators_commute_with_embedding() {
    for space in [data::figure5(), data::figure4(), data::zeta6()] {
        for level in 0..2 {
            let lo = Ambient::new(&space, 0, level).unwrap();
            let hi = Ambient::new(&space, 0, level + 1).unwrap();
            let gens: Vec<Generator> = lo.alphabet().unwrap().into_iter().filter(|g| !matches!(g.kind, GenKind::LocalTwist(_))).collect();
            let mut checked = 0;
            for c in test_curves(&lo, level, 10) {
                for g in &gens {
                    for g in [g.clone(), g.inverse()] {
                        let word = Word::from_letters(vec![g]);
                        let Ok(img) = lo.apply(&word, &c) else { continue };
                        let up = hi.lift(&img).unwrap();
                        assert_eq!(hi.apply(&word, &c).unwrap(), up, "{word:?} on {c:?}");
                        checked += 1;
                    }
                }
            }
            assert!(checked > 5, "{checked}");
        }
    }
}

#[test]
fn generators_are_invertible_and_preserve_peripherality() {
    let amb = fig5(1, 1);
    let top = amb.top();
    let mut gens = amb.alphabet().unwrap();
    gens.push(Generator::new(GenKind::MaxPerm(1, 2)));
    for c in test_curves(&amb, 1, 10) {
        let np = is_nonperipheral(&amb.lift(&c).unwrap(), top, &amb.space).unwrap().nonperipheral;
        for g in &gens {
            let w = Word::from_letters(vec![g.clone()]);
            let Ok(img) = amb.apply(&w, &c) else { continue };
            assert_eq!(amb.apply(&w.inverse(), &img).unwrap(), amb.lift(&c).unwrap());
            assert_eq!(is_nonperipheral(&img, top, &amb.space).unwrap().nonperipheral, np, "{g:?} on {c:?}");
        }
    }
}

#[test]
fn blob_fixes_the_marking() {
    let amb = fig5(0, 1);
    let mu = Marking::chain(amb.base_window()).unwrap();
    let w = Word::from_letters(vec![Generator::new(GenKind::VBlob("K0".into())); 3]);
    let img = amb.apply_marking(&w, &mu).unwrap();
    assert_eq!(img.curves(), amb.marking().unwrap());
}

#[test]
fn shift_moves_nested_curve_one_level() {
    let amb = fig5(0, 2);
    let g0 = curve(&amb, 0, 0, 1);
    let f = Word::from_letters(vec![Generator::new(GenKind::ShiftAB(0))]);
    let g1 = amb.apply(&f, &g0).unwrap();
    assert_eq!(g1, curve(&amb, 2, 0, 2));
    let g2 = amb.apply(&f, &g1).unwrap();
    assert_eq!(g2, curve(&amb, 2, 0, 3));
    assert!(matches!(amb.apply(&f, &g2), Err(CnpError::WindowOverflow)));
}

#[test]
fn twist_powers_compose() {
    let amb = fig5(1, 0);
    let a = curve(&amb, 1, 1, 2);
    for c in test_curves(&amb, 1, 8).into_iter().take(15) {
        for (m, n) in [(2, 3), (-4, 1), (3, -3)] {
            let two = amb.apply(&Word::twist_power(&a, m), &amb.apply(&Word::twist_power(&a, n), &c).unwrap()).unwrap();
            assert_eq!(two, amb.apply(&Word::twist_power(&a, m + n), &c).unwrap());
        }
    }
}

#[test]
fn lower_bounds_on_basic_words() {
    let amb = fig5(0, 1);
    let a = curve(&amb, 0, 1, 2);
    let cal = calibrate(&amb, std::slice::from_ref(&a), 6).unwrap();
    assert!(cal.m >= 1.0 && cal.b >= 0.0);
    assert_eq!(norm_lower(&amb, &Word::identity(), std::slice::from_ref(&a)).unwrap().lower, 0.0);
    let blob = Word::from_letters(vec![Generator::new(GenKind::VBlob("K0".into())); 4]);
    let nb = norm_lower(&amb, &blob, std::slice::from_ref(&a)).unwrap();
    assert_eq!(nb.lower, 0.0);
    assert_eq!(nb.upper, 4);
    for n in [-12i64, 5, 20] {
        let w = Word::twist_power(&a, n);
        let nb = norm_lower(&amb, &w, std::slice::from_ref(&a)).unwrap();
        assert!(nb.lower >= (n.abs() as f64 - cal.b) / cal.m - 1e-9, "{n}: {nb:?}");
        assert!(nb.lower <= nb.upper as f64);
    }
    assert_eq!(norm_lower(&amb, &Word::identity(), &[]).unwrap_err(), CnpError::EmptyWitness);
}

#[test]
fn disjoint_families() {
    let amb = Ambient::new(&data::figure4(), 0, 3).unwrap();
    let fam = disjoint_np_family(&amb, 3).unwrap();
    assert_eq!(fam.len(), 3);
    for i in 0..3 {
        for j in 0..i {
            assert_eq!(intersection_words(amb.top(), &fam[i].word, &fam[j].word), 0);
        }
    }
    let amb = fig5(0, 2);
    assert_eq!(disjoint_np_family(&amb, 2).unwrap().len(), 2);
    let ladder = Ambient::new(&data::ladder(), 0, 2).unwrap();
    assert!(matches!(disjoint_np_family(&ladder, 2), Err(CnpError::HypothesisViolation(_))));
}

#[test]
fn small_lattice_sandwich() {
    let amb = fig5(2, 1);
    let fam = disjoint_np_family(&amb, 2).unwrap();
    let cal = calibrate(&amb, &fam, 6).unwrap();
    let r = zk_certificate(&amb, &fam, 2, cal.b).unwrap();
    assert_eq!(r.points, 25);
    assert!(r.holds(), "{r:?}");
}

fn random_word(amb: &Ambient, picks: &[usize], invs: &[bool]) -> Word {
    let alpha: Vec<Generator> = amb.alphabet().unwrap().into_iter().filter(|g| !matches!(g.kind, GenKind::ShiftAB(_) | GenKind::ShiftA(_))).collect();
    Word::from_letters(picks.iter().zip(invs).map(|(&p, &i)| {
        let g = alpha[p % alpha.len()].clone();
        if i { g.inverse() } else { g }
    }).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn functional_is_symmetric_and_nearly_subadditive(
        p in proptest::collection::vec(0usize..64, 0..5),
        pi in proptest::collection::vec(any::<bool>(), 5),
        q in proptest::collection::vec(0usize..64, 0..5),
        qi in proptest::collection::vec(any::<bool>(), 5),
    ) {
        let amb = fig5(0, 1);
        let axes = vec![curve(&amb, 0, 0, 1), curve(&amb, 0, 1, 2)];
        let f = LengthFunctional::calibrated(&amb, &axes, Aggregate::Max, &amb.alphabet().unwrap()).unwrap();
        let b = twist_deviation(&amb, &axes, 4).unwrap() as usize;
        let u = random_word(&amb, &p, &pi);
        let v = random_word(&amb, &q, &qi);
        let lu = f.eval(&amb, &u).unwrap().value;
        prop_assert_eq!(lu, f.eval(&amb, &u.inverse()).unwrap().value);
        let lv = f.eval(&amb, &v).unwrap().value;
        let luv = f.eval(&amb, &u.concat(&v)).unwrap().value;
        prop_assert!(luv <= lu + lv + 2 * b, "{} > {} + {} + 2*{}", luv, lu, lv, b);
    }
}
