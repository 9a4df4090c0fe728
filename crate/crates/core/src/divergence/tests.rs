use super::*;
use crate::curves::intersection_words;
use crate::data;
use crate::peripherality_cnp::is_nonperipheral;
use std::sync::OnceLock;

fn model() -> &'static DivergenceModel {
    static M: OnceLock<DivergenceModel> = OnceLock::new();
    M.get_or_init(|| DivergenceModel::new(&data::figure5()).unwrap())
}

#[test]
fn constants_satisfy_the_inequalities() {
    let k = &model().constants;
    k.check().unwrap();
    assert!(k.eta < 1.0 / (1.0 + k.q * k.q));
    assert!((k.k_tw - 6.0 * k.m) / k.m >= 2.0 * k.eta);
    assert!((k.k_tw - 1.0 - 6.0 * k.m) / k.m < 2.0 * k.eta, "K_tw is not the smallest integer");
    let mut bad = k.clone();
    bad.k_tw = 6.0 * k.m;
    assert!(matches!(bad.check(), Err(CnpError::ConstantInfeasible(_))));
    let mut bad = k.clone();
    bad.eta = 1.0 / (1.0 + k.q * k.q);
    assert!(bad.check().is_err());
}

#[test]
fn small_complexity_is_rejected() {
    assert!(matches!(DivergenceModel::new(&data::figure4()), Err(CnpError::HypothesisViolation(_))));
}

#[test]
fn commuting_curves_are_fixed_and_non_peripheral() {
    let m = model();
    let amb = &m.amb;
    let blob = Generator::new(GenKind::VBlob("K0".into()));
    assert_eq!(m.commuting_curve(&blob).unwrap(), m.graph.curves[m.alpha0]);
    for (g, i) in &m.table {
        let c = &m.graph.curves[*i];
        assert!(is_nonperipheral(c, &amb.chain[0], &amb.space).unwrap().nonperipheral);
        let img = amb.apply(&Word::from_letters(vec![g.clone()]), c).unwrap();
        assert_eq!(img, amb.lift(c).unwrap(), "{g:?}");
        if let GenKind::LocalTwist(axis) = &g.kind {
            assert_ne!(axis, c);
            assert_eq!(intersection_words(&amb.chain[0], &axis.word, &c.word), 0);
        }
    }
}

#[test]
fn decompositions_of_small_words() {
    let m = model();
    let d = linked_decomposition(m, &Word::identity()).unwrap();
    assert_eq!((d.n(), d.blocks.len()), (1, 1));
    assert_eq!(d.letters, vec![None]);
    let t = Word::twist_power(&m.endpoint_axes()[0], 1);
    let d = linked_decomposition(m, &t).unwrap();
    assert_eq!((d.n(), d.blocks.len()), (1, 1));
}

#[test]
fn random_word_decomposition_holds_invariants() {
    let m = model();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut letters: Vec<Generator> = m.table.iter().map(|t| t.0.clone()).filter(|g| !matches!(g.kind, GenKind::ShiftAB(_) | GenKind::ShiftA(_))).collect();
    letters.sort_by_key(|g| format!("{g:?}"));
    let word = Word::from_letters(
        (0..40)
            .map(|_| {
                let g = letters[rng.gen_range(0..letters.len())].clone();
                if rng.gen() {
                    g.inverse()
                } else {
                    g
                }
            })
            .collect(),
    );
    let d = linked_decomposition(m, &word).unwrap();
    let tests: Vec<Curve> = m.graph.curves.iter().take(12).cloned().collect();
    let bad = check_decomposition(m, &word, &d, &tests).unwrap();
    assert!(bad.is_empty(), "{bad:?}");
    assert!(d.n() as f64 <= d.c0 * 40.0);
}

#[test]
fn escape_moves_away_from_the_identity() {
    let m = model();
    let a = &m.endpoint_axes()[0];
    let (_, threshold, bounds) = escape_sign(m, a, &Word::identity(), 20).unwrap();
    assert!(threshold <= 0.0);
    assert!(bounds.is_some());
    let g = Word::twist_power(a, -40);
    let (sign, threshold, bounds) = escape_sign(m, a, &g, 200).unwrap();
    assert!(threshold > 0.0, "{threshold}");
    assert_eq!(sign, -1);
    let b = bounds.unwrap();
    assert!(b.iter().all(|&x| x >= threshold));
    assert!(b[200] > b[0]);
}

#[test]
fn detour_certificate_at_small_scale() {
    let m = model();
    let axes = m.endpoint_axes();
    let g1 = Word::twist_power(&axes[0], 12);
    let g2 = Word::twist_power(&axes[axes.len() - 1], -15);
    let c = build_detour(m, &g1, &g2, 10).unwrap();
    assert!(c.is_valid(), "{:?}", c.violations);
    assert_eq!(c.vertex_word(&c.path[0]), g1);
    let end = c.vertex_word(c.path.last().unwrap());
    for x in m.graph.curves.iter().take(8) {
        assert_eq!(m.amb.apply(&end, x).unwrap(), m.amb.apply(&g2, x).unwrap());
    }
    for e in c.path.windows(2) {
        let steps: i64 = (0..c.blocks.len())
            .map(|b| {
                let p = |v: &PathVertex| v.twists.iter().filter(|t| t.0 == b).map(|t| t.1).sum::<i64>();
                (p(&e[0]) - p(&e[1])).abs()
            })
            .sum::<i64>()
            + (e[1].prefix - e[0].prefix) as i64;
        assert_eq!(steps, 1);
    }
    assert!(c.length as f64 <= c.length_bound);
    let same = build_detour(m, &g1, &Word::twist_power(&axes[0], 17), 10).unwrap();
    assert!(same.is_valid(), "{:?}", same.violations);
    assert!(same.path.iter().all(|v| v.estimate != Estimate::Switch) || same.blocks.len() > 1);
    assert!(matches!(build_detour(m, &Word::identity(), &g2, 10), Err(CnpError::HypothesisViolation(_))));
}

#[test]
fn slope_fit() {
    let xs: Vec<f64> = [1.0f64, 2.0, 4.0].iter().map(|x| x.ln()).collect();
    let ys: Vec<f64> = [3.0f64, 12.0, 48.0].iter().map(|y| y.ln()).collect();
    assert!((fit_slope(&xs, &ys).unwrap() - 2.0).abs() < 1e-9);
    assert_eq!(fit_slope(&xs[..1], &ys[..1]), None);
}
