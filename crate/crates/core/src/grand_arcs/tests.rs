use super::*;
use crate::data;
use crate::windows::build_window;
use std::sync::OnceLock;

fn fig5_level0() -> &'static (EndSpace, CombWindow, Vec<GrandArc>) {
    static CELL: OnceLock<(EndSpace, CombWindow, Vec<GrandArc>)> = OnceLock::new();
    CELL.get_or_init(|| {
        let s = data::figure5();
        let w = build_window(&s, 0).unwrap();
        let arcs = enumerate_grand_arcs(&w, &s, 24);
        (s, w, arcs)
    })
}

#[test]
fn counts_maximal_types() {
    assert_eq!(maximal_type_count(&data::figure5()), 3);
    assert_eq!(maximal_type_count(&data::figure4()), 2);
    assert_eq!(maximal_type_count(&data::cantor_sphere()), 1);
}

#[test]
fn arcs_join_distinct_types_through_a_pair_of_pants() {
    let (s, w, arcs) = fig5_level0();
    assert!(!arcs.is_empty());
    for a in arcs {
        assert_ne!(a.types.0, a.types.1);
        let info = cut(w, &a.enclosing.word);
        assert!(info.sides.iter().any(|side| side.genus == 0 && side.labels == vec![a.ends.0, a.ends.1]));
        assert!(is_nonperipheral(&a.enclosing, w, s).unwrap().nonperipheral);
    }
}

#[test]
fn splits_recover_the_path() {
    // x0 . (x2 x3) x1 (x2 x3)^-1 on generators 0..4.
    let c = [1, 3, 4, 2, -4, -3];
    let (ea, path, eb) = split_arc(&c, 0, 1).unwrap();
    assert!(ea && eb);
    assert_eq!(path, vec![3, 4]);
    assert!(split_arc(&c, 0, 2).is_none());
}

/// Arcs sharing one endpoint are disjoint when both fit in a four-holed sphere inside
/// which they are Farey neighbours. The sphere is cut off by a boundary curve of a
/// regular neighbourhood of the two enclosing curves: one arc of each, between crossings.
fn shared_end_oracle(w: &CombWindow, x: &GrandArc, y: &GrandArc) -> bool {
    let (a, b) = (&x.enclosing.word, &y.enclosing.word);
    if intersection_words(w, a, b) != 2 {
        return false;
    }
    let mut want = vec![x.ends.0, x.ends.1, y.ends.0, y.ends.1];
    want.sort_unstable();
    want.dedup();
    let mut pool = crate::curves::consecutive_arc_curves(w, a, b);
    pool.extend(crate::curves::consecutive_arc_curves(w, b, a));
    pool.iter().any(|d| {
        crate::curves::is_simple_word(w, d)
            && disjoint_words(w, d, a)
            && disjoint_words(w, d, b)
            && cut(w, d).sides.iter().any(|side| side.genus == 0 && side.labels == want)
    })
}

#[test]
fn shared_endpoint_disjointness_matches_the_oracle() {
    let (_, w, arcs) = fig5_level0();
    let mut tested = 0;
    let mut disjoint = 0;
    for (i, x) in arcs.iter().enumerate() {
        for y in arcs.iter().skip(i + 1) {
            if x.shares(y) != 1 {
                continue;
            }
            tested += 1;
            let fast = arcs_disjoint(w, x, y);
            assert_eq!(fast, shared_end_oracle(w, x, y), "{:?} {:?}", x.enclosing.word, y.enclosing.word);
            disjoint += usize::from(fast);
        }
    }
    assert!(tested > 50 && disjoint > 0, "{tested} {disjoint}");
}

#[test]
fn disjointness_is_symmetric() {
    let (_, w, arcs) = fig5_level0();
    for x in arcs.iter().take(25) {
        assert!(!arcs_disjoint(w, x, x));
        for y in arcs.iter().take(25) {
            assert_eq!(arcs_disjoint(w, x, y), arcs_disjoint(w, y, x));
        }
    }
}

#[test]
fn too_few_types() {
    let s = data::figure4();
    let amb = Ambient::new(&s, 0, 1).unwrap();
    let arc = GrandArc {
        level: 0,
        enclosing: Curve::new(&amb.chain[0], &[-2, -1]).unwrap(),
        ends: (0, 1),
        types: ("a".into(), "b".into()),
    };
    let nb = Neighborhoods { a: 0..1, b: 1..2 };
    assert_eq!(small_neighborhood_curve(&amb, &arc, &nb).unwrap_err(), CnpError::TooFewTypes);
    let w = build_window(&s, 0).unwrap();
    assert_eq!(build_hybrid(&s, &w, 12, Variant::Y).unwrap_err(), CnpError::TooFewTypes);
}

#[test]
fn small_neighborhood_curves_enclose_the_chosen_runs() {
    let s = data::figure5();
    let amb = Ambient::new(&s, 0, 2).unwrap();
    let arcs = random_grand_arcs(&amb, 16, 6, 3, 3).unwrap();
    assert!(!arcs.is_empty());
    let top = amb.top();
    for arc in &arcs {
        let choices = neighborhood_choices(&amb, arc).unwrap();
        assert!(choices.len() >= 3);
        for nb in &choices {
            let snc = small_neighborhood_curve(&amb, arc, nb).unwrap();
            assert!(snc.nonperipheral, "{}", snc.certificate);
            let mut want: Vec<usize> = nb.a.clone().chain(nb.b.clone()).collect();
            want.sort_unstable();
            assert!(cut(top, &snc.curve.word).sides.iter().any(|side| side.labels == want));
        }
        let d = arc_diameter(&amb, arc, &[]).unwrap();
        assert!(d.diameter.is_some_and(|x| x <= 2));
    }
}

#[test]
fn nested_choices_give_disjoint_curves() {
    let s = data::figure5();
    let amb = Ambient::new(&s, 0, 2).unwrap();
    let arc = &random_grand_arcs(&amb, 16, 1, 3, 9).unwrap()[0];
    let choices = neighborhood_choices(&amb, arc).unwrap();
    let top = amb.top();
    for x in &choices {
        for y in &choices {
            let nested = (x.a.start <= y.a.start && y.a.end <= x.a.end) && (x.b.start <= y.b.start && y.b.end <= x.b.end);
            if nested {
                let cx = small_neighborhood_curve(&amb, arc, x).unwrap().curve;
                let cy = small_neighborhood_curve(&amb, arc, y).unwrap().curve;
                assert!(disjoint_words(top, &cx.word, &cy.word));
            }
        }
    }
}

#[test]
fn hybrid_variants() {
    let (s, w, _) = fig5_level0();
    let graph = CnpGraph::build(w, s, 16).unwrap();
    let y = build_hybrid(s, w, 16, Variant::Y).unwrap();
    let y0 = build_hybrid(s, w, 16, Variant::Y0).unwrap();
    let ga = build_hybrid(s, w, 16, Variant::GAhat).unwrap();
    let nc = y.curves.len();
    assert_eq!(nc, graph.len());
    assert_eq!(ga.len(), ga.arcs.len());
    for i in 0..nc {
        for &j in &graph.adj[i] {
            assert!(y.adj[i].contains(&j));
        }
        assert!(y0.adj[i].iter().all(|&j| j >= nc));
    }
    for k in 0..y.arcs.len() {
        assert!(y.adj[y.arc_vertex(k)].iter().any(|&v| v < nc), "arc {k} has no curve neighbour");
    }
    // Two arcs missing a common curve are adjacent in GAhat.
    for i in (0..nc).step_by(7) {
        let members: Vec<usize> = (0..ga.arcs.len()).filter(|&k| ga.arc_curve[k].contains(&i)).collect();
        for &k in &members {
            for &l in &members {
                if k != l {
                    assert!(ga.adj[k].contains(&l));
                }
            }
        }
    }
    assert!(ga.electrified_edges > 0);
    assert!(y.to_dot(w).starts_with("graph Y {"));
    let again = build_hybrid(s, w, 16, Variant::Y).unwrap();
    assert_eq!(again.adj, y.adj);
}

#[test]
fn some_disjoint_pairs_share_no_grand_arc() {
    // The curve around both Cantor blocks and the curve around those blocks with the
    // isolated point C: each complementary piece carries one maximal type only.
    let (s, w, _) = fig5_level0();
    let alpha = Curve::new(w, &[-3, -2]).unwrap();
    let beta = Curve::new(w, &[-4, -3, -2]).unwrap();
    assert!(is_nonperipheral(&alpha, w, s).unwrap().nonperipheral);
    assert!(is_nonperipheral(&beta, w, s).unwrap().nonperipheral);
    assert!(disjoint_words(w, &alpha.word, &beta.word));
    let arcs = enumerate_grand_arcs(w, s, 24);
    assert!(!arcs.iter().any(|a| arc_disjoint_from_curve(w, a, &alpha) && arc_disjoint_from_curve(w, a, &beta)));
    let y0 = build_hybrid(s, w, 16, Variant::Y0).unwrap();
    let (ia, ib) = (y0.curves.iter().position(|c| *c == alpha).unwrap(), y0.curves.iter().position(|c| *c == beta).unwrap());
    let d = y0.bfs(ia)[ib];
    assert!(d > 2 && d < usize::MAX, "{d}");
}

#[test]
fn ga_alpha_subgraphs() {
    let (s, w, _) = fig5_level0();
    let h = build_hybrid(s, w, 16, Variant::Y).unwrap();
    let mut nonempty = 0;
    for alpha in h.curves.iter().take(20) {
        let sub = ga_alpha(&h, w, s, alpha).unwrap();
        if sub.arcs.is_empty() {
            assert!(sub.diagnostic.is_some());
            continue;
        }
        nonempty += 1;
        for &k in &sub.arcs {
            assert!(arc_disjoint_from_curve(w, &h.arcs[k], alpha));
        }
        let (tested, joined) = sub.sampled_connectivity(10, 1);
        assert!(joined <= tested);
    }
    assert!(nonempty > 0);
    let peripheral = Curve::new(w, &[-1]).unwrap();
    assert!(matches!(ga_alpha(&h, w, s, &peripheral), Err(CnpError::HypothesisViolation(_)) | Err(CnpError::NotEssential(_))));
}

#[test]
fn hybrid_distances_bound_curve_distances() {
    let (s, w, _) = fig5_level0();
    let graph = CnpGraph::build(w, s, 16).unwrap();
    let y = build_hybrid(s, w, 16, Variant::Y).unwrap();
    let cmp = compare_distances(&y, &graph, 200, 5).unwrap();
    assert_eq!(cmp.lower_violations, 0);
    assert!(cmp.a >= 0.0 && cmp.a.is_finite());
}
