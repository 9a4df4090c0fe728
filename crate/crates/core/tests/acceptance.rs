//! Acceptance run: one line per criterion, non-zero exit when any criterion fails.
//! Pass criterion numbers as arguments to run a subset.

use std::sync::OnceLock;
use std::time::{Duration, Instant};

use cnp_core::curves::Curve;
use cnp_core::data;
use cnp_core::divergence::{divergence_experiment, DivergenceModel};
use cnp_core::end_calculus::{anchor_decomposition, enumerate_profiles, is_small, small_oracle, zeta_surface};
use cnp_core::grand_arcs::{arc_diameter, build_hybrid, maximal_type_count, random_grand_arcs, Variant};
use cnp_core::group_words::{alphabet_with_twists, calibrate, disjoint_np_family, zk_certificate, Ambient, GenKind, Word};
use cnp_core::peripherality_cnp::{cnp_neighbors, hyperbolicity_probe, is_nonperipheral, surgery_path, CnpBall, CnpGraph};
use cnp_core::projections::{annular_twist, embed_curve};
use cnp_core::windows::build_window;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<(bool, String), String>;

fn model() -> &'static DivergenceModel {
    static CELL: OnceLock<DivergenceModel> = OnceLock::new();
    CELL.get_or_init(|| DivergenceModel::new(&data::figure5()).expect("divergence model"))
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn zeta() -> Outcome {
    let (z5, z4) = (zeta_surface(&data::figure5()), zeta_surface(&data::figure4()));
    Ok((z5 == 5 && z4 == 4, format!("figure5 {z5}, figure4 {z4}")))
}

fn anchor() -> Outcome {
    let d = anchor_decomposition(&data::figure5());
    let (a, p, b) = (d.a_blocks.len(), d.p_blocks.len(), d.boundary_count);
    Ok((a == 4 && p == 1 && b == 5, format!("|A| = {a}, |P| = {p}, boundary {b}")))
}

fn smallness() -> Outcome {
    let mut cases = 0;
    let mut disagreements = Vec::new();
    for (name, s) in data::all() {
        for p in enumerate_profiles(&s) {
            cases += 1;
            let rule = is_small(&p, &s).map(|v| v.small);
            if rule != Ok(small_oracle(&p, &s)) {
                disagreements.push(format!("{name}: {p:?}"));
            }
        }
    }
    Ok((disagreements.is_empty(), format!("{cases} profiles, {} disagreements {:?}", disagreements.len(), disagreements.first())))
}

fn isolation() -> Outcome {
    let s = data::figure4();
    let chain: Vec<_> = (0..=3).map(|l| build_window(&s, l)).collect::<Result<_, _>>().map_err(err)?;
    let alpha = Curve::new(&chain[1], &chain[1].interval_word(0, 2)).map_err(err)?;
    let mut ok = true;
    let mut parts = Vec::new();
    for level in 1..=3 {
        let w = &chain[level];
        let a = embed_curve(&chain, &alpha, level).map_err(err)?;
        let np = is_nonperipheral(&a, w, &s).map_err(err)?.nonperipheral;
        let g = CnpGraph::build(w, &s, 24).map_err(err)?;
        let degree = cnp_neighbors(&a, w, &s, &g).map_err(err)?.len();
        ok &= np && degree == 0;
        parts.push(format!("level {level}: np {np}, degree {degree} among {} curves", g.len()));
    }
    Ok((ok, parts.join("; ")))
}

fn connectivity() -> Outcome {
    let s = data::figure5();
    let w = build_window(&s, 1).map_err(err)?;
    let g = CnpGraph::build(&w, &s, 24).map_err(err)?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut pairs, mut failures, mut max_len, mut max_i) = (0, Vec::new(), 0, 0);
    while pairs < 120 {
        let (i, j) = (rng.gen_range(0..g.len()), rng.gen_range(0..g.len()));
        if i == j {
            continue;
        }
        pairs += 1;
        let (a, b) = (&g.curves[i], &g.curves[j]);
        match surgery_path(a, b, &w, &s) {
            Ok(p) => {
                let oracle = g.with_extra(&w, &p.vertices);
                let d = oracle.bfs(oracle.index_of(a).unwrap())[oracle.index_of(b).unwrap()];
                max_len = max_len.max(p.length());
                max_i = max_i.max(p.intersection);
                if p.length() > 2 * p.intersection + 2 || p.length() < d {
                    failures.push(format!("{i}-{j}: length {} i {} bfs {d}", p.length(), p.intersection));
                }
            }
            Err(e) => failures.push(format!("{i}-{j}: {e}")),
        }
    }
    Ok((
        failures.is_empty(),
        format!("{pairs} pairs at level 1 among {} curves, longest path {max_len}, largest i {max_i}, failures {failures:?}", g.len()),
    ))
}

fn twist_translation() -> Outcome {
    let m = model();
    let amb = &m.amb;
    let mu = amb.marking().map_err(err)?;
    let b = m.calibration.b as i64;
    let mut worst = 0i64;
    let mut failures = 0;
    for a in &m.family {
        let axis = amb.lift(a).map_err(err)?;
        for n in -50i64..=50 {
            let img = amb.apply_all(&Word::twist_power(a, n), &mu).map_err(err)?;
            let dev = (annular_twist(amb.top(), &mu, &img, &axis) as i64 - n.abs()).abs();
            worst = worst.max(dev);
            failures += usize::from(dev > b);
        }
    }
    Ok((failures == 0, format!("{} axes, |n| <= 50, B = {b} (fitted on |n| <= {}), worst deviation {worst}", m.family.len(), m.calibration.n_range)))
}

fn sandwich() -> Outcome {
    let amb = Ambient::new(&data::figure5(), 4, 1).map_err(err)?;
    let fam = disjoint_np_family(&amb, 4).map_err(err)?;
    let cal = calibrate(&amb, &fam, 10).map_err(err)?;
    let r = zk_certificate(&amb, &fam, 5, cal.b).map_err(err)?;
    Ok((
        r.holds(),
        format!(
            "{} points, M = {}, B = {}, upper failures {}, lower failures {}, min lower slack {:.3}",
            r.points, r.m, r.b, r.upper_failures, r.lower_failures, r.min_lower_slack
        ),
    ))
}

fn detours() -> Outcome {
    let m = model();
    let (table, certs) = divergence_experiment(m, &[10, 20, 40, 80], 10, 7).map_err(err)?;
    let invalid: Vec<&Vec<String>> = certs.iter().filter(|c| !c.is_valid()).map(|c| &c.violations).collect();
    let slope = table.slope.unwrap_or(f64::INFINITY);
    let means: Vec<String> = table.rows.iter().map(|r| format!("R={}: {:.0}", r.r, r.mean_length)).collect();
    Ok((
        invalid.is_empty() && slope <= 2.2,
        format!("{} certificates, {} invalid {:?}, mean lengths [{}], slope {slope:.3}", certs.len(), invalid.len(), invalid.first(), means.join(", ")),
    ))
}

fn arc_diameters() -> Outcome {
    let amb = Ambient::new(&data::figure5(), 0, 3).map_err(err)?;
    let arcs = random_grand_arcs(&amb, 24, 20, 3, 11).map_err(err)?;
    let mut bad = Vec::new();
    let mut choices = usize::MAX;
    let mut worst = 0;
    for a in &arcs {
        let d = arc_diameter(&amb, a, &[]).map_err(err)?;
        choices = choices.min(d.choices);
        match d.diameter {
            Some(x) if d.all_nonperipheral && x <= 2 => worst = worst.max(x),
            _ => bad.push(format!("{:?}", a.enclosing.word)),
        }
    }
    Ok((
        arcs.len() >= 20 && choices >= 3 && bad.is_empty(),
        format!("{} arcs, at least {choices} neighbourhood choices each, largest diameter {worst}, failures {bad:?}", arcs.len()),
    ))
}

fn hybrid_density() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, s) in data::all() {
        if maximal_type_count(&s) < 3 {
            continue;
        }
        let w = build_window(&s, 1).map_err(err)?;
        let h = build_hybrid(&s, &w, 24, Variant::Y).map_err(err)?;
        let nc = h.curves.len();
        let lonely = (0..h.arcs.len()).filter(|&k| h.arc_curve[k].is_empty()).count();
        let mut pairs = 0;
        let mut missing = Vec::new();
        for i in 0..nc {
            for &j in h.adj[i].iter().filter(|&&j| j < nc && i < j) {
                pairs += 1;
                if !h.arc_curve.iter().any(|l| l.contains(&i) && l.contains(&j)) {
                    missing.push((i, j));
                }
            }
        }
        ok &= lonely == 0 && missing.is_empty();
        let example = missing.first().map(|&(i, j)| format!(", e.g. {:?} / {:?}", h.curves[i].word, h.curves[j].word)).unwrap_or_default();
        parts.push(format!(
            "{name}: {} arcs, {lonely} without a curve neighbour; {pairs} disjoint curve pairs, {} without a common arc{example}",
            h.arcs.len(),
            missing.len()
        ));
    }
    Ok((ok, parts.join("; ")))
}

fn delta_probe() -> Outcome {
    let s = data::figure5();
    let mut rows = Vec::new();
    let mut finite = true;
    for level in 1..=3 {
        let w = build_window(&s, level).map_err(err)?;
        let g = CnpGraph::build(&w, &s, 24).map_err(err)?;
        let ball = CnpBall::build(&g, 0, 4);
        let est = hyperbolicity_probe(&ball, 10_000, 17).map_err(err)?;
        finite &= est.delta.is_finite();
        rows.push((level as f64, est));
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.1.delta).collect();
    let trend = cnp_core::divergence::fit_slope(&xs, &ys).unwrap_or(0.0);
    let desc: Vec<String> = rows.iter().map(|(l, e)| format!("level {l}: delta {} on {} vertices (diameter {})", e.delta, e.vertices, e.diameter)).collect();
    Ok((finite, format!("{}; trend {trend:+.3} per level", desc.join(", "))))
}

fn length_axioms() -> Outcome {
    let m = model();
    let amb = &m.amb;
    let f = &m.functional;
    let letters: Vec<_> = alphabet_with_twists(amb, &m.family)
        .map_err(err)?
        .into_iter()
        .filter(|g| !f.skipped.iter().any(|k| k == g.kind_name()) && !matches!(g.kind, GenKind::ShiftAB(_) | GenKind::ShiftA(_)))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let word = |rng: &mut ChaCha8Rng| {
        let n = rng.gen_range(0..=6);
        Word::from_letters(
            (0..n)
                .map(|_| {
                    let g = letters[rng.gen_range(0..letters.len())].clone();
                    if rng.gen() {
                        g.inverse()
                    } else {
                        g
                    }
                })
                .collect(),
        )
    };
    let b = m.calibration.b as usize;
    let (mut asym, mut sub, mut worst) = (0, 0, i64::MIN);
    for _ in 0..1000 {
        let (u, v) = (word(&mut rng), word(&mut rng));
        let lu = f.eval(amb, &u).map_err(err)?.value;
        let lv = f.eval(amb, &v).map_err(err)?.value;
        asym += usize::from(lu != f.eval(amb, &u.inverse()).map_err(err)?.value);
        let luv = f.eval(amb, &u.concat(&v)).map_err(err)?.value;
        sub += usize::from(luv > lu + lv + 2 * b);
        worst = worst.max(luv as i64 - (lu + lv) as i64);
    }
    Ok((
        asym == 0 && sub == 0,
        format!("1000 pairs, {} letters, B = {b}: asymmetric {asym}, subadditivity failures {sub}, largest excess {worst}", letters.len()),
    ))
}

fn main() {
    let criteria: [(u32, &str, u64, fn() -> Outcome); 12] = [
        (1, "end complexity", 1, zeta),
        (2, "anchor counts", 1, anchor),
        (3, "smallness calculus", 60, smallness),
        (4, "figure-4 isolation", 300, isolation),
        (5, "surgery connectivity", 600, connectivity),
        (6, "twist translation", 60, twist_translation),
        (7, "Z^k sandwich", 600, sandwich),
        (8, "detour certificates", 1800, detours),
        (9, "grand-arc diameter", 300, arc_diameters),
        (10, "hybrid density", 300, hybrid_density),
        (11, "hyperbolicity probe", 900, delta_probe),
        (12, "length-function axioms", 300, length_axioms),
    ];
    let wanted: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = Vec::new();
    for (id, name, limit, run) in criteria {
        if !wanted.is_empty() && !wanted.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let outcome = run();
        let took = start.elapsed();
        let (pass, detail) = match outcome {
            Ok((ok, d)) => (ok && took <= Duration::from_secs(limit), d),
            Err(e) => (false, format!("error: {e}")),
        };
        println!(
            "criterion {id:>2} {}  {name} ({:.1}s, limit {limit}s): {detail}",
            if pass { "PASS" } else { "FAIL" },
            took.as_secs_f64()
        );
        if !pass {
            failed.push(id);
        }
    }
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
