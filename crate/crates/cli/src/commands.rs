//! One function per subcommand. Each returns a JSON report and a short human summary;
//! artifacts named by flags are written as a side effect.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde_json::{json, Value};

use cnp_core::curves::{end_partition, intersection_number, Curve};
use cnp_core::divergence::{divergence_experiment, DivergenceModel};
use cnp_core::end_calculus::{anchor_decomposition, is_small, maximal_orbits, shift_orbit_decomposition, zeta_surface, ClopenProfile, EndSpace};
use cnp_core::grand_arcs::{build_hybrid, Variant};
use cnp_core::group_words::{calibrate, disjoint_np_family, norm_lower, relative_twist, zk_certificate, Ambient, Word};
use cnp_core::peripherality_cnp::{hyperbolicity_probe, is_nonperipheral, surgery_path, CnpBall, CnpGraph};
use cnp_core::projections::{annular_twist, Marking};
use cnp_core::windows::{build_window, CombWindow, DEFAULT_TRUNCATION};
use cnp_core::CnpError;

use crate::config::RunConfig;
use crate::{BadInput, Cli, Command, GraphOpts};

pub struct Report {
    pub summary: String,
    pub json: Value,
}

impl Report {
    fn new(summary: impl Into<String>, json: Value) -> Report {
        let mut summary = summary.into();
        if !summary.ends_with('\n') {
            summary.push('\n');
        }
        Report { summary, json }
    }
}

pub fn run(cli: &Cli) -> Result<Report> {
    let cfg = RunConfig::resolve(cli.config.as_deref())?;
    let ctx = Ctx { cfg, space_flag: cli.space.clone() };
    match &cli.command {
        Command::Zeta { space } => zeta(&read_space(space)?),
        Command::Anchor { space } => anchor(&read_space(space)?),
        Command::Small { space, profile } => small(&read_space(space)?, profile),
        Command::Window { space, level, out } => window(&ctx, &read_space(space)?, level.unwrap_or(ctx.cfg.level), out.as_deref()),
        Command::Isect { a, b } => isect(&ctx, a, b),
        Command::Partition { curve } => partition(&ctx, curve),
        Command::CnpBall { opts, center, radius, dot, out } => cnp_ball(&ctx, opts, center.as_deref(), *radius, dot.as_deref(), out.as_deref()),
        Command::CnpPath { a, b, opts, dot, out } => cnp_path(&ctx, a, b, opts, dot.as_deref(), out.as_deref()),
        Command::ProbeDelta { opts, radius, samples } => probe_delta(&ctx, opts, *radius, *samples),
        Command::Twist { axis, x, y } => twist(&ctx, axis, x, y),
        Command::Norm { word, witnesses, base, headroom } => norm(&ctx, word, witnesses, *base, *headroom),
        Command::RankCert { k, box_size, range } => rank_cert(&ctx, *k, *box_size, *range),
        Command::Hybrid { variant, opts, dot } => hybrid(&ctx, variant, opts, dot.as_deref()),
        Command::Divergence { scales, trials, seed, out, certs } => divergence(&ctx, scales, *trials, seed.unwrap_or(ctx.cfg.seeds.sample), out.as_deref(), certs.as_deref()),
        Command::Calibrate { out } => calibrate_cmd(&ctx, out.as_deref()),
    }
}

struct Ctx {
    cfg: RunConfig,
    space_flag: Option<PathBuf>,
}

impl Ctx {
    /// The `--space` flag, else the configured space.
    fn space(&self) -> Result<EndSpace> {
        let path = self
            .space_flag
            .as_ref()
            .or(self.cfg.space.as_ref())
            .ok_or_else(|| BadInput("no end space given (use --space or a config)".into()))?;
        read_space(path)
    }

    fn write(&self, path: &Path, content: &str) -> Result<PathBuf> {
        let target = self.cfg.artifact_path(path);
        if let Some(dir) = target.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        }
        std::fs::write(&target, content).with_context(|| format!("writing {}", target.display()))?;
        Ok(target)
    }

    fn graph(&self, space: &EndSpace, opts: &GraphOpts) -> Result<(CombWindow, CnpGraph)> {
        let w = build_window(space, opts.level.unwrap_or(self.cfg.level))?;
        let graph = CnpGraph::build(&w, space, opts.cap.unwrap_or(self.cfg.caps.complexity))?;
        Ok((w, graph))
    }
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| BadInput(format!("reading {}: {e}", path.display())).into())
}

fn read_space(path: &Path) -> Result<EndSpace> {
    Ok(EndSpace::from_json(&read_text(path)?).with_context(|| format!("end space {}", path.display()))?)
}

fn parse_json(text: &str, path: &Path) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| BadInput(format!("{}: {e}", path.display())).into())
}

/// Window at the level recorded in a JSON object with a `level` field.
fn window_for(space: &EndSpace, v: &Value, path: &Path) -> Result<CombWindow> {
    let level = v
        .get("level")
        .and_then(Value::as_u64)
        .ok_or_else(|| BadInput(format!("{}: missing integer level", path.display())))?;
    Ok(build_window(space, level as usize)?)
}

fn read_curve(space: &EndSpace, path: &Path) -> Result<(CombWindow, Curve)> {
    let text = read_text(path)?;
    let w = window_for(space, &parse_json(&text, path)?, path)?;
    let c = Curve::from_json(&text, &w).with_context(|| format!("curve {}", path.display()))?;
    Ok((w, c))
}

fn zeta(space: &EndSpace) -> Result<Report> {
    let z = zeta_surface(space);
    let maximal = maximal_orbits(space)?;
    Ok(Report::new(z.to_string(), json!({ "zeta": z, "maximal_orbits": maximal })))
}

fn anchor(space: &EndSpace) -> Result<Report> {
    let d = anchor_decomposition(space);
    let tracks = shift_orbit_decomposition(space, &d, DEFAULT_TRUNCATION);
    let mut s = format!("{} boundary components\n", d.boundary_count);
    for b in d.blocks() {
        writeln!(s, "  {} ({:?}, orbit {})", b.name, b.kind, b.orbit)?;
    }
    writeln!(s, "{} shift tracks", tracks.len())?;
    Ok(Report::new(s, json!({ "decomposition": d, "tracks": tracks })))
}

fn small(space: &EndSpace, profile: &Path) -> Result<Report> {
    let p: ClopenProfile = serde_json::from_str(&read_text(profile)?).map_err(|e| BadInput(format!("{}: {e}", profile.display())))?;
    p.validate(space)?;
    let v = is_small(&p, space)?;
    let word = if v.small { "small" } else { "not small" };
    Ok(Report::new(format!("{word}: {}", v.reason), json!(v)))
}

fn window(ctx: &Ctx, space: &EndSpace, level: usize, out: Option<&Path>) -> Result<Report> {
    let w = build_window(space, level)?;
    let problems = w.validate();
    if !problems.is_empty() {
        return Err(BadInput(format!("window fails validation: {}", problems.join("; "))).into());
    }
    let mut s = format!("level {level}: {} boundary labels, genus {}, {} tracks\n", w.n_labels(), w.genus, w.tracks.len());
    if let Some(out) = out {
        let target = ctx.write(out, &w.to_json())?;
        writeln!(s, "wrote {}", target.display())?;
    }
    Ok(Report::new(s, serde_json::to_value(&w)?))
}

fn isect(ctx: &Ctx, a: &Path, b: &Path) -> Result<Report> {
    let space = ctx.space()?;
    let (w, ca) = read_curve(&space, a)?;
    let (_, cb) = read_curve(&space, b)?;
    let i = intersection_number(&w, &ca, &cb)?;
    Ok(Report::new(i.to_string(), json!({ "level": w.level, "intersection": i })))
}

fn partition(ctx: &Ctx, path: &Path) -> Result<Report> {
    let space = ctx.space()?;
    let (w, c) = read_curve(&space, path)?;
    let p = end_partition(&c, &w, &space)?;
    let np = is_nonperipheral(&c, &w, &space)?;
    let s = format!(
        "side one: labels {:?}, genus {:?}\nside two: labels {:?}, genus {:?}\nnon-peripheral: {} ({})\n",
        p.labels_one, p.genus_split.0, p.labels_two, p.genus_split.1, np.nonperipheral, np.certificate
    );
    Ok(Report::new(s, json!({ "partition": p, "nonperipheral": np })))
}

fn cnp_ball(ctx: &Ctx, opts: &GraphOpts, center: Option<&Path>, radius: Option<usize>, dot: Option<&Path>, out: Option<&Path>) -> Result<Report> {
    let space = ctx.space()?;
    let (w, graph) = ctx.graph(&space, opts)?;
    if graph.is_empty() {
        return Err(CnpError::HypothesisViolation("no non-peripheral curve within the cap".into()).into());
    }
    let c = match center {
        Some(p) => {
            let text = read_text(p)?;
            let c = Curve::from_json(&text, &w)?;
            graph.index_of(&c).ok_or_else(|| CnpError::CapExceeded("center is not enumerated at this cap".into()))?
        }
        None => 0,
    };
    let ball = CnpBall::build(&graph, c, radius.unwrap_or(ctx.cfg.caps.radius));
    let mut s = format!("ball of radius {} at {:?}: {} vertices, {} edges\n", ball.radius, ball.center.word, ball.vertices.len(), ball.edges.len());
    if let Some(p) = dot {
        writeln!(s, "wrote {}", ctx.write(p, &ball.to_dot())?.display())?;
    }
    let value = serde_json::to_value(&ball)?;
    if let Some(p) = out {
        writeln!(s, "wrote {}", ctx.write(p, &serde_json::to_string_pretty(&value)?)?.display())?;
    }
    Ok(Report::new(s, value))
}

fn path_dot(w: &CombWindow, vertices: &[Curve]) -> String {
    let mut s = String::from("graph path {\n");
    for (i, c) in vertices.iter().enumerate() {
        s.push_str(&format!("  {i} [label=\"{:?}\"];\n", c.crossing_word(w)));
    }
    for i in 1..vertices.len() {
        s.push_str(&format!("  {} -- {i};\n", i - 1));
    }
    s.push_str("}\n");
    s
}

fn cnp_path(ctx: &Ctx, a: &Path, b: &Path, opts: &GraphOpts, dot: Option<&Path>, out: Option<&Path>) -> Result<Report> {
    let space = ctx.space()?;
    let (w, ca) = read_curve(&space, a)?;
    let (_, cb) = read_curve(&space, b)?;
    let path = surgery_path(&ca, &cb, &w, &space)?;
    let mut s = format!("path of length {} (i = {}, bound {})\n", path.length(), path.intersection, path.bound);
    for c in &path.vertices {
        writeln!(s, "  {:?}", c.crossing_word(&w))?;
    }
    let mut value = json!({ "length": path.length(), "path": path });
    // The graph distance is only reported when the caller asks for a cap.
    if let Some(cap) = opts.cap {
        let graph = CnpGraph::build(&w, &space, cap)?;
        let d = match (graph.index_of(&ca), graph.index_of(&cb)) {
            (Some(i), Some(j)) => graph.bfs(i)[j],
            _ => return Err(CnpError::CapExceeded("endpoint not enumerated at this cap".into()).into()),
        };
        let d = (d != usize::MAX).then_some(d);
        writeln!(s, "graph distance at cap {cap}: {}", d.map_or("unreachable".to_string(), |d| d.to_string()))?;
        value["graph_distance"] = json!(d);
    }
    if let Some(p) = dot {
        writeln!(s, "wrote {}", ctx.write(p, &path_dot(&w, &path.vertices))?.display())?;
    }
    if let Some(p) = out {
        writeln!(s, "wrote {}", ctx.write(p, &serde_json::to_string_pretty(&value)?)?.display())?;
    }
    Ok(Report::new(s, value))
}

fn probe_delta(ctx: &Ctx, opts: &GraphOpts, radius: Option<usize>, samples: Option<usize>) -> Result<Report> {
    let space = ctx.space()?;
    let (_, graph) = ctx.graph(&space, opts)?;
    if graph.is_empty() {
        return Err(CnpError::HypothesisViolation("no non-peripheral curve within the cap".into()).into());
    }
    let ball = CnpBall::build(&graph, 0, radius.unwrap_or(ctx.cfg.caps.radius));
    let est = hyperbolicity_probe(&ball, samples.unwrap_or(ctx.cfg.caps.samples), opts.seed.unwrap_or(ctx.cfg.seeds.sample))?;
    let s = format!("delta >= {} over {} samples ({} vertices, diameter {})", est.delta, est.samples, est.vertices, est.diameter);
    Ok(Report::new(s, json!({ "level": graph.level, "cap": graph.cap, "radius": ball.radius, "estimate": est })))
}

/// A marking file, or a plain curve file read as a one-curve set.
fn read_curve_set(space: &EndSpace, path: &Path) -> Result<(CombWindow, Vec<Curve>)> {
    let text = read_text(path)?;
    let v = parse_json(&text, path)?;
    let w = window_for(space, &v, path)?;
    let curves = if v.get("curves").is_some() {
        Marking::from_json(&text, &w).with_context(|| format!("marking {}", path.display()))?.curves()
    } else {
        vec![Curve::from_json(&text, &w).with_context(|| format!("curve {}", path.display()))?]
    };
    Ok((w, curves))
}

fn twist(ctx: &Ctx, axis: &Path, x: &Path, y: &Path) -> Result<Report> {
    let space = ctx.space()?;
    let (w, a) = read_curve(&space, axis)?;
    let (wx, xs) = read_curve_set(&space, x)?;
    let (wy, ys) = read_curve_set(&space, y)?;
    for other in [wx.level, wy.level] {
        if other != w.level {
            return Err(CnpError::LevelMismatch(other, w.level).into());
        }
    }
    let tw = annular_twist(&w, &xs, &ys, &a);
    let rel = relative_twist(&w, &xs, &ys, &a);
    Ok(Report::new(format!("twist {tw} (relative {rel})"), json!({ "twist": tw, "relative": rel })))
}

fn norm(ctx: &Ctx, word: &Path, witnesses: &Path, base: usize, headroom: usize) -> Result<Report> {
    let space = ctx.space()?;
    let amb = Ambient::new(&space, base, headroom)?;
    let word = Word::from_json(&read_text(word)?, &amb).with_context(|| format!("word {}", word.display()))?;
    let list = parse_json(&read_text(witnesses)?, witnesses)?;
    let items = list.as_array().ok_or_else(|| BadInput(format!("{}: expected a JSON array of curves", witnesses.display())))?;
    let mut axes = Vec::new();
    for item in items {
        let w = window_for(&space, item, witnesses)?;
        if w.level > amb.level() {
            return Err(CnpError::LevelMismatch(w.level, amb.level()).into());
        }
        axes.push(Curve::from_json(&item.to_string(), &amb.chain[w.level])?);
    }
    let b = norm_lower(&amb, &word, &axes)?;
    Ok(Report::new(format!("{:.3} <= |w| <= {}", b.lower, b.upper), json!(b)))
}

fn rank_cert(ctx: &Ctx, k: usize, box_size: i64, range: i64) -> Result<Report> {
    if k == 0 || box_size < 0 {
        return Err(BadInput("k must be positive and the box non-negative".into()).into());
    }
    let space = ctx.space()?;
    let amb = Ambient::new(&space, k, 1)?;
    let family = disjoint_np_family(&amb, k)?;
    let cal = calibrate(&amb, &family, range)?;
    let rep = zk_certificate(&amb, &family, box_size, cal.b)?;
    let verdict = if rep.holds() { "holds" } else { "fails" };
    let s = format!(
        "Z^{k} certificate {verdict} on [-{box_size},{box_size}]^{k}: {} points, M = {}, B = {}, upper failures {}, lower failures {}",
        rep.points, rep.m, rep.b, rep.upper_failures, rep.lower_failures
    );
    let family: Vec<Value> = family.iter().map(|c| parse_json(&c.to_json(&amb.chain[c.level]), Path::new("family"))).collect::<Result<_>>()?;
    Ok(Report::new(s, json!({ "holds": rep.holds(), "report": rep, "calibration": cal, "family": family })))
}

fn hybrid(ctx: &Ctx, variant: &str, opts: &GraphOpts, dot: Option<&Path>) -> Result<Report> {
    let variant: Variant = variant.parse()?;
    let space = ctx.space()?;
    let w = build_window(&space, opts.level.unwrap_or(ctx.cfg.level))?;
    let h = build_hybrid(&space, &w, opts.cap.unwrap_or(ctx.cfg.caps.complexity), variant)?;
    let mut s = format!(
        "{variant:?} at level {} cap {}: {} curve vertices, {} arc vertices, {} vertices, {} edges ({} electrified)\n",
        h.level,
        h.cap,
        h.curves.len(),
        h.arcs.len(),
        h.len(),
        h.edge_count(),
        h.electrified_edges
    );
    if let Some(p) = dot {
        writeln!(s, "wrote {}", ctx.write(p, &h.to_dot(&w))?.display())?;
    }
    let value = json!({
        "variant": variant,
        "level": h.level,
        "cap": h.cap,
        "curve_vertices": h.curves.len(),
        "curve_pool": h.curve_pool.len(),
        "arc_vertices": h.arcs.len(),
        "vertices": h.len(),
        "edges": h.edge_count(),
        "electrified_edges": h.electrified_edges,
    });
    Ok(Report::new(s, value))
}

fn model(ctx: &Ctx, space: &EndSpace) -> Result<DivergenceModel> {
    let mut m = DivergenceModel::new(space)?;
    if let Some(k) = &ctx.cfg.constants {
        m.constants = k.clone();
    }
    Ok(m)
}

fn divergence(ctx: &Ctx, scales: &[u64], trials: usize, seed: u64, out: Option<&Path>, certs: Option<&Path>) -> Result<Report> {
    if scales.is_empty() || scales.contains(&0) || trials == 0 {
        return Err(BadInput("scales and trials must be positive".into()).into());
    }
    let space = ctx.space()?;
    let m = model(ctx, &space)?;
    let (table, certificates) = divergence_experiment(&m, scales, trials, seed)?;
    let csv = table.to_csv();
    let mut s = csv.clone();
    let slope = table.slope.map_or("n/a".to_string(), |x| format!("{x:.3}"));
    writeln!(s, "slope {slope}")?;
    if let Some(p) = out {
        writeln!(s, "wrote {}", ctx.write(p, &csv)?.display())?;
    }
    if let Some(p) = certs {
        let dump = json!({ "constants": m.constants, "calibration": m.calibration, "certificates": certificates });
        writeln!(s, "wrote {}", ctx.write(p, &serde_json::to_string_pretty(&dump)?)?.display())?;
    }
    Ok(Report::new(s, json!(table)))
}

fn calibrate_cmd(ctx: &Ctx, out: Option<&Path>) -> Result<Report> {
    let space = ctx.space()?;
    let m = DivergenceModel::new(&space)?;
    let mut cfg = ctx.cfg.clone();
    // Absolute, so the written config does not depend on where it is stored.
    cfg.space = match ctx.space_flag.clone().or(cfg.space) {
        Some(p) => Some(std::path::absolute(&p).with_context(|| format!("resolving {}", p.display()))?),
        None => None,
    };
    cfg.constants = Some(m.constants.clone());
    cfg.validate()?;
    let k = &m.constants;
    let mut s = format!("M = {}, B = {}, q = {}, Q = {}, eta = {}, K_tw = {}, T0 = {}, M0 = {}\n", k.m, k.b, k.q, k.big_q, k.eta, k.k_tw, k.t0, k.m0);
    if let Some(p) = out {
        writeln!(s, "wrote {}", ctx.write(p, &cfg.to_json())?.display())?;
    }
    Ok(Report::new(s, json!({ "constants": m.constants, "calibration": m.calibration })))
}
