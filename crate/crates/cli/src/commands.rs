use std::fs;
use std::io::Write;

use rand::seq::SliceRandom;
use rand::Rng;
use serde_json::{json, Value};

use pathcol::analysis::{
    dobrushin_alpha, empirical_tv, evolve_distribution, mixing_time_exact, predicted_mixing_bound, CurveMode,
    Projection, TvCurve,
};
use pathcol::chains::ChainRunner;
use pathcol::coupling::{disagreement_profile_v1, disagreement_profile_vs, empirical_profile};
use pathcol::rng::{stream_rng, stream_seed};
use pathcol::segment::{enumerate_segment, StateClass};
use pathcol::suites::{run_suite, SuiteConfig};
use pathcol::{
    enumerate_state_space, exact_uniform_sample, make_params, Bipartition, Boundary, BoundarySpec, ChainKind,
    ChainParams, Colour, ColourGraph, Error, Overrides, PathState, Precision, Result, ScanOrder, SegmentLaw, VERSION,
};

use crate::{
    ChainArg, ChainArgs, ClassArg, CoupleArgs, EnumerateArgs, Format, GraphArgs, InspectArgs, MethodArg, MixArgs,
    OrderArg, OutputArgs, OverrideArgs, SampleArgs, VerifyArgs,
};

/// 1 for runtime failures, 2 for bad input or instances too large to run.
pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse { .. }
        | Error::EmptyGraph
        | Error::ColourIndex { .. }
        | Error::DisconnectedGraph { .. }
        | Error::UnknownBuiltin(_)
        | Error::InvalidParameter(_)
        | Error::CapExceeded { .. }
        | Error::PathTooShort { .. }
        | Error::InvalidOrder(_)
        | Error::Io(_)
        | Error::Json(_) => 2,
        _ => 1,
    }
}

fn load_graph(g: &GraphArgs) -> Result<ColourGraph> {
    resolve_graph(g.builtin.as_deref(), g.file.as_deref(), g.q)
}

fn resolve_graph(builtin: Option<&str>, file: Option<&std::path::Path>, q: Option<usize>) -> Result<ColourGraph> {
    match (builtin, file) {
        (Some(name), _) => ColourGraph::builtin(name, q),
        (None, Some(path)) => {
            let text = fs::read_to_string(path)
                .map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
            ColourGraph::load(&text)
        }
        (None, None) => Err(Error::InvalidParameter("one of --builtin or --file is required".into())),
    }
}

fn overrides(o: &OverrideArgs) -> Overrides {
    Overrides { l1: o.l1, s: o.s, beta: o.beta, gamma: o.gamma, u: o.u, w: o.w }
}

fn chain_kind(c: ChainArg) -> ChainKind {
    match c {
        ChainArg::Anyorder => ChainKind::AnyOrder,
        ChainArg::Fixedorder => ChainKind::FixedOrder,
        ChainArg::Rnd => ChainKind::Rnd,
    }
}

fn state_class(h: &ColourGraph, c: ClassArg) -> Result<StateClass> {
    let bipartite = h.colour_classes().is_bipartite();
    match c {
        ClassArg::Auto => Ok(StateClass::auto(h)),
        ClassArg::Omega1 if bipartite => Ok(StateClass::Omega1),
        ClassArg::Omega2 if bipartite => Ok(StateClass::Omega2),
        _ => Err(Error::InvalidParameter("parity classes need a bipartite graph".into())),
    }
}

fn chain_params(h: &ColourGraph, c: &ChainArgs) -> Result<ChainParams> {
    Ok(make_params(h, chain_kind(c.chain), &overrides(&c.overrides))?.with_class(state_class(h, c.class)?))
}

fn parse_colour(h: &ColourGraph, s: &str) -> Result<Colour> {
    let c: usize = s.trim().parse().map_err(|_| Error::InvalidParameter(format!("`{s}` is not a colour")))?;
    if c >= h.q() {
        return Err(Error::InvalidParameter(format!("colour {c} out of range for q = {}", h.q())));
    }
    Ok(c as Colour)
}

fn parse_boundary(h: &ColourGraph, s: &str) -> Result<Boundary> {
    if s.eq_ignore_ascii_case("free") {
        Ok(Boundary::Free)
    } else {
        parse_colour(h, s).map(Boundary::Colour)
    }
}

fn start_state(h: &ColourGraph, c: &ChainArgs, class: StateClass) -> Result<PathState> {
    match &c.init {
        Some(text) => {
            let colours = text.split(',').map(|t| parse_colour(h, t)).collect::<Result<Vec<_>>>()?;
            if colours.len() != c.n {
                return Err(Error::InvalidParameter(format!("--init has {} sites, --n is {}", colours.len(), c.n)));
            }
            let x = PathState::new(colours);
            if !x.respects_class(h, class) {
                return Err(Error::ClassMismatch);
            }
            Ok(x)
        }
        None => exact_uniform_sample(h, c.n, class, &mut stream_rng(c.seed, 0)),
    }
}

fn graph_meta(h: &ColourGraph) -> Value {
    json!({ "name": h.name(), "q": h.q(), "hash": h.hash() })
}

fn meta(h: &ColourGraph, params: Option<&ChainParams>, seed: Option<u64>) -> Value {
    json!({
        "tool": "pathcol",
        "version": VERSION,
        "graph": graph_meta(h),
        "params": params.map(|p| p.to_json()),
        "seed": seed,
    })
}

fn with_meta(meta: &Value, body: &str) -> String {
    format!("# {meta}\n{body}")
}

fn emit(out: &OutputArgs, text: &str) -> Result<()> {
    match &out.out {
        Some(path) => fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn merge(mut a: Value, b: Value) -> Value {
    if let (Value::Object(a), Value::Object(b)) = (&mut a, b) {
        a.extend(b);
    }
    a
}

fn to_json_text(v: &Value) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn colours_csv(c: &[Colour]) -> String {
    c.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

pub fn inspect(a: &InspectArgs) -> Result<u8> {
    let h = load_graph(&a.graph)?;
    let bip = h.colour_classes();
    let witness = h.two_path_witness();
    let mut chains = Vec::new();
    for kind in [ChainKind::AnyOrder, ChainKind::FixedOrder, ChainKind::Rnd] {
        chains.push(make_params(&h, kind, &Overrides::default())?.to_json());
    }
    let alpha = dobrushin_alpha(&h, chains[0]["l1"].as_u64().unwrap_or(1) as usize).ok();
    let report = json!({
        "graph": graph_meta(&h),
        "edges": h.edges(),
        "max_degree": h.max_degree(),
        "connected": true,
        "bipartition": bip,
        "two_path": witness.is_none(),
        "two_path_witness": witness,
        "dobrushin": alpha,
        "params": chains,
        "version": VERSION,
    });
    let text = match a.output.format.unwrap_or(Format::Text) {
        Format::Json => to_json_text(&report)?,
        _ => {
            let p = &chains[0];
            let mut t = format!("graph: {} (hash {})\n", h.name().unwrap_or("file"), h.hash());
            t += &format!("q: {}\nmax degree: {}\nconnected: yes\n", h.q(), h.max_degree());
            t += &match &bip {
                Bipartition::Bipartite { .. } => {
                    let (c1, c2) = bip.classes().unwrap_or_default();
                    format!("bipartite: yes, classes {c1:?} {c2:?}\n")
                }
                Bipartition::NonBipartite { witness } => format!("bipartite: no, odd closed walk {witness:?}\n"),
            };
            t += &match witness {
                None => "two-path: yes\n".to_string(),
                Some((a, b)) => format!("two-path: no, witness ({a},{b})\n"),
            };
            t += &format!(
                "l1={} s={} beta={} l2={} gamma={} u={} w={}\n",
                p["l1"],
                p["s"],
                unquote(&p["beta"]),
                unquote(&p["l2"]),
                unquote(&p["gamma"]),
                unquote(&p["u"]),
                unquote(&p["w"])
            );
            t
        }
    };
    emit(&a.output, &text)?;
    Ok(0)
}

fn unquote(v: &Value) -> String {
    v.as_str().map(str::to_string).unwrap_or_else(|| v.to_string())
}

pub fn sample(a: &SampleArgs) -> Result<u8> {
    let h = load_graph(&a.graph)?;
    let params = chain_params(&h, &a.chain)?;
    let schedule = params.schedule(a.chain.n)?;
    let is_rnd = params.kind == ChainKind::Rnd;
    let horizon = match (is_rnd, a.scans, a.steps) {
        (false, Some(t), None) | (true, None, Some(t)) => t,
        (false, None, None) | (true, None, None) => 1,
        (false, _, Some(_)) => return Err(Error::InvalidParameter("scan chains count --scans, not --steps".into())),
        (true, Some(_), _) => return Err(Error::InvalidParameter("the random-update chain counts --steps".into())),
    };
    if params.kind == ChainKind::FixedOrder && a.chain.order == OrderArg::Random {
        return Err(Error::InvalidOrder("the fixed-order chain scans in ascending order".into()));
    }
    let mut x = start_state(&h, &a.chain, params.class)?;
    let mut rows = vec![(0, x.colours.clone())];
    let mut rng = stream_rng(a.chain.seed, 1);
    let mut order: Vec<usize> = (0..schedule.len()).collect();
    let mut runner = ChainRunner::new(&h, &params, schedule);
    for t in 1..=horizon {
        if is_rnd {
            let k = rng.gen_range(0..order.len());
            runner.update(&mut x, k, &mut rng)?;
        } else {
            if a.chain.order == OrderArg::Random {
                order.shuffle(&mut rng);
            }
            for &k in &order {
                runner.update(&mut x, k, &mut rng)?;
            }
        }
        if (a.every > 0 && t % a.every == 0) || t == horizon {
            rows.push((t, x.colours.clone()));
        }
    }
    let m = meta(&h, Some(&params), Some(a.chain.seed));
    let text = match a.output.format.unwrap_or(Format::Csv) {
        Format::Json => to_json_text(&merge(
            m,
            json!({
                "unit": if is_rnd { "steps" } else { "scans" },
                "t": horizon,
                "valid": x.is_valid_colouring(&h),
                "trajectory": rows.iter().map(|(t, c)| json!({"t": t, "state": c})).collect::<Vec<_>>(),
                "final": x.colours,
            }),
        ))?,
        _ => {
            let header: Vec<String> = (1..=a.chain.n).map(|j| format!("site_{j}")).collect();
            let mut body = format!("t,{}\n", header.join(","));
            for (t, c) in &rows {
                body += &format!("{t},{}\n", colours_csv(c));
            }
            with_meta(&m, &body)
        }
    };
    emit(&a.output, &text)?;
    Ok(0)
}

fn parse_window(s: &str, n: usize) -> Result<Projection> {
    let bad = || Error::InvalidParameter(format!("window `{s}` should be LO:HI with 1 <= LO <= HI <= {n}"));
    let (lo, hi) = s.split_once(':').ok_or_else(bad)?;
    let lo: usize = lo.trim().parse().map_err(|_| bad())?;
    let hi: usize = hi.trim().parse().map_err(|_| bad())?;
    if lo == 0 || lo > hi || hi > n {
        return Err(bad());
    }
    Ok(Projection::Window { lo, hi })
}

pub fn mix(a: &MixArgs) -> Result<u8> {
    let h = load_graph(&a.graph)?;
    let params = chain_params(&h, &a.chain)?;
    let n = a.chain.n;
    let x = start_state(&h, &a.chain, params.class)?;
    let order = match (params.kind, a.chain.order) {
        (ChainKind::AnyOrder, OrderArg::Random) => ScanOrder::RandomPerScan,
        (_, OrderArg::Random) => {
            return Err(Error::InvalidOrder("only the any-order chain takes --order random".into()))
        }
        _ => ScanOrder::Ascending,
    };
    let curve = match a.method {
        MethodArg::Exact => evolve_distribution(&h, &params, n, &x, a.scans, &order, a.cap)?,
        MethodArg::Empirical => {
            if order != ScanOrder::Ascending {
                return Err(Error::InvalidOrder("the empirical method scans in ascending order".into()));
            }
            let projection = match &a.window {
                Some(w) => parse_window(w, n)?,
                None => Projection::Full,
            };
            let step = a.every.max(1);
            let mut points = Vec::new();
            let mut ci = Vec::new();
            for t in (step..=a.scans).step_by(step) {
                let e = empirical_tv(
                    &h,
                    &params,
                    &x,
                    t,
                    a.samples,
                    projection,
                    stream_seed(a.chain.seed, t as u64),
                    a.cap,
                )?;
                points.push((t, e.tv));
                ci.push(e.ci_half_width);
            }
            TvCurve { points, mode: CurveMode::Empirical { samples: a.samples, ci_half_width: ci } }
        }
    };
    let reached = mixing_time_exact(&curve, a.eps).ok();
    let predicted = predicted_mixing_bound(params.kind, &h, n, a.eps)?;
    let m = merge(
        meta(&h, Some(&params), Some(a.chain.seed)),
        json!({
            "n": n,
            "start": x.colours,
            "eps": a.eps,
            "mixing_time": reached,
            "predicted_bound": predicted,
        }),
    );
    let text = match a.output.format.unwrap_or(Format::Csv) {
        Format::Json => to_json_text(&merge(m, json!({ "curve": curve })))?,
        _ => with_meta(&m, &curve.to_csv()),
    };
    emit(&a.output, &text)?;
    Ok(0)
}

pub fn verify(a: &VerifyArgs) -> Result<u8> {
    let h = match (&a.builtin, &a.file) {
        (None, None) => ColourGraph::builtin("independent_set", None)?,
        (b, f) => resolve_graph(b.as_deref(), f.as_deref(), a.q)?,
    };
    let mut cfg = SuiteConfig::new(h.clone());
    cfg.n = a.n;
    cfg.eps = a.eps;
    cfg.overrides = overrides(&a.overrides);
    cfg.seed = a.seed;
    cfg.cap = a.cap;
    let report = run_suite(&a.suite, &cfg)?;
    let text = match a.output.format.unwrap_or(Format::Text) {
        Format::Json => to_json_text(&merge(meta(&h, None, Some(a.seed)), json!({ "report": report })))?,
        _ => format!("# pathcol {VERSION}, graph {} ({})\n{}", h.name().unwrap_or("file"), h.hash(), report.table()),
    };
    emit(&a.output, &text)?;
    Ok(report.status.exit_code() as u8)
}

pub fn enumerate(a: &EnumerateArgs) -> Result<u8> {
    let h = load_graph(&a.graph)?;
    let rows: Vec<Vec<Colour>> = if a.left.is_some() || a.right.is_some() {
        let left = parse_boundary(&h, a.left.as_deref().unwrap_or("free"))?;
        let right = parse_boundary(&h, a.right.as_deref().unwrap_or("free"))?;
        enumerate_segment(&h, a.n, &BoundarySpec::new(left, right), a.cap)?
    } else {
        let class = state_class(&h, a.class)?;
        enumerate_state_space(&h, a.n, class, a.cap)?.into_iter().map(|s| s.colours).collect()
    };
    let m = merge(meta(&h, None, None), json!({ "n": a.n, "count": rows.len() }));
    let text = match a.output.format.unwrap_or(Format::Csv) {
        Format::Json => to_json_text(&merge(m, json!({ "colourings": rows })))?,
        _ => {
            let mut body = String::new();
            for r in &rows {
                body += &colours_csv(r);
                body.push('\n');
            }
            with_meta(&m, &body)
        }
    };
    emit(&a.output, &text)?;
    Ok(0)
}

pub fn couple(a: &CoupleArgs) -> Result<u8> {
    let h = load_graph(&a.graph)?;
    let (c1, c2) = (parse_colour(&h, &a.c1.to_string())?, parse_colour(&h, &a.c2.to_string())?);
    let d = parse_boundary(&h, &a.d)?;
    if a.stride == 0 {
        return Err(Error::InvalidParameter("--stride must be positive".into()));
    }
    let profile = match a.samples {
        Some(samples) => {
            let law = SegmentLaw::build(&h, a.l, &BoundarySpec::new(Boundary::Free, d), Precision::Exact)?;
            empirical_profile(&law, c1, c2, a.stride, samples, &mut stream_rng(a.seed, 0))?
        }
        None if a.stride == 1 => disagreement_profile_v1(&h, a.l, c1, c2, d)?,
        None => disagreement_profile_vs(&h, a.l, c1, c2, d, a.stride)?,
    };
    let stride = a.stride;
    let bound = move |j: usize| -> f64 {
        if stride == 1 {
            let delta = h.max_degree() as f64;
            (1.0 - 1.0 / (delta * delta)).powi(j as i32)
        } else {
            (1.0 - (h.q() as f64).powi(-(stride as i32))).powi((j / stride) as i32)
        }
    };
    let m = merge(
        meta(&load_graph(&a.graph)?, None, a.samples.map(|_| a.seed)),
        json!({ "l": a.l, "c1": c1, "c2": c2, "d": a.d.to_lowercase(), "stride": a.stride, "provenance": profile.provenance }),
    );
    let text = match a.output.format.unwrap_or(Format::Csv) {
        Format::Json => {
            let rows: Vec<Value> = profile
                .p
                .iter()
                .enumerate()
                .map(|(i, &p)| json!({ "j": i + 1, "p": p, "bound": bound(i + 1) }))
                .collect();
            to_json_text(&merge(m, json!({ "profile": rows })))?
        }
        _ => with_meta(&m, &profile.to_csv(bound)),
    };
    emit(&a.output, &text)?;
    Ok(0)
}
