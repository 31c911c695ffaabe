use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use serde::Serialize;
use wrn_core::capacity::{self, FibreParams};
use wrn_core::config::{OutputFormat, RunConfig};
use wrn_core::flow::{self, CapacitySource, FlowProblem, VerifySettings};
use wrn_core::lattice::{self, LatticeFamily, LatticeSpec};
use wrn_core::netgraph::{self, NodeSelection};
use wrn_core::satcomp::{self, AdvantageCurve, CurveAxis, Ground, SatLabel};
use wrn_core::{Error, Network, NodeId, UserPair};

use crate::output::{self, Provenance, Source};
use crate::{CapacityArg, Cli, Command};

/// Usage and input problems exit 2, everything else 1.
pub fn exit_code_for(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(
            Error::InvalidArgument(_)
            | Error::Malformed(_)
            | Error::Config(_)
            | Error::NoDeepPair { .. }
            | Error::UnknownNode(_)
            | Error::Adjacent(..)
            | Error::MissingCapacity(_)
            | Error::InfiniteCapacity,
        ) => 2,
        _ => 1,
    }
}

struct Ctx {
    cfg: RunConfig,
    config_path: Option<PathBuf>,
    seed: Option<u64>,
}

impl Ctx {
    fn provenance(&self, command: &'static str) -> Provenance {
        let mut p = Provenance::new(command, self.config_path.as_deref());
        let src = if self.cfg.fibre == FibreParams::default() { Source::Default } else { Source::Config };
        p.set("fibre", self.cfg.fibre, src);
        p
    }

    /// Seed with its origin: flag, then config, then `fallback`.
    fn seed(&self, fallback: u64) -> (u64, Source) {
        match (self.seed, self.cfg.seed) {
            (Some(s), _) => (s, Source::Flag),
            (None, Some(s)) => (s, Source::Config),
            _ => (fallback, Source::Default),
        }
    }

    fn out<'a>(&'a self, flag: &'a Option<PathBuf>) -> Option<&'a Path> {
        flag.as_deref().or(self.cfg.output.as_deref())
    }

    fn format(&self, flag: Option<crate::FormatArg>) -> OutputFormat {
        flag.map(OutputFormat::from).or(self.cfg.format).unwrap_or(OutputFormat::Csv)
    }
}

pub fn run(cli: Cli) -> Result<ExitCode> {
    if let Some(j) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(j as usize)
            .build_global()
            .context("starting worker pool")?;
    }
    let cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    cfg.validate()?;
    let ctx = Ctx {
        cfg,
        config_path: cli.config.clone(),
        seed: cli.seed,
    };
    match cli.command {
        Command::Build {
            family,
            rings,
            edge_scale,
            out,
        } => build(&ctx, family.into(), rings as usize, edge_scale, &out.out),
        Command::Analyze {
            graph,
            users,
            family,
            capacity,
            out,
        } => analyze(&ctx, &graph, users, family.map(Into::into), capacity, &out.out),
        Command::Verify {
            family,
            rings,
            target,
            mode,
            trials,
            lengths,
            stretch,
            counterexample,
            out,
        } => {
            let mut s = VerifySettings::new(family.into(), rings as usize, target, mode.into());
            s.trials = trials as usize;
            s.lengths = lengths.into();
            s.stretch = stretch;
            verify(&ctx, s, counterexample, &out.out)
        }
        Command::SweepFig2 {
            lo,
            hi,
            samples,
            format,
            out,
        } => sweep_fig2(&ctx, lo, hi, samples, ctx.format(format), &out.out),
        Command::SweepFig3 {
            preset,
            d_range,
            rho_range,
            samples,
            format,
            out,
        } => sweep_fig3(
            &ctx,
            preset.into(),
            (d_range[0], d_range[1]),
            (rho_range[0], rho_range[1]),
            samples,
            ctx.format(format),
            &out.out,
        ),
        Command::Calibrate { preset, d_star, out } => calibrate(&ctx, preset.into(), d_star, &out.out),
    }
}

fn build(ctx: &Ctx, family: LatticeFamily, rings: usize, edge_scale: f64, out: &Option<PathBuf>) -> Result<ExitCode> {
    let net = lattice::build(&LatticeSpec::new(family, rings, edge_scale)?)?;
    let mut text = net.to_json();
    text.push('\n');
    output::emit(ctx.out(out), &text)?;
    Ok(ExitCode::SUCCESS)
}

fn family_for_degree(k: usize) -> Option<LatticeFamily> {
    LatticeFamily::ALL.into_iter().find(|f| f.k() as usize == k)
}

#[derive(Serialize)]
struct Structure {
    /// Most common internal degree.
    k: Option<usize>,
    lambda_superset: Vec<String>,
    lambda_star: Option<String>,
    delta: Option<u32>,
    omega: Option<String>,
    omega_value: Option<f64>,
}

#[derive(Serialize)]
struct AnalyzeReport {
    nodes: usize,
    edges: usize,
    internal_nodes: usize,
    family: Option<LatticeFamily>,
    family_inferred: bool,
    /// Internal degree -> node count.
    k_spectrum: BTreeMap<usize, usize>,
    structure: Structure,
    users: [usize; 2],
    users_adjacent: bool,
    capacity_source: &'static str,
    min_neighbourhood_capacity: f64,
    weaker_user: usize,
    flooding_capacity: f64,
    cut_set: Vec<usize>,
    source_side: Vec<usize>,
    menger_cardinality: Option<usize>,
}

fn structure(net: &Network, k: Option<usize>) -> Result<Structure> {
    let superset = if net.internal_nodes().next().is_some() {
        net.commonality_superset(&NodeSelection::Internal)?
    } else {
        Default::default()
    };
    let mut s = Structure {
        k,
        lambda_superset: superset.iter().map(|m| m.to_string()).collect(),
        lambda_star: None,
        delta: None,
        omega: None,
        omega_value: None,
    };
    if let Some(k) = k {
        let regular: std::collections::BTreeSet<_> = superset.into_iter().filter(|m| m.len() == k).collect();
        if let Ok(star) = netgraph::min_commonality_multiset(&regular, k as u32) {
            let delta = netgraph::delta(k as u32, &star)?;
            if let Ok(w) = netgraph::omega(k as u32, delta) {
                s.omega = Some(w.to_string());
                s.omega_value = Some(*w.numer() as f64 / *w.denom() as f64);
            }
            s.lambda_star = Some(star.to_string());
            s.delta = Some(delta);
        }
    }
    Ok(s)
}

fn analyze(
    ctx: &Ctx,
    graph: &Path,
    users: Option<(usize, usize)>,
    family: Option<LatticeFamily>,
    capacity: CapacityArg,
    out: &Option<PathBuf>,
) -> Result<ExitCode> {
    let text = fs::read_to_string(graph).with_context(|| format!("reading {}", graph.display()))?;
    let net = Network::from_json(&text)?;

    let mut spectrum = BTreeMap::new();
    for x in net.internal_nodes() {
        *spectrum.entry(net.degree(x)?).or_insert(0usize) += 1;
    }
    // ties go to the larger degree
    let k = spectrum.iter().max_by_key(|&(d, n)| (*n, *d)).map(|(&d, _)| d);
    let inferred = family.is_none();
    let family = family.or_else(|| k.and_then(family_for_degree));

    let users = match users {
        Some((a, b)) => UserPair::new(NodeId(a), NodeId(b))?,
        None => match family {
            Some(f) => lattice::select_deep_users(&net, f)?,
            None => {
                return Err(Error::InvalidArgument(
                    "cannot infer a lattice family; pass --users or --family".into(),
                )
                .into())
            }
        },
    };
    let (source, source_name) = match capacity {
        CapacityArg::Unit => (CapacitySource::Unit, "unit"),
        CapacityArg::Explicit => (CapacitySource::Explicit, "explicit"),
        CapacityArg::Plob => (CapacitySource::Plob(ctx.cfg.fibre), "plob"),
    };
    let prob = FlowProblem::new(&net, users, source)?;
    let (s, weaker) = flow::min_neighborhood_capacity(&prob)?;
    let cut = flow::flooding_capacity(&prob)?;
    let adjacent = net.are_adjacent(users.a, users.b);
    let menger = if adjacent { None } else { Some(flow::menger_cardinality(&net, users)?) };

    let report = AnalyzeReport {
        nodes: net.node_count(),
        edges: net.edge_count(),
        internal_nodes: spectrum.values().sum(),
        family,
        family_inferred: inferred && family.is_some(),
        k_spectrum: spectrum,
        structure: structure(&net, k)?,
        users: [users.a.0, users.b.0],
        users_adjacent: adjacent,
        capacity_source: source_name,
        min_neighbourhood_capacity: s,
        weaker_user: weaker.0,
        flooding_capacity: cut.value,
        cut_set: cut.cut_set,
        source_side: cut.source_side.iter().map(|x| x.0).collect(),
        menger_cardinality: menger,
    };
    let mut prov = ctx.provenance("analyze");
    prov.set("graph", graph.display().to_string(), Source::Flag);
    output::emit(ctx.out(out), &output::json_report(&prov, &report)?)?;
    Ok(ExitCode::SUCCESS)
}

fn verify(ctx: &Ctx, mut s: VerifySettings, counterexample: Option<PathBuf>, out: &Option<PathBuf>) -> Result<ExitCode> {
    let (seed, seed_src) = ctx.seed(s.seed);
    s.seed = seed;
    s.params = ctx.cfg.fibre;
    let rep = flow::verify_threshold_theorem(&s)?;

    let mut prov = ctx.provenance("verify");
    prov.set("seed", seed, seed_src);
    let out = ctx.out(out);
    output::emit(out, &output::json_report(&prov, &rep)?)?;

    if let Some(g) = &rep.counterexample {
        let path = counterexample.or_else(|| out.map(counterexample_path));
        if let Some(p) = path {
            let mut text = serde_json::to_string_pretty(g)?;
            text.push('\n');
            fs::write(&p, text).with_context(|| format!("writing {}", p.display()))?;
            eprintln!("counterexample written to {}", p.display());
        }
    }
    if rep.passed {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("verification failed: {} of {} trials", rep.failures, rep.trials);
        Ok(ExitCode::from(1))
    }
}

fn counterexample_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".counterexample.json");
    out.with_file_name(name)
}

fn log_space(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        bail!(Error::InvalidArgument(format!("need 0 < lo < hi, got [{lo}, {hi}]")));
    }
    if n < 2 {
        bail!(Error::InvalidArgument(format!("need at least 2 samples, got {n}")));
    }
    let (a, b) = (lo.log10(), hi.log10());
    Ok((0..n).map(|i| 10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64)).collect())
}

fn lin_space(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        bail!(Error::InvalidArgument(format!("need 0 < lo < hi, got [{lo}, {hi}]")));
    }
    if n < 2 {
        bail!(Error::InvalidArgument(format!("need at least 2 samples, got {n}")));
    }
    Ok((0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect())
}

#[derive(Serialize)]
struct Fig2Row {
    family: &'static str,
    c_target: f64,
    d_max_km: Option<f64>,
    rho_min: f64,
}

#[derive(Serialize)]
struct Rows<R> {
    rows: Vec<R>,
}

fn sweep_fig2(ctx: &Ctx, lo: f64, hi: f64, samples: usize, format: OutputFormat, out: &Option<PathBuf>) -> Result<ExitCode> {
    let p = ctx.cfg.fibre;
    let w = ctx.cfg.waxman;
    let cs = log_space(lo, hi, samples)?;
    let mut rows = Vec::new();
    for f in LatticeFamily::ALL {
        let chars = f.characteristics();
        for &c in &cs {
            rows.push(Fig2Row {
                family: f.name(),
                c_target: c,
                d_max_km: Some(capacity::max_link_length(c, chars.delta, &p)?),
                rho_min: capacity::min_nodal_density(c, chars.delta, chars.xi, &p)?,
            });
        }
    }
    // inverse of the random-graph regression line
    for &c in &cs {
        rows.push(Fig2Row {
            family: "waxman",
            c_target: c,
            d_max_km: None,
            rho_min: w.rho_crit + (c + 1.0) / w.zeta,
        });
    }
    let mut prov = ctx.provenance("sweep-fig2");
    let wsrc = if w == Default::default() { Source::Default } else { Source::Config };
    prov.set("waxman", w, wsrc);
    prov.set("c_range", [lo, hi], Source::Flag);
    prov.set("samples", samples, Source::Flag);
    let text = match format {
        OutputFormat::Csv => output::csv_report(&prov, &rows)?,
        OutputFormat::Json => output::json_report(&prov, &Rows { rows })?,
    };
    output::emit(ctx.out(out), &text)?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct Fig3Row {
    kind: &'static str,
    axis: &'static str,
    ground: &'static str,
    x: f64,
    delta_k_db: f64,
}

fn ground_name(g: Ground) -> &'static str {
    match g {
        Ground::Chain => "chain",
        Ground::Wrn { delta } => LatticeFamily::ALL
            .into_iter()
            .find(|f| f.characteristics().delta == delta)
            .map(|f| f.name())
            .unwrap_or("wrn"),
    }
}

fn sweep_fig3(
    ctx: &Ctx,
    label: SatLabel,
    d_range: (f64, f64),
    rho_range: (f64, f64),
    samples: usize,
    format: OutputFormat,
    out: &Option<PathBuf>,
) -> Result<ExitCode> {
    let p = ctx.cfg.fibre;
    let sat = ctx.cfg.sat_config(label)?;
    let ds = lin_space(d_range.0, d_range.1, samples)?;
    let rhos = log_space(rho_range.0, rho_range.1, samples)?;

    let mut curves: Vec<AdvantageCurve> = vec![satcomp::advantage_vs_separation(Ground::Chain, &sat, &p, &ds)?];
    for f in LatticeFamily::ALL {
        curves.push(satcomp::advantage_vs_separation(Ground::from(&f.characteristics()), &sat, &p, &ds)?);
    }
    for f in LatticeFamily::ALL {
        curves.push(satcomp::advantage_vs_density(&f.characteristics(), &sat, &p, &rhos)?);
    }

    let mut rows = Vec::new();
    let mut critical = Vec::new();
    for c in &curves {
        let axis = match c.axis {
            CurveAxis::DMax => "d_max",
            CurveAxis::Rho => "rho",
        };
        let ground = ground_name(c.ground);
        rows.extend(c.points.iter().map(|&(x, db)| Fig3Row {
            kind: "curve",
            axis,
            ground,
            x,
            delta_k_db: db,
        }));
        match c.critical {
            Some(x) => critical.push(Fig3Row {
                kind: "critical",
                axis,
                ground,
                x,
                delta_k_db: 0.0,
            }),
            None => eprintln!("{ground}: no break-even point on the {axis} axis"),
        }
    }
    rows.extend(critical);

    let mut prov = ctx.provenance("sweep-fig3");
    prov.set("preset", label, Source::Flag);
    let t_src = if ctx.cfg.satellite.transit_time_s.is_some() { Source::Config } else { Source::Derived };
    prov.set("transit_time_s", sat.transit_time_s, t_src);
    prov.set("orbital_rate", sat.orbital_rate, Source::Default);
    prov.set("d_range_km", [d_range.0, d_range.1], Source::Flag);
    prov.set("rho_range", [rho_range.0, rho_range.1], Source::Flag);
    prov.set("samples", samples, Source::Flag);
    let text = match format {
        OutputFormat::Csv => output::csv_report(&prov, &rows)?,
        OutputFormat::Json => output::json_report(&prov, &Rows { rows })?,
    };
    output::emit(ctx.out(out), &text)?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct Calibration {
    preset: SatLabel,
    d_star_km: f64,
    orbital_rate: f64,
    transit_time_s: f64,
}

fn calibrate(ctx: &Ctx, label: SatLabel, d_star: Option<f64>, out: &Option<PathBuf>) -> Result<ExitCode> {
    let (d, src) = match d_star {
        Some(d) => (d, Source::Flag),
        None if ctx.config_path.is_some() => (ctx.cfg.satellite.calibration_km, Source::Config),
        None => (ctx.cfg.satellite.calibration_km, Source::Default),
    };
    let sat = ctx.cfg.sat_config(label)?;
    let t = satcomp::calibrate_transit_time(&sat, d, &ctx.cfg.fibre)?;
    let mut prov = ctx.provenance("calibrate");
    prov.set("d_star_km", d, src);
    let body = Calibration {
        preset: label,
        d_star_km: d,
        orbital_rate: sat.orbital_rate,
        transit_time_s: t,
    };
    output::emit(ctx.out(out), &output::json_report(&prov, &body)?)?;
    Ok(ExitCode::SUCCESS)
}
