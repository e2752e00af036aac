use std::path::Path;

use ranksinr::approx::{chain_grid, compare_chain};
use ranksinr::closed_form::{analytic_model, db_grid, DEFAULT_GRID_STEP_DB};
use ranksinr::mixture::MixtureSpec;
use ranksinr::montecarlo::{empirical_outage, simulate, McOptions, RNG_ID};
use ranksinr::report::{Cell, Metadata, Table};
use ranksinr::scenario::{build_rate_set, ScenarioConfig};
use ranksinr::sweep::{total_inr_db, GainPoint, SweepGrid, SweepKind, SweepOutput, SweepSpec};
use ranksinr::validate::{validate_against_simulation, Verdict};
use ranksinr::wishart::compute_weights;
use ranksinr::{Error, Result};

use crate::{
    ApproxArgs, Command, Common, CurveArgs, DumpArgs, GainArgs, McArgs, SweepNArgs, ValidateArgs,
};

pub struct Output {
    pub meta: Metadata,
    pub table: Table,
    pub warnings: Vec<String>,
    pub failed: bool,
}

impl Output {
    fn new(meta: Metadata, table: Table) -> Self {
        Output {
            meta,
            table,
            warnings: Vec::new(),
            failed: false,
        }
    }
}

pub fn run(cmd: Command) -> (Common, Result<Output>) {
    match cmd {
        Command::Pdf(a) => (a.common.clone(), curve(&a, false)),
        Command::Outage(a) => (a.common.clone(), curve(&a, true)),
        Command::Gain(a) => (a.common.clone(), gain(&a)),
        Command::SweepSnr(a) => (a.common.clone(), sweep(&a, SweepKind::Snr)),
        Command::SweepInr(a) => (a.common.clone(), sweep(&a, SweepKind::Inr)),
        Command::SweepN(a) => (a.gain.common.clone(), sweep_n(&a)),
        Command::McValidate(a) => (a.common.clone(), mc_validate(&a)),
        Command::ApproxValidate(a) => (a.common.clone(), approx_validate(&a)),
        Command::DumpWeights(a) => (a.common.clone(), dump_weights(&a)),
        Command::DumpXi(c) => (c.clone(), dump_xi(&c)),
    }
}

fn load_config(common: &Common) -> Result<ScenarioConfig> {
    let mut cfg = match &common.config {
        Some(path) => read_config(path)?,
        None => ScenarioConfig::reference(ranksinr::scenario::OwnMode::Beamforming),
    };
    if let Some(mode) = common.mode {
        cfg.own_mode = mode.into();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn read_config(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    ScenarioConfig::from_json(&text)
}

/// Parses START:STOP:STEP (dB).
fn parse_grid(spec: Option<&str>, default: &str) -> Result<(Vec<f64>, String)> {
    let text = spec.unwrap_or(default);
    let parts: Vec<&str> = text.split(':').collect();
    let bad = || Error::Config(format!("grid must be START:STOP:STEP, got {text:?}"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    Ok((db_grid(nums[0], nums[1], nums[2])?, text.to_string()))
}

fn scenario_meta(command: &str, cfg: &ScenarioConfig) -> Metadata {
    let mut m = Metadata::new(command);
    m.set("config_hash", cfg.hash());
    m.set("scenario", serde_json::to_value(cfg).unwrap_or_default());
    m
}

fn mc_options(a: &McArgs) -> McOptions {
    McOptions {
        chunk_size: a.chunk_size,
        symbols: a.symbols.into(),
        ..Default::default()
    }
}

fn mc_meta(m: &mut Metadata, a: &McArgs) {
    m.set("seed", a.seed)
        .set("samples", a.samples)
        .set("chunk_size", a.chunk_size)
        .set("rng", RNG_ID);
}

fn warnings(cfg: &ScenarioConfig) -> Result<Vec<String>> {
    Ok(analytic_model(cfg)?
        .warnings()
        .iter()
        .map(|w| w.to_string())
        .collect())
}

fn curve(a: &CurveArgs, outage: bool) -> Result<Output> {
    let cfg = load_config(&a.common)?;
    let default = format!("-10:30:{DEFAULT_GRID_STEP_DB}");
    let (grid, grid_text) = parse_grid(a.grid.as_deref(), &default)?;
    let model = analytic_model(&cfg)?;
    let mut meta = scenario_meta(if outage { "outage" } else { "pdf" }, &cfg);
    meta.set("grid", grid_text);

    let mut columns: Vec<&str> = if outage {
        vec!["gamma0_db", "outage"]
    } else {
        vec!["gamma_db", "pdf", "pdf_db"]
    };
    let dist = if a.mc {
        mc_meta(&mut meta, &a.mc_args);
        columns.extend(if outage {
            ["mc_outage", "mc_std_err"]
        } else {
            ["mc_pdf_db", ""]
        });
        columns.retain(|c| !c.is_empty());
        Some(simulate(
            &cfg,
            a.mc_args.samples,
            a.mc_args.seed,
            &mc_options(&a.mc_args),
        )?)
    } else {
        None
    };
    let hist = match (&dist, outage) {
        (Some(d), false) => {
            let mut edges: Vec<f64> = Vec::with_capacity(grid.len() + 1);
            for i in 0..grid.len() {
                let left = if i == 0 {
                    grid[0] - 0.5 * (grid.get(1).unwrap_or(&(grid[0] + 1.0)) - grid[0])
                } else {
                    0.5 * (grid[i - 1] + grid[i])
                };
                edges.push(left);
            }
            let last = grid[grid.len() - 1];
            let step = if grid.len() > 1 {
                last - grid[grid.len() - 2]
            } else {
                1.0
            };
            edges.push(last + 0.5 * step);
            Some(d.histogram_db(&edges)?.density())
        }
        _ => None,
    };

    let mut table = Table::new(columns);
    for (i, &g) in grid.iter().enumerate() {
        let lin = 10f64.powf(g / 10.0);
        let mut row: Vec<Cell> = vec![g.into()];
        if outage {
            row.push(model.outage(lin)?.into());
            if let Some(d) = &dist {
                let e = empirical_outage(d, lin)?;
                row.push(e.p.into());
                row.push(e.std_err.into());
            }
        } else {
            let f = model.sinr_pdf(lin)?;
            row.push(f.into());
            row.push((f * lin * std::f64::consts::LN_10 / 10.0).into());
            if let Some(h) = &hist {
                row.push(h[i].1.into());
            }
        }
        table.push(row);
    }
    let mut out = Output::new(meta, table);
    out.warnings = warnings(&cfg)?;
    Ok(out)
}

fn ranks(cfg: &ScenarioConfig, rank: Option<usize>) -> Result<Vec<usize>> {
    let max = cfg.n_r.min(cfg.n_t);
    match rank {
        Some(r) if r >= 1 && r <= max => Ok(vec![r]),
        Some(r) => Err(Error::InvalidArgument(format!(
            "rank {r} outside [1, {max}]"
        ))),
        None if max >= 2 => Ok((2..=max).collect()),
        None => Err(Error::InvalidArgument(
            "no interference rank above 1 fits these antenna counts".into(),
        )),
    }
}

fn gain_row(rank: usize, g: &GainPoint, with_x: bool) -> Vec<Cell> {
    let mut row: Vec<Cell> = Vec::with_capacity(5);
    if with_x {
        row.push(g.x.into());
    }
    row.extend([
        rank.into(),
        g.gamma0_rank1_db.into(),
        g.gamma0_rank_db.into(),
        g.gain_db.into(),
    ]);
    row
}

const GAIN_COLUMNS: [&str; 4] = ["rank", "gamma0_rank1_db", "gamma0_rank_db", "gain_db"];

fn gain(a: &GainArgs) -> Result<Output> {
    let cfg = load_config(&a.common)?;
    let mut meta = scenario_meta("gain", &cfg);
    meta.set("target_outage", a.target_outage);
    let mut table = Table::new(GAIN_COLUMNS);
    for r in ranks(&cfg, a.rank)? {
        let g = ranksinr::sweep::rank_gain(&cfg, r, a.target_outage, r as f64)?;
        table.push(gain_row(r, &g, false));
    }
    Ok(Output::new(meta, table))
}

fn run_sweep(
    cfg: &ScenarioConfig,
    a: &GainArgs,
    kind: SweepKind,
    grid: SweepGrid,
    x_name: &str,
    meta: Metadata,
) -> Result<Output> {
    let mut table = Table::new(std::iter::once(x_name).chain(GAIN_COLUMNS));
    for r in ranks(cfg, a.rank)? {
        let spec = SweepSpec {
            kind,
            grid: grid.clone(),
            base: cfg.clone(),
            rank: r,
            target_outage: a.target_outage,
        };
        let SweepOutput::Gain(points) = spec.run()? else {
            unreachable!("gain sweeps return gain points")
        };
        for p in &points {
            table.push(gain_row(r, p, true));
        }
    }
    Ok(Output::new(meta, table))
}

fn sweep(a: &GainArgs, kind: SweepKind) -> Result<Output> {
    let cfg = load_config(&a.common)?;
    let (default, x_name, command) = match kind {
        SweepKind::Snr => ("5:25:5", "snr_db", "sweep-snr"),
        _ => ("0:15:1", "inr_db", "sweep-inr"),
    };
    let text = a.grid.as_deref().unwrap_or(default);
    let (grid, _) = parse_grid(Some(text), default)?;
    let mut meta = scenario_meta(command, &cfg);
    meta.set("grid", text).set("target_outage", a.target_outage);
    let grid = SweepGrid::Db {
        start: grid[0],
        stop: grid[grid.len() - 1],
        step: step_of(text)?,
    };
    run_sweep(&cfg, a, kind, grid, x_name, meta)
}

fn step_of(text: &str) -> Result<f64> {
    text.rsplit(':')
        .next()
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| Error::Config(format!("bad grid {text:?}")))
}

fn sweep_n(a: &SweepNArgs) -> Result<Output> {
    let mut cfg = load_config(&a.gain.common)?;
    let counts: Vec<usize> = a
        .counts
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| Error::Config(format!("bad interferer count {s:?}")))
        })
        .collect::<Result<_>>()?;
    let total = match a.total_inr {
        Some(t) => t,
        None => total_inr_db(&cfg)?,
    };
    // The sweep splits the total evenly; the template keeps one interferer at the total power.
    cfg.interferers.truncate(1);
    if let Some(first) = cfg.interferers.first_mut() {
        first.inr_db = total;
    }
    let mut meta = scenario_meta("sweep-n", &cfg);
    meta.set("counts", a.counts.clone())
        .set("total_inr_db", total)
        .set("target_outage", a.gain.target_outage);
    run_sweep(
        &cfg,
        &a.gain,
        SweepKind::NumInterferers,
        SweepGrid::Counts(counts),
        "n_interferers",
        meta,
    )
}

fn mc_validate(a: &ValidateArgs) -> Result<Output> {
    let cfg = load_config(&a.common)?;
    let (grid, grid_text) = parse_grid(a.grid.as_deref(), "-5:20:0.5")?;
    let (report, _) = validate_against_simulation(
        &cfg,
        a.mc_args.samples,
        a.mc_args.seed,
        &grid,
        &mc_options(&a.mc_args),
    )?;
    let mut meta = scenario_meta("mc-validate", &cfg);
    meta.set("grid", grid_text);
    mc_meta(&mut meta, &a.mc_args);
    let mut summary =
        serde_json::to_value(&report).map_err(|e| Error::NumericInstability(e.to_string()))?;
    if let Some(obj) = summary.as_object_mut() {
        obj.remove("outage");
    }
    meta.set("report", summary);
    let mut table = Table::new(["gamma0_db", "analytic", "empirical", "std_err", "delta"]);
    for d in &report.outage {
        table.push(vec![
            d.gamma0_db.into(),
            d.analytic.into(),
            d.empirical.into(),
            d.std_err.into(),
            d.delta.into(),
        ]);
    }
    let mut out = Output::new(meta, table);
    out.warnings = report.notes.clone();
    out.failed = report.verdict != Verdict::Pass;
    Ok(out)
}

fn approx_validate(a: &ApproxArgs) -> Result<Output> {
    let cfg = load_config(&a.common)?;
    let (n_r, n_t) = (a.n_r.unwrap_or(cfg.n_r), a.n_t.unwrap_or(cfg.n_t));
    let grid = chain_grid(a.x_max, a.points)?;
    let report = compare_chain(n_r, n_t, a.n_l, a.samples, a.seed, &grid)?;
    let mut meta = Metadata::new("approx-validate");
    meta.set("grid", format!("0:{}:{} points", a.x_max, a.points))
        .set("seed", a.seed)
        .set("samples", a.samples)
        .set("rng", RNG_ID);
    meta.set(
        "report",
        serde_json::to_value(&report).map_err(|e| Error::NumericInstability(e.to_string()))?,
    );
    let mut table = Table::new(["x", "exact", "meijer_equivalent", "exp_approx"]);
    for p in &report.curves {
        table.push(vec![
            p.x.into(),
            p.exact.into(),
            p.meijer_equivalent.into(),
            p.exp_approx.into(),
        ]);
    }
    Ok(Output::new(meta, table))
}

fn dump_weights(a: &DumpArgs) -> Result<Output> {
    let cfg = load_config(&a.common)?;
    let (n_r, n_t) = (a.n_r.unwrap_or(cfg.n_r), a.n_t.unwrap_or(cfg.n_t));
    let table_w = compute_weights(n_r, n_t)?;
    let mut meta = Metadata::new("dump-weights");
    meta.set("n_r", n_r)
        .set("n_t", n_t)
        .set("exact_sum", table_w.exact_sum().to_string());
    let mut table = Table::new(["k", "l", "psi", "exact"]);
    for w in &table_w.weights {
        table.push(vec![
            w.k.into(),
            w.l.into(),
            w.psi.into(),
            w.exact.to_string().into(),
        ]);
    }
    Ok(Output::new(meta, table))
}

fn dump_xi(c: &Common) -> Result<Output> {
    let cfg = load_config(c)?;
    let mix = MixtureSpec::from_rates(&build_rate_set(&cfg)?)?;
    let mut meta = scenario_meta("dump-xi", &cfg);
    meta.set("groups", mix.num_groups())
        .set("min_separation", mix.min_separation)
        .set("coefficient_sum", mix.coefficient_sum());
    let mut table = Table::new(["i", "j", "rate", "multiplicity", "xi"]);
    for (i, j, xi) in mix.coefficients() {
        let g = mix.groups[i - 1];
        table.push(vec![
            i.into(),
            j.into(),
            g.rate.into(),
            g.multiplicity.into(),
            xi.into(),
        ]);
    }
    let mut out = Output::new(meta, table);
    out.warnings = mix.warnings().iter().map(|w| w.to_string()).collect();
    Ok(out)
}
