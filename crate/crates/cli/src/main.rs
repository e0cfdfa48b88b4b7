//! Command-line surface for the interlacing pipeline: decompose a fast
//! controller, convert its slow blocks across rates, sweep dual-rate Bode
//! data, read margins, and produce simulation runs as CSV.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numeric failure
//! (instability or singularity), 1 for I/O problems.

mod config;

use std::fmt;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{parse_input, parse_output, parse_strategy, ProjectConfig};
use interlace_core::{
    bode_sweep, classify_poles, close_loop, compose_open_loop, compute_load_profile, decompose,
    lift_dual_rate, log_grid, margins, overshoot_percent, run_interlaced, run_single_rate, series,
    settling_time, slow_single_rate_check, spectral_radius, to_dual_rate_block, to_slow_block,
    validate_schedule, BlockSet, InputStrategy, InterlaceSchedule, LiftedSystem, MarginReport,
    OutputStrategy, PoleGroup, PoleGroupKind, Polynomial, RationalTF, SignalSeq, SimRun,
    StateSpace,
};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numeric(String),
    Io(String),
}

impl CliError {
    fn numeric(e: impl fmt::Display) -> Self {
        CliError::Numeric(e.to_string())
    }
}

impl From<interlace_core::Error> for CliError {
    fn from(e: interlace_core::Error) -> Self {
        CliError::Numeric(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numeric(m) => write!(f, "numeric failure: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "interlace",
    about = "Interlaced LTI controller analysis: decomposition, lifting, dual-rate Bode data, and switched simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Shared {
    /// Project configuration file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides the configuration).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Input/output strategy code: i1o1, i1o2, i2o1, i2o2.
    #[arg(long)]
    strategy: Option<String>,
    /// Execution order as a comma list of slow-block indices, first fired
    /// first (e.g. 2,0,1).
    #[arg(long)]
    order: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Classify poles and print the parallel decomposition.
    Decompose(Shared),
    /// Convert slow blocks to their dual-rate and slow-rate forms.
    Interlace(Shared),
    /// Sweep open- and closed-loop dual-rate Bode data to CSV.
    Bode(Shared),
    /// Simulate the interlaced loop plus both single-rate baselines.
    Simulate {
        #[command(flatten)]
        shared: Shared,
        /// Run one simulation per permutation of the slow blocks.
        #[arg(long)]
        all_orders: bool,
    },
    /// Print the open-loop margin table for all four strategies.
    Margins(Shared),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Decompose(s) => cmd_decompose(s),
        Command::Interlace(s) => cmd_interlace(s),
        Command::Bode(s) => cmd_bode(s),
        Command::Simulate { shared, all_orders } => cmd_simulate(shared, *all_orders),
        Command::Margins(s) => cmd_margins(s),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            match e {
                CliError::Config(_) => ExitCode::from(2),
                CliError::Numeric(_) => ExitCode::from(3),
                CliError::Io(_) => ExitCode::from(1),
            }
        }
    }
}

struct Pipeline {
    config: ProjectConfig,
    out_dir: PathBuf,
    plant: StateSpace,
    controller: RationalTF,
    blocks: BlockSet,
}

impl Pipeline {
    fn load(shared: &Shared) -> Result<Self, CliError> {
        let config = ProjectConfig::load(&shared.config)?;
        let out_dir = shared
            .out
            .clone()
            .unwrap_or_else(|| PathBuf::from(&config.out_dir));
        let plant = config.plant_state_space()?;
        let controller = config.controller_tf()?;
        let blocks = decompose(&controller, config.threshold)?;
        Ok(Pipeline {
            config,
            out_dir,
            plant,
            controller,
            blocks,
        })
    }

    fn schedule(&self, shared: &Shared) -> Result<InterlaceSchedule, CliError> {
        self.schedule_with(shared.strategy.as_deref(), shared.order.as_deref())
    }

    fn schedule_with(
        &self,
        strategy: Option<&str>,
        order: Option<&str>,
    ) -> Result<InterlaceSchedule, CliError> {
        let (input, output) = match strategy {
            Some(code) => parse_strategy(code)?,
            None => (
                parse_input(&self.config.schedule.input)?,
                parse_output(&self.config.schedule.output)?,
            ),
        };
        let order = match order {
            Some(text) => Some(parse_order(text)?),
            None => self.config.schedule.order.clone(),
        };
        let sched = match order {
            Some(order) => {
                if order.len() != self.blocks.slow_blocks.len() {
                    return Err(CliError::Config(format!(
                        "schedule.order: {} entries for {} slow blocks",
                        order.len(),
                        self.blocks.slow_blocks.len()
                    )));
                }
                InterlaceSchedule::from_order(self.config.n, &order, input, output)
                    .map_err(|e| CliError::Config(format!("schedule.order: {e}")))?
            }
            None => InterlaceSchedule::default_for(&self.blocks, self.config.n, input, output)
                .map_err(|e| CliError::Config(format!("schedule: {e}")))?,
        };
        let report = validate_schedule(&sched, &self.blocks);
        if !report.is_valid() {
            return Err(CliError::Config(format!(
                "schedule: {}",
                report.violations.join("; ")
            )));
        }
        Ok(sched)
    }

    fn lifted_plant(&self) -> Result<LiftedSystem, CliError> {
        Ok(lift_dual_rate(&self.plant, self.config.n, self.config.n)?)
    }

    fn grid(&self) -> Vec<f64> {
        log_grid(
            self.config.sweep.omega_min,
            self.config.omega_max(),
            self.config.sweep.points,
        )
    }

    fn ensure_out_dir(&self) -> Result<(), CliError> {
        fs::create_dir_all(&self.out_dir)?;
        Ok(())
    }
}

fn parse_order(text: &str) -> Result<Vec<usize>, CliError> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| CliError::Config(format!("order: bad block index {s:?}")))
        })
        .collect()
}

fn strategy_code(input: InputStrategy, output: OutputStrategy) -> &'static str {
    match (input, output) {
        (InputStrategy::Fast, OutputStrategy::Fast) => "i1o1",
        (InputStrategy::Fast, OutputStrategy::Slow) => "i1o2",
        (InputStrategy::Slow, OutputStrategy::Fast) => "i2o1",
        (InputStrategy::Slow, OutputStrategy::Slow) => "i2o2",
    }
}

fn descending(p: &Polynomial) -> Vec<f64> {
    p.coeffs().iter().rev().copied().collect()
}

fn tf_json(tf: &RationalTF) -> serde_json::Value {
    serde_json::json!({
        "num": descending(tf.num()),
        "den": descending(tf.den()),
        "period": tf.period,
    })
}

fn group_label(g: &PoleGroup) -> String {
    match g.kind {
        PoleGroupKind::Real => format!("{:.6}", g.poles[0].re),
        PoleGroupKind::RepeatedReal => format!("{:.6} (double)", g.poles[0].re),
        PoleGroupKind::ComplexPair => {
            format!("{:.6} +- {:.6}i", g.poles[0].re, g.poles[0].im.abs())
        }
    }
}

fn cmd_decompose(shared: &Shared) -> Result<(), CliError> {
    let p = Pipeline::load(shared)?;
    let (fast_groups, slow_groups) = classify_poles(&p.controller, p.config.threshold)?;
    println!("pole classification (threshold {}):", p.config.threshold);
    for (i, g) in slow_groups.iter().enumerate() {
        println!("  slow  {:<28} -> block {i}", group_label(g));
    }
    for g in &fast_groups {
        println!("  fast  {}", group_label(g));
    }
    println!("parallel decomposition:");
    println!("  fast part: {}", p.blocks.fast);
    for (i, b) in p.blocks.slow_blocks.iter().enumerate() {
        println!("  block {i}:   {b}");
    }
    let report = slow_single_rate_check(&p.blocks, &p.plant, p.config.n)?;
    println!(
        "all-slow single-rate loop at {}T: {} (spectral radius {:.6})",
        p.config.n,
        if report.stable { "stable" } else { "UNSTABLE" },
        report.spectral_radius
    );

    p.ensure_out_dir()?;
    let json = serde_json::json!({
        "period": p.config.period,
        "threshold": p.config.threshold,
        "decomposition": "parallel",
        "fast": tf_json(&p.blocks.fast),
        "slow_blocks": p.blocks.slow_blocks.iter().map(tf_json).collect::<Vec<_>>(),
    });
    let path = p.out_dir.join("blocks.json");
    fs::write(&path, serde_json::to_string_pretty(&json).unwrap())?;
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_interlace(shared: &Shared) -> Result<(), CliError> {
    let p = Pipeline::load(shared)?;
    let sched = p.schedule(shared)?;
    let n = p.config.n;
    println!(
        "schedule: N = {n}, strategy {}, phase of each block: {:?}",
        strategy_code(sched.input, sched.output),
        sched.phase_of_block
    );
    let mut blocks_json = Vec::new();
    for (i, b) in p.blocks.slow_blocks.iter().enumerate() {
        let dual = to_dual_rate_block(b, n)?;
        let slow = to_slow_block(b, n)?;
        println!("block {i} at T:    {b}");
        println!(
            "  dual-rate:     ({}) / ({}) with the denominator in z^{n}",
            dual.num_fast,
            dual.den_slow.display_with("Z")
        );
        println!("  slow at {}T:    {}", n, slow.tf);
        blocks_json.push(serde_json::json!({
            "fast": tf_json(b),
            "dual_num_fast": descending(&dual.num_fast),
            "dual_den_slow": descending(&dual.den_slow),
            "slow": tf_json(&slow.tf),
            "phase": sched.phase_of_block[i],
        }));
    }
    let profile = compute_load_profile(&p.blocks, &sched)?;
    println!(
        "load profile per fast instant (one metaperiod): monolithic {:?}, interlaced {:?}",
        profile.monolithic, profile.interlaced
    );

    p.ensure_out_dir()?;
    let json = serde_json::json!({
        "n": n,
        "period_fast": p.config.period,
        "period_slow": p.config.period * n as f64,
        "strategy": strategy_code(sched.input, sched.output),
        "blocks": blocks_json,
        "load_monolithic": profile.monolithic,
        "load_interlaced": profile.interlaced,
    });
    let path = p.out_dir.join("interlaced.json");
    fs::write(&path, serde_json::to_string_pretty(&json).unwrap())?;
    println!("wrote {}", path.display());
    Ok(())
}

fn margin_row(
    p: &Pipeline,
    input: InputStrategy,
    output: OutputStrategy,
    order: Option<&str>,
) -> Result<(String, MarginReport, f64), CliError> {
    let sched = p.schedule_with(Some(strategy_code(input, output)), order)?;
    let k = compose_open_loop(&p.blocks, &sched)?;
    let g = p.lifted_plant()?;
    let open = series(&k, &g)?;
    let data = bode_sweep(&open, &p.grid())?;
    let rep = margins(&data);
    let closed = close_loop(&k, &g)?;
    let rho = spectral_radius(&closed)?;
    Ok((strategy_code(input, output).to_string(), rep, rho))
}

fn print_margin_table(rows: &[(String, MarginReport, f64)]) {
    println!(
        "{:<8} {:>10} {:>12} {:>10} {:>12} {:>12}",
        "strategy", "PM_deg", "wc_rad_s", "GM_dB", "wg_rad_s", "cl_specrad"
    );
    for (code, rep, rho) in rows {
        let fmt_opt = |v: Option<f64>| match v {
            Some(x) => format!("{x:.3}"),
            None => "inf".to_string(),
        };
        println!(
            "{:<8} {:>10} {:>12} {:>10} {:>12} {:>12.6}",
            code,
            fmt_opt(rep.phase_margin_deg),
            fmt_opt(rep.gain_crossover),
            fmt_opt(rep.gain_margin_db),
            fmt_opt(rep.phase_crossover),
            rho
        );
    }
}

fn cmd_bode(shared: &Shared) -> Result<(), CliError> {
    let p = Pipeline::load(shared)?;
    let sched = p.schedule(shared)?;
    let code = strategy_code(sched.input, sched.output);
    let k = compose_open_loop(&p.blocks, &sched)?;
    let g = p.lifted_plant()?;
    let grid = p.grid();

    p.ensure_out_dir()?;
    let open = series(&k, &g)?;
    let open_data = bode_sweep(&open, &grid)?;
    let open_path = p.out_dir.join(format!("bode_open_{code}.csv"));
    open_data.write_csv(fs::File::create(&open_path)?)?;
    println!("wrote {}", open_path.display());

    let closed = close_loop(&k, &g)?;
    let rho = spectral_radius(&closed)?;
    if rho >= 1.0 {
        println!("warning: closed loop unstable (spectral radius {rho:.6})");
    }
    let closed_data = bode_sweep(&closed, &grid)?;
    let closed_path = p.out_dir.join(format!("bode_closed_{code}.csv"));
    closed_data.write_csv(fs::File::create(&closed_path)?)?;
    println!("wrote {}", closed_path.display());

    let rep = margins(&open_data);
    print_margin_table(&[(code.to_string(), rep, rho)]);
    Ok(())
}

fn cmd_margins(shared: &Shared) -> Result<(), CliError> {
    let p = Pipeline::load(shared)?;
    let mut rows = Vec::new();
    for (i, o) in [
        (InputStrategy::Fast, OutputStrategy::Fast),
        (InputStrategy::Fast, OutputStrategy::Slow),
        (InputStrategy::Slow, OutputStrategy::Fast),
        (InputStrategy::Slow, OutputStrategy::Slow),
    ] {
        rows.push(margin_row(&p, i, o, shared.order.as_deref())?);
    }
    print_margin_table(&rows);
    Ok(())
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for rest in permutations(k - 1) {
        for slot in 0..=rest.len() {
            let mut perm = rest.clone();
            perm.insert(slot, k - 1);
            out.push(perm);
        }
    }
    out.sort();
    out
}

struct RunSummary {
    label: String,
    settling: Option<f64>,
    overshoot: Option<f64>,
    max_mac: u64,
    diverged: bool,
}

fn summarize(label: String, run: Result<SimRun, interlace_core::Error>) -> RunSummary {
    match run {
        Ok(run) => RunSummary {
            label,
            settling: settling_time(&run, 0.02),
            overshoot: overshoot_percent(&run),
            max_mac: run.mac_counts.iter().copied().max().unwrap_or(0),
            diverged: false,
        },
        Err(_) => RunSummary {
            label,
            settling: None,
            overshoot: None,
            max_mac: 0,
            diverged: true,
        },
    }
}

fn cmd_simulate(shared: &Shared, all_orders: bool) -> Result<(), CliError> {
    let p = Pipeline::load(shared)?;
    let sched = p.schedule(shared)?;
    let steps = (p.config.simulate.duration / p.config.period).round() as usize;
    let reference = SignalSeq::new(vec![1.0; steps], p.config.period);
    p.ensure_out_dir()?;
    let mut summaries = Vec::new();

    // single-rate baselines: the recombined controller at T and its all-slow
    // resampling at N T (control held on the fast grid)
    let fast_run = run_single_rate(&p.controller, &p.plant, &reference, steps);
    if let Ok(run) = &fast_run {
        let path = p.out_dir.join("sim_fast_single_rate.csv");
        run.write_csv(fs::File::create(&path)?)?;
        println!("wrote {}", path.display());
    }
    summaries.push(summarize("fast single-rate".into(), fast_run));

    let slow_ctrl = interlace_core::interlace::resample_slow_tf(&p.controller, p.config.n)?;
    let slow_run = run_single_rate(&slow_ctrl, &p.plant, &reference, steps);
    if let Ok(run) = &slow_run {
        let path = p.out_dir.join("sim_slow_single_rate.csv");
        run.write_csv(fs::File::create(&path)?)?;
        println!("wrote {}", path.display());
    }
    summaries.push(summarize("slow single-rate".into(), slow_run));

    let orders: Vec<Vec<usize>> = if all_orders {
        permutations(p.blocks.slow_blocks.len())
    } else {
        let mut order = vec![0usize; p.blocks.slow_blocks.len()];
        for (b, &phase) in sched.phase_of_block.iter().enumerate() {
            order[phase] = b;
        }
        vec![order]
    };
    let code = strategy_code(sched.input, sched.output);
    for order in &orders {
        let run_sched = InterlaceSchedule::from_order(p.config.n, order, sched.input, sched.output)
            .map_err(|e| CliError::Config(format!("order {order:?}: {e}")))?;
        let label = format!(
            "interlaced {code} order {}",
            order
                .iter()
                .map(|b| b.to_string())
                .collect::<Vec<_>>()
                .join(",")
        );
        let run = run_interlaced(&p.blocks, &run_sched, &p.plant, &reference, steps);
        if let Ok(run) = &run {
            let suffix = order
                .iter()
                .map(|b| b.to_string())
                .collect::<Vec<_>>()
                .join("_");
            let path = p
                .out_dir
                .join(format!("sim_interlaced_{code}_order_{suffix}.csv"));
            run.write_csv(fs::File::create(&path)?)?;
            println!("wrote {}", path.display());
        }
        summaries.push(summarize(label, run));
    }

    println!(
        "{:<34} {:>11} {:>14} {:>8}",
        "run", "settling_s", "overshoot_pct", "max_mac"
    );
    for s in &summaries {
        if s.diverged {
            println!("{:<34} {:>11} {:>14} {:>8}", s.label, "diverged", "-", "-");
            continue;
        }
        let fmt_opt = |v: Option<f64>| match v {
            Some(x) => format!("{x:.2}"),
            None => "-".to_string(),
        };
        println!(
            "{:<34} {:>11} {:>14} {:>8}",
            s.label,
            fmt_opt(s.settling),
            fmt_opt(s.overshoot),
            s.max_mac
        );
    }
    Ok(())
}
