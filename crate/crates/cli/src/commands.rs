use cryolink::export;
use cryolink::fitting::{read_points as read_points_csv, MeasurementKind, SeriesMetadata};
use cryolink::{
    braid_decomposition, channel_loss, check_criteria, fit_mli_lambda, fit_power_law, fit_rrr,
    max_feasible_length, parse_config, serialize_config, solve_assembly, standard_assembly,
    sweep_lengths, Config, CuPlacement, FitResult, MeasurementSeries, SolverSettings, Stage,
};
use serde::Serialize;
use serde_json::json;

use crate::args::{Cli, Command, FitCommand, Format, SeriesArgs};
use crate::error::{read, CliError};
use crate::manifest::{to_json, Run};

pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Validate => validate(cli),
        Command::Loss { length, alpha } => {
            println!("{}", export::fmt_num(channel_loss(*length, *alpha)?));
            Ok(())
        }
        Command::Init { .. } => with_run(cli, "init", init),
        Command::Solve => with_run(cli, "solve", solve),
        Command::Sweep { .. } => with_run(cli, "sweep", sweep),
        Command::FeasibleLength { .. } => with_run(cli, "feasible-length", feasible_length),
        Command::Fit { kind } => with_run(cli, "fit", |cli, run| fit(cli, kind, run)),
    }
}

fn with_run(
    cli: &Cli,
    name: &str,
    f: impl FnOnce(&Cli, &mut Run) -> Result<(), CliError>,
) -> Result<(), CliError> {
    let mut run = Run::new(name, &cli.out, cli.config.as_deref(), &cli.settings);
    let outcome = f(cli, &mut run);
    run.finish(outcome)
}

fn load_config(cli: &Cli) -> Result<Config, CliError> {
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| CliError::Usage("this command needs --config".into()))?;
    let mut config = parse_config(&read(path)?)?;
    apply_overrides(&mut config.solver, &cli.settings)?;
    Ok(config)
}

/// Solver settings from `--config` when given, defaults otherwise.
fn settings_only(cli: &Cli) -> Result<SolverSettings, CliError> {
    let mut settings = match cli.config.as_deref() {
        Some(path) => parse_config(&read(path)?)?.solver,
        None => SolverSettings::default(),
    };
    apply_overrides(&mut settings, &cli.settings)?;
    Ok(settings)
}

fn apply_overrides(settings: &mut SolverSettings, overrides: &[String]) -> Result<(), CliError> {
    for o in overrides {
        let (key, value) = o
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("`{o}` is not KEY=VALUE")))?;
        settings.set(key.trim(), value)?;
    }
    settings.validate()?;
    Ok(())
}

fn validate(cli: &Cli) -> Result<(), CliError> {
    let config = load_config(cli)?;
    let a = &config.assembly;
    let c = a.counts();
    println!(
        "valid: {} m, {} modules ({} nodes, {} links, {} cooling units), {} heaters",
        a.total_length(),
        a.modules.len(),
        c.nodes,
        c.links,
        c.cooling_units,
        a.heaters.len()
    );
    Ok(())
}

pub fn parse_placement(s: &str) -> Result<CuPlacement, CliError> {
    match s {
        "none" => Ok(CuPlacement::None),
        "central" => Ok(CuPlacement::Central),
        other => other.parse::<f64>().map(CuPlacement::Spacing).map_err(|_| {
            CliError::Usage(format!(
                "--cu expects none, central or a spacing in m, got `{other}`"
            ))
        }),
    }
}

fn init(cli: &Cli, run: &mut Run) -> Result<(), CliError> {
    let Command::Init { length, cu } = &cli.command else {
        unreachable!()
    };
    let assembly = standard_assembly(*length, parse_placement(cu)?)?;
    let settings = settings_only(cli)?;
    let path = run.emit("assembly.json", &serialize_config(&assembly, &settings))?;
    println!("wrote {}", path.display());
    Ok(())
}

#[derive(Serialize)]
struct StageSummary {
    stage: Stage,
    t_min_k: f64,
    x_min_m: f64,
    t_max_k: f64,
    x_max_m: f64,
    sinks: Vec<cryolink::SinkRecord>,
}

fn solve(cli: &Cli, run: &mut Run) -> Result<(), CliError> {
    let config = load_config(cli)?;
    let solution = solve_assembly(&config.assembly, &config.solver)?;
    let ext = cli.format.extension();
    for (stage, p) in solution.profiles.iter() {
        run.emit(
            &format!("profile_{}.{ext}", stage.name()),
            &profiles_text(cli.format, [p])?,
        )?;
    }
    run.emit(
        &format!("profiles.{ext}"),
        &profiles_text(cli.format, solution.profiles.iter().map(|(_, p)| p))?,
    )?;
    let summary: Vec<StageSummary> = solution
        .profiles
        .iter()
        .map(|(stage, p)| {
            let (t_min_k, x_min_m) = p.min();
            let (t_max_k, x_max_m) = p.max();
            StageSummary {
                stage,
                t_min_k,
                x_min_m,
                t_max_k,
                x_max_m,
                sinks: p.sinks.clone(),
            }
        })
        .collect();
    let criteria = check_criteria(&config.assembly, &solution.profiles);
    run.emit(
        "summary.json",
        &to_json(&json!({ "stages": summary, "criteria": criteria })),
    )?;
    run.manifest.convergence =
        serde_json::to_value(solution.reports.iter().map(|(_, r)| r).collect::<Vec<_>>())
            .expect("in-memory serialization");
    for s in &summary {
        println!(
            "{:>5}: {} .. {} K (max at {:.3} m)",
            s.stage.name(),
            export::fmt_num(s.t_min_k),
            export::fmt_num(s.t_max_k),
            s.x_max_m
        );
    }
    println!("criteria: {}", export::criterion_flags(&criteria));
    Ok(())
}

fn profiles_text<'a>(
    format: Format,
    profiles: impl IntoIterator<Item = &'a cryolink::StageProfile>,
) -> Result<String, CliError> {
    Ok(match format {
        Format::Csv => export::profiles_csv(profiles)?,
        Format::Json => export::profiles_json(profiles)? + "\n",
    })
}

/// Parses `a:b:step` into an inclusive grid.
pub fn parse_range(s: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Usage(format!("expected start:stop:step, got `{s}`"));
    let parts: Vec<f64> = s
        .split(':')
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_, _>>()?;
    let [a, b, step] = parts[..] else {
        return Err(bad());
    };
    if !a.is_finite() || !b.is_finite() || !step.is_finite() || step <= 0.0 || b < a {
        return Err(bad());
    }
    let n = ((b - a) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| a + step * k as f64).collect())
}

fn parse_bracket(s: &str) -> Result<(f64, f64), CliError> {
    let bad = || CliError::Usage(format!("expected low:high, got `{s}`"));
    let (lo, hi) = s.split_once(':').ok_or_else(bad)?;
    let lo = lo.trim().parse::<f64>().map_err(|_| bad())?;
    let hi = hi.trim().parse::<f64>().map_err(|_| bad())?;
    Ok((lo, hi))
}

fn placement(spacing: Option<f64>) -> CuPlacement {
    spacing.map_or(CuPlacement::None, CuPlacement::Spacing)
}

fn sweep(cli: &Cli, run: &mut Run) -> Result<(), CliError> {
    let Command::Sweep {
        lengths,
        cu_spacing,
    } = &cli.command
    else {
        unreachable!()
    };
    let settings = settings_only(cli)?;
    let lengths = parse_range(lengths)?;
    let result = sweep_lengths(&lengths, placement(*cu_spacing), &settings)?;
    let text = match cli.format {
        Format::Csv => export::sweep_csv(&result)?,
        Format::Json => export::sweep_json(&result)? + "\n",
    };
    run.emit(&format!("sweep.{}", cli.format.extension()), &text)?;
    let failed = result.rows.iter().filter(|r| r.outcome.is_err()).count();
    run.manifest.convergence = json!({ "lengths": result.rows.len(), "failed_solves": failed });
    for r in &result.rows {
        match &r.outcome {
            Ok(e) => println!(
                "{:>8.2} m  {}",
                r.length,
                export::criterion_flags(&e.criteria)
            ),
            Err(msg) => println!("{:>8.2} m  error: {msg}", r.length),
        }
    }
    match result.first_violation {
        Some((l, c)) => println!("first violation: criterion {} at {l} m", c.label()),
        None => println!("no violation in range"),
    }
    Ok(())
}

fn feasible_length(cli: &Cli, run: &mut Run) -> Result<(), CliError> {
    let Command::FeasibleLength {
        bracket,
        cu_spacing,
    } = &cli.command
    else {
        unreachable!()
    };
    let settings = settings_only(cli)?;
    let bracket = parse_bracket(bracket)?;
    let length = max_feasible_length(placement(*cu_spacing), bracket, &settings)?;
    run.emit(
        "feasible_length.json",
        &to_json(&json!({ "length_m": length, "cu_spacing_m": cu_spacing, "bracket_m": [bracket.0, bracket.1] })),
    )?;
    println!("{length}");
    Ok(())
}

fn load_series(args: &SeriesArgs) -> Result<Option<MeasurementSeries>, CliError> {
    let Some(meta_path) = &args.meta else {
        return Ok(None);
    };
    let meta_text = read(meta_path)?;
    let meta: SeriesMetadata = serde_json::from_str(&meta_text)
        .map_err(|e| cryolink::Error::Io(format!("{}: {e}", meta_path.display())))?;
    Ok(Some(MeasurementSeries::from_csv(&read(&args.data)?, meta)?))
}

fn fit(cli: &Cli, kind: &FitCommand, run: &mut Run) -> Result<(), CliError> {
    let result: FitResult = match kind {
        FitCommand::Powerlaw { series } => {
            let pts = match load_series(series)? {
                Some(s) => s.points()?,
                None => read_points_csv(&read(&series.data)?)?,
            };
            fit_power_law(&pts)?
        }
        FitCommand::Rrr {
            series,
            noise_floor,
        } => {
            let pts = match load_series(series)? {
                Some(s) if s.meta.kind == MeasurementKind::ResistancePoints => {
                    return Err(CliError::Usage(
                        "an RRR fit needs conductivity or heater data".into(),
                    ))
                }
                Some(s) => s.conductivity_points(*noise_floor)?.points,
                None => read_points_csv(&read(&series.data)?)?,
            };
            fit_rrr(&pts)?
        }
        FitCommand::Braid {
            total,
            bulk,
            noise,
            t_max,
        } => {
            let total = read_points_csv(&read(total)?)?;
            let bulk = read_points_csv(&read(bulk)?)?;
            let d = braid_decomposition(&total, &bulk, *noise, *t_max)?;
            run.emit("braid.json", &to_json(&d))?;
            d.fit
        }
        FitCommand::Mli { data, grid } => {
            let config = load_config(cli)?;
            let measured = read_points_csv(&read(data)?)?;
            let grid = parse_range(grid)?;
            fit_mli_lambda(&measured, &config.assembly, &grid, &config.solver)?
        }
    };
    run.emit("fit.json", &to_json(&result))?;
    run.manifest.convergence = json!({ "residual": result.residual, "dof": result.dof });
    for p in &result.parameters {
        println!("{} = {} {}", p.name, export::fmt_num(p.value), p.unit);
    }
    println!(
        "residual = {} ({} dof)",
        export::fmt_num(result.residual),
        result.dof
    );
    for w in &result.warnings {
        eprintln!("warning: {w}");
    }
    Ok(())
}
