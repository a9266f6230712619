//! Subcommand implementations. Each returns the summary line for stdout.

use std::path::Path;

use epchiral::complex_json::{self, JsonComplex};
use epchiral::continuation::monodromy_with_tracks;
use epchiral::{
    biorthogonal_normalize, chirality, classify_crossing, compare_reduction, completeness_residual,
    continue_along, demo, find_exceptional_points, predict_ep, reduce, refine_ep, seed_from_sweep,
    verify_ep, ChiralityResult, Complex64, ContinuationOptions, EigenError, EigenSystem,
    ExceptionalPoint, LocatorError, LoopPath, MatrixPencil, Tolerances, TwoLevelParams,
};
use serde::Serialize;

use crate::error::CliError;
use crate::output::{path_csv, sweep_csv, write_atomic, write_json};
use crate::{Cli, Command, Global, Interval};

fn tolerances(g: &Global) -> Result<Tolerances, CliError> {
    let mut tol = Tolerances::default();
    for (name, value, slot) in [
        ("--tol-eig", g.tol_eig, &mut tol.eig_residual),
        ("--tol-newton", g.tol_newton, &mut tol.newton_residual),
    ] {
        if let Some(v) = value {
            if !(v.is_finite() && v > 0.0) {
                return Err(CliError::Usage(format!("{name} must be positive, got {v}")));
            }
            *slot = v;
        }
    }
    Ok(tol)
}

fn load_pencil(g: &Global) -> Result<MatrixPencil, CliError> {
    match (&g.pencil, &g.two_level) {
        (Some(path), _) => MatrixPencil::load(path)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display()))),
        (None, Some(path)) => TwoLevelParams::load(path)
            .map(|p| p.assemble())
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display()))),
        (None, None) => Err(CliError::usage("no input: pass --pencil or --two-level")),
    }
}

fn check_interval(i: &Interval) -> Result<(), CliError> {
    if !(i.from.is_finite() && i.to.is_finite() && i.from < i.to) {
        return Err(CliError::Usage(format!(
            "invalid interval [{}, {}]",
            i.from, i.to
        )));
    }
    if i.steps < 2 {
        return Err(CliError::usage("--steps must be at least 2"));
    }
    Ok(())
}

fn refined(
    pencil: &MatrixPencil,
    guess: Complex64,
    tol: &Tolerances,
) -> Result<ExceptionalPoint, CliError> {
    refine_ep(pencil, guess, tol).map_err(CliError::solver)
}

pub fn run(cli: &Cli) -> Result<String, CliError> {
    let g = &cli.global;
    let tol = tolerances(g)?;
    if let Command::Demo { n } = cli.command {
        return cmd_demo(g, n);
    }
    let pencil = load_pencil(g)?;
    let out = g.out.as_path();
    match &cli.command {
        Command::Demo { .. } => unreachable!("handled above"),
        Command::Eigs { lambda } => cmd_eigs(&pencil, *lambda, &tol, out),
        Command::Sweep { interval } => cmd_sweep(&pencil, interval, &tol, out),
        Command::FindEp {
            interval,
            chirality,
        } => cmd_find_ep(&pencil, interval, *chirality, &tol, out),
        Command::Loop {
            center,
            radius,
            steps,
            turns,
            reverse,
        } => {
            let lp = LoopPath::new(*center, *radius, *steps)
                .with_turns(*turns)
                .with_orientation(if *reverse { -1 } else { 1 });
            cmd_loop(&pencil, &lp, &tol, out)
        }
        Command::Crossing {
            ep,
            offset,
            from,
            to,
            steps,
        } => cmd_crossing(&pencil, *ep, *offset, (*from, *to), *steps, &tol, out),
        Command::Reduce {
            ep,
            lambda_ref,
            pair,
            half_width,
            steps,
        } => cmd_reduce(
            &pencil,
            ReduceArgs {
                guess: *ep,
                lambda_ref: *lambda_ref,
                pair: *pair,
                half_width: *half_width,
                steps: *steps,
            },
            &tol,
            out,
        ),
        Command::Chirality { ep } => cmd_chirality(&pencil, *ep, &tol, out),
    }
}

#[derive(Serialize)]
struct LevelReport {
    level: usize,
    #[serde(with = "complex_json")]
    value: Complex64,
    self_orthogonality: f64,
    near_defective: bool,
}

#[derive(Serialize)]
struct EigsReport {
    #[serde(with = "complex_json")]
    lambda: Complex64,
    levels: Vec<LevelReport>,
    completeness_residual: Option<f64>,
    note: Option<String>,
}

fn cmd_eigs(
    pencil: &MatrixPencil,
    lambda: Complex64,
    tol: &Tolerances,
    out: &Path,
) -> Result<String, CliError> {
    let sys = EigenSystem::at(pencil, lambda, tol).map_err(CliError::solver)?;
    let so = sys.self_orthogonalities();
    let sys = biorthogonal_normalize(sys, tol);
    let (completeness, note) = match completeness_residual(&sys, tol) {
        Ok(r) => (Some(r), None),
        Err(e @ EigenError::DefectivePresent { .. }) => (None, Some(e.to_string())),
        Err(e) => return Err(CliError::solver(e)),
    };
    let levels: Vec<LevelReport> = sys
        .values
        .iter()
        .zip(&so)
        .enumerate()
        .map(|(level, (&value, s))| LevelReport {
            level,
            value,
            self_orthogonality: s.value,
            near_defective: sys.near_defective[level],
        })
        .collect();
    let flagged = levels.iter().filter(|l| l.near_defective).count();
    let report = EigsReport {
        lambda,
        levels,
        completeness_residual: completeness,
        note,
    };
    let path = write_json(out, "eigs.json", &report)?;
    let status = match completeness {
        Some(r) => format!("completeness residual {r:.3e}"),
        None => format!("{flagged} near-defective levels"),
    };
    Ok(format!(
        "eigs: {} levels at {lambda:.6}, {status}; wrote {}",
        sys.n(),
        path.display()
    ))
}

fn cmd_sweep(
    pencil: &MatrixPencil,
    interval: &Interval,
    tol: &Tolerances,
    out: &Path,
) -> Result<String, CliError> {
    check_interval(interval)?;
    let samples: Vec<Complex64> = (0..=interval.steps)
        .map(|k| {
            let t =
                interval.from + (interval.to - interval.from) * k as f64 / interval.steps as f64;
            Complex64::new(t, 0.0)
        })
        .collect();
    let opts = ContinuationOptions {
        tol: *tol,
        ..ContinuationOptions::default()
    };
    let state = continue_along(pencil, &samples, &opts).map_err(CliError::solver)?;
    let csv = write_atomic(out, "sweep.csv", &sweep_csv(&state)?)?;
    let seeds = seed_from_sweep(pencil, (interval.from, interval.to), interval.steps, tol)
        .map_err(CliError::solver)?;
    let json = write_json(out, "seeds.json", &seeds)?;
    Ok(format!(
        "sweep: {} samples, {} repulsion seeds; wrote {} and {}",
        samples.len(),
        seeds.len(),
        csv.display(),
        json.display()
    ))
}

fn cmd_demo(g: &Global, n: usize) -> Result<String, CliError> {
    if n < 2 {
        return Err(CliError::Usage(format!("--n must be at least 2, got {n}")));
    }
    let pencil = demo::random_pencil(n, g.seed);
    let mut text = pencil.to_json();
    text.push('\n');
    let path = write_atomic(&g.out, "pencil.json", text.as_bytes())?;
    Ok(format!(
        "demo: {n}-level pencil from seed {}; wrote {}",
        g.seed,
        path.display()
    ))
}

#[derive(Serialize)]
struct EpReport {
    #[serde(with = "complex_json")]
    lambda_c: Complex64,
    #[serde(with = "complex_json")]
    e_c: Complex64,
    pair: (usize, usize),
    residual: f64,
    puiseux_exponent: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    chirality: Option<i8>,
}

fn puiseux_exponent(
    pencil: &MatrixPencil,
    ep: &ExceptionalPoint,
    tol: &Tolerances,
) -> Result<f64, CliError> {
    match verify_ep(pencil, ep, tol) {
        Ok(fit) | Err(LocatorError::NotABranchPoint { fit }) => Ok(fit.exponent),
        Err(e) => Err(CliError::solver(e)),
    }
}

fn cmd_find_ep(
    pencil: &MatrixPencil,
    interval: &Interval,
    with_chirality: bool,
    tol: &Tolerances,
    out: &Path,
) -> Result<String, CliError> {
    check_interval(interval)?;
    let eps = find_exceptional_points(pencil, (interval.from, interval.to), interval.steps, tol)
        .map_err(CliError::solver)?;
    let mut reports = Vec::with_capacity(eps.len());
    for ep in &eps {
        let chirality = if with_chirality {
            Some(chirality(pencil, ep, tol).map_err(CliError::solver)?.sign)
        } else {
            None
        };
        reports.push(EpReport {
            lambda_c: ep.lambda_c,
            e_c: ep.e_c,
            pair: ep.pair,
            residual: ep.residual,
            puiseux_exponent: puiseux_exponent(pencil, ep, tol)?,
            chirality,
        });
    }
    let path = write_json(out, "find_ep.json", &reports)?;
    Ok(format!(
        "find-ep: {} exceptional points; wrote {}",
        reports.len(),
        path.display()
    ))
}

fn cmd_loop(
    pencil: &MatrixPencil,
    lp: &LoopPath,
    tol: &Tolerances,
    out: &Path,
) -> Result<String, CliError> {
    lp.validate().map_err(CliError::usage)?;
    let opts = ContinuationOptions {
        tol: *tol,
        ..ContinuationOptions::default()
    };
    let (result, state) = monodromy_with_tracks(pencil, lp, &opts).map_err(CliError::solver)?;
    let json = write_json(out, "loop.json", &result)?;
    let csv = write_atomic(out, "loop_tracks.csv", &path_csv(&state)?)?;
    let moved = result.element().support();
    let order = result
        .loops_to_identity
        .map_or_else(|| "unbounded".to_string(), |k| k.to_string());
    Ok(format!(
        "loop: {} turn(s), levels moved {moved:?}, loops to identity {order}; wrote {} and {}",
        lp.turns,
        json.display(),
        csv.display()
    ))
}

fn cmd_crossing(
    pencil: &MatrixPencil,
    guess: Complex64,
    offset: f64,
    range: (f64, f64),
    steps: usize,
    tol: &Tolerances,
    out: &Path,
) -> Result<String, CliError> {
    if !(range.0.is_finite() && range.1.is_finite() && range.0 < range.1) || steps < 2 {
        return Err(CliError::Usage(format!(
            "invalid path [{}, {}] with {steps} steps",
            range.0, range.1
        )));
    }
    let ep = refined(pencil, guess, tol)?;
    let opts = ContinuationOptions {
        tol: *tol,
        ..ContinuationOptions::default()
    }
    .with_known_eps(&[ep]);
    let (report, state) =
        classify_crossing(pencil, &ep, offset, range, steps, &opts).map_err(CliError::solver)?;
    let json = write_json(out, "crossing.json", &report)?;
    let csv = write_atomic(out, "crossing_tracks.csv", &path_csv(&state)?)?;
    Ok(format!(
        "crossing: offset {offset}, energies cross {}, widths cross {}; wrote {} and {}",
        report.energies_cross,
        report.widths_cross,
        json.display(),
        csv.display()
    ))
}

struct ReduceArgs {
    guess: Complex64,
    lambda_ref: Option<f64>,
    pair: Option<(usize, usize)>,
    half_width: Option<f64>,
    steps: usize,
}

#[derive(Serialize)]
struct ReduceReport {
    eps: [f64; 2],
    omega: [f64; 2],
    phi: f64,
    #[serde(with = "complex_json")]
    lambda_ref: Complex64,
    pair: (usize, usize),
    #[serde(with = "complex_json")]
    lambda_c: Complex64,
    predicted_ep: [JsonComplex; 2],
    max_deviation: f64,
}

fn cmd_reduce(
    pencil: &MatrixPencil,
    args: ReduceArgs,
    tol: &Tolerances,
    out: &Path,
) -> Result<String, CliError> {
    if let Some(w) = args.half_width {
        if !(w.is_finite() && w > 0.0) {
            return Err(CliError::Usage(format!(
                "--half-width must be positive, got {w}"
            )));
        }
    }
    let ep = refined(pencil, args.guess, tol)?;
    let center = args.lambda_ref.unwrap_or(ep.lambda_ref);
    let pair = args.pair.unwrap_or(ep.pair);
    let lambda_ref = Complex64::new(center, 0.0);
    let eff = reduce(pencil, lambda_ref, pair, tol).map_err(CliError::solver)?;
    let half = args.half_width.unwrap_or(1.5 * ep.lambda_c.im.abs());
    let cmp = compare_reduction(
        pencil,
        &eff,
        pair,
        (center - half, center + half),
        args.steps,
        tol,
    )
    .map_err(CliError::solver)?;
    let (plus, minus) = predict_ep(&eff).map_err(CliError::solver)?;
    let p = eff.params;
    let report = ReduceReport {
        eps: [p.eps1, p.eps2],
        omega: [p.omega1, p.omega2],
        phi: p.phi,
        lambda_ref,
        pair,
        lambda_c: ep.lambda_c,
        predicted_ep: [plus.into(), minus.into()],
        max_deviation: cmp.max_deviation,
    };
    let path = write_json(out, "reduce.json", &report)?;
    Ok(format!(
        "reduce: pair {pair:?} at {center:.6}, predicted {plus:.6} / {minus:.6}, max deviation {:.3e}; wrote {}",
        cmp.max_deviation,
        path.display()
    ))
}

#[derive(Serialize)]
struct ChiralityReport {
    #[serde(with = "complex_json")]
    lambda_c: Complex64,
    #[serde(flatten)]
    result: ChiralityResult,
}

fn cmd_chirality(
    pencil: &MatrixPencil,
    guess: Complex64,
    tol: &Tolerances,
    out: &Path,
) -> Result<String, CliError> {
    let ep = refined(pencil, guess, tol)?;
    let result = chirality(pencil, &ep, tol).map_err(CliError::solver)?;
    let sign = result.sign;
    let deviation = result.max_deviation;
    let path = write_json(
        out,
        "chirality.json",
        &ChiralityReport {
            lambda_c: ep.lambda_c,
            result,
        },
    )?;
    Ok(format!(
        "chirality: EP {:.6} has sign {sign:+}, max deviation {deviation:.3e}; wrote {}",
        ep.lambda_c,
        path.display()
    ))
}
