use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use facet_core::experiments::{self, ExperimentConfig, SEED_ENV};
use facet_core::io::{self, NativeInstanceDocument};
use facet_core::{
    enumerate_bfs, facially_reduce, find_exposing_vector, generate, solve_ipm, solve_simplex,
    validate, DVector, StandardFormLP, FacetError, GeneratorSpec, IpmOptions, Result, SimplexStatus,
};

use crate::{Command, Method};

// Round-trip floats, with -0 printed as 0.
fn num(x: f64) -> String {
    format!("{:?}", x + 0.0)
}

fn vector(v: &DVector<f64>) -> String {
    let parts: Vec<String> = v.iter().map(|x| num(*x)).collect();
    format!("[{}]", parts.join(", "))
}

fn slice(v: &[f64]) -> String {
    vector(&DVector::from_column_slice(v))
}

fn one_based(idx: &[usize]) -> String {
    let parts: Vec<String> = idx.iter().map(|i| (i + 1).to_string()).collect();
    format!("{{{}}}", parts.join(","))
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path)
        .map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())).into())
}

fn load(path: &Path) -> Result<StandardFormLP> {
    Ok(io::parse_instance(&read_text(path)?)?.lp)
}

fn write_or_print(out: &mut dyn Write, path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

/// Runs one subcommand. `Ok` carries the exit code.
pub fn dispatch(cmd: Command, out: &mut dyn Write) -> Result<u8> {
    match cmd {
        Command::Reduce { file, out: target } => reduce(&file, target.as_deref(), out),
        Command::Analyze { file } => analyze(&file, out),
        Command::Enumerate { file } => enumerate(&file, out),
        Command::Generate {
            kind,
            m,
            n,
            r,
            seed,
            out: target,
        } => {
            let seed = match seed {
                Some(s) => s,
                None => match std::env::var(SEED_ENV) {
                    Ok(v) => v.trim().parse().map_err(|_| {
                        FacetError::InvalidConfig(format!("{SEED_ENV}={v:?} is not a u64"))
                    })?,
                    Err(_) => 0,
                },
            };
            let inst = generate(&GeneratorSpec::new(kind.into(), m, n, r, seed))?;
            let text = io::write_native(&io::planted_document(&inst));
            write_or_print(out, target.as_deref(), &text)?;
            Ok(0)
        }
        Command::Solve {
            file,
            method,
            rule,
            variant,
        } => solve(&file, method, rule.into(), variant.into(), out),
        Command::Experiment { config, out: target } => experiment(&config, target.as_deref(), out),
    }
}

fn reduce(file: &Path, target: Option<&Path>, out: &mut dyn Write) -> Result<u8> {
    let lp = load(file)?;
    let red = facially_reduce(&lp)?;
    writeln!(out, "original size: {}x{}", lp.m(), lp.n())?;
    match &red.certificate {
        Some(c) => {
            writeln!(out, "certificate support: {}", one_based(&c.support))?;
            writeln!(out, "certificate y: {}", slice(&c.y))?;
            writeln!(out, "certificate z: {}", slice(&c.z))?;
        }
        None => writeln!(out, "certificate support: none")?,
    }
    writeln!(out, "kept columns: {}", one_based(&red.kept_columns))?;
    writeln!(out, "kept rows: {}", one_based(&red.kept_rows))?;
    writeln!(out, "reduced size: {}x{}", red.m_reduced(), red.n_reduced())?;
    match &red.slater_witness {
        Some(w) => writeln!(out, "slater witness: {}", vector(w))?,
        None => writeln!(out, "slater witness: none")?,
    }
    writeln!(out, "slater verified: {}", red.slater_verified)?;
    writeln!(out, "passes: {}", red.passes)?;
    if let Some(path) = target {
        let reduced = red.reduced_lp(&lp)?;
        fs::write(path, io::write_native(&NativeInstanceDocument::from_lp(&reduced, None)))?;
        eprintln!("wrote reduced instance to {}", path.display());
    }
    Ok(0)
}

fn analyze(file: &Path, out: &mut dyn Write) -> Result<u8> {
    let lp = load(file)?;
    match find_exposing_vector(&lp)? {
        Some(c) => {
            writeln!(out, "verdict: not strictly feasible")?;
            writeln!(out, "exposed coordinates: {}", one_based(&c.support))?;
            writeln!(out, "certificate y: {}", slice(&c.y))?;
            writeln!(out, "certificate z: {}", slice(&c.z))?;
        }
        None => {
            let red = facially_reduce(&lp)?;
            writeln!(out, "verdict: strictly feasible")?;
            match &red.slater_witness {
                Some(w) => writeln!(out, "witness: {}", vector(&red.lift(w)?))?,
                None => writeln!(out, "witness: none")?,
            }
        }
    }
    Ok(0)
}

fn enumerate(file: &Path, out: &mut dyn Write) -> Result<u8> {
    let lp = validate(load(file)?)?;
    let e = enumerate_bfs(&lp)?;
    writeln!(out, "basis\tpoint\tdegree")?;
    for p in &e.entries {
        writeln!(
            out,
            "{}\t{}\t{}",
            p.basis.display_one_based(),
            vector(&p.x),
            p.degeneracy_degree
        )?;
    }
    writeln!(out, "feasible bases: {}", e.entries.len())?;
    writeln!(out, "distinct points: {}", e.distinct_points.len())?;
    writeln!(out, "all degenerate: {}", e.all_degenerate)?;
    Ok(0)
}

fn solve(
    file: &Path,
    method: Method,
    rule: facet_core::PivotRule,
    variant: facet_core::SimplexVariant,
    out: &mut dyn Write,
) -> Result<u8> {
    let lp = load(file)?;
    let start = Instant::now();
    match method {
        Method::Ipm => {
            let res = match solve_ipm(&lp, &IpmOptions::default()) {
                Ok(res) => res,
                Err(FacetError::NumericalBreakdown { last, iterations }) => {
                    eprintln!("normal equations broke down after {iterations} iterations");
                    *last
                }
                Err(e) => return Err(e),
            };
            writeln!(out, "status: {}", if res.converged { "converged" } else { "not converged" })?;
            writeln!(out, "objective: {}", num(res.objective(&lp)))?;
            writeln!(out, "iterations: {}", res.iterations)?;
            writeln!(
                out,
                "kkt: {} {} {}",
                num(res.kkt.primal),
                num(res.kkt.dual),
                num(res.kkt.complementarity)
            )?;
            writeln!(out, "normal matrix condition: {}", num(res.normal_condition))?;
            writeln!(out, "x: {}", vector(&res.x_star))?;
            writeln!(out, "y: {}", vector(&res.y_star))?;
            writeln!(out, "s: {}", vector(&res.s_star))?;
            eprintln!("solve time: {:.3}s", start.elapsed().as_secs_f64());
            Ok(if res.converged { 0 } else { 2 })
        }
        Method::Simplex => {
            let res = solve_simplex(&lp, rule, variant);
            let status = match res.status {
                SimplexStatus::Optimal => "optimal",
                SimplexStatus::Unbounded => "unbounded",
                SimplexStatus::Infeasible => "infeasible",
                SimplexStatus::IterationLimit => "iteration limit",
            };
            writeln!(out, "status: {status}")?;
            if res.status == SimplexStatus::Optimal {
                writeln!(out, "objective: {}", num(res.objective))?;
            }
            writeln!(out, "pivots: {}", res.total_pivots)?;
            writeln!(out, "degenerate pivots: {}", res.degenerate_pivots)?;
            writeln!(out, "degiter percent: {}", num(res.degiter_percent))?;
            if let Some(b) = &res.optimal_basis {
                // The dual variant's basis indexes the columns of [A^T, -A^T, I].
                writeln!(out, "basis: {}", b.display_one_based())?;
            }
            if let Some(x) = &res.x {
                writeln!(out, "x: {}", vector(x))?;
            }
            if let Some(y) = &res.y {
                writeln!(out, "y: {}", vector(y))?;
            }
            eprintln!("solve time: {:.3}s", start.elapsed().as_secs_f64());
            Ok(if res.status == SimplexStatus::IterationLimit { 2 } else { 0 })
        }
    }
}

fn experiment(config: &Path, target: Option<&Path>, out: &mut dyn Write) -> Result<u8> {
    let cfg = ExperimentConfig::from_toml(&read_text(config)?)?;
    let start = Instant::now();
    let rows = experiments::run(&cfg)?;
    eprintln!(
        "{} protocol: {} rows in {:.2}s",
        cfg.protocol.tag(),
        rows.len(),
        start.elapsed().as_secs_f64()
    );
    let text = experiments::report_to_string(&rows)?;
    let path = target.map(Path::to_path_buf).or_else(|| cfg.output.as_ref().map(Into::into));
    write_or_print(out, path.as_deref(), &text)?;
    let failures = experiments::assertion_failures(&rows);
    if !failures.is_empty() {
        for row in &failures {
            eprintln!(
                "assertion failure: instance {} seed {:?} ({})",
                row.instance, row.seed, row.status
            );
        }
        return Ok(3);
    }
    Ok(0)
}
