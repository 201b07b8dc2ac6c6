//! `solve` and `convergence`.

use std::fs;
use std::io::Write;

use obstacle_dg::metrics::sci3;

use crate::config::RunConfig;
use crate::error::CliError;

fn echo_lines(pairs: &[(String, String)]) -> String {
    pairs.iter().map(|(k, v)| format!("# {k} = {v}\n")).collect()
}

fn write_file(path: &str, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

/// Parses `80,160,320`; must be positive and strictly ascending.
pub fn parse_grids(raw: &str) -> Result<Vec<usize>, CliError> {
    let grids = raw
        .split(',')
        .map(|s| s.trim().parse::<usize>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::validation("grids", format!("`{raw}`: {e}")))?;
    if grids.is_empty() || grids[0] == 0 || grids.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CliError::validation("grids", format!("`{raw}` must be positive and strictly ascending")));
    }
    Ok(grids)
}

/// One run; prints the echoed config and a summary line, writes the dump.
pub fn solve<W: Write>(cfg: &RunConfig, mut out: W) -> Result<(), CliError> {
    let echo = cfg.echo();
    let (summary, dump) = if cfg.dimension == 1 {
        let study = cfg.study_1d()?;
        let run = study.run(cfg.n)?;
        let e = run.errors.expect("oracle configured");
        let mut dump = echo_lines(&echo).into_bytes();
        run.solution
            .write_csv(&mut dump, cfg.dump_per_cell)
            .map_err(|e| CliError::Runtime(e.to_string()))?;
        let line = format!(
            "n={} time_steps={} dt={} L1={} L2={} Linf={}",
            cfg.n,
            run.plan.steps,
            sci3(run.plan.dt),
            sci3(e.l1),
            sci3(e.l2),
            sci3(e.linf)
        );
        (line, dump)
    } else {
        let study = cfg.study_2d()?;
        let (nx, ny) = cfg.grid_2d(cfg.n);
        let run = study.run(nx, ny)?;
        let e = run.errors.expect("oracle configured");
        let mut dump = echo_lines(&echo).into_bytes();
        run.solution
            .write_csv(&mut dump, cfg.dump_per_cell)
            .map_err(|e| CliError::Runtime(e.to_string()))?;
        let line = format!(
            "nx={nx} ny={ny} time_steps={} dt={} L1={} L2={} Linf={}",
            run.plan.steps,
            sci3(run.plan.dt),
            sci3(e.l1),
            sci3(e.l2),
            sci3(e.linf)
        );
        (line, dump)
    };
    if let Some(path) = &cfg.output.solution {
        write_file(path, &dump)?;
    }
    let text = format!("{}{summary}\n", echo_lines(&echo));
    out.write_all(text.as_bytes()).map_err(|e| CliError::io("stdout", e))
}

/// Convergence table over `grids`; to `output.table` when set, else `out`.
pub fn convergence<W: Write>(cfg: &RunConfig, grids: &[usize], mut out: W) -> Result<(), CliError> {
    if cfg.dimension == 2 && (cfg.nx.is_some() || cfg.ny.is_some()) {
        return Err(CliError::validation("nx", "convergence studies use square n x n grids".into()));
    }
    let report = if cfg.dimension == 1 {
        cfg.study_1d()?.convergence(grids)?
    } else {
        cfg.study_2d()?.convergence(grids)?
    };
    let mut echo = cfg.echo();
    echo.retain(|(k, _)| k != "n");
    let list = grids.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(",");
    echo.push(("grids".into(), list));
    echo.sort();
    let mut buf = Vec::new();
    report
        .write_csv(&mut buf, &echo)
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    match &cfg.output.table {
        Some(path) => write_file(path, &buf),
        None => out.write_all(&buf).map_err(|e| CliError::io("stdout", e)),
    }
}
