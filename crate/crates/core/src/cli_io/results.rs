//! Result bundles on disk: `summary.txt`, `config.txt`, `trajectory.csv`,
//! `loops.csv` and one CSV per hysteresis run. Reals are written with 17
//! significant digits so a read-back is bit-exact.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

use super::config::{ConfigError, RunConfig, parse_config};
use crate::experiments::{HysteresisPoint, HysteresisRun};
use crate::lyapunov::LyapunovSample;

pub const SCHEMA_VERSION: u32 = 1;

const TRAJECTORY_HEADER: [&str; 6] = ["t", "V", "dVdt_est", "bound", "err_norm", "cross_h_norm_sq"];
const RUN_HEADER: [&str; 3] = ["t", "uhat", "m_out"];
const LOOPS_HEADER: [&str; 4] = ["omega", "component", "uhat", "m_out"];

#[derive(Debug, Error)]
pub enum ResultsError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("config.txt: {0}")]
    Config(#[from] ConfigError),
}

/// Outcome of a stabilization run, as recorded in the summary.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilizationSummary {
    pub converged: bool,
    pub t_converge: Option<f64>,
    pub violations: usize,
    pub max_norm_deviation: f64,
    pub steps: usize,
    pub dt: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultBundle {
    pub config: RunConfig,
    pub stabilization: Option<StabilizationSummary>,
    pub trajectory: Vec<LyapunovSample>,
    pub hysteresis: Vec<HysteresisRun>,
}

fn real(x: f64) -> String {
    format!("{x:.16e}")
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> ResultsError + '_ {
    move |source| ResultsError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> ResultsError + '_ {
    move |source| ResultsError::Csv {
        path: path.to_path_buf(),
        source,
    }
}

fn write_csv<const W: usize>(
    path: &Path,
    header: [&str; W],
    rows: impl IntoIterator<Item = [String; W]>,
) -> Result<(), ResultsError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(header).map_err(csv_err(path))?;
    for row in rows {
        w.write_record(&row).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

fn read_csv(path: &Path, width: usize) -> Result<Vec<Vec<f64>>, ResultsError> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let mut rows = Vec::new();
    for record in r.records() {
        let record = record.map_err(csv_err(path))?;
        let row: Option<Vec<f64>> = record.iter().map(|s| s.parse().ok()).collect();
        match row {
            Some(row) if row.len() == width => rows.push(row),
            _ => {
                return Err(ResultsError::Format {
                    path: path.to_path_buf(),
                    message: format!("bad row {:?}", record),
                });
            }
        }
    }
    Ok(rows)
}

/// File name of one hysteresis series. Runs of a multi-component sweep also
/// carry the component.
pub fn run_file_name(run: &HysteresisRun, multi_component: bool) -> String {
    if multi_component {
        format!("hysteresis_m{}_{}.csv", run.component, run.omega)
    } else {
        format!("hysteresis_{}.csv", run.omega)
    }
}

fn multi_component(runs: &[HysteresisRun]) -> bool {
    runs.iter().any(|r| r.component != runs[0].component)
}

fn summary_text(bundle: &ResultBundle) -> String {
    let mut lines = vec![
        format!("schema_version = {SCHEMA_VERSION}"),
        format!("experiment = {}", bundle.config.experiment.name()),
    ];
    if let Some(s) = &bundle.stabilization {
        lines.push(format!("stabilize.converged = {}", s.converged));
        lines.push(format!(
            "stabilize.t_converge = {}",
            s.t_converge.map_or("none".to_string(), real)
        ));
        lines.push(format!("stabilize.violations = {}", s.violations));
        lines.push(format!(
            "stabilize.max_norm_deviation = {}",
            real(s.max_norm_deviation)
        ));
        lines.push(format!("stabilize.steps = {}", s.steps));
        lines.push(format!("stabilize.dt = {}", real(s.dt)));
        if let (Some(first), Some(last)) = (bundle.trajectory.first(), bundle.trajectory.last()) {
            lines.push(format!("stabilize.v_initial = {}", real(first.v)));
            lines.push(format!("stabilize.v_final = {}", real(last.v)));
            lines.push(format!("stabilize.err_final = {}", real(last.err_norm)));
        }
    }
    let multi = multi_component(&bundle.hysteresis);
    lines.push(format!("runs = {}", bundle.hysteresis.len()));
    for (i, run) in bundle.hysteresis.iter().enumerate() {
        lines.push(format!("run.{i}.file = {}", run_file_name(run, multi)));
        lines.push(format!("run.{i}.omega = {}", real(run.omega)));
        lines.push(format!("run.{i}.component = {}", run.component));
        lines.push(format!("run.{i}.xstar = {}", real(run.xstar)));
        lines.push(format!("run.{i}.amplitude = {}", real(run.amplitude)));
        lines.push(format!(
            "run.{i}.samples_per_period = {}",
            run.samples_per_period
        ));
        lines.push(format!("run.{i}.loop_area = {}", real(run.loop_area)));
        lines.push(format!("run.{i}.closed = {}", run.closed));
    }
    lines.join("\n") + "\n"
}

/// Writes `bundle` into `dir` (created if missing) and returns the files written.
pub fn write_results(bundle: &ResultBundle, dir: &Path) -> Result<Vec<PathBuf>, ResultsError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut written = Vec::new();

    let path = dir.join("summary.txt");
    fs::write(&path, summary_text(bundle)).map_err(io_err(&path))?;
    written.push(path);

    let path = dir.join("config.txt");
    fs::write(&path, bundle.config.to_text()).map_err(io_err(&path))?;
    written.push(path);

    let path = dir.join("trajectory.csv");
    write_csv(
        &path,
        TRAJECTORY_HEADER,
        bundle
            .trajectory
            .iter()
            .map(|s| [s.t, s.v, s.dvdt_est, s.bound, s.err_norm, s.cross_h_norm_sq].map(real)),
    )?;
    written.push(path);

    let multi = multi_component(&bundle.hysteresis);
    for run in &bundle.hysteresis {
        let path = dir.join(run_file_name(run, multi));
        write_csv(
            &path,
            RUN_HEADER,
            run.series.iter().map(|p| [p.t, p.uhat, p.m_out].map(real)),
        )?;
        written.push(path);
    }

    let path = dir.join("loops.csv");
    write_csv(
        &path,
        LOOPS_HEADER,
        bundle.hysteresis.iter().flat_map(|run| {
            run.final_period().iter().map(move |p| {
                [
                    real(run.omega),
                    run.component.to_string(),
                    real(p.uhat),
                    real(p.m_out),
                ]
            })
        }),
    )?;
    written.push(path);
    Ok(written)
}

struct Summary {
    path: PathBuf,
    entries: Vec<(String, String)>,
}

impl Summary {
    fn get(&self, key: &str) -> Result<&str, ResultsError> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
            .ok_or_else(|| self.bad(format!("missing `{key}`")))
    }

    fn has(&self, key: &str) -> bool {
        self.entries.iter().any(|(k, _)| k == key)
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<T, ResultsError> {
        let v = self.get(key)?;
        v.parse()
            .map_err(|_| self.bad(format!("bad value `{v}` for `{key}`")))
    }

    fn bad(&self, message: String) -> ResultsError {
        ResultsError::Format {
            path: self.path.clone(),
            message,
        }
    }
}

/// Reads back a bundle written by [`write_results`].
pub fn read_results(dir: &Path) -> Result<ResultBundle, ResultsError> {
    let path = dir.join("config.txt");
    let text = fs::read_to_string(&path).map_err(io_err(&path))?;
    let config = parse_config(&text)?.config;

    let path = dir.join("summary.txt");
    let text = fs::read_to_string(&path).map_err(io_err(&path))?;
    let summary = Summary {
        entries: text
            .lines()
            .filter_map(|l| l.split_once('='))
            .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
            .collect(),
        path,
    };
    let version: u32 = summary.parse("schema_version")?;
    if version != SCHEMA_VERSION {
        return Err(summary.bad(format!("unsupported schema_version {version}")));
    }

    let stabilization = if summary.has("stabilize.converged") {
        let t_converge = match summary.get("stabilize.t_converge")? {
            "none" => None,
            _ => Some(summary.parse("stabilize.t_converge")?),
        };
        Some(StabilizationSummary {
            converged: summary.parse("stabilize.converged")?,
            t_converge,
            violations: summary.parse("stabilize.violations")?,
            max_norm_deviation: summary.parse("stabilize.max_norm_deviation")?,
            steps: summary.parse("stabilize.steps")?,
            dt: summary.parse("stabilize.dt")?,
        })
    } else {
        None
    };

    let trajectory = read_csv(&dir.join("trajectory.csv"), TRAJECTORY_HEADER.len())?
        .into_iter()
        .map(|row| LyapunovSample {
            t: row[0],
            v: row[1],
            dvdt_est: row[2],
            bound: row[3],
            err_norm: row[4],
            cross_h_norm_sq: row[5],
        })
        .collect();

    let runs: usize = summary.parse("runs")?;
    let mut hysteresis = Vec::with_capacity(runs);
    for i in 0..runs {
        let file = summary.get(&format!("run.{i}.file"))?;
        let series = read_csv(&dir.join(file), RUN_HEADER.len())?
            .into_iter()
            .map(|row| HysteresisPoint {
                t: row[0],
                uhat: row[1],
                m_out: row[2],
            })
            .collect();
        hysteresis.push(HysteresisRun {
            omega: summary.parse(&format!("run.{i}.omega"))?,
            component: summary.parse(&format!("run.{i}.component"))?,
            xstar: summary.parse(&format!("run.{i}.xstar"))?,
            amplitude: summary.parse(&format!("run.{i}.amplitude"))?,
            samples_per_period: summary.parse(&format!("run.{i}.samples_per_period"))?,
            series,
            loop_area: summary.parse(&format!("run.{i}.loop_area"))?,
            closed: summary.parse(&format!("run.{i}.closed"))?,
        });
    }

    Ok(ResultBundle {
        config,
        stabilization,
        trajectory,
        hysteresis,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample(t: f64) -> LyapunovSample {
        LyapunovSample {
            t,
            v: 0.1 / 3.0 + t,
            dvdt_est: -1.0 / 7.0,
            bound: -2.0f64.sqrt(),
            err_norm: 1e-300,
            cross_h_norm_sq: f64::MIN_POSITIVE,
        }
    }

    fn run(omega: f64, component: usize) -> HysteresisRun {
        let series = (0..=6)
            .map(|i| HysteresisPoint {
                t: i as f64 / 3.0,
                uhat: (i as f64).cos() * 0.01,
                m_out: 1.0 - (i as f64) * 1e-17,
            })
            .collect();
        HysteresisRun {
            omega,
            component,
            xstar: 1.0,
            amplitude: 0.01,
            samples_per_period: 3,
            series,
            loop_area: 1.0 / 3.0,
            closed: false,
        }
    }

    #[test]
    fn empty_trajectory_is_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let bundle = ResultBundle {
            config: RunConfig::default(),
            stabilization: None,
            trajectory: Vec::new(),
            hysteresis: Vec::new(),
        };
        write_results(&bundle, dir.path()).unwrap();
        let text = fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
        assert_eq!(text, "t,V,dVdt_est,bound,err_norm,cross_h_norm_sq\n");
        assert_eq!(read_results(dir.path()).unwrap(), bundle);
    }

    #[test]
    fn full_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let bundle = ResultBundle {
            config: parse_config("experiment = sweep\ngrid.n = 16")
                .unwrap()
                .config,
            stabilization: Some(StabilizationSummary {
                converged: true,
                t_converge: Some(12.5),
                violations: 0,
                max_norm_deviation: 2.2e-16,
                steps: 1000,
                dt: 1.0 / 3.0,
            }),
            trajectory: (0..5).map(|i| sample(i as f64 * 0.1)).collect(),
            hysteresis: vec![run(1.0, 1), run(0.1, 2)],
        };
        let files = write_results(&bundle, dir.path()).unwrap();
        assert!(files.iter().any(|p| p.ends_with("hysteresis_m2_0.1.csv")));
        assert_eq!(read_results(dir.path()).unwrap(), bundle);

        let summary = fs::read_to_string(dir.path().join("summary.txt")).unwrap();
        assert!(summary.starts_with("schema_version = 1\n"));
        let loops = fs::read_to_string(dir.path().join("loops.csv")).unwrap();
        assert_eq!(loops.lines().count(), 1 + 2 * 4);
    }

    #[test]
    fn single_component_names() {
        assert_eq!(run_file_name(&run(0.01, 1), false), "hysteresis_0.01.csv");
    }

    proptest! {
        #[test]
        fn reals_survive_text(x in prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO) {
            let back: f64 = real(x).parse().unwrap();
            prop_assert_eq!(back.to_bits(), x.to_bits());
        }
    }
}
