//! Seeded sweeps over environments, data amounts and candidate horizons,
//! with resumable CSV output.

use std::collections::BTreeMap;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::demos::sample_pairs;
use crate::env::{make_gridworld, make_objectworld, Environment, GridSpec, ObjectworldSpec, GAMMA0};
use crate::error::{Error, Result};
use crate::io::{fmt_real, parse_real};
use crate::lp::LpIrlConfig;
use crate::maxent::MaxEntConfig;
use crate::select::{cross_validate, oracle_select, Candidate, CandidateGrid, LearnerKind, Scenario, SelectionConfig};
use crate::seed;

pub const RESULTS_FILE: &str = "results.csv";
pub const SELECTIONS_FILE: &str = "selections.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const TIMINGS_FILE: &str = "timings.csv";
const RESULTS_PARTIAL: &str = "results.partial.csv";
const SELECTIONS_PARTIAL: &str = "selections.partial.csv";

const RESULTS_HEADER: &str =
    "task,learner,env_index,env_seed,data_percent,n_pairs,candidate,validation_errors,full_state_errors,feasible";
const SELECTIONS_HEADER: &str =
    "task,learner,env_index,env_seed,data_percent,n_pairs,cv_choice,oracle_choice,cv_errors,oracle_errors,reference_errors";
const SUMMARY_HEADER: &str =
    "task,learner,data_percent,candidate,mean_full_errors,std_full_errors,mean_val_errors,std_val_errors,n";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    GridworldSimple,
    GridworldHard,
    ObjectworldLinear,
    ObjectworldNonlinear,
}

impl Task {
    pub const ALL: [Task; 4] = [Task::GridworldSimple, Task::GridworldHard, Task::ObjectworldLinear, Task::ObjectworldNonlinear];

    pub fn name(self) -> &'static str {
        match self {
            Task::GridworldSimple => "gridworld-simple",
            Task::GridworldHard => "gridworld-hard",
            Task::ObjectworldLinear => "objectworld-linear",
            Task::ObjectworldNonlinear => "objectworld-nonlinear",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Task::ALL.into_iter().find(|t| t.name() == name)
    }

    /// Position in [`Task::ALL`]; feeds environment seed derivation.
    pub fn index(self) -> u32 {
        Task::ALL.iter().position(|&t| t == self).unwrap() as u32
    }

    pub fn build(self, seed: u64) -> Result<Environment> {
        match self {
            Task::GridworldSimple => make_gridworld(&GridSpec::simple(seed)),
            Task::GridworldHard => make_gridworld(&GridSpec::hard(seed)),
            Task::ObjectworldLinear => make_objectworld(&ObjectworldSpec::linear(seed)),
            Task::ObjectworldNonlinear => make_objectworld(&ObjectworldSpec::nonlinear(seed)),
        }
    }
}

/// Sweep settings, loadable from a flat TOML file. Missing keys take the
/// defaults.
#[derive(Clone, Debug, PartialEq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub task: Task,
    pub learner: LearnerKind,
    pub data_percentages: Vec<f64>,
    /// Number of candidates `M`.
    pub grid_size: usize,
    pub gamma0: f64,
    pub horizon0: usize,
    pub n_environments: usize,
    pub base_seed: u64,
    pub train_fraction: f64,
    pub lp_margin: Option<f64>,
    pub maxent_epochs: usize,
    pub maxent_learning_rate: f64,
    pub maxent_restarts: usize,
    pub out_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let maxent = MaxEntConfig::default();
        ExperimentConfig {
            task: Task::GridworldSimple,
            learner: LearnerKind::Lp,
            data_percentages: vec![10.0, 30.0, 50.0, 100.0, 200.0],
            grid_size: 20,
            gamma0: GAMMA0,
            horizon0: 20,
            n_environments: 10,
            base_seed: 0,
            train_fraction: 0.8,
            lp_margin: None,
            maxent_epochs: maxent.epochs,
            maxent_learning_rate: maxent.learning_rate,
            maxent_restarts: maxent.restarts,
            out_dir: PathBuf::from("out"),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: ExperimentConfig = toml::from_str(text).map_err(|e| Error::invalid(format!("config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.data_percentages.is_empty() || self.data_percentages.iter().any(|&p| !(p > 0.0 && p.is_finite())) {
            return Err(Error::invalid("data percentages must be positive"));
        }
        if self.n_environments == 0 || self.grid_size == 0 || self.horizon0 == 0 {
            return Err(Error::invalid("n_environments, grid_size and horizon0 must be at least 1"));
        }
        if !(self.gamma0 > 0.0 && self.gamma0 < 1.0) {
            return Err(Error::invalid("gamma0 must lie in (0, 1)"));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::invalid("train_fraction must lie in (0, 1)"));
        }
        if self.lp_margin.is_some_and(|m| !(m > 0.0)) {
            return Err(Error::invalid("lp_margin must be positive"));
        }
        if self.maxent_epochs == 0 || self.maxent_restarts == 0 || !(self.maxent_learning_rate > 0.0) {
            return Err(Error::invalid("MaxEnt epochs, restarts and learning rate must be positive"));
        }
        Ok(())
    }

    pub fn selection_config(&self) -> SelectionConfig {
        SelectionConfig {
            learner: self.learner,
            lp: LpIrlConfig { margin: self.lp_margin },
            maxent: MaxEntConfig {
                epochs: self.maxent_epochs,
                learning_rate: self.maxent_learning_rate,
                restarts: self.maxent_restarts,
            },
            train_fraction: self.train_fraction,
        }
    }

    /// The cross-validation grid.
    pub fn grid(&self) -> Result<CandidateGrid> {
        match self.learner {
            LearnerKind::Lp => CandidateGrid::discount_even(self.grid_size, self.gamma0),
            LearnerKind::MaxEnt => CandidateGrid::horizon_range(self.grid_size, self.horizon0),
        }
    }

    /// The ground-truth discount or horizon.
    pub fn reference(&self) -> Candidate {
        match self.learner {
            LearnerKind::Lp => Candidate::Discount(self.gamma0),
            LearnerKind::MaxEnt => Candidate::Horizon(self.horizon0),
        }
    }

    pub fn env_seed(&self, env_index: usize) -> u64 {
        seed::env_seed(self.base_seed, self.task.index(), env_index as u32)
    }
}

/// `N = round(K% · |S| / 100)`.
pub fn demo_count(percent: f64, n_states: usize) -> usize {
    (percent * n_states as f64 / 100.0).round() as usize
}

fn percent_stream(percent: f64) -> u64 {
    percent.to_bits()
}

/// One candidate of one (environment, data amount) cell.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentRecord {
    pub task: Task,
    pub learner: LearnerKind,
    pub env_index: usize,
    pub env_seed: u64,
    pub data_percent: f64,
    pub n_pairs: usize,
    pub candidate: Candidate,
    /// Held-out errors of the model trained on the training split.
    pub validation_errors: usize,
    /// All-state errors of the model trained on all demonstrations.
    pub full_state_errors: usize,
    pub feasible: bool,
}

/// Choices made in one cell and the all-data errors at each.
#[derive(Clone, Debug, PartialEq)]
pub struct SelectionRecord {
    pub task: Task,
    pub learner: LearnerKind,
    pub env_index: usize,
    pub env_seed: u64,
    pub data_percent: f64,
    pub n_pairs: usize,
    pub cv_choice: Candidate,
    /// Chosen over the grid plus the reference.
    pub oracle_choice: Candidate,
    pub cv_errors: usize,
    pub oracle_errors: usize,
    /// Errors at the ground-truth discount or horizon.
    pub reference_errors: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CellOutcome {
    pub records: Vec<ExperimentRecord>,
    pub selection: SelectionRecord,
    pub wall_time_ms: u128,
}

/// Run cross-validation and the oracle for one environment and data amount.
pub fn run_cell(config: &ExperimentConfig, env_index: usize, data_percent: f64) -> Result<CellOutcome> {
    let start = Instant::now();
    let env_seed = config.env_seed(env_index);
    let env = config.task.build(env_seed)?;
    let scenario = Scenario::from_env(&env);
    let n = env.n_states();
    let n_pairs = demo_count(data_percent, n);
    let grid = config.grid()?;
    let reference = config.reference();
    let full_grid = grid.with(reference)?;
    let record = |candidate, validation_errors, full_state_errors, feasible| ExperimentRecord {
        task: config.task,
        learner: config.learner,
        env_index,
        env_seed,
        data_percent,
        n_pairs,
        candidate,
        validation_errors,
        full_state_errors,
        feasible,
    };
    let selection = |cv_choice, oracle_choice, cv_errors, oracle_errors, reference_errors| SelectionRecord {
        task: config.task,
        learner: config.learner,
        env_index,
        env_seed,
        data_percent,
        n_pairs,
        cv_choice,
        oracle_choice,
        cv_errors,
        oracle_errors,
        reference_errors,
    };

    if n_pairs == 0 {
        let records = grid.candidates().iter().map(|&c| record(c, 0, n, false)).collect();
        let first = grid.candidates()[0];
        return Ok(CellOutcome {
            records,
            selection: selection(first, first, n, n, n),
            wall_time_ms: start.elapsed().as_millis(),
        });
    }

    let cell_seed = seed::derive(env_seed, percent_stream(data_percent));
    let demos = sample_pairs(&env.expert, env.mdp.n_actions(), n_pairs, seed::derive(cell_seed, 0))?;
    let sel_config = config.selection_config();
    let select_seed = seed::derive(cell_seed, 1);
    let cv = cross_validate(&scenario, &demos, &grid, &sel_config, select_seed)?;
    let oracle = oracle_select(&scenario, &demos, &full_grid, &sel_config, select_seed)?;
    let all_data_errors = |c: Candidate| {
        let i = oracle.candidates.iter().position(|&x| x == c).expect("grid is a subset of the oracle grid");
        (oracle.full_errors[i], oracle.feasible[i])
    };
    let records = grid
        .candidates()
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let (full, feasible) = all_data_errors(c);
            record(c, cv.validation_errors[i], full, feasible && cv.feasible[i])
        })
        .collect();
    let chosen = selection(
        cv.chosen,
        oracle.chosen,
        all_data_errors(cv.chosen).0,
        oracle.full_errors[oracle.chosen_index],
        all_data_errors(reference).0,
    );
    Ok(CellOutcome { records, selection: chosen, wall_time_ms: start.elapsed().as_millis() })
}

fn fmt_candidate(c: Candidate) -> String {
    c.to_string()
}

fn parse_candidate(learner: LearnerKind, text: &str) -> Option<Candidate> {
    match learner {
        LearnerKind::Lp => parse_real(text).map(Candidate::Discount),
        LearnerKind::MaxEnt => text.trim().parse().ok().map(Candidate::Horizon),
    }
}

impl ExperimentRecord {
    fn fields(&self) -> Vec<String> {
        vec![
            self.task.name().to_string(),
            self.learner.name().to_string(),
            self.env_index.to_string(),
            self.env_seed.to_string(),
            fmt_real(self.data_percent),
            self.n_pairs.to_string(),
            fmt_candidate(self.candidate),
            self.validation_errors.to_string(),
            self.full_state_errors.to_string(),
            self.feasible.to_string(),
        ]
    }

    fn parse(row: &csv::StringRecord) -> Option<Self> {
        let learner = LearnerKind::from_name(row.get(1)?)?;
        Some(ExperimentRecord {
            task: Task::from_name(row.get(0)?)?,
            learner,
            env_index: row.get(2)?.parse().ok()?,
            env_seed: row.get(3)?.parse().ok()?,
            data_percent: parse_real(row.get(4)?)?,
            n_pairs: row.get(5)?.parse().ok()?,
            candidate: parse_candidate(learner, row.get(6)?)?,
            validation_errors: row.get(7)?.parse().ok()?,
            full_state_errors: row.get(8)?.parse().ok()?,
            feasible: row.get(9)?.parse().ok()?,
        })
    }

    fn key(&self) -> (usize, u64, u64) {
        (self.env_index, self.data_percent.to_bits(), self.candidate.value().to_bits())
    }
}

impl SelectionRecord {
    fn fields(&self) -> Vec<String> {
        vec![
            self.task.name().to_string(),
            self.learner.name().to_string(),
            self.env_index.to_string(),
            self.env_seed.to_string(),
            fmt_real(self.data_percent),
            self.n_pairs.to_string(),
            fmt_candidate(self.cv_choice),
            fmt_candidate(self.oracle_choice),
            self.cv_errors.to_string(),
            self.oracle_errors.to_string(),
            self.reference_errors.to_string(),
        ]
    }

    fn parse(row: &csv::StringRecord) -> Option<Self> {
        let learner = LearnerKind::from_name(row.get(1)?)?;
        Some(SelectionRecord {
            task: Task::from_name(row.get(0)?)?,
            learner,
            env_index: row.get(2)?.parse().ok()?,
            env_seed: row.get(3)?.parse().ok()?,
            data_percent: parse_real(row.get(4)?)?,
            n_pairs: row.get(5)?.parse().ok()?,
            cv_choice: parse_candidate(learner, row.get(6)?)?,
            oracle_choice: parse_candidate(learner, row.get(7)?)?,
            cv_errors: row.get(8)?.parse().ok()?,
            oracle_errors: row.get(9)?.parse().ok()?,
            reference_errors: row.get(10)?.parse().ok()?,
        })
    }

    fn key(&self) -> (usize, u64) {
        (self.env_index, self.data_percent.to_bits())
    }
}

/// Numeric sort key of a positive float (bit order equals value order).
fn sort_records(records: &mut [ExperimentRecord]) {
    records.sort_by(|a, b| {
        (a.env_index, a.data_percent, a.candidate.value())
            .partial_cmp(&(b.env_index, b.data_percent, b.candidate.value()))
            .unwrap()
    });
}

fn sort_selections(rows: &mut [SelectionRecord]) {
    rows.sort_by(|a, b| (a.env_index, a.data_percent).partial_cmp(&(b.env_index, b.data_percent)).unwrap());
}

fn read_rows<T>(path: &Path, header: &str, parse: impl Fn(&csv::StringRecord) -> Option<T>) -> Result<Vec<T>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_path(path)?;
    let found = reader.headers()?.iter().collect::<Vec<_>>().join(",");
    if found != header {
        return Err(Error::Parse { line: 1, msg: format!("unexpected header in {}", path.display()) });
    }
    let mut out = Vec::new();
    for (i, row) in reader.records().enumerate() {
        // a torn last line from an interrupted run is skipped
        match row.ok().as_ref().and_then(&parse) {
            Some(r) => out.push(r),
            None => log::warn!("skipping unreadable row {} of {}", i + 2, path.display()),
        }
    }
    Ok(out)
}

pub fn read_results_csv(path: &Path) -> Result<Vec<ExperimentRecord>> {
    read_rows(path, RESULTS_HEADER, ExperimentRecord::parse)
}

pub fn read_selections_csv(path: &Path) -> Result<Vec<SelectionRecord>> {
    read_rows(path, SELECTIONS_HEADER, SelectionRecord::parse)
}

fn write_rows<'a>(path: &Path, header: &str, rows: impl Iterator<Item = Vec<String>> + 'a) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header.split(','))?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_results_csv(path: &Path, records: &[ExperimentRecord]) -> Result<()> {
    write_rows(path, RESULTS_HEADER, records.iter().map(|r| r.fields()))
}

pub fn write_selections_csv(path: &Path, rows: &[SelectionRecord]) -> Result<()> {
    write_rows(path, SELECTIONS_HEADER, rows.iter().map(|r| r.fields()))
}

/// Appends CSV rows to a file, writing the header when the file is new.
struct Appender {
    file: fs::File,
}

impl Appender {
    fn open(path: &Path, header: &str) -> Result<Self> {
        let fresh = !path.exists();
        let mut file = OpenOptions::new().create(true).append(true).open(path)?;
        if fresh {
            writeln!(file, "{header}")?;
        }
        Ok(Appender { file })
    }

    fn push(&mut self, fields: &[String]) -> Result<()> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
        w.write_record(fields)?;
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        self.file.write_all(&bytes)?;
        self.file.flush()?;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepOutput {
    pub records: Vec<ExperimentRecord>,
    pub selections: Vec<SelectionRecord>,
    /// Cells computed by this call (the rest were resumed from disk).
    pub cells_run: usize,
}

/// Run every (environment, data amount) cell, appending each finished
/// cell to partial files in `out_dir` so an interrupted sweep resumes
/// where it stopped. On completion writes the sorted `results.csv`,
/// `selections.csv` and `summary.csv`; per-cell wall times go to
/// `timings.csv`. `max_cells` stops early after that many new cells.
pub fn run_sweep_limited(config: &ExperimentConfig, max_cells: Option<usize>) -> Result<Option<SweepOutput>> {
    config.validate()?;
    let dir = &config.out_dir;
    fs::create_dir_all(dir)?;
    let results_partial = dir.join(RESULTS_PARTIAL);
    let selections_partial = dir.join(SELECTIONS_PARTIAL);

    let mut records: BTreeMap<(usize, u64, u64), ExperimentRecord> = BTreeMap::new();
    let mut selections: BTreeMap<(usize, u64), SelectionRecord> = BTreeMap::new();
    if selections_partial.exists() {
        for s in read_selections_csv(&selections_partial)? {
            if s.task == config.task && s.learner == config.learner {
                selections.insert(s.key(), s);
            }
        }
    }
    if results_partial.exists() {
        for r in read_results_csv(&results_partial)? {
            // only cells whose selection row landed are complete
            if selections.contains_key(&(r.env_index, r.data_percent.to_bits())) {
                records.insert(r.key(), r);
            }
        }
    }
    if selections.is_empty() && dir.join(TIMINGS_FILE).exists() {
        fs::remove_file(dir.join(TIMINGS_FILE))?;
    }

    let mut results_out = Appender::open(&results_partial, RESULTS_HEADER)?;
    let mut selections_out = Appender::open(&selections_partial, SELECTIONS_HEADER)?;
    let mut timings_out = Appender::open(&dir.join(TIMINGS_FILE), "task,learner,env_index,data_percent,wall_time_ms")?;
    let mut cells_run = 0;
    for env_index in 0..config.n_environments {
        for &pct in &config.data_percentages {
            if selections.contains_key(&(env_index, pct.to_bits())) {
                continue;
            }
            if max_cells.is_some_and(|m| cells_run >= m) {
                return Ok(None);
            }
            let cell = run_cell(config, env_index, pct)?;
            log::info!(
                "{} env {env_index} at {pct}%: cv {} oracle {} in {} ms",
                config.task.name(),
                cell.selection.cv_choice,
                cell.selection.oracle_choice,
                cell.wall_time_ms
            );
            for r in &cell.records {
                results_out.push(&r.fields())?;
                records.insert(r.key(), r.clone());
            }
            selections_out.push(&cell.selection.fields())?;
            timings_out.push(&[
                config.task.name().to_string(),
                config.learner.name().to_string(),
                env_index.to_string(),
                fmt_real(pct),
                cell.wall_time_ms.to_string(),
            ])?;
            selections.insert(cell.selection.key(), cell.selection);
            cells_run += 1;
        }
    }

    let mut records: Vec<ExperimentRecord> = records.into_values().collect();
    let mut selections: Vec<SelectionRecord> = selections.into_values().collect();
    sort_records(&mut records);
    sort_selections(&mut selections);
    write_results_csv(&dir.join(RESULTS_FILE), &records)?;
    write_selections_csv(&dir.join(SELECTIONS_FILE), &selections)?;
    emit_summary_csv(&dir.join(SUMMARY_FILE), &summarize(&records))?;
    drop(results_out);
    drop(selections_out);
    fs::remove_file(&results_partial)?;
    fs::remove_file(&selections_partial)?;
    Ok(Some(SweepOutput { records, selections, cells_run }))
}

/// [`run_sweep_limited`] without a cell limit.
pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepOutput> {
    Ok(run_sweep_limited(config, None)?.expect("unlimited sweeps always finish"))
}

/// Mean and standard deviation over environments for one candidate.
#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub task: Task,
    pub learner: LearnerKind,
    pub data_percent: f64,
    pub candidate: Candidate,
    pub mean_full_errors: f64,
    pub std_full_errors: f64,
    pub mean_val_errors: f64,
    pub std_val_errors: f64,
    pub n: usize,
}

/// Population mean and standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Group by (task, learner, data amount, candidate).
pub fn summarize(records: &[ExperimentRecord]) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<(Task, LearnerKind, u64, u64), Vec<&ExperimentRecord>> = BTreeMap::new();
    for r in records {
        groups.entry((r.task, r.learner, r.data_percent.to_bits(), r.candidate.value().to_bits())).or_default().push(r);
    }
    let mut rows: Vec<SummaryRow> = groups
        .into_values()
        .map(|g| {
            let full: Vec<f64> = g.iter().map(|r| r.full_state_errors as f64).collect();
            let val: Vec<f64> = g.iter().map(|r| r.validation_errors as f64).collect();
            let (mean_full_errors, std_full_errors) = mean_std(&full);
            let (mean_val_errors, std_val_errors) = mean_std(&val);
            SummaryRow {
                task: g[0].task,
                learner: g[0].learner,
                data_percent: g[0].data_percent,
                candidate: g[0].candidate,
                mean_full_errors,
                std_full_errors,
                mean_val_errors,
                std_val_errors,
                n: g.len(),
            }
        })
        .collect();
    rows.sort_by(|a, b| {
        (a.task, a.learner)
            .cmp(&(b.task, b.learner))
            .then(a.data_percent.total_cmp(&b.data_percent))
            .then(a.candidate.value().total_cmp(&b.candidate.value()))
    });
    rows
}

pub fn emit_summary_csv(path: &Path, rows: &[SummaryRow]) -> Result<()> {
    write_rows(
        path,
        SUMMARY_HEADER,
        rows.iter().map(|r| {
            vec![
                r.task.name().to_string(),
                r.learner.name().to_string(),
                fmt_real(r.data_percent),
                fmt_candidate(r.candidate),
                fmt_real(r.mean_full_errors),
                fmt_real(r.std_full_errors),
                fmt_real(r.mean_val_errors),
                fmt_real(r.std_val_errors),
                r.n.to_string(),
            ]
        }),
    )
}

pub fn read_summary_csv(path: &Path) -> Result<Vec<SummaryRow>> {
    read_rows(path, SUMMARY_HEADER, |row| {
        let learner = LearnerKind::from_name(row.get(1)?)?;
        Some(SummaryRow {
            task: Task::from_name(row.get(0)?)?,
            learner,
            data_percent: parse_real(row.get(2)?)?,
            candidate: parse_candidate(learner, row.get(3)?)?,
            mean_full_errors: parse_real(row.get(4)?)?,
            std_full_errors: parse_real(row.get(5)?)?,
            mean_val_errors: parse_real(row.get(6)?)?,
            std_val_errors: parse_real(row.get(7)?)?,
            n: row.get(8)?.parse().ok()?,
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(dir: &Path) -> ExperimentConfig {
        ExperimentConfig {
            data_percentages: vec![30.0],
            grid_size: 3,
            n_environments: 2,
            base_seed: 11,
            out_dir: dir.to_path_buf(),
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn config_parses_flat_toml() {
        let c = ExperimentConfig::from_toml_str(
            "task = \"objectworld-linear\"\nlearner = \"maxent\"\ndata_percentages = [10, 50]\ngrid_size = 4\nbase_seed = 3\n",
        )
        .unwrap();
        assert_eq!(c.task, Task::ObjectworldLinear);
        assert_eq!(c.learner, LearnerKind::MaxEnt);
        assert_eq!(c.data_percentages, vec![10.0, 50.0]);
        assert_eq!(c.n_environments, 10);
        assert!(ExperimentConfig::from_toml_str("grid_size = 0").is_err());
        assert!(ExperimentConfig::from_toml_str("bogus = 1").is_err());
        assert!(ExperimentConfig::from_toml_str("data_percentages = [-5]").is_err());
    }

    #[test]
    fn demo_counts() {
        assert_eq!(demo_count(30.0, 100), 30);
        assert_eq!(demo_count(200.0, 225), 450);
        assert_eq!(demo_count(10.0, 225), 23);
    }

    #[test]
    fn task_names_round_trip() {
        for t in Task::ALL {
            assert_eq!(Task::from_name(t.name()), Some(t));
        }
    }

    #[test]
    fn one_cell_one_candidate_gives_one_record() {
        let dir = tempfile::tempdir().unwrap();
        let config = ExperimentConfig { grid_size: 1, n_environments: 1, ..tiny(dir.path()) };
        let out = run_sweep(&config).unwrap();
        assert_eq!(out.records.len(), 1);
        assert_eq!(out.selections.len(), 1);
        let text = fs::read_to_string(dir.path().join(RESULTS_FILE)).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(!dir.path().join(RESULTS_PARTIAL).exists());
    }

    #[test]
    fn reruns_are_byte_identical_and_resumable() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        run_sweep(&tiny(a.path())).unwrap();
        // interrupted after one cell, then resumed
        assert!(run_sweep_limited(&tiny(b.path()), Some(1)).unwrap().is_none());
        let resumed = run_sweep(&tiny(b.path())).unwrap();
        assert_eq!(resumed.cells_run, 1);
        for f in [RESULTS_FILE, SELECTIONS_FILE, SUMMARY_FILE] {
            assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
        }
        let again = run_sweep(&tiny(a.path())).unwrap();
        assert_eq!(again.cells_run, 2);
        assert_eq!(read_results_csv(&a.path().join(RESULTS_FILE)).unwrap(), again.records);
        assert_eq!(read_selections_csv(&a.path().join(SELECTIONS_FILE)).unwrap(), again.selections);
    }

    fn rec(full: usize, val: usize, env_index: usize) -> ExperimentRecord {
        ExperimentRecord {
            task: Task::GridworldSimple,
            learner: LearnerKind::Lp,
            env_index,
            env_seed: 0,
            data_percent: 30.0,
            n_pairs: 30,
            candidate: Candidate::Discount(0.5),
            validation_errors: val,
            full_state_errors: full,
            feasible: true,
        }
    }

    #[test]
    fn summary_statistics() {
        let one = summarize(&[rec(7, 1, 0)]);
        assert_eq!((one[0].mean_full_errors, one[0].std_full_errors, one[0].n), (7.0, 0.0, 1));
        let two = summarize(&[rec(2, 0, 0), rec(4, 2, 1)]);
        assert_eq!(two.len(), 1);
        assert_eq!((two[0].mean_full_errors, two[0].std_full_errors), (3.0, 1.0));
        assert_eq!((two[0].mean_val_errors, two[0].std_val_errors), (1.0, 1.0));

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        emit_summary_csv(&path, &two).unwrap();
        assert_eq!(read_summary_csv(&path).unwrap(), two);
    }

    #[test]
    fn summary_rows_per_percentage_and_candidate() {
        let mut records = Vec::new();
        for env in 0..10 {
            for pct in [10.0, 30.0] {
                for k in 0..4 {
                    records.push(ExperimentRecord { data_percent: pct, candidate: Candidate::Discount(0.1 + 0.2 * k as f64), ..rec(env, 0, env) });
                }
            }
        }
        assert_eq!(summarize(&records).len(), 2 * 4);
    }
}
