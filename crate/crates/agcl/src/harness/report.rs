use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::run::{time_to_threshold, PlanOutput, RunOutput};
use super::HarnessError;

/// One evaluation checkpoint of one training phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub method: String,
    pub seed: u64,
    pub phase: String,
    pub cumulative_steps: u64,
    pub eval_success: f64,
}

/// Time-to-threshold verdict for one (method, seed) run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub method: String,
    pub seed: u64,
    pub time_to_threshold: Option<u64>,
    pub reached: bool,
}

/// Target-phase rows are the ones the threshold metric reads; source
/// phases only shift the step counter.
fn is_target_phase(phase: &str) -> bool {
    phase == "target" || phase.ends_with(":target")
}

/// Computes per-(method, seed) time-to-threshold from curve rows. The
/// cumulative step column already carries the source-task offset, so the
/// metric is the first target-phase checkpoint at or above `delta`.
pub fn summarize(rows: &[CurveRow], delta: f64) -> Vec<SummaryRow> {
    let mut keys: Vec<(String, u64)> = Vec::new();
    for r in rows {
        let key = (r.method.clone(), r.seed);
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    keys.iter()
        .map(|(method, seed)| {
            let curve: Vec<(u64, f64)> = rows
                .iter()
                .filter(|r| {
                    &r.method == method && r.seed == *seed && is_target_phase(&r.phase)
                })
                .map(|r| (r.cumulative_steps, r.eval_success))
                .collect();
            let ttt = time_to_threshold(&curve, delta, 0);
            SummaryRow {
                method: method.clone(),
                seed: *seed,
                time_to_threshold: ttt,
                reached: ttt.is_some(),
            }
        })
        .collect()
}

pub fn curves_to_csv(rows: &[CurveRow]) -> String {
    let mut out = String::from("method,seed,phase,cumulative_steps,eval_success\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.method, r.seed, r.phase, r.cumulative_steps, r.eval_success
        ));
    }
    out
}

pub fn parse_curves_csv(text: &str) -> Result<Vec<CurveRow>, HarnessError> {
    let mut rows = Vec::new();
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default();
    if header != "method,seed,phase,cumulative_steps,eval_success" {
        return Err(HarnessError::Io(format!("unexpected curves header `{header}`")));
    }
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 5 {
            return Err(HarnessError::Io(format!("curves line {} malformed", i + 2)));
        }
        let parse = |what: &str, v: Result<_, std::num::ParseIntError>| {
            v.map_err(|e| HarnessError::Io(format!("curves line {}: {what}: {e}", i + 2)))
        };
        rows.push(CurveRow {
            method: parts[0].to_string(),
            seed: parse("seed", parts[1].parse())?,
            phase: parts[2].to_string(),
            cumulative_steps: parse("steps", parts[3].parse())?,
            eval_success: parts[4]
                .parse()
                .map_err(|e| HarnessError::Io(format!("curves line {}: success: {e}", i + 2)))?,
        });
    }
    Ok(rows)
}

pub fn summary_to_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::from("method,seed,time_to_threshold,reached\n");
    for r in rows {
        let ttt = r
            .time_to_threshold
            .map_or_else(|| "not_reached".to_string(), |v| v.to_string());
        out.push_str(&format!("{},{},{},{}\n", r.method, r.seed, ttt, r.reached));
    }
    out
}

/// Writes every artifact of a planned run into `dir`.
pub fn write_plan(plan: &PlanOutput, dir: &Path) -> Result<(), HarnessError> {
    let io = |e: std::io::Error| HarnessError::Io(e.to_string());
    fs::create_dir_all(dir).map_err(io)?;
    let manifest =
        serde_json::to_string_pretty(&plan.manifest).expect("manifest serializes") + "\n";
    fs::write(dir.join("manifest.json"), manifest).map_err(io)?;
    fs::write(dir.join("dfa.dot"), &plan.dfa_dot).map_err(io)?;
    fs::write(dir.join("curriculum.dot"), &plan.curriculum_dot).map_err(io)?;
    Ok(())
}

/// Writes every artifact of a full run into `dir`.
pub fn write_run(run: &RunOutput, dir: &Path) -> Result<(), HarnessError> {
    let io = |e: std::io::Error| HarnessError::Io(e.to_string());
    write_plan(&run.plan, dir)?;
    fs::write(dir.join("curves.csv"), curves_to_csv(&run.curves)).map_err(io)?;
    fs::write(dir.join("summary.csv"), summary_to_csv(&run.summary)).map_err(io)?;
    fs::write(dir.join("stats.json"), &run.stats_json).map_err(io)?;
    Ok(())
}

/// Renders the summary as an aligned text table (the `report` command).
pub fn summary_table(rows: &[SummaryRow]) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<12} {:>6} {:>18} {:>8}\n",
        "method", "seed", "time_to_threshold", "reached"
    ));
    for r in rows {
        let ttt = r
            .time_to_threshold
            .map_or_else(|| "not_reached".to_string(), |v| v.to_string());
        out.push_str(&format!(
            "{:<12} {:>6} {:>18} {:>8}\n",
            r.method, r.seed, ttt, r.reached
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(method: &str, seed: u64, phase: &str, steps: u64, success: f64) -> CurveRow {
        CurveRow {
            method: method.into(),
            seed,
            phase: phase.into(),
            cumulative_steps: steps,
            eval_success: success,
        }
    }

    #[test]
    fn summary_reads_only_target_phases() {
        let rows = vec![
            row("sequence", 0, "v0:n1-g3", 5_000, 0.9),
            row("sequence", 0, "v1:target", 30_000, 0.4),
            row("sequence", 0, "v1:target", 35_000, 0.85),
            row("scratch", 0, "target", 5_000, 0.1),
            row("scratch", 0, "target", 10_000, 0.2),
        ];
        let summary = summarize(&rows, 0.8);
        assert_eq!(summary.len(), 2);
        // The source phase reaching 0.9 does not count; the target phase
        // first crosses at 35k (already offset by the sources).
        assert_eq!(summary[0].time_to_threshold, Some(35_000));
        assert!(summary[0].reached);
        assert_eq!(summary[1].time_to_threshold, None);
        assert!(!summary[1].reached);
    }

    #[test]
    fn curve_csv_roundtrips() {
        let rows = vec![
            row("graph", 3, "v0:n2-s1", 5_000, 0.42),
            row("graph", 3, "v2:target", 60_000, 1.0),
        ];
        let csv = curves_to_csv(&rows);
        let back = parse_curves_csv(&csv).unwrap();
        assert_eq!(back, rows);
        assert!(parse_curves_csv("bogus\n1,2,3").is_err());
    }

    #[test]
    fn time_to_threshold_offsets_and_misses() {
        let curve = [(5_000u64, 0.2), (10_000, 0.85), (15_000, 0.9)];
        assert_eq!(time_to_threshold(&curve, 0.8, 0), Some(10_000));
        assert_eq!(time_to_threshold(&curve, 0.8, 7_000), Some(17_000));
        assert_eq!(time_to_threshold(&curve, 0.95, 0), None);
        // A curve that starts at the threshold reports its first point.
        let high = [(5_000u64, 1.0)];
        assert_eq!(time_to_threshold(&high, 0.8, 0), Some(5_000));
    }
}
