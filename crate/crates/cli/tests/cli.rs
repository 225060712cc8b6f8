use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use swarmcharge_cli::records::{format_real, RUNS_HEADER, SUMMARY_HEADER, TRACE_HEADER};

fn swarmcharge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_swarmcharge"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn field<'a>(header: &str, row: &'a str, name: &str) -> &'a str {
    let idx = header.split(',').position(|h| h == name).expect("column");
    row.split(',').nth(idx).expect("field")
}

#[test]
fn run_prints_one_record() {
    let out = swarmcharge(&["run", "--policy", "BL", "--bc", "5", "--b", "30", "--seed", "42"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], RUNS_HEADER);
    assert_eq!(field(lines[0], lines[1], "finished"), "true");
    assert_eq!(field(lines[0], lines[1], "seed"), "42");
    assert_eq!(field(lines[0], lines[1], "policy"), "BL");
}

#[test]
fn run_without_consumption_is_all_work() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("still.cfg");
    // truncated noise around a zero mean would still drain batteries
    fs::write(&cfg, "sd = 0\n").unwrap();
    let out = swarmcharge(&[
        "run", "--policy", "CT", "--bc", "0", "--b", "30", "--seed", "1", "--config", cfg.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(field(lines[0], lines[1], "utility"), "1");
    assert_eq!(field(lines[0], lines[1], "remaining_drones"), "100");
}

#[test]
fn missing_policy_is_a_usage_error() {
    let out = swarmcharge(&["run", "--bc", "5", "--b", "30", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));

    let out = swarmcharge(&["run", "--policy", "XY", "--bc", "5", "--b", "30", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = swarmcharge(&["run", "--policy", "CT", "--bc", "5", "--b", "130", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn trace_file_has_one_row_per_tick() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.csv");
    let out = swarmcharge(&[
        "run", "--policy", "CT", "--bc", "15", "--b", "30", "--seed", "3", "--trace", trace.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let record = stdout(&out);
    let rec: Vec<&str> = record.lines().collect();
    let ticks: usize = field(rec[0], rec[1], "ticks_elapsed").parse().unwrap();
    let text = fs::read_to_string(&trace).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], TRACE_HEADER);
    assert_eq!(lines.len(), ticks + 1);
    assert!(lines[1].starts_with("1,"));
    let last_alive = field(lines[0], lines[ticks], "alive");
    assert_eq!(last_alive, field(rec[0], rec[1], "remaining_drones"));
}

fn sweep(config: &str, dir: &Path, extra: &[&str]) -> Output {
    let cfg = dir.join("plan.cfg");
    fs::write(&cfg, config).unwrap();
    let out_dir = dir.join("out");
    let mut args = vec!["sweep", "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()];
    args.extend_from_slice(extra);
    swarmcharge(&args)
}

#[test]
fn small_sweep_writes_all_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = sweep("policies = BL\nbc = 15\nb = 30\nreps = 2\n", dir.path(), &["--jobs", "1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let runs = fs::read_to_string(dir.path().join("out/runs.csv")).unwrap();
    assert_eq!(runs.lines().count(), 3);
    assert_eq!(runs.lines().next(), Some(RUNS_HEADER));
    let summary = fs::read_to_string(dir.path().join("out/summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 2);
    assert_eq!(summary.lines().next(), Some(SUMMARY_HEADER));
    let plot = fs::read_to_string(dir.path().join("out/plotdata/BL_b30.csv")).unwrap();
    assert_eq!(plot.lines().next(), Some("bc,avg_remaining,pct_finished,avg_utility"));
    assert!(plot.lines().nth(1).unwrap().starts_with("15,"));

    for text in [&runs, &summary, &plot] {
        assert!(!text.contains('"') && !text.contains('\r'));
        assert!(text.ends_with('\n'));
    }
}

#[test]
fn sweep_output_is_reproducible() {
    let config = "policies = BL, CT\nbc = 4, 14\nb = 30\nreps = 3\nqty = 30\nticks = 300\n";
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert!(sweep(config, a.path(), &["--seed", "9", "--jobs", "1"]).status.success());
    assert!(sweep(config, b.path(), &["--seed", "9", "--jobs", "4"]).status.success());
    let ra = fs::read(a.path().join("out/runs.csv")).unwrap();
    assert_eq!(ra, fs::read(b.path().join("out/runs.csv")).unwrap());
    assert_eq!(
        fs::read(a.path().join("out/summary.csv")).unwrap(),
        fs::read(b.path().join("out/summary.csv")).unwrap()
    );

    let c = tempfile::tempdir().unwrap();
    assert!(sweep(config, c.path(), &["--seed", "10"]).status.success());
    assert_ne!(ra, fs::read(c.path().join("out/runs.csv")).unwrap());
}

#[test]
fn unwritable_output_fails_before_running() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let out_dir = blocker.join("sub");
    let out = swarmcharge(&["sweep", "--out", out_dir.to_str().unwrap(), "--jobs", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out_dir.exists());
}

#[test]
fn bad_config_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let out = sweep("up = 80\nlw = 90\n", dir.path(), &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

/// Recomputes summary rows from runs.csv the way a spreadsheet would.
#[test]
fn summary_recomputes_from_runs() {
    let dir = tempfile::tempdir().unwrap();
    let out = sweep("policies = CT\nbc = 13\nb = 30, 40\nreps = 5\nseed = 4\n", dir.path(), &[]);
    assert!(out.status.success());
    let runs = fs::read_to_string(dir.path().join("out/runs.csv")).unwrap();
    let summary = fs::read_to_string(dir.path().join("out/summary.csv")).unwrap();

    let header: Vec<&str> = RUNS_HEADER.split(',').collect();
    let col = |name: &str| header.iter().position(|h| *h == name).unwrap();
    let rows: Vec<Vec<&str>> = runs.lines().skip(1).map(|l| l.split(',').collect()).collect();
    let summary_rows: Vec<&str> = summary.lines().skip(1).collect();
    assert_eq!(summary_rows.len(), 2);

    for (sid, line) in summary_rows.iter().enumerate() {
        let cell: Vec<&Vec<&str>> = rows
            .iter()
            .filter(|r| r[col("scenario_id")] == sid.to_string())
            .collect();
        let n = cell.len() as f64;
        let get = |name: &str| -> Vec<f64> { cell.iter().map(|r| r[col(name)].parse().unwrap()).collect() };
        let remaining = get("remaining_drones");
        let utility = get("utility");
        let finished: Vec<f64> = cell
            .iter()
            .map(|r| if r[col("finished")] == "true" { 100.0 } else { 0.0 })
            .collect();
        let stats = |v: &[f64]| {
            let mean = v.iter().sum::<f64>() / n;
            let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
            (format_real(mean), format_real(var.sqrt()))
        };
        let (ar, sr) = stats(&remaining);
        let (pf, sf) = stats(&finished);
        let (au, su) = stats(&utility);
        let expected = format!(
            "{sid},CT,13,{},5,{ar},{sr},{pf},{sf},{au},{su}",
            if sid == 0 { 30 } else { 40 }
        );
        assert_eq!(*line, expected);
    }
}
