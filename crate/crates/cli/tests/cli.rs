use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use swimflow::spectral::{norm_l2, ops::pairwise_sum};
use swimflow::{EnergyLedger, Grid, State};
use swimflow_cli::snapshot::{read_snapshot, write_snapshot, Snapshot};
use swimflow_cli::timeseries::{read_table, write_timeseries, ENERGY_COLUMNS};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_swimflow"))
}

fn workspace() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_cfg(dir: &Path, text: &str) -> String {
    let p = dir.join("run.cfg");
    fs::write(&p, text).unwrap();
    p.display().to_string()
}

const SMALL: &str = "[model]\nepsilon = 0.2\n[grid]\ndim = 2\nn = 16\n[init]\nseed = 4\n[time]\ndt = 0.01\nt_end = 0.1\n";

fn column(rows: &[Vec<Option<f64>>], j: usize) -> Vec<f64> {
    rows.iter().map(|r| r[j].unwrap()).collect()
}

#[test]
fn reference_config_keeps_the_energy_balance() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = workspace().join("configs/reference.cfg");
    let o = run(&["simulate", "--config", cfg.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = read_table(&tmp.path().join("energy.csv")).unwrap();
    assert_eq!(header, ENERGY_COLUMNS);
    let e0 = rows[0][1].unwrap();
    let worst = column(&rows, 11).iter().fold(0.0f64, |m, d| m.max(d.abs()));
    assert!(worst <= 1e-6 * e0, "{worst} vs {e0}");
    let snaps = fs::read_dir(tmp.path()).unwrap().filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "apfs")).count();
    assert_eq!(snaps, rows.len());
}

#[test]
fn uncoupled_run_has_no_velocity() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(tmp.path(), &SMALL.replace("epsilon = 0.2", "epsilon = 0.0"));
    let out = tmp.path().join("out");
    let o = run(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let (_, rows) = read_table(&out.join("energy.csv")).unwrap();
    assert_eq!(rows.len(), 11);
    assert!(column(&rows, 6).iter().all(|u| *u == 0.0));
}

#[test]
fn corrupt_config_writes_nothing() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(tmp.path(), "[model]\nepsilon = abc\n");
    let out = tmp.path().join("out");
    let o = run(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("epsilon"));
    assert!(!out.exists());
    assert_eq!(run(&["simulate", "--config", "/nonexistent/run.cfg"]).status.code(), Some(2));
    assert_eq!(run(&["simulate"]).status.code(), Some(2));
}

#[test]
fn numeric_failure_exits_with_one() {
    let tmp = tempfile::tempdir().unwrap();
    let text = "[model]\nepsilon = 0.1\ngamma2 = -4.0\nbeta = -2.0\n[grid]\ndim = 2\nn = 16\n\
                [init]\namplitude = 30.0\n[time]\ndt = 0.5\nt_end = 5.0\n";
    let cfg = write_cfg(tmp.path(), text);
    let out = tmp.path().join("out");
    let o = run(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("t = "));
    assert!(!out.exists());
}

#[test]
fn runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(tmp.path(), SMALL);
    let mut files = Vec::new();
    for k in 0..2 {
        let out = tmp.path().join(format!("out{k}"));
        assert_eq!(run(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap()]).status.code(), Some(0));
        files.push((fs::read(out.join("energy.csv")).unwrap(), fs::read(out.join("snap_00010.apfs")).unwrap()));
    }
    assert_eq!(files[0], files[1]);

    let out = tmp.path().join("seeded");
    run(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap(), "--seed", "99"]);
    assert_ne!(fs::read(out.join("energy.csv")).unwrap(), files[0].0);
}

#[test]
fn energy_toggle_keeps_the_columns() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(tmp.path(), &format!("{SMALL}[diagnostics]\nenergy = false\n[output]\nsnapshots = false\n"));
    let out = tmp.path().join("out");
    assert_eq!(run(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap()]).status.code(), Some(0));
    let (header, rows) = read_table(&out.join("energy.csv")).unwrap();
    assert_eq!(header, ENERGY_COLUMNS);
    assert!(rows.iter().all(|r| r[0].is_some() && r[1..].iter().all(Option::is_none)));
    assert!(!out.join("snap_00000.apfs").exists());
}

#[test]
fn timeseries_files() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("empty.csv");
    write_timeseries(&EnergyLedger::default(), &path).unwrap();
    assert_eq!(fs::read_to_string(&path).unwrap(), format!("{}\n", ENERGY_COLUMNS.join(",")));

    let cfg = swimflow::parse_config(SMALL).unwrap();
    let traj = swimflow::integrate(&swimflow::initial_field(&cfg.run), &cfg.run, &cfg.params).unwrap();
    let ledger = swimflow::energy_ledger(&traj);
    let path = tmp.path().join("energy.csv");
    write_timeseries(&ledger, &path).unwrap();
    let (_, rows) = read_table(&path).unwrap();
    for (r, l) in rows.iter().zip(&ledger.rows) {
        assert_eq!(r[0], Some(l.t));
        assert_eq!(r[1], Some(l.e));
        assert_eq!(r[6], Some(l.u_sq));
        assert_eq!(r[11], Some(l.balance_defect));
    }
}

#[test]
fn snapshot_roundtrip_and_corruption() {
    let tmp = tempfile::tempdir().unwrap();
    let g = Grid::new(3, &[6, 4, 8], &[1.0, 2.0, 0.5]).unwrap();
    let p = swimflow::random_solenoidal_field(&g, 3, |k| (-k / 10.0).exp());
    let path = tmp.path().join("s.apfs");
    write_snapshot(&State::new(0.3, p), &path).unwrap();
    let bytes = fs::read(&path).unwrap();
    let snap = read_snapshot(&path).unwrap();
    assert_eq!(snap.encode(), bytes);
    assert_eq!(snap.t, 0.3);

    let mut bad = bytes.clone();
    let mid = bad.len() / 2;
    bad[mid] ^= 0x10;
    fs::write(&path, &bad).unwrap();
    let err = read_snapshot(&path).unwrap_err().to_string();
    assert!(err.contains("checksum"), "{err}");
    fs::write(&path, &bytes[..bytes.len() - 9]).unwrap();
    assert!(read_snapshot(&path).is_err());
}

fn quadrature_norm(s: &Snapshot) -> f64 {
    let sq: Vec<f64> = s.field.values().iter().map(|v| v * v).collect();
    (pairwise_sum(&sq) * s.grid().cell_volume()).sqrt()
}

#[test]
fn committed_fixtures_decode_to_known_norms() {
    let pi = std::f64::consts::PI;
    let planar = read_snapshot(&fixture("planar.apfs")).unwrap();
    assert_eq!((planar.t, planar.grid().modes()), (0.5, &[8usize, 6][..]));
    let expect = 5f64.sqrt() * pi;
    assert!((quadrature_norm(&planar) - expect).abs() <= 1e-15 * expect);
    assert!((norm_l2(&planar.to_state().p) - expect).abs() <= 1e-15 * expect * 4.0);

    let boxed = read_snapshot(&fixture("box.apfs")).unwrap();
    assert_eq!((boxed.t, boxed.grid().lengths()), (1.25, &[1.0, 2.0, 3.0][..]));
    let expect = 6.375f64.sqrt();
    assert!((quadrature_norm(&boxed) - expect).abs() <= 1e-15 * expect);
    assert_eq!(boxed.encode(), fs::read(fixture("box.apfs")).unwrap());
}

#[test]
fn sweep_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(tmp.path(), SMALL);
    let out = tmp.path().join("out");
    let o = run(&["sweep", "--config", &cfg, "--out", out.to_str().unwrap(), "--eps", "0.1,0.01,0.001"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = read_table(&out.join("sweep.csv")).unwrap();
    assert_eq!(header, ["eps", "sup_p_distance", "u_sq_integral"]);
    assert_eq!(column(&rows, 0), [0.1, 0.01, 0.001]);
    let d = column(&rows, 1);
    assert!(d[0] > d[1] && d[1] > d[2] && d[2] > 0.0);
    let fit = fs::read_to_string(out.join("sweep_fit.csv")).unwrap();
    assert!(fit.ends_with(",ok\n"), "{fit}");
    let first = fs::read(out.join("sweep.csv")).unwrap();
    run(&["sweep", "--config", &cfg, "--out", out.to_str().unwrap(), "--eps", "0.1,0.01,0.001"]);
    assert_eq!(fs::read(out.join("sweep.csv")).unwrap(), first);

    let o = run(&["sweep", "--config", &cfg, "--out", out.to_str().unwrap(), "--eps", "0.05"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("insufficient for slope"));
    let (_, rows) = read_table(&out.join("sweep.csv")).unwrap();
    assert_eq!(rows.len(), 1);
    assert!(fs::read_to_string(out.join("sweep_fit.csv")).unwrap().contains("insufficient for slope"));

    for bad in ["0.01,0.1", "0.1,-0.1", "abc"] {
        assert_eq!(run(&["sweep", "--config", &cfg, "--eps", bad]).status.code(), Some(2), "{bad}");
    }
}

#[test]
fn twin_on_small_cube() {
    let tmp = tempfile::tempdir().unwrap();
    let text = "[model]\nepsilon = 0.3\ngamma2 = -0.5\nbeta = 0.2\n[grid]\ndim = 3\nn = 8\n\
                [init]\nseed = 11\nk_cut = 1.4142135623730951\n[time]\ndt = 1e-4\nt_end = 1e-3\n";
    let cfg = write_cfg(tmp.path(), text);
    let out = tmp.path().join("out");
    let o = run(&["twin", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("10 steps"));
    let (header, rows) = read_table(&out.join("relative.csv")).unwrap();
    assert_eq!(header[..3], ["t", "E_rel", "W_rel"]);
    assert!(!rows.is_empty());
    let (_, twin) = read_table(&out.join("twin.csv")).unwrap();
    assert!(twin[0][2].unwrap() <= 1e-8);

    let kappa = write_cfg(tmp.path(), &format!("{text}[model]\nkappa = 0.5\nstrict = false\n"));
    let o = run(&["twin", "--config", &kappa, "--out", tmp.path().join("k").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("kappa"));
}

#[test]
fn check_verb() {
    let o = run(&["check", "--filter", "transform"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("pass  transform-roundtrip"));
    assert!(stdout(&o).contains("1 passed, 0 failed"));

    let o = run(&["check", "--filter", "energy-identity", "--inject-fault", "cubic-sign"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("FAIL  energy-identity"));
    assert_eq!(run(&["check", "--filter", "no-such-check"]).status.code(), Some(3));
    assert!(!stdout(&run(&["check", "--help"])).contains("inject"));
}

#[test]
fn dump_config_reparses() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(tmp.path(), SMALL);
    let o = run(&["dump-config", "--config", &cfg, "--seed", "17"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let again = swimflow::parse_config(&text).unwrap();
    assert_eq!(again.run.seed, 17);
    assert_eq!(again.params, swimflow::parse_config(SMALL).unwrap().params);
}
