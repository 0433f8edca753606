use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use topoguard::io::{read_volume, write_volume};
use topoguard::metrics::report;
use topoguard::synth::{generate, PhantomKind, PhantomSpec};
use topoguard::{key_voxels, validate, ConstraintSpec, Dims, LabelTable, LabelVolume, Spacing};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_topoguard"));
    c.env_remove("TOPOGUARD_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

struct Fixture {
    dir: tempfile::TempDir,
}

impl Fixture {
    fn new() -> Self {
        Self {
            dir: tempfile::tempdir().unwrap(),
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn s(&self, name: &str) -> String {
        self.path(name).to_str().unwrap().to_string()
    }

    fn synth(&self, kind: &str, name: &str, extra: &[&str]) -> String {
        let out = self.s(name);
        let mut args = vec!["synth", "--kind", kind, "-o", &out];
        args.extend_from_slice(extra);
        let r = run(&args);
        assert_eq!(code(&r), 0, "{}", String::from_utf8_lossy(&r.stderr));
        out
    }
}

fn whs_phantom(kind: PhantomKind) -> LabelVolume {
    generate(&PhantomSpec::new(kind, Dims::cube(32).unwrap())).unwrap()
}

#[test]
fn validate_exit_codes() {
    let f = Fixture::new();
    let clean = f.synth("nested-spheres", "n.tgv", &[]);
    let punched = f.synth("punched-shell", "p.tgv", &[]);

    let ok = run(&["validate", &clean]);
    assert_eq!(code(&ok), 0);
    assert!(stdout(&ok).contains("total: 0 violations"));

    let bad = run(&["validate", &punched]);
    assert_eq!(code(&bad), 1);
    let expect = validate(&whs_phantom(PhantomKind::PunchedShell), &ConstraintSpec::whs()).unwrap();
    let text = stdout(&bad);
    assert!(text.contains(&format!("contain LV Myo: {} violations", expect.per_constraint[0].count)));
    assert!(text.contains("exclude RA AO: 0 violations"));

    let missing = run(&["validate", &clean, "--constraints", &f.s("absent.txt")]);
    assert_eq!(code(&missing), 3);
    assert_eq!(code(&run(&["validate", &f.s("absent.tgv")])), 3);
    assert_eq!(code(&run(&["validate"])), 2);
    assert_eq!(code(&run(&["validate", &clean, "--format", "xml"])), 2);
}

#[test]
fn validate_json_lines() {
    let f = Fixture::new();
    let punched = f.synth("punched-shell", "p.tgv", &[]);
    let spec = f.path("spec.txt");
    std::fs::write(&spec, "connectivity 6\ncontain LV Myo\nexclude RA AO\nexclude LV RA\n").unwrap();
    let out = run(&["validate", &punched, "--constraints", spec.to_str().unwrap(), "--format", "json-lines"]);
    assert_eq!(code(&out), 1);
    let records: Vec<serde_json::Value> = stdout(&out)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(records.len(), 4);
    assert_eq!(records[0]["constraint"], "contain LV Myo");
    assert!(records[0]["count"].as_u64().unwrap() > 0);
    assert_eq!(records[2]["count"], 0);
    assert_eq!(records[3]["valid"], false);
    assert_eq!(records[3]["dims"], serde_json::json!([32, 32, 32]));
}

#[test]
fn keymask_matches_library() {
    let f = Fixture::new();
    let punched = f.synth("punched-shell", "p.tgv", &["--spacing", "0.5,1,2"]);
    let clean = f.synth("nested-spheres", "n.tgv", &[]);
    assert_eq!(code(&run(&["keymask", &punched, "-o", &f.s("kp.tgv")])), 0);
    assert_eq!(code(&run(&["keymask", &clean, "-o", &f.s("kn.tgv")])), 0);

    let g = read_volume(&punched).unwrap().into_labels().unwrap();
    let written = read_volume(f.path("kp.tgv")).unwrap().into_mask().unwrap();
    let n = key_voxels(&g, &ConstraintSpec::whs()).unwrap();
    assert_eq!(written.mask, n);
    assert_eq!(written.spacing, Spacing::new(0.5, 1.0, 2.0).unwrap());
    assert_eq!(n.count(), validate(&g, &ConstraintSpec::whs()).unwrap().total);
    assert!(read_volume(f.path("kn.tgv")).unwrap().into_mask().unwrap().mask.none());
}

fn loss_json(args: &[&str]) -> serde_json::Value {
    let out = run(args);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(stdout(&out).lines().count(), 1);
    serde_json::from_str(stdout(&out).trim()).unwrap()
}

#[test]
fn loss_records() {
    let f = Fixture::new();
    let gt = f.synth("nested-spheres", "n.tgv", &[]);
    let prob = f.synth("nested-spheres", "np.tgv", &["--soften", "0.5", "--seed", "4"]);
    let punched = f.synth("punched-shell", "pp.tgv", &["--soften", "0.5"]);

    let d = loss_json(&["loss", &prob, &gt]);
    assert_eq!(d["lambda"].as_f64(), Some(1e-6));
    assert_eq!(d["l_tp"].as_f64(), Some(0.0));
    assert_eq!(d["key_voxel_count"], 0);

    let z = loss_json(&["loss", &prob, &gt, "--lambda", "0"]);
    let (ce, dice, total) = (z["l_ce"].as_f64().unwrap(), z["l_dice"].as_f64().unwrap(), z["l_total"].as_f64().unwrap());
    assert!((total - (ce + dice)).abs() <= 1e-12 * total.abs());

    let p = loss_json(&["loss", &punched, &gt, "--tp-norm", "allvox"]);
    assert!(p["l_tp"].as_f64().unwrap() > 0.0);
    let k = loss_json(&["loss", &punched, &gt]);
    assert!(k["l_tp"].as_f64().unwrap() > p["l_tp"].as_f64().unwrap());

    let from_gt = loss_json(&["loss", &prob, &f.synth("punched-shell", "p.tgv", &[]), "--mask-source", "gt"]);
    assert!(from_gt["key_voxel_count"].as_u64().unwrap() > 0);

    assert_eq!(code(&run(&["loss", &prob, &gt, "--tp-norm", "sum"])), 2);
    assert_eq!(code(&run(&["loss", &gt, &gt])), 3);
}

fn write_labels(path: &Path, g: &LabelVolume) {
    write_volume(path, &g.clone().into()).unwrap();
}

#[test]
fn metrics_csv() {
    let f = Fixture::new();
    let gt = f.synth("nested-spheres", "n.tgv", &[]);
    let same = run(&["metrics", &gt, &gt]);
    assert_eq!(code(&same), 0);
    assert!(stdout(&same).starts_with("class,dice,jaccard,sd_mm,hd_mm\n"));
    assert!(stdout(&same).ends_with("ALL,1.0,1.0,0.0,0.0\n"));

    // two voxels three apart along x
    let d = Dims::new(1, 1, 5).unwrap();
    let single = |x: usize| {
        let mut data = vec![0; 5];
        data[x] = 1;
        LabelVolume::new(d, Spacing::new(1.0, 1.0, 1.5).unwrap(), 2, data).unwrap()
    };
    write_labels(&f.path("a.tgv"), &single(0));
    write_labels(&f.path("b.tgv"), &single(3));
    let csv = f.s("m.csv");
    assert_eq!(code(&run(&["metrics", &f.s("a.tgv"), &f.s("b.tgv"), "--csv", &csv])), 0);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text, "class,dice,jaccard,sd_mm,hd_mm\nMyo,0.0,0.0,4.5,4.5\nALL,0.0,0.0,4.5,4.5\n");

    let punched = f.synth("punched-shell", "p.tgv", &[]);
    let lib = report(
        &read_volume(&punched).unwrap().into_labels().unwrap(),
        &read_volume(&gt).unwrap().into_labels().unwrap(),
        &LabelTable::whs(),
    )
    .unwrap();
    assert_eq!(stdout(&run(&["metrics", &punched, &gt])), lib.to_csv());
}

#[test]
fn synth_rejects_bad_parameters() {
    let f = Fixture::new();
    let o = f.s("x.tgv");
    assert_eq!(code(&run(&["synth", "--kind", "nested-spheres", "--r2", "40", "-o", &o])), 2);
    assert_eq!(code(&run(&["synth", "--kind", "nested-spheres", "--dims", "0", "-o", &o])), 2);
    assert_eq!(code(&run(&["synth", "--kind", "cube", "-o", &o])), 2);
    assert!(!f.path("x.tgv").exists());
    let out = f.s("r.tgv");
    assert_eq!(code(&run(&["synth", "--kind", "random", "--dims", "4,5,6", "--classes", "3", "-o", &out])), 0);
    let g = read_volume(&out).unwrap().into_labels().unwrap();
    assert_eq!(g.dims(), Dims::new(4, 5, 6).unwrap());
    assert_eq!(g.num_classes(), 3);
}

#[test]
fn thread_cap_is_honored() {
    let f = Fixture::new();
    let clean = f.synth("nested-spheres", "n.tgv", &[]);
    for threads in ["0", "1", "3"] {
        let out = bin().env("TOPOGUARD_THREADS", threads).args(["validate", &clean]).output().unwrap();
        assert_eq!(code(&out), 0);
    }
    let out = bin().env("TOPOGUARD_THREADS", "many").args(["validate", &clean]).output().unwrap();
    assert_eq!(code(&out), 2);
}
