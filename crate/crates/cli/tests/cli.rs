use std::fs;
use std::process::{Command, Output};

use paraquon::checks::oracle_gram_mismatch;
use paraquon::gram::hermiticity_gap;
use paraquon::params::q_matrix_from_entries;
use paraquon::report::GramReport;
use paraquon::{DeformationSpec, Family, Oracle, Order, Word};

fn paraquon(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_paraquon"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = paraquon(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    paraquon(args).status.code().expect("exit code")
}

const QUON_GRAM: &str = "\
spec_hash = \"ddb968a68dcc33d4\"
n = 2
p = \"1\"
basis = [[1, 2], [2, 1]]
re = [
  [1.0000000000000000e0, 5.0000000000000000e-1],
  [5.0000000000000000e-1, 1.0000000000000000e0],
]
im = [
  [0.0000000000000000e0, 0.0000000000000000e0],
  [0.0000000000000000e0, 0.0000000000000000e0],
]
";

#[test]
fn gram_quon_golden() {
    assert_eq!(
        stdout(&[
            "gram",
            "--preset",
            "quon",
            "--q",
            "0.5",
            "--indices",
            "i1,i2"
        ]),
        QUON_GRAM
    );
}

#[test]
fn gram_para_is_identity() {
    let text = stdout(&[
        "gram",
        "--preset",
        "para",
        "--epsilon",
        "1",
        "--p",
        "2",
        "--indices",
        "i1,i2",
        "--format",
        "csv",
    ]);
    assert_eq!(
        text,
        "\
# spec_hash=ed4c5f2ee553cbec
# n=2
# p=2
row,col,re,im
1 2,1 2,1.0000000000000000e0,0.0000000000000000e0
1 2,2 1,0.0000000000000000e0,0.0000000000000000e0
2 1,1 2,0.0000000000000000e0,0.0000000000000000e0
2 1,2 1,1.0000000000000000e0,0.0000000000000000e0
"
    );
}

#[test]
fn gram_multiparam_qfile_matches_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let qfile = dir.path().join("q.toml");
    fs::write(
        &qfile,
        "q = [[1, 2, 0.3, 0.4], [1, 3, -0.6, 0.1], [2, 3, 0.2, -0.5], [2, 2, 0.7, 0.0]]\n",
    )
    .unwrap();
    let text = stdout(&[
        "gram",
        "--preset",
        "multiparam",
        "--p",
        "3",
        "--qfile",
        qfile.to_str().unwrap(),
        "--indices",
        "i1,i2,i3",
    ]);
    let report = GramReport::from_toml(&text).unwrap();
    assert_eq!(report.entries.nrows(), 6);
    assert!(hermiticity_gap(&report.entries) < 1e-12);

    let q = q_matrix_from_entries(
        3,
        &[
            [1.0, 2.0, 0.3, 0.4],
            [1.0, 3.0, -0.6, 0.1],
            [2.0, 3.0, 0.2, -0.5],
            [2.0, 2.0, 0.7, 0.0],
        ],
    )
    .unwrap();
    let spec = DeformationSpec::new(
        Order::Finite(3),
        q,
        Family::Multiparam,
        paraquon::params::FamilyArgs::None,
    )
    .unwrap();
    assert_eq!(report.spec_hash, spec.digest());
    let oracle = Oracle::new(&spec);
    for (r, row) in report.basis.iter().enumerate() {
        for (c, col) in report.basis.iter().enumerate() {
            let row: Vec<usize> = row.iter().map(|s| s - 1).collect();
            let col: Vec<usize> = col.iter().map(|s| s - 1).collect();
            let v = oracle.vev_a_word(&Word::gram(&row, &col)).unwrap().value;
            assert!((v - report.entries[(r, c)]).norm() < 1e-10, "({r},{c})");
        }
    }
    assert!(oracle_gram_mismatch(&spec, &[0, 1, 2]).unwrap() < 1e-10);
}

#[test]
fn output_is_byte_identical_across_runs() {
    let args = [
        "gram",
        "--preset",
        "quon",
        "--q",
        "-0.37",
        "--p",
        "3",
        "--indices",
        "i1,i2,i3,i1",
        "--format",
        "csv",
    ];
    assert_eq!(stdout(&args), stdout(&args));
    let args = ["verify", "multiparam", "--seed", "4"];
    assert_eq!(paraquon(&args).stdout, paraquon(&args).stdout);
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.toml");
    let printed = stdout(&[
        "gram",
        "--preset",
        "quon",
        "--q",
        "0.5",
        "--indices",
        "i1,i2",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(printed.is_empty());
    assert_eq!(fs::read_to_string(path).unwrap(), QUON_GRAM);
}

#[test]
fn config_file_supplies_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(
        &cfg,
        "[params]\npreset = \"quon\"\nq = 0.5\n\n[gram]\nindices = [1, 2]\n",
    )
    .unwrap();
    assert_eq!(
        stdout(&["gram", "--config", cfg.to_str().unwrap()]),
        QUON_GRAM
    );
    // flags win over the file
    let text = stdout(&[
        "gram",
        "--config",
        cfg.to_str().unwrap(),
        "--q",
        "0.25",
        "--format",
        "csv",
    ]);
    assert!(text.contains("1 2,2 1,2.5000000000000000e-1,"));

    fs::write(&cfg, "[gram]\nindicies = [1, 2]\n").unwrap();
    assert_eq!(code(&["gram", "--config", cfg.to_str().unwrap()]), 2);
}

#[test]
fn vev_examples() {
    assert_eq!(
        stdout(&["vev", "a(i1) a+(i1)"]),
        "1.0000000000000000e0 0.0000000000000000e0\n"
    );
    let v = stdout(&[
        "vev",
        "a(i2) a(i1) a+(i2) a+(i1)",
        "--preset",
        "quon",
        "--q",
        "0.3",
    ]);
    let re: f64 = v.split_whitespace().next().unwrap().parse().unwrap();
    assert!((re - 0.3).abs() < 1e-15);
    assert_eq!(
        stdout(&["vev", "b(i1,g1) b+(i1,g2)"]),
        "0.0000000000000000e0 0.0000000000000000e0\n"
    );
    assert_eq!(
        stdout(&["vev", "b(i1,g2) b+(i1,g2)"]),
        "1.0000000000000000e0 0.0000000000000000e0\n"
    );
}

#[test]
fn verify_examples_pass() {
    let line = stdout(&["verify", "expansion", "--p", "2", "--q", "0.5"]);
    assert!(line.starts_with("expansion PASS"), "{line}");
    assert!(line.contains("coefficient=1.2500000000000000e-1"));
    assert!(
        stdout(&["verify", "trilinear", "--epsilon", "-1", "--p", "2"])
            .starts_with("trilinear PASS")
    );
    assert!(stdout(&["verify", "jw", "--lambda", "0", "--mu", "1"]).starts_with("jw PASS"));
}

#[test]
fn verify_failure_exits_one() {
    // trilinear relations do not hold away from q = ±1
    let out = paraquon(&[
        "verify",
        "trilinear",
        "--q",
        "0.5",
        "--epsilon",
        "1",
        "--p",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("trilinear FAIL max_residual="));
}

#[test]
fn scans() {
    let csv = stdout(&[
        "spectrum",
        "--p",
        "1",
        "--indices",
        "i1,i2",
        "--points",
        "3",
        "--format",
        "csv",
    ]);
    assert_eq!(
        csv,
        "\
param,min_eig,rank
-1.0000000000000000e0,0.0000000000000000e0,1
0.0000000000000000e0,1.0000000000000000e0,2
1.0000000000000000e0,0.0000000000000000e0,1
"
    );
    let csv = stdout(&[
        "spectrum",
        "--p",
        "2",
        "--indices",
        "i1,i2,i3",
        "--format",
        "csv",
    ]);
    for line in csv.lines().skip(1) {
        let min_eig: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!(min_eig >= -1e-9, "{line}");
    }
    let csv = stdout(&[
        "rank-scan",
        "--p",
        "2",
        "--indices",
        "i1,i2",
        "--format",
        "csv",
    ]);
    assert_eq!(csv.lines().count(), 22);
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",2")));
}

#[test]
fn jw_csv_header() {
    let csv = stdout(&["jw", "--lambda", "0.25", "--mu", "0.5", "--format", "csv"]);
    assert!(csv.starts_with("lambda,mu,relation_id,i,alpha,j,beta,residual\n"));
}

#[test]
fn exit_codes() {
    assert_eq!(code(&["vev", "a(i1"]), 2);
    assert_eq!(code(&["gram", "--preset", "nope", "--indices", "i1"]), 2);
    assert_eq!(
        code(&[
            "gram",
            "--preset",
            "quon",
            "--q",
            "1.5",
            "--indices",
            "i1,i2"
        ]),
        2
    );
    assert_eq!(code(&["gram", "--preset", "quon", "--q", "0.5"]), 2);
    assert_eq!(code(&["verify", "nope"]), 2);
    assert_eq!(
        code(&[
            "gram",
            "--preset",
            "quon",
            "--q",
            "0.5",
            "--indices",
            "i1,i2,i3,i4,i5,i6,i7,i8"
        ]),
        3
    );
    assert_eq!(code(&["vev", "a(i1) a(i1) a(i1) a(i1) a(i1) a(i1) a(i1) a+(i1) a+(i1) a+(i1) a+(i1) a+(i1) a+(i1) a+(i1)"]), 3);
    assert_eq!(code(&["jw", "--cutoff", "40"]), 3);
}
