use std::path::Path;
use std::process::{Command, Output};

fn shrinkwave(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shrinkwave"))
        .args(args)
        .env("RUST_BACKTRACE", "0")
        .output()
        .expect("binary runs")
}

fn noisy_sine(n: usize) -> Vec<f64> {
    // Deterministic pseudo-noise is enough here.
    (0..n)
        .map(|i| (i as f64 / 10.0).sin() + 0.3 * ((i * 7919 % 101) as f64 / 50.0 - 1.0))
        .collect()
}

fn read_lines(path: &Path) -> Vec<String> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(String::from)
        .collect()
}

#[test]
fn denoise_keeps_csv_header_and_length() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.csv");
    let output = dir.path().join("out.csv");
    let body: Vec<String> = noisy_sine(128).iter().map(|v| v.to_string()).collect();
    std::fs::write(&input, format!("signal\n{}\n", body.join("\n"))).unwrap();
    let out = shrinkwave(&[
        "denoise",
        "--input",
        input.to_str().unwrap(),
        "--output",
        output.to_str().unwrap(),
        "--rule",
        "firm",
        "--translation-invariant",
        "true",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let lines = read_lines(&output);
    assert_eq!(lines[0], "signal");
    assert_eq!(lines.len(), 129);
    assert!(lines[1..].iter().all(|l| l.parse::<f64>().is_ok()));
}

#[test]
fn explicit_rule_threshold_is_used() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.txt");
    let (a, b) = (dir.path().join("a.txt"), dir.path().join("b.txt"));
    let body: Vec<String> = noisy_sine(64).iter().map(|v| v.to_string()).collect();
    std::fs::write(&input, body.join("\n")).unwrap();
    let run = |extra: &[&str], dest: &Path| {
        let mut args = vec![
            "denoise",
            "--input",
            input.to_str().unwrap(),
            "--output",
            dest.to_str().unwrap(),
        ];
        args.extend_from_slice(extra);
        let out = shrinkwave(&args);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    };
    run(&["--rule", "soft:0.4"], &a);
    run(&["--rule", "soft", "--threshold", "0.4"], &b);
    assert_eq!(read_lines(&a), read_lines(&b));
}

#[test]
fn denoise_rejects_bad_length() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.txt");
    std::fs::write(&input, "1\n2\n3\n").unwrap();
    let out = shrinkwave(&[
        "denoise",
        "--input",
        input.to_str().unwrap(),
        "--output",
        "/dev/null",
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("power of two"));
}

#[test]
fn plm_recovers_slope() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("d.csv");
    let n = 256;
    let f = noisy_sine(n);
    let mut text = String::from("y,x\n");
    for (i, fi) in f.iter().enumerate() {
        let x = ((i * 37 % 17) as f64 - 8.0) / 4.0;
        text.push_str(&format!("{},{}\n", 1.5 * x + fi, x));
    }
    std::fs::write(&input, text).unwrap();
    let out = shrinkwave(&["plm", "--input", input.to_str().unwrap()]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8(out.stdout).unwrap();
    let mut lines = stdout.lines();
    let beta: f64 = lines
        .next()
        .unwrap()
        .strip_prefix("beta,")
        .unwrap()
        .parse()
        .unwrap();
    assert!((beta - 1.5).abs() < 0.1, "beta = {beta}");
    assert!(lines.next().unwrap().starts_with("sigma,"));
    assert!(lines.next().unwrap().starts_with("lambda,"));
    assert_eq!(lines.next(), Some("f_hat"));
    assert_eq!(lines.count(), n);
}

#[test]
fn bench_writes_results_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("r.csv");
    let args = [
        "bench",
        "--signals",
        "blip,wave",
        "--methods",
        "noisy,soft,neigh_coeff",
        "--snr",
        "3",
        "--n",
        "128",
        "--reps",
        "4",
        "--j0",
        "3",
    ];
    let mut with_out = args.to_vec();
    with_out.extend(["--out", csv.to_str().unwrap()]);
    let out = shrinkwave(&with_out);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let lines = read_lines(&csv);
    assert_eq!(lines[0], "method,signal,snr,n,reps,mean_mse,sd_mse");
    assert_eq!(lines.len(), 1 + 2 * 3);
    let again = shrinkwave(&args);
    assert_eq!(
        String::from_utf8(again.stdout)
            .unwrap()
            .lines()
            .collect::<Vec<_>>(),
        lines
    );
}

#[test]
fn bench_rejects_unknown_method() {
    let out = shrinkwave(&["bench", "--methods", "bogus", "--reps", "1"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("bogus"));
}
