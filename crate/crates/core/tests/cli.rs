use std::fs;
use std::path::Path;
use std::process::Command;

use halfquad::cli::{run_cli, BENCH_HEADER, EXIT_OK, EXIT_RUNTIME, EXIT_USAGE, EXIT_VERIFY, TRACE_HEADER};
use halfquad::imageio::{add_gaussian_noise, quantize, read_image, write_image, NoiseSpec};
use halfquad::synth::Synthetic;

fn cli(args: &[&str]) -> (i32, String, String) {
    let mut argv = vec!["halfquad".to_string()];
    argv.extend(args.iter().map(|s| s.to_string()));
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run_cli(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn verify_passes_and_catches_a_south_sign_fault() {
    let (code, out, _) = cli(&["verify", "--trials", "3"]);
    assert_eq!(code, EXIT_OK, "{out}");
    assert!(out.contains("all 8 checks passed"));

    let (code, out, _) = cli(&["verify", "--trials", "1", "--inject-fault", "south-sign"]);
    assert_eq!(code, EXIT_VERIFY);
    assert!(out.contains("FAIL stencil-symmetry"), "{out}");

    let (code, out, _) = cli(&["verify", "--sizes", "3x3,4x5,7x7", "--trials", "1"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.starts_with("shapes: 3x3, 4x5, 7x7"), "{out}");
    assert_eq!(cli(&["verify", "--sizes", "1x3"]).0, EXIT_USAGE);
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(cli(&["denoise", "--model", "hl"]).0, EXIT_USAGE);
    assert_eq!(cli(&["denoise", "--input", "synth:step:8"]).0, EXIT_USAGE);
    assert_eq!(cli(&["denoise", "--input", "synth:step:8", "--model", "hl", "--mu", "-1"]).0, EXIT_USAGE);
    assert_eq!(cli(&["denoise", "--input", "synth:step:8", "--preset", "nope"]).0, EXIT_USAGE);
    assert_eq!(cli(&["segment", "--input", "synth:step:8", "--preset", "ms-man", "--epsilon", "0"]).0, EXIT_USAGE);
    assert_eq!(cli(&["bench", "--input", "synth:step:8", "--model", "hl", "--variants", "lu-3"]).0, EXIT_USAGE);
    assert_eq!(cli(&["frobnicate"]).0, EXIT_USAGE);
    assert_eq!(cli(&["--help"]).0, EXIT_OK);
}

#[test]
fn runtime_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.pgm");
    let (code, _, err) = cli(&["denoise", "--input", p(&missing), "--model", "gr", "--mu", "1", "--lambda", "1"]);
    assert_eq!(code, EXIT_RUNTIME);
    assert!(err.contains("missing.pgm"), "{err}");
}

#[test]
fn zero_iterations_return_the_noisy_input() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.pgm");
    let args = [
        "denoise", "--input", "synth:shapes:16", "--preset", "hl-aniso-sigma01", "--noise-sigma", "0.1", "--seed", "3",
        "--max-iters", "0", "--output", p(&out),
    ];
    assert_eq!(cli(&args).0, EXIT_OK);
    let clean = Synthetic::Shapes.render(16, 16).unwrap();
    let noisy = add_gaussian_noise(&clean, NoiseSpec::new(0.1, 3).unwrap());
    assert_eq!(read_image(&out).unwrap(), quantize(&noisy));
}

#[test]
fn trace_csv_has_full_precision_rows() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("t.csv");
    let (code, out, _) = cli(&[
        "denoise", "--input", "synth:shapes:16", "--model", "gm", "--mu", "0.02", "--lambda", "0.05", "--max-iters", "4",
        "--tol", "0", "--noise-sigma", "0.1", "--trace", p(&trace),
    ]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("final energy:") && out.contains("psnr:"), "{out}");
    let text = fs::read_to_string(&trace).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], TRACE_HEADER);
    assert_eq!(lines.len(), 6);
    let energy = lines[3].split(',').nth(1).unwrap();
    let mantissa = energy.split('e').next().unwrap();
    assert_eq!(mantissa.replace(['.', '-'], "").len(), 17, "{energy}");
}

#[test]
fn config_file_supplies_defaults_that_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let trace = dir.path().join("t.csv");
    fs::write(
        &cfg,
        format!("# denoise settings\ninput = synth:step:12\npreset=gr-aniso-sigma01\nmax-iters=5\ntol=0\ntrace={}\n", p(&trace)),
    )
    .unwrap();
    assert_eq!(cli(&["denoise", "--config", p(&cfg)]).0, EXIT_OK);
    assert_eq!(fs::read_to_string(&trace).unwrap().lines().count(), 7);
    assert_eq!(cli(&["denoise", "--config", p(&cfg), "--max-iters", "2"]).0, EXIT_OK);
    assert_eq!(fs::read_to_string(&trace).unwrap().lines().count(), 4);

    fs::write(&cfg, "no equals sign\n").unwrap();
    assert_eq!(cli(&["denoise", "--config", p(&cfg)]).0, EXIT_USAGE);
}

#[test]
fn bench_csv_is_deterministic_without_timing() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for path in [&a, &b] {
        let code = cli(&[
            "bench", "--input", "synth:shapes:16", "--preset", "hl-aniso-sigma01", "--noise-sigma", "0.1", "--seed",
            "9", "--max-iters", "6", "--no-timing", "--csv", p(path),
        ])
        .0;
        assert_eq!(code, EXIT_OK);
    }
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    assert_eq!(text.lines().next().unwrap(), BENCH_HEADER);
    for v in ["srbgs-10,", "cg-prox-1e-3,", "cg-prox-1e-6,", "cg-noprox-1e-3,"] {
        assert!(text.lines().any(|l| l.starts_with(v)), "{v}");
    }
    assert!(text.lines().skip(1).all(|l| l.ends_with(",0") || l.ends_with(",0.0000000000000000e0")));
}

#[test]
fn denoised_images_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let outs = [dir.path().join("a.png"), dir.path().join("b.png")];
    for out in &outs {
        let args = [
            "denoise", "--input", "synth:smooth:24", "--preset", "gy-aniso-sigma01", "--scheme", "sffd",
            "--noise-sigma", "0.1", "--seed", "4", "--output", p(out),
        ];
        assert_eq!(cli(&args).0, EXIT_OK);
    }
    assert_eq!(fs::read(&outs[0]).unwrap(), fs::read(&outs[1]).unwrap());
}

#[test]
fn segment_flat_input_has_no_edges() {
    let dir = tempfile::tempdir().unwrap();
    let edges = dir.path().join("s.pgm");
    let (code, out, _) = cli(&["segment", "--input", "synth:constant:32", "--preset", "ms-man", "--edges", p(&edges)]);
    assert_eq!(code, EXIT_OK, "{out}");
    let s = read_image(&edges).unwrap();
    assert!(s.as_slice().iter().all(|&v| v == 1.0));
}

#[test]
fn segment_finds_the_step() {
    let dir = tempfile::tempdir().unwrap();
    let (input, edges) = (dir.path().join("step.pgm"), dir.path().join("s.pgm"));
    write_image(&input, &Synthetic::Step.render(64, 64).unwrap()).unwrap();
    let args = [
        "segment", "--input", p(&input), "--preset", "ms-man", "--max-iters", "100", "--tol", "0", "--edges", p(&edges),
    ];
    assert_eq!(cli(&args).0, EXIT_OK);
    let s = read_image(&edges).unwrap();
    let along = (0..64).map(|i| s.get(i, 31).min(s.get(i, 32))).fold(f64::INFINITY, f64::min);
    let away = (0..64).map(|i| s.get(i, 10).min(s.get(i, 50))).fold(f64::INFINITY, f64::min);
    assert!(along < 0.5, "{along}");
    assert!(away > 0.9, "{away}");
}

#[test]
fn binary_reports_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_halfquad");
    let ok = Command::new(bin).args(["verify", "--trials", "1"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(EXIT_OK));
    let bad = Command::new(bin).args(["denoise"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(EXIT_USAGE));
    assert!(!bad.stderr.is_empty());
}
