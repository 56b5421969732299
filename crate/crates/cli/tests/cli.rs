use std::path::Path;
use std::process::{Command, Output};

use sparse_denoise::image::{read_image, write_image, GrayImage};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_sparse-denoise"));
    cmd.env_remove("SPARSE_DENOISE_THREADS");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn scene(size: usize) -> GrayImage {
    GrayImage::from_fn(size, size, |r, c| {
        let (x, y) = (c as f64 / size as f64, r as f64 / size as f64);
        let bar = if (0.4..0.6).contains(&x) { 60.0 } else { 0.0 };
        (50.0 + 100.0 * y + bar + 20.0 * (10.0 * x).sin()).round()
    })
    .unwrap()
}

fn write(dir: &Path, name: &str, img: &GrayImage) -> String {
    let path = dir.join(name);
    write_image(img, &path).unwrap();
    path.to_string_lossy().into_owned()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let mut rdr = csv::Reader::from_path(path).unwrap();
    assert_eq!(
        rdr.headers().unwrap().iter().collect::<Vec<_>>().join(","),
        "image,sigma,coder,t0,lambda,psnr_db,ssim,seconds,converged_frac,seed"
    );
    rdr.records().map(|r| r.unwrap().iter().map(String::from).collect()).collect()
}

#[test]
fn metrics_output_format() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.pgm", &GrayImage::filled(64, 64, 100.0).unwrap());
    let b = write(dir.path(), "b.png", &GrayImage::filled(64, 64, 120.0).unwrap());
    let c = write(dir.path(), "c.pgm", &GrayImage::filled(64, 64, 150.0).unwrap());

    let same = run(&["metrics", &a, &a]);
    assert!(same.status.success());
    assert_eq!(stdout(&same).trim(), "PSNR=inf dB SSIM=1.000000");

    let diff = stdout(&run(&["metrics", &a, &b]));
    let value: f64 = diff.trim().strip_prefix("PSNR=").unwrap().split(' ').next().unwrap().parse().unwrap();
    assert!((value - 22.11).abs() < 0.005, "{diff}");

    let lum = stdout(&run(&["metrics", &a, &c]));
    let s: f64 = lum.trim().rsplit("SSIM=").next().unwrap().parse().unwrap();
    assert!((s - 0.92316).abs() < 1e-3, "{lum}");

    let small = write(dir.path(), "small.pgm", &GrayImage::filled(32, 64, 100.0).unwrap());
    let mismatch = run(&["metrics", &a, &small]);
    assert!(!mismatch.status.success());
    assert!(!mismatch.stderr.is_empty());
}

#[test]
fn denoise_grid_writes_one_record_and_image_per_job() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "scene.pgm", &scene(48));
    let out = dir.path().join("out");
    let o = run(&[
        "denoise", "--input", &input, "--sigma", "20,50", "--coder", "pdas,omp",
        "--out-dir", out.to_str().unwrap(), "--threads", "1",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&out.join("records.csv"));
    assert_eq!(rows.len(), 4);
    let images: Vec<_> = std::fs::read_dir(&out)
        .unwrap()
        .filter_map(|e| {
            let p = e.unwrap().path();
            (p.extension().unwrap() == "pgm").then_some(p)
        })
        .collect();
    assert_eq!(images.len(), 4);
    let pdas20 = rows.iter().find(|r| r[1] == "20" && r[2] == "pdas").unwrap();
    assert_eq!(pdas20[3], "20");
    let omp50 = rows.iter().find(|r| r[1] == "50" && r[2] == "omp").unwrap();
    assert_eq!(omp50[3], "5");
    assert_eq!(omp50[4], "");
    for img in images {
        assert_eq!(read_image(img).unwrap().width(), 48);
    }
}

#[test]
fn single_threaded_reruns_match_apart_from_timing() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "scene.pgm", &scene(40));
    let mut tables = Vec::new();
    for run_id in ["a", "b"] {
        let out = dir.path().join(run_id);
        let o = run(&[
            "denoise", "--input", &input, "--sigma", "25", "--coder", "pdas", "--t0", "3",
            "--seed", "5", "--out-dir", out.to_str().unwrap(), "--threads", "1",
        ]);
        assert!(o.status.success());
        let mut rows = csv_rows(&out.join("records.csv"));
        for r in &mut rows {
            r[7].clear();
        }
        let image = std::fs::read(out.join("scene_sigma25_pdas.pgm")).unwrap();
        tables.push((rows, image));
    }
    assert_eq!(tables[0], tables[1]);
}

#[test]
fn noiseless_input_gives_finite_high_psnr() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "scene.pgm", &scene(48));
    let out = dir.path().join("out");
    let o = run(&["denoise", "--input", &input, "--sigma", "0", "--out-dir", out.to_str().unwrap()]);
    assert!(o.status.success());
    let rows = csv_rows(&out.join("records.csv"));
    assert_eq!(rows.len(), 1);
    assert_ne!(rows[0][5], "inf");
    let psnr: f64 = rows[0][5].parse().unwrap();
    assert!(psnr >= 40.0, "{psnr}");
    assert!(out.join("scene_sigma0_pdas.pgm").exists());
}

#[test]
fn missing_input_fails_with_empty_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = run(&["denoise", "--input", "/nonexistent/x.pgm", "--sigma", "20", "--out-dir", out.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("x.pgm"));
    assert!(csv_rows(&out.join("records.csv")).is_empty());
}

#[test]
fn partial_failure_still_records_good_jobs() {
    let dir = tempfile::tempdir().unwrap();
    let good = write(dir.path(), "good.pgm", &scene(32));
    let out = dir.path().join("out");
    let o = run(&[
        "denoise", "--input", &good, "/nonexistent/bad.pgm", "--sigma", "30", "--coder", "omp",
        "--out-dir", out.to_str().unwrap(),
    ]);
    assert!(!o.status.success());
    assert_eq!(csv_rows(&out.join("records.csv")).len(), 1);
}

#[test]
fn run_spec_file_with_flag_overrides_and_json_output() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "scene.png", &scene(32));
    let out = dir.path().join("out");
    let spec = serde_json::json!({
        "inputs": [input],
        "sigmas": [15, 30],
        "coders": ["omp"],
        "t0": 4,
        "seed": 3,
        "out_dir": out,
        "format": "json",
        "image_format": "png",
        "save_dictionary": true
    });
    let spec_path = dir.path().join("spec.json");
    std::fs::write(&spec_path, spec.to_string()).unwrap();
    let o = run(&["denoise", "--spec", spec_path.to_str().unwrap(), "--sigma", "30", "--t0", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let records: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("records.json")).unwrap()).unwrap();
    let records = records.as_array().unwrap();
    assert_eq!(records.len(), 1);
    assert_eq!(records[0]["t0"], 2);
    assert_eq!(records[0]["seed"], 3);
    assert!(out.join("scene_sigma30_omp.png").exists());
    assert!(out.join("scene_sigma30_omp_dict.csv").exists());

    let atlas = out.join("atlas.pgm");
    let o = run(&["export-dict", "--dict", out.join("scene_sigma30_omp_dict.csv").to_str().unwrap(), "--output", atlas.to_str().unwrap()]);
    assert!(o.status.success());
    let img = read_image(&atlas).unwrap();
    assert_eq!((img.width(), img.height()), (145, 145));
}

#[test]
fn lasso_jobs_record_a_penalty() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "scene.pgm", &scene(32));
    let out = dir.path().join("out");
    let o = run(&["denoise", "--input", &input, "--sigma", "25", "--coder", "lasso", "--lambda", "40", "--out-dir", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&out.join("records.csv"));
    assert_eq!((rows[0][3].as_str(), rows[0][4].as_str()), ("", "40"));
}

#[test]
fn dct_atlas_layout_and_frequency_order() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("dct.pgm");
    let o = run(&["export-dict", "--dct", "256", "--output", path.to_str().unwrap()]);
    assert!(o.status.success());
    let img = read_image(&path).unwrap();
    assert_eq!((img.width(), img.height()), (8 * 16 + 15 + 2, 8 * 16 + 15 + 2));
    // roughness of the first tile row (horizontal) and first tile column
    // (vertical) trends upward with frequency, compared by quarters
    let tile_roughness = |t: usize, across: bool| -> f64 {
        let (top, left) = if across { (1, 1 + t * 9) } else { (1 + t * 9, 1) };
        (0..8)
            .flat_map(|a| (0..7).map(move |b| (a, b)))
            .map(|(a, b)| {
                let (p, q) = if across {
                    (img.get(top + a, left + b), img.get(top + a, left + b + 1))
                } else {
                    (img.get(top + b, left + a), img.get(top + b + 1, left + a))
                };
                (q - p).powi(2)
            })
            .sum()
    };
    for across in [true, false] {
        let quarters: Vec<f64> = (0..4)
            .map(|q| (0..4).map(|i| tile_roughness(4 * q + i, across)).sum::<f64>())
            .collect();
        assert!(quarters.windows(2).all(|w| w[1] > w[0]), "{quarters:?}");
    }

    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "6,1\n1\n0\n0\n0\n0\n0\n").unwrap();
    let o = run(&["export-dict", "--dict", bad.to_str().unwrap(), "--output", path.to_str().unwrap()]);
    assert!(!o.status.success());
}

#[test]
fn sweep_with_single_sparsity_reports_it_as_best() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "scene.pgm", &scene(40));
    let out = dir.path().join("sweep");
    let o = run(&["sweep-t0", "--input", &input, "--sigma", "20,50", "--t0", "3", "--out-dir", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines.iter().all(|l| l.contains("best_t0=3")));
    let rows = std::fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert_eq!(rows.lines().count(), 3);
    assert!(out.join("sweep_best.csv").exists());
}
