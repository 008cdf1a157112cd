mod common;

use std::path::Path;

use common::{nuclei_image, p, seghdc, two_region_image, two_region_truth_image, write_png};
use seghdc::ImageBuffer;
use serde_json::Value;

fn read_json(path: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

fn stdout(out: &std::process::Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn row(values: &[u8]) -> ImageBuffer {
    ImageBuffer::new(1, values.len(), 1, values.to_vec()).unwrap()
}

#[test]
fn eval_identical_masks_prints_one() {
    let dir = tempfile::tempdir().unwrap();
    let mask = dir.path().join("m.png");
    write_png(&two_region_truth_image(), &mask);
    let out = seghdc(&["eval", "-i", p(&mask), "--gt", p(&mask)]);
    assert_eq!(stdout(&out).trim(), "1.0000");
}

#[test]
fn eval_inverted_mask_scores_the_same() {
    let dir = tempfile::tempdir().unwrap();
    let gt = dir.path().join("gt.png");
    let pred = dir.path().join("pred.png");
    let inv = dir.path().join("inv.png");
    let values = [0u8, 255, 255, 0, 255, 0, 0, 0];
    let gt_values = [0u8, 255, 0, 0, 255, 255, 0, 0];
    write_png(&row(&values), &pred);
    write_png(&row(&values.map(|v| 255 - v)), &inv);
    write_png(&row(&gt_values), &gt);
    let a = stdout(&seghdc(&["eval", "-i", p(&pred), "--gt", p(&gt)]));
    let b = stdout(&seghdc(&["eval", "-i", p(&inv), "--gt", p(&gt)]));
    assert_eq!(a, b);
    assert_eq!(a.trim(), "0.5000");
}

#[test]
fn eval_one_third_overlap() {
    // either labeling overlaps the truth in 1 of 3 pixels of the union
    let dir = tempfile::tempdir().unwrap();
    let (pred, gt) = (dir.path().join("pred.png"), dir.path().join("gt.png"));
    write_png(&row(&[255, 255, 0, 0]), &pred);
    write_png(&row(&[0, 255, 255, 0]), &gt);
    assert_eq!(stdout(&seghdc(&["eval", "-i", p(&pred), "--gt", p(&gt)])).trim(), "0.3333");
}

#[test]
fn eval_shape_mismatch_fails() {
    let dir = tempfile::tempdir().unwrap();
    let (pred, gt) = (dir.path().join("pred.png"), dir.path().join("gt.png"));
    write_png(&row(&[255, 0, 0]), &pred);
    write_png(&row(&[255, 0]), &gt);
    let out = seghdc(&["eval", "-i", p(&pred), "--gt", p(&gt)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
}

#[test]
fn segment_reports_high_iou_and_rpos_is_worse() {
    let dir = tempfile::tempdir().unwrap();
    let (input, gt) = (dir.path().join("in.png"), dir.path().join("gt.png"));
    write_png(&two_region_image(1), &input);
    write_png(&two_region_truth_image(), &gt);
    let run = |encoder: &str| {
        let metrics = dir.path().join(format!("{encoder}.json"));
        let mask = dir.path().join(format!("{encoder}.png"));
        let out = seghdc(&[
            "segment", "-i", p(&input), "-o", p(&mask), "--gt", p(&gt), "--metrics", p(&metrics),
            "--beta", "4", "--encoder", encoder,
        ]);
        stdout(&out);
        let record = read_json(&metrics);
        assert_eq!(record["config"]["encoder"], encoder);
        assert!(mask.exists());
        record["iou"].as_f64().unwrap()
    };
    let manhattan = run("manhattan");
    assert!(manhattan >= 0.95, "{manhattan}");
    let rpos = run("rpos");
    assert!(rpos < manhattan, "rpos {rpos} vs manhattan {manhattan}");
}

#[test]
fn segment_without_gt_writes_null_iou_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.png");
    write_png(&two_region_image(2), &input);
    let out = seghdc(&[
        "segment", "-i", p(&input), "-o", p(&dir.path().join("o.png")), "--dim", "2000", "--beta", "4",
    ]);
    let record: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(record["iou"].is_null());
    assert_eq!(record["config"]["d"], 2000);
    assert!(record["iterations_run"].as_u64().unwrap() >= 2);
}

#[test]
fn segment_mask_uses_spread_levels() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.png");
    let mask = dir.path().join("mask.png");
    write_png(&two_region_image(4), &input);
    stdout(&seghdc(&[
        "segment", "-i", p(&input), "-o", p(&mask), "--dim", "3000", "--beta", "4", "-k", "3",
    ]));
    let img = seghdc::io::load_image(&mask).unwrap();
    assert_eq!((img.height(), img.width(), img.channels()), (64, 64, 1));
    assert!(img.data().iter().all(|v| [0, 127, 255].contains(v)));
}

#[test]
fn bench_iteration_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let (input, gt) = (dir.path().join("in.png"), dir.path().join("gt.png"));
    write_png(&two_region_image(5), &input);
    write_png(&two_region_truth_image(), &gt);
    let metrics = dir.path().join("bench.json");
    stdout(&seghdc(&[
        "bench", "-i", p(&input), "--gt", p(&gt), "--metrics", p(&metrics), "--repeats", "2",
        "--sweep-iters", "1,2,3,4", "--dim", "2000", "--beta", "4",
    ]));
    let records = read_json(&metrics);
    let records = records.as_array().unwrap();
    assert_eq!(records.len(), 4);
    for (n, r) in records.iter().enumerate() {
        assert_eq!(r["iterations_run"].as_u64().unwrap(), n as u64 + 1);
        assert_eq!(r["config"]["iterations"].as_u64().unwrap(), n as u64 + 1);
        let t = &r["timings"];
        assert!(t["total"].as_f64().unwrap() >= t["cluster"].as_f64().unwrap());
        assert!(r["iou"].as_f64().is_some());
    }
}

#[test]
fn bench_dimension_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.png");
    write_png(&two_region_image(6), &input);
    let out = seghdc(&[
        "bench", "-i", p(&input), "--repeats", "1", "--sweep-dim", "800,1600", "--iterations", "2",
        "--beta", "4",
    ]);
    let records: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let dims: Vec<u64> = records.as_array().unwrap().iter().map(|r| r["config"]["d"].as_u64().unwrap()).collect();
    assert_eq!(dims, [800, 1600]);
}

#[test]
fn batch_pairs_by_stem() {
    let dir = tempfile::tempdir().unwrap();
    let (imgs, gts, masks) = (dir.path().join("img"), dir.path().join("gt"), dir.path().join("masks"));
    std::fs::create_dir_all(&imgs).unwrap();
    std::fs::create_dir_all(&gts).unwrap();
    for (n, stem) in ["c", "a", "b"].iter().enumerate() {
        let (img, gt) = nuclei_image(48, 40, 3, n as u64);
        write_png(&img, &imgs.join(format!("{stem}.png")));
        write_png(&gt, &gts.join(format!("{stem}.png")));
    }
    write_png(&two_region_image(0), &imgs.join("orphan.png"));
    std::fs::write(imgs.join("notes.txt"), "not an image").unwrap();
    let metrics = dir.path().join("batch.json");
    stdout(&seghdc(&[
        "batch", "-i", p(&imgs), "--gt", p(&gts), "-o", p(&masks), "--metrics", p(&metrics),
        "--dim", "2000", "--beta", "4",
    ]));
    let report = read_json(&metrics);
    let images = report["images"].as_array().unwrap();
    let stems: Vec<&str> = images.iter().map(|r| r["input"].as_str().unwrap()).collect();
    assert_eq!(stems, ["a", "b", "c"]);
    let mean = images.iter().map(|r| r["iou"].as_f64().unwrap()).sum::<f64>() / 3.0;
    assert!((report["summary"]["mean_iou"].as_f64().unwrap() - mean).abs() < 1e-12);
    assert_eq!(report["summary"]["count"], 3);
    assert_eq!(report["summary"]["unmatched"], serde_json::json!(["orphan"]));
    assert_eq!(std::fs::read_dir(&masks).unwrap().count(), 3);
}

#[test]
fn batch_without_matches_fails() {
    let dir = tempfile::tempdir().unwrap();
    let (imgs, gts) = (dir.path().join("img"), dir.path().join("gt"));
    std::fs::create_dir_all(&imgs).unwrap();
    std::fs::create_dir_all(&gts).unwrap();
    write_png(&two_region_image(0), &imgs.join("x.png"));
    write_png(&two_region_truth_image(), &gts.join("y.png"));
    let out = seghdc(&["batch", "-i", p(&imgs), "--gt", p(&gts)]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.png");
    write_png(&two_region_image(0), &input);
    let out_png = dir.path().join("o.png");

    let missing = seghdc(&["segment", "-i", p(&dir.path().join("nope.png")), "-o", p(&out_png)]);
    assert_eq!(missing.status.code(), Some(2));

    let garbage = dir.path().join("garbage.png");
    std::fs::write(&garbage, b"definitely not a png").unwrap();
    assert_eq!(seghdc(&["segment", "-i", p(&garbage), "-o", p(&out_png)]).status.code(), Some(2));

    let bad_alpha = seghdc(&["segment", "-i", p(&input), "-o", p(&out_png), "--alpha", "2"]);
    assert_eq!(bad_alpha.status.code(), Some(1));

    let too_small = seghdc(&["segment", "-i", p(&input), "-o", p(&out_png), "--dim", "100"]);
    assert_eq!(too_small.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&too_small.stderr).contains("dimension too small"));

    assert_eq!(seghdc(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(seghdc(&["--help"]).status.code(), Some(0));
    assert!(!out_png.exists());
}
