mod common;

use common::{two_region_image, Sampler};
use seghdc::eval::Timings;
use seghdc::pipeline::{build_codebooks, encode, RunConfig};
use seghdc::{EncoderKind, ImageBuffer};

#[test]
fn grid_payload_fits_large_gray_image() {
    let img = ImageBuffer::from_fn(520, 696, 1, |i, j, _| ((i * 7 + j * 3) % 256) as u8).unwrap();
    let config = RunConfig {
        dim: 2000,
        alpha: 0.8,
        beta: 21,
        ..RunConfig::default()
    };
    let grid = encode(&img, &config).unwrap();
    assert_eq!((grid.height(), grid.width(), grid.dim()), (520, 696, 2000));
    assert!(grid.payload_bytes() < 200 * 1024 * 1024, "{}", grid.payload_bytes());
}

#[test]
fn same_color_pixels_are_closer_than_cross_color() {
    let img = two_region_image(11);
    let config = RunConfig {
        beta: 4,
        ..RunConfig::default()
    };
    let grid = encode(&img, &config).unwrap();
    let mut s = Sampler::new(3);
    let (mut within, mut across) = (0.0, 0.0);
    let trials = 400;
    for _ in 0..trials {
        let i = s.range(0, 63) as usize;
        let (a, b, c) = (s.range(0, 31) as usize, s.range(0, 31) as usize, s.range(32, 63) as usize);
        within += grid.hv(i, a).hamming(&grid.hv(i, b)).unwrap() as f64;
        across += grid.hv(i, a).hamming(&grid.hv(i, c)).unwrap() as f64;
    }
    assert!(within / trials as f64 + 1000.0 < across / trials as f64);
}

#[test]
fn encoders_share_seed_but_differ() {
    let img = two_region_image(0);
    let base = RunConfig {
        dim: 1200,
        beta: 4,
        ..RunConfig::default()
    };
    let books = |config: &RunConfig| {
        build_codebooks(config, &config.plan_for(&img).unwrap(), &mut Timings::default()).unwrap()
    };
    let manhattan = books(&base);
    let again = books(&base);
    assert_eq!(manhattan.0.row_hvs(), again.0.row_hvs());
    let rpos = books(&RunConfig { encoder: EncoderKind::Rpos, ..base });
    assert_ne!(manhattan.0.row_hvs(), rpos.0.row_hvs());
    assert_eq!(manhattan.1.table(0), rpos.1.table(0));
}
