mod common;

use std::path::Path;

use common::*;
use vafm::geometry::Rng;
use vafm::metrics::{compare_sets, psnr, ssim, MetricsError, MetricsReport, Psnr};
use vafm::render::{encode_image, RgbImage};

#[test]
fn psnr_and_ssim_match_direct_summation() {
    let mut rng = Rng::new(11);
    for _ in 0..20 {
        let a = random_image(&mut rng, 32, 32);
        let b = random_image(&mut rng, 32, 32);
        let p = psnr(&a, &b).unwrap().finite().unwrap();
        let p_ref = psnr_oracle(&a, &b).unwrap();
        assert!((p - p_ref).abs() <= 1e-9, "{p} vs {p_ref}");
        let s = ssim(&a, &b).unwrap();
        let s_ref = ssim_oracle(&a, &b);
        assert!((s - s_ref).abs() <= 1e-6, "{s} vs {s_ref}");
    }
}

#[test]
fn ssim_oracle_agrees_on_correlated_images() {
    // random pairs have SSIM near 0; also check a pair with real structure
    let mut rng = Rng::new(12);
    let a = random_image(&mut rng, 40, 33);
    let b = RgbImage::from_raw(
        40,
        33,
        a.as_raw()
            .iter()
            .map(|&v| v.saturating_add((rng.next_u64() % 20) as u8))
            .collect(),
    );
    let s = ssim(&a, &b).unwrap();
    assert!(s > 0.5);
    assert!((s - ssim_oracle(&a, &b)).abs() <= 1e-6);
}

#[test]
fn self_similarity_is_exact() {
    let mut rng = Rng::new(3);
    for (w, h) in [(11, 11), (32, 32), (57, 19)] {
        let a = random_image(&mut rng, w, h);
        assert_eq!(ssim(&a, &a).unwrap(), 1.0);
        assert_eq!(psnr(&a, &a).unwrap(), Psnr::Infinite);
    }
}

#[test]
fn unit_difference_psnr() {
    let a = RgbImage::from_raw(16, 16, vec![17; 16 * 16 * 3]);
    let b = RgbImage::from_raw(16, 16, vec![18; 16 * 16 * 3]);
    let p = psnr(&a, &b).unwrap().finite().unwrap();
    assert!((p - 10.0 * (255.0f64 * 255.0).log10()).abs() <= 1e-9);
}

#[test]
fn symmetric() {
    let mut rng = Rng::new(4);
    for _ in 0..5 {
        let a = random_image(&mut rng, 30, 24);
        let b = random_image(&mut rng, 30, 24);
        assert!((ssim(&a, &b).unwrap() - ssim(&b, &a).unwrap()).abs() <= 1e-12);
        assert_eq!(psnr(&a, &b).unwrap(), psnr(&b, &a).unwrap());
    }
}

#[test]
fn psnr_falls_as_noise_grows() {
    let mut rng = Rng::new(5);
    let base: Vec<u8> = (0..48 * 48 * 3)
        .map(|_| 64 + (rng.next_u64() % 128) as u8)
        .collect();
    let a = RgbImage::from_raw(48, 48, base.clone());
    let mut last = f64::INFINITY;
    for amp in [1i64, 4, 16, 64] {
        let noisy = base
            .iter()
            .map(|&v| {
                (v as i64 + (rng.next_u64() % (2 * amp as u64 + 1)) as i64 - amp).clamp(0, 255)
                    as u8
            })
            .collect();
        let p = psnr(&a, &RgbImage::from_raw(48, 48, noisy))
            .unwrap()
            .finite()
            .unwrap();
        assert!(p < last, "amplitude {amp}: {p} dB after {last} dB");
        last = p;
    }
}

#[test]
fn invariant_under_quarter_turns() {
    let mut rng = Rng::new(6);
    let a = random_image(&mut rng, 37, 29);
    let b = random_image(&mut rng, 37, 29);
    let (ra, rb) = (rotate_image_90(&a), rotate_image_90(&b));
    assert!((ssim(&a, &b).unwrap() - ssim(&ra, &rb).unwrap()).abs() <= 1e-12);
    let (p, q) = (
        psnr(&a, &b).unwrap().finite().unwrap(),
        psnr(&ra, &rb).unwrap().finite().unwrap(),
    );
    assert!((p - q).abs() <= 1e-12);
}

#[test]
fn shape_errors() {
    let a = RgbImage::new(20, 20);
    assert!(matches!(
        psnr(&a, &RgbImage::new(20, 21)),
        Err(MetricsError::DimensionMismatch { .. })
    ));
    assert!(matches!(
        ssim(&a, &RgbImage::new(21, 20)),
        Err(MetricsError::DimensionMismatch { .. })
    ));
    let thin = RgbImage::new(40, 10);
    assert!(matches!(
        ssim(&thin, &thin),
        Err(MetricsError::TooSmall { .. })
    ));
}

fn write_set(dir: &Path, imgs: &[(&str, &RgbImage)]) {
    for (name, img) in imgs {
        encode_image(img, &dir.join(name)).unwrap();
    }
}

#[test]
fn compare_identical_directories() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = Rng::new(7);
    let imgs: Vec<RgbImage> = (0..3).map(|_| random_image(&mut rng, 16, 16)).collect();
    write_set(
        dir.path(),
        &[
            ("a.png", &imgs[0]),
            ("b.png", &imgs[1]),
            ("c.png", &imgs[2]),
        ],
    );
    let r = compare_sets(dir.path(), dir.path()).unwrap();
    assert_eq!(r.aggregates.n_pairs, 3);
    assert_eq!(r.aggregates.n_infinite_psnr, 3);
    assert_eq!(r.aggregates.mean_ssim, 1.0);
    assert_eq!(r.aggregates.mean_psnr, None);
    assert!(r.pairs.iter().all(|p| p.psnr_db == Psnr::Infinite));
}

#[test]
fn compare_means_are_arithmetic_averages() {
    let (pred, gt) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let mut rng = Rng::new(8);
    let names = ["view_000.png", "view_001.png", "view_002.png"];
    let mut expect_psnr = Vec::new();
    let mut expect_ssim = Vec::new();
    for name in names {
        let a = random_image(&mut rng, 24, 24);
        let b = random_image(&mut rng, 24, 24);
        expect_psnr.push(psnr_oracle(&a, &b).unwrap());
        expect_ssim.push(ssim_oracle(&a, &b));
        write_set(pred.path(), &[(name, &a)]);
        write_set(gt.path(), &[(name, &b)]);
    }
    let r = compare_sets(pred.path(), gt.path()).unwrap();
    let names_seen: Vec<&str> = r.pairs.iter().map(|p| p.pred.as_str()).collect();
    assert_eq!(names_seen, names);
    let mp = expect_psnr.iter().sum::<f64>() / 3.0;
    let ms = expect_ssim.iter().sum::<f64>() / 3.0;
    assert!((r.aggregates.mean_psnr.unwrap() - mp).abs() < 1e-9);
    assert!((r.aggregates.mean_ssim - ms).abs() < 1e-6);

    let json = r.to_json();
    let back: MetricsReport = serde_json::from_str(&json).unwrap();
    assert_eq!(back, r);
    assert_eq!(back.to_json(), json);
    let table = r.to_table();
    assert!(table.contains("PSNR (↑)") && table.contains("SSIM (↑)"));
    assert_eq!(table.lines().count(), 5);
}

#[test]
fn compare_set_errors() {
    let (pred, gt) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert!(matches!(
        compare_sets(pred.path(), gt.path()),
        Err(MetricsError::EmptyDirectory(_))
    ));
    let img = RgbImage::new(12, 12);
    write_set(pred.path(), &[("x.png", &img)]);
    match compare_sets(pred.path(), gt.path()) {
        Err(MetricsError::UnpairedFile(name)) => assert_eq!(name, "x.png"),
        other => panic!("{other:?}"),
    }
    write_set(gt.path(), &[("x.png", &RgbImage::new(12, 13))]);
    assert!(matches!(
        compare_sets(pred.path(), gt.path()),
        Err(MetricsError::DimensionMismatch { .. })
    ));
}
