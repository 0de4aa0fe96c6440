use jrc_rsp::bench::StageModes;
use jrc_rsp::fxp::NumericMode;
use jrc_rsp_web::demo::{psf_view, simulate};

const CONFIG: &str = include_str!("../www/default.cfg");

#[test]
fn default_config_simulates() {
    let scene = simulate(CONFIG, 10.0, 0, StageModes::default()).unwrap();
    assert_eq!(scene.truths.len(), 3);
    assert_eq!(scene.detections.len(), 3);
    assert_eq!(scene.spectra_db.len(), 3);
    let img = &scene.image;
    assert_eq!(img.db.len(), img.rows * img.cols);
    assert_eq!(img.cols, img.azimuths_deg.len());
    assert_eq!(img.db.iter().cloned().fold(f32::MIN, f32::max), 0.0);
    for s in &scene.spectra_db {
        assert_eq!(s.len(), scene.spectrum_velocity_mps.len());
    }
}

#[test]
fn noiseless_scene_detects_the_strongest_truth_cell() {
    let scene = simulate(CONFIG, f64::INFINITY, 1, StageModes::default()).unwrap();
    let first = scene.detections[0];
    assert!(scene
        .truths
        .iter()
        .any(|t| (t[0] - first[0]).abs() < 0.2 && (t[1] - first[1]).abs() < 2.0));
}

#[test]
fn psf_error_grows_as_words_shrink() {
    let f32_err = psf_view(CONFIG, NumericMode::F32, 40, 18, 24).unwrap().error_db;
    let fx24 = psf_view(CONFIG, "fx24_5".parse().unwrap(), 40, 18, 24).unwrap().error_db;
    let fx16 = psf_view(CONFIG, "fx16_5".parse().unwrap(), 40, 18, 24).unwrap();
    assert!(f32_err < fx24 && fx24 < fx16.error_db, "{f32_err} {fx24} {}", fx16.error_db);
    assert_eq!(fx16.image.rows, 49);
}

#[test]
fn bad_input_is_an_error() {
    assert!(simulate("[radar]\nK = banana\n", 0.0, 0, StageModes::default()).is_err());
    assert!(psf_view(CONFIG, NumericMode::F32, 100_000, 0, 4).is_err());
}
