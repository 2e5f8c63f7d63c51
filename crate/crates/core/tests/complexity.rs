use disperse::complexity::{
    rmps_clustered, rmps_fd, rmps_fd_half_overlap, rmps_td, saving, write_reports_csv,
    ComplexityReport,
};
use disperse::equalizers::Engine;
use proptest::prelude::*;

#[test]
fn formula_values() {
    assert_eq!(rmps_td(273).unwrap(), 408.0);
    assert_eq!(rmps_td(3).unwrap(), 3.0);
    assert_eq!(rmps_td(393).unwrap(), 588.0);
    assert_eq!(rmps_clustered(26).unwrap(), 78.0);
    assert_eq!(rmps_clustered(12).unwrap(), 36.0);
    assert_eq!(rmps_clustered(1).unwrap(), 3.0);
    assert!((rmps_fd(512, 256).unwrap() - 59.77).abs() < 5e-3);
    assert_eq!(rmps_fd(2, 1).unwrap(), 6.0);
    assert!((rmps_fd(2048, 1024).unwrap() - 71.93).abs() < 5e-3);
}

#[test]
fn savings_identities() {
    assert_eq!((1000.0 * saving(36.0, 78.0)).round(), 538.0);
    assert_eq!((1000.0 * saving(36.0, 60.0)).round(), 400.0);
}

#[test]
fn invalid_parameters_are_rejected() {
    assert!(rmps_td(4).is_err());
    assert!(rmps_clustered(0).is_err());
    assert!(rmps_fd(500, 250).is_err());
    assert!(rmps_fd(512, 512).is_err());
}

#[test]
fn fd_cost_is_unimodal_over_fft_size_for_fixed_memory() {
    // a 393-tap channel memory forces an overlap of at least 392 samples
    let memory = 392;
    let costs: Vec<f64> = (6..=16)
        .map(|p| 1usize << p)
        .filter(|&l| l > memory + 1)
        .map(|l| rmps_fd(l, memory).unwrap())
        .collect();
    let best = costs
        .iter()
        .enumerate()
        .fold(0, |b, (i, c)| if *c < costs[b] { i } else { b });
    assert!(costs[..=best].windows(2).all(|w| w[1] < w[0]));
    assert!(costs[best..].windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn report_rows() {
    let reports = vec![
        ComplexityReport::new(Engine::Clustered, 12).unwrap(),
        ComplexityReport::new(Engine::Clustered, 26).unwrap(),
        ComplexityReport::new(Engine::FreqDomain, 512).unwrap(),
    ];
    let mut out = Vec::new();
    write_reports_csv(&reports, &mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], ComplexityReport::CSV_HEADER);
    let rmps: Vec<f64> = lines[1..]
        .iter()
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    assert_eq!(rmps[0], 36.0);
    assert_eq!(rmps[1], 78.0);
    assert_eq!(rmps[2].round(), 60.0);
}

proptest! {
    #[test]
    fn costs_increase_with_size(h in 1usize..5000, k in 1usize..5000) {
        prop_assert!(rmps_td(2 * h + 3).unwrap() > rmps_td(2 * h + 1).unwrap());
        prop_assert!(rmps_clustered(k + 1).unwrap() > rmps_clustered(k).unwrap());
        prop_assert!(rmps_fd_half_overlap(1 << (1 + k % 20)).unwrap() > 0.0);
    }
}
