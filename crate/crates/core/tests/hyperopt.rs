mod common;

use common::*;
use disperse::clustering::{fuzzify, kmeans};
use disperse::config::EngineSettings;
use disperse::equalizers::{Engine, EqualizerSpec};
use disperse::generate_taps;
use disperse::hyperopt::{
    captures_for_seeds, default_grid, optimize_alpha_eta, optimize_on_captures, sweep, SweepSpec,
};
use disperse::link_sim::{run_link, LinkConfig};

fn link(snr_db: f64) -> LinkConfig<f64> {
    let mut l = LinkConfig::new(long_haul()).unwrap();
    l.n_symbols = 8_000;
    l.snr_db = snr_db;
    l
}

fn base() -> EngineSettings {
    EngineSettings {
        n_taps: Some(273),
        ..EngineSettings::default()
    }
}

#[test]
fn reported_optimum_reproduces_with_run_link() {
    let l = link(15.5);
    let seeds = [1, 2, 3];
    let grid = [0.6, 0.8, 1.0];
    let opt = optimize_alpha_eta(&l, &seeds, &base(), 12, &grid, &grid).unwrap();
    let taps = generate_taps(&l.system, 273).unwrap();
    let plan = kmeans(taps.taps(), 12, base().kmeans.seed, 300, 1e-10).unwrap();
    let fz = fuzzify(&plan, taps.taps(), opt.eta).unwrap();
    let spec = EqualizerSpec::FuzzyClustered {
        plan: fz,
        taps,
        alpha: opt.alpha,
    };
    let q: f64 = seeds
        .iter()
        .map(|&s| {
            let mut c = l.clone();
            c.seed = s;
            run_link(&c, &spec).unwrap().q_db
        })
        .sum::<f64>()
        / 3.0;
    assert_eq!(q, opt.q_db);
}

#[test]
fn result_ignores_grid_evaluation_order() {
    let l = link(15.5);
    let caps = captures_for_seeds(&l, &[4, 5, 6]).unwrap();
    let taps = generate_taps(&l.system, 273).unwrap();
    let plan = kmeans(taps.taps(), 10, 0, 300, 1e-10).unwrap();
    let grid = [0.5, 0.75, 1.0];
    let a = optimize_on_captures(&caps, &taps, &plan, &grid, &grid).unwrap();
    // the same points visited in a different slicing still give the same argmax
    let mut best = None::<(f64, f64, f64)>;
    for &eta in grid.iter().rev() {
        for &alpha in &grid {
            let p = optimize_on_captures(&caps, &taps, &plan, &[alpha], &[eta]).unwrap();
            let better = match best {
                None => true,
                Some((q, e, al)) => {
                    p.q_db > q || (p.q_db == q && (eta < e || (eta == e && alpha > al)))
                }
            };
            if better {
                best = Some((p.q_db, eta, alpha));
            }
        }
    }
    let (q, eta, alpha) = best.unwrap();
    assert_eq!((a.q_db, a.eta, a.alpha), (q, eta, alpha));
}

#[test]
fn optimum_at_twelve_clusters_is_interior() {
    let l = link(15.5);
    let grid = default_grid();
    let opt = optimize_alpha_eta(&l, &[1, 2, 3], &base(), 12, &grid, &grid).unwrap();
    println!("alpha {} eta {} q {}", opt.alpha, opt.eta, opt.q_db);
    let interior = |v: f64| v > grid[0] && v < grid[grid.len() - 1];
    assert!(interior(opt.alpha) && interior(opt.eta));
    assert_eq!((opt.alpha, opt.eta), (grid[PINNED_ALPHA], grid[PINNED_ETA]));
}

// alpha 0.65, eta 0.8
const PINNED_ALPHA: usize = 3;
const PINNED_ETA: usize = 6;

#[test]
fn single_point_sweep_is_run_link_plus_rmps() {
    let l = link(16.0);
    let mut spec = SweepSpec::new(Engine::Clustered, vec![16], l.clone());
    spec.base = EngineSettings {
        engine: Engine::Clustered,
        ..base()
    };
    let pts = sweep(&spec).unwrap();
    assert_eq!(pts.len(), 1);
    let eq = spec.settings_at(16).build(&l.system).unwrap();
    for (seed, r) in spec.seeds.iter().zip(&pts[0].stats.runs) {
        let mut c = l.clone();
        c.seed = *seed;
        assert_eq!(&run_link(&c, &eq).unwrap(), r);
    }
    assert_eq!(pts[0].rmps, 48.0);
}

#[test]
fn hard_curve_rises_with_clusters() {
    let l = link(16.0);
    let mut spec = SweepSpec::new(Engine::Clustered, vec![4, 8, 16, 32], l);
    spec.base = EngineSettings {
        engine: Engine::Clustered,
        ..base()
    };
    let pts = sweep(&spec).unwrap();
    for w in pts.windows(2) {
        let sigma = (w[0].stats.q_sem().powi(2) + w[1].stats.q_sem().powi(2)).sqrt();
        assert!(w[1].stats.q_mean >= w[0].stats.q_mean - 2.0 * sigma);
    }
}
