use chafee_core::model::{HState, ModelParams, NoisePlacement};
use chafee_core::sim::{run_path, smooth_random_state, BoundaryStencil, Scheme, SimConfig};
use chafee_core::spectral::{spectral_modes, SeriesSolution, DEFAULT_MODES};

/// Explicit run to `t`, with the O(dt) time error removed by Richardson
/// extrapolation so only the spatial error remains.
fn solve(n_nodes: usize, t: f64, stencil: BoundaryStencil, p: &ModelParams) -> Vec<f64> {
    let h = 1.0 / (n_nodes - 1) as f64;
    let u0 = HState::from_fn(n_nodes, 1.0, initial).unwrap();
    let run = |dt: f64| {
        let cfg = SimConfig {
            n_nodes,
            dt,
            t_final: t,
            t_burn_in: Some(0.0),
            scheme: Scheme::Explicit,
            stencil,
            renormalize_every: usize::MAX,
            record_every: usize::MAX,
            keep_final_state: true,
            ..SimConfig::default()
        };
        run_path(&u0, p, &cfg, 0)
            .unwrap()
            .final_state
            .unwrap()
            .into_values()
    };
    let dt = 0.05 * h * h;
    let (coarse, fine) = (run(dt), run(0.5 * dt));
    coarse.iter().zip(&fine).map(|(c, f)| 2.0 * f - c).collect()
}

fn initial(x: f64) -> f64 {
    1.0 + x * (1.0 - x) + 0.5 * (3.0 * x).cos()
}

fn max_error(n_nodes: usize, stencil: BoundaryStencil) -> f64 {
    let p = ModelParams::deterministic(0.02, 0.001);
    let t = 0.02;
    let modes = spectral_modes(&p, DEFAULT_MODES, 1e-14).unwrap();
    let reference = HState::from_fn(8001, 1.0, initial).unwrap();
    let series = SeriesSolution::new(&reference, &modes, &p).unwrap();
    let u = solve(n_nodes, t, stencil, &p);
    let h = 1.0 / (n_nodes - 1) as f64;
    u.iter()
        .enumerate()
        .map(|(i, v)| (v - series.eval(i as f64 * h, t)).abs())
        .fold(0.0, f64::max)
}

#[test]
fn spatial_order_two_against_series() {
    let e: Vec<f64> = [21, 41, 81, 161]
        .iter()
        .map(|&n| max_error(n, BoundaryStencil::SecondOrder))
        .collect();
    let orders: Vec<f64> = e.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    for q in &orders {
        assert!((q - 2.0).abs() < 0.3, "errors {e:?}, orders {orders:?}");
    }
}

#[test]
fn first_order_stencil_converges_more_slowly() {
    let e: Vec<f64> = [21, 41]
        .iter()
        .map(|&n| max_error(n, BoundaryStencil::FirstOrder))
        .collect();
    let q = (e[0] / e[1]).log2();
    assert!((q - 1.0).abs() < 0.3, "errors {e:?}, order {q}");
}

#[test]
fn interior_noise_paths_are_reproducible_and_distinct() {
    let p = ModelParams::new(0.3, 0.5, 0.8, NoisePlacement::Interior);
    let cfg = SimConfig {
        n_nodes: 31,
        t_final: 30.0,
        seed: 99,
        ..SimConfig::default()
    };
    let u0 = smooth_random_state(31, 1, 4).unwrap();
    let a = run_path(&u0, &p, &cfg, 0).unwrap();
    assert_eq!(a, run_path(&u0, &p, &cfg, 0).unwrap());
    assert_ne!(
        a.lyapunov_estimate,
        run_path(&u0, &p, &cfg, 1).unwrap().lyapunov_estimate
    );
}
