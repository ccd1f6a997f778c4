mod common;

use common::{homogeneous_field, lin, surface};
use igwave::dispersion::{build_surface, DispersionProvider, DispersionSurface, OnTheFly, SurfaceGrid};
use igwave::modes::{solve_k, ModeOptions};
use igwave::stratification::{Modulation, StratificationField, StratificationModel, Thermocline};
use igwave::Error;
use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

fn thermocline_field() -> StratificationField {
    let model: Arc<dyn StratificationModel> = Arc::new(Thermocline {
        n_peak: 1.2,
        n_background: 0.6,
        center_depth: 1.0,
        width: 0.5,
        depth: PI,
        modulation: Modulation {
            amplitude: 0.1,
            scale: 50.0 * PI,
        },
    });
    StratificationField::new(model, (-20.0, 20.0), (-20.0, 20.0), 10.0).unwrap()
}

fn thermocline_surface() -> &'static DispersionSurface {
    static S: OnceLock<DispersionSurface> = OnceLock::new();
    S.get_or_init(|| surface(&thermocline_field(), lin(0.3, 0.7, 9), 9))
}

const PROBES: [(f64, f64, f64); 4] = [
    (0.33, 7.0, -3.0),
    (0.47, -11.5, 12.25),
    (0.61, 17.0, 19.0),
    (0.52, 0.5, -18.5),
];

#[test]
fn constant_medium_table_is_flat() {
    let field = homogeneous_field(50.0);
    let s = surface(&field, vec![0.4, 0.6, 0.8], 3);
    let (k, kw, valid) = s.table();
    assert!(valid.iter().all(|&v| v));
    for (iw, chunk) in k.chunks(9).enumerate() {
        let lo = chunk.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = chunk.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert!((hi - lo) / lo <= 1e-9, "omega index {iw}");
    }
    assert!(kw.iter().all(|&v| v > 0.0));
    for (x, y) in [(0.3, -7.0), (-44.0, 13.0), (25.0, 25.0)] {
        let d = s.eval(0.6, x, y).unwrap();
        assert!((d.k - 0.75).abs() < 1e-9 && (d.k_omega - 1.953125).abs() < 1e-6 * 1.953125);
        assert!(d.k_x.abs() <= 1e-12 && d.k_y.abs() <= 1e-12);
    }
}

#[test]
fn minimal_grid_reproduces_corners() {
    let field = thermocline_field();
    let grid = SurfaceGrid {
        omega: vec![0.4, 0.6],
        x: vec![-20.0, 20.0],
        y: vec![-20.0, 20.0],
    };
    let s = build_surface(&field, 1, &grid, &ModeOptions::default()).unwrap();
    let (k, kw, _) = s.table();
    let mut i = 0;
    for &w in &grid.omega {
        for &x in &grid.x {
            for &y in &grid.y {
                let d = s.eval(w, x, y).unwrap();
                assert_eq!(d.k, k[i]);
                assert_eq!(d.k_omega, kw[i]);
                i += 1;
            }
        }
    }
}

#[test]
fn node_queries_are_exact() {
    let s = thermocline_surface();
    let g = s.grid().clone();
    let (k, _, _) = s.table();
    let i = (3 * g.x.len() + 5) * g.y.len() + 2;
    assert_eq!(s.eval(g.omega[3], g.x[5], g.y[2]).unwrap().k, k[i]);
}

#[test]
fn off_node_k_matches_a_fresh_solve() {
    let field = thermocline_field();
    let s = thermocline_surface();
    for (w, x, y) in PROBES {
        let direct = solve_k(&field, w, x, y, 1, &ModeOptions::default()).unwrap();
        let rel = (s.eval(w, x, y).unwrap().k - direct).abs() / direct;
        assert!(rel <= 1e-4, "({w}, {x}, {y}): {rel:e}");
    }
}

#[test]
fn off_node_partials_match_direct_differences() {
    let field = thermocline_field();
    let s = thermocline_surface();
    let otf = OnTheFly::new(field, 1, ModeOptions::default(), 1e-4);
    for (w, x, y) in PROBES {
        let a = s.eval(w, x, y).unwrap();
        let b = otf.eval(w, x, y).unwrap();
        let grad = b.k_x.hypot(b.k_y);
        assert!((a.k - b.k).abs() <= 1e-3 * b.k);
        assert!((a.k_omega - b.k_omega).abs() <= 1e-3 * b.k_omega);
        assert!(
            (a.k_x - b.k_x).abs() <= 1e-3 * grad,
            "k_x at ({w}, {x}, {y}): {} vs {}",
            a.k_x,
            b.k_x
        );
        assert!(
            (a.k_y - b.k_y).abs() <= 1e-3 * grad,
            "k_y at ({w}, {x}, {y}): {} vs {}",
            a.k_y,
            b.k_y
        );
    }
}

#[test]
fn partials_are_derivatives_of_the_interpolant() {
    let s = thermocline_surface();
    let (w, x, y) = (0.47, -11.5, 12.25);
    let d = s.eval(w, x, y).unwrap();
    let mut prev = [f64::INFINITY; 3];
    for h in [1e-1, 5e-2, 2.5e-2] {
        let fx = (s.eval(w, x + h, y).unwrap().k - s.eval(w, x - h, y).unwrap().k) / (2.0 * h);
        let fy = (s.eval(w, x, y + h).unwrap().k - s.eval(w, x, y - h).unwrap().k) / (2.0 * h);
        let fw = (s.eval(w + h * 1e-2, x, y).unwrap().k - s.eval(w - h * 1e-2, x, y).unwrap().k) / (2e-2 * h);
        let err = [fx - d.k_x, fy - d.k_y, fw - d.k_omega];
        for (e, p) in err.iter().zip(prev.iter_mut()) {
            assert!(e.abs() <= *p / 3.0 || e.abs() < 1e-13, "{e:e} after {p:e}");
            *p = e.abs();
        }
    }
}

#[test]
fn outside_the_table_is_an_extrapolation_error() {
    let s = thermocline_surface();
    assert!(matches!(s.eval(0.5, 21.0, 0.0), Err(Error::Extrapolation { .. })));
    assert!(matches!(s.eval(0.75, 0.0, 0.0), Err(Error::Extrapolation { .. })));
    assert!(!s.is_valid(0.2, 0.0, 0.0));
    assert!(s.is_valid(0.5, 0.0, 0.0));
}

#[test]
fn non_propagating_nodes_shrink_the_valid_region() {
    let field = homogeneous_field(10.0);
    let grid = SurfaceGrid {
        omega: vec![0.6, 0.8, 1.1],
        x: vec![-10.0, 10.0],
        y: vec![-10.0, 10.0],
    };
    let s = build_surface(&field, 1, &grid, &ModeOptions::default()).unwrap();
    let (_, _, valid) = s.table();
    assert_eq!(valid.iter().filter(|&&v| !v).count(), 4);
    assert!(s.is_valid(0.7, 0.0, 0.0));
    assert!(matches!(s.eval(0.9, 0.0, 0.0), Err(Error::Extrapolation { .. })));
}

#[test]
fn cache_round_trip_is_exact() {
    let s = thermocline_surface();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("surface.json");
    s.write_cache(&path).unwrap();
    let r = DispersionSurface::read_cache(&path).unwrap();
    assert_eq!(r.grid(), s.grid());
    assert_eq!(r.table(), s.table());
    for (w, x, y) in PROBES {
        assert_eq!(r.eval(w, x, y).unwrap(), s.eval(w, x, y).unwrap());
    }
    std::fs::write(&path, "{\"format\": \"other\"}").unwrap();
    assert!(DispersionSurface::read_cache(&path).is_err());
}

#[test]
fn bad_grids_are_rejected() {
    let field = homogeneous_field(10.0);
    let bad = SurfaceGrid {
        omega: vec![0.5],
        x: vec![-10.0, 10.0],
        y: vec![-10.0, 10.0],
    };
    assert!(build_surface(&field, 1, &bad, &ModeOptions::default()).is_err());
    let unsorted = SurfaceGrid {
        omega: vec![0.5, 0.4],
        ..bad
    };
    assert!(build_surface(&field, 1, &unsorted, &ModeOptions::default()).is_err());
}
