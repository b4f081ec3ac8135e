mod common;

use std::f64::consts::TAU;

use agepress::indices::{
    compute_aii, compute_sgi, compute_srei, compute_wi, CropComponent, CropSystem,
    SurfaceComposition, WalkWeights,
};
use agepress::raster::solar::{daily_insolation, sun_path};
use agepress::raster::{parse_ascii_grid, slope_degrees, RasterGrid, SolarParams, ZoneMask};
use proptest::prelude::*;

fn plane(a: f64, b: f64, n: usize, h: f64) -> RasterGrid {
    // x grows east with the column, y grows north against the row
    RasterGrid::from_fn(n, n, h, |r, c| 100.0 + a * c as f64 * h - b * r as f64 * h).unwrap()
}

#[test]
fn inclined_planes_give_arctan_gradient() {
    for &(a, b) in &[
        (0.1, 0.0),
        (0.0, -0.25),
        (0.3, 0.4),
        (-1.2, 0.7),
        (0.0, 0.0),
    ] {
        let s = slope_degrees(&plane(a, b, 7, 5.0)).unwrap();
        let want = (a * a + b * b).sqrt().atan().to_degrees();
        for r in 1..6 {
            for c in 1..6 {
                assert!(
                    (s.value(r, c) - want).abs() < 1e-9,
                    "{a},{b}: {}",
                    s.value(r, c)
                );
            }
        }
    }
}

fn counted(n_above: usize, total: usize, above: f64, at: f64) -> RasterGrid {
    RasterGrid::from_fn(10, total / 10, 1.0, |r, c| {
        if r * 10 + c < n_above {
            above
        } else {
            at
        }
    })
    .unwrap()
}

#[test]
fn threshold_fractions_count_cells() {
    let full = |g: &RasterGrid| ZoneMask::full("v", g);
    let g = counted(84, 100, 12.0, 4.8);
    assert_eq!(compute_sgi(&g, &full(&g), 4.8).unwrap(), 0.84);
    let g = counted(93, 100, 24_000.0, 20_000.0);
    assert_eq!(compute_srei(&g, &full(&g), 20_000.0).unwrap(), 0.93);
    let g = counted(0, 100, 12.0, 1.0);
    assert_eq!(compute_sgi(&g, &full(&g), 4.8).unwrap(), 0.0);
    let g = counted(100, 100, 12.0, 1.0);
    assert_eq!(compute_sgi(&g, &full(&g), 4.8).unwrap(), 1.0);
}

#[test]
fn walkability_and_intensity_identities() {
    let w = WalkWeights::default();
    let wi = |p, h, r| compute_wi(&SurfaceComposition::new(p, h, r).unwrap(), &w).unwrap();
    assert_eq!(wi(1.0, 0.0, 0.0), 1.0);
    assert_eq!(wi(0.0, 0.0, 1.0), 0.3);
    assert_eq!(wi(0.5, 0.0, 0.5), 0.65);
    let aii = |lw: f64, tc, ls| {
        compute_aii(&CropSystem {
            components: vec![CropComponent {
                labor_weight: lw,
                area_share: 1.0,
            }],
            temporal_concentration: tc,
            labor_share: ls,
        })
        .unwrap()
    };
    assert_eq!(aii(1.0, 0.0, 0.9), 0.0);
    assert_eq!(aii(0.6, 0.7, 0.0), 0.0);
    assert_eq!(aii(1.0, 1.0, 1.0), 1.0);
    assert_eq!(aii(0.3, 1.0, 0.6), 0.18);
}

/// Beam flux reaching an upward-facing cell, with occlusion found by
/// stepping along the exact sun azimuth in tenth-cell increments.
fn beam_with_ray_march(dem: &RasterGrid, row: usize, col: usize, p: &SolarParams) -> (f64, usize) {
    let z0 = dem.value(row, col);
    let mut total = 0.0;
    let mut blocked = 0;
    for sun in sun_path(p) {
        let (dc, dr) = (sun.azimuth.sin(), -sun.azimuth.cos());
        let mut t = 0.1;
        let mut hidden = false;
        loop {
            let r = (row as f64 + t * dr).round();
            let c = (col as f64 + t * dc).round();
            if r < 0.0 || c < 0.0 || r >= dem.nrows as f64 || c >= dem.ncols as f64 {
                break;
            }
            let (r, c) = (r as usize, c as usize);
            if (r, c) != (row, col) {
                let run = t * dem.cellsize;
                if ((dem.value(r, c) - z0) / run).atan() >= sun.altitude {
                    hidden = true;
                    break;
                }
            }
            t += 0.1;
        }
        if hidden {
            blocked += 1;
        } else {
            total += (1.0 - p.diffuse_fraction)
                * p.direct_normal_irradiance
                * sun.altitude.sin()
                * sun.hours;
        }
    }
    (total, blocked)
}

#[test]
fn ridge_shades_the_poleward_cell() {
    let params = SolarParams {
        day_of_year: 355,
        ..SolarParams::default()
    };
    let ridge = RasterGrid::from_fn(5, 5, 10.0, |r, _| if r == 2 { 50.0 } else { 0.0 }).unwrap();
    let flat = RasterGrid::from_fn(5, 5, 10.0, |_, _| 0.0).unwrap();

    let (open_beam, none_blocked) = beam_with_ray_march(&flat, 0, 2, &params);
    assert_eq!(none_blocked, 0);
    let (shaded_beam, blocked) = beam_with_ray_march(&ridge, 0, 2, &params);
    assert!(blocked > 0);
    assert!(shaded_beam < open_beam);

    // unobstructed flat ground: beam plus full-sky diffuse
    let diffuse: f64 = sun_path(&params)
        .iter()
        .map(|s| {
            params.diffuse_fraction * params.direct_normal_irradiance * s.altitude.sin() * s.hours
        })
        .sum();
    let open = daily_insolation(&flat, &params).unwrap().value(0, 2);
    assert!((open - (open_beam + diffuse)).abs() < 1e-9 * open);

    let shaded = daily_insolation(&ridge, &params).unwrap().value(0, 2);
    assert!(shaded < open, "{shaded} vs {open}");
    // the midday sun sits behind the ridge in both models
    assert!(
        open - shaded >= 0.5 * (open_beam - shaded_beam),
        "{open} {shaded}"
    );
}

#[test]
fn ascii_round_trip() {
    let g = plane(0.2, 0.1, 4, 2.5).with_origin(500_000.0, 3_900_000.0);
    let back = parse_ascii_grid(&g.to_ascii()).unwrap();
    assert_eq!(back, g);
}

proptest! {
    #[test]
    fn slope_is_rotation_free(a in -2.0f64..2.0, b in -2.0f64..2.0, turn in 0.0f64..TAU) {
        let (s, c) = turn.sin_cos();
        let (a2, b2) = (a * c - b * s, a * s + b * c);
        let s1 = slope_degrees(&plane(a, b, 5, 3.0)).unwrap().value(2, 2);
        let s2 = slope_degrees(&plane(a2, b2, 5, 3.0)).unwrap().value(2, 2);
        prop_assert!((s1 - s2).abs() < 1e-8);
        prop_assert!((0.0..90.0).contains(&s1));
    }

    #[test]
    fn fraction_is_monotone_in_threshold(cells in prop::collection::vec(0.0f64..30.0, 25), t in 0.0f64..30.0, dt in 0.0f64..10.0) {
        let g = RasterGrid::new(5, 5, 1.0, cells).unwrap();
        let m = ZoneMask::full("v", &g);
        let lo = compute_sgi(&g, &m, t).unwrap();
        let hi = compute_sgi(&g, &m, t + dt).unwrap();
        prop_assert!(hi <= lo);
    }
}
