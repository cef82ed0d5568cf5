use std::ffi::CStr;
use std::ptr;

use llwall_ffi::*;

fn last_error() -> String {
    let mut buf = [0 as std::ffi::c_char; 256];
    unsafe {
        llwall_last_error_message(buf.as_mut_ptr(), buf.len());
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

#[test]
fn grid_and_wall_round_trip() {
    unsafe {
        let mut grid = ptr::null_mut();
        assert_eq!(llwall_grid_new(20.0, 257, &mut grid), LlwallStatus::Ok);
        assert!((llwall_grid_spacing(grid) - 40.0 / 256.0).abs() < 1e-15);

        let mut wall = ptr::null_mut();
        assert_eq!(llwall_field_wall(grid, 0.0, 0.3, 1.0, 0.0, &mut wall), LlwallStatus::Ok);
        assert_eq!(llwall_field_len(wall), 257);

        let mut values = vec![0.0; 3 * 257];
        assert_eq!(llwall_field_values(wall, values.as_mut_ptr(), values.len()), LlwallStatus::Ok);
        let mut copy = ptr::null_mut();
        assert_eq!(
            llwall_field_from_values(grid, values.as_ptr(), values.len(), &mut copy),
            LlwallStatus::Ok
        );
        let mut d = f64::NAN;
        assert_eq!(llwall_h2_distance(wall, copy, &mut d), LlwallStatus::Ok);
        assert_eq!(d, 0.0);

        let (mut sigma, mut theta) = (0.0, 0.0);
        assert_eq!(llwall_track_wall(wall, &mut sigma, &mut theta), LlwallStatus::Ok);
        assert!((sigma - 1.0).abs() < 1e-3);
        assert!((theta - 0.3).abs() < 1e-6);

        let (mut th, mut dist) = (0.0, 0.0);
        assert_eq!(llwall_best_match(wall, 0.0, 0.0, 1.0, &mut th, &mut dist), LlwallStatus::Ok);
        assert!((th - 0.3).abs() < 1e-8 && dist < 1e-8);

        llwall_field_free(copy);
        llwall_field_free(wall);
        llwall_grid_free(grid);
    }
}

#[test]
fn simulate_keeps_the_stationary_wall_close() {
    unsafe {
        let mut grid = ptr::null_mut();
        assert_eq!(llwall_grid_new(20.0, 257, &mut grid), LlwallStatus::Ok);
        let mut wall = ptr::null_mut();
        llwall_field_wall(grid, 0.0, 0.0, 0.0, 0.0, &mut wall);
        let mut end = ptr::null_mut();
        assert_eq!(
            llwall_simulate(wall, 0.0, 1.0, 0.25, LlwallFrame::Lab, &mut end),
            LlwallStatus::Ok
        );
        let mut d = 0.0;
        llwall_h2_distance(wall, end, &mut d);
        assert!(d > 0.0 && d < 0.02, "{d}");
        llwall_field_free(end);
        llwall_field_free(wall);
        llwall_grid_free(grid);
    }
}

#[test]
fn errors_set_codes_and_messages() {
    unsafe {
        let mut grid = ptr::null_mut();
        assert_eq!(llwall_grid_new(20.0, 3, &mut grid), LlwallStatus::InvalidArgument);
        assert!(grid.is_null());
        assert!(last_error().contains("at least"));

        assert_eq!(llwall_grid_new(20.0, 65, ptr::null_mut()), LlwallStatus::NullPointer);

        llwall_grid_new(20.0, 65, &mut grid);
        let bad = vec![0.0; 3 * 65];
        let mut f = ptr::null_mut();
        assert_eq!(
            llwall_field_from_values(grid, bad.as_ptr(), bad.len(), &mut f),
            LlwallStatus::InvalidArgument
        );
        assert!(last_error().contains("unit sphere"));
        assert_eq!(
            llwall_field_from_values(grid, bad.as_ptr(), 10, &mut f),
            LlwallStatus::InvalidArgument
        );

        let flat: Vec<f64> = (0..65).flat_map(|_| [1.0, 0.0, 0.0]).collect();
        llwall_field_from_values(grid, flat.as_ptr(), flat.len(), &mut f);
        let (mut s, mut t) = (0.0, 0.0);
        assert_eq!(llwall_track_wall(f, &mut s, &mut t), LlwallStatus::NoWall);
        assert_eq!(llwall_track_wall(ptr::null(), &mut s, &mut t), LlwallStatus::NullPointer);

        let needed = llwall_last_error_message(ptr::null_mut(), 0);
        assert!(needed > 0);

        llwall_field_free(f);
        llwall_grid_free(grid);
        llwall_field_free(ptr::null_mut());
        llwall_grid_free(ptr::null_mut());
    }
}

#[test]
fn spectrum_through_the_c_api() {
    unsafe {
        let mut grid = ptr::null_mut();
        llwall_grid_new(20.0, 513, &mut grid);
        let mut eig = [0.0; 3];
        assert_eq!(llwall_spectrum(grid, 3, eig.as_mut_ptr()), LlwallStatus::Ok);
        assert!(eig[0].abs() < 5e-3);
        assert!(eig[1] < -0.9 && eig[1] > -1.05);
        llwall_grid_free(grid);
    }
}

#[test]
fn steering_rejects_strong_final_field() {
    let mut p = llwall_steering_default_params();
    assert_eq!(p.n, 1025);
    p.delta2 = 0.5;
    let mut out = LlwallSteeringSummary::default();
    unsafe {
        assert_eq!(llwall_run_steering(&p, &mut out), LlwallStatus::InvalidArgument);
    }
    assert!(last_error().contains("delta2"));
}

#[test]
fn steering_small_run() {
    let mut p = llwall_steering_default_params();
    p.n = 257;
    p.sigma2 = 1.0;
    p.post_horizon = 12.0;
    let mut out = LlwallSteeringSummary::default();
    unsafe {
        assert_eq!(llwall_run_steering(&p, &mut out), LlwallStatus::Ok, "{}", last_error());
    }
    assert!(out.distance_at_switch < p.epsilon);
    assert!((out.sigma_limit - 1.0).abs() < p.epsilon);
    assert!(out.decay_rate > 0.0);
}

#[test]
fn header_declares_every_entry_point() {
    let header = include_str!("../include/llwall.h");
    for name in [
        "llwall_last_error_message",
        "llwall_grid_new",
        "llwall_grid_free",
        "llwall_grid_spacing",
        "llwall_field_wall",
        "llwall_field_from_values",
        "llwall_field_free",
        "llwall_field_len",
        "llwall_field_values",
        "llwall_simulate",
        "llwall_track_wall",
        "llwall_h2_distance",
        "llwall_best_match",
        "llwall_spectrum",
        "llwall_steering_default_params",
        "llwall_run_steering",
        "LLWALL_STATUS_NO_WALL",
        "typedef struct LlwallGrid LlwallGrid;",
    ] {
        assert!(header.contains(name), "missing {name}");
    }
}
