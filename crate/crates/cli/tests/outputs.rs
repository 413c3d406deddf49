use std::f64::consts::{FRAC_PI_2, TAU};

use antiphase_cli::commands;
use antiphase_cli::config::{Grid, RunConfig, Scale};
use antiphase_cli::table::parse;
use proptest::prelude::*;

fn small_alternating() -> RunConfig {
    RunConfig {
        alpha_grid: Some(Grid::linear(0.0, 1.0, 5)),
        omega_grid: Some(Grid::log2(0.0625, 2.0, 4)),
        ..RunConfig::preset("fig4").unwrap()
    }
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let sim = RunConfig {
        n_steps: 500,
        ..RunConfig::preset("fig1c").unwrap()
    };
    assert_eq!(
        commands::simulate(&sim).unwrap().render(),
        commands::simulate(&sim).unwrap().render()
    );
    let eigs = RunConfig::preset("fig3b").unwrap();
    assert_eq!(
        commands::eigs(&eigs).unwrap().render(),
        commands::eigs(&eigs).unwrap().render()
    );
}

#[test]
fn worker_count_does_not_change_bytes() {
    let alt = small_alternating();
    let one = commands::sweep_alternating(&alt, 1).unwrap().render();
    assert_eq!(one, commands::sweep_alternating(&alt, 4).unwrap().render());
    assert_eq!(one, commands::sweep_alternating(&alt, 3).unwrap().render());

    let uni = RunConfig {
        alpha_grid: Some(Grid::linear(0.0, 1.0, 11)),
        psi_grid: Some(Grid::linear(0.0, TAU, 21)),
        ..RunConfig::preset("fig3c").unwrap()
    };
    let one = commands::sweep_uniform(&uni, 1).unwrap().render();
    assert_eq!(one, commands::sweep_uniform(&uni, 4).unwrap().render());
}

#[test]
fn eigs_rows_cover_every_block() {
    let (header, rows) = parse(
        &commands::eigs(&RunConfig::preset("fig3a").unwrap())
            .unwrap()
            .render(),
    );
    assert_eq!(header[..3], ["psi", "k", "re_1"]);
    assert_eq!(header.len(), 10);
    assert_eq!(rows.len(), 201 * 4);
    for r in rows.iter().filter(|r| r[1] == 0.0) {
        let mut re = [r[2], r[4], r[6], r[8]];
        re.sort_by(f64::total_cmp);
        for (a, b) in re.iter().zip([-0.5, -0.5, 0.0, 0.0]) {
            assert!((a - b).abs() < 1e-12);
        }
    }
    // mirror symmetry about -1/4 row by row
    for r in &rows {
        let mut re = [r[2], r[4], r[6], r[8]];
        re.sort_by(f64::total_cmp);
        for i in 0..4 {
            assert!((re[i] + re[3 - i] + 0.5).abs() < 1e-9);
        }
    }
}

#[test]
fn eigs_landmark_at_alpha_half() {
    let cfg = RunConfig {
        psi_grid: Some(Grid::linear(0.0, 0.0, 1)),
        ..RunConfig::preset("fig3b").unwrap()
    };
    let (_, rows) = parse(&commands::eigs(&cfg).unwrap().render());
    let best = rows.iter().map(|r| r[2]).fold(f64::NEG_INFINITY, f64::max);
    assert!((best - 0.26924).abs() < 1e-5);
    let argmax: Vec<f64> = rows
        .iter()
        .filter(|r| (r[2] - best).abs() < 1e-12)
        .map(|r| r[1])
        .collect();
    assert_eq!(argmax, vec![1.0, 3.0]);
}

#[test]
fn sweep_uniform_neutral_lines() {
    let cfg = RunConfig {
        alpha_grid: Some(Grid::linear(0.25, 0.5, 2)),
        psi_grid: Some(Grid::linear(FRAC_PI_2, 3.0 * FRAC_PI_2, 2)),
        ..RunConfig::preset("fig3c").unwrap()
    };
    let (header, rows) = parse(&commands::sweep_uniform(&cfg, 2).unwrap().render());
    assert_eq!(header, ["alpha", "psi", "max_transverse"]);
    assert_eq!(rows.len(), 4);
    assert_eq!((rows[0][0], rows[1][0], rows[2][0]), (0.25, 0.25, 0.5));
    for r in rows {
        assert!(r[2].abs() < 1e-9);
    }
}

#[test]
fn sweep_uniform_refuses_detuned_ring() {
    let cfg = RunConfig {
        detuning: 0.2,
        ..RunConfig::preset("fig3c").unwrap()
    };
    assert!(commands::sweep_uniform(&cfg, 1).is_err());
}

#[test]
fn sweep_alternating_shape_and_trend() {
    let (header, rows) = parse(
        &commands::sweep_alternating(&small_alternating(), 2)
            .unwrap()
            .render(),
    );
    assert_eq!(
        header,
        ["alpha", "omega_detuning", "max_transverse_floquet"]
    );
    assert_eq!(rows.len(), 20);
    assert!((rows[0][1] - 0.0625).abs() < 1e-15 && (rows[3][1] - 2.0).abs() < 1e-15);
    assert!(rows.iter().filter(|r| r[0] >= 0.75).any(|r| r[2] > 1e-4));
}

#[test]
fn zero_detuning_in_grid_is_rejected() {
    let cfg = RunConfig {
        omega_grid: Some(Grid::linear(0.0, 1.0, 3)),
        ..small_alternating()
    };
    let err = commands::sweep_alternating(&cfg, 1).unwrap_err();
    assert!(err.to_string().contains("nonzero detuning"), "{err}");
}

#[test]
fn floquet_k0_rows_and_step_refinement() {
    let cfg = RunConfig {
        alpha: 0.5,
        omega_grid: Some(Grid::log2(0.25, 1.0, 3)),
        ..RunConfig::preset("fig4").unwrap()
    };
    let (header, coarse) = parse(&commands::floquet(&cfg, 1).unwrap().render());
    assert_eq!(
        header,
        ["omega_detuning", "k", "exp_1", "exp_2", "exp_3", "exp_4"]
    );
    assert_eq!(coarse.len(), 3 * 4);
    for r in coarse.iter().filter(|r| r[1] == 0.0) {
        for (a, b) in r[2..].iter().zip([0.0, 0.0, -0.5, -0.5]) {
            assert!((a - b).abs() < 1e-6);
        }
    }
    let doubled = RunConfig {
        floquet_steps: 2 * cfg.floquet_steps,
        ..cfg
    };
    let (_, fine) = parse(&commands::floquet(&doubled, 1).unwrap().render());
    for (a, b) in coarse.iter().zip(&fine) {
        for i in 2..6 {
            assert!((a[i] - b[i]).abs() < 1e-5);
        }
    }
}

#[test]
fn provenance_header_records_config() {
    let text = commands::eigs(&RunConfig::preset("fig3a").unwrap())
        .unwrap()
        .render();
    let line = text.lines().find(|l| l.starts_with("# config: ")).unwrap();
    let cfg = RunConfig::from_json(line.trim_start_matches("# config: ")).unwrap();
    assert_eq!(cfg, RunConfig::preset("fig3a").unwrap());
}

fn grid() -> impl Strategy<Value = Option<Grid>> {
    prop_oneof![
        Just(None),
        (0.01..1.0f64, 0.0..5.0f64, 1usize..300, any::<bool>()).prop_map(
            |(lo, span, count, log)| Some(Grid {
                min: lo,
                max: lo + span,
                count,
                scale: if log { Scale::Log2 } else { Scale::Linear },
            })
        ),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn config_json_round_trip(
        m in 1usize..64,
        alpha in -2.0..2.0f64,
        beta in -2.0..2.0f64,
        omega in -5.0..5.0f64,
        detuning in -2.0..2.0f64,
        theta0 in 0.0..TAU,
        psi0 in 0.0..TAU,
        dt in 1e-4..0.1f64,
        n_steps in 1usize..100_000,
        stride in 1usize..100,
        floquet_steps in 1usize..5000,
        psi_grid in grid(),
        omega_grid in grid(),
        alpha_grid in grid(),
    ) {
        let c = RunConfig {
            n: 4 * m, alpha, beta, omega, detuning, theta0, psi0, dt, n_steps,
            sample_stride: stride, floquet_steps, psi_grid, omega_grid, alpha_grid, output: None,
        };
        prop_assert_eq!(RunConfig::from_json(&c.to_json()).unwrap(), c.clone());
        prop_assert_eq!(RunConfig::from_json(&c.to_json_line()).unwrap(), c);
    }
}
