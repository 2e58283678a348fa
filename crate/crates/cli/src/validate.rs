//! Quick oracle and invariant checks, one line per check.

use std::f64::consts::LN_10;

use spinlase_core::dicke::{brute_force_steady_state, multiplicity, solve_exact, Monomial};
use spinlase_core::fluctuations::{
    principal_spectra, squeeze_db, squeeze_db_from_spectra, FluctuationCoeffs,
};
use spinlase_core::meanfield::{lasing_state, stationarity_residual, stationarity_tolerance};
use spinlase_core::model::cooperativity_branches;
use spinlase_core::ModelParams;

#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} {}: {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.detail
        )
    }
}

fn check(name: &'static str, pass: bool, detail: String) -> Check {
    Check { name, pass, detail }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

pub fn run_validation() -> Vec<Check> {
    let mut out = Vec::new();

    let mut worst = 0u32;
    let ok = (1..=20u64).all(|n| {
        let total: u128 = (0..=n as i64)
            .filter(|tj| (n as i64 - tj) % 2 == 0)
            .map(|tj| multiplicity(n, tj).unwrap() * (tj as u128 + 1))
            .sum();
        worst = n as u32;
        total == 1u128 << n
    });
    out.push(check(
        "dicke-completeness",
        ok,
        format!("sum D_J(2J+1) = 2^N up to N = {worst}"),
    ));

    let mut err = 0.0f64;
    for chi in [-3.0, -0.6, 0.0, 0.4, 2.5] {
        let c = FluctuationCoeffs::effective(1.0, 0.0, 0.3, chi, 10.0);
        let law = 20.0 / LN_10 * f64::asinh(chi.abs());
        err = err.max((squeeze_db_from_spectra(&c).unwrap() - law).abs());
        err = err.max((squeeze_db(&c).unwrap() - law).abs());
    }
    out.push(check(
        "squeeze-law",
        err < 1e-10,
        format!("max |ζ − (20/ln10) asinh|χ|| = {err:.2e} dB"),
    ));

    let c = FluctuationCoeffs::effective(0.7, 0.0, 0.3, 0.0, 10.0);
    let grid: Vec<f64> = (0..41).map(|k| -4.0 + 0.2 * k as f64).collect();
    let s = principal_spectra(&c, &grid);
    let mut split = 0.0f64;
    for ((p, m), w) in s.s_plus.iter().zip(&s.s_minus).zip(&grid) {
        split = split
            .max((p - m).abs() / p)
            .max(rel(*p, 0.7 / (0.49 + w * w)));
    }
    out.push(check(
        "spectral-degeneracy",
        split < 1e-12,
        format!("max deviation of S± from κ_a/(κ_a² + ω²) at χ = 0: {split:.2e}"),
    ));

    let mut prod = 0.0f64;
    for chi in [-2.0, -0.5, 0.3, 1.0, 4.0] {
        let c = FluctuationCoeffs::effective(0.8, 0.0, 0.3, chi, 10.0);
        let s = principal_spectra(&c, &[0.0]);
        prod = prod.max(rel(s.s_plus[0] * s.s_minus[0], 1.0 / (0.8 * 0.8)));
    }
    out.push(check(
        "uncertainty-product",
        prod < 1e-10,
        format!("max rel. error of S+(0)S−(0)κ_a² − 1: {prod:.2e}"),
    ));

    let p = ModelParams::with_collective_coupling(1000, 1.0, 1.0, 3.0, 1.0, 0.01, 0.2, 1.0);
    let res = cooperativity_branches(&p)
        .ok()
        .and_then(|b| b.c_plus)
        .and_then(|c| lasing_state(&p, c).ok())
        .map(|s| stationarity_residual(&p, &s) / stationarity_tolerance(&p));
    out.push(match res {
        Some(r) => check(
            "meanfield-closure",
            r <= 1.0,
            format!("residual / tolerance = {r:.2e} at ε = 3, w = 0.2"),
        ),
        None => check(
            "meanfield-closure",
            false,
            "no lasing solution at ε = 3, w = 0.2".into(),
        ),
    });

    for (n, n_cut) in [(1u64, 6usize), (2, 6)] {
        let p = ModelParams {
            n_spins: n,
            g: 0.7,
            delta: 0.4,
            epsilon: 1.3,
            kappa: 1.1,
            gamma: 0.3,
            pump_w: 0.9,
            gamma_phi: 0.2,
        };
        let name = if n == 1 { "oracle-n1" } else { "oracle-n2" };
        let res = solve_exact(&p, n_cut)
            .and_then(|d| brute_force_steady_state(&p, n_cut).map(|b| (d, b)));
        out.push(match res {
            Ok((d, b)) => {
                let mut e = 0.0f64;
                for o in [Monomial::N_PHOTONS, Monomial::JZ, Monomial::J_PLUS_J_MINUS] {
                    e = e
                        .max((d.expect(&o) - b.expect(&o)).norm() / b.expect(&o).norm().max(1e-12));
                }
                let pd = d.distributions().photon_pmf;
                for (x, y) in pd.iter().zip(b.photon_pmf()) {
                    e = e.max((x - y).abs() / y.abs().max(1e-6));
                }
                check(
                    name,
                    e < 1e-8,
                    format!("max relative deviation from full Hilbert space {e:.2e}"),
                )
            }
            Err(err) => check(name, false, err.to_string()),
        });
    }
    out
}
