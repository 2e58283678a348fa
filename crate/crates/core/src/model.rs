//! Model parameters, derived rates and the mean-field cooperativity branches.
//!
//! All rates are angular frequencies in whatever unit the caller picks; only
//! ratios enter the dimensionless results (cooperativities, phase tags).

use crate::error::{Error, Result};
#[allow(unused_imports)]
use num_traits::Float;

/// Absolute tolerance used when comparing closed-form cooperativities.
pub const BRANCH_TOL: f64 = 1e-12;

/// Physical parameters of the pumped spin ensemble coupled to a lossy cavity.
///
/// The Hamiltonian in the cavity frame is
/// `H = i g (a† J⁻ − a J⁺) + Δ Jᶻ − (ε/N) (Jᶻ)²`, and the dissipators are
/// cavity loss κ, spin emission γ, incoherent pump w and dephasing γ_φ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub n_spins: u64,
    /// Single-spin coupling.
    pub g: f64,
    /// Spin–cavity detuning.
    pub delta: f64,
    /// One-axis-twisting strength.
    pub epsilon: f64,
    pub kappa: f64,
    pub gamma: f64,
    pub pump_w: f64,
    pub gamma_phi: f64,
}

impl ModelParams {
    /// Parameters with the collective coupling `g√N` given instead of `g`.
    #[allow(clippy::too_many_arguments)]
    pub fn with_collective_coupling(
        n_spins: u64,
        g_sqrt_n: f64,
        delta: f64,
        epsilon: f64,
        kappa: f64,
        gamma: f64,
        pump_w: f64,
        gamma_phi: f64,
    ) -> Self {
        Self {
            n_spins,
            g: g_sqrt_n / (n_spins as f64).sqrt(),
            delta,
            epsilon,
            kappa,
            gamma,
            pump_w,
            gamma_phi,
        }
    }

    pub fn n(&self) -> f64 {
        self.n_spins as f64
    }

    pub fn collective_coupling(&self) -> f64 {
        self.g * self.n().sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("g", self.g),
            ("delta", self.delta),
            ("epsilon", self.epsilon),
            ("kappa", self.kappa),
            ("gamma", self.gamma),
            ("pump_w", self.pump_w),
            ("gamma_phi", self.gamma_phi),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    reason: "must be finite",
                });
            }
        }
        if self.n_spins == 0 {
            return Err(Error::InvalidParameter {
                name: "n_spins",
                reason: "must be positive",
            });
        }
        if self.kappa <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "kappa",
                reason: "must be positive",
            });
        }
        for (name, v) in [
            ("g", self.g),
            ("gamma", self.gamma),
            ("pump_w", self.pump_w),
            ("gamma_phi", self.gamma_phi),
        ] {
            if v < 0.0 {
                return Err(Error::InvalidParameter {
                    name,
                    reason: "must be non-negative",
                });
            }
        }
        Ok(())
    }

    /// Same parameters at a different pump rate.
    pub fn at_pump(&self, pump_w: f64) -> Self {
        Self { pump_w, ..*self }
    }

    pub fn at_epsilon(&self, epsilon: f64) -> Self {
        Self { epsilon, ..*self }
    }
}

/// Rates derived from [`ModelParams`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedRates {
    /// Magnon decay rate `κ_s = w + γ + γ_φ`.
    pub kappa_s: f64,
    /// Total dissipation `Γ = κ_s + κ`.
    pub gamma_total: f64,
    /// Intrinsic cooperativity `C₀ = 4 N g² / (κ κ_s)`.
    pub c0: f64,
    /// Population factor `(w − γ)/(w + γ)`.
    pub pump_factor: f64,
}

pub fn derive_rates(p: &ModelParams) -> Result<DerivedRates> {
    p.validate()?;
    let w_plus_gamma = p.pump_w + p.gamma;
    if w_plus_gamma == 0.0 {
        return Err(Error::DegenerateRates);
    }
    let kappa_s = p.pump_w + p.gamma + p.gamma_phi;
    let c0 = if kappa_s > 0.0 {
        4.0 * p.n() * p.g * p.g / (p.kappa * kappa_s)
    } else {
        0.0
    };
    Ok(DerivedRates {
        kappa_s,
        gamma_total: kappa_s + p.kappa,
        c0,
        pump_factor: (p.pump_w - p.gamma) / w_plus_gamma,
    })
}

/// `Δ_ε = Δ − 2 ε Jᶻ / N`.
pub fn effective_detuning(p: &ModelParams, jz: f64) -> f64 {
    p.delta - 2.0 * p.epsilon * jz / p.n()
}

/// Effective cooperativity `C₀ ((w−γ)/(w+γ)) Γ² / (Γ² + 4Δ_ε²)` at a given `Jᶻ`.
pub fn cooperativity_at(p: &ModelParams, rates: &DerivedRates, jz: f64) -> f64 {
    let g2 = rates.gamma_total * rates.gamma_total;
    let de = effective_detuning(p, jz);
    rates.c0 * rates.pump_factor * g2 / (g2 + 4.0 * de * de)
}

/// Mean-field phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Phase {
    Normal,
    SuperradiantLasing,
    Bistable,
}

impl Phase {
    pub fn as_str(&self) -> &'static str {
        match self {
            Phase::Normal => "normal",
            Phase::SuperradiantLasing => "lasing",
            Phase::Bistable => "bistable",
        }
    }
}

/// The two self-consistent cooperativities, ordered so that `c_plus ≥ c_minus`.
///
/// Both are `None` when the discriminant is negative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CooperativityBranches {
    pub c_plus: Option<f64>,
    pub c_minus: Option<f64>,
    /// `C₀²Γ² + 16 C₀ Δ ε − 16 ε²`, i.e. the discriminant scaled by `C₀²`.
    pub discriminant: f64,
}

/// Roots of `C² (Γ² + 4Δ²) − C p (C₀Γ² + 8Δε) + 4 ε² p² = 0` with `p = (w−γ)/(w+γ)`.
///
/// Multiplying through by `C₀` keeps the expression finite at `C₀ = 0`.
pub fn cooperativity_branches(p: &ModelParams) -> Result<CooperativityBranches> {
    let r = derive_rates(p)?;
    let g = r.gamma_total;
    let (c0, d, e) = (r.c0, p.delta, p.epsilon);
    let disc = c0 * c0 * g * g + 16.0 * c0 * d * e - 16.0 * e * e;
    if disc < 0.0 {
        return Ok(CooperativityBranches {
            c_plus: None,
            c_minus: None,
            discriminant: disc,
        });
    }
    let den = 2.0 * (g * g + 4.0 * d * d);
    let centre = c0 * g * g + 8.0 * d * e;
    let spread = g * disc.sqrt();
    let a = r.pump_factor * (centre + spread) / den;
    let b = r.pump_factor * (centre - spread) / den;
    Ok(CooperativityBranches {
        c_plus: Some(a.max(b)),
        c_minus: Some(a.min(b)),
        discriminant: disc,
    })
}

/// Like [`cooperativity_branches`] but with complex branches reported as an error.
pub fn real_cooperativity_branches(p: &ModelParams) -> Result<(f64, f64)> {
    let b = cooperativity_branches(p)?;
    match (b.c_plus, b.c_minus) {
        (Some(hi), Some(lo)) => Ok((hi, lo)),
        _ => Err(Error::ComplexBranches {
            discriminant: b.discriminant,
        }),
    }
}

/// Relative residual of the self-consistency `C = C(Jᶻ)` with `Jᶻ = (N/2) p / C`.
pub fn branch_residual(p: &ModelParams, c: f64) -> Result<f64> {
    let r = derive_rates(p)?;
    let jz = 0.5 * p.n() * r.pump_factor / c;
    let rhs = cooperativity_at(p, &r, jz);
    Ok((c - rhs).abs() / c.abs().max(f64::MIN_POSITIVE))
}

/// Phase from the branch values alone. `C = 1` exactly counts as below threshold.
pub fn classify_phase(p: &ModelParams) -> Result<Phase> {
    let b = cooperativity_branches(p)?;
    Ok(phase_from_branches(&b))
}

pub fn phase_from_branches(b: &CooperativityBranches) -> Phase {
    match (b.c_plus, b.c_minus) {
        (Some(hi), Some(lo)) => {
            if lo > 1.0 + BRANCH_TOL {
                Phase::Bistable
            } else if hi > 1.0 + BRANCH_TOL {
                Phase::SuperradiantLasing
            } else {
                Phase::Normal
            }
        }
        _ => Phase::Normal,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    pub(crate) fn baseline(n: u64, epsilon: f64, w: f64) -> ModelParams {
        ModelParams::with_collective_coupling(n, 1.0, 1.0, epsilon, 1.0, 0.01, w, 1.0)
    }

    #[test]
    fn derived_rates_baseline() {
        let r = derive_rates(&baseline(100, 0.0, 0.2)).unwrap();
        assert_relative_eq!(r.kappa_s, 1.21, epsilon = 1e-14);
        assert_relative_eq!(r.gamma_total, 2.21, epsilon = 1e-14);
        assert_relative_eq!(r.pump_factor, 0.19 / 0.21, epsilon = 1e-14);
        assert_relative_eq!(r.c0, 4.0 / 1.21, max_relative = 1e-14);
    }

    #[test]
    fn pump_factor_vanishes_at_balance() {
        let mut p = baseline(10, 0.0, 0.3);
        p.gamma = 0.3;
        assert_eq!(derive_rates(&p).unwrap().pump_factor, 0.0);
    }

    #[test]
    fn degenerate_rates() {
        let mut p = baseline(10, 0.0, 0.0);
        p.gamma = 0.0;
        assert_eq!(derive_rates(&p), Err(Error::DegenerateRates));
    }

    #[test]
    fn collective_coupling_roundtrip() {
        let p = ModelParams::with_collective_coupling(15, 1.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0);
        assert_relative_eq!(p.g, 1.0 / 15f64.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(p.collective_coupling(), 1.0, max_relative = 1e-15);
    }

    #[test]
    fn effective_detuning_cases() {
        let p = ModelParams {
            epsilon: 3.0,
            ..baseline(30, 3.0, 0.2)
        };
        assert_eq!(effective_detuning(&p.at_epsilon(0.0), 7.0), 1.0);
        assert_eq!(effective_detuning(&p, 0.0), 1.0);
        assert_relative_eq!(effective_detuning(&p, 5.0), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn weak_interaction_limit() {
        let eps = 1e-4;
        let p = baseline(100, eps, 0.2);
        let r = derive_rates(&p).unwrap();
        let (hi, lo) = real_cooperativity_branches(&p).unwrap();
        let g2 = r.gamma_total * r.gamma_total;
        let free = r.c0 * r.pump_factor * g2 / (g2 + 4.0);
        assert!((hi - free).abs() < 1e-3 * free);
        let lo_asym = 4.0 * eps * eps / (r.c0 * g2) * r.pump_factor;
        assert_relative_eq!(lo, lo_asym, max_relative = 1e-3);
    }

    #[test]
    fn strong_interaction_is_complex() {
        let p = baseline(100, 50.0, 0.2);
        assert!(matches!(
            real_cooperativity_branches(&p),
            Err(Error::ComplexBranches { .. })
        ));
        assert_eq!(classify_phase(&p).unwrap(), Phase::Normal);
    }

    /// Bisection on `F(Jz) = Jz C(Jz) − (N/2) p` over `(0, 10 N]`.
    fn bisect_jz_roots(p: &ModelParams) -> alloc::vec::Vec<f64> {
        let r = derive_rates(p).unwrap();
        let half = 0.5 * p.n();
        let f = |jz: f64| jz * cooperativity_at(p, &r, jz) - half * r.pump_factor;
        let mut roots = alloc::vec::Vec::new();
        let steps = 200_000;
        let mut x0 = 1e-9;
        let mut f0 = f(x0);
        for i in 1..=steps {
            let x1 = 20.0 * half * i as f64 / steps as f64;
            let f1 = f(x1);
            if f0 * f1 < 0.0 {
                let (mut lo, mut hi) = (x0, x1);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if f(lo) * f(mid) <= 0.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                roots.push(0.5 * (lo + hi));
            }
            x0 = x1;
            f0 = f1;
        }
        roots
    }

    #[test]
    fn branches_match_bisection_eps1() {
        let p = baseline(1000, 1.0, 0.5);
        let (hi, lo) = real_cooperativity_branches(&p).unwrap();
        let r = derive_rates(&p).unwrap();
        let mut from_roots: alloc::vec::Vec<f64> = bisect_jz_roots(&p)
            .into_iter()
            .map(|jz| 0.5 * p.n() * r.pump_factor / jz)
            .collect();
        from_roots.sort_by(|a, b| b.partial_cmp(a).unwrap());
        assert_eq!(from_roots.len(), 2);
        assert_relative_eq!(hi, from_roots[0], max_relative = 1e-9);
        assert_relative_eq!(lo, from_roots[1], max_relative = 1e-9);
        assert!(branch_residual(&p, hi).unwrap() < 1e-10);
        assert!(branch_residual(&p, lo).unwrap() < 1e-10);
    }

    #[test]
    fn phases_at_reference_points() {
        // ε = 0, pump barely above γ: C ≈ 0.3 < 1
        assert_eq!(
            classify_phase(&baseline(100, 0.0, 0.015)).unwrap(),
            Phase::Normal
        );
        assert_eq!(
            classify_phase(&baseline(100, 1.0, 0.5)).unwrap(),
            Phase::SuperradiantLasing
        );
        assert_eq!(
            classify_phase(&baseline(100, 3.0, 0.4)).unwrap(),
            Phase::Bistable
        );
    }

    #[test]
    fn threshold_exactly_one_is_normal() {
        let b = CooperativityBranches {
            c_plus: Some(1.0),
            c_minus: Some(0.2),
            discriminant: 1.0,
        };
        assert_eq!(phase_from_branches(&b), Phase::Normal);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn branches_are_fixed_points(
                w in 0.02f64..3.0,
                eps in -6.0f64..6.0,
                delta in -3.0f64..3.0,
                gsn in 0.2f64..3.0,
            ) {
                let p = ModelParams::with_collective_coupling(500, gsn, delta, eps, 1.0, 0.01, w, 1.0);
                if let Ok((hi, lo)) = real_cooperativity_branches(&p) {
                    prop_assert!(hi >= lo);
                    for c in [hi, lo] {
                        if c.abs() > 1e-6 {
                            prop_assert!(branch_residual(&p, c).unwrap() <= 1e-10);
                        }
                    }
                }
            }

            #[test]
            fn phase_is_scale_invariant(
                w in 0.02f64..3.0,
                eps in -6.0f64..6.0,
                lambda in 0.1f64..10.0,
            ) {
                let p = baseline(200, eps, w);
                let q = ModelParams {
                    g: p.g * lambda,
                    kappa: p.kappa * lambda,
                    gamma: p.gamma * lambda,
                    pump_w: p.pump_w * lambda,
                    gamma_phi: p.gamma_phi * lambda,
                    delta: p.delta * lambda,
                    epsilon: p.epsilon * lambda,
                    ..p
                };
                let (bp, bq) = (cooperativity_branches(&p).unwrap(), cooperativity_branches(&q).unwrap());
                match (bp.c_plus, bq.c_plus) {
                    (Some(a), Some(b)) => prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0)),
                    (None, None) => {}
                    _ => prop_assert!(bp.discriminant.abs() < 1e-9),
                }
                prop_assert_eq!(classify_phase(&p).unwrap(), classify_phase(&q).unwrap());
            }

            #[test]
            fn detuning_is_affine(jz in -50.0f64..50.0, eps in -5.0f64..5.0) {
                let p = baseline(100, eps, 0.3);
                let slope = (effective_detuning(&p, jz + 1.0) - effective_detuning(&p, jz)) / 1.0;
                prop_assert!((slope + 2.0 * eps / 100.0).abs() < 1e-12);
            }
        }
    }
}
