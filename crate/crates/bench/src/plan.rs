//! Subsample-size planning report: planned m, admissibility verdict, and
//! the error bound at the planned size.

use std::fmt;

use kme_core::spectral::{
    admissible_m, plan_subsample_size, plan_subsample_size_raw, theorem_bound, DecayRegime,
    SpectralProfile,
};

use crate::error::Result;

#[derive(Clone, Debug)]
pub struct PlanReport {
    pub n: usize,
    pub delta: f64,
    pub regime: DecayRegime,
    pub k_bound: f64,
    pub c_norm: f64,
    pub planned_m: usize,
    /// True when the raw rule was clamped into `[4, n]`.
    pub clamped: bool,
    pub admissible: bool,
    /// Bound at the planned m; `None` when the plan is inadmissible.
    pub bound: Option<f64>,
    /// True when no data profile was supplied and a flat unit spectrum was
    /// assumed for the admissibility check and bound.
    pub flat_assumption: bool,
    /// True when the profile was estimated from a subsample of the data.
    pub approximate_profile: bool,
}

/// Evaluates the plan for `n` samples at confidence `delta` under the decay
/// regime. Without a profile, a flat spectrum `{K^2}` with `K = 1` stands in
/// so the admissibility check and bound stay evaluable.
pub fn report_plan(
    n: usize,
    delta: f64,
    regime: &DecayRegime,
    profile: Option<&SpectralProfile>,
) -> Result<PlanReport> {
    let flat;
    let owned;
    let profile = match profile {
        Some(p) => {
            flat = false;
            p
        }
        None => {
            flat = true;
            owned = SpectralProfile::from_eigenvalues(vec![1.0], 1.0)?;
            &owned
        }
    };
    let k_bound = profile.k_bound();
    let c_norm = profile.top_eigenvalue();

    let raw = plan_subsample_size_raw(n, delta, regime, k_bound)?;
    let planned_m = plan_subsample_size(n, delta, regime, k_bound)?;
    let clamped = raw.ceil() as usize != planned_m;

    let admissible = admissible_m(planned_m.max(4), delta, k_bound, c_norm)?;
    let bound = if admissible {
        Some(theorem_bound(n, planned_m, delta, profile)?)
    } else {
        None
    };

    Ok(PlanReport {
        n,
        delta,
        regime: *regime,
        k_bound,
        c_norm,
        planned_m,
        clamped,
        admissible,
        bound,
        flat_assumption: flat,
        approximate_profile: profile.is_approximate(),
    })
}

impl fmt::Display for PlanReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let regime = match self.regime {
            DecayRegime::Polynomial { gamma, c } => format!("poly(gamma={gamma}, c={c})"),
            DecayRegime::Logarithmic { beta, c } => format!("log(beta={beta}, c={c})"),
        };
        writeln!(
            f,
            "plan for n = {}, delta = {}, regime = {regime}",
            self.n, self.delta
        )?;
        write!(f, "  planned m = {}", self.planned_m)?;
        if self.clamped {
            write!(f, " (clamped to [4, n])")?;
        }
        writeln!(f)?;
        if self.flat_assumption {
            writeln!(
                f,
                "  spectrum: flat unit spectrum assumed (no data supplied)"
            )?;
        } else if self.approximate_profile {
            writeln!(f, "  spectrum: estimated from a subsample (approximate)")?;
        }
        writeln!(
            f,
            "  admissibility (K = {}, ||C|| = {}): {}",
            self.k_bound,
            self.c_norm,
            if self.admissible {
                "admissible"
            } else {
                "inadmissible"
            }
        )?;
        match self.bound {
            Some(b) => writeln!(f, "  error bound at planned m: {b}"),
            None => writeln!(f, "  error bound at planned m: inadmissible"),
        }
    }
}
