//! Self-contained special functions.
//!
//! Bessel `J_ν` of integer order, spherical Bessel `j_l`, log-factorials, and
//! Clebsch–Gordan coefficients with half-integer arguments. No external
//! special-function dependency: Bessel evaluation combines an ascending
//! series, Miller downward recurrence with sum normalization, and the Hankel
//! asymptotic expansion; Clebsch–Gordan coefficients use the Racah closed
//! form in log-factorial arithmetic with compensated summation.

mod bessel;

pub use bessel::{
    bessel_j, bessel_j_over_x, bessel_j_sequence, spherical_bessel_j, spherical_bessel_j_sequence,
    MAX_BESSEL_ARG, MAX_BESSEL_ORDER,
};

use crate::{Error, Result};
use once_cell::sync::Lazy;

/// Largest argument for which `ln_factorial` is tabulated.
pub const MAX_FACTORIAL_ARG: usize = 400;

static LN_FACT: Lazy<[f64; MAX_FACTORIAL_ARG + 1]> = Lazy::new(|| {
    let mut table = [0.0; MAX_FACTORIAL_ARG + 1];
    // Kahan-compensated running sum of ln k keeps the tail entries at a few
    // ulps even though ln(400!) ≈ 1976.
    let mut sum = 0.0;
    let mut carry = 0.0;
    for (k, slot) in table.iter_mut().enumerate().skip(2) {
        let y = (k as f64).ln() - carry;
        let t = sum + y;
        carry = (t - sum) - y;
        sum = t;
        *slot = sum;
    }
    table
});

/// `ln(k!)` from the precomputed table. Panics if `k > 400`.
#[inline]
pub fn ln_factorial(k: usize) -> f64 {
    LN_FACT[k]
}

/// Angular-momentum triple `(j1 m1; j2 m2 | j3 m3)` with half-integer entries
/// stored as doubled integers, so `two_j = 1` means `j = 1/2`.
///
/// Construction enforces `|m_r| ≤ j_r`, `j_r − m_r` integer, and
/// `j1 + j2 + j3` integer. The `m`-conservation and triangle conditions are
/// *not* construction errors: coefficients for triples violating them are
/// exactly zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AngularMomentumTriple {
    two_j1: u32,
    two_j2: u32,
    two_j3: u32,
    two_m1: i32,
    two_m2: i32,
    two_m3: i32,
}

impl AngularMomentumTriple {
    pub fn new(
        two_j1: i64,
        two_j2: i64,
        two_j3: i64,
        two_m1: i64,
        two_m2: i64,
        two_m3: i64,
    ) -> Result<Self> {
        for (two_j, two_m) in [(two_j1, two_m1), (two_j2, two_m2), (two_j3, two_m3)] {
            if two_j < 0 {
                return Err(Error::InvalidTriple(format!("negative j: 2j = {two_j}")));
            }
            if two_m.abs() > two_j {
                return Err(Error::InvalidTriple(format!(
                    "|m| > j: 2j = {two_j}, 2m = {two_m}"
                )));
            }
            if (two_j - two_m) % 2 != 0 {
                return Err(Error::InvalidTriple(format!(
                    "j - m is not an integer: 2j = {two_j}, 2m = {two_m}"
                )));
            }
        }
        if (two_j1 + two_j2 + two_j3) % 2 != 0 {
            return Err(Error::InvalidTriple(format!(
                "j1 + j2 + j3 is not an integer: 2j = ({two_j1}, {two_j2}, {two_j3})"
            )));
        }
        Ok(Self {
            two_j1: two_j1 as u32,
            two_j2: two_j2 as u32,
            two_j3: two_j3 as u32,
            two_m1: two_m1 as i32,
            two_m2: two_m2 as i32,
            two_m3: two_m3 as i32,
        })
    }

    fn triangle_ok(&self) -> bool {
        let (a, b, c) = (
            self.two_j1 as i64,
            self.two_j2 as i64,
            self.two_j3 as i64,
        );
        (a - b).abs() <= c && c <= a + b
    }
}

/// Clebsch–Gordan coefficient `⟨j1 m1; j2 m2 | j3 m3⟩` in the
/// Condon–Shortley phase convention.
///
/// Returns exactly `0.0` when `m1 + m2 ≠ m3` or the triangle condition
/// `|j1 − j2| ≤ j3 ≤ j1 + j2` fails. Evaluated through the Racah closed-form
/// sum with log-factorial terms; the alternating sum is compensated and the
/// largest exponent is factored out before exponentiation.
pub fn clebsch_gordan(t: &AngularMomentumTriple) -> Result<f64> {
    if t.two_m1 + t.two_m2 != t.two_m3 || !t.triangle_ok() {
        return Ok(0.0);
    }

    // All the combinations below are integers for a valid triple.
    let j1pj2mj3 = ((t.two_j1 + t.two_j2) as i64 - t.two_j3 as i64) / 2;
    let j1mj2pj3 = ((t.two_j1 as i64 - t.two_j2 as i64) + t.two_j3 as i64) / 2;
    let mj1pj2pj3 = ((t.two_j2 + t.two_j3) as i64 - t.two_j1 as i64) / 2;
    let jsum1 = (t.two_j1 + t.two_j2 + t.two_j3) as i64 / 2 + 1;
    let j1pm1 = (t.two_j1 as i64 + t.two_m1 as i64) / 2;
    let j1mm1 = (t.two_j1 as i64 - t.two_m1 as i64) / 2;
    let j2pm2 = (t.two_j2 as i64 + t.two_m2 as i64) / 2;
    let j2mm2 = (t.two_j2 as i64 - t.two_m2 as i64) / 2;
    let j3pm3 = (t.two_j3 as i64 + t.two_m3 as i64) / 2;
    let j3mm3 = (t.two_j3 as i64 - t.two_m3 as i64) / 2;
    let j3mj2pm1 = (t.two_j3 as i64 - t.two_j2 as i64 + t.two_m1 as i64) / 2;
    let j3mj1mm2 = (t.two_j3 as i64 - t.two_j1 as i64 - t.two_m2 as i64) / 2;

    if jsum1 as usize > MAX_FACTORIAL_ARG {
        return Err(Error::Domain(format!(
            "angular momenta too large for the factorial table: j1+j2+j3+1 = {jsum1}"
        )));
    }
    let lf = |v: i64| ln_factorial(v as usize);

    let ln_pref = 0.5
        * (((t.two_j3 + 1) as f64).ln() + lf(j1pj2mj3) + lf(j1mj2pj3) + lf(mj1pj2pj3)
            - lf(jsum1)
            + lf(j1pm1)
            + lf(j1mm1)
            + lf(j2pm2)
            + lf(j2mm2)
            + lf(j3pm3)
            + lf(j3mm3));

    let k_min = 0.max(-j3mj2pm1).max(-j3mj1mm2);
    let k_max = j1pj2mj3.min(j1mm1).min(j2pm2);
    debug_assert!(k_min <= k_max);

    // Factor out the largest exponent so the alternating sum happens on O(1)
    // numbers, then Kahan-sum it.
    let exponents: Vec<f64> = (k_min..=k_max)
        .map(|k| {
            ln_pref
                - lf(k)
                - lf(j1pj2mj3 - k)
                - lf(j1mm1 - k)
                - lf(j2pm2 - k)
                - lf(j3mj2pm1 + k)
                - lf(j3mj1mm2 + k)
        })
        .collect();
    let e_max = exponents.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    let mut carry = 0.0;
    for (k, e) in (k_min..=k_max).zip(exponents.iter()) {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let y = sign * (e - e_max).exp() - carry;
        let tacc = sum + y;
        carry = (tacc - sum) - y;
        sum = tacc;
    }
    Ok(sum * e_max.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn cg(two: [i64; 6]) -> f64 {
        clebsch_gordan(
            &AngularMomentumTriple::new(two[0], two[1], two[2], two[3], two[4], two[5]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn ln_factorial_matches_direct_product() {
        assert_eq!(ln_factorial(0), 0.0);
        assert_eq!(ln_factorial(1), 0.0);
        let mut f = 1.0f64;
        for k in 2..=20 {
            f *= k as f64;
            assert_abs_diff_eq!(ln_factorial(k), f.ln(), epsilon = 1e-12);
        }
    }

    #[test]
    fn malformed_triples_rejected() {
        assert!(AngularMomentumTriple::new(-1, 0, 1, 0, 0, 0).is_err());
        assert!(AngularMomentumTriple::new(1, 1, 2, 3, -1, 2).is_err()); // |m| > j
        assert!(AngularMomentumTriple::new(1, 1, 2, 0, 0, 0).is_err()); // j - m not integer
        assert!(AngularMomentumTriple::new(1, 1, 1, 1, -1, 1).is_err()); // j1+j2+j3 half-integer
    }

    #[test]
    fn selection_rules_give_exact_zero() {
        // m1 + m2 != m3
        assert_eq!(cg([2, 2, 2, 2, 0, 0]), 0.0);
        // triangle violated
        assert_eq!(cg([2, 2, 6, 0, 0, 0]), 0.0);
    }

    /// Two spin-1/2 oracle: apply the total-spin operator
    /// `S² = S1² + S2² + 2 S1z S2z + S1+S2− + S1−S2+` to the CG-built
    /// m = 0 vectors on the product basis. On `v = a|↑↓⟩ + b|↓↑⟩` this gives
    /// `S² v = (a+b)(|↑↓⟩ + |↓↑⟩)`, so the singlet needs `a + b = 0` and the
    /// triplet (eigenvalue 2) needs `a = b` with unit norm.
    #[test]
    fn two_spin_half_oracle() {
        let s_up_down = cg([1, 1, 0, 1, -1, 0]);
        let s_down_up = cg([1, 1, 0, -1, 1, 0]);
        assert_abs_diff_eq!(s_up_down + s_down_up, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(
            s_up_down * s_up_down + s_down_up * s_down_up,
            1.0,
            epsilon = 1e-14
        );
        let t_up_down = cg([1, 1, 2, 1, -1, 0]);
        let t_down_up = cg([1, 1, 2, -1, 1, 0]);
        // S² v = 2v ⟺ (a+b) = 2a = 2b
        assert_abs_diff_eq!(t_up_down + t_down_up, 2.0 * t_up_down, epsilon = 1e-14);
        assert_abs_diff_eq!(
            t_up_down * t_up_down + t_down_up * t_down_up,
            1.0,
            epsilon = 1e-14
        );
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        // Condon–Shortley fixes the highest-first-m coefficient positive
        assert_abs_diff_eq!(s_up_down, inv_sqrt2, epsilon = 1e-14);
        assert_abs_diff_eq!(t_up_down, inv_sqrt2, epsilon = 1e-14);
        // stretched state
        assert_abs_diff_eq!(cg([1, 1, 2, 1, 1, 2]), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn antisymmetry_forces_zero() {
        // ⟨1 0; 1 0 | 1 0⟩ = 0: the two Racah terms cancel exactly.
        assert_eq!(cg([2, 2, 2, 0, 0, 0]), 0.0);
    }

    #[test]
    fn known_values() {
        // Cross-checked against the tabulated ⟨2 2; 1 −1 | 3 1⟩ = √(1/15) family.
        assert_abs_diff_eq!(cg([4, 2, 6, 4, -2, 2]), (1.0f64 / 15.0).sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(
            cg([5, 4, 5, 3, 2, 5]),
            -(3.0f64 / 7.0).sqrt(),
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(
            cg([5, 3, 6, 3, 1, 4]),
            (1.0f64 / 12.0).sqrt(),
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(
            cg([5, 3, 4, 3, 1, 4]),
            -(8.0f64 / 21.0).sqrt(),
            epsilon = 1e-14
        );
    }

    /// Spot-check the log-factorial Racah evaluation at the top of the
    /// guaranteed range (j = 25, sums of up to 51 alternating terms).
    #[test]
    fn orthogonality_at_j25() {
        for two_js in [0i64, 24, 50, 100] {
            for two_m in [0i64, 10, two_js] {
                if two_m > two_js {
                    continue;
                }
                let mut diag = 0.0;
                for two_m1 in (-50..=50i64).step_by(2) {
                    let two_m2 = two_m - two_m1;
                    if two_m2.abs() > 50 {
                        continue;
                    }
                    let c = cg([50, 50, two_js, two_m1, two_m2, two_m]);
                    diag += c * c;
                }
                assert_abs_diff_eq!(diag, 1.0, epsilon = 1e-11);
            }
        }
    }

    /// Σ_{m1,m2} ⟨j1m1;j2m2|JM⟩⟨j1m1;j2m2|J'M'⟩ = δ_{JJ'} δ_{MM'}.
    #[test]
    fn orthogonality_up_to_j6() {
        for two_j1 in 0..=12i64 {
            for two_j2 in 0..=12i64 {
                let mut two_js = (two_j1 - two_j2).abs();
                while two_js <= two_j1 + two_j2 {
                    // spot-check J' = J and J' = J + 1 (same M) plus M' = M + 2
                    for two_m in (-two_js..=two_js).step_by(2) {
                        let mut diag = 0.0;
                        let mut off_j = 0.0;
                        for two_m1 in (-two_j1..=two_j1).step_by(2) {
                            let two_m2 = two_m - two_m1;
                            if two_m2.abs() > two_j2 {
                                continue;
                            }
                            let c = cg([two_j1, two_j2, two_js, two_m1, two_m2, two_m]);
                            diag += c * c;
                            if two_js + 2 <= two_j1 + two_j2 && two_m.abs() <= two_js + 2 {
                                let c2 =
                                    cg([two_j1, two_j2, two_js + 2, two_m1, two_m2, two_m]);
                                off_j += c * c2;
                            }
                        }
                        assert_abs_diff_eq!(diag, 1.0, epsilon = 1e-10);
                        assert_abs_diff_eq!(off_j, 0.0, epsilon = 1e-10);
                    }
                    two_js += 2;
                }
            }
        }
    }
}
