//! Bessel functions of the first kind, integer order, and spherical Bessel
//! functions.
//!
//! Three regimes for `J_ν(x)`:
//!
//! * ascending power series for small `|x|` (no cancellation there),
//! * Miller downward recurrence normalized by `J_0 + 2 Σ J_{2k} = 1` for the
//!   middle range,
//! * Hankel asymptotic expansion for `x` well beyond the turning point
//!   (`x ≳ ν²/2`), where the expansion converges factorially.
//!
//! Spherical `j_l(x)` uses the closed forms for `l ≤ 1`, an ascending series
//! while it is cancellation-free (`x² ≤ 2l+3`), upward recurrence for
//! `x ≥ l`, and Miller downward recurrence normalized against `j_0`/`j_1`
//! otherwise.

use crate::{Error, Result};

/// Largest supported order for `J_ν` and `j_l`.
pub const MAX_BESSEL_ORDER: u32 = 200;
/// Largest supported `|x|` for `J_ν`.
pub const MAX_BESSEL_ARG: f64 = 1.0e5;

const SERIES_MAX_X: f64 = 9.0;
const RESCALE_THRESHOLD: f64 = 1e250;
const RESCALE_FACTOR: f64 = 1e-250;

fn check_domain(order: u32, x: f64) -> Result<()> {
    if order > MAX_BESSEL_ORDER {
        return Err(Error::Domain(format!(
            "Bessel order {order} exceeds {MAX_BESSEL_ORDER}"
        )));
    }
    if !x.is_finite() || x.abs() > MAX_BESSEL_ARG {
        return Err(Error::Domain(format!(
            "Bessel argument {x} outside |x| <= {MAX_BESSEL_ARG:e}"
        )));
    }
    Ok(())
}

/// `J_ν(x)` for integer order `ν ≤ 200`, `|x| ≤ 1e5`.
pub fn bessel_j(order: u32, x: f64) -> Result<f64> {
    check_domain(order, x)?;
    // J_ν(−x) = (−1)^ν J_ν(x)
    let sign = if x < 0.0 && order % 2 == 1 { -1.0 } else { 1.0 };
    let x = x.abs();
    if x == 0.0 {
        return Ok(if order == 0 { 1.0 } else { 0.0 });
    }
    let v = if x <= SERIES_MAX_X {
        series_j(order, x)
    } else if x >= asymptotic_threshold(order) {
        asymptotic_j(order, x)
    } else if x >= UPWARD_MIN_X && (order as f64) <= 0.5 * x {
        upward_sequence(order as usize, x)[order as usize]
    } else {
        miller_sequence(order as usize, x)[order as usize]
    };
    Ok(sign * v)
}

/// `J_0(x) … J_{max_order}(x)` in one pass.
pub fn bessel_j_sequence(max_order: u32, x: f64) -> Result<Vec<f64>> {
    check_domain(max_order, x)?;
    let xa = x.abs();
    let n = max_order as usize;
    if xa == 0.0 {
        let mut out = vec![0.0; n + 1];
        out[0] = 1.0;
        return Ok(out);
    }
    let mut out = if xa <= SERIES_MAX_X {
        (0..=n as u32).map(|k| series_j(k, xa)).collect()
    } else if xa >= asymptotic_threshold(max_order) {
        (0..=n as u32).map(|k| asymptotic_j(k, xa)).collect()
    } else if xa >= UPWARD_MIN_X && (n as f64) <= 0.5 * xa {
        upward_sequence(n, xa)
    } else {
        miller_sequence(n, xa)
    };
    if x < 0.0 {
        for (k, v) in out.iter_mut().enumerate() {
            if k % 2 == 1 {
                *v = -*v;
            }
        }
    }
    Ok(out)
}

/// `J_ν(x)/x` for `ν ≥ 1`, `x ≥ 0`, with the removable singularity at the
/// origin expanded analytically below `x = 1e-6`: the limit is `1/2` for
/// `ν = 1` and `0` otherwise.
pub fn bessel_j_over_x(order: u32, x: f64) -> Result<f64> {
    debug_assert!(order >= 1);
    if x < 0.0 || !x.is_finite() {
        return Err(Error::Domain(format!("bessel_j_over_x needs x >= 0, got {x}")));
    }
    if x < 1e-6 {
        // J_ν(x)/x = x^{ν−1}/(2^ν ν!) · (1 − x²/(4(ν+1)) + …); the quadratic
        // correction is below 1e-13 here.
        let nu = order as f64;
        let lead = if order == 1 {
            0.5
        } else if x == 0.0 {
            0.0
        } else {
            (-(nu * std::f64::consts::LN_2) - super::ln_factorial(order as usize)
                + (nu - 1.0) * x.ln())
            .exp()
        };
        return Ok(lead * (1.0 - x * x / (4.0 * (nu + 1.0))));
    }
    Ok(bessel_j(order, x)? / x)
}

/// Ascending series; safe (monotonically damped tail, no large-term
/// cancellation) for `x ≤ 9`.
fn series_j(order: u32, x: f64) -> f64 {
    let nu = order as f64;
    let half_x = 0.5 * x;
    // leading (x/2)^ν / ν! in log space; underflows honestly to 0 for
    // extreme ν with tiny x.
    let ln_lead = nu * half_x.ln() - super::ln_factorial(order as usize);
    let lead = ln_lead.exp();
    if lead == 0.0 {
        return 0.0;
    }
    let q = half_x * half_x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut carry = 0.0;
    for k in 1..=80 {
        term *= -q / (k as f64 * (nu + k as f64));
        let y = term - carry;
        let t = sum + y;
        carry = (t - sum) - y;
        sum = t;
        if term.abs() < 1e-18 * sum.abs().max(1e-30) {
            break;
        }
    }
    lead * sum
}

fn asymptotic_threshold(order: u32) -> f64 {
    let nu = order as f64;
    (0.5 * nu * nu + 40.0).max(160.0)
}

/// Below this, the long upward recurrence offers no advantage over Miller.
const UPWARD_MIN_X: f64 = 300.0;

/// Upward recurrence seeded with asymptotic `J_0`, `J_1`; stable while the
/// order stays below `x` (callers keep `n ≤ x/2`), and avoids the rounding
/// accumulated by a downward pass over `O(x)` orders when `x` is large.
fn upward_sequence(n_max: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; n_max + 1];
    out[0] = asymptotic_j(0, x);
    if n_max >= 1 {
        out[1] = asymptotic_j(1, x);
        for k in 1..n_max {
            out[k + 1] = (2.0 * k as f64 / x) * out[k] - out[k - 1];
        }
    }
    out
}

/// Hankel asymptotic expansion
/// `J_ν(x) = sqrt(2/(πx)) (P cos χ − Q sin χ)`, `χ = x − (ν/2 + 1/4)π`.
fn asymptotic_j(order: u32, x: f64) -> f64 {
    let mu = 4.0 * (order as f64) * (order as f64);
    let inv8x = 1.0 / (8.0 * x);
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0;
    for j in 1..=24u32 {
        let odd = (2 * j - 1) as f64;
        term *= (mu - odd * odd) * inv8x / j as f64;
        let signed = match j % 4 {
            0 | 1 => term,
            _ => -term,
        };
        if j % 2 == 0 {
            p += signed;
        } else {
            q += signed;
        }
        if term.abs() < 1e-18 {
            break;
        }
    }
    let chi = x - (0.5 * order as f64 + 0.25) * std::f64::consts::PI;
    (2.0 / (std::f64::consts::PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// Downward recurrence from above the turning point, normalized with
/// `J_0 + 2 Σ_{k≥1} J_{2k} = 1`. Returns `J_0 … J_{n_max}`.
fn miller_sequence(n_max: usize, x: f64) -> Vec<f64> {
    let base = x.max(n_max as f64);
    let start = (base + 20.0 + 12.0 * base.cbrt()).ceil() as usize;
    let start = start + (start % 2); // even start keeps the sum bookkeeping simple

    let mut out = vec![0.0; n_max + 1];
    let mut jp = 0.0_f64; // J_{k+1}
    let mut jc = 1e-300_f64; // J_k (arbitrary seed; scale fixed by the sum rule)
    let mut sum = 0.0_f64;
    if start <= n_max {
        unreachable!("start order must exceed requested orders");
    }
    for k in (0..start).rev() {
        // J_k = (2(k+1)/x) J_{k+1} − J_{k+2}
        let jm = (2.0 * (k as f64 + 1.0) / x) * jc - jp;
        jp = jc;
        jc = jm;
        if k <= n_max {
            out[k] = jc;
        }
        if k % 2 == 0 {
            sum += if k == 0 { jc } else { 2.0 * jc };
        }
        if jc.abs() > RESCALE_THRESHOLD {
            jc *= RESCALE_FACTOR;
            jp *= RESCALE_FACTOR;
            sum *= RESCALE_FACTOR;
            for v in out.iter_mut() {
                *v *= RESCALE_FACTOR;
            }
        }
    }
    for v in out.iter_mut() {
        *v /= sum;
    }
    out
}

/// Spherical Bessel function `j_l(x)` for `l ≤ 200`.
pub fn spherical_bessel_j(l: u32, x: f64) -> Result<f64> {
    Ok(*spherical_bessel_j_sequence(l, x)?
        .last()
        .expect("sequence is non-empty"))
}

/// `j_0(x) … j_{l_max}(x)` in one pass. Negative arguments use the parity
/// `j_l(−x) = (−1)^l j_l(x)`.
pub fn spherical_bessel_j_sequence(l_max: u32, x: f64) -> Result<Vec<f64>> {
    if l_max > MAX_BESSEL_ORDER {
        return Err(Error::Domain(format!(
            "spherical Bessel order {l_max} exceeds {MAX_BESSEL_ORDER}"
        )));
    }
    if !x.is_finite() {
        return Err(Error::Domain(format!("non-finite argument {x}")));
    }
    let xa = x.abs();
    let n = l_max as usize;
    let mut out = vec![0.0; n + 1];
    if xa == 0.0 {
        out[0] = 1.0;
        return Ok(out);
    }

    let j0 = xa.sin() / xa;
    // the closed form (sin x − x cos x)/x² cancels catastrophically for
    // small x; the series is exact there
    let j1 = if xa < 0.05 {
        series_spherical(1, xa)
    } else {
        j0 / xa - xa.cos() / xa
    };
    out[0] = j0;
    if n >= 1 {
        out[1] = j1;
    }
    if n >= 2 {
        if xa >= n as f64 + 20.0 {
            // upward recurrence, stable with the order well below x
            for k in 1..n {
                out[k + 1] = (2.0 * k as f64 + 1.0) / xa * out[k] - out[k - 1];
            }
        } else {
            // downward Miller pass; each l with x² ≤ 2l+3 could also use the
            // series, but one normalized sweep covers all orders at once.
            let start = n + 40 + (1.5 * xa) as usize;
            let mut fp = 0.0_f64;
            let mut fc = 1e-300_f64;
            for k in (0..start).rev() {
                let fm = (2.0 * k as f64 + 3.0) / xa * fc - fp;
                fp = fc;
                fc = fm;
                if k <= n {
                    out[k] = fc;
                }
                if fc.abs() > RESCALE_THRESHOLD {
                    fc *= RESCALE_FACTOR;
                    fp *= RESCALE_FACTOR;
                    for v in out.iter_mut() {
                        *v *= RESCALE_FACTOR;
                    }
                }
            }
            // normalize against whichever closed form is better conditioned
            let scale = if j0.abs() >= j1.abs() {
                j0 / out[0]
            } else {
                j1 / out[1]
            };
            for v in out.iter_mut() {
                *v *= scale;
            }
            // tiny-x orders underflow progressively; replace junk below the
            // underflow floor with honest series values
            for (l, v) in out.iter_mut().enumerate() {
                if !v.is_finite() {
                    *v = series_spherical(l as u32, xa);
                }
            }
        }
    }
    if x < 0.0 {
        for (l, v) in out.iter_mut().enumerate() {
            if l % 2 == 1 {
                *v = -*v;
            }
        }
    }
    Ok(out)
}

/// Ascending series for `j_l`; cancellation-free when `x² ≤ 2l+3`.
fn series_spherical(l: u32, x: f64) -> f64 {
    // x^l / (2l+1)!! via the factorial table
    let lf = l as f64;
    let ln_lead = lf * x.ln() - super::ln_factorial(2 * l as usize + 1)
        + lf * std::f64::consts::LN_2
        + super::ln_factorial(l as usize);
    let lead = ln_lead.exp();
    if lead == 0.0 {
        return 0.0;
    }
    let h = 0.5 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..=60 {
        term *= -h / (k as f64 * (2.0 * lf + 2.0 * k as f64 + 1.0));
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-30) {
            break;
        }
    }
    lead * sum
}
