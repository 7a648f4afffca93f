//! Analytic propagation of Zernike modes.
//!
//! # Coordinates and conventions
//!
//! All transverse coordinates are dimensionless diffraction units: the
//! forward transform kernel is `e^{2πi q ρ cos(θ−φ)}` over the unit-disc
//! pupil variable `ρ`, so the transform of a mode is
//!
//! ```text
//! Z̃_n^m(q, φ) = 2π iⁿ √(n+1) · J_{n+1}(2πq)/(2πq) · e^{imφ}.
//! ```
//!
//! The Fresnel kernel integrated over the pupil azimuth produces
//! `J_m(−2πqρ)` together with the chirp `e^{iκρ²}`, `κ = k/(2z)` (the
//! physical image-plane radius maps onto `q` through `k ρ_phys / z = 2πq`).
//! Expanding the chirp in Legendre polynomials,
//! `e^{iκρ²} = e^{iκ/2} Σ_l (2l+1) i^l j_l(κ/2) R_{2l}^0(ρ)`, and linearizing
//! `R_{2l}^0 R_n^{|m|}` with Clebsch–Gordan coefficients reduces the radial
//! Fresnel integral to a spherical-Bessel × Bessel double series:
//!
//! ```text
//! V_n^m(q; κ) = √(n+1) e^{iκ/2} Σ_h Σ_l i^{l−h} (2l+1) j_l(κ/2)
//!               |⟨l 0; n/2 m/2 | h/2 m/2⟩|² · J_{h+1}(2πq)/(2πq),
//! ```
//!
//! with `h ≥ |m|` of the parity of `m` and `|n−h|/2 ≤ l ≤ (n+h)/2`. Both the
//! constant phase `e^{iκ/2}` and the coefficient normalization (`|C|²`, not
//! the square-root-weighted linearization coefficient) are validated against
//! direct adaptive quadrature of the defining integral in the test suite.
//! As `κ → 0` only `(l, h) = (0, n)` survives and
//! `V_n^m → √(n+1) i^{−n} J_{n+1}(2πq)/(2πq)`: the far field of one mode is
//! its transform with the *inverse*-sign kernel, i.e. `(−1)^n Z̃_n^m / 2π`.
//! The mode-parity factor `(−1)^n` between the two conventions is inherent;
//! single-mode fields agree with [`fraunhofer_field`] up to a global factor.
//!
//! # Truncation
//!
//! Spherical-Bessel factors die superexponentially for `l ≳ e·κ/4` and the
//! Bessel factors for `h ≳ 2πq`, so the automatic rule caps
//! `h ≤ ceil(πe·q_max) + margin` and `l ≤ ceil(e·κ/4) + margin`. The builder
//! estimates the dropped tail and fails with `Convergence` when an explicit
//! rule cuts into the non-negligible region.

use num_complex::Complex64;

use crate::field::{FieldGrid, GridSpec, Plane};
use crate::special::{
    bessel_j_over_x, bessel_j_sequence, clebsch_gordan, spherical_bessel_j_sequence,
    AngularMomentumTriple,
};
use crate::zernike::ZernikeExpansion;
use crate::{Complex, Error, ModeIndex, Result};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;
/// Extra orders kept beyond the analytic decay estimates in auto mode.
pub const AUTO_MARGIN: u32 = 20;
/// Relative tail budget before truncation counts as non-converged.
const TAIL_TOLERANCE: f64 = 1e-11;

#[inline]
fn i_pow(k: i64) -> Complex {
    match k.rem_euclid(4) {
        0 => Complex::new(1.0, 0.0),
        1 => Complex::new(0.0, 1.0),
        2 => Complex::new(-1.0, 0.0),
        _ => Complex::new(0.0, -1.0),
    }
}

/// Fourier transform of a mode at polar spatial frequency `(q, φ)`:
/// `2π iⁿ √(n+1) J_{n+1}(2πq)/(2πq) e^{imφ}`, with the `q → 0` limit taken
/// analytically.
pub fn zernike_ft(idx: ModeIndex, q: f64, phi: f64) -> Result<Complex> {
    if q < 0.0 {
        return Err(Error::Domain(format!("q = {q} must be non-negative")));
    }
    let radial = bessel_j_over_x(idx.n() + 1, TWO_PI * q)?;
    let amp = TWO_PI * ((idx.n() + 1) as f64).sqrt() * radial;
    Ok(i_pow(idx.n() as i64) * Complex64::from_polar(1.0, idx.m() as f64 * phi) * amp)
}

/// `Σ a_{mn} Z̃_n^m` at one point of the image plane.
pub fn fraunhofer_point(exp: &ZernikeExpansion, q: f64, phi: f64) -> Result<Complex> {
    let mut acc = Complex::new(0.0, 0.0);
    for (idx, c) in exp.iter() {
        acc += c * zernike_ft(idx, q, phi)?;
    }
    Ok(acc)
}

/// The transform-plane kernels are Bessel functions of `2πq`; reject grids
/// whose corners leave the supported Bessel domain up front.
pub(crate) fn check_transform_extent(spec: &GridSpec) -> Result<()> {
    spec.validate()?;
    let q_corner = spec.extent_x.hypot(spec.extent_y);
    if TWO_PI * q_corner > crate::special::MAX_BESSEL_ARG {
        return Err(Error::Domain(format!(
            "grid corner q = {q_corner:.3e} exceeds the supported transform domain (2πq <= {:e})",
            crate::special::MAX_BESSEL_ARG
        )));
    }
    Ok(())
}

/// Samples the Fraunhofer (image-plane) field of an expansion on a grid.
///
/// Linear in the expansion; the grid carries the `image` plane tag.
pub fn fraunhofer_field(exp: &ZernikeExpansion, spec: GridSpec) -> Result<FieldGrid> {
    check_transform_extent(&spec)?;
    let modes: Vec<(ModeIndex, Complex)> = exp.iter().collect();
    let n_top = modes.iter().map(|(idx, _)| idx.n()).max().unwrap_or(0);
    FieldGrid::sample(spec, Plane::Image, |x, y| {
        let q = x.hypot(y);
        let phi = y.atan2(x);
        let xarg = TWO_PI * q;
        let seq = bessel_j_sequence(n_top + 1, xarg).expect("extent within Bessel domain");
        let mut acc = Complex::new(0.0, 0.0);
        for (idx, c) in &modes {
            let radial = if xarg < 1e-6 {
                bessel_j_over_x(idx.n() + 1, xarg).expect("q >= 0")
            } else {
                seq[idx.n() as usize + 1] / xarg
            };
            let amp = TWO_PI * ((idx.n() + 1) as f64).sqrt() * radial;
            acc += c * i_pow(idx.n() as i64)
                * Complex64::from_polar(1.0, idx.m() as f64 * phi)
                * amp;
        }
        acc
    })
}

/// Fresnel propagation parameters. Only `k/z` (and the plane tag) enter the
/// field values; `k` and `z` are kept separately for the carrier phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FresnelParams {
    z: f64,
    k: f64,
}

impl FresnelParams {
    pub fn new(z: f64, k: f64) -> Result<Self> {
        if !z.is_finite() || z <= 0.0 {
            return Err(Error::Domain(format!("propagation distance z = {z} must be > 0")));
        }
        if !k.is_finite() || k <= 0.0 {
            return Err(Error::Domain(format!("wavenumber k = {k} must be > 0")));
        }
        Ok(Self { z, k })
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    /// Chirp strength `κ = k/(2z)`.
    pub fn chirp(&self) -> f64 {
        self.k / (2.0 * self.z)
    }

    /// `κ/2 = k/(4z)`, the spherical-Bessel argument of the series.
    pub fn half_chirp(&self) -> f64 {
        self.k / (4.0 * self.z)
    }
}

/// Truncation limit for one series direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Limit {
    /// Derived from the decay estimates plus [`AUTO_MARGIN`].
    Auto,
    /// Explicit cap (still subject to the tail check).
    Fixed(u32),
}

/// Truncation rule for the Bessel–Bessel series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TruncationRule {
    pub h_max: Limit,
    pub l_max: Limit,
    /// Margin added to the analytic decay estimates in auto mode.
    pub margin: u32,
}

impl Default for TruncationRule {
    fn default() -> Self {
        Self {
            h_max: Limit::Auto,
            l_max: Limit::Auto,
            margin: AUTO_MARGIN,
        }
    }
}

impl TruncationRule {
    fn resolve(&self, idx: ModeIndex, half_chirp: f64, q_max: f64) -> (u32, u32) {
        let h_auto = (std::f64::consts::PI * std::f64::consts::E * q_max).ceil() as u32
            + idx.n()
            + self.margin;
        let l_auto = (std::f64::consts::E * half_chirp / 2.0).ceil() as u32
            + idx.n() / 2
            + self.margin;
        let h_max = match self.h_max {
            Limit::Auto => h_auto,
            Limit::Fixed(h) => h,
        };
        let l_max = match self.l_max {
            Limit::Auto => l_auto,
            Limit::Fixed(l) => l,
        };
        (h_max.max(idx.m_abs()), l_max)
    }
}

/// Precomputed radial Fresnel series for one mode at one chirp, valid for
/// `q ≤ q_max`:
/// `V(q) = √(n+1) e^{iκ/2} Σ_h w_h J_{h+1}(2πq)/(2πq)`.
#[derive(Debug, Clone)]
pub struct FresnelModeKernel {
    idx: ModeIndex,
    prefactor: Complex,
    /// `(h, w_h)` with ascending `h` of the parity of `m`.
    weights: Vec<(u32, Complex)>,
    q_max: f64,
}

impl FresnelModeKernel {
    /// Assembles the series weights, checking the truncated tail.
    pub fn build(
        idx: ModeIndex,
        params: FresnelParams,
        rule: TruncationRule,
        q_max: f64,
    ) -> Result<Self> {
        if q_max < 0.0 {
            return Err(Error::Domain(format!("q_max = {q_max} must be non-negative")));
        }
        let half_chirp = params.half_chirp();
        let (h_max, l_max) = rule.resolve(idx, half_chirp, q_max);
        let n = idx.n() as i64;
        let m = idx.m() as i64;

        let js = spherical_bessel_j_sequence(l_max + 1, half_chirp)?;
        let mut weights = Vec::new();
        let mut abs_scale = 0.0f64;
        let mut l_truncated = false;
        let mut h = idx.m_abs();
        while h <= h_max {
            let l_lo = (n - h as i64).unsigned_abs() / 2;
            let l_hi_full = ((n + h as i64) / 2) as u64;
            let l_hi = l_hi_full.min(l_max as u64);
            if l_hi_full > l_hi {
                l_truncated = true;
            }
            let mut w = Complex::new(0.0, 0.0);
            for l in l_lo..=l_hi {
                let triple = AngularMomentumTriple::new(2 * l as i64, n, h as i64, 0, m, m)
                    .expect("series triples are valid");
                let c = clebsch_gordan(&triple)?;
                if c == 0.0 {
                    continue;
                }
                w += i_pow(l as i64 - h as i64)
                    * ((2 * l + 1) as f64 * js[l as usize] * c * c);
            }
            abs_scale += w.norm();
            weights.push((h, w));
            h += 2;
        }
        let scale = abs_scale.max(f64::MIN_POSITIVE);

        // Tail checks. The h-tail is controlled by J_{h+1}(2πq) decay beyond
        // the turning point; an h_max at or below 2πq_max leaves O(1/x)
        // oscillations uncovered.
        let x_max = TWO_PI * q_max;
        if q_max > 0.0 {
            let h_last = weights.last().map(|(h, _)| *h).unwrap_or(0);
            if (h_last as f64 + 1.0) < x_max {
                return Err(Error::Convergence(format!(
                    "h_max = {h_last} is inside the oscillatory Bessel region (2πq_max = {x_max:.2}); raise h_max"
                )));
            }
            let j_tail = bessel_j_over_x(h_last + 1, x_max)?.abs();
            let w_last = weights.last().map(|(_, w)| w.norm()).unwrap_or(0.0);
            if w_last * j_tail > TAIL_TOLERANCE * scale {
                return Err(Error::Convergence(format!(
                    "h-series tail estimate {:.3e} exceeds budget; raise h_max",
                    w_last * j_tail / scale
                )));
            }
        }
        if l_truncated {
            let l_tail = ((2 * (l_max + 1) + 1) as f64 * js[l_max as usize + 1]).abs();
            if l_tail > TAIL_TOLERANCE * scale {
                return Err(Error::Convergence(format!(
                    "l-series tail estimate {l_tail:.3e} exceeds budget; raise l_max"
                )));
            }
        }

        let prefactor = Complex64::from_polar(((idx.n() + 1) as f64).sqrt(), half_chirp);
        Ok(Self {
            idx,
            prefactor,
            weights,
            q_max,
        })
    }

    pub fn mode(&self) -> ModeIndex {
        self.idx
    }

    /// Largest Bessel order used, for batched sequence evaluation.
    pub fn max_bessel_order(&self) -> u32 {
        self.weights.last().map(|(h, _)| h + 1).unwrap_or(1)
    }

    /// Evaluates `V(q)` from a precomputed sequence `J_0..J_{max}` at
    /// `x = 2πq` (must satisfy `seq.len() > max_bessel_order`).
    pub fn eval_with_sequence(&self, q: f64, seq: &[f64]) -> Complex {
        let x = TWO_PI * q;
        let mut acc = Complex::new(0.0, 0.0);
        for &(h, w) in &self.weights {
            let radial = if x < 1e-6 {
                bessel_j_over_x(h + 1, x).expect("q >= 0")
            } else {
                seq[h as usize + 1] / x
            };
            acc += w * radial;
        }
        self.prefactor * acc
    }

    /// Evaluates `V(q)` standalone.
    pub fn eval(&self, q: f64) -> Result<Complex> {
        debug_assert!(q <= self.q_max * (1.0 + 1e-12) || self.q_max == 0.0);
        let seq = bessel_j_sequence(self.max_bessel_order(), TWO_PI * q)?;
        Ok(self.eval_with_sequence(q, &seq))
    }
}

/// Radial Fresnel factor `V_n^m(q; z)` of one mode (the full propagated mode
/// is `−(ik/z) e^{i(kz + kq²/2z)} e^{imθ} V_n^m`).
pub fn fresnel_v(
    idx: ModeIndex,
    q: f64,
    params: FresnelParams,
    rule: TruncationRule,
) -> Result<Complex> {
    if q < 0.0 {
        return Err(Error::Domain(format!("q = {q} must be non-negative")));
    }
    FresnelModeKernel::build(idx, params, rule, q)?.eval(q)
}

/// Samples the Fresnel-propagated field of an expansion:
/// `−(ik/z) e^{i(kz + kq²/2z)} Σ a_{mn} e^{imθ} V_n^m(q; z)`.
pub fn fresnel_field(
    exp: &ZernikeExpansion,
    params: FresnelParams,
    rule: TruncationRule,
    spec: GridSpec,
) -> Result<FieldGrid> {
    check_transform_extent(&spec)?;
    let q_corner = spec.extent_x.hypot(spec.extent_y);
    let mut kernels = Vec::new();
    for (idx, c) in exp.iter() {
        kernels.push((c, FresnelModeKernel::build(idx, params, rule, q_corner)?));
    }
    let top_order = kernels
        .iter()
        .map(|(_, k)| k.max_bessel_order())
        .max()
        .unwrap_or(1);
    let carrier = -Complex::new(0.0, 1.0) * (params.k() / params.z());
    let kz = params.k() * params.z();
    let chirp = params.chirp();
    FieldGrid::sample(spec, Plane::Fresnel(params.z()), move |x, y| {
        let q = x.hypot(y);
        let theta = y.atan2(x);
        let seq =
            bessel_j_sequence(top_order, TWO_PI * q).expect("extent within Bessel domain");
        let mut acc = Complex::new(0.0, 0.0);
        for (c, kernel) in &kernels {
            acc += c
                * Complex64::from_polar(1.0, kernel.mode().m() as f64 * theta)
                * kernel.eval_with_sequence(q, &seq);
        }
        carrier * Complex64::from_polar(1.0, kz + chirp * q * q) * acc
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn idx(n: i64, m: i64) -> ModeIndex {
        ModeIndex::new(n, m).unwrap()
    }

    #[test]
    fn ft_at_origin() {
        // Z̃_0^0(0) = 2π · 1/2 = π
        let v = zernike_ft(idx(0, 0), 0.0, 0.3).unwrap();
        assert_abs_diff_eq!(v.re, std::f64::consts::PI, epsilon = 1e-14);
        assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-14);
        // higher orders vanish at the origin
        let v = zernike_ft(idx(2, 0), 0.0, 0.0).unwrap();
        assert_abs_diff_eq!(v.norm(), 0.0, epsilon = 1e-300);
    }

    #[test]
    fn ft_matches_direct_formula() {
        // (1,1) at q = 0.3: 2π i √2 J_2(0.6π)/(0.6π)
        let q = 0.3;
        let j2 = crate::special::bessel_j(2, TWO_PI * q).unwrap();
        let expect = Complex::new(0.0, 1.0) * TWO_PI * 2.0f64.sqrt() * (j2 / (TWO_PI * q));
        let got = zernike_ft(idx(1, 1), q, 0.0).unwrap();
        assert_abs_diff_eq!(got.re, expect.re, epsilon = 1e-14);
        assert_abs_diff_eq!(got.im, expect.im, epsilon = 1e-14);
    }

    #[test]
    fn fraunhofer_grid_matches_points() {
        let mut exp = ZernikeExpansion::new(3);
        exp.set(idx(1, 1), Complex::new(0.7, -0.1)).unwrap();
        exp.set(idx(3, -3), Complex::new(0.2, 0.4)).unwrap();
        let spec = GridSpec::square(9, 2.0);
        let grid = fraunhofer_field(&exp, spec).unwrap();
        for iy in 0..9 {
            for ix in 0..9 {
                let (x, y) = spec.pixel_center(ix, iy);
                let expect = fraunhofer_point(&exp, x.hypot(y), y.atan2(x)).unwrap();
                let got = grid.get(ix, iy);
                assert_abs_diff_eq!(got.re, expect.re, epsilon = 1e-12);
                assert_abs_diff_eq!(got.im, expect.im, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn fraunhofer_empty_expansion_is_zero() {
        let exp = ZernikeExpansion::new(2);
        let grid = fraunhofer_field(&exp, GridSpec::square(5, 1.0)).unwrap();
        assert!(grid.samples.iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn fraunhofer_rotation_covariance() {
        let exp = ZernikeExpansion::single_mode(idx(1, 1));
        let alpha = 0.61;
        let rotated = exp.rotate(alpha);
        for k in 0..40 {
            let q = 0.05 + 0.07 * k as f64;
            let phi = 2.0 * std::f64::consts::PI * (k as f64 * 0.37).fract();
            let lhs = fraunhofer_point(&rotated, q, phi).unwrap();
            let rhs = fraunhofer_point(&exp, q, phi + alpha).unwrap();
            assert_abs_diff_eq!(lhs.re, rhs.re, epsilon = 1e-10);
            assert_abs_diff_eq!(lhs.im, rhs.im, epsilon = 1e-10);
        }
    }

    #[test]
    fn params_validation() {
        assert!(FresnelParams::new(0.0, 1.0).is_err());
        assert!(FresnelParams::new(-1.0, 1.0).is_err());
        assert!(FresnelParams::new(1.0, 0.0).is_err());
    }

    #[test]
    fn fraunhofer_limit_of_fresnel_series() {
        // k/(4z) = 1e-8: V_n^m → √(n+1) i^{−n} J_{n+1}(2πq)/(2πq); the
        // deviation is linear in k/(4z) so this sits at ~1e-8 relative.
        let params = FresnelParams::new(2.5e7, 1.0).unwrap();
        for (n, m) in [(0i64, 0i64), (1, 1), (2, 0), (3, -1), (4, 2)] {
            for &q in &[0.13, 0.52, 1.4] {
                let v = fresnel_v(idx(n, m), q, params, TruncationRule::default()).unwrap();
                let limit = i_pow(-n)
                    * (((n + 1) as f64).sqrt()
                        * bessel_j_over_x((n + 1) as u32, TWO_PI * q).unwrap());
                assert!(
                    (v - limit).norm() <= 1e-6 * limit.norm().max(1e-6),
                    "far-field limit violated for ({n},{m}) at q={q}: {v} vs {limit}"
                );
            }
        }
    }

    #[test]
    fn margin_doubling_is_inert() {
        let params = FresnelParams::new(0.05, 1.0).unwrap(); // κ/2 = 5
        let rule = TruncationRule::default();
        let wide = TruncationRule {
            margin: 2 * AUTO_MARGIN,
            ..rule
        };
        for (n, m) in [(0i64, 0i64), (2, 2), (3, 1)] {
            for &q in &[0.0, 0.4, 1.1, 2.3] {
                let a = fresnel_v(idx(n, m), q, params, rule).unwrap();
                let b = fresnel_v(idx(n, m), q, params, wide).unwrap();
                assert!((a - b).norm() < 1e-10, "margin sensitivity at ({n},{m}), q={q}");
            }
        }
    }

    #[test]
    fn explicit_truncation_too_tight_errors() {
        let params = FresnelParams::new(0.01, 1.0).unwrap(); // κ/2 = 25
        let rule = TruncationRule {
            h_max: Limit::Fixed(2),
            l_max: Limit::Fixed(1),
            margin: 0,
        };
        let err = fresnel_v(idx(0, 0), 2.0, params, rule).unwrap_err();
        assert!(matches!(err, Error::Convergence(_)));
    }

    #[test]
    fn fresnel_field_linearity() {
        let params = FresnelParams::new(0.5, 1.0).unwrap();
        let spec = GridSpec::square(7, 1.5);
        let rule = TruncationRule::default();
        let e1 = ZernikeExpansion::single_mode(idx(1, 1));
        let e2 = ZernikeExpansion::single_mode(idx(2, 0));
        let alpha = Complex::new(0.3, -0.8);
        let beta = Complex::new(-1.1, 0.25);
        let combo = e1.scaled(alpha).add(&e2.scaled(beta));
        let f_combo = fresnel_field(&combo, params, rule, spec).unwrap();
        let f1 = fresnel_field(&e1, params, rule, spec).unwrap();
        let f2 = fresnel_field(&e2, params, rule, spec).unwrap();
        for k in 0..f_combo.samples.len() {
            let expect = alpha * f1.samples[k] + beta * f2.samples[k];
            assert!((f_combo.samples[k] - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn fresnel_field_m0_rotational_symmetry() {
        let params = FresnelParams::new(0.2, 1.0).unwrap();
        let exp = ZernikeExpansion::single_mode(idx(0, 0));
        let spec = GridSpec::square(16, 1.5);
        let grid = fresnel_field(&exp, params, TruncationRule::default(), spec).unwrap();
        // pixels related by the dihedral grid symmetries share q exactly, so
        // an m = 0 field must give them identical magnitudes
        let w = spec.width;
        for iy in 0..w {
            for ix in 0..w {
                let v = grid.get(ix, iy).norm();
                for (jx, jy) in [
                    (w - 1 - ix, iy),
                    (ix, w - 1 - iy),
                    (iy, ix),
                    (w - 1 - iy, w - 1 - ix),
                ] {
                    let u = grid.get(jx, jy).norm();
                    assert_abs_diff_eq!(v, u, epsilon = 1e-10 * v.max(1.0));
                }
            }
        }
    }

    #[test]
    fn energy_proxy_stable_under_refinement() {
        let params = FresnelParams::new(0.8, 1.0).unwrap();
        let exp = ZernikeExpansion::single_mode(idx(0, 0));
        let coarse = fresnel_field(
            &exp,
            params,
            TruncationRule::default(),
            GridSpec::square(48, 1.8),
        )
        .unwrap()
        .energy_proxy();
        let fine = fresnel_field(
            &exp,
            params,
            TruncationRule::default(),
            GridSpec::square(96, 1.8),
        )
        .unwrap()
        .energy_proxy();
        assert!(
            (coarse - fine).abs() <= 0.01 * fine.abs(),
            "energy proxy moved by more than 1%: {coarse} vs {fine}"
        );
    }
}
