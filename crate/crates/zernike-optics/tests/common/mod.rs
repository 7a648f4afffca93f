//! Shared test oracles, independent of the implementation paths they check.

#![allow(dead_code)]

use num_complex::Complex64;
use zernike_optics::quadrature::DiscQuadrature;
use zernike_optics::zernike::{zernike, ZernikeExpansion};
use zernike_optics::{Complex, ModeIndex};

/// Exact-rational radial polynomial via the textbook factorial sum; the
/// coefficients are exact integers for n ≤ 20, so this is a true independent
/// oracle for small orders (the production path uses a Jacobi recurrence).
pub fn radial_factorial_sum(n: u32, m_abs: u32, rho: f64) -> f64 {
    assert!(n <= 20, "factorial sum oracle only safe for small n");
    let half_diff = ((n - m_abs) / 2) as i64;
    let half_sum = ((n + m_abs) / 2) as i64;
    let mut acc = 0.0;
    for k in 0..=half_diff {
        let num = factorial_i128(n as i64 - k);
        let den = factorial_i128(k) * factorial_i128(half_sum - k) * factorial_i128(half_diff - k);
        let coeff = (num / den) as f64 * if k % 2 == 0 { 1.0 } else { -1.0 };
        acc += coeff * rho.powi((n as i64 - 2 * k) as i32);
    }
    acc
}

fn factorial_i128(k: i64) -> i128 {
    (1..=k as i128).product::<i128>().max(1)
}

/// Projection of the pointwise product `Z_a · Z_b` onto `Z_{n3}^{m3}` by disc
/// quadrature (capacity covers the full product degree).
pub fn product_projection(a: ModeIndex, b: ModeIndex, n3: i64) -> f64 {
    let m3 = (a.m() + b.m()) as i64;
    let target = ModeIndex::new(n3, m3).expect("projection target must be a valid mode");
    let quad = DiscQuadrature::with_capacity((a.n() + b.n()) as usize);
    let integral = quad.integrate(|rho, theta| {
        zernike(a, rho, theta).unwrap()
            * zernike(b, rho, theta).unwrap()
            * zernike(target, rho, theta).unwrap().conj()
    });
    integral.re / std::f64::consts::PI
}

/// 2-D disc quadrature of the defining transform integral
/// `∬ Z_n^m(ρ,θ) e^{2πi q ρ cos(θ−φ)} ρ dρ dθ`.
pub fn zernike_ft_quadrature(idx: ModeIndex, q: f64, phi: f64, capacity: usize) -> Complex {
    let quad = DiscQuadrature::with_capacity(capacity);
    quad.integrate(|rho, theta| {
        zernike(idx, rho, theta).unwrap()
            * Complex64::from_polar(
                1.0,
                2.0 * std::f64::consts::PI * rho * q * (theta - phi).cos(),
            )
    })
}

/// Adaptive Gauss–Kronrod (G7/K15) integration of a complex integrand on
/// `[a, b]` to absolute tolerance `tol`.
pub fn gauss_kronrod<F>(f: &F, a: f64, b: f64, tol: f64) -> Complex
where
    F: Fn(f64) -> Complex,
{
    // 15-point Kronrod nodes/weights on [-1, 1] and the embedded 7-point
    // Gauss weights (Abscissae from Piessens & de Doncker, QUADPACK).
    const XK: [f64; 15] = [
        -0.991455371120813,
        -0.949107912342759,
        -0.864864423359769,
        -0.741531185599394,
        -0.586087235467691,
        -0.405845151377397,
        -0.207784955007898,
        0.0,
        0.207784955007898,
        0.405845151377397,
        0.586087235467691,
        0.741531185599394,
        0.864864423359769,
        0.949107912342759,
        0.991455371120813,
    ];
    const WK: [f64; 15] = [
        0.022935322010529,
        0.063092092629979,
        0.104790010322250,
        0.140653259715525,
        0.169004726639267,
        0.190350578064785,
        0.204432940075298,
        0.209482141084728,
        0.204432940075298,
        0.190350578064785,
        0.169004726639267,
        0.140653259715525,
        0.104790010322250,
        0.063092092629979,
        0.022935322010529,
    ];
    const WG: [f64; 7] = [
        0.129484966168870,
        0.279705391489277,
        0.381830050505119,
        0.417959183673469,
        0.381830050505119,
        0.279705391489277,
        0.129484966168870,
    ];

    fn panel<F: Fn(f64) -> Complex>(f: &F, a: f64, b: f64) -> (Complex, f64) {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let mut kronrod = Complex64::new(0.0, 0.0);
        let mut gauss = Complex64::new(0.0, 0.0);
        for (i, (&x, &wk)) in XK.iter().zip(WK.iter()).enumerate() {
            let v = f(c + h * x);
            kronrod += v * wk;
            if i % 2 == 1 {
                gauss += v * WG[i / 2];
            }
        }
        kronrod *= h;
        gauss *= h;
        (kronrod, (kronrod - gauss).norm())
    }

    // splitting-based refinement with a worst-first queue
    let mut segments = vec![(a, b)];
    let mut results: Vec<(Complex, f64)> = vec![panel(f, a, b)];
    for _ in 0..2000 {
        let err: f64 = results.iter().map(|(_, e)| e).sum();
        if err < tol {
            break;
        }
        let (worst, _) = results
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .1.partial_cmp(&y.1 .1).unwrap())
            .unwrap();
        let (sa, sb) = segments[worst];
        let mid = 0.5 * (sa + sb);
        segments[worst] = (sa, mid);
        results[worst] = panel(f, sa, mid);
        segments.push((mid, sb));
        results.push(panel(f, mid, sb));
    }
    results.iter().map(|(v, _)| v).sum()
}

/// Direct quadrature of the defining Fresnel radial integral
/// `V = i^m √(n+1) ∫₀¹ ρ R_n^{|m|}(ρ) J_m(−2πqρ) e^{iκρ²} dρ`
/// (`κ = k/(2z)`), evaluated adaptively to 1e-10.
pub fn fresnel_v_quadrature(idx: ModeIndex, q: f64, kappa: f64) -> Complex {
    use zernike_optics::special::bessel_j;
    use zernike_optics::zernike::radial;
    let m = idx.m();
    let m_abs = idx.m_abs();
    let integrand = |rho: f64| -> Complex {
        let r = radial(idx.n(), m_abs, rho).unwrap();
        // J_m(−y) = (−1)^m J_{|m|}(y) for m ≥ 0 and +J_{|m|}(y) for m < 0
        let y = 2.0 * std::f64::consts::PI * q * rho;
        let sign = if m >= 0 && m_abs % 2 == 1 { -1.0 } else { 1.0 };
        let jm = bessel_j(m_abs, y).unwrap() * sign;
        Complex64::from_polar(1.0, kappa * rho * rho) * (rho * r * jm)
    };
    let i_m = match (m as i64).rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    };
    i_m * ((idx.n() as f64 + 1.0).sqrt()) * gauss_kronrod(&integrand, 0.0, 1.0, 1e-10)
}

/// Brute-force thin-crystal two-photon coefficients by disc quadrature of
/// `(1/π) ∬ V(ρ) Z_{n1}^{m1*} Z_{n2}^{m2*} ρ dρ dθ`, normalized inside the
/// cutoff. Returns the dense matrix in single-index order.
pub fn spdc_zeta_quadrature(pump: &ZernikeExpansion, n_max: u32) -> Vec<Complex> {
    let modes = ModeIndex::enumerate_up_to(n_max);
    let dim = modes.len();
    let capacity = (2 * n_max + pump.n_max()) as usize;
    let quad = DiscQuadrature::with_capacity(capacity);

    // tabulate pump and mode values over the nodes once
    let thetas: Vec<f64> = (0..quad.n_theta())
        .map(|j| 2.0 * std::f64::consts::PI * j as f64 / quad.n_theta() as f64)
        .collect();
    let mut zeta = vec![Complex64::new(0.0, 0.0); dim * dim];
    let wt = quad.theta_weight();
    for (&rho, &wr) in quad.radial_nodes().iter().zip(quad.radial_weights()) {
        for &theta in &thetas {
            let v = pump.reconstruct(rho, theta).unwrap();
            let mode_vals: Vec<Complex> = modes
                .iter()
                .map(|idx| zernike(*idx, rho, theta).unwrap())
                .collect();
            let w = wr * wt * std::f64::consts::FRAC_1_PI;
            for (j1, z1) in mode_vals.iter().enumerate() {
                let partial = v * z1.conj() * w;
                for (j2, z2) in mode_vals.iter().enumerate() {
                    zeta[j1 * dim + j2] += partial * z2.conj();
                }
            }
        }
    }
    let norm: f64 = zeta.iter().map(|c| c.norm_sqr()).sum();
    let scale = norm.sqrt().recip();
    for z in zeta.iter_mut() {
        *z *= scale;
    }
    zeta
}

/// Singular values of a dense complex matrix by one-sided Jacobi (column
/// orthogonalization), descending. Independent of the Hermitian
/// eigendecomposition used by the library.
pub fn singular_values_one_sided_jacobi(matrix: &[Complex], dim: usize) -> Vec<f64> {
    assert_eq!(matrix.len(), dim * dim);
    let mut cols: Vec<Vec<Complex>> = (0..dim)
        .map(|c| (0..dim).map(|r| matrix[r * dim + c]).collect())
        .collect();
    for _sweep in 0..120 {
        let mut rotated = false;
        for p in 0..dim {
            for q in (p + 1)..dim {
                let app: f64 = cols[p].iter().map(|z| z.norm_sqr()).sum();
                let aqq: f64 = cols[q].iter().map(|z| z.norm_sqr()).sum();
                let apq: Complex = cols[p]
                    .iter()
                    .zip(&cols[q])
                    .map(|(zp, zq)| zp.conj() * zq)
                    .sum();
                if apq.norm() <= 1e-30 || apq.norm() <= 1e-16 * (app * aqq).sqrt() {
                    continue;
                }
                rotated = true;
                // Hermitian 2x2 [[app, apq], [apq*, aqq]]: rotate to kill apq
                let phase = apq / apq.norm();
                let tau = (aqq - app) / (2.0 * apq.norm());
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (head, tail) = cols.split_at_mut(q);
                for (vp, vq) in head[p].iter_mut().zip(tail[0].iter_mut()) {
                    let (op, oq) = (*vp, *vq);
                    *vp = op * c - oq * phase.conj() * s;
                    *vq = op * phase * s + oq * c;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sigmas: Vec<f64> = cols
        .iter()
        .map(|col| col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .collect();
    sigmas.sort_by(|a, b| b.partial_cmp(a).unwrap());
    sigmas
}

/// Deterministic disc sample points (golden-angle spiral), identical across
/// runs without any RNG dependency.
pub fn disc_samples(count: usize) -> Vec<(f64, f64)> {
    const GOLDEN: f64 = 0.618_033_988_749_895;
    (0..count)
        .map(|k| {
            let rho = (((k as f64 + 0.5) / count as f64).sqrt()).min(1.0);
            let theta = 2.0 * std::f64::consts::PI * ((k as f64 * GOLDEN).fract());
            (rho, theta)
        })
        .collect()
}
