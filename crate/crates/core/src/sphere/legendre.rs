//! Associated Legendre functions in the polar angle, without the
//! Condon-Shortley phase.

/// `P_l^m(cos theta)`, `d/dtheta P_l^m(cos theta)` and, for `m >= 1`,
/// `P_l^m(cos theta) / sin theta` (zero for `m = 0`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LegendreValue {
    pub p: f64,
    pub dp_dtheta: f64,
    pub p_over_sin: f64,
}

fn double_factorial_odd(m: u32) -> f64 {
    (1..=m).map(|k| (2 * k - 1) as f64).product()
}

/// Upward recurrence in `l` of `P_l^m(x) * sin^(-shift) theta` seeded with
/// `P_m^m = (2m-1)!! sin^m`. Returns values for `l = m ..= lmax`.
fn column(lmax: u32, m: u32, x: f64, seed: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity((lmax - m + 1) as usize);
    out.push(seed);
    if lmax > m {
        out.push(x * (2 * m + 1) as f64 * seed);
    }
    for l in (m + 2)..=lmax {
        let k = (l - m) as usize;
        let v = (x * (2 * l - 1) as f64 * out[k - 1] - (l + m - 1) as f64 * out[k - 2]) / (l - m) as f64;
        out.push(v);
    }
    out
}

pub fn legendre(l: u32, m: u32, theta: f64) -> LegendreValue {
    assert!(m <= l, "|m| must not exceed l");
    let (s, x) = theta.sin_cos();
    let s = s.abs();
    if m == 0 {
        let p = *column(l, 0, x, 1.0).last().expect("non-empty");
        // dP_l/dtheta = -P_l^1
        let dp = if l == 0 { 0.0 } else { -*column(l, 1, x, s).last().expect("non-empty") };
        return LegendreValue { p, dp_dtheta: dp, p_over_sin: 0.0 };
    }
    let df = double_factorial_odd(m);
    let p = *column(l, m, x, df * s.powi(m as i32)).last().expect("non-empty");
    let q = column(l, m, x, df * s.powi(m as i32 - 1));
    let ql = q[(l - m) as usize];
    let qprev = if l > m { q[(l - m - 1) as usize] } else { 0.0 };
    let dp = l as f64 * x * ql - (l + m) as f64 * qprev;
    LegendreValue { p, dp_dtheta: dp, p_over_sin: ql }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_orders_closed_form() {
        for &t in &[0.1, 0.7, 1.3, 2.2, 3.0] {
            let (s, x) = f64::sin_cos(t);
            let v = legendre(1, 0, t);
            assert!((v.p - x).abs() < 1e-15 && (v.dp_dtheta + s).abs() < 1e-15);
            let v = legendre(1, 1, t);
            assert!((v.p - s).abs() < 1e-15 && (v.dp_dtheta - x).abs() < 1e-15 && (v.p_over_sin - 1.0).abs() < 1e-15);
            let v = legendre(2, 1, t);
            assert!((v.p - 3.0 * x * s).abs() < 1e-14);
            assert!((v.dp_dtheta - 3.0 * (x * x - s * s)).abs() < 1e-14);
            let v = legendre(2, 2, t);
            assert!((v.p - 3.0 * s * s).abs() < 1e-14 && (v.p_over_sin - 3.0 * s).abs() < 1e-14);
            let v = legendre(2, 0, t);
            assert!((v.p - 0.5 * (3.0 * x * x - 1.0)).abs() < 1e-15);
        }
    }

    #[test]
    fn derivative_by_finite_difference() {
        let h = 1e-6;
        for l in 0..7 {
            for m in 0..=l {
                for &t in &[0.3, 1.1, 2.5] {
                    let fd = (legendre(l, m, t + h).p - legendre(l, m, t - h).p) / (2.0 * h);
                    let v = legendre(l, m, t);
                    assert!((fd - v.dp_dtheta).abs() < 1e-6 * (1.0 + fd.abs()), "l={l} m={m}");
                }
            }
        }
    }

    #[test]
    fn finite_at_poles() {
        let v = legendre(3, 1, 0.0);
        assert!(v.p_over_sin.is_finite() && v.dp_dtheta.is_finite());
        assert_eq!(legendre(3, 2, 0.0).p_over_sin, 0.0);
    }
}
