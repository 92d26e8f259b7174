//! Log-gamma, digamma, trigamma and the inverse digamma function on the
//! positive reals.

use crate::scalar::Scalar;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Recurrence shifts the argument at least this far before the asymptotic series.
const ASYMPTOTIC_FROM: f64 = 10.0;

/// `ln Gamma(x)` for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma<T: Scalar>(x: T) -> T {
    debug_assert!(x > T::zero());
    if x < T::lit(0.5) {
        return ln_gamma(x + T::one()) - x.ln();
    }
    let x = x - T::one();
    let mut a = T::lit(LANCZOS[0]);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        a = a + T::lit(c) / (x + T::lit(i as f64));
    }
    let t = x + T::lit(LANCZOS_G + 0.5);
    T::lit(0.5 * (2.0 * std::f64::consts::PI).ln()) + (x + T::lit(0.5)) * t.ln() - t + a.ln()
}

/// Digamma `psi(x) = d/dx ln Gamma(x)` for `x > 0`.
pub fn digamma<T: Scalar>(x: T) -> T {
    debug_assert!(x > T::zero());
    let mut x = x;
    let mut shift = T::zero();
    while x < T::lit(ASYMPTOTIC_FROM) {
        shift = shift - x.recip();
        x = x + T::one();
    }
    let r = x.recip();
    let r2 = r * r;
    let series = r2
        * (T::lit(1.0 / 12.0)
            - r2 * (T::lit(1.0 / 120.0)
                - r2 * (T::lit(1.0 / 252.0)
                    - r2 * (T::lit(1.0 / 240.0) - r2 * T::lit(1.0 / 132.0)))));
    shift + x.ln() - T::lit(0.5) * r - series
}

/// Trigamma `psi'(x)` for `x > 0`.
pub fn trigamma<T: Scalar>(x: T) -> T {
    debug_assert!(x > T::zero());
    let mut x = x;
    let mut shift = T::zero();
    while x < T::lit(ASYMPTOTIC_FROM) {
        shift = shift + (x * x).recip();
        x = x + T::one();
    }
    let r = x.recip();
    let r2 = r * r;
    let series = r
        + r2 * T::lit(0.5)
        + r * r2
            * (T::lit(1.0 / 6.0)
                - r2 * (T::lit(1.0 / 30.0)
                    - r2 * (T::lit(1.0 / 42.0)
                        - r2 * (T::lit(1.0 / 30.0) - r2 * T::lit(5.0 / 66.0)))));
    shift + series
}

/// Solves `psi(x) = y` for `x > 0` by Newton's method.
pub fn inv_digamma<T: Scalar>(y: T) -> T {
    let euler = T::lit(0.577_215_664_901_532_9);
    let mut x = if y >= T::lit(-2.22) {
        y.exp() + T::lit(0.5)
    } else {
        -(y + euler).recip()
    };
    for _ in 0..64 {
        let step = (digamma(x) - y) / trigamma(x);
        let mut next = x - step;
        if next <= T::zero() {
            next = x / T::lit(2.0);
        }
        let done = (next - x).abs() <= T::lit(4.0) * T::epsilon() * next;
        x = next;
        if done {
            break;
        }
    }
    x
}
