//! Airy functions `Ai`, `Bi` and their derivatives on the real line.
//!
//! Three evaluation regimes, chosen so every branch follows its numerically
//! stable direction:
//!
//! - `|x| <= 4.5`: Maclaurin series of the defining equation `y'' = x y`,
//!   summed from the exact origin values.
//! - `x >= 12`: the standard large-argument expansions in
//!   `zeta = (2/3) x^{3/2}`.
//! - everything else: Taylor-series marching of the ODE in short steps.
//!   `Bi` (growing) marches forward from the series edge; `Ai` (decaying)
//!   marches *backward* from the asymptotic seed at `x = 12`, because
//!   forward integration of the recessive solution would be swamped by the
//!   dominant one.  On the oscillatory negative axis both directions are
//!   well conditioned and a single downward march serves both functions.

/// Values of the two Airy functions and their derivatives at one point.
#[derive(Debug, Clone, Copy)]
pub struct AiryValues {
    pub ai: f64,
    pub ai_prime: f64,
    pub bi: f64,
    pub bi_prime: f64,
}

const AI0: f64 = 0.35502805388781724;
const AIP0: f64 = -0.2588194037928068;
const BI0: f64 = 0.61492662744600074;
const BIP0: f64 = 0.44828835735382636;

/// Radius of the plain Maclaurin branch.
const SERIES_RADIUS: f64 = 4.5;
/// Start of the asymptotic branch.
const ASYMPTOTIC_EDGE: f64 = 12.0;

/// One Taylor step for `y'' = x y`: given `(y, y')` at `x0`, return `(y, y')`
/// at `x0 + h`.  Coefficients follow `c_{k+2} = (x0 c_k + c_{k-1}) /
/// ((k+1)(k+2))`; the series converges for any `h` (entire solutions), with
/// term count adapted to the requested step.
fn taylor_step(x0: f64, y: f64, yp: f64, h: f64) -> (f64, f64) {
    let mut c_prev = 0.0; // c_{k-1}
    let mut c_cur = y; // c_k
    let mut c_next = yp; // c_{k+1}
    let mut hk = 1.0; // h^k
    let mut sum = 0.0;
    let mut dsum = 0.0;
    let scale = y.abs().max(yp.abs()).max(1e-300);
    for k in 0..200 {
        let kf = k as f64;
        sum += c_cur * hk;
        dsum += c_next * hk * (kf + 1.0);
        let c2 = (x0 * c_cur + c_prev) / ((kf + 1.0) * (kf + 2.0));
        c_prev = c_cur;
        c_cur = c_next;
        c_next = c2;
        hk *= h;
        if k > 12 && (c_cur * hk).abs() < 1e-18 * scale && (c_next * hk * h).abs() < 1e-18 * scale
        {
            break;
        }
    }
    (sum, dsum)
}

/// March `(y, y')` from `from` to `to` in steps short enough that each
/// Taylor step stays fully converged even where the solution oscillates
/// quickly (negative axis) or grows steeply.
fn march(mut x: f64, mut y: f64, mut yp: f64, to: f64) -> (f64, f64) {
    let dir = if to >= x { 1.0 } else { -1.0 };
    while (to - x) * dir > 0.0 {
        let step_cap = 0.4 * 6.0 / (6.0 + x.abs().sqrt());
        let h = dir * step_cap.min((to - x) * dir);
        let (ny, nyp) = taylor_step(x, y, yp, h);
        y = ny;
        yp = nyp;
        x += h;
    }
    (y, yp)
}

/// Maclaurin evaluation valid for `|x| <= SERIES_RADIUS`.
fn by_series(x: f64) -> AiryValues {
    let (ai, ai_prime) = taylor_step(0.0, AI0, AIP0, x);
    let (bi, bi_prime) = taylor_step(0.0, BI0, BIP0, x);
    AiryValues {
        ai,
        ai_prime,
        bi,
        bi_prime,
    }
}

/// Large-argument expansion for `x >= ASYMPTOTIC_EDGE`, truncated at the
/// smallest term (far below 1e-16 relative there).
fn by_asymptotic(x: f64) -> AiryValues {
    let zeta = 2.0 / 3.0 * x.powf(1.5);
    let t = 1.0 / zeta;
    let mut u = 1.0_f64; // u_k
    let mut tk = 1.0_f64; // t^k
    let mut s_ai = 0.0;
    let mut s_aip = 0.0;
    let mut s_bi = 0.0;
    let mut s_bip = 0.0;
    let mut last = f64::INFINITY;
    for k in 0..60 {
        let kf = k as f64;
        let term = u * tk;
        if term.abs() >= last {
            break; // past the optimal truncation point
        }
        last = term.abs();
        let v_term = term * (6.0 * kf + 1.0) / (1.0 - 6.0 * kf);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        s_ai += sign * term;
        s_aip += sign * v_term;
        s_bi += term;
        s_bip += v_term;
        if term.abs() < 1e-18 {
            break;
        }
        u *= (6.0 * kf + 5.0) * (6.0 * kf + 3.0) * (6.0 * kf + 1.0)
            / (216.0 * (kf + 1.0) * (2.0 * kf + 1.0));
        tk *= t;
    }
    let root_pi = std::f64::consts::PI.sqrt();
    let x4 = x.powf(0.25);
    let em = (-zeta).exp();
    let ep = zeta.exp();
    AiryValues {
        ai: em * s_ai / (2.0 * root_pi * x4),
        ai_prime: -em * x4 * s_aip / (2.0 * root_pi),
        bi: ep * s_bi / (root_pi * x4),
        bi_prime: ep * x4 * s_bip / root_pi,
    }
}

/// `Ai(x)`, `Ai'(x)`, `Bi(x)`, `Bi'(x)` for any finite real `x`.
pub fn airy(x: f64) -> AiryValues {
    assert!(x.is_finite(), "airy argument must be finite");
    if x >= ASYMPTOTIC_EDGE {
        by_asymptotic(x)
    } else if x.abs() <= SERIES_RADIUS {
        by_series(x)
    } else if x > 0.0 {
        // 4.5 < x < 12: each function from its stable direction
        let seed_hi = by_asymptotic(ASYMPTOTIC_EDGE);
        let (ai, ai_prime) = march(ASYMPTOTIC_EDGE, seed_hi.ai, seed_hi.ai_prime, x);
        let seed_lo = by_series(SERIES_RADIUS);
        let (bi, bi_prime) = march(SERIES_RADIUS, seed_lo.bi, seed_lo.bi_prime, x);
        AiryValues {
            ai,
            ai_prime,
            bi,
            bi_prime,
        }
    } else {
        let seed = by_series(-SERIES_RADIUS);
        let (ai, ai_prime) = march(-SERIES_RADIUS, seed.ai, seed.ai_prime, x);
        let (bi, bi_prime) = march(-SERIES_RADIUS, seed.bi, seed.bi_prime, x);
        AiryValues {
            ai,
            ai_prime,
            bi,
            bi_prime,
        }
    }
}
