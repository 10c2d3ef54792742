//! Big-factorial combinatorics in the log domain.
//!
//! Bound envelopes of the form `(λn+k)! / (R^k R'^{λn} (λn+k+1)^μ)` involve
//! factorials of non-integer argument (`λ = M/N` is rational) that overflow
//! doubles almost immediately, so everything here evaluates `x! = Γ(x+1)`
//! through the log-Gamma function.

use statrs::function::gamma::ln_gamma;

/// `log Γ(λn + k + 1)`, the log-factorial of `λn + k` with `x! = Γ(x+1)`.
///
/// Total on `n, k ≥ 0`, `λ ≥ 1`; monotone in both arguments.
pub fn log_factorial_ratio(n: u32, k: u32, lambda: f64) -> f64 {
    debug_assert!(lambda >= 1.0);
    ln_gamma(lambda * n as f64 + k as f64 + 1.0)
}

/// `log Γ(x+1)` for real `x > -1`.
pub fn log_factorial(x: f64) -> f64 {
    ln_gamma(x + 1.0)
}

/// Log of the jet bound envelope `(λn+k)! / (R^k R'^{λn} (λn+k+1)^μ)`.
pub fn log_envelope(n: u32, k: u32, lambda: f64, r: f64, rp: f64, mu: f64) -> f64 {
    let s = lambda * n as f64 + k as f64;
    ln_gamma(s + 1.0) - k as f64 * r.ln() - lambda * n as f64 * rp.ln() - mu * (s + 1.0).ln()
}

/// Same envelope with the factorial shifted by `q`: `(λn+k+q)! / (R^k R'^{λn} (λn+k+1)^μ)`.
pub fn log_envelope_shifted(n: u32, k: u32, q: u32, lambda: f64, r: f64, rp: f64, mu: f64) -> f64 {
    let s = lambda * n as f64 + k as f64;
    ln_gamma(s + q as f64 + 1.0) - k as f64 * r.ln() - lambda * n as f64 * rp.ln() - mu * (s + 1.0).ln()
}

/// Generalized binomial `C(x, y) = x! / (y! (x−y)!)` via log-Gamma, for real
/// `x ≥ y ≥ 0`.
pub fn log_binomial_general(x: f64, y: f64) -> f64 {
    debug_assert!(x >= y && y >= 0.0);
    ln_gamma(x + 1.0) - ln_gamma(y + 1.0) - ln_gamma(x - y + 1.0)
}

/// Exact binomial coefficient as `u128`; caller guarantees no overflow
/// (safe for `n ≤ 120` or so at central `k`).
pub fn binomial_u128(n: u32, k: u32) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// The Leibniz product constant
/// `K_{q,μ} = λ 2^{μ−q+1} (1+q)^{2q} Σ_{j,i ≥ 0} (λi+j+1)^{−(μ−q)}`,
/// summed until the running tail falls below `1e−14` of the partial sum
/// (capped at 10^6 terms). Requires `μ − q > 2` for convergence.
pub fn leibniz_constant(lambda: f64, q: u32, mu: f64) -> f64 {
    let mub = mu - q as f64;
    assert!(mub > 2.0, "K_{{q,mu}} series needs mu - q > 2");
    // The double series converges like a polynomial tail, so direct summation
    // to 1e-14 of the partial sum is out of reach within the term cap; truncate
    // at a fixed width and close each tail with a midpoint-rule integral
    // (Σ_{j≥J} (a+j)^{−m} ≈ (a+J−1/2)^{1−m}/(m−1)), accurate to ~1e-9 relative.
    const WIDTH: usize = 4096;
    let inner = |a: f64| -> f64 {
        let mut s = 0.0f64;
        let mut j = 0usize;
        while j < WIDTH {
            let term = (a + j as f64).powf(-mub);
            s += term;
            j += 1;
            if term < 1e-15 * s && j > 4 {
                break;
            }
        }
        s + (a + j as f64 - 0.5).powf(1.0 - mub) / (mub - 1.0)
    };
    let mut total = 0.0f64;
    for i in 0..WIDTH {
        total += inner(lambda * i as f64 + 1.0);
    }
    // Outer tail: Σ_{i≥I} ≈ ∫_{I−1/2}^∞ (λx+1/2)^{1−m}/(m−1) dx.
    total += (lambda * (WIDTH as f64 - 0.5) + 0.5).powf(2.0 - mub)
        / (lambda * (mub - 1.0) * (mub - 2.0));
    lambda * 2f64.powf(mub + 1.0) * ((1 + q) as f64).powi(2 * q as i32) * total
}
