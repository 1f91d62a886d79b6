//! Special functions: integer-order Bessel functions of the first kind and
//! associated Laguerre polynomials.

/// Bessel functions `J_0(x) ..= J_max_order(x)` by Miller's backward
/// recurrence, normalized with `J_0 + 2 Σ J_2k = 1`.
pub fn bessel_j_orders(max_order: u32, x: f64) -> Vec<f64> {
    let len = max_order as usize + 1;
    let mut out = vec![0.0; len];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let ax = x.abs();

    let n = (max_order as usize).max(ax.ceil() as usize) + 1;
    let mut start = n + (160.0 * n as f64).sqrt() as usize + 16;
    if start % 2 == 1 {
        start += 1;
    }

    const BIG: f64 = 1e250;
    const SMALL: f64 = 1e-250;
    let two_over_x = 2.0 / ax;
    let mut j_next = 0.0; // J_{k+1}
    let mut j_cur = 1e-30; // J_k, arbitrary seed
    let mut even_sum = 0.0;
    for k in (1..=start).rev() {
        let j_prev = k as f64 * two_over_x * j_cur - j_next;
        j_next = j_cur;
        j_cur = j_prev;
        // j_cur is now J_{k-1}
        let idx = k - 1;
        if idx < len {
            out[idx] = j_cur;
        }
        if idx % 2 == 0 && idx > 0 {
            even_sum += j_cur;
        }
        if j_cur.abs() > BIG {
            j_cur *= SMALL;
            j_next *= SMALL;
            even_sum *= SMALL;
            for v in out.iter_mut() {
                *v *= SMALL;
            }
        }
    }
    let norm = out[0] + 2.0 * even_sum;
    for v in out.iter_mut() {
        *v /= norm;
    }
    if x < 0.0 {
        for (k, v) in out.iter_mut().enumerate() {
            if k % 2 == 1 {
                *v = -*v;
            }
        }
    }
    out
}

/// `J_n(x)` for any integer order and real argument.
pub fn bessel_j(n: i32, x: f64) -> f64 {
    let order = n.unsigned_abs();
    let v = bessel_j_orders(order, x)[order as usize];
    if n < 0 && order % 2 == 1 {
        -v
    } else {
        v
    }
}

/// Associated Laguerre polynomial `L_p^alpha(x)` via the three-term recurrence.
pub fn assoc_laguerre(p: u32, alpha: f64, x: f64) -> f64 {
    let mut prev = 1.0;
    if p == 0 {
        return prev;
    }
    let mut cur = 1.0 + alpha - x;
    for k in 1..p {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + alpha - x) * cur - (kf + alpha) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// `sqrt(p! / (p + l)!)`, the LG mode normalization factor.
pub fn lg_norm_factor(p: u32, abs_ell: u32) -> f64 {
    let denom: f64 = (p + 1..=p + abs_ell).map(|i| i as f64).product();
    1.0 / denom.sqrt()
}

/// Upper bound `(|x|/2)^m / m!` on `|J_m(x)|` for `m >= 0`.
pub fn bessel_tail_bound(m: u32, x: f64) -> f64 {
    let half = 0.5 * x.abs();
    (1..=m).fold(1.0, |acc, k| acc * half / k as f64)
}
