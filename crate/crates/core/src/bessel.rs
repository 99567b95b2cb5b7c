//! Integer-order Bessel functions of the first kind.

/// `J_0(x) … J_nmax(x)` by Miller's downward recurrence, normalized with
/// `J_0 + 2 Σ J_2k = 1`.
pub fn bessel_j_all(x: f64, nmax: usize) -> Vec<f64> {
    let mut out = vec![0.0; nmax + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let ax = x.abs();
    let top = nmax.max(ax.ceil() as usize);
    let mut start = top + 20 + (40.0 * top as f64).sqrt() as usize;
    start += start % 2;

    let mut j_next = 0.0;
    let mut j_curr = 1e-300;
    let mut sum = 0.0;
    for k in (1..=start).rev() {
        let j_prev = 2.0 * k as f64 / ax * j_curr - j_next;
        j_next = j_curr;
        j_curr = j_prev;
        // j_curr now holds J_{k-1}
        if k - 1 <= nmax {
            out[k - 1] = j_curr;
        }
        if (k - 1) % 2 == 0 && k > 1 {
            sum += 2.0 * j_curr;
        }
        if j_curr.abs() > 1e250 {
            j_curr *= 1e-250;
            j_next *= 1e-250;
            sum *= 1e-250;
            out.iter_mut().for_each(|v| *v *= 1e-250);
        }
    }
    let norm = sum + j_curr;
    out.iter_mut().for_each(|v| *v /= norm);
    if x < 0.0 {
        out.iter_mut().skip(1).step_by(2).for_each(|v| *v = -*v);
    }
    out
}

/// `J_n(x)` for any integer order.
pub fn bessel_j(n: i32, x: f64) -> f64 {
    let m = n.unsigned_abs() as usize;
    let v = bessel_j_all(x, m)[m];
    if n < 0 && m % 2 == 1 { -v } else { v }
}
