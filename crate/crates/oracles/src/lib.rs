//! Reference computations written independently of the main crate: they use
//! their own lattice enumeration, plain `HashMap` fields and textbook formulas,
//! so agreement with the optimized code is meaningful.

use std::collections::HashMap;

use num_complex::Complex64;

pub type Mode = Vec<i64>;
pub type SparseField = HashMap<Mode, Complex64>;

/// All `j ∈ ℤ^d` with `1 ≤ |j|² ≤ n²`, in no particular order.
pub fn lattice_ball(d: usize, n: i64) -> Vec<Mode> {
    let mut out = Vec::new();
    let mut stack: Vec<Mode> = vec![Vec::new()];
    while let Some(prefix) = stack.pop() {
        if prefix.len() == d {
            let n2: i64 = prefix.iter().map(|x| x * x).sum();
            if n2 >= 1 && n2 <= n * n {
                out.push(prefix);
            }
            continue;
        }
        for x in -n..=n {
            let mut p = prefix.clone();
            p.push(x);
            stack.push(p);
        }
    }
    out
}

fn norm2(j: &[i64]) -> i64 {
    j.iter().map(|x| x * x).sum()
}

fn neg(j: &[i64]) -> Mode {
    j.iter().map(|x| -x).collect()
}

fn get(f: &SparseField, j: &[i64]) -> Complex64 {
    f.get(j).copied().unwrap_or_default()
}

/// `|j|²/(8(|j|−|k|))` straight from the definition, zero on `|j|² = |k|²`.
pub fn a12_direct(j: &[i64], k: &[i64]) -> f64 {
    let (j2, k2) = (norm2(j), norm2(k));
    if j2 == k2 {
        return 0.0;
    }
    j2 as f64 / (8.0 * ((j2 as f64).sqrt() - (k2 as f64).sqrt()))
}

/// `|j|²/(8(|j|+|k|))`.
pub fn c12_direct(j: &[i64], k: &[i64]) -> f64 {
    let (j2, k2) = (norm2(j), norm2(k));
    j2 as f64 / (8.0 * ((j2 as f64).sqrt() + (k2 as f64).sqrt()))
}

/// `Σ_k Σ_j u_j v_{-j} coef(j,k) h_k e_k`, a plain double loop.
pub fn bilinear_bruteforce(
    coef: fn(&[i64], &[i64]) -> f64,
    modes: &[Mode],
    u: &SparseField,
    v: &SparseField,
    h: &SparseField,
) -> SparseField {
    let mut out = SparseField::new();
    for k in modes {
        let mut s = Complex64::new(0.0, 0.0);
        for j in modes {
            s += get(u, j) * get(v, &neg(j)) * coef(j, k);
        }
        out.insert(k.clone(), s * get(h, k));
    }
    out
}

/// `⟨f, g⟩ = Σ_j f_j g_{-j}`.
pub fn pairing(modes: &[Mode], f: &SparseField, g: &SparseField) -> Complex64 {
    modes.iter().map(|j| get(f, j) * get(g, &neg(j))).sum()
}

/// Resonant cubic field, first component: `−(i/4) Σ_{|j|=|k|} w_j w_{-j} |j|² z_k`.
pub fn resonant_cubic_first(modes: &[Mode], w: &SparseField, z: &SparseField) -> SparseField {
    let mut out = SparseField::new();
    for k in modes {
        let mut s = Complex64::new(0.0, 0.0);
        for j in modes.iter().filter(|j| norm2(j) == norm2(k)) {
            s += get(w, j) * get(w, &neg(j)) * norm2(j) as f64;
        }
        out.insert(k.clone(), Complex64::new(0.0, -0.25) * s * get(z, k));
    }
    out
}

/// Jacobi elliptic `cn(u | m)` by the arithmetic–geometric mean and
/// descending Landen transformation.
pub fn jacobi_cn(u: f64, m: f64) -> f64 {
    assert!((0.0..1.0).contains(&m), "parameter must lie in [0, 1)");
    if m == 0.0 {
        return u.cos();
    }
    let mut a = vec![1.0f64];
    let mut c = vec![m.sqrt()];
    let mut b = (1.0 - m).sqrt();
    while c.last().unwrap().abs() > 1e-17 && a.len() < 60 {
        let an = *a.last().unwrap();
        let next_a = 0.5 * (an + b);
        let next_c = 0.5 * (an - b);
        b = (an * b).sqrt();
        a.push(next_a);
        c.push(next_c);
    }
    let n = a.len() - 1;
    let mut phi = 2f64.powi(n as i32) * a[n] * u;
    for i in (1..=n).rev() {
        phi = 0.5 * (phi + (c[i] / a[i] * phi.sin()).asin());
    }
    phi.cos()
}

/// Exact solution of `x'' + ω²x + βx³ = 0` with `x(0) = amp`, `x'(0) = 0`:
/// `x(t) = amp·cn(Ωt | m)`, `Ω² = ω² + β amp²`, `m = β amp² / (2Ω²)`.
pub fn duffing_exact(omega2: f64, beta: f64, amp: f64, t: f64) -> f64 {
    let big = omega2 + beta * amp * amp;
    let m = beta * amp * amp / (2.0 * big);
    amp * jacobi_cn(big.sqrt() * t, m)
}

/// Classical RK4 on `y' = f(y)` with `steps` equal steps.
pub fn rk4<F: Fn(&[f64]) -> Vec<f64>>(f: F, y0: &[f64], t_end: f64, steps: usize) -> Vec<f64> {
    let h = t_end / steps as f64;
    let mut y = y0.to_vec();
    let axpy = |y: &[f64], a: f64, k: &[f64]| -> Vec<f64> { y.iter().zip(k).map(|(p, q)| p + a * q).collect() };
    for _ in 0..steps {
        let k1 = f(&y);
        let k2 = f(&axpy(&y, 0.5 * h, &k1));
        let k3 = f(&axpy(&y, 0.5 * h, &k2));
        let k4 = f(&axpy(&y, h, &k3));
        for i in 0..y.len() {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    y
}

/// One complex mode pair `±j` of the Kirchhoff equation (`u_{-j} = conj(u_j)`):
/// `x'' + |j|²(1 + 2|j|²|x|²)x = 0`. Returns `(x, x')` at `t_end`.
pub fn kirchhoff_single_mode(j2: i64, x0: Complex64, xdot0: Complex64, t_end: f64, steps: usize) -> (Complex64, Complex64) {
    let k = j2 as f64;
    let rhs = move |y: &[f64]| {
        let a = 1.0 + 2.0 * k * (y[0] * y[0] + y[1] * y[1]);
        vec![y[2], y[3], -k * a * y[0], -k * a * y[1]]
    };
    let y = rk4(rhs, &[x0.re, x0.im, xdot0.re, xdot0.im], t_end, steps);
    (Complex64::new(y[0], y[1]), Complex64::new(y[2], y[3]))
}
