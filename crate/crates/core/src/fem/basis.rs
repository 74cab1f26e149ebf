//! Biquadratic Lagrange (Q2) shape functions on [-1,1]² and Gauss rules.

/// 3-point Gauss rule on [-1,1]; exact through degree 5.
pub const GAUSS3: [(f64, f64); 3] = [
    (-0.774_596_669_241_483_4, 5.0 / 9.0),
    (0.0, 8.0 / 9.0),
    (0.774_596_669_241_483_4, 5.0 / 9.0),
];

/// 4-point Gauss rule on [-1,1]; exact through degree 7. Used for error norms.
pub const GAUSS4: [(f64, f64); 4] = [
    (-0.861_136_311_594_052_6, 0.347_854_845_137_453_85),
    (-0.339_981_043_584_856_26, 0.652_145_154_862_546_2),
    (0.339_981_043_584_856_26, 0.652_145_154_862_546_2),
    (0.861_136_311_594_052_6, 0.347_854_845_137_453_85),
];

/// 1D quadratic Lagrange basis on nodes {-1, 0, 1}.
#[inline]
pub fn shape1(a: usize, x: f64) -> f64 {
    match a {
        0 => 0.5 * x * (x - 1.0),
        1 => 1.0 - x * x,
        2 => 0.5 * x * (x + 1.0),
        _ => unreachable!("1D node index out of range"),
    }
}

#[inline]
pub fn dshape1(a: usize, x: f64) -> f64 {
    match a {
        0 => x - 0.5,
        1 => -2.0 * x,
        2 => x + 0.5,
        _ => unreachable!("1D node index out of range"),
    }
}

/// The nine Q2 shape functions at (xi, eta); local node b*3 + a maps to the
/// tensor position (a, b).
#[inline]
pub fn shape_q2(xi: f64, eta: f64) -> [f64; 9] {
    let mut out = [0.0; 9];
    for b in 0..3 {
        for a in 0..3 {
            out[b * 3 + a] = shape1(a, xi) * shape1(b, eta);
        }
    }
    out
}

/// Reference-coordinate gradients (d/dxi, d/deta) of the Q2 basis.
#[inline]
pub fn grad_q2(xi: f64, eta: f64) -> [(f64, f64); 9] {
    let mut out = [(0.0, 0.0); 9];
    for b in 0..3 {
        for a in 0..3 {
            out[b * 3 + a] = (
                dshape1(a, xi) * shape1(b, eta),
                shape1(a, xi) * dshape1(b, eta),
            );
        }
    }
    out
}
