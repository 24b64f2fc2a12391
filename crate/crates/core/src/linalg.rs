//! Small fixed-size linear algebra helpers (3-vectors, 3x3 matrices, quaternions).

pub type Vec3 = [f64; 3];
pub type Mat3 = [[f64; 3]; 3];

pub fn dot3(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross3(a: &Vec3, b: &Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn norm3(a: &Vec3) -> f64 {
    dot3(a, a).sqrt()
}

pub fn scale3(a: &Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub fn add3(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn sub3(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn axpy3(y: &mut Vec3, alpha: f64, x: &Vec3) {
    y[0] += alpha * x[0];
    y[1] += alpha * x[1];
    y[2] += alpha * x[2];
}

pub fn normalize3(a: &Vec3) -> Vec3 {
    let n = norm3(a);
    scale3(a, 1.0 / n)
}

pub const MAT3_ID: Mat3 = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

pub fn mat3_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut c = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
        }
    }
    c
}

pub fn mat3_vec(a: &Mat3, v: &Vec3) -> Vec3 {
    [
        a[0][0] * v[0] + a[0][1] * v[1] + a[0][2] * v[2],
        a[1][0] * v[0] + a[1][1] * v[1] + a[1][2] * v[2],
        a[2][0] * v[0] + a[2][1] * v[1] + a[2][2] * v[2],
    ]
}

pub fn mat3_transpose(a: &Mat3) -> Mat3 {
    let mut t = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            t[i][j] = a[j][i];
        }
    }
    t
}

pub fn mat3_add(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut c = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = a[i][j] + b[i][j];
        }
    }
    c
}

pub fn mat3_scale(a: &Mat3, s: f64) -> Mat3 {
    let mut c = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = a[i][j] * s;
        }
    }
    c
}

pub fn mat3_trace(a: &Mat3) -> f64 {
    a[0][0] + a[1][1] + a[2][2]
}

pub fn frobenius_inner(a: &Mat3, b: &Mat3) -> f64 {
    let mut s = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            s += a[i][j] * b[i][j];
        }
    }
    s
}

/// Skew matrix of the axis vector: hat(w) v = w x v.
pub fn hat(w: &Vec3) -> Mat3 {
    [
        [0.0, -w[2], w[1]],
        [w[2], 0.0, -w[0]],
        [-w[1], w[0], 0.0],
    ]
}

/// Axis vector of a skew matrix (inverse of `hat`).
pub fn unhat(m: &Mat3) -> Vec3 {
    [m[2][1], m[0][2], m[1][0]]
}

/// Matrix exponential of a skew-symmetric matrix (Rodrigues).
pub fn expm_skew(omega: &Mat3) -> Mat3 {
    let w = unhat(omega);
    let theta = norm3(&w);
    if theta < 1e-12 {
        // second-order series, accurate to ~1e-24
        let o2 = mat3_mul(omega, omega);
        return mat3_add(&mat3_add(&MAT3_ID, omega), &mat3_scale(&o2, 0.5));
    }
    let a = theta.sin() / theta;
    let b = (1.0 - theta.cos()) / (theta * theta);
    let o2 = mat3_mul(omega, omega);
    mat3_add(&mat3_add(&MAT3_ID, &mat3_scale(omega, a)), &mat3_scale(&o2, b))
}

/// Principal matrix logarithm of a rotation, returned as a skew matrix.
/// Fails by returning None when the rotation angle is within `tol` of pi.
pub fn logm_rotation(r: &Mat3, tol: f64) -> Option<Mat3> {
    let c = ((mat3_trace(r) - 1.0) * 0.5).clamp(-1.0, 1.0);
    let theta = c.acos();
    if theta >= std::f64::consts::PI - tol {
        return None;
    }
    let anti = mat3_scale(&mat3_add(r, &mat3_scale(&mat3_transpose(r), -1.0)), 0.5);
    if theta < 1e-6 {
        // log(R) ~ skew part for small angles
        let corr = 1.0 + theta * theta / 6.0;
        return Some(mat3_scale(&anti, corr));
    }
    Some(mat3_scale(&anti, theta / theta.sin()))
}

/// Rotation matrix from a unit quaternion (w, x, y, z).
pub fn quat_to_matrix(q: &[f64; 4]) -> Mat3 {
    let (w, x, y, z) = (q[0], q[1], q[2], q[3]);
    [
        [
            1.0 - 2.0 * (y * y + z * z),
            2.0 * (x * y - w * z),
            2.0 * (x * z + w * y),
        ],
        [
            2.0 * (x * y + w * z),
            1.0 - 2.0 * (x * x + z * z),
            2.0 * (y * z - w * x),
        ],
        [
            2.0 * (x * z - w * y),
            2.0 * (y * z + w * x),
            1.0 - 2.0 * (x * x + y * y),
        ],
    ]
}

/// Unit quaternion with non-negative scalar part from a rotation matrix.
pub fn matrix_to_quat(r: &Mat3) -> [f64; 4] {
    let t = mat3_trace(r);
    let mut q;
    if t > 0.0 {
        let s = (t + 1.0).sqrt() * 2.0;
        q = [
            0.25 * s,
            (r[2][1] - r[1][2]) / s,
            (r[0][2] - r[2][0]) / s,
            (r[1][0] - r[0][1]) / s,
        ];
    } else if r[0][0] >= r[1][1] && r[0][0] >= r[2][2] {
        let s = (1.0 + r[0][0] - r[1][1] - r[2][2]).sqrt() * 2.0;
        q = [
            (r[2][1] - r[1][2]) / s,
            0.25 * s,
            (r[0][1] + r[1][0]) / s,
            (r[0][2] + r[2][0]) / s,
        ];
    } else if r[1][1] >= r[2][2] {
        let s = (1.0 + r[1][1] - r[0][0] - r[2][2]).sqrt() * 2.0;
        q = [
            (r[0][2] - r[2][0]) / s,
            (r[0][1] + r[1][0]) / s,
            0.25 * s,
            (r[1][2] + r[2][1]) / s,
        ];
    } else {
        let s = (1.0 + r[2][2] - r[0][0] - r[1][1]).sqrt() * 2.0;
        q = [
            (r[1][0] - r[0][1]) / s,
            (r[0][2] + r[2][0]) / s,
            (r[1][2] + r[2][1]) / s,
            0.25 * s,
        ];
    }
    let n = (q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]).sqrt();
    for c in q.iter_mut() {
        *c /= n;
    }
    if q[0] < 0.0 {
        for c in q.iter_mut() {
            *c = -*c;
        }
    }
    q
}

/// Rotation by `angle` about the z-axis.
pub fn rot_z(angle: f64) -> Mat3 {
    let (s, c) = angle.sin_cos();
    [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]
}

/// Rotation by `angle` about the y-axis.
pub fn rot_y(angle: f64) -> Mat3 {
    let (s, c) = angle.sin_cos();
    [[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]]
}

/// Gram-Schmidt orthonormalization of the columns closest to a rotation,
/// with the determinant sign fixed to +1.
pub fn reorthonormalize(r: &Mat3) -> Mat3 {
    let rt = mat3_transpose(r);
    let mut c0 = rt[0];
    let mut c1 = rt[1];
    c0 = normalize3(&c0);
    let p = dot3(&c1, &c0);
    axpy3(&mut c1, -p, &c0);
    c1 = normalize3(&c1);
    let c2 = cross3(&c0, &c1);
    mat3_transpose(&[c0, c1, c2])
}
