//! Lattices, tori, cells, strain matrices and the discrete lattice
//! symmetries used by the kernels and the lattice sums.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Mat3, Vec3};
use crate::scalar::Scalar;

/// Symmetric trace-free 3×3 matrix prescribing the linear strain `x ↦ Ax`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrainMatrix<T>(Mat3<T>);

impl<T: Scalar> StrainMatrix<T> {
    /// Validates symmetry and zero trace up to a few ulps of the entry scale.
    pub fn new(m: Mat3<T>) -> Result<Self> {
        let scale = m.max_abs().max(T::one());
        let tol = T::lit(16.0) * T::eps() * scale;
        for i in 0..3 {
            for j in 0..i {
                if (m.0[i][j] - m.0[j][i]).abs() > tol {
                    return Err(Error::InvalidArgument("strain matrix is not symmetric".into()));
                }
            }
        }
        if m.trace().abs() > tol {
            return Err(Error::InvalidArgument("strain matrix is not trace-free".into()));
        }
        Ok(StrainMatrix(m))
    }

    /// `A = (0 1 0; 1 0 0; 0 0 0)`.
    pub fn canonical() -> Self {
        StrainMatrix(Mat3::from_f64([[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]]))
    }

    pub fn matrix(&self) -> &Mat3<T> {
        &self.0
    }

    pub fn apply(&self, x: &Vec3<T>) -> Vec3<T> {
        self.0.mul_vec(x)
    }

    /// `A : x⊗x`.
    pub fn contract(&self, x: &Vec3<T>) -> T {
        self.0.quad(x)
    }

    pub fn negated(&self) -> Self {
        StrainMatrix(-self.0)
    }

    pub fn scaled(&self, s: T) -> Self {
        StrainMatrix(self.0.scale(s))
    }

    pub fn add(&self, other: &Self) -> Self {
        StrainMatrix(self.0 + other.0)
    }
}

pub fn canonical_strain<T: Scalar>() -> StrainMatrix<T> {
    StrainMatrix::canonical()
}

/// Orthorhombic periodic box `∏ ℝ/(2Lᵢ)ℤ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusGeometry<T> {
    half_periods: [T; 3],
}

impl<T: Scalar> TorusGeometry<T> {
    pub fn new(half_periods: [T; 3]) -> Result<Self> {
        if half_periods.iter().any(|l| !(*l > T::zero()) || !l.is_finite()) {
            return Err(Error::InvalidArgument("torus half-periods must be positive".into()));
        }
        Ok(TorusGeometry { half_periods })
    }

    /// The unit torus `(ℝ/ℤ)³`.
    pub fn unit() -> Self {
        TorusGeometry { half_periods: [T::lit(0.5); 3] }
    }

    /// `𝕋_L = (ℝ/2Lℤ)³`.
    pub fn cubic(l: T) -> Result<Self> {
        Self::new([l; 3])
    }

    /// `𝕋̄_L = (ℝ/4Lℤ) × (ℝ/2Lℤ)²`.
    pub fn anisotropic(l: T) -> Result<Self> {
        Self::new([l + l, l, l])
    }

    pub fn half_periods(&self) -> [T; 3] {
        self.half_periods
    }

    pub fn side_lengths(&self) -> [T; 3] {
        self.half_periods.map(|l| l + l)
    }

    pub fn volume(&self) -> T {
        let [a, b, c] = self.side_lengths();
        a * b * c
    }

    /// The period lattice of the torus.
    pub fn lattice(&self) -> LatticeSpec<T> {
        LatticeSpec { generators: self.side_lengths() }
    }

    pub fn is_cubic(&self) -> bool {
        let [a, b, c] = self.half_periods;
        a == b && b == c
    }
}

/// Minimal-image representative of `x − y`, each component in `[−Lᵢ, Lᵢ)`.
pub fn torus_displacement<T: Scalar>(x: &Vec3<T>, y: &Vec3<T>, torus: &TorusGeometry<T>) -> Vec3<T> {
    let mut d = *x - *y;
    for (i, l) in torus.half_periods.iter().enumerate() {
        let side = *l + *l;
        d.0[i] = d.0[i] - side * ((d.0[i] + *l) / side).floor();
        // Guard against rounding pushing the value onto the open end.
        if d.0[i] >= *l {
            d.0[i] = d.0[i] - side;
        }
    }
    d
}

/// Axis-aligned orthorhombic lattice `g₁ℤ × g₂ℤ × g₃ℤ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec<T> {
    generators: [T; 3],
}

impl<T: Scalar> LatticeSpec<T> {
    pub fn new(generators: [T; 3]) -> Result<Self> {
        if generators.iter().any(|g| !(*g > T::zero()) || !g.is_finite()) {
            return Err(Error::InvalidArgument("lattice generators must be positive".into()));
        }
        Ok(LatticeSpec { generators })
    }

    /// `Λ_L`: generators `(4L, 2L, 2L)`.
    pub fn anisotropic(l: T) -> Result<Self> {
        let two_l = l + l;
        Self::new([two_l + two_l, two_l, two_l])
    }

    /// The rescaled lattice `Λ = 2ℤ × ℤ × ℤ` (the case `L = 1/2`).
    pub fn rescaled() -> Self {
        LatticeSpec { generators: [T::lit(2.0), T::one(), T::one()] }
    }

    pub fn cubic(spacing: T) -> Result<Self> {
        Self::new([spacing; 3])
    }

    pub fn generators(&self) -> [T; 3] {
        self.generators
    }

    pub fn point(&self, index: [i64; 3]) -> Vec3<T> {
        Vec3([
            T::from_int(index[0]) * self.generators[0],
            T::from_int(index[1]) * self.generators[1],
            T::from_int(index[2]) * self.generators[2],
        ])
    }

    pub fn cell_volume(&self) -> T {
        self.generators[0] * self.generators[1] * self.generators[2]
    }

    pub fn is_cubic(&self) -> bool {
        let [a, b, c] = self.generators;
        a == b && b == c
    }

    /// Largest `n ≥ 0` with `n·gᵢ ≤ radius` for each axis.
    fn index_bounds(&self, radius: T) -> [i64; 3] {
        self.generators.map(|g| {
            let mut n = (radius / g).floor().to_i64().unwrap_or(0).max(0);
            while T::from_int(n + 1) * g <= radius {
                n += 1;
            }
            while n > 0 && T::from_int(n) * g > radius {
                n -= 1;
            }
            n
        })
    }

    /// Max-norm `|y|∞` of the lattice point with the given index.
    pub fn max_norm(&self, index: [i64; 3]) -> T {
        self.point(index).max_abs()
    }
}

/// Integer indices of the nonzero lattice points with `|y|∞ ≤ radius`, in
/// lexicographic order.
pub fn lattice_indices_in_cube<T: Scalar>(lattice: &LatticeSpec<T>, radius: T) -> Vec<[i64; 3]> {
    let [n1, n2, n3] = lattice.index_bounds(radius);
    let cap = ((2 * n1 + 1) * (2 * n2 + 1) * (2 * n3 + 1)) as usize;
    let mut out = Vec::with_capacity(cap.saturating_sub(1));
    for a in -n1..=n1 {
        for b in -n2..=n2 {
            for c in -n3..=n3 {
                if a != 0 || b != 0 || c != 0 {
                    out.push([a, b, c]);
                }
            }
        }
    }
    out
}

/// Nonzero lattice points with `|y|∞ ≤ radius`, lexicographic order.
pub fn lattice_points_in_cube<T: Scalar>(lattice: &LatticeSpec<T>, radius: T) -> Vec<Vec3<T>> {
    lattice_indices_in_cube(lattice, radius)
        .into_iter()
        .map(|i| lattice.point(i))
        .collect()
}

/// The same index set as [`lattice_indices_in_cube`], reordered into shells
/// of increasing `|y|∞` and lexicographic within a shell.
pub fn shell_ordered_indices<T: Scalar>(lattice: &LatticeSpec<T>, radius: T) -> Vec<[i64; 3]> {
    let mut idx = lattice_indices_in_cube(lattice, radius);
    // Stable sort keeps the lexicographic order inside each shell.
    idx.sort_by(|a, b| {
        lattice
            .max_norm(*a)
            .partial_cmp(&lattice.max_norm(*b))
            .expect("finite lattice norms")
    });
    idx
}

/// Fundamental cell `Q_y = y + ∏[−gᵢ/2, gᵢ/2]` of a lattice point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cell<T> {
    pub center: Vec3<T>,
    pub half_extents: [T; 3],
}

impl<T: Scalar> Cell<T> {
    pub fn of(lattice: &LatticeSpec<T>, index: [i64; 3]) -> Self {
        Cell {
            center: lattice.point(index),
            half_extents: lattice.generators.map(|g| g * T::lit(0.5)),
        }
    }

    pub fn volume(&self) -> T {
        let [a, b, c] = self.half_extents;
        T::lit(8.0) * a * b * c
    }

    pub fn contains(&self, z: &Vec3<T>) -> bool {
        (0..3).all(|i| (z.0[i] - self.center.0[i]).abs() <= self.half_extents[i])
    }
}

/// Signed permutation matrix used as a discrete symmetry.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SymmetryRotation {
    matrix: [[i8; 3]; 3],
}

impl SymmetryRotation {
    /// Rejects anything that is not a signed permutation.
    pub fn new(matrix: [[i8; 3]; 3]) -> Result<Self> {
        for row in &matrix {
            let nonzero = row.iter().filter(|v| **v != 0).count();
            if nonzero != 1 || row.iter().any(|v| v.abs() > 1) {
                return Err(Error::InvalidArgument("not a signed permutation matrix".into()));
            }
        }
        for j in 0..3 {
            if (0..3).filter(|i| matrix[*i][j] != 0).count() != 1 {
                return Err(Error::InvalidArgument("not a signed permutation matrix".into()));
            }
        }
        Ok(SymmetryRotation { matrix })
    }

    pub fn identity() -> Self {
        SymmetryRotation { matrix: [[1, 0, 0], [0, 1, 0], [0, 0, 1]] }
    }

    /// `diag(1, −1, −1)`.
    pub fn s1() -> Self {
        SymmetryRotation { matrix: [[1, 0, 0], [0, -1, 0], [0, 0, -1]] }
    }

    /// `diag(−1, 1, −1)`.
    pub fn s2() -> Self {
        SymmetryRotation { matrix: [[-1, 0, 0], [0, 1, 0], [0, 0, -1]] }
    }

    /// Quarter turn about `e₃`.
    pub fn s3() -> Self {
        SymmetryRotation { matrix: [[0, -1, 0], [1, 0, 0], [0, 0, 1]] }
    }

    pub fn shipped() -> [Self; 3] {
        [Self::s1(), Self::s2(), Self::s3()]
    }

    pub fn entries(&self) -> [[i8; 3]; 3] {
        self.matrix
    }

    pub fn to_mat<T: Scalar>(&self) -> Mat3<T> {
        let mut m = Mat3::zero();
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = T::from_int(self.matrix[i][j] as i64);
            }
        }
        m
    }

    pub fn transpose(&self) -> Self {
        let mut t = [[0i8; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                t[i][j] = self.matrix[j][i];
            }
        }
        SymmetryRotation { matrix: t }
    }

    pub fn compose(&self, other: &Self) -> Self {
        let mut m = [[0i8; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = (0..3).map(|k| self.matrix[i][k] * other.matrix[k][j]).sum();
            }
        }
        SymmetryRotation { matrix: m }
    }

    pub fn determinant(&self) -> i8 {
        let m = &self.matrix;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Exact integer action on a lattice index.
    pub fn apply_index(&self, index: [i64; 3]) -> [i64; 3] {
        let mut out = [0i64; 3];
        for (i, o) in out.iter_mut().enumerate() {
            *o = (0..3).map(|j| self.matrix[i][j] as i64 * index[j]).sum();
        }
        out
    }

    /// True if the matrix maps the lattice onto itself, i.e. it only permutes
    /// axes of equal period.
    pub fn preserves<T: Scalar>(&self, lattice: &LatticeSpec<T>) -> bool {
        let g = lattice.generators();
        (0..3).all(|i| (0..3).all(|j| self.matrix[i][j] == 0 || g[i] == g[j]))
    }

    /// All 24 proper signed permutations.
    pub fn all_proper() -> Vec<Self> {
        const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let mut out = Vec::with_capacity(24);
        for p in PERMS {
            for signs in 0..8u8 {
                let mut m = [[0i8; 3]; 3];
                for i in 0..3 {
                    m[i][p[i]] = if signs >> i & 1 == 1 { -1 } else { 1 };
                }
                let s = SymmetryRotation { matrix: m };
                if s.determinant() == 1 {
                    out.push(s);
                }
            }
        }
        out
    }

    /// Proper signed permutations that preserve the lattice.
    pub fn lattice_group<T: Scalar>(lattice: &LatticeSpec<T>) -> Vec<Self> {
        Self::all_proper().into_iter().filter(|s| s.preserves(lattice)).collect()
    }
}

/// `SᵀAS`.
pub fn apply_symmetry<T: Scalar>(s: &SymmetryRotation, a: &StrainMatrix<T>) -> StrainMatrix<T> {
    let m = s.to_mat::<T>();
    StrainMatrix(m.transpose().mul_mat(a.matrix()).mul_mat(&m))
}

/// The skew matrix `M` with `Mv = e₃ ∧ v`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpinGenerator<T>(Mat3<T>);

impl<T: Scalar> SpinGenerator<T> {
    pub fn e3() -> Self {
        SpinGenerator(Mat3::skew(&Vec3::unit(2)))
    }

    pub fn matrix(&self) -> &Mat3<T> {
        &self.0
    }

    /// `exp(θM)`, the rotation by `θ` about `e₃`.
    pub fn exp(&self, theta: T) -> Mat3<T> {
        let (s, c) = theta.sin_cos();
        let m = &self.0;
        Mat3::identity() + m.scale(s) + m.mul_mat(m).scale(T::one() - c)
    }
}
