//! Minimal fixed-size and dense row-major linear algebra.
//!
//! The solver stack works on flat slices; the 3-D flight math uses [`Vec3`]
//! and [`Mat3`]. Deliberately tiny so the crate stays `no_std`-friendly.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, AddAssign, Index, Mul, Neg, Sub, SubAssign};

use crate::math::sqrt;

/// A 3-vector of `f64`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 { x: 0.0, y: 0.0, z: 0.0 };

    #[inline]
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    #[inline]
    pub fn dot(self, rhs: Vec3) -> f64 {
        self.x * rhs.x + self.y * rhs.y + self.z * rhs.z
    }

    #[inline]
    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        sqrt(self.norm_squared())
    }

    /// Unit vector in the same direction, or `None` below `eps`.
    pub fn normalized(self, eps: f64) -> Option<Vec3> {
        let n = self.norm();
        if n <= eps {
            None
        } else {
            Some(self * (1.0 / n))
        }
    }

    #[inline]
    pub fn as_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    #[inline]
    pub fn from_slice(s: &[f64]) -> Vec3 {
        Vec3::new(s[0], s[1], s[2])
    }
}

impl Index<usize> for Vec3 {
    type Output = f64;
    #[inline]
    fn index(&self, i: usize) -> &f64 {
        match i {
            0 => &self.x,
            1 => &self.y,
            2 => &self.z,
            _ => panic!("Vec3 index out of range: {i}"),
        }
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    #[inline]
    fn add(self, rhs: Vec3) -> Vec3 {
        Vec3::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    #[inline]
    fn sub(self, rhs: Vec3) -> Vec3 {
        Vec3::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    #[inline]
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    #[inline]
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl AddAssign for Vec3 {
    #[inline]
    fn add_assign(&mut self, rhs: Vec3) {
        *self = *self + rhs;
    }
}

impl SubAssign for Vec3 {
    #[inline]
    fn sub_assign(&mut self, rhs: Vec3) {
        *self = *self - rhs;
    }
}

/// A 3x3 matrix stored as rows.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Mat3 {
    rows: [[f64; 3]; 3],
}

impl Mat3 {
    #[inline]
    pub const fn from_rows(rows: [[f64; 3]; 3]) -> Self {
        Mat3 { rows }
    }

    pub fn from_columns(c0: Vec3, c1: Vec3, c2: Vec3) -> Self {
        Mat3 {
            rows: [[c0.x, c1.x, c2.x], [c0.y, c1.y, c2.y], [c0.z, c1.z, c2.z]],
        }
    }

    #[inline]
    pub fn row(&self, i: usize) -> Vec3 {
        Vec3::new(self.rows[i][0], self.rows[i][1], self.rows[i][2])
    }

    #[inline]
    pub fn col(&self, j: usize) -> Vec3 {
        Vec3::new(self.rows[0][j], self.rows[1][j], self.rows[2][j])
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rows[i][j]
    }

    /// `M v`
    #[inline]
    pub fn mul_vec(&self, v: Vec3) -> Vec3 {
        Vec3::new(self.row(0).dot(v), self.row(1).dot(v), self.row(2).dot(v))
    }

    /// `Mᵀ v`
    #[inline]
    pub fn tr_mul_vec(&self, v: Vec3) -> Vec3 {
        Vec3::new(self.col(0).dot(v), self.col(1).dot(v), self.col(2).dot(v))
    }

    /// `M N`
    pub fn mul_mat(&self, n: &Mat3) -> Mat3 {
        let mut out = [[0.0; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = self.row(i).dot(n.col(j));
            }
        }
        Mat3 { rows: out }
    }

    pub fn transpose(&self) -> Mat3 {
        Mat3::from_rows([
            [self.rows[0][0], self.rows[1][0], self.rows[2][0]],
            [self.rows[0][1], self.rows[1][1], self.rows[2][1]],
            [self.rows[0][2], self.rows[1][2], self.rows[2][2]],
        ])
    }
}

/// Dense row-major matrix with a dynamic number of rows.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RowMat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl RowMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RowMat { rows, cols, data: vec![0.0; rows * cols] }
    }

    /// Empty matrix that rows of width `cols` can be pushed onto.
    pub fn with_cols(cols: usize) -> Self {
        RowMat { rows: 0, cols, data: Vec::new() }
    }

    pub fn push_row(&mut self, row: &[f64]) {
        assert_eq!(row.len(), self.cols, "row width mismatch");
        self.data.extend_from_slice(row);
        self.rows += 1;
    }

    #[inline]
    pub fn nrows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn ncols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, &v| m.max(crate::math::abs(v)))
    }

    /// `Mᵀ q` for a row-major matrix.
    pub fn tr_mul(&self, q: &[f64]) -> Vec<f64> {
        assert_eq!(q.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (i, &qi) in q.iter().enumerate() {
            if qi == 0.0 {
                continue;
            }
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o += qi * a;
            }
        }
        out
    }

    /// `M x` for a row-major matrix.
    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }
}

/// Dense dot product.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Euclidean norm of a slice.
pub fn norm2(a: &[f64]) -> f64 {
    sqrt(dot(a, a))
}

/// Largest absolute entry of a slice (0 for empty).
pub fn inf_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, &v| m.max(crate::math::abs(v)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mat3_roundtrip() {
        let m = Mat3::from_rows([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0], [7.0, 8.0, 9.0]]);
        assert_eq!(m.col(1), Vec3::new(2.0, 5.0, 8.0));
        assert_eq!(m.transpose().row(1), m.col(1));
        let v = Vec3::new(1.0, 0.0, -1.0);
        assert_eq!(m.mul_vec(v), Vec3::new(-2.0, -2.0, -2.0));
        assert_eq!(m.tr_mul_vec(v), m.transpose().mul_vec(v));
    }

    #[test]
    fn rowmat_products() {
        let mut m = RowMat::with_cols(2);
        m.push_row(&[1.0, 2.0]);
        m.push_row(&[3.0, -1.0]);
        assert_eq!(m.mul(&[1.0, 1.0]), vec![3.0, 2.0]);
        assert_eq!(m.tr_mul(&[1.0, 1.0]), vec![4.0, 1.0]);
        assert_eq!(m.max_abs(), 3.0);
    }
}
