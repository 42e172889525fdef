// Copyright 2026 The hijack-impact Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Dense symmetric solves for the regression estimators.

use crate::error::{Error, Result};

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct SymMatrix {
    pub n: usize,
    pub data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        SymMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] += v;
    }
}

/// Solves `a x = b` by Cholesky factorization. A pivot below `1e-10`
/// times the largest diagonal entry counts as rank deficiency.
pub(crate) fn cholesky_solve(mut a: SymMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.n;
    assert_eq!(b.len(), n);
    let scale = (0..n).map(|i| a.at(i, i)).fold(0.0, f64::max);
    let tol = 1e-10 * scale.max(f64::MIN_POSITIVE);
    for j in 0..n {
        let mut d = a.at(j, j);
        for k in 0..j {
            d -= a.at(j, k) * a.at(j, k);
        }
        if !(d > tol) {
            return Err(Error::Singular(format!("matrix is not positive definite at column {j}")));
        }
        let d = d.sqrt();
        a.data[j * n + j] = d;
        for i in j + 1..n {
            let mut s = a.at(i, j);
            for k in 0..j {
                s -= a.at(i, k) * a.at(j, k);
            }
            a.data[i * n + j] = s / d;
        }
    }
    // forward then backward substitution on the lower factor
    let mut y = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            y[i] -= a.at(i, k) * y[k];
        }
        y[i] /= a.at(i, i);
    }
    for i in (0..n).rev() {
        for k in i + 1..n {
            y[i] -= a.at(k, i) * y[k];
        }
        y[i] /= a.at(i, i);
    }
    Ok(y)
}
