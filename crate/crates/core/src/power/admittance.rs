use num_complex::Complex64;

use crate::error::{Error, Result};

/// Π-model branch in per-unit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Line {
    pub from: usize,
    pub to: usize,
    /// Series resistance [p.u.].
    pub r: f64,
    /// Series reactance [p.u.].
    pub x: f64,
    /// Total line charging susceptance [p.u.].
    pub b: f64,
    /// Off-nominal turns ratio at the `from` end; 0 means 1.
    pub tap: f64,
    /// Phase shift [rad].
    pub shift: f64,
}

/// Bus shunt admittance in per-unit.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Shunt {
    pub g: f64,
    pub b: f64,
}

/// Sparse bus-admittance matrix `Y = G + iB`, stored row-wise with sorted
/// column indices.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmittanceMatrix {
    rows: Vec<Vec<(usize, Complex64)>>,
}

impl AdmittanceMatrix {
    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, i: usize) -> &[(usize, Complex64)] {
        &self.rows[i]
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        match self.rows[i].binary_search_by_key(&j, |&(c, _)| c) {
            Ok(k) => self.rows[i][k].1,
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }
}

/// Standard Π-model assembly:
/// `Y_ff = (y_s + i b/2)/|t|²`, `Y_tt = y_s + i b/2`,
/// `Y_ft = −y_s/t*`, `Y_tf = −y_s/t`, with `t = tap·e^{i·shift}`, plus
/// bus shunts on the diagonal.
pub fn build_admittance(n_bus: usize, lines: &[Line], shunts: &[Shunt]) -> Result<AdmittanceMatrix> {
    if shunts.len() != n_bus {
        return Err(Error::InvalidNetwork(format!(
            "{} shunts given for {n_bus} buses",
            shunts.len()
        )));
    }
    let mut dense: Vec<std::collections::BTreeMap<usize, Complex64>> = vec![Default::default(); n_bus];
    for (i, s) in shunts.iter().enumerate() {
        dense[i].insert(i, Complex64::new(s.g, s.b));
    }
    for (k, line) in lines.iter().enumerate() {
        if line.from >= n_bus || line.to >= n_bus {
            return Err(Error::InvalidNetwork(format!("line {k} references an unknown bus")));
        }
        let z = Complex64::new(line.r, line.x);
        if z.norm() == 0.0 {
            return Err(Error::InvalidNetwork(format!("line {k} has zero series impedance")));
        }
        let ys = z.inv();
        let ratio = if line.tap == 0.0 { 1.0 } else { line.tap };
        let t = Complex64::from_polar(ratio, line.shift);
        let ytt = ys + Complex64::new(0.0, line.b / 2.0);
        let yff = ytt / (ratio * ratio);
        let yft = -ys / t.conj();
        let ytf = -ys / t;
        let (f, to) = (line.from, line.to);
        *dense[f].entry(f).or_default() += yff;
        *dense[to].entry(to).or_default() += ytt;
        *dense[f].entry(to).or_default() += yft;
        *dense[to].entry(f).or_default() += ytf;
    }
    Ok(AdmittanceMatrix {
        rows: dense.into_iter().map(|m| m.into_iter().collect()).collect(),
    })
}
