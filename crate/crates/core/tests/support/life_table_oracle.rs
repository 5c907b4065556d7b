//! Direct, table-free evaluation of an abridged life table, written
//! independently of the library for equivalence testing.

pub struct OracleTable {
    pub ax: Vec<f64>,
    pub qx: Vec<f64>,
    pub lx: Vec<f64>,
    pub dx: Vec<f64>,
    pub big_l: Vec<f64>,
    pub tx: Vec<f64>,
    pub ex: Vec<f64>,
}

/// `starts[i]` and `widths[i]` describe group `i`; the last width is `None`.
pub fn oracle_table(starts: &[u32], widths: &[Option<u32>], m: &[f64], male: bool) -> OracleTable {
    let k = m.len();
    let mut ax = vec![0.0; k];
    for i in 0..k {
        ax[i] = match widths[i] {
            None => 1.0 / m[i],
            Some(n) => {
                let a = if starts[i] == 0 || starts[i] == 1 {
                    let m0 = m[0];
                    let high = m0 >= 0.107;
                    let (a0, a1) = match (male, high) {
                        (true, true) => (0.33, 1.352),
                        (false, true) => (0.35, 1.361),
                        (true, false) => (0.045 + 2.684 * m0, 1.651 - 2.816 * m0),
                        (false, false) => (0.053 + 2.800 * m0, 1.522 - 1.518 * m0),
                    };
                    if starts[i] == 0 { a0 } else { a1 }
                } else if starts[i] < 15 {
                    2.5
                } else {
                    2.5 - 25.0 / 12.0 * (m[i] - 0.1 * (m[i + 1] / m[i - 1]).ln())
                };
                a.max(0.0).min(n as f64)
            }
        };
    }
    let mut qx = vec![1.0; k];
    let mut lx = vec![1.0; k];
    let mut dx = vec![0.0; k];
    let mut big_l = vec![0.0; k];
    for i in 0..k {
        if i > 0 {
            lx[i] = lx[i - 1] * (1.0 - qx[i - 1]);
        }
        if let Some(n) = widths[i] {
            let n = n as f64;
            qx[i] = (n * m[i] / (1.0 + (n - ax[i]) * m[i])).min(1.0 - 1e-12);
        }
    }
    for i in 0..k {
        match widths[i] {
            Some(n) => {
                let next = lx[i] * (1.0 - qx[i]);
                dx[i] = lx[i] - next;
                big_l[i] = ax[i] * lx[i] + (n as f64 - ax[i]) * next;
            }
            None => {
                dx[i] = lx[i];
                big_l[i] = lx[i] / m[i];
            }
        }
    }
    let mut tx = vec![0.0; k];
    for i in 0..k {
        tx[i] = big_l[i..].iter().rev().sum();
    }
    let ex = (0..k).map(|i| if lx[i] > 0.0 { tx[i] / lx[i] } else { 0.0 }).collect();
    OracleTable { ax, qx, lx, dx, big_l, tx, ex }
}
