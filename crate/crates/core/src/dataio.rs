//! LIBSVM-format parsing/serialization and seeded synthetic instance
//! generation.
//!
//! The random stream is pinned for reproducibility: a 64-bit seed expands
//! through splitmix64 into xoshiro256++ state; uniforms fill the 53-bit
//! mantissa, gaussians come from Box-Muller (two uniform draws per sample,
//! cosine branch). Identical seeds give identical streams on any platform.

use crate::linalg::DenseMatrix;
use crate::problems::LeastSquares;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("line {line}, col {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("{0}")]
    Format(String),
}

// ---------------------------------------------------------------------------
// Seeded RNG: splitmix64 seeding + xoshiro256++ stream
// ---------------------------------------------------------------------------

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// xoshiro256++ stream seeded through splitmix64.
#[derive(Debug, Clone)]
pub struct Rng {
    s: [u64; 4],
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        let mut sm = seed;
        let s = [
            splitmix64(&mut sm),
            splitmix64(&mut sm),
            splitmix64(&mut sm),
            splitmix64(&mut sm),
        ];
        Rng { s }
    }

    pub fn next_u64(&mut self) -> u64 {
        let result = self.s[0]
            .wrapping_add(self.s[3])
            .rotate_left(23)
            .wrapping_add(self.s[0]);
        let t = self.s[1] << 17;
        self.s[2] ^= self.s[0];
        self.s[3] ^= self.s[1];
        self.s[1] ^= self.s[2];
        self.s[0] ^= self.s[3];
        self.s[2] ^= t;
        self.s[3] = self.s[3].rotate_left(45);
        result
    }

    /// U[0,1) with 53-bit mantissa fill.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal via Box-Muller. Each call consumes exactly two
    /// uniform draws and returns the cosine branch, keeping the draw order
    /// a simple function of the call count.
    pub fn gaussian(&mut self) -> f64 {
        let u1 = 1.0 - self.uniform(); // (0, 1]
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}

// ---------------------------------------------------------------------------
// LIBSVM sparse datasets
// ---------------------------------------------------------------------------

/// Sparse dataset in LIBSVM layout: per row a label and strictly increasing
/// (index >= 1, value) pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseDataset {
    pub rows: Vec<Vec<(usize, f64)>>,
    pub labels: Vec<f64>,
    pub num_features: usize,
}

impl SparseDataset {
    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }
}

/// Parse LIBSVM text: one row per non-empty non-comment line, `#` starts a
/// comment, zero-valued features are preserved as written.
pub fn parse_libsvm(text: &str) -> Result<SparseDataset, DataError> {
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    let mut num_features = 0usize;
    for (lineno, raw_line) in text.lines().enumerate() {
        let line_base = raw_line.as_ptr() as usize;
        let line = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        };
        if line.trim().is_empty() {
            continue;
        }
        let col_of = |tok: &str| tok.as_ptr() as usize - line_base + 1;
        let mut toks = line.split_whitespace();
        let label_tok = toks.next().unwrap();
        let label: f64 = label_tok.parse().map_err(|_| DataError::Parse {
            line: lineno + 1,
            col: col_of(label_tok),
            msg: format!("unparseable label `{label_tok}`"),
        })?;
        let mut row: Vec<(usize, f64)> = Vec::new();
        let mut prev_index = 0usize;
        for tok in toks {
            let col = col_of(tok);
            let (idx_s, val_s) = tok.split_once(':').ok_or_else(|| DataError::Parse {
                line: lineno + 1,
                col,
                msg: format!("malformed index:value pair `{tok}`"),
            })?;
            let idx: usize = idx_s.parse().map_err(|_| DataError::Parse {
                line: lineno + 1,
                col,
                msg: format!("unparseable feature index `{idx_s}`"),
            })?;
            if idx == 0 {
                return Err(DataError::Parse {
                    line: lineno + 1,
                    col,
                    msg: "feature indices start at 1".into(),
                });
            }
            if idx <= prev_index {
                return Err(DataError::Parse {
                    line: lineno + 1,
                    col,
                    msg: format!("non-increasing feature index at line {}", lineno + 1),
                });
            }
            let val: f64 = val_s.parse().map_err(|_| DataError::Parse {
                line: lineno + 1,
                col: col + idx_s.len() + 1,
                msg: format!("unparseable feature value `{val_s}`"),
            })?;
            prev_index = idx;
            num_features = num_features.max(idx);
            row.push((idx, val));
        }
        labels.push(label);
        rows.push(row);
    }
    Ok(SparseDataset { rows, labels, num_features })
}

pub fn serialize_libsvm(d: &SparseDataset) -> String {
    let mut out = String::new();
    for (row, label) in d.rows.iter().zip(&d.labels) {
        write!(out, "{label}").unwrap();
        for (idx, val) in row {
            write!(out, " {idx}:{val}").unwrap();
        }
        out.push('\n');
    }
    out
}

// ---------------------------------------------------------------------------
// Synthetic least squares instances
// ---------------------------------------------------------------------------

/// Build the synthetic least squares instance: A = C diag(u) C^T + sigma*I
/// with C = I + 0.01*G, G standard normal, u and b uniform on [0,1].
///
/// Draw order is fixed: G row-major, then u, then b.
pub fn gen_least_squares(n: usize, sigma: f64, seed: u64) -> LeastSquares {
    assert!(n >= 1);
    assert!(sigma >= 0.0);
    let mut rng = Rng::new(seed);
    let mut c = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            c[(i, j)] = 0.01 * rng.gaussian() + if i == j { 1.0 } else { 0.0 };
        }
    }
    let u: Vec<f64> = (0..n).map(|_| rng.uniform()).collect();
    let b: Vec<f64> = (0..n).map(|_| rng.uniform()).collect();
    // A = C diag(u) C^T + sigma I, symmetrized against rounding
    let mut cd = c.clone();
    for i in 0..n {
        for j in 0..n {
            cd[(i, j)] *= u[j];
        }
    }
    let mut a = cd.matmul(&c.transpose());
    for i in 0..n {
        a[(i, i)] += sigma;
        for j in 0..i {
            let s = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = s;
            a[(j, i)] = s;
        }
    }
    LeastSquares::new(a, b)
}

/// Unit-norm standard normal initial point.
pub fn init_point(n: usize, seed: u64) -> Vec<f64> {
    assert!(n >= 1);
    let mut rng = Rng::new(seed);
    let mut x: Vec<f64> = (0..n).map(|_| rng.gaussian()).collect();
    let norm = crate::linalg::norm2(&x);
    if norm > 0.0 {
        for v in x.iter_mut() {
            *v /= norm;
        }
    } else {
        x[0] = 1.0;
    }
    x
}

// ---------------------------------------------------------------------------
// Instance text format: header `n sigma seed`, dense A rows, then b
// ---------------------------------------------------------------------------

pub fn serialize_instance(inst: &LeastSquares, sigma: f64, seed: u64) -> String {
    let n = inst.dim();
    let mut out = String::new();
    writeln!(out, "{n} {sigma} {seed}").unwrap();
    for i in 0..n {
        let row: Vec<String> = (0..n).map(|j| format!("{}", inst.a()[(i, j)])).collect();
        writeln!(out, "{}", row.join(" ")).unwrap();
    }
    let b: Vec<String> = inst.b().iter().map(|v| format!("{v}")).collect();
    writeln!(out, "{}", b.join(" ")).unwrap();
    out
}

pub fn parse_instance(text: &str) -> Result<LeastSquares, DataError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| DataError::Format("empty instance file".into()))?;
    let head: Vec<&str> = header.split_whitespace().collect();
    if head.len() != 3 {
        return Err(DataError::Format("header must be `n sigma seed`".into()));
    }
    let n: usize = head[0]
        .parse()
        .map_err(|_| DataError::Format(format!("bad dimension `{}`", head[0])))?;
    let mut a = DenseMatrix::zeros(n, n);
    for i in 0..n {
        let (lineno, line) = lines
            .next()
            .ok_or_else(|| DataError::Format(format!("missing matrix row {}", i + 1)))?;
        let vals: Vec<&str> = line.split_whitespace().collect();
        if vals.len() != n {
            return Err(DataError::Format(format!(
                "line {}: expected {} values, found {}",
                lineno + 1,
                n,
                vals.len()
            )));
        }
        for (j, v) in vals.iter().enumerate() {
            a[(i, j)] = v
                .parse()
                .map_err(|_| DataError::Format(format!("line {}: bad number `{v}`", lineno + 1)))?;
        }
    }
    let (lineno, line) = lines
        .next()
        .ok_or_else(|| DataError::Format("missing rhs line".into()))?;
    let vals: Vec<&str> = line.split_whitespace().collect();
    if vals.len() != n {
        return Err(DataError::Format(format!(
            "line {}: rhs needs {} values, found {}",
            lineno + 1,
            n,
            vals.len()
        )));
    }
    let mut b = vec![0.0; n];
    for (j, v) in vals.iter().enumerate() {
        b[j] = v
            .parse()
            .map_err(|_| DataError::Format(format!("line {}: bad number `{v}`", lineno + 1)))?;
    }
    Ok(LeastSquares::new(a, b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::Objective;

    #[test]
    fn rng_is_seed_deterministic() {
        let mut a = Rng::new(42);
        let mut b = Rng::new(42);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
        let mut c = Rng::new(43);
        assert_ne!(Rng::new(42).next_u64(), c.next_u64());
    }

    #[test]
    fn uniform_in_unit_interval() {
        let mut rng = Rng::new(7);
        for _ in 0..1000 {
            let u = rng.uniform();
            assert!((0.0..1.0).contains(&u));
        }
    }

    #[test]
    fn parse_basic_line() {
        let d = parse_libsvm("+1 1:0.5 3:-2\n").unwrap();
        assert_eq!(d.labels, vec![1.0]);
        assert_eq!(d.rows[0], vec![(1, 0.5), (3, -2.0)]);
        assert_eq!(d.num_features, 3);
    }

    #[test]
    fn parse_empty_row() {
        let d = parse_libsvm("-1\n").unwrap();
        assert_eq!(d.labels, vec![-1.0]);
        assert!(d.rows[0].is_empty());
    }

    #[test]
    fn parse_rejects_non_increasing_index() {
        let err = parse_libsvm("1 2:1 2:3\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("non-increasing feature index at line 1"), "{msg}");
    }

    #[test]
    fn parse_errors_carry_position() {
        let err = parse_libsvm("+1 1:0.5\n-1 2:abc\n").unwrap_err();
        match err {
            DataError::Parse { line, col, .. } => {
                assert_eq!(line, 2);
                assert!(col > 1);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn parse_skips_comments_and_blanks() {
        let d = parse_libsvm("# header\n\n+1 1:2 # trailing\n").unwrap();
        assert_eq!(d.num_rows(), 1);
        assert_eq!(d.rows[0], vec![(1, 2.0)]);
    }

    #[test]
    fn round_trip_preserves_zero_values() {
        let d = parse_libsvm("3 1:0 2:1e-30\n").unwrap();
        let back = parse_libsvm(&serialize_libsvm(&d)).unwrap();
        assert_eq!(d, back);
    }

    #[test]
    fn gen_is_deterministic_and_spd() {
        let a1 = gen_least_squares(8, 1e-2, 5);
        let a2 = gen_least_squares(8, 1e-2, 5);
        assert_eq!(a1.a().data, a2.a().data);
        assert_eq!(a1.b(), a2.b());
        // symmetric
        let at = a1.a().transpose();
        assert!(a1.a().max_abs_diff(&at) < 1e-14);
        // positive definite for sigma > 0
        assert!(a1.a().cholesky().is_some());
    }

    #[test]
    fn gen_scalar_matches_documented_draw_order() {
        let seed = 11;
        let mut rng = Rng::new(seed);
        let g = rng.gaussian();
        let u = rng.uniform();
        let b = rng.uniform();
        let sigma = 1.0;
        let inst = gen_least_squares(1, sigma, seed);
        let expect = (1.0 + 0.01 * g) * u * (1.0 + 0.01 * g) + sigma;
        assert!((inst.a()[(0, 0)] - expect).abs() < 1e-15);
        assert!((inst.b()[0] - b).abs() < 1e-15);
    }

    #[test]
    fn init_point_unit_norm() {
        for seed in 0..10u64 {
            let x = init_point(6, seed);
            assert!((crate::linalg::norm2(&x) - 1.0).abs() < 1e-12);
        }
        let x1 = init_point(1, 3);
        assert!(x1[0] == 1.0 || x1[0] == -1.0);
        assert_eq!(init_point(6, 9), init_point(6, 9));
    }

    #[test]
    fn instance_text_round_trip() {
        let inst = gen_least_squares(5, 1e-3, 17);
        let text = serialize_instance(&inst, 1e-3, 17);
        let back = parse_instance(&text).unwrap();
        assert_eq!(inst.a().data, back.a().data);
        assert_eq!(inst.b(), back.b());
    }

    #[test]
    fn conditioning_improves_with_sigma() {
        let mut prev: Option<f64> = None;
        for sigma in [1e-4, 1e-3, 1e-2, 1e-1] {
            let inst = gen_least_squares(30, sigma, 123);
            let hess = inst.a(); // the quadratic form matrix itself
            let eig = crate::linalg::sym_eigen(hess);
            let kappa = eig.values[eig.values.len() - 1] / eig.values[0];
            assert!(eig.values[0] > -1e-10);
            if let Some(p) = prev {
                assert!(kappa < p, "kappa should shrink as sigma grows");
            }
            prev = Some(kappa);
        }
    }
}
