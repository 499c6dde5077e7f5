use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::{dot, Matrix};
use crate::scalar::Scalar;

/// One embedding row per village node.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix<T> {
    h: Matrix<T>,
}

impl<T: Scalar> EmbeddingMatrix<T> {
    pub fn new(h: Matrix<T>) -> Result<Self> {
        if !h.all_finite() {
            return Err(Error::NonFinite("embedding matrix".into()));
        }
        Ok(EmbeddingMatrix { h })
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.h
    }

    pub fn into_matrix(self) -> Matrix<T> {
        self.h
    }

    pub fn n(&self) -> usize {
        self.h.rows()
    }

    pub fn dim(&self) -> usize {
        self.h.cols()
    }

    pub fn row(&self, i: usize) -> &[T] {
        self.h.row(i)
    }

    pub fn cosine(&self, i: usize, j: usize) -> T {
        let (a, b) = (self.h.row(i), self.h.row(j));
        let denom = (dot(a, a) * dot(b, b)).sqrt();
        if denom == T::zero() {
            T::zero()
        } else {
            dot(a, b) / denom
        }
    }

    /// Text form: `n d` header, then one space-separated row per node, 8 significant digits.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.n(), self.dim());
        for row in self.h.rows_iter() {
            let mut first = true;
            for &x in row {
                if !first {
                    out.push(' ');
                }
                first = false;
                let _ = write!(out, "{:.7e}", x.as_f64());
            }
            out.push('\n');
        }
        out
    }

    pub fn parse_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or_else(|| Error::Parse {
            line: 1,
            msg: "missing header".into(),
        })?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Parse {
                line: 1,
                msg: format!("bad header `{header}`"),
            })?;
        let [n, d] = dims[..] else {
            return Err(Error::Parse {
                line: 1,
                msg: format!("expected `n d`, got `{header}`"),
            });
        };
        let mut data = Vec::with_capacity(n * d);
        let mut rows = 0;
        for (idx, line) in lines {
            let before = data.len();
            for tok in line.split_whitespace() {
                let v: f64 = tok.parse().map_err(|_| Error::Parse {
                    line: idx + 1,
                    msg: format!("bad value `{tok}`"),
                })?;
                data.push(T::of(v));
            }
            if data.len() - before != d {
                return Err(Error::Parse {
                    line: idx + 1,
                    msg: format!("expected {d} values"),
                });
            }
            rows += 1;
        }
        if rows != n {
            return Err(Error::Parse {
                line: rows + 1,
                msg: format!("expected {n} rows, found {rows}"),
            });
        }
        EmbeddingMatrix::new(Matrix::from_vec(n, d, data))
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_text(&text)
    }
}
