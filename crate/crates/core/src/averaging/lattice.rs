use std::collections::BTreeMap;
use std::fmt::Debug;
use std::io::{BufRead, Write};

use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Boxes with more cells than this are stored sparsely.
pub const DENSE_CELL_CAP: u128 = 10_000_000;

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ComplexNeumaier {
    re: Neumaier,
    im: Neumaier,
}

impl ComplexNeumaier {
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

/// Scalar types a [`LatticeFunction`] can hold.
pub trait LatticeValue: Clone + Debug + PartialEq + Send + Sync + 'static {
    const DTYPE: &'static str;
    const BYTES: usize;
    type Acc: Clone + Send;

    fn zero() -> Self;
    fn is_zero(&self) -> bool;
    fn acc_zero() -> Self::Acc;
    /// Adds `mult` copies of `v`.
    fn accumulate(acc: &mut Self::Acc, v: &Self, mult: u64);
    /// The accumulated sum divided by `count`.
    fn finish(acc: &Self::Acc, count: u64) -> Self;
    fn modulus(&self) -> f64;
    fn to_complex(&self) -> Complex64;
    fn write_le(&self, out: &mut Vec<u8>);
    fn read_le(bytes: &[u8]) -> Result<Self>;
}

impl LatticeValue for f64 {
    const DTYPE: &'static str = "f64";
    const BYTES: usize = 8;
    type Acc = Neumaier;

    fn zero() -> Self {
        0.0
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn acc_zero() -> Neumaier {
        Neumaier::default()
    }
    fn accumulate(acc: &mut Neumaier, v: &f64, mult: u64) {
        acc.add(v * mult as f64);
    }
    fn finish(acc: &Neumaier, count: u64) -> f64 {
        acc.value() / count as f64
    }
    fn modulus(&self) -> f64 {
        self.abs()
    }
    fn to_complex(&self) -> Complex64 {
        Complex64::new(*self, 0.0)
    }
    fn write_le(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_le_bytes());
    }
    fn read_le(bytes: &[u8]) -> Result<Self> {
        Ok(f64::from_le_bytes(bytes.try_into().map_err(|_| Error::Parse("short f64".into()))?))
    }
}

impl LatticeValue for Complex64 {
    const DTYPE: &'static str = "c64";
    const BYTES: usize = 16;
    type Acc = ComplexNeumaier;

    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn acc_zero() -> ComplexNeumaier {
        ComplexNeumaier::default()
    }
    fn accumulate(acc: &mut ComplexNeumaier, v: &Complex64, mult: u64) {
        acc.add(v * mult as f64);
    }
    fn finish(acc: &ComplexNeumaier, count: u64) -> Complex64 {
        acc.value() / count as f64
    }
    fn modulus(&self) -> f64 {
        self.norm()
    }
    fn to_complex(&self) -> Complex64 {
        *self
    }
    fn write_le(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.re.to_le_bytes());
        out.extend_from_slice(&self.im.to_le_bytes());
    }
    fn read_le(bytes: &[u8]) -> Result<Self> {
        let re = f64::read_le(&bytes[..8])?;
        let im = f64::read_le(&bytes[8..16])?;
        Ok(Complex64::new(re, im))
    }
}

impl LatticeValue for Rational64 {
    const DTYPE: &'static str = "q64";
    const BYTES: usize = 16;
    type Acc = Rational64;

    fn zero() -> Self {
        <Rational64 as Zero>::zero()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn acc_zero() -> Rational64 {
        <Rational64 as Zero>::zero()
    }
    fn accumulate(acc: &mut Rational64, v: &Rational64, mult: u64) {
        *acc += v * Rational64::from_integer(mult as i64);
    }
    fn finish(acc: &Rational64, count: u64) -> Rational64 {
        acc / Rational64::from_integer(count as i64)
    }
    fn modulus(&self) -> f64 {
        self.abs().to_f64().unwrap_or(f64::NAN)
    }
    fn to_complex(&self) -> Complex64 {
        Complex64::new(self.to_f64().unwrap_or(f64::NAN), 0.0)
    }
    fn write_le(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.numer().to_le_bytes());
        out.extend_from_slice(&self.denom().to_le_bytes());
    }
    fn read_le(bytes: &[u8]) -> Result<Self> {
        let n = i64::from_le_bytes(bytes[..8].try_into().expect("8 bytes"));
        let d = i64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes"));
        if d == 0 {
            return Err(Error::Parse("zero denominator in lattice file".into()));
        }
        Ok(Rational64::new(n, d))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Storage<T> {
    /// Row-major values over the box, last axis fastest.
    Dense(Vec<T>),
    /// Nonzero values only.
    Sparse(BTreeMap<Vec<i64>, T>),
}

/// A finitely supported function on `Z^d`, stored over an inclusive box `[lo, hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeFunction<T> {
    lo: Vec<i64>,
    hi: Vec<i64>,
    storage: Storage<T>,
}

pub(crate) fn box_cells(lo: &[i64], hi: &[i64]) -> u128 {
    lo.iter()
        .zip(hi)
        .map(|(&l, &h)| (h as i128 - l as i128 + 1) as u128)
        .fold(1u128, |acc, e| acc.saturating_mul(e))
}

fn check_box(lo: &[i64], hi: &[i64]) -> Result<()> {
    if lo.is_empty() || lo.len() != hi.len() {
        return Err(Error::contract("box corners must be nonempty and of equal length"));
    }
    if lo.iter().zip(hi).any(|(l, h)| l > h) {
        return Err(Error::contract(format!("empty box {lo:?}..={hi:?}")));
    }
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    lo: Vec<i64>,
    hi: Vec<i64>,
    dtype: String,
    storage: String,
    entries: usize,
}

impl<T: LatticeValue> LatticeFunction<T> {
    /// Zero function on the box; sparse when the box exceeds [`DENSE_CELL_CAP`].
    pub fn zeros(lo: Vec<i64>, hi: Vec<i64>) -> Result<Self> {
        check_box(&lo, &hi)?;
        let cells = box_cells(&lo, &hi);
        let storage = if cells <= DENSE_CELL_CAP {
            Storage::Dense(vec![T::zero(); cells as usize])
        } else {
            Storage::Sparse(BTreeMap::new())
        };
        Ok(Self { lo, hi, storage })
    }

    pub fn sparse(lo: Vec<i64>, hi: Vec<i64>) -> Result<Self> {
        check_box(&lo, &hi)?;
        Ok(Self {
            lo,
            hi,
            storage: Storage::Sparse(BTreeMap::new()),
        })
    }

    pub fn from_dense(lo: Vec<i64>, hi: Vec<i64>, values: Vec<T>) -> Result<Self> {
        check_box(&lo, &hi)?;
        let cells = box_cells(&lo, &hi);
        if cells != values.len() as u128 {
            return Err(Error::contract(format!(
                "box has {cells} cells but {} values were given",
                values.len()
            )));
        }
        Ok(Self {
            lo,
            hi,
            storage: Storage::Dense(values),
        })
    }

    pub fn from_fn(lo: Vec<i64>, hi: Vec<i64>, mut f: impl FnMut(&[i64]) -> T) -> Result<Self> {
        let mut out = Self::zeros(lo, hi)?;
        if box_cells(&out.lo, &out.hi) > DENSE_CELL_CAP {
            return Err(Error::size("dense lattice box", box_cells(&out.lo, &out.hi), DENSE_CELL_CAP));
        }
        let points: Vec<Vec<i64>> = out.box_points().collect();
        for p in points {
            let v = f(&p);
            out.set(&p, v)?;
        }
        Ok(out)
    }

    pub fn point_mass(x: &[i64], value: T) -> Self {
        Self {
            lo: x.to_vec(),
            hi: x.to_vec(),
            storage: Storage::Dense(vec![value]),
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[i64] {
        &self.lo
    }

    pub fn hi(&self) -> &[i64] {
        &self.hi
    }

    pub fn storage(&self) -> &Storage<T> {
        &self.storage
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.storage, Storage::Dense(_))
    }

    pub fn cells(&self) -> u128 {
        box_cells(&self.lo, &self.hi)
    }

    pub fn extents(&self) -> Vec<usize> {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(&l, &h)| (h - l + 1) as usize)
            .collect()
    }

    pub fn contains(&self, x: &[i64]) -> bool {
        x.len() == self.lo.len()
            && x.iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(v, (l, h))| l <= v && v <= h)
    }

    pub(crate) fn offset(&self, x: &[i64]) -> usize {
        let mut idx = 0usize;
        for ((&v, &l), &h) in x.iter().zip(&self.lo).zip(&self.hi) {
            idx = idx * (h - l + 1) as usize + (v - l) as usize;
        }
        idx
    }

    pub(crate) fn point_at(&self, mut idx: usize) -> Vec<i64> {
        let ext = self.extents();
        let mut p = vec![0i64; ext.len()];
        for axis in (0..ext.len()).rev() {
            p[axis] = self.lo[axis] + (idx % ext[axis]) as i64;
            idx /= ext[axis];
        }
        p
    }

    /// `f(x)`, zero outside the box.
    pub fn get(&self, x: &[i64]) -> T {
        if !self.contains(x) {
            return T::zero();
        }
        match &self.storage {
            Storage::Dense(v) => v[self.offset(x)].clone(),
            Storage::Sparse(m) => m.get(x).cloned().unwrap_or_else(T::zero),
        }
    }

    pub fn set(&mut self, x: &[i64], value: T) -> Result<()> {
        if !self.contains(x) {
            return Err(Error::contract(format!(
                "point {x:?} outside box {:?}..={:?}",
                self.lo, self.hi
            )));
        }
        let off = self.offset(x);
        match &mut self.storage {
            Storage::Dense(v) => v[off] = value,
            Storage::Sparse(m) => {
                if value.is_zero() {
                    m.remove(x);
                } else {
                    m.insert(x.to_vec(), value);
                }
            }
        }
        Ok(())
    }

    /// All lattice points of the box in row-major order.
    pub fn box_points(&self) -> impl Iterator<Item = Vec<i64>> + '_ {
        let cells = self.cells() as usize;
        (0..cells).map(move |i| self.point_at(i))
    }

    /// Nonzero entries in row-major (lexicographic) order.
    pub fn nonzero(&self) -> Vec<(Vec<i64>, T)> {
        match &self.storage {
            Storage::Dense(v) => v
                .iter()
                .enumerate()
                .filter(|(_, x)| !x.is_zero())
                .map(|(i, x)| (self.point_at(i), x.clone()))
                .collect(),
            Storage::Sparse(m) => m.iter().map(|(k, v)| (k.clone(), v.clone())).collect(),
        }
    }

    pub fn map<U: LatticeValue>(&self, f: impl Fn(&T) -> U) -> LatticeFunction<U> {
        let storage = match &self.storage {
            Storage::Dense(v) => Storage::Dense(v.iter().map(&f).collect()),
            Storage::Sparse(m) => Storage::Sparse(
                m.iter()
                    .map(|(k, v)| (k.clone(), f(v)))
                    .filter(|(_, v)| !v.is_zero())
                    .collect(),
            ),
        };
        LatticeFunction {
            lo: self.lo.clone(),
            hi: self.hi.clone(),
            storage,
        }
    }

    /// Compensated or exact sum of all values.
    pub fn sum(&self) -> T {
        let mut acc = T::acc_zero();
        for (_, v) in self.nonzero() {
            T::accumulate(&mut acc, &v, 1);
        }
        T::finish(&acc, 1)
    }

    pub fn norm_lp(&self, p: f64) -> f64 {
        let mut acc = Neumaier::default();
        let mut sup: f64 = 0.0;
        for (_, v) in self.nonzero() {
            let m = v.modulus();
            sup = sup.max(m);
            if p.is_finite() {
                acc.add(m.powf(p));
            }
        }
        if p.is_infinite() {
            sup
        } else {
            acc.value().powf(1.0 / p)
        }
    }

    pub fn norm_sup(&self) -> f64 {
        self.norm_lp(f64::INFINITY)
    }

    /// Writes the JSON header line followed by little-endian values.
    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        let (storage, entries) = match &self.storage {
            Storage::Dense(v) => ("dense", v.len()),
            Storage::Sparse(m) => ("sparse", m.len()),
        };
        let header = Header {
            lo: self.lo.clone(),
            hi: self.hi.clone(),
            dtype: T::DTYPE.to_string(),
            storage: storage.to_string(),
            entries,
        };
        serde_json::to_writer(&mut w, &header)?;
        w.write_all(b"\n")?;
        let mut buf = Vec::new();
        match &self.storage {
            Storage::Dense(v) => v.iter().for_each(|x| x.write_le(&mut buf)),
            Storage::Sparse(m) => {
                for (k, v) in m {
                    k.iter().for_each(|c| buf.extend_from_slice(&c.to_le_bytes()));
                    v.write_le(&mut buf);
                }
            }
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_from(mut r: impl BufRead) -> Result<Self> {
        let mut line = String::new();
        r.read_line(&mut line)?;
        let header: Header = serde_json::from_str(line.trim_end())?;
        if header.dtype != T::DTYPE {
            return Err(Error::Parse(format!(
                "file holds dtype {}, expected {}",
                header.dtype,
                T::DTYPE
            )));
        }
        check_box(&header.lo, &header.hi)?;
        let d = header.lo.len();
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        match header.storage.as_str() {
            "dense" => {
                if bytes.len() != header.entries * T::BYTES {
                    return Err(Error::Parse("dense payload length mismatch".into()));
                }
                let values = bytes
                    .chunks_exact(T::BYTES)
                    .map(T::read_le)
                    .collect::<Result<Vec<_>>>()?;
                Self::from_dense(header.lo, header.hi, values)
            }
            "sparse" => {
                let stride = 8 * d + T::BYTES;
                if bytes.len() != header.entries * stride {
                    return Err(Error::Parse("sparse payload length mismatch".into()));
                }
                let mut out = Self::sparse(header.lo, header.hi)?;
                for chunk in bytes.chunks_exact(stride) {
                    let x: Vec<i64> = chunk[..8 * d]
                        .chunks_exact(8)
                        .map(|c| i64::from_le_bytes(c.try_into().expect("8 bytes")))
                        .collect();
                    out.set(&x, T::read_le(&chunk[8 * d..])?)?;
                }
                Ok(out)
            }
            other => Err(Error::Parse(format!("unknown storage kind {other}"))),
        }
    }
}
