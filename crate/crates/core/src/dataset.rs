//! Supervised datasets: composition policy, featurization, standardization,
//! train/test splits and CSV persistence.
//!
//! On disk a dataset is a CSV file with header `f0,...,f{d-1},negativity`
//! plus a JSON sidecar next to it (same stem, `.meta` extension) carrying the
//! generator configuration and one provenance record per row.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::matrix::Matrix;
use crate::negativity::{negativity, pure_state_negativity};
use crate::rng::RngHandle;
use crate::states::{
    random_pure_state, sparse_pure_state, werner_state, DensityOperator, PureState, Spin, SpinPair,
};

pub const SCHEMA_VERSION: u32 = 1;
pub const GENERATOR_VERSION: &str = concat!("spin-negativity/", env!("CARGO_PKG_VERSION"));

/// Fraction of rows drawn as dense Gaussian states in a pure-state dataset.
pub const DENSE_FRACTION: f64 = 0.10;

/// Constant columns are divided by this instead of a zero deviation.
pub const STD_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Pure,
    Werner,
}

impl std::str::FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pure" => Ok(Family::Pure),
            "werner" => Ok(Family::Werner),
            other => Err(param(format!("unknown family `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    PureAmplitudes,
    DensityFull,
    DensityCompact,
}

impl Layout {
    /// Feature width for a state on a composite space of dimension `d`
    /// (`d = n_amp`).
    pub fn width(self, d: usize) -> usize {
        match self {
            Layout::PureAmplitudes => d,
            Layout::DensityFull => 2 * d * d,
            Layout::DensityCompact => d * (d + 1) / 2,
        }
    }
}

impl std::str::FromStr for Layout {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pure_amplitudes" => Ok(Layout::PureAmplitudes),
            "density_full" => Ok(Layout::DensityFull),
            "density_compact" => Ok(Layout::DensityCompact),
            other => Err(param(format!("unknown layout `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub layout: Layout,
}

/// How a row was generated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case")]
pub enum Provenance {
    Dense,
    Sparse { k: usize },
    Werner { alpha: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub schema_version: u32,
    pub generator_version: String,
    pub family: Family,
    pub j1: Spin,
    pub j2: Spin,
    pub layout: Layout,
    pub seed: u64,
    #[serde(rename = "S")]
    pub samples: usize,
    pub provenance: Vec<Provenance>,
}

impl DatasetMeta {
    pub fn pair(&self) -> SpinPair {
        SpinPair {
            j1: self.j1,
            j2: self.j2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: Matrix,
    pub targets: Vec<f64>,
    pub meta: DatasetMeta,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn width(&self) -> usize {
        self.features.cols()
    }

    pub fn validate(&self) -> Result<()> {
        let s = self.meta.samples;
        if self.features.rows() != s || self.targets.len() != s || self.meta.provenance.len() != s {
            return Err(Error::Integrity(format!(
                "metadata declares {s} rows, data has {} feature rows, {} targets and {} provenance records",
                self.features.rows(),
                self.targets.len(),
                self.meta.provenance.len()
            )));
        }
        let width = self.meta.layout.width(self.meta.pair().n_amp());
        if self.features.cols() != width {
            return Err(Error::Integrity(format!(
                "layout {:?} implies {width} features, file has {}",
                self.meta.layout,
                self.features.cols()
            )));
        }
        let bound = self.meta.pair().max_negativity() + 1e-9;
        if let Some((i, t)) = self
            .targets
            .iter()
            .enumerate()
            .find(|(_, t)| !(**t >= 0.0 && **t <= bound))
        {
            return Err(Error::Integrity(format!(
                "target {t} of row {i} outside [0, {bound}]"
            )));
        }
        Ok(())
    }

    /// Rebuild the state that produced row `i`.
    pub fn row_state(&self, i: usize) -> Result<DensityOperator> {
        match (self.meta.family, self.meta.provenance[i]) {
            (Family::Werner, Provenance::Werner { alpha }) => werner_state(self.meta.j1, alpha),
            (Family::Pure, _) => {
                let state = PureState::new(self.meta.pair(), self.features.row(i).to_vec())?;
                crate::states::density_from_pure(&state)
            }
            _ => Err(Error::Integrity(format!("row {i} provenance does not match family"))),
        }
    }
}

/// Largest sparsity drawn for the near-separable part of a pure dataset.
pub fn sparsity_cap(pair: SpinPair) -> usize {
    (pair.n_amp() / 8).max(2).min(pair.n_amp())
}

pub fn featurize_pure(state: &PureState) -> FeatureVector {
    FeatureVector {
        values: state.amplitudes().to_vec(),
        layout: Layout::PureAmplitudes,
    }
}

pub fn featurize_density(rho: &DensityOperator, layout: Layout) -> Result<FeatureVector> {
    let m = rho.matrix();
    let d = m.rows();
    let values = match layout {
        Layout::DensityFull => {
            let mut v = Vec::with_capacity(2 * d * d);
            v.extend_from_slice(m.as_slice());
            // imaginary parts; every state in this crate is real
            v.resize(2 * d * d, 0.0);
            v
        }
        Layout::DensityCompact => {
            let mut v = Vec::with_capacity(d * (d + 1) / 2);
            for i in 0..d {
                v.extend_from_slice(&m.row(i)[i..]);
            }
            v
        }
        Layout::PureAmplitudes => {
            return Err(param("pure_amplitudes is not a density-matrix layout"))
        }
    };
    Ok(FeatureVector { values, layout })
}

/// Inverse of the compact layout: rebuild the full symmetric matrix.
pub fn unpack_compact(values: &[f64], d: usize) -> Result<Matrix> {
    if values.len() != d * (d + 1) / 2 {
        return Err(Error::Structural(format!(
            "{} compact values for dimension {d}",
            values.len()
        )));
    }
    let mut m = Matrix::zeros(d, d);
    let mut it = values.iter();
    for i in 0..d {
        for j in i..d {
            let v = *it.next().expect("length checked");
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    Ok(m)
}

fn pure_row(pair: SpinPair, dense: bool, rng: &mut RngHandle) -> Result<(PureState, Provenance)> {
    if dense {
        Ok((random_pure_state(pair, rng)?, Provenance::Dense))
    } else {
        let k = 1 + rng.below(sparsity_cap(pair));
        Ok((sparse_pure_state(pair, k, rng)?, Provenance::Sparse { k }))
    }
}

/// Pure-state dataset: `ceil(0.1 S)` dense Gaussian rows, the rest sparse
/// with `k` uniform on `1..=sparsity_cap(pair)`, shuffled.
///
/// Row `i` (before shuffling) draws from the child stream `(seed, i)`.
pub fn build_pure_dataset(pair: SpinPair, samples: usize, rng: &mut RngHandle) -> Result<Dataset> {
    if samples < 10 {
        return Err(param(format!("pure dataset needs S >= 10, got {samples}")));
    }
    let n_dense = (DENSE_FRACTION * samples as f64).ceil() as usize;
    let width = pair.n_amp();
    let mut rows = Vec::with_capacity(samples);
    for i in 0..samples {
        let mut row_rng = rng.derive(&[i as u64]);
        let (state, prov) = pure_row(pair, i < n_dense, &mut row_rng)?;
        let target = pure_state_negativity(&state)?.value;
        rows.push((state, prov, target));
    }
    let order = rng.permutation(samples);
    let mut features = Vec::with_capacity(samples * width);
    let mut targets = Vec::with_capacity(samples);
    let mut provenance = Vec::with_capacity(samples);
    for &i in &order {
        let (state, prov, target) = &rows[i];
        features.extend_from_slice(&featurize_pure(state).values);
        targets.push(*target);
        provenance.push(*prov);
    }
    Ok(Dataset {
        features: Matrix::from_vec(samples, width, features)?,
        targets,
        meta: DatasetMeta {
            schema_version: SCHEMA_VERSION,
            generator_version: GENERATOR_VERSION.to_string(),
            family: Family::Pure,
            j1: pair.j1,
            j2: pair.j2,
            layout: Layout::PureAmplitudes,
            seed: rng.seed(),
            samples,
            provenance,
        },
    })
}

/// Werner dataset with `alpha` uniform on `[0, 1)`; row `i` draws from `(seed, i)`.
pub fn build_werner_dataset(
    j: Spin,
    samples: usize,
    layout: Layout,
    rng: &mut RngHandle,
) -> Result<Dataset> {
    if samples < 2 {
        return Err(param(format!("werner dataset needs S >= 2, got {samples}")));
    }
    if layout == Layout::PureAmplitudes {
        return Err(param("werner datasets need a density layout"));
    }
    let pair = SpinPair::symmetric(j);
    let width = layout.width(pair.n_amp());
    let mut features = Vec::with_capacity(samples * width);
    let mut targets = Vec::with_capacity(samples);
    let mut provenance = Vec::with_capacity(samples);
    for i in 0..samples {
        let alpha = rng.derive(&[i as u64]).uniform();
        let rho = werner_state(j, alpha)?;
        targets.push(negativity(&rho)?.value);
        features.extend_from_slice(&featurize_density(&rho, layout)?.values);
        provenance.push(Provenance::Werner { alpha });
    }
    Ok(Dataset {
        features: Matrix::from_vec(samples, width, features)?,
        targets,
        meta: DatasetMeta {
            schema_version: SCHEMA_VERSION,
            generator_version: GENERATOR_VERSION.to_string(),
            family: Family::Werner,
            j1: j,
            j2: j,
            layout,
            seed: rng.seed(),
            samples,
            provenance,
        },
    })
}

/// Per-feature affine map to zero mean and unit (population) variance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl Standardizer {
    pub fn fit(train: &Matrix) -> Result<Self> {
        let n = train.rows();
        if n < 2 {
            return Err(param(format!("standardizer needs >= 2 rows, got {n}")));
        }
        let d = train.cols();
        let mut means = vec![0.0; d];
        for row in train.row_iter() {
            for (m, &x) in means.iter_mut().zip(row) {
                *m += x;
            }
        }
        means.iter_mut().for_each(|m| *m /= n as f64);
        let mut constant = vec![true; d];
        let first = train.row(0);
        let mut vars = vec![0.0; d];
        for row in train.row_iter() {
            for c in 0..d {
                let dx = row[c] - means[c];
                vars[c] += dx * dx;
                constant[c] &= row[c] == first[c];
            }
        }
        let mut stds = Vec::with_capacity(d);
        for c in 0..d {
            if constant[c] {
                // exact constant: center on the value itself so the column maps to 0.0
                means[c] = first[c];
                stds.push(STD_FLOOR);
            } else {
                stds.push((vars[c] / n as f64).sqrt().max(STD_FLOOR));
            }
        }
        Ok(Self { means, stds })
    }

    pub fn width(&self) -> usize {
        self.means.len()
    }

    pub fn apply(&self, features: &Matrix) -> Result<Matrix> {
        if features.cols() != self.width() {
            return Err(Error::Width {
                expected: self.width(),
                got: features.cols(),
            });
        }
        let mut out = features.clone();
        for r in 0..out.rows() {
            self.apply_row(out.row_mut(r));
        }
        Ok(out)
    }

    pub fn apply_row(&self, row: &mut [f64]) {
        for ((x, m), s) in row.iter_mut().zip(&self.means).zip(&self.stds) {
            *x = (*x - m) / s;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

impl SplitPlan {
    /// Random permutation of `0..n` cut at `floor(ratio n)`.
    pub fn new(n: usize, ratio: f64, rng: &mut RngHandle) -> Result<Self> {
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(param(format!("split ratio {ratio} outside (0, 1)")));
        }
        if n < 2 {
            return Err(param(format!("cannot split {n} rows")));
        }
        let perm = rng.permutation(n);
        let cut = (ratio * n as f64).floor() as usize;
        Ok(Self {
            train: perm[..cut].to_vec(),
            test: perm[cut..].to_vec(),
        })
    }

    pub fn ratio(&self) -> f64 {
        self.train.len() as f64 / (self.train.len() + self.test.len()) as f64
    }
}

pub fn split(dataset: &Dataset, ratio: f64, rng: &mut RngHandle) -> Result<SplitPlan> {
    SplitPlan::new(dataset.len(), ratio, rng)
}

/// `foo/bar.csv` -> `foo/bar.meta`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("meta")
}

pub fn save_dataset(dataset: &Dataset, path: &Path) -> Result<()> {
    dataset.validate()?;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(BufWriter::new(File::create(path)?));
    let d = dataset.width();
    let mut header: Vec<String> = (0..d).map(|i| format!("f{i}")).collect();
    header.push("negativity".into());
    w.write_record(&header)?;
    let mut record = Vec::with_capacity(d + 1);
    for (row, t) in dataset.features.row_iter().zip(&dataset.targets) {
        record.clear();
        record.extend(row.iter().map(|v| format_f64(*v)));
        record.push(format_f64(*t));
        w.write_record(&record)?;
    }
    w.flush()?;
    let mut meta = BufWriter::new(File::create(sidecar_path(path))?);
    serde_json::to_writer_pretty(&mut meta, &dataset.meta)?;
    meta.write_all(b"\n")?;
    meta.flush()?;
    Ok(())
}

/// Shortest decimal that parses back to the same `f64`.
pub(crate) fn format_f64(v: f64) -> String {
    format!("{v:?}")
}

pub fn load_dataset(path: &Path) -> Result<Dataset> {
    let meta_path = sidecar_path(path);
    for p in [path, meta_path.as_path()] {
        if !p.exists() {
            return Err(Error::MissingFile(p.to_path_buf()));
        }
    }
    let meta_value: serde_json::Value = serde_json::from_reader(BufReader::new(File::open(&meta_path)?))
        .map_err(|e| Error::Schema(format!("sidecar {}: {e}", meta_path.display())))?;
    match meta_value.get("schema_version").and_then(|v| v.as_u64()) {
        Some(v) if v == u64::from(SCHEMA_VERSION) => {}
        Some(v) => {
            return Err(Error::Schema(format!(
                "sidecar schema_version {v}, this build reads {SCHEMA_VERSION}"
            )))
        }
        None => return Err(Error::Schema("sidecar has no schema_version".into())),
    }
    let meta: DatasetMeta = serde_json::from_value(meta_value)
        .map_err(|e| Error::Schema(format!("sidecar {}: {e}", meta_path.display())))?;

    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(BufReader::new(File::open(path)?));
    let header = r.headers()?.clone();
    let width = header.len().saturating_sub(1);
    let header_ok = header.len() >= 2
        && header.get(width) == Some("negativity")
        && header
            .iter()
            .take(width)
            .enumerate()
            .all(|(i, h)| h == format!("f{i}"));
    if !header_ok {
        return Err(Error::Schema(format!(
            "{}: header is not `f0,...,f{{d-1}},negativity`",
            path.display()
        )));
    }
    let mut features = Vec::new();
    let mut targets = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        if rec.len() != width + 1 {
            return Err(Error::Schema(format!(
                "data row {line} has {} fields, header has {}",
                rec.len(),
                width + 1
            )));
        }
        for (i, field) in rec.iter().enumerate() {
            let v: f64 = field
                .parse()
                .map_err(|_| Error::Schema(format!("data row {line}: `{field}` is not a number")))?;
            if i == width {
                targets.push(v);
            } else {
                features.push(v);
            }
        }
    }
    let rows = targets.len();
    let dataset = Dataset {
        features: Matrix::from_vec(rows, width, features)?,
        targets,
        meta,
    };
    dataset.validate()?;
    Ok(dataset)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{density_from_pure, zeta_state};

    fn half_pair() -> SpinPair {
        SpinPair::new(0.5, 0.5).unwrap()
    }

    #[test]
    fn pure_dataset_composition() {
        let ds = build_pure_dataset(half_pair(), 100, &mut RngHandle::new(1)).unwrap();
        assert_eq!(ds.len(), 100);
        assert_eq!(ds.width(), 4);
        let dense = ds.meta.provenance.iter().filter(|p| **p == Provenance::Dense).count();
        assert_eq!(dense, 10);
        let entangled = ds.targets.iter().filter(|t| **t > 0.01).count();
        assert!(entangled >= 10, "{entangled}");
        for (p, t) in ds.meta.provenance.iter().zip(&ds.targets) {
            if *p == (Provenance::Sparse { k: 1 }) {
                assert_eq!(*t, 0.0);
            }
        }
        ds.validate().unwrap();
    }

    #[test]
    fn composition_rounds_up() {
        let ds = build_pure_dataset(SpinPair::new(1.0, 1.0).unwrap(), 25, &mut RngHandle::new(2)).unwrap();
        let dense = ds.meta.provenance.iter().filter(|p| **p == Provenance::Dense).count();
        assert_eq!(dense, 3);
        assert!(build_pure_dataset(half_pair(), 9, &mut RngHandle::new(2)).is_err());
    }

    #[test]
    fn sparsity_cap_policy() {
        assert_eq!(sparsity_cap(half_pair()), 2);
        assert_eq!(sparsity_cap(SpinPair::new(1.0, 1.0).unwrap()), 2);
        assert_eq!(sparsity_cap(SpinPair::new(5.0, 5.0).unwrap()), 15);
    }

    #[test]
    fn pure_dataset_deterministic() {
        let a = build_pure_dataset(half_pair(), 50, &mut RngHandle::new(42)).unwrap();
        let b = build_pure_dataset(half_pair(), 50, &mut RngHandle::new(42)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn labels_match_partial_transpose_route() {
        let ds = build_pure_dataset(SpinPair::new(1.0, 1.0).unwrap(), 100, &mut RngHandle::new(8)).unwrap();
        for i in 0..ds.len() {
            let n = negativity(&ds.row_state(i).unwrap()).unwrap().value;
            assert!((n - ds.targets[i]).abs() <= 1e-10);
        }
    }

    #[test]
    fn werner_widths() {
        let half = Spin::new(0.5).unwrap();
        let ds = build_werner_dataset(half, 20, Layout::DensityFull, &mut RngHandle::new(3)).unwrap();
        assert_eq!(ds.width(), 32);
        assert!(ds.features.row_iter().all(|r| r[16..].iter().all(|v| *v == 0.0)));
        assert_eq!(Layout::DensityFull.width(121), 29282);
        assert_eq!(Layout::DensityCompact.width(121), 7381);
        assert_eq!(Layout::DensityCompact.width(4), 10);
        assert!(build_werner_dataset(half, 20, Layout::PureAmplitudes, &mut RngHandle::new(3)).is_err());
    }

    #[test]
    fn werner_threshold_row_has_zero_target() {
        let j = Spin::new(1.0).unwrap();
        let rho = werner_state(j, 0.25).unwrap();
        assert!(negativity(&rho).unwrap().value <= 1e-9);
    }

    #[test]
    fn featurize_examples() {
        let half = Spin::new(0.5).unwrap();
        let z = zeta_state(half, std::f64::consts::FRAC_PI_4).unwrap();
        let f = featurize_pure(&z);
        let a = std::f64::consts::FRAC_1_SQRT_2;
        assert!((f.values[0] - a).abs() < 1e-15 && (f.values[3] - a).abs() < 1e-15);
        assert_eq!(f.values[1], 0.0);

        let pair = half_pair();
        let s = PureState::new(pair, vec![-0.6, 0.0, 0.8, 0.0]).unwrap();
        assert_eq!(featurize_pure(&s).values[0], -0.6);
        assert_eq!(featurize_pure(&zeta_state(Spin::new(1.0).unwrap(), 0.3).unwrap()).values.len(), 9);

        let mixed = werner_state(half, 0.0).unwrap();
        let full = featurize_density(&mixed, Layout::DensityFull).unwrap();
        for (i, v) in full.values.iter().enumerate() {
            let expected = if i < 16 && i % 5 == 0 { 0.25 } else { 0.0 };
            assert_eq!(*v, expected);
        }
        assert!(featurize_density(&mixed, Layout::PureAmplitudes).is_err());
    }

    #[test]
    fn compact_layout_round_trips() {
        let mut rng = RngHandle::new(4);
        let pair = SpinPair::new(1.0, 0.5).unwrap();
        let rho = density_from_pure(&random_pure_state(pair, &mut rng).unwrap()).unwrap();
        let c = featurize_density(&rho, Layout::DensityCompact).unwrap();
        assert_eq!(&unpack_compact(&c.values, 6).unwrap(), rho.matrix());
    }

    #[test]
    fn standardizer_examples() {
        let m = Matrix::from_rows(&[vec![0.0, 5.0], vec![2.0, 5.0]]).unwrap();
        let s = Standardizer::fit(&m).unwrap();
        assert_eq!(s.means, vec![1.0, 5.0]);
        assert_eq!(s.stds, vec![1.0, STD_FLOOR]);
        let t = s.apply(&m).unwrap();
        assert_eq!(t.as_slice(), &[-1.0, 0.0, 1.0, 0.0]);
        assert!(Standardizer::fit(&Matrix::zeros(1, 2)).is_err());
        assert!(matches!(s.apply(&Matrix::zeros(1, 3)), Err(Error::Width { .. })));
    }

    #[test]
    fn constant_fractional_column_maps_to_zero() {
        let rows: Vec<Vec<f64>> = (0..1000).map(|i| vec![0.1, i as f64]).collect();
        let m = Matrix::from_rows(&rows).unwrap();
        let t = Standardizer::fit(&m).unwrap().apply(&m).unwrap();
        assert!(t.row_iter().all(|r| r[0] == 0.0));
    }

    #[test]
    fn standardized_training_columns() {
        let ds = build_pure_dataset(SpinPair::new(1.0, 1.0).unwrap(), 500, &mut RngHandle::new(6)).unwrap();
        let s = Standardizer::fit(&ds.features).unwrap();
        let t = s.apply(&ds.features).unwrap();
        for c in 0..t.cols() {
            let col: Vec<f64> = t.row_iter().map(|r| r[c]).collect();
            let mean = col.iter().sum::<f64>() / col.len() as f64;
            let var = col.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / col.len() as f64;
            assert!(mean.abs() < 1e-8);
            assert!((var.sqrt() - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn split_examples() {
        let p = SplitPlan::new(10, 0.8, &mut RngHandle::new(1)).unwrap();
        assert_eq!((p.train.len(), p.test.len()), (8, 2));
        let mut all: Vec<usize> = p.train.iter().chain(&p.test).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..10).collect::<Vec<_>>());
        assert_eq!(p, SplitPlan::new(10, 0.8, &mut RngHandle::new(1)).unwrap());
        let q = SplitPlan::new(101, 0.5, &mut RngHandle::new(1)).unwrap();
        assert_eq!((q.train.len(), q.test.len()), (50, 51));
        assert!(SplitPlan::new(10, 1.0, &mut RngHandle::new(1)).is_err());
        assert!(SplitPlan::new(1, 0.5, &mut RngHandle::new(1)).is_err());
    }
}
