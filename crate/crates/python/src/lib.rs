use std::collections::BTreeMap;
use std::path::PathBuf;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use tsdiscord::heatmap::{build_heatmap, rank_discords};
use tsdiscord::{DiscordError, MultiLengthDiscordSet};

fn to_py(e: DiscordError) -> PyErr {
    match e {
        DiscordError::Io(e) => PyIOError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

#[pyclass(name = "TimeSeries", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyTimeSeries {
    inner: tsdiscord::TimeSeries,
}

#[pymethods]
impl PyTimeSeries {
    #[new]
    fn new(values: Vec<f64>) -> PyResult<Self> {
        Ok(Self {
            inner: tsdiscord::TimeSeries::new(values).map_err(to_py)?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (path, column=None))]
    fn load(path: PathBuf, column: Option<&str>) -> PyResult<Self> {
        Ok(Self {
            inner: tsdiscord::io::load_series(&path, column).map_err(to_py)?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (n, seed=0))]
    fn random_walk(n: usize, seed: u64) -> PyResult<Self> {
        Ok(Self {
            inner: tsdiscord::io::gen_randomwalk(n, seed).map_err(to_py)?,
        })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("TimeSeries(n={})", self.inner.len())
    }

    fn values(&self) -> Vec<f64> {
        self.inner.values().to_vec()
    }

    /// Means and standard deviations of every length-`m` window.
    fn stats(&self, m: usize) -> PyResult<(Vec<f64>, Vec<f64>)> {
        let s = tsdiscord::init_stats(&self.inner, m).map_err(to_py)?;
        Ok((s.mu().to_vec(), s.sigma().to_vec()))
    }
}

#[pyclass(name = "Discord", frozen, get_all, skip_from_py_object)]
#[derive(Clone, Copy)]
pub struct PyDiscord {
    /// 1-based start.
    index: usize,
    length: usize,
    nn_dist_sq: f64,
}

#[pymethods]
impl PyDiscord {
    #[getter]
    fn nn_dist(&self) -> f64 {
        self.nn_dist_sq.sqrt()
    }

    fn __repr__(&self) -> String {
        format!(
            "Discord(index={}, length={}, nn_dist_sq={})",
            self.index, self.length, self.nn_dist_sq
        )
    }
}

impl From<&tsdiscord::DiscordRecord> for PyDiscord {
    fn from(r: &tsdiscord::DiscordRecord) -> Self {
        Self {
            index: r.start(),
            length: r.length(),
            nn_dist_sq: r.nn_dist_sq,
        }
    }
}

fn wrap(records: &[tsdiscord::DiscordRecord]) -> Vec<PyDiscord> {
    records.iter().map(PyDiscord::from).collect()
}

#[pyclass(name = "MerlinResult", frozen)]
pub struct PyMerlinResult {
    n: usize,
    min_l: usize,
    max_l: usize,
    set: MultiLengthDiscordSet,
    #[pyo3(get)]
    failed: Vec<usize>,
    #[pyo3(get)]
    thresholds: BTreeMap<usize, f64>,
}

#[pymethods]
impl PyMerlinResult {
    /// `{length: [Discord, ...]}`, best first within a length.
    fn discords(&self) -> BTreeMap<usize, Vec<PyDiscord>> {
        self.set.iter().map(|(m, rs)| (m, wrap(rs))).collect()
    }

    fn __len__(&self) -> usize {
        self.set.len()
    }

    fn heatmap(&self) -> PyResult<PyHeatmap> {
        let inner = build_heatmap(&self.set, self.n, self.min_l, self.max_l).map_err(to_py)?;
        Ok(PyHeatmap { inner })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        tsdiscord::io::save_discords(&path, &self.set).map_err(to_py)
    }
}

#[pyclass(name = "Heatmap", frozen)]
pub struct PyHeatmap {
    inner: tsdiscord::heatmap::Heatmap,
}

#[pymethods]
impl PyHeatmap {
    /// `(lengths, positions)`.
    #[getter]
    fn shape(&self) -> (usize, usize) {
        (self.inner.height(), self.inner.width())
    }

    /// Score at length `m`, 1-based start `i`.
    fn get(&self, m: usize, i: usize) -> PyResult<f64> {
        if m < self.inner.min_l || m > self.inner.max_l || i == 0 || i > self.inner.width() {
            return Err(PyValueError::new_err(format!("({m}, {i}) outside the heatmap")));
        }
        Ok(self.inner.get(m, i))
    }

    fn row(&self, m: usize) -> PyResult<Vec<f64>> {
        if m < self.inner.min_l || m > self.inner.max_l {
            return Err(PyValueError::new_err(format!("length {m} outside the heatmap")));
        }
        Ok(self.inner.row(m).to_vec())
    }

    /// `[(index, length, score), ...]`, best first.
    fn rank(&self, k: usize) -> PyResult<Vec<(usize, usize, f64)>> {
        Ok(rank_discords(&self.inner, k)
            .map_err(to_py)?
            .into_iter()
            .map(|d| (d.index, d.length, d.score))
            .collect())
    }

    fn save_csv(&self, path: PathBuf) -> PyResult<()> {
        self.inner.save_csv(&path).map_err(to_py)
    }

    fn save_pgm(&self, path: PathBuf) -> PyResult<()> {
        self.inner.save_pgm(&path).map_err(to_py)
    }
}

#[pyfunction]
#[pyo3(signature = (series, min_l, max_l, top_k=1, seglen=512, workers=None))]
fn merlin(
    py: Python<'_>,
    series: &PyTimeSeries,
    min_l: usize,
    max_l: usize,
    top_k: usize,
    seglen: usize,
    workers: Option<usize>,
) -> PyResult<PyMerlinResult> {
    let cfg = tsdiscord::MerlinConfig::new(min_l, max_l)
        .top_k(top_k)
        .seglen(seglen)
        .workers(workers.unwrap_or_else(default_workers));
    let s = &series.inner;
    let out = py.detach(|| tsdiscord::merlin(s, &cfg)).map_err(to_py)?;
    Ok(PyMerlinResult {
        n: s.len(),
        min_l,
        max_l,
        set: out.discords,
        failed: out.failed,
        thresholds: out.thresholds,
    })
}

#[pyfunction]
#[pyo3(signature = (series, m, r_sq, seglen=512, workers=None))]
fn pardrag(
    py: Python<'_>,
    series: &PyTimeSeries,
    m: usize,
    r_sq: f64,
    seglen: usize,
    workers: Option<usize>,
) -> PyResult<Vec<PyDiscord>> {
    let s = &series.inner;
    let workers = workers.unwrap_or_else(default_workers);
    let out = py
        .detach(|| tsdiscord::pardrag(s, m, r_sq, seglen, workers))
        .map_err(to_py)?;
    Ok(wrap(&out))
}

#[pyfunction]
fn drag(series: &PyTimeSeries, m: usize, r_sq: f64) -> PyResult<Vec<PyDiscord>> {
    Ok(wrap(&tsdiscord::drag::drag(&series.inner, m, r_sq).map_err(to_py)?))
}

/// Squared distance from each subsequence to its nearest non-overlapping one.
#[pyfunction]
fn brute_force_nn(series: &PyTimeSeries, m: usize) -> PyResult<Vec<f64>> {
    tsdiscord::oracle::brute_force_nn(&series.inner, m).map_err(to_py)
}

#[pyfunction]
fn brute_force_topk(series: &PyTimeSeries, m: usize, k: usize) -> PyResult<Vec<PyDiscord>> {
    Ok(wrap(&tsdiscord::oracle::brute_force_topk(&series.inner, m, k).map_err(to_py)?))
}

#[pyfunction]
#[pyo3(signature = (n, m, seglen))]
fn layout(n: usize, m: usize, seglen: usize) -> PyResult<BTreeMap<&'static str, usize>> {
    let l = tsdiscord::compute_layout(n, m, seglen).map_err(to_py)?;
    Ok(BTreeMap::from([
        ("seg_n", l.seg_n),
        ("num_seg", l.num_seg),
        ("pad", l.pad),
    ]))
}

#[pymodule]
fn tsdiscord_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyTimeSeries>()?;
    m.add_class::<PyDiscord>()?;
    m.add_class::<PyMerlinResult>()?;
    m.add_class::<PyHeatmap>()?;
    m.add_function(wrap_pyfunction!(merlin, m)?)?;
    m.add_function(wrap_pyfunction!(pardrag, m)?)?;
    m.add_function(wrap_pyfunction!(drag, m)?)?;
    m.add_function(wrap_pyfunction!(brute_force_nn, m)?)?;
    m.add_function(wrap_pyfunction!(brute_force_topk, m)?)?;
    m.add_function(wrap_pyfunction!(layout, m)?)?;
    Ok(())
}
