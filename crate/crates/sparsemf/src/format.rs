//! On-disk formats.
//!
//! Binary containers are little-endian. Each starts with an 8-byte magic and
//! a `u32` version, followed by a fixed header, then data blocks:
//!
//! * trajectories (`SMFTRAJ1`): `n u64, steps u64, d u32, systems u32, dt f64,
//!   seed u64`, model id and graph id (`u32` length + UTF-8), media block
//!   `n·d f64`, `ξ` block `n f64`, then per system `steps + 1` rows of
//!   `n f64` (row `k` holds the positions at time `k·dt`).
//! * graphs (`SMFGRAPH`): `n u64, p f64, d u32, seed u64`, kernel id, media
//!   block `n·d f64`, `edges u64`, then `(i u32, j u32)` pairs with `i ≤ j`.
//! * densities (`SMFDENS1`): `cells u64, lo f64, dx f64, periodic u8,
//!   atoms u64, d u32, checkpoints u64, dt_pde f64`, then per atom `d f64`
//!   and a weight `f64`, the checkpoint times, and `q[k][atom][cell]`.

use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sparsemf_core::dynamics::{Trajectories, TrajectoryPair};
use sparsemf_core::graph::{GraphSample, NormResult};
use sparsemf_core::mckv::{DensityFlow, Grid};
use sparsemf_core::model::{Kernel, Media};

pub const TRAJECTORY_MAGIC: &[u8; 8] = b"SMFTRAJ1";
pub const GRAPH_MAGIC: &[u8; 8] = b"SMFGRAPH";
pub const DENSITY_MAGIC: &[u8; 8] = b"SMFDENS1";
const VERSION: u32 = 1;

fn bad(msg: impl Into<String>) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg.into())
}

struct Writer<W: Write>(W);

impl<W: Write> Writer<W> {
    fn u8(&mut self, v: u8) -> io::Result<()> {
        self.0.write_all(&[v])
    }
    fn u32(&mut self, v: u32) -> io::Result<()> {
        self.0.write_all(&v.to_le_bytes())
    }
    fn u64(&mut self, v: u64) -> io::Result<()> {
        self.0.write_all(&v.to_le_bytes())
    }
    fn f64(&mut self, v: f64) -> io::Result<()> {
        self.0.write_all(&v.to_le_bytes())
    }
    fn f64s(&mut self, v: &[f64]) -> io::Result<()> {
        v.iter().try_for_each(|&x| self.f64(x))
    }
    fn str(&mut self, s: &str) -> io::Result<()> {
        self.u32(s.len() as u32)?;
        self.0.write_all(s.as_bytes())
    }
    fn header(&mut self, magic: &[u8; 8]) -> io::Result<()> {
        self.0.write_all(magic)?;
        self.u32(VERSION)
    }
}

struct Reader<R: Read>(R);

impl<R: Read> Reader<R> {
    fn bytes<const N: usize>(&mut self) -> io::Result<[u8; N]> {
        let mut b = [0u8; N];
        self.0.read_exact(&mut b)?;
        Ok(b)
    }
    fn u8(&mut self) -> io::Result<u8> {
        Ok(self.bytes::<1>()?[0])
    }
    fn u32(&mut self) -> io::Result<u32> {
        Ok(u32::from_le_bytes(self.bytes()?))
    }
    fn u64(&mut self) -> io::Result<u64> {
        Ok(u64::from_le_bytes(self.bytes()?))
    }
    fn usize(&mut self) -> io::Result<usize> {
        usize::try_from(self.u64()?).map_err(|_| bad("length does not fit in memory"))
    }
    fn f64(&mut self) -> io::Result<f64> {
        Ok(f64::from_le_bytes(self.bytes()?))
    }
    fn f64s(&mut self, len: usize) -> io::Result<Vec<f64>> {
        (0..len).map(|_| self.f64()).collect()
    }
    fn str(&mut self) -> io::Result<String> {
        let len = self.u32()? as usize;
        let mut b = vec![0u8; len];
        self.0.read_exact(&mut b)?;
        String::from_utf8(b).map_err(|_| bad("identifier is not UTF-8"))
    }
    fn header(&mut self, magic: &[u8; 8]) -> io::Result<()> {
        if &self.bytes::<8>()? != magic {
            return Err(bad("wrong magic"));
        }
        match self.u32()? {
            VERSION => Ok(()),
            v => Err(bad(format!("unsupported version {v}"))),
        }
    }
}

fn create(path: &Path) -> io::Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

/// Trajectory ensembles as read back from the columnar container.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryFile {
    pub dt: f64,
    pub seed: u64,
    pub model_id: String,
    pub graph_id: String,
    pub media: Media,
    pub xi: Vec<f64>,
    pub systems: Vec<Trajectories>,
}

pub fn write_trajectories(out: impl Write, pair: &TrajectoryPair) -> io::Result<()> {
    let mut w = Writer(out);
    w.header(TRAJECTORY_MAGIC)?;
    w.u64(pair.n() as u64)?;
    w.u64(pair.steps() as u64)?;
    w.u32(pair.media.dim() as u32)?;
    w.u32(2)?;
    w.f64(pair.dt)?;
    w.u64(pair.seed)?;
    w.str(&pair.model_id)?;
    w.str(&pair.graph_id)?;
    w.f64s(pair.media.as_slice())?;
    w.f64s(&pair.xi)?;
    w.f64s(pair.theta_sparse.as_slice())?;
    w.f64s(pair.theta_dense.as_slice())?;
    w.0.flush()
}

pub fn read_trajectories(input: impl Read) -> io::Result<TrajectoryFile> {
    let mut r = Reader(input);
    r.header(TRAJECTORY_MAGIC)?;
    let n = r.usize()?;
    let steps = r.usize()?;
    let d = r.u32()? as usize;
    let systems = r.u32()? as usize;
    let dt = r.f64()?;
    let seed = r.u64()?;
    let model_id = r.str()?;
    let graph_id = r.str()?;
    let media = Media::new(d, r.f64s(n * d)?).map_err(|e| bad(e.to_string()))?;
    let xi = r.f64s(n)?;
    let systems = (0..systems)
        .map(|_| {
            let data = r.f64s(n * (steps + 1))?;
            Trajectories::from_time_major(n, steps, data).map_err(|e| bad(e.to_string()))
        })
        .collect::<io::Result<_>>()?;
    Ok(TrajectoryFile {
        dt,
        seed,
        model_id,
        graph_id,
        media,
        xi,
        systems,
    })
}

/// Long-format CSV `t,particle,sparse,dense` every `stride` steps for the
/// first `particles` particles.
pub fn write_trajectory_csv(
    out: impl Write,
    pair: &TrajectoryPair,
    stride: usize,
    particles: usize,
) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "particle", "sparse", "dense"])?;
    let stride = stride.max(1);
    let mut steps: Vec<usize> = (0..=pair.steps()).step_by(stride).collect();
    if steps.last() != Some(&pair.steps()) {
        steps.push(pair.steps());
    }
    for k in steps {
        for i in 0..particles.min(pair.n()) {
            w.write_record(&[
                num(k as f64 * pair.dt),
                i.to_string(),
                num(pair.theta_sparse.get(k, i)),
                num(pair.theta_dense.get(k, i)),
            ])?;
        }
    }
    w.flush()
}

/// JSON form of a graph container.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphRecord {
    pub n: usize,
    pub p: f64,
    pub d: usize,
    pub seed: u64,
    pub kernel_id: String,
    pub media: Vec<Vec<f64>>,
    pub edges: Vec<[u32; 2]>,
}

impl GraphRecord {
    pub fn from_sample(s: &GraphSample) -> Self {
        Self {
            n: s.n(),
            p: s.p(),
            d: s.media().dim(),
            seed: s.seed(),
            kernel_id: s.kernel_id().to_string(),
            media: s.media().rows().map(<[f64]>::to_vec).collect(),
            edges: s.edges().into_iter().map(|(i, j)| [i, j]).collect(),
        }
    }

    /// Rebuilds the sample; `kernel` must be the one it was drawn with.
    pub fn into_sample(self, kernel: &Kernel) -> io::Result<GraphSample> {
        if kernel.id() != self.kernel_id {
            return Err(bad(format!(
                "graph was drawn with kernel `{}`, not `{}`",
                self.kernel_id,
                kernel.id()
            )));
        }
        let flat: Vec<f64> = self.media.into_iter().flatten().collect();
        let media = Media::new(self.d, flat).map_err(|e| bad(e.to_string()))?;
        let edges: Vec<(u32, u32)> = self.edges.into_iter().map(|[i, j]| (i, j)).collect();
        GraphSample::from_edges(self.p, kernel, media, self.seed, &edges).map_err(|e| bad(e.to_string()))
    }
}

pub fn write_graph(out: impl Write, s: &GraphSample) -> io::Result<()> {
    let mut w = Writer(out);
    w.header(GRAPH_MAGIC)?;
    w.u64(s.n() as u64)?;
    w.f64(s.p())?;
    w.u32(s.media().dim() as u32)?;
    w.u64(s.seed())?;
    w.str(s.kernel_id())?;
    w.f64s(s.media().as_slice())?;
    let edges = s.edges();
    w.u64(edges.len() as u64)?;
    for (i, j) in edges {
        w.u32(i)?;
        w.u32(j)?;
    }
    w.0.flush()
}

pub fn read_graph(input: impl Read) -> io::Result<GraphRecord> {
    let mut r = Reader(input);
    r.header(GRAPH_MAGIC)?;
    let n = r.usize()?;
    let p = r.f64()?;
    let d = r.u32()? as usize;
    let seed = r.u64()?;
    let kernel_id = r.str()?;
    let flat = r.f64s(n * d)?;
    let count = r.usize()?;
    let edges = (0..count)
        .map(|_| Ok([r.u32()?, r.u32()?]))
        .collect::<io::Result<_>>()?;
    Ok(GraphRecord {
        n,
        p,
        d,
        seed,
        kernel_id,
        media: flat.chunks(d.max(1)).take(n).map(<[f64]>::to_vec).collect(),
        edges,
    })
}

pub fn write_density(out: impl Write, flow: &DensityFlow) -> io::Result<()> {
    let mut w = Writer(out);
    w.header(DENSITY_MAGIC)?;
    let g = &flow.grid;
    w.u64(g.cells as u64)?;
    w.f64(g.lo)?;
    w.f64(g.dx)?;
    w.u8(g.periodic as u8)?;
    w.u64(flow.atoms.len() as u64)?;
    w.u32(flow.atoms.first().map_or(0, |a| a.0.len()) as u32)?;
    w.u64(flow.times.len() as u64)?;
    w.f64(flow.dt_pde)?;
    for (v, weight) in &flow.atoms {
        w.f64s(v)?;
        w.f64(*weight)?;
    }
    w.f64s(&flow.times)?;
    for ck in &flow.q {
        for atom in ck {
            w.f64s(atom)?;
        }
    }
    w.0.flush()
}

/// Density checkpoints as read back from their container.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityFile {
    pub grid: Grid,
    pub atoms: Vec<(Vec<f64>, f64)>,
    pub times: Vec<f64>,
    pub dt_pde: f64,
    pub q: Vec<Vec<Vec<f64>>>,
}

pub fn read_density(input: impl Read) -> io::Result<DensityFile> {
    let mut r = Reader(input);
    r.header(DENSITY_MAGIC)?;
    let cells = r.usize()?;
    let lo = r.f64()?;
    let dx = r.f64()?;
    let periodic = r.u8()? != 0;
    let atoms = r.usize()?;
    let d = r.u32()? as usize;
    let checkpoints = r.usize()?;
    let dt_pde = r.f64()?;
    let atoms = (0..atoms)
        .map(|_| Ok((r.f64s(d)?, r.f64()?)))
        .collect::<io::Result<Vec<_>>>()?;
    let times = r.f64s(checkpoints)?;
    let q = (0..checkpoints)
        .map(|_| (0..atoms.len()).map(|_| r.f64s(cells)).collect())
        .collect::<io::Result<_>>()?;
    Ok(DensityFile {
        grid: Grid {
            lo,
            dx,
            cells,
            periodic,
        },
        atoms,
        times,
        dt_pde,
        q,
    })
}

/// A norm certificate as emitted to JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormRecord {
    pub method: String,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub certificate: Option<Vec<i8>>,
}

impl From<&NormResult> for NormRecord {
    fn from(r: &NormResult) -> Self {
        Self {
            method: r.method.as_str().to_string(),
            value: r.value,
            certificate: r.certificate.clone(),
        }
    }
}

/// Fixed, round-trip exact formatting for table cells.
pub fn num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:?}")
    }
}

/// A CSV table whose first line is a `#` timestamp comment.
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn write(&self, mut out: impl Write, timestamp: &str) -> io::Result<()> {
        writeln!(out, "# generated {timestamp}")?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()
    }

    pub fn save(&self, path: &Path) -> io::Result<()> {
        let stamp = chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true);
        self.write(create(path)?, &stamp)
    }
}

/// Reads a table written by [`Table::write`], skipping `#` lines.
pub fn read_table(input: impl Read) -> io::Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(input);
    let header = r.headers()?.iter().map(str::to_string).collect();
    let rows = r
        .records()
        .map(|rec| rec.map(|r| r.iter().map(str::to_string).collect()))
        .collect::<Result<_, _>>()?;
    Ok((header, rows))
}

/// Gnuplot-ready two-column data.
pub fn write_plot(path: &Path, label: &str, points: impl IntoIterator<Item = (f64, f64)>) -> io::Result<()> {
    let mut w = create(path)?;
    writeln!(w, "# {label}")?;
    for (x, y) in points {
        writeln!(w, "{} {}", num(x), num(y))?;
    }
    w.flush()
}

pub fn save_with(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> io::Result<()>) -> io::Result<()> {
    let mut w = create(path)?;
    f(&mut w)?;
    w.flush()
}
