//! Run configuration: a text file of `key = value` lines.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::geometry::{EdgeConfig, FormData, Preset};
use crate::io::{sha256_hex, Container};
use crate::singularity::FitWindow;
use crate::{EdgeError, Result};

pub const KEYS: [&str; 15] = [
    "alpha",
    "grid.Lx",
    "grid.LY",
    "grid.Nx",
    "grid.NY",
    "taylor.K",
    "fp.tol",
    "fp.max_iter",
    "fit.rmin_cells",
    "fit.rmax_frac",
    "fit.degree",
    "data.preset",
    "data.path",
    "out.dir",
    "p.list",
];

#[derive(Clone, Debug, PartialEq)]
pub enum DataSource {
    Preset(Preset),
    /// A container holding `f1` and `f2`.
    File(PathBuf),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub edge: EdgeConfig,
    pub fit_rmin_cells: f64,
    pub fit_rmax_frac: f64,
    pub fit_degree: u32,
    pub data: DataSource,
    pub out_dir: PathBuf,
    pub p_list: Vec<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            edge: EdgeConfig::default(),
            fit_rmin_cells: 1.0,
            fit_rmax_frac: 0.25,
            fit_degree: 1,
            data: DataSource::Preset(Preset::Gaussian),
            out_dir: PathBuf::from("out"),
            p_list: vec![2.5, 3.0, 4.0],
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| EdgeError::Config(format!("{key}: cannot parse {v:?}")))
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut seen = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| EdgeError::Config(format!("line {}: expected key = value", n + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            if !KEYS.contains(&k) {
                return Err(EdgeError::Config(format!("line {}: unknown key {k:?}", n + 1)));
            }
            if seen.insert(k.to_string(), v.to_string()).is_some() {
                return Err(EdgeError::Config(format!("line {}: duplicate key {k:?}", n + 1)));
            }
        }
        let mut c = Self::default();
        let mut path = None;
        let mut preset = None;
        for (k, v) in &seen {
            let v = v.as_str();
            match k.as_str() {
                "alpha" => c.edge.alpha = parse_num(k, v)?,
                "grid.Lx" => c.edge.lx = parse_num(k, v)?,
                "grid.LY" => c.edge.ly = parse_num(k, v)?,
                "grid.Nx" => c.edge.nx = parse_num(k, v)?,
                "grid.NY" => c.edge.ny = parse_num(k, v)?,
                "taylor.K" => c.edge.taylor_order = parse_num(k, v)?,
                "fp.tol" => c.edge.fp_tol = parse_num(k, v)?,
                "fp.max_iter" => c.edge.fp_max_iter = parse_num(k, v)?,
                "fit.rmin_cells" => c.fit_rmin_cells = parse_num(k, v)?,
                "fit.rmax_frac" => c.fit_rmax_frac = parse_num(k, v)?,
                "fit.degree" => c.fit_degree = parse_num(k, v)?,
                "data.preset" => preset = Some(v.to_string()),
                "data.path" => path = Some(PathBuf::from(v)),
                "out.dir" => c.out_dir = PathBuf::from(v),
                "p.list" => {
                    c.p_list = v
                        .split(',')
                        .map(|s| parse_num(k, s.trim()))
                        .collect::<Result<_>>()?
                }
                _ => unreachable!("keys are checked above"),
            }
        }
        c.data = match (preset.as_deref(), path) {
            (None | Some("gaussian"), None) => DataSource::Preset(Preset::Gaussian),
            (Some("edge_one"), None) => DataSource::Preset(Preset::EdgeOne),
            (Some("custom_file"), Some(p)) => DataSource::File(p),
            (Some("custom_file"), None) => {
                return Err(EdgeError::Config("data.preset = custom_file needs data.path".into()))
            }
            (_, Some(_)) => {
                return Err(EdgeError::Config("data.path is only used with data.preset = custom_file".into()))
            }
            (Some(other), None) => return Err(EdgeError::Config(format!("unknown data.preset {other:?}"))),
        };
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| EdgeError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.edge.validate()?;
        if self.edge.taylor_order == 0 {
            return Err(EdgeError::Config("taylor.K must be >= 1".into()));
        }
        if !(self.fit_rmin_cells > 0.0 && self.fit_rmin_cells.is_finite()) {
            return Err(EdgeError::Config("fit.rmin_cells must be > 0".into()));
        }
        if !(self.fit_rmax_frac > 0.0 && self.fit_rmax_frac <= 1.0) {
            return Err(EdgeError::Config("fit.rmax_frac must lie in (0, 1]".into()));
        }
        if self.p_list.is_empty() || self.p_list.iter().any(|p| !(p.is_finite() && *p >= 1.0)) {
            return Err(EdgeError::Config("p.list needs reals >= 1".into()));
        }
        let w = self.fit_window();
        if w.r_max <= w.r_min {
            return Err(EdgeError::Config(format!(
                "fit window is empty: r_min = {} >= r_max = {}",
                w.r_min, w.r_max
            )));
        }
        Ok(())
    }

    pub fn fit_window(&self) -> FitWindow {
        let hy = self.edge.grid().hy();
        FitWindow {
            r_min: self.fit_rmin_cells * hy,
            r_max: self.fit_rmax_frac * self.edge.ly,
            degree: self.fit_degree,
            fit_tol: self.edge.fit_tol,
            ..FitWindow::default()
        }
    }

    /// Every effective value, one `key=value` per line in key order.
    pub fn canonical(&self) -> String {
        let e = &self.edge;
        let (preset, path) = match &self.data {
            DataSource::Preset(Preset::Gaussian) => ("gaussian", String::new()),
            DataSource::Preset(Preset::EdgeOne) => ("edge_one", String::new()),
            DataSource::File(p) => ("custom_file", p.display().to_string()),
        };
        let p_list: Vec<String> = self.p_list.iter().map(|p| format!("{p:?}")).collect();
        let mut m = BTreeMap::new();
        m.insert("alpha", format!("{:?}", e.alpha));
        m.insert("grid.Lx", format!("{:?}", e.lx));
        m.insert("grid.LY", format!("{:?}", e.ly));
        m.insert("grid.Nx", e.nx.to_string());
        m.insert("grid.NY", e.ny.to_string());
        m.insert("taylor.K", e.taylor_order.to_string());
        m.insert("fp.tol", format!("{:?}", e.fp_tol));
        m.insert("fp.max_iter", e.fp_max_iter.to_string());
        m.insert("fit.rmin_cells", format!("{:?}", self.fit_rmin_cells));
        m.insert("fit.rmax_frac", format!("{:?}", self.fit_rmax_frac));
        m.insert("fit.degree", self.fit_degree.to_string());
        m.insert("data.preset", preset.to_string());
        m.insert("data.path", path);
        m.insert("out.dir", self.out_dir.display().to_string());
        m.insert("p.list", p_list.join(","));
        m.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    pub fn hash(&self) -> String {
        sha256_hex(self.canonical().as_bytes())
    }

    pub fn form_data(&self) -> Result<FormData> {
        let grid = self.edge.grid();
        match &self.data {
            DataSource::Preset(p) => Ok(FormData::preset(*p, grid)),
            DataSource::File(path) => {
                let c = Container::read(path)?;
                if c.grid != grid {
                    return Err(EdgeError::GridMismatch(format!(
                        "{} holds grid {:?}, config asks for {:?}",
                        path.display(),
                        c.grid,
                        grid
                    )));
                }
                c.form_data()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_keys() {
        let text = "# comment\nalpha = 0.5\ngrid.Lx = 5\ngrid.LY = 4\ngrid.Nx = 16\ngrid.NY = 8\n\
                    taylor.K = 3\nfp.tol = 1e-8\nfp.max_iter = 7\nfit.rmin_cells = 2\nfit.rmax_frac = 0.5\n\
                    fit.degree = 0\ndata.preset = edge_one\nout.dir = res\np.list = 3, 4\n";
        let c = RunConfig::parse(text).unwrap();
        assert_eq!(c.edge.alpha, 0.5);
        assert_eq!((c.edge.nx, c.edge.ny), (16, 8));
        assert_eq!(c.edge.fp_max_iter, 7);
        assert_eq!(c.data, DataSource::Preset(Preset::EdgeOne));
        assert_eq!(c.p_list, vec![3.0, 4.0]);
        assert_eq!(c.fit_window().r_min, 1.0);
        assert_eq!(c.fit_window().r_max, 2.0);
    }

    #[test]
    fn rejects_unknown_duplicate_and_invalid() {
        assert!(RunConfig::parse("alpha = 1\nbogus = 2\n").is_err());
        assert!(RunConfig::parse("alpha = 1\nalpha = 2\n").is_err());
        assert!(RunConfig::parse("alpha = -1\n").is_err());
        assert!(RunConfig::parse("grid.Nx = 12\n").is_err());
        assert!(RunConfig::parse("data.preset = custom_file\n").is_err());
        assert!(RunConfig::parse("data.preset = sphere\n").is_err());
        assert!(RunConfig::parse("alpha 1\n").is_err());
        assert!(RunConfig::parse("fit.rmin_cells = 100\n").is_err());
    }

    #[test]
    fn hash_depends_on_values_not_layout() {
        let a = RunConfig::parse("alpha = 1\ngrid.Nx = 16\n").unwrap();
        let b = RunConfig::parse("grid.Nx=16\n\n# x\nalpha=1.0\n").unwrap();
        let c = RunConfig::parse("alpha = 0\ngrid.Nx = 16\n").unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
    }
}
