//! Flat `key = value` experiment specification.
//!
//! ```text
//! topology = grid 7          # grid N | criscross N | linechords N K | random N P
//! mode = interaction         # interaction | field
//! alpha = 0.2, 0.4, 0.6
//! decomp = minore            # minore | dbdim | grid | none
//! r = 3                      # minore rounds
//! lambda = 3, 4, 5           # minore periods
//! eps = 0.25                 # dbdim radius parameter
//! k = 2, 3                   # dbdim truncation levels or grid slab widths
//! trials = 40
//! seed = 1
//! exact = true               # compare with an exact oracle when feasible
//! max_states = 16777216      # enumeration budget
//! ```

use std::str::FromStr;

use super::{gen_random, PotentialMode};
use crate::error::{Error, Result};
use crate::exact::DEFAULT_MAX_STATES;
use crate::format::perr;
use crate::graph::Graph;
use crate::lattice::GridLayout;
use crate::rng;
use crate::saw::saw_lower_bound_family;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Topology {
    Grid(usize),
    Criscross(usize),
    LineChords { n: usize, k: usize },
    Random { n: usize, p: f64 },
}

impl Topology {
    /// The graph; random topologies are drawn from a stream of `seed`.
    pub fn graph(&self, seed: u64) -> Result<Graph> {
        Ok(match *self {
            Topology::Grid(n) => GridLayout::grid(n, n).graph(),
            Topology::Criscross(n) => GridLayout::criscross(n, n).graph(),
            Topology::LineChords { n, k } => saw_lower_bound_family(n, k)?,
            Topology::Random { n, p } => {
                let s: u64 = rand::Rng::gen(&mut rng::stream(seed, u32::MAX, 0));
                gen_random(n, p, s)
            }
        })
    }

    pub fn layout(&self) -> Option<GridLayout> {
        match *self {
            Topology::Grid(n) => Some(GridLayout::grid(n, n)),
            Topology::Criscross(n) => Some(GridLayout::criscross(n, n)),
            _ => None,
        }
    }

    pub fn label(&self) -> String {
        match *self {
            Topology::Grid(n) => format!("grid {n}"),
            Topology::Criscross(n) => format!("criscross {n}"),
            Topology::LineChords { n, k } => format!("linechords {n} {k}"),
            Topology::Random { n, p } => format!("random {n} {p}"),
        }
    }
}

impl FromStr for Topology {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t: Vec<&str> = s.split_whitespace().collect();
        let num = |i: usize| -> Result<usize> {
            t.get(i)
                .and_then(|x| x.parse().ok())
                .ok_or_else(|| Error::Domain(format!("bad topology `{s}`")))
        };
        let topo = match t.first().copied() {
            Some("grid") if t.len() == 2 => Topology::Grid(num(1)?),
            Some("criscross") if t.len() == 2 => Topology::Criscross(num(1)?),
            Some("linechords") if t.len() == 3 => Topology::LineChords { n: num(1)?, k: num(2)? },
            Some("random") if t.len() == 3 => Topology::Random {
                n: num(1)?,
                p: t[2]
                    .parse()
                    .map_err(|_| Error::Domain(format!("bad edge probability in `{s}`")))?,
            },
            _ => return Err(Error::Domain(format!("unknown topology `{s}`"))),
        };
        match topo {
            Topology::Grid(n) | Topology::Criscross(n) if n < 2 => {
                Err(Error::Domain("lattice side must be at least 2".into()))
            }
            Topology::Random { p, .. } if !(0.0..=1.0).contains(&p) => {
                Err(Error::Domain("edge probability must lie in [0, 1]".into()))
            }
            _ => Ok(topo),
        }
    }
}

/// Decomposition scheme and the parameter values swept over.
#[derive(Debug, Clone, PartialEq)]
pub enum DecompFamily {
    MinorE {
        r: usize,
        lambdas: Vec<usize>,
    },
    DbDim {
        eps: f64,
        ks: Vec<usize>,
    },
    /// Slab offsets are drawn uniformly per trial.
    Grid {
        ks: Vec<usize>,
    },
    None,
}

impl DecompFamily {
    pub fn name(&self) -> &'static str {
        match self {
            DecompFamily::MinorE { .. } => "minore",
            DecompFamily::DbDim { .. } => "dbdim",
            DecompFamily::Grid { .. } => "grid",
            DecompFamily::None => "none",
        }
    }

    /// Swept parameter values (`Λ`, `K` or `k`); `[0]` for no decomposition.
    pub fn params(&self) -> Vec<usize> {
        match self {
            DecompFamily::MinorE { lambdas, .. } => lambdas.clone(),
            DecompFamily::DbDim { ks, .. } | DecompFamily::Grid { ks } => ks.clone(),
            DecompFamily::None => vec![0],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub topology: Topology,
    pub mode: PotentialMode,
    pub alphas: Vec<f64>,
    pub decomp: DecompFamily,
    pub trials: usize,
    pub seed: u64,
    pub exact: bool,
    pub max_states: u128,
}

fn list<T: FromStr>(v: &str, line: usize) -> Result<Vec<T>> {
    v.split(',')
        .map(|x| {
            x.trim()
                .parse()
                .map_err(|_| perr(line, &format!("invalid list item `{}`", x.trim())))
        })
        .collect()
}

impl ExperimentSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let mut topology = None;
        let mut mode = PotentialMode::VaryingInteraction;
        let mut alphas = None;
        let mut decomp_name = "none".to_string();
        let (mut r, mut lambdas, mut eps, mut ks) = (3usize, None, None, None);
        let (mut trials, mut seed, mut exact, mut max_states) = (1usize, 0u64, true, DEFAULT_MAX_STATES);
        for (i, raw) in text.lines().enumerate() {
            let ln = i + 1;
            let l = raw.split('#').next().unwrap_or("").trim();
            if l.is_empty() {
                continue;
            }
            let (key, value) = l
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| perr(ln, "expected `key = value`"))?;
            let one = |v: &str| perr(ln, &format!("invalid value `{v}` for `{key}`"));
            match key {
                "topology" => topology = Some(value.parse::<Topology>().map_err(|e| perr(ln, &e.to_string()))?),
                "mode" => {
                    mode = match value {
                        "interaction" => PotentialMode::VaryingInteraction,
                        "field" => PotentialMode::VaryingField,
                        _ => return Err(one(value)),
                    }
                }
                "alpha" => alphas = Some(list::<f64>(value, ln)?),
                "decomp" => decomp_name = value.to_string(),
                "r" => r = value.parse().map_err(|_| one(value))?,
                "lambda" => lambdas = Some(list::<usize>(value, ln)?),
                "eps" => eps = Some(value.parse::<f64>().map_err(|_| one(value))?),
                "k" => ks = Some(list::<usize>(value, ln)?),
                "trials" => trials = value.parse().map_err(|_| one(value))?,
                "seed" => seed = value.parse().map_err(|_| one(value))?,
                "exact" => exact = value.parse().map_err(|_| one(value))?,
                "max_states" => max_states = value.parse().map_err(|_| one(value))?,
                _ => return Err(perr(ln, &format!("unknown key `{key}`"))),
            }
        }
        let missing = |what: &str| Error::Domain(format!("experiment spec is missing `{what}`"));
        let decomp = match decomp_name.as_str() {
            "minore" => DecompFamily::MinorE {
                r,
                lambdas: lambdas.ok_or_else(|| missing("lambda"))?,
            },
            "dbdim" => DecompFamily::DbDim {
                eps: eps.ok_or_else(|| missing("eps"))?,
                ks: ks.ok_or_else(|| missing("k"))?,
            },
            "grid" => DecompFamily::Grid {
                ks: ks.ok_or_else(|| missing("k"))?,
            },
            "none" => DecompFamily::None,
            other => return Err(Error::Domain(format!("unknown decomposition `{other}`"))),
        };
        let spec = ExperimentSpec {
            topology: topology.ok_or_else(|| missing("topology"))?,
            mode,
            alphas: alphas.ok_or_else(|| missing("alpha"))?,
            decomp,
            trials,
            seed,
            exact,
            max_states,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.alphas.is_empty() || self.decomp.params().is_empty() {
            return Err(Error::Domain("parameter grids must be non-empty".into()));
        }
        if self.alphas.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
            return Err(Error::Domain("alpha values must be finite and non-negative".into()));
        }
        if self.trials == 0 {
            return Err(Error::Domain("trials must be at least 1".into()));
        }
        match &self.decomp {
            DecompFamily::MinorE { r, lambdas } if *r == 0 || lambdas.contains(&0) => {
                Err(Error::Domain("minore needs r >= 1 and lambda >= 1".into()))
            }
            DecompFamily::DbDim { eps, ks } if !(*eps > 0.0 && *eps < 1.0) || ks.contains(&0) => {
                Err(Error::Domain("dbdim needs eps in (0, 1) and K >= 1".into()))
            }
            DecompFamily::Grid { ks } => match self.topology.layout() {
                None => Err(Error::UnsupportedTopology(
                    "slab decomposition needs a grid or cris-cross topology".into(),
                )),
                Some(l) if ks.iter().any(|&k| k == 0 || k > l.width) => {
                    Err(Error::Domain(format!("slab width must lie in 1..={}", l.width)))
                }
                _ => Ok(()),
            },
            _ => Ok(()),
        }
    }
}
