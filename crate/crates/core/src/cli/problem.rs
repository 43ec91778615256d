use std::f64::consts::PI;
use std::path::Path;

use rand::Rng;

use crate::integrate::problems::{Builtin, ProblemParams};
use crate::polyfield::io::load_field;
use crate::polyfield::VectorField;

use super::CliError;

/// A resolved `--problem`: a built-in name or a JSON problem file.
#[derive(Clone, Debug)]
pub struct Problem {
    pub name: String,
    pub builtin: Option<Builtin>,
    pub field: VectorField,
}

impl Problem {
    pub fn resolve(name_or_path: &str, params: &ProblemParams) -> Result<Self, CliError> {
        if let Ok(builtin) = name_or_path.parse::<Builtin>() {
            let field = builtin
                .field(params)
                .map_err(|e| CliError::Input(format!("{name_or_path}: {e}")))?;
            return Ok(Self {
                name: builtin.name().to_string(),
                builtin: Some(builtin),
                field,
            });
        }
        let path = Path::new(name_or_path);
        if !path.exists() {
            return Err(CliError::Input(format!(
                "{name_or_path:?} is neither a built-in problem (quad_stokes, cubic_stokes, laurent) nor an existing file"
            )));
        }
        let field =
            load_field(path).map_err(|e| CliError::Input(format!("{name_or_path}: {e}")))?;
        Ok(Self {
            name: name_or_path.to_string(),
            builtin: None,
            field,
        })
    }

    pub fn dim(&self) -> usize {
        self.field.dim()
    }

    pub fn default_h(&self) -> f64 {
        self.builtin.map_or(0.01, Builtin::default_h)
    }

    pub fn default_horizon(&self) -> f64 {
        self.builtin.map_or(1.0, Builtin::default_horizon)
    }

    /// `--x0` if given, else the built-in initial condition.
    pub fn initial_state(&self, x0: Option<&[f64]>) -> Result<Vec<f64>, CliError> {
        let x0 = match (x0, self.builtin) {
            (Some(x), _) => x.to_vec(),
            (None, Some(b)) => b.default_x0(),
            (None, None) => {
                return Err(CliError::Usage("--x0 is required for problem files".into()));
            }
        };
        if x0.len() != self.dim() {
            return Err(CliError::Usage(format!(
                "--x0 has {} entries, problem {} has dimension {}",
                x0.len(),
                self.name,
                self.dim()
            )));
        }
        Ok(x0)
    }

    /// Where verification points are drawn from.
    pub fn sample_region(&self) -> SampleRegion {
        match self.builtin {
            Some(Builtin::QuadStokes | Builtin::CubicStokes) => SampleRegion::UnitBall,
            Some(Builtin::Laurent) => SampleRegion::Orthants {
                lo: 0.05,
                hi: 1.0,
                signed: true,
            },
            None => {
                let terms = || self.field.components().iter().flat_map(|c| c.terms());
                if terms().any(|(k, _)| !k.is_integral()) {
                    SampleRegion::Orthants {
                        lo: 0.05,
                        hi: 1.0,
                        signed: false,
                    }
                } else if terms().any(|(k, _)| k.exps().iter().any(|e| *e.numer() < 0)) {
                    SampleRegion::Orthants {
                        lo: 0.05,
                        hi: 1.0,
                        signed: true,
                    }
                } else {
                    SampleRegion::UnitBall
                }
            }
        }
    }
}

/// Sampling region for verification points.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SampleRegion {
    UnitBall,
    /// `lo <= |x_i| <= hi`, in every orthant when `signed`, else only the positive one.
    Orthants {
        lo: f64,
        hi: f64,
        signed: bool,
    },
}

impl SampleRegion {
    pub fn sample<R: Rng>(&self, dim: usize, rng: &mut R) -> Vec<f64> {
        match *self {
            SampleRegion::UnitBall => loop {
                let x: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
                if x.iter().map(|v| v * v).sum::<f64>() < 1.0 {
                    return x;
                }
            },
            SampleRegion::Orthants { lo, hi, signed } => (0..dim)
                .map(|_| {
                    let v = rng.gen_range(lo..hi);
                    if signed && rng.gen_bool(0.5) {
                        -v
                    } else {
                        v
                    }
                })
                .collect(),
        }
    }
}

/// Angle in radians; a trailing `pi` (or `π`) multiplies by pi, so `0.275pi` works.
pub fn parse_angle(s: &str) -> Result<f64, String> {
    let t = s.trim();
    let (num, scale) = match t.strip_suffix("pi").or_else(|| t.strip_suffix('π')) {
        Some(rest) => (rest.trim().trim_end_matches('*'), PI),
        None => (t, 1.0),
    };
    let value = if num.is_empty() {
        1.0
    } else {
        num.parse::<f64>()
            .map_err(|e| format!("invalid angle {s:?}: {e}"))?
    };
    Ok(value * scale)
}

/// A point given on the command line as a comma-separated list.
#[derive(Clone, Debug, PartialEq)]
pub struct Point(pub Vec<f64>);

impl std::str::FromStr for Point {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_point(s).map(Point)
    }
}

/// Comma-separated list of reals.
pub fn parse_point(s: &str) -> Result<Vec<f64>, String> {
    let point = s
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|e| format!("invalid coordinate {p:?}: {e}"))
        })
        .collect::<Result<Vec<f64>, String>>()?;
    if point.iter().any(|v| !v.is_finite()) {
        return Err(format!("non-finite coordinate in {s:?}"));
    }
    Ok(point)
}
