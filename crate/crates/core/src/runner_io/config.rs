//! Run configuration: `key = value` lines with dotted section keys and `#`
//! comments. Unknown or unused keys are errors.
//!
//! | key | default |
//! |-----|---------|
//! | `grid.d` | required |
//! | `grid.dims` | required; one value is broadcast to every active axis |
//! | `grid.lengths` | `2π` on each axis; one value is broadcast |
//! | `grid.backend` | `spectral` (or `central_difference`) |
//! | `coefficients.preset` | `none`; `reference` fills every coefficient key |
//! | `coefficients.<scalar>` | required without a preset |
//! | `coefficients.mu_family` | `reference` (`mu_low`) or `power` (`mu_coeff`, `mu_exponent`) |
//! | `coefficients.kappa0_family` | `constant` (`kappa0_value`) or `modulated` (`kappa0_base`, `kappa0_amplitude`) |
//! | `coefficients.nu_family` | `clamp` or `constant` (`nu_value`) |
//! | `coefficients.pe_family` | `cold_stiff` (`pe_cold`, `pe_stiff`) or `power` (`pe_coeff`, `pe_exponent`) |
//! | `initial.profile` | required: `constant`, `manufactured`, `magnetic_mode`, `poisson`, `snapshot` |
//! | `initial.rho`, `initial.theta` | `1` (constant, magnetic_mode) |
//! | `initial.u`, `initial.h` | `0, 0, 0` (constant) |
//! | `initial.amplitude` | `1` (manufactured, magnetic_mode) |
//! | `initial.wavenumber` | `1` (magnetic_mode) |
//! | `initial.r` | `0.5` (poisson) |
//! | `initial.path` | required (snapshot) |
//! | `run.t_final` | required, positive |
//! | `run.output_interval` | `t_final / 10`; must divide `t_final` into at least 2 outputs |
//! | `run.cfl` | `0.4` |
//! | `run.dt` | unset: steps follow the CFL bound; set: fixed step, clipped at outputs |
//! | `run.freeze_velocity` | `false` |
//! | `run.rng_seed` | `0` |
//! | `floors.rho`, `floors.theta` | `1e-8` |
//! | `output.dir` | `out` |
//! | `converge.members` | `4` |
//! | `converge.eps0` | `1/3` |
//! | `converge.t_final` | `run.t_final` |
//! | `converge.outputs` | `8` |
//! | `converge.max_floor_fraction` | `0.01` |
//! | `converge.h_bound` | `10` |

use crate::constitutive::{CoefficientSet, Kappa0Family, MuFamily, NuFamily, PressureFamily};
use crate::dynamics::Physics;
use crate::field_state::profiles::Profile;
use crate::field_state::{Backend, Floors, Grid};
use sha2::{Digest, Sha256};
use std::cell::Cell;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConfigErrorKind {
    Syntax,
    Missing,
    Type,
    Unknown,
    Duplicate,
    Invariant,
}

/// `line` is 1-based; 0 means the key is absent from the text.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{}{message}", if *line > 0 { format!("line {line}: ") } else { String::new() })]
pub struct ConfigError {
    pub kind: ConfigErrorKind,
    pub line: usize,
    pub message: String,
}

type Result<T> = std::result::Result<T, ConfigError>;

fn err<T>(kind: ConfigErrorKind, line: usize, message: impl Into<String>) -> Result<T> {
    Err(ConfigError { kind, line, message: message.into() })
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialData {
    Profile(Profile),
    Snapshot(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergeConfig {
    pub members: usize,
    pub eps0: f64,
    pub t_final: f64,
    pub outputs: usize,
    pub max_floor_fraction: f64,
    pub h_bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub grid: Grid,
    pub backend: Backend,
    pub coeffs: CoefficientSet,
    pub initial: InitialData,
    pub t_final: f64,
    pub output_interval: f64,
    pub cfl: f64,
    pub dt: Option<f64>,
    pub physics: Physics,
    pub rng_seed: u64,
    pub floors: Floors,
    pub output_dir: PathBuf,
    pub converge: ConvergeConfig,
}

struct Entry {
    value: String,
    line: usize,
    used: Cell<bool>,
}

struct Reader {
    entries: BTreeMap<String, Entry>,
}

fn strip_comment(line: &str) -> &str {
    let mut quoted = false;
    for (i, ch) in line.char_indices() {
        match ch {
            '"' => quoted = !quoted,
            '#' if !quoted => return &line[..i],
            _ => {}
        }
    }
    line
}

impl Reader {
    fn new(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = strip_comment(raw).trim();
            if body.is_empty() {
                continue;
            }
            let Some((key, value)) = body.split_once('=') else {
                return err(ConfigErrorKind::Syntax, line, format!("expected `key = value`, found `{body}`"));
            };
            let key = key.trim();
            let valid = !key.is_empty()
                && key.split('.').all(|part| {
                    !part.is_empty() && part.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
                });
            if !valid {
                return err(ConfigErrorKind::Syntax, line, format!("invalid key `{key}`"));
            }
            let entry = Entry { value: value.trim().to_string(), line, used: Cell::new(false) };
            if let Some(prev) = entries.insert(key.to_string(), entry) {
                return err(ConfigErrorKind::Duplicate, line, format!("key `{key}` already set on line {}", prev.line));
            }
        }
        Ok(Self { entries })
    }

    fn line(&self, key: &str) -> usize {
        self.entries.get(key).map_or(0, |e| e.line)
    }

    fn raw(&self, key: &str) -> Option<(&str, usize)> {
        self.entries.get(key).map(|e| {
            e.used.set(true);
            (e.value.as_str(), e.line)
        })
    }

    fn parsed<T>(&self, key: &str, what: &str, f: impl Fn(&str) -> Option<T>) -> Result<Option<T>> {
        match self.raw(key) {
            None => Ok(None),
            Some((v, line)) => match f(v) {
                Some(x) => Ok(Some(x)),
                None => err(ConfigErrorKind::Type, line, format!("`{key}` expects {what}, found `{v}`")),
            },
        }
    }

    fn required<T>(&self, key: &str, value: Option<T>) -> Result<T> {
        match value {
            Some(v) => Ok(v),
            None => err(ConfigErrorKind::Missing, 0, format!("missing required key `{key}`")),
        }
    }

    fn float(&self, key: &str) -> Result<Option<f64>> {
        self.parsed(key, "a number", |v| v.parse::<f64>().ok().filter(|x| x.is_finite()))
    }

    fn float_or(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.float(key)?.unwrap_or(default))
    }

    fn uint(&self, key: &str) -> Result<Option<u64>> {
        self.parsed(key, "a nonnegative integer", |v| v.parse::<u64>().ok())
    }

    fn boolean(&self, key: &str) -> Result<Option<bool>> {
        self.parsed(key, "`true` or `false`", |v| match v {
            "true" => Some(true),
            "false" => Some(false),
            _ => None,
        })
    }

    fn string(&self, key: &str) -> Option<(String, usize)> {
        self.raw(key).map(|(v, line)| {
            let s = v.strip_prefix('"').and_then(|s| s.strip_suffix('"')).unwrap_or(v);
            (s.to_string(), line)
        })
    }

    fn floats(&self, key: &str) -> Result<Option<Vec<f64>>> {
        self.parsed(key, "a comma-separated list of numbers", |v| {
            let inner = v.strip_prefix('[').and_then(|s| s.strip_suffix(']')).unwrap_or(v);
            inner
                .split(',')
                .map(|s| s.trim().parse::<f64>().ok().filter(|x| x.is_finite()))
                .collect::<Option<Vec<_>>>()
        })
    }

    fn vec3(&self, key: &str, default: [f64; 3]) -> Result<[f64; 3]> {
        match self.floats(key)? {
            None => Ok(default),
            Some(v) if v.len() == 3 => Ok([v[0], v[1], v[2]]),
            Some(v) => err(ConfigErrorKind::Type, self.line(key), format!("`{key}` needs 3 values, found {}", v.len())),
        }
    }

    fn choice<'a>(&self, key: &str, options: &[&'a str], default: Option<&'a str>) -> Result<(&'a str, usize)> {
        match self.string(key) {
            None => match default {
                Some(d) => Ok((d, 0)),
                None => err(ConfigErrorKind::Missing, 0, format!("missing required key `{key}`")),
            },
            Some((v, line)) => match options.iter().find(|o| **o == v) {
                Some(o) => Ok((o, line)),
                None => err(ConfigErrorKind::Type, line, format!("`{key}` must be one of {options:?}, found `{v}`")),
            },
        }
    }

    fn reject_unused(&self, prefix: &str) -> Result<()> {
        let mut unused: Vec<(&String, &Entry)> =
            self.entries.iter().filter(|(k, e)| k.starts_with(prefix) && !e.used.get()).collect();
        unused.sort_by_key(|(_, e)| e.line);
        match unused.first() {
            None => Ok(()),
            Some((k, e)) => err(
                ConfigErrorKind::Unknown,
                e.line,
                format!("unknown key `{k}` (or not used by the selected options)"),
            ),
        }
    }
}

const SCALAR_KEYS: [&str; 15] = [
    "beta",
    "m",
    "density_scale",
    "c0",
    "c1",
    "conductivity_exponent",
    "c2",
    "cold_exponent",
    "stiff_exponent",
    "pressure_scale",
    "c3",
    "c4",
    "c5",
    "c6",
    "specific_heat",
];

fn scalar_slot<'a>(c: &'a mut CoefficientSet, name: &str) -> &'a mut f64 {
    match name {
        "beta" => &mut c.beta,
        "m" => &mut c.m,
        "density_scale" => &mut c.density_scale,
        "c0" => &mut c.c0,
        "c1" => &mut c.c1,
        "conductivity_exponent" => &mut c.conductivity_exponent,
        "c2" => &mut c.c2,
        "cold_exponent" => &mut c.cold_exponent,
        "stiff_exponent" => &mut c.stiff_exponent,
        "pressure_scale" => &mut c.pressure_scale,
        "c3" => &mut c.c3,
        "c4" => &mut c.c4,
        "c5" => &mut c.c5,
        "c6" => &mut c.c6,
        "specific_heat" => &mut c.specific_heat,
        _ => unreachable!("unknown coefficient slot {name}"),
    }
}

fn read_coefficients(r: &Reader) -> Result<CoefficientSet> {
    let (preset, _) = r.choice("coefficients.preset", &["none", "reference"], Some("none"))?;
    let reference = preset == "reference";
    let base = CoefficientSet::reference();
    // Reference defaults apply only under the reference preset.
    let num = |key: &str, fallback: Option<f64>| -> Result<f64> {
        let k = format!("coefficients.{key}");
        let v = r.float(&k)?;
        match (v, fallback.filter(|_| reference)) {
            (Some(v), _) => Ok(v),
            (None, Some(d)) => Ok(d),
            (None, None) => r.required(&k, None),
        }
    };
    let mut c = base;
    for name in SCALAR_KEYS {
        let mut b = base;
        *scalar_slot(&mut c, name) = num(name, Some(*scalar_slot(&mut b, name)))?;
    }
    let fam_default = |d: &'static str| if reference { Some(d) } else { None };
    let ref_mu_low = match base.mu_family {
        MuFamily::Reference { low_coeff } => Some(low_coeff),
        MuFamily::Power { .. } => None,
    };
    let ref_kappa0 = match base.kappa0_family {
        Kappa0Family::Constant { value } => Some(value),
        Kappa0Family::Modulated { .. } => None,
    };
    let (ref_cold, ref_stiff) = match base.pe_family {
        PressureFamily::ColdStiff { cold, stiff } => (Some(cold), Some(stiff)),
        PressureFamily::Power { .. } => (None, None),
    };
    let (mu, _) = r.choice("coefficients.mu_family", &["reference", "power"], fam_default("reference"))?;
    c.mu_family = match mu {
        "reference" => MuFamily::Reference { low_coeff: num("mu_low", ref_mu_low)? },
        _ => MuFamily::Power { coeff: num("mu_coeff", None)?, exponent: num("mu_exponent", None)? },
    };
    let (kappa0, _) = r.choice("coefficients.kappa0_family", &["constant", "modulated"], fam_default("constant"))?;
    c.kappa0_family = match kappa0 {
        "constant" => Kappa0Family::Constant { value: num("kappa0_value", ref_kappa0)? },
        _ => Kappa0Family::Modulated { base: num("kappa0_base", None)?, amplitude: num("kappa0_amplitude", None)? },
    };
    let (nu, _) = r.choice("coefficients.nu_family", &["clamp", "constant"], fam_default("clamp"))?;
    c.nu_family = match nu {
        "clamp" => NuFamily::Clamp,
        _ => NuFamily::Constant { value: num("nu_value", None)? },
    };
    let (pe, _) = r.choice("coefficients.pe_family", &["cold_stiff", "power"], fam_default("cold_stiff"))?;
    c.pe_family = match pe {
        "cold_stiff" => PressureFamily::ColdStiff { cold: num("pe_cold", ref_cold)?, stiff: num("pe_stiff", ref_stiff)? },
        _ => PressureFamily::Power { coeff: num("pe_coeff", None)?, exponent: num("pe_exponent", None)? },
    };
    Ok(c)
}

/// Key whose value a coefficient invariant message refers to.
fn invariant_key(message: &str) -> &'static str {
    const NAMES: [(&str, &str); 16] = [
        ("beta =", "coefficients.beta"),
        ("m =", "coefficients.m"),
        ("a =", "coefficients.conductivity_exponent"),
        ("l =", "coefficients.cold_exponent"),
        ("k =", "coefficients.stiff_exponent"),
        ("A0 =", "coefficients.pressure_scale"),
        ("A =", "coefficients.density_scale"),
        ("c0 =", "coefficients.c0"),
        ("c1 =", "coefficients.c1"),
        ("c2 =", "coefficients.c2"),
        ("c3 =", "coefficients.c3"),
        ("c4 =", "coefficients.c4"),
        ("c5 =", "coefficients.c5"),
        ("c6 =", "coefficients.c6"),
        ("c_upsilon =", "coefficients.specific_heat"),
        ("kappa0", "coefficients.kappa0_family"),
    ];
    NAMES.iter().find(|(p, _)| message.starts_with(p)).map_or("coefficients.preset", |(_, k)| k)
}

/// Reads only the `coefficients.*` keys and skips the parameter invariants,
/// so that a hypothesis report can still be produced for a set that
/// violates them.
pub fn parse_coefficients(text: &str) -> Result<CoefficientSet> {
    let r = Reader::new(text)?;
    let c = read_coefficients(&r)?;
    r.reject_unused("coefficients.")?;
    Ok(c)
}

fn read_profile(r: &Reader) -> Result<InitialData> {
    let (name, _) = r.choice(
        "initial.profile",
        &["constant", "manufactured", "magnetic_mode", "poisson", "snapshot"],
        None,
    )?;
    let positive = |key: &str, v: f64| -> Result<f64> {
        if v > 0.0 {
            Ok(v)
        } else {
            err(ConfigErrorKind::Invariant, r.line(key), format!("`{key}` must be positive"))
        }
    };
    Ok(match name {
        "constant" => InitialData::Profile(Profile::Constant {
            rho: positive("initial.rho", r.float_or("initial.rho", 1.0)?)?,
            u: r.vec3("initial.u", [0.0; 3])?,
            theta: positive("initial.theta", r.float_or("initial.theta", 1.0)?)?,
            h: r.vec3("initial.h", [0.0; 3])?,
        }),
        "manufactured" => {
            let a = r.float_or("initial.amplitude", 1.0)?;
            if !(a.abs() < 1.0 / 0.3 && a.abs() < 5.0) {
                return err(ConfigErrorKind::Invariant, r.line("initial.amplitude"), "amplitude must keep rho and theta positive (|a| < 3.33)");
            }
            InitialData::Profile(Profile::Manufactured { amplitude: a })
        }
        "magnetic_mode" => {
            let k = r.uint("initial.wavenumber")?.unwrap_or(1);
            let wavenumber = match u32::try_from(k) {
                Ok(k) if k >= 1 => k,
                _ => return err(ConfigErrorKind::Invariant, r.line("initial.wavenumber"), "wavenumber must be at least 1"),
            };
            InitialData::Profile(Profile::MagneticMode {
                wavenumber,
                amplitude: r.float_or("initial.amplitude", 1.0)?,
                rho: positive("initial.rho", r.float_or("initial.rho", 1.0)?)?,
                theta: positive("initial.theta", r.float_or("initial.theta", 1.0)?)?,
            })
        }
        "poisson" => {
            let rr = r.float_or("initial.r", 0.5)?;
            if !(rr.abs() < 1.0) {
                return err(ConfigErrorKind::Invariant, r.line("initial.r"), "poisson radius must satisfy |r| < 1");
            }
            InitialData::Profile(Profile::Poisson { r: rr })
        }
        _ => {
            let path = r.string("initial.path").map(|(p, _)| PathBuf::from(p));
            InitialData::Snapshot(r.required("initial.path", path)?)
        }
    })
}

/// Parses and fully validates a run configuration.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let r = Reader::new(text)?;
    let inv = |key: &str, msg: String| -> Result<()> { err(ConfigErrorKind::Invariant, r.line(key), msg) };

    let d = r.uint("grid.d")?;
    let d = r.required("grid.d", d)? as usize;
    let dims = r.floats("grid.dims")?;
    let dims = r.required("grid.dims", dims)?;
    let dims: Vec<usize> = match dims.len() {
        1 => vec![dims[0] as usize; d],
        _ => dims.iter().map(|v| *v as usize).collect(),
    };
    let lengths = match r.floats("grid.lengths")? {
        None => [std::f64::consts::TAU; 3],
        Some(v) if v.len() == 1 => [v[0]; 3],
        Some(v) if v.len() == 3 => [v[0], v[1], v[2]],
        Some(_) => return err(ConfigErrorKind::Type, r.line("grid.lengths"), "`grid.lengths` needs 1 or 3 values"),
    };
    let grid = match Grid::new(d, &dims, lengths) {
        Ok(g) => g,
        Err(e) => return err(ConfigErrorKind::Invariant, r.line("grid.dims").max(r.line("grid.d")), e.to_string()),
    };
    let (backend, _) = r.choice("grid.backend", &["spectral", "central_difference"], Some("spectral"))?;
    let backend = if backend == "spectral" { Backend::Spectral } else { Backend::CentralDifference };

    let coeffs = read_coefficients(&r)?;
    if let Err(e) = coeffs.check_invariants() {
        let message = e.to_string();
        let line = r.line(invariant_key(message.trim_start_matches("invalid coefficient parameter: ")));
        return err(ConfigErrorKind::Invariant, line, message);
    }
    let initial = read_profile(&r)?;

    let t_final = r.float("run.t_final")?;
    let t_final = r.required("run.t_final", t_final)?;
    if !(t_final > 0.0) {
        inv("run.t_final", format!("t_final = {t_final} must be positive"))?;
    }
    let output_interval = r.float_or("run.output_interval", t_final / 10.0)?;
    let count = t_final / output_interval;
    if !(output_interval > 0.0 && count.round() >= 2.0 && (count - count.round()).abs() <= 1e-9 * count.round()) {
        inv("run.output_interval", format!("output_interval = {output_interval} must divide t_final into at least 2 outputs"))?;
    }
    let cfl = r.float_or("run.cfl", 0.4)?;
    if !(cfl > 0.0 && cfl <= 1.0) {
        inv("run.cfl", format!("cfl = {cfl} must lie in (0, 1]"))?;
    }
    let dt = r.float("run.dt")?;
    if let Some(v) = dt {
        if !(v > 0.0) {
            inv("run.dt", format!("dt = {v} must be positive"))?;
        }
    }
    let physics = Physics { freeze_velocity: r.boolean("run.freeze_velocity")?.unwrap_or(false) };
    let rng_seed = r.uint("run.rng_seed")?.unwrap_or(0);
    let floors = Floors { rho: r.float_or("floors.rho", 1e-8)?, theta: r.float_or("floors.theta", 1e-8)? };
    for (key, v) in [("floors.rho", floors.rho), ("floors.theta", floors.theta)] {
        if !(v > 0.0) {
            inv(key, format!("`{key}` must be positive"))?;
        }
    }
    let output_dir = PathBuf::from(r.string("output.dir").map_or_else(|| "out".to_string(), |(s, _)| s));

    let members = r.uint("converge.members")?.unwrap_or(4) as usize;
    if members < 2 {
        inv("converge.members", "converge.members must be at least 2".into())?;
    }
    let eps0 = r.float_or("converge.eps0", 1.0 / 3.0)?;
    if !(eps0 > 0.0) {
        inv("converge.eps0", "converge.eps0 must be positive".into())?;
    }
    let conv_t = r.float_or("converge.t_final", t_final)?;
    if !(conv_t >= 0.0) {
        inv("converge.t_final", "converge.t_final must be nonnegative".into())?;
    }
    let outputs = r.uint("converge.outputs")?.unwrap_or(8) as usize;
    if conv_t > 0.0 && outputs == 0 {
        inv("converge.outputs", "converge.outputs must be positive".into())?;
    }
    let max_floor_fraction = r.float_or("converge.max_floor_fraction", 0.01)?;
    if !(0.0..=1.0).contains(&max_floor_fraction) {
        inv("converge.max_floor_fraction", "converge.max_floor_fraction must lie in [0, 1]".into())?;
    }
    let h_bound = r.float_or("converge.h_bound", 10.0)?;
    if !(h_bound > 0.0) {
        inv("converge.h_bound", "converge.h_bound must be positive".into())?;
    }

    r.reject_unused("")?;
    Ok(RunConfig {
        grid,
        backend,
        coeffs,
        initial,
        t_final,
        output_interval,
        cfl,
        dt,
        physics,
        rng_seed,
        floors,
        output_dir,
        converge: ConvergeConfig { members, eps0, t_final: conv_t, outputs, max_floor_fraction, h_bound },
    })
}

fn list(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", ")
}

impl RunConfig {
    /// Number of output intervals in `[0, t_final]`.
    pub fn output_count(&self) -> usize {
        (self.t_final / self.output_interval).round() as usize
    }

    fn semantic_text(&self) -> String {
        let mut s = String::new();
        let g = &self.grid;
        let _ = writeln!(s, "grid.d = {}", g.d());
        let dims: Vec<String> = g.dims()[..g.d()].iter().map(usize::to_string).collect();
        let _ = writeln!(s, "grid.dims = {}", dims.join(", "));
        let _ = writeln!(s, "grid.lengths = {}", list(&g.lengths()));
        let backend = match self.backend {
            Backend::Spectral => "spectral",
            Backend::CentralDifference => "central_difference",
        };
        let _ = writeln!(s, "grid.backend = {backend}");

        let mut c = self.coeffs;
        s.push_str("coefficients.preset = none\n");
        for name in SCALAR_KEYS {
            let _ = writeln!(s, "coefficients.{name} = {:?}", *scalar_slot(&mut c, name));
        }
        match c.mu_family {
            MuFamily::Reference { low_coeff } => {
                let _ = write!(s, "coefficients.mu_family = reference\ncoefficients.mu_low = {low_coeff:?}\n");
            }
            MuFamily::Power { coeff, exponent } => {
                let _ = write!(
                    s,
                    "coefficients.mu_family = power\ncoefficients.mu_coeff = {coeff:?}\ncoefficients.mu_exponent = {exponent:?}\n"
                );
            }
        }
        match c.kappa0_family {
            Kappa0Family::Constant { value } => {
                let _ = write!(s, "coefficients.kappa0_family = constant\ncoefficients.kappa0_value = {value:?}\n");
            }
            Kappa0Family::Modulated { base, amplitude } => {
                let _ = write!(
                    s,
                    "coefficients.kappa0_family = modulated\ncoefficients.kappa0_base = {base:?}\ncoefficients.kappa0_amplitude = {amplitude:?}\n"
                );
            }
        }
        match c.nu_family {
            NuFamily::Clamp => s.push_str("coefficients.nu_family = clamp\n"),
            NuFamily::Constant { value } => {
                let _ = write!(s, "coefficients.nu_family = constant\ncoefficients.nu_value = {value:?}\n");
            }
        }
        match c.pe_family {
            PressureFamily::ColdStiff { cold, stiff } => {
                let _ = write!(
                    s,
                    "coefficients.pe_family = cold_stiff\ncoefficients.pe_cold = {cold:?}\ncoefficients.pe_stiff = {stiff:?}\n"
                );
            }
            PressureFamily::Power { coeff, exponent } => {
                let _ = write!(
                    s,
                    "coefficients.pe_family = power\ncoefficients.pe_coeff = {coeff:?}\ncoefficients.pe_exponent = {exponent:?}\n"
                );
            }
        }

        match &self.initial {
            InitialData::Profile(Profile::Constant { rho, u, theta, h }) => {
                let _ = write!(
                    s,
                    "initial.profile = constant\ninitial.rho = {rho:?}\ninitial.u = {}\ninitial.theta = {theta:?}\ninitial.h = {}\n",
                    list(u),
                    list(h)
                );
            }
            InitialData::Profile(Profile::Manufactured { amplitude }) => {
                let _ = write!(s, "initial.profile = manufactured\ninitial.amplitude = {amplitude:?}\n");
            }
            InitialData::Profile(Profile::MagneticMode { wavenumber, amplitude, rho, theta }) => {
                let _ = write!(
                    s,
                    "initial.profile = magnetic_mode\ninitial.wavenumber = {wavenumber}\ninitial.amplitude = {amplitude:?}\ninitial.rho = {rho:?}\ninitial.theta = {theta:?}\n"
                );
            }
            InitialData::Profile(Profile::Poisson { r }) => {
                let _ = write!(s, "initial.profile = poisson\ninitial.r = {r:?}\n");
            }
            InitialData::Snapshot(p) => {
                let _ = write!(s, "initial.profile = snapshot\ninitial.path = \"{}\"\n", p.display());
            }
        }

        let _ = writeln!(s, "run.t_final = {:?}", self.t_final);
        let _ = writeln!(s, "run.output_interval = {:?}", self.output_interval);
        let _ = writeln!(s, "run.cfl = {:?}", self.cfl);
        if let Some(dt) = self.dt {
            let _ = writeln!(s, "run.dt = {dt:?}");
        }
        let _ = writeln!(s, "run.freeze_velocity = {}", self.physics.freeze_velocity);
        let _ = writeln!(s, "run.rng_seed = {}", self.rng_seed);
        let _ = writeln!(s, "floors.rho = {:?}", self.floors.rho);
        let _ = writeln!(s, "floors.theta = {:?}", self.floors.theta);
        let cv = &self.converge;
        let _ = writeln!(s, "converge.members = {}", cv.members);
        let _ = writeln!(s, "converge.eps0 = {:?}", cv.eps0);
        let _ = writeln!(s, "converge.t_final = {:?}", cv.t_final);
        let _ = writeln!(s, "converge.outputs = {}", cv.outputs);
        let _ = writeln!(s, "converge.max_floor_fraction = {:?}", cv.max_floor_fraction);
        let _ = writeln!(s, "converge.h_bound = {:?}", cv.h_bound);
        s
    }

    /// Canonical text: every key written explicitly in a fixed order.
    pub fn to_text(&self) -> String {
        format!("{}output.dir = \"{}\"\n", self.semantic_text(), self.output_dir.display())
    }

    /// SHA-256 of the canonical text without the output directory.
    pub fn config_hash(&self) -> String {
        let digest = Sha256::digest(self.semantic_text().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}
