//! Seeded batch experiments behind the `livsic` binary.
//!
//! Each command reads an [`ExperimentConfig`], writes JSON artifacts into an
//! output directory and returns whether its checks passed. Reports carry a
//! hash of the effective config; wall-clock timings live under a separate
//! `timings` key so that reruns can be compared byte for byte without them.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::cocycle::{
    generate_solution, poo_check, CocycleSpec, FieldGerm, FieldSystem, GeneratorConfig, GermObservable, PooReport,
};
use crate::dynamics::{BaseSystem, DenseOrbit, FullShift, SystemConfig, ToralAutomorphism, TorusPoint};
use crate::error::{Error, Result};
use crate::germ::Germ;
use crate::majorant::{
    certify_kappa, check_majorant_domination, solve_g_scaled, CocycleBounds, DominationReport, MajorantTable,
};
use crate::series::{multiindices_between, MultiIndex};
use crate::solver::{
    germ_solve, livsic_constant, net_cloud, reduce_linear_part, verify_extension, verify_on_orbit, ExtensionReport,
    GermSolveOptions, GermSolveReport, LivsicConstants, Orbit, OrbitSolution, PairSample, VerifyReport,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SystemKind {
    Shift,
    Torus,
}

/// How the majorant scale `S` is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScalePolicy {
    /// `S = 4Kκ`.
    Auto,
    Explicit(f64),
}

impl Serialize for ScalePolicy {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ScalePolicy::Auto => serializer.serialize_str("auto"),
            ScalePolicy::Explicit(s) => serializer.serialize_f64(*s),
        }
    }
}

impl<'de> Deserialize<'de> for ScalePolicy {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Number(s) => Ok(ScalePolicy::Explicit(s)),
            Raw::Text(t) if t == "auto" => Ok(ScalePolicy::Auto),
            Raw::Text(t) => Err(serde::de::Error::custom(format!(
                "scale must be \"auto\" or a number, got {t:?}"
            ))),
        }
    }
}

/// Help text listing every config key with its default.
pub const CONFIG_HELP: &str = "\
Config file (flat TOML, all keys optional except seed):
  system = \"shift\"          base system: \"shift\" or \"torus\"
  alphabet = 2              shift alphabet size, 2..=10
  horizon = 64              shift metric horizon, >= 4
  matrix = [[2, 1], [1, 1]] torus automorphism
  dims = 1                  germ dimension d, 1..=3
  max_degree = 6            truncation degree N, 1..=8
  seed = <u64>              generator seed (required, or pass --seed)
  rho = 0.3                 amplitude scale, 0 <= rho < 1
  linear_coboundary = false give H_true a nonconstant linear part
  perturbation = 0.0        constant added to one degree-2 coefficient of F
  orbit_length = 2000       dense orbit length L, >= 2
  kmax = 6                  largest period checked, 1..=10
  poo_tol = 1e-8            periodic orbit check tolerance
  solve_tol = 1e-8          on-orbit residual and reconstruction tolerance
  data_poo_tol = 1e-9       degree-wise periodic orbit tolerance
  alpha = 1.0               Hölder exponent, 0 < alpha <= 1
  scale = \"auto\"            majorant scale S: \"auto\" (4 K kappa) or a number
  seminorm_points = 800     orbit prefix used for empirical seminorms
  samples = 100             random off-orbit samples for extension checks
";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "defaults::system")]
    pub system: SystemKind,
    #[serde(default = "defaults::alphabet")]
    pub alphabet: u8,
    #[serde(default = "defaults::horizon")]
    pub horizon: usize,
    #[serde(default = "defaults::matrix")]
    pub matrix: [[i64; 2]; 2],
    #[serde(default = "defaults::dims")]
    pub dims: usize,
    #[serde(default = "defaults::max_degree")]
    pub max_degree: usize,
    pub seed: u64,
    #[serde(default = "defaults::rho")]
    pub rho: f64,
    #[serde(default)]
    pub linear_coboundary: bool,
    #[serde(default)]
    pub perturbation: f64,
    #[serde(default = "defaults::orbit_length")]
    pub orbit_length: usize,
    #[serde(default = "defaults::kmax")]
    pub kmax: usize,
    #[serde(default = "defaults::poo_tol")]
    pub poo_tol: f64,
    #[serde(default = "defaults::solve_tol")]
    pub solve_tol: f64,
    #[serde(default = "defaults::data_poo_tol")]
    pub data_poo_tol: f64,
    #[serde(default = "defaults::alpha")]
    pub alpha: f64,
    #[serde(default = "defaults::scale")]
    pub scale: ScalePolicy,
    #[serde(default = "defaults::seminorm_points")]
    pub seminorm_points: usize,
    #[serde(default = "defaults::samples")]
    pub samples: usize,
}

mod defaults {
    use super::{ScalePolicy, SystemKind};

    pub fn system() -> SystemKind {
        SystemKind::Shift
    }
    pub fn alphabet() -> u8 {
        2
    }
    pub fn horizon() -> usize {
        64
    }
    pub fn matrix() -> [[i64; 2]; 2] {
        [[2, 1], [1, 1]]
    }
    pub fn dims() -> usize {
        1
    }
    pub fn max_degree() -> usize {
        6
    }
    pub fn rho() -> f64 {
        0.3
    }
    pub fn orbit_length() -> usize {
        2000
    }
    pub fn kmax() -> usize {
        6
    }
    pub fn poo_tol() -> f64 {
        1e-8
    }
    pub fn solve_tol() -> f64 {
        1e-8
    }
    pub fn data_poo_tol() -> f64 {
        1e-9
    }
    pub fn alpha() -> f64 {
        1.0
    }
    pub fn scale() -> ScalePolicy {
        ScalePolicy::Auto
    }
    pub fn seminorm_points() -> usize {
        800
    }
    pub fn samples() -> usize {
        100
    }
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    /// Sets both `poo_tol` and `solve_tol`.
    pub tol: Option<f64>,
    pub orbit_length: Option<usize>,
    pub kmax: Option<usize>,
}

fn config_error(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl ExperimentConfig {
    /// Parses TOML text, applies overrides and validates.
    pub fn from_toml(text: &str, overrides: &Overrides) -> Result<Self> {
        let mut table: toml::Table = text.parse().map_err(|e| config_error(format!("{e}")))?;
        if let Some(seed) = overrides.seed {
            let seed = i64::try_from(seed).map_err(|_| config_error("seed must fit in a signed 64-bit integer"))?;
            table.insert("seed".into(), toml::Value::Integer(seed));
        }
        let mut cfg: ExperimentConfig = table.try_into().map_err(|e| config_error(format!("{e}")))?;
        if let Some(t) = overrides.tol {
            cfg.poo_tol = t;
            cfg.solve_tol = t;
        }
        if let Some(l) = overrides.orbit_length {
            cfg.orbit_length = l;
        }
        if let Some(k) = overrides.kmax {
            cfg.kmax = k;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads the config file if given; without one only `--seed` and the
    /// defaults are used.
    pub fn load(path: Option<&Path>, overrides: &Overrides) -> Result<Self> {
        let text = match path {
            Some(p) => fs::read_to_string(p).map_err(|e| config_error(format!("{}: {e}", p.display())))?,
            None => String::new(),
        };
        Self::from_toml(&text, overrides)
    }

    /// A config with every default and the given seed.
    pub fn with_seed(seed: u64) -> Self {
        Self::from_toml(
            "",
            &Overrides {
                seed: Some(seed),
                ..Default::default()
            },
        )
        .expect("defaults are valid")
    }

    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, msg: &str| if ok { Ok(()) } else { Err(config_error(msg)) };
        check((2..=10).contains(&self.alphabet), "alphabet must lie in 2..=10")?;
        check(self.horizon >= 4, "horizon must be >= 4")?;
        check((1..=3).contains(&self.dims), "dims must lie in 1..=3")?;
        check((1..=8).contains(&self.max_degree), "max_degree must lie in 1..=8")?;
        check((0.0..1.0).contains(&self.rho), "rho must lie in [0, 1)")?;
        check(self.perturbation.is_finite(), "perturbation must be finite")?;
        check(
            self.perturbation == 0.0 || self.max_degree >= 2,
            "perturbation needs max_degree >= 2",
        )?;
        check(self.orbit_length >= 2, "orbit_length must be >= 2")?;
        check((1..=10).contains(&self.kmax), "kmax must lie in 1..=10")?;
        for (name, t) in [
            ("poo_tol", self.poo_tol),
            ("solve_tol", self.solve_tol),
            ("data_poo_tol", self.data_poo_tol),
        ] {
            check(t > 0.0 && t.is_finite(), &format!("{name} must be positive"))?;
        }
        check(self.alpha > 0.0 && self.alpha <= 1.0, "alpha must lie in (0, 1]")?;
        if let ScalePolicy::Explicit(s) = self.scale {
            check(s > 0.0 && s.is_finite(), "explicit scale must be positive")?;
        }
        check(self.seminorm_points >= 2, "seminorm_points must be >= 2")?;
        if self.system == SystemKind::Torus {
            ToralAutomorphism::new(self.matrix).map_err(|e| config_error(format!("matrix: {e}")))?;
        }
        Ok(())
    }

    pub fn system_config(&self) -> SystemConfig {
        match self.system {
            SystemKind::Shift => SystemConfig::Shift {
                alphabet: self.alphabet,
                horizon: self.horizon,
            },
            SystemKind::Torus => SystemConfig::Torus { matrix: self.matrix },
        }
    }

    /// First 16 hex digits of the SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&json)
            .iter()
            .take(8)
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn generator(&self) -> GeneratorConfig {
        GeneratorConfig {
            dims: self.dims,
            max_degree: self.max_degree,
            rho: self.rho,
            seed: self.seed,
            linear_coboundary: self.linear_coboundary,
        }
    }

    fn shift(&self) -> Result<FullShift> {
        FullShift::new(self.alphabet, self.horizon)
    }

    fn torus(&self) -> Result<ToralAutomorphism> {
        ToralAutomorphism::new(self.matrix)
    }

    fn solve_options(&self) -> GermSolveOptions {
        GermSolveOptions {
            alpha: self.alpha,
            kmax: self.kmax,
            poo_tol: self.poo_tol,
            seminorm_points: self.seminorm_points,
            ..Default::default()
        }
    }
}

/// A generated `H_true`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "F: Serialize", deserialize = "F: DeserializeOwned"))]
pub struct SolutionFile<F> {
    pub system: SystemConfig,
    pub h: FieldGerm<F>,
}

/// A cocycle description together with its base system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "F: Serialize", deserialize = "F: DeserializeOwned"))]
pub struct CocycleFile<F> {
    pub system: SystemConfig,
    pub cocycle: CocycleSpec<F>,
}

pub const H_TRUE_FILE: &str = "h_true.json";
pub const COCYCLE_FILE: &str = "cocycle.json";
pub const POO_FILE: &str = "poo.jsonl";
pub const SOLVE_REPORT_FILE: &str = "solve_report.json";
pub const SOLUTION_FILE: &str = "solution.json";
pub const VERIFY_FILE: &str = "verify.json";
pub const MAJORANT_FILE: &str = "majorant.json";
pub const REPORT_CSV: &str = "report.csv";
pub const SUMMARY_FILE: &str = "summary.txt";

/// What a command did.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub pass: bool,
    pub summary: String,
    pub files: Vec<PathBuf>,
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(&path, text)?;
    Ok(path)
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// The point at which `H_true` is the identity: the dense-orbit base point on
/// the shift, the origin on the torus.
fn shift_anchor(system: &FullShift) -> crate::dynamics::ShiftPoint {
    system.base_point()
}

fn torus_anchor() -> TorusPoint {
    TorusPoint::new(0.0, 0.0)
}

type Spec<S> = CocycleSpec<<S as FieldSystem>::Field>;
type Loaded<S> = (Option<FieldGerm<<S as FieldSystem>::Field>>, Spec<S>);

fn build_cocycle<S: FieldSystem>(
    system: &S,
    anchor: &S::Point,
    cfg: &ExperimentConfig,
) -> Result<(FieldGerm<S::Field>, Spec<S>)> {
    let h = generate_solution(system, anchor, &cfg.generator())?;
    let mut spec = CocycleSpec::Coboundary { h: h.clone() };
    if cfg.perturbation != 0.0 {
        let mut index = vec![0u32; cfg.dims];
        index[0] = 2;
        spec = CocycleSpec::Perturbed {
            base: Box::new(spec),
            component: 0,
            index: MultiIndex::new(&index),
            epsilon: [cfg.perturbation, 0.0],
        };
    }
    Ok((h, spec))
}

/// Writes `H_true` and its coboundary cocycle.
pub fn run_generate(cfg: &ExperimentConfig, out: &Path) -> Result<Outcome> {
    let system = cfg.system_config();
    let files = match cfg.system {
        SystemKind::Shift => {
            let sys = cfg.shift()?;
            let (h, cocycle) = build_cocycle(&sys, &shift_anchor(&sys), cfg)?;
            vec![
                write_json(
                    out,
                    H_TRUE_FILE,
                    &SolutionFile {
                        system: system.clone(),
                        h,
                    },
                )?,
                write_json(out, COCYCLE_FILE, &CocycleFile { system, cocycle })?,
            ]
        }
        SystemKind::Torus => {
            let sys = cfg.torus()?;
            let (h, cocycle) = build_cocycle(&sys, &torus_anchor(), cfg)?;
            vec![
                write_json(
                    out,
                    H_TRUE_FILE,
                    &SolutionFile {
                        system: system.clone(),
                        h,
                    },
                )?,
                write_json(out, COCYCLE_FILE, &CocycleFile { system, cocycle })?,
            ]
        }
    };
    Ok(Outcome {
        pass: true,
        summary: format!(
            "generated d={} N={} seed={} on {:?}",
            cfg.dims, cfg.max_degree, cfg.seed, cfg.system
        ),
        files,
    })
}

/// The cocycle from `input`, or generated from the config when absent.
fn load_or_build<S: FieldSystem>(
    system: &S,
    anchor: &S::Point,
    cfg: &ExperimentConfig,
    input: Option<&Path>,
) -> Result<Loaded<S>> {
    match input {
        Some(path) => {
            let file: CocycleFile<S::Field> = read_json(path)?;
            if file.system != cfg.system_config() {
                return Err(config_error(format!(
                    "{} was made for {:?}, config describes {:?}",
                    path.display(),
                    file.system,
                    cfg.system_config()
                )));
            }
            if file.cocycle.dims() != cfg.dims || file.cocycle.max_degree() != cfg.max_degree {
                return Err(config_error(format!(
                    "{} has d={}, N={}; config has d={}, N={}",
                    path.display(),
                    file.cocycle.dims(),
                    file.cocycle.max_degree(),
                    cfg.dims,
                    cfg.max_degree
                )));
            }
            Ok((None, file.cocycle))
        }
        None => {
            let (h, spec) = build_cocycle(system, anchor, cfg)?;
            Ok((Some(h), spec))
        }
    }
}

fn poo_outcome(report: &PooReport, out: &Path) -> Result<Outcome> {
    fs::create_dir_all(out)?;
    let path = out.join(POO_FILE);
    let mut buf = Vec::new();
    report.write_json_lines(&mut buf)?;
    fs::write(&path, buf)?;
    let failing = report.orbits.iter().filter(|o| !o.pass).count();
    Ok(Outcome {
        pass: report.pass(),
        summary: format!(
            "periodic orbit check: {} orbits, {failing} failing, max residual {:.3e} (tol {:.1e})",
            report.orbits.len(),
            report.max_residual(),
            report.tol
        ),
        files: vec![path],
    })
}

/// Periodic orbit check of the cocycle in `input` (or generated).
pub fn run_poo(cfg: &ExperimentConfig, input: Option<&Path>, out: &Path) -> Result<Outcome> {
    let report = match cfg.system {
        SystemKind::Shift => {
            let sys = cfg.shift()?;
            let (_, spec) = load_or_build(&sys, &shift_anchor(&sys), cfg, input)?;
            poo_check(&sys, &spec.bind(&sys), cfg.kmax, cfg.poo_tol)?
        }
        SystemKind::Torus => {
            let sys = cfg.torus()?;
            let (_, spec) = load_or_build(&sys, &torus_anchor(), cfg, input)?;
            poo_check(&sys, &spec.bind(&sys), cfg.kmax, cfg.poo_tol)?
        }
    };
    poo_outcome(&report, out)
}

fn require_shift(cfg: &ExperimentConfig, what: &str) -> Result<FullShift> {
    match cfg.system {
        SystemKind::Shift => cfg.shift(),
        SystemKind::Torus => Err(Error::Unsupported(format!(
            "{what} needs a constructive dense orbit, which is only provided for the full shift"
        ))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PooSummary {
    pub orbits: usize,
    pub max_residual: f64,
    pub tol: f64,
    pub pass: bool,
}

impl From<&PooReport> for PooSummary {
    fn from(r: &PooReport) -> Self {
        Self {
            orbits: r.orbits.len(),
            max_residual: r.max_residual(),
            tol: r.tol,
            pass: r.pass(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleChoice {
    pub s: f64,
    pub auto: bool,
}

/// Wall-clock time in milliseconds per phase.
pub type Timings = BTreeMap<String, f64>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveRecord {
    pub config_hash: String,
    pub config: ExperimentConfig,
    pub poo: PooSummary,
    pub solve: GermSolveReport,
    pub constants: LivsicConstants,
    pub bounds: CocycleBounds,
    pub scale: ScaleChoice,
    pub domination: DominationReport,
    pub extension: ExtensionReport,
    /// Largest coefficient error against `H_true` on the orbit, when known.
    pub truth_error: Option<f64>,
    pub pass: bool,
    pub timings: Timings,
}

impl SolveRecord {
    /// The record as JSON with the `timings` entry removed.
    pub fn deterministic_json(&self) -> String {
        let mut value = serde_json::to_value(self).expect("record serializes");
        value.as_object_mut().expect("object").remove("timings");
        serde_json::to_string_pretty(&value).expect("value serializes")
    }
}

fn elapsed_ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Largest coefficient seminorm of `H` over all degrees, on the pair sample.
fn solution_seminorm(solution: &OrbitSolution, pairs: &PairSample) -> f64 {
    let d = solution.dims;
    let mut worst: f64 = 0.0;
    for i in 0..d {
        for j in multiindices_between(d, 1, solution.max_degree) {
            worst = worst.max(pairs.estimate(&solution.coefficient(i, &j)).seminorm);
        }
    }
    worst
}

fn off_orbit_samples<S: BaseSystem>(system: &S, cfg: &ExperimentConfig) -> Vec<S::Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x0ff0_0b17);
    (0..cfg.samples).map(|_| system.random_point(&mut rng)).collect()
}

/// The full solve pipeline on the full shift. Returns `None` in place of the
/// record when the periodic orbit check fails, with the diagnostics in the
/// returned report.
pub fn solve_experiment(
    cfg: &ExperimentConfig,
    input: Option<&Path>,
) -> Result<(PooReport, Option<(SolveRecord, OrbitSolution)>)> {
    let sys = require_shift(cfg, "solve")?;
    let mut timings = Timings::new();
    let start = Instant::now();
    let (truth, spec) = load_or_build(&sys, &shift_anchor(&sys), cfg, input)?;
    let f = spec.bind(&sys);

    let t = Instant::now();
    let poo = poo_check(&sys, &f, cfg.kmax, cfg.poo_tol)?;
    timings.insert("poo_ms".into(), elapsed_ms(t));
    if !poo.pass() {
        return Ok((poo, None));
    }

    let t = Instant::now();
    let orbit = Orbit::dense(&sys, cfg.orbit_length)?;
    let opts = cfg.solve_options();
    let (solution, solve) = germ_solve(&sys, &f, &orbit, &opts)?;
    timings.insert("solve_ms".into(), elapsed_ms(t));

    let t = Instant::now();
    let constants = livsic_constant(&sys, cfg.alpha, &orbit, &net_cloud(&sys))?;
    let reduction = reduce_linear_part(&sys, &f, &orbit, &opts)?;
    let m = cfg.seminorm_points.min(reduction.reduced.len()).max(1);
    let pairs = PairSample::all_pairs(&sys, &orbit.points()[..m], cfg.alpha);
    let bounds = certify_kappa(&reduction.reduced[..m], &pairs, constants);
    let scale = match cfg.scale {
        ScalePolicy::Auto => ScaleChoice {
            s: bounds.default_scale(),
            auto: true,
        },
        ScalePolicy::Explicit(s) => ScaleChoice { s, auto: false },
    };
    let table = solve_g_scaled(scale.s, cfg.dims, cfg.max_degree)?;
    let domination = check_majorant_domination(&solve.coefficients, &table);
    timings.insert("majorant_ms".into(), elapsed_ms(t));

    let t = Instant::now();
    let h_pairs = PairSample::all_pairs(&sys, &orbit.points()[..cfg.seminorm_points.min(orbit.len())], cfg.alpha);
    let seminorm = solution_seminorm(&solution, &h_pairs);
    let extension = verify_extension(
        &sys,
        &f,
        &solution.observable(&sys, &orbit),
        &off_orbit_samples(&sys, cfg),
        seminorm,
        cfg.alpha,
    )?;
    let truth_error = truth
        .map(|h| -> Result<f64> {
            let mut worst: f64 = 0.0;
            for (g, p) in solution.germs.iter().zip(orbit.points()) {
                worst = worst.max(g.max_deviation(&h.evaluate(p)?));
            }
            Ok(worst)
        })
        .transpose()?;
    timings.insert("verify_ms".into(), elapsed_ms(t));
    timings.insert("total_ms".into(), elapsed_ms(start));

    let pass = solve.on_orbit.residual <= cfg.solve_tol
        && solve.data_poo_residual <= cfg.data_poo_tol
        && domination.pass
        && extension.pass
        && truth_error.is_none_or(|e| e <= cfg.solve_tol);
    let record = SolveRecord {
        config_hash: cfg.hash(),
        config: cfg.clone(),
        poo: PooSummary::from(&poo),
        solve,
        constants,
        bounds,
        scale,
        domination,
        extension,
        truth_error,
        pass,
        timings,
    };
    Ok((poo, Some((record, solution))))
}

/// Solves and writes `solve_report.json` and `solution.json`.
pub fn run_solve(cfg: &ExperimentConfig, input: Option<&Path>, out: &Path) -> Result<Outcome> {
    let (poo, result) = solve_experiment(cfg, input)?;
    let Some((record, solution)) = result else {
        let mut outcome = poo_outcome(&poo, out)?;
        outcome.summary = format!("not solved: {}", outcome.summary);
        return Ok(outcome);
    };
    let files = vec![
        write_json(out, SOLVE_REPORT_FILE, &record)?,
        write_json(out, SOLUTION_FILE, &solution)?,
    ];
    Ok(Outcome {
        pass: record.pass,
        summary: format!(
            "solve {}: on-orbit residual {:.3e}, data POO {:.3e}, domination {}, extension ratio {:.3}{}",
            if record.pass { "PASS" } else { "FAIL" },
            record.solve.on_orbit.residual,
            record.solve.data_poo_residual,
            if record.domination.pass { "ok" } else { "FAILED" },
            record.extension.worst_ratio,
            record
                .truth_error
                .map(|e| format!(", error vs truth {e:.3e}"))
                .unwrap_or_default()
        ),
        files,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyRecord {
    pub config_hash: String,
    pub on_orbit: VerifyReport,
    pub extension: ExtensionReport,
    pub pass: bool,
}

/// Re-checks a stored solution against the cocycle.
pub fn run_verify(cfg: &ExperimentConfig, input: Option<&Path>, solution: &Path, out: &Path) -> Result<Outcome> {
    let sys = require_shift(cfg, "verify")?;
    let (_, spec) = load_or_build(&sys, &shift_anchor(&sys), cfg, input)?;
    let f = spec.bind(&sys);
    let sol: OrbitSolution = read_json(solution)?;
    if sol.dims != cfg.dims || sol.max_degree != cfg.max_degree || sol.len() < 2 {
        return Err(config_error("solution shape does not match the config"));
    }
    let orbit = Orbit::dense(&sys, sol.len())?;
    let fs = orbit.points()[..orbit.len() - 1]
        .iter()
        .map(|p| f.evaluate(p))
        .collect::<Result<Vec<Germ>>>()?;
    let on_orbit = verify_on_orbit(&fs, &sol.germs, cfg.solve_tol)?;
    let pairs = PairSample::all_pairs(&sys, &orbit.points()[..cfg.seminorm_points.min(orbit.len())], cfg.alpha);
    let extension = verify_extension(
        &sys,
        &f,
        &sol.observable(&sys, &orbit),
        &off_orbit_samples(&sys, cfg),
        solution_seminorm(&sol, &pairs),
        cfg.alpha,
    )?;
    let record = VerifyRecord {
        config_hash: cfg.hash(),
        pass: on_orbit.pass && extension.pass,
        on_orbit,
        extension,
    };
    let path = write_json(out, VERIFY_FILE, &record)?;
    Ok(Outcome {
        pass: record.pass,
        summary: format!(
            "verify {}: on-orbit residual {:.3e} over {} samples, extension ratio {:.3}",
            if record.pass { "PASS" } else { "FAIL" },
            record.on_orbit.residual,
            record.on_orbit.samples,
            record.extension.worst_ratio
        ),
        files: vec![path],
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MajorantRecord {
    pub config_hash: String,
    pub scale: ScaleChoice,
    pub bounds: Option<CocycleBounds>,
    pub table: MajorantTable,
    pub pass: bool,
}

/// Writes the majorant table for the configured scale. With `scale = "auto"`
/// the cocycle is needed to certify `κ` and `K`.
pub fn run_majorant(cfg: &ExperimentConfig, input: Option<&Path>, out: &Path) -> Result<Outcome> {
    let (scale, bounds) = match cfg.scale {
        ScalePolicy::Explicit(s) => (ScaleChoice { s, auto: false }, None),
        ScalePolicy::Auto => {
            let sys = require_shift(cfg, "automatic majorant scale")?;
            let (_, spec) = load_or_build(&sys, &shift_anchor(&sys), cfg, input)?;
            let f = spec.bind(&sys);
            let orbit = Orbit::dense(&sys, cfg.orbit_length)?;
            let constants = livsic_constant(&sys, cfg.alpha, &orbit, &net_cloud(&sys))?;
            let reduction = reduce_linear_part(&sys, &f, &orbit, &cfg.solve_options())?;
            let m = cfg.seminorm_points.min(reduction.reduced.len()).max(1);
            let pairs = PairSample::all_pairs(&sys, &orbit.points()[..m], cfg.alpha);
            let bounds = certify_kappa(&reduction.reduced[..m], &pairs, constants);
            (
                ScaleChoice {
                    s: bounds.default_scale(),
                    auto: true,
                },
                Some(bounds),
            )
        }
    };
    let table = solve_g_scaled(scale.s, cfg.dims, cfg.max_degree)?;
    let pass = table.all_positive()
        && table.max_imag <= 1e-14 * table.entries.iter().map(|e| e.value).fold(1.0, f64::max)
        && table.growth_bound_holds();
    let record = MajorantRecord {
        config_hash: cfg.hash(),
        scale,
        bounds,
        table,
        pass,
    };
    let path = write_json(out, MAJORANT_FILE, &record)?;
    Ok(Outcome {
        pass,
        summary: format!(
            "majorant S = {:.4e}: {} coefficients, R(S) = {:.4e}",
            record.scale.s,
            record.table.entries.len(),
            record.table.growth_rate
        ),
        files: vec![path],
    })
}

/// CSV columns of [`run_report`].
pub const REPORT_COLUMNS: [&str; 10] = [
    "config_hash",
    "seed",
    "status",
    "kind",
    "degree",
    "component",
    "index",
    "value",
    "bound",
    "pass",
];

fn status(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

/// Summarizes solve reports. Runs are ordered by config hash, then seed,
/// then input order. Each run contributes one `residual` row per degree
/// (on-orbit residual against `solve_tol`) and one `domination` row per
/// solved coefficient (`[h]_α` against `g_{S,j}`).
pub fn run_report(inputs: &[PathBuf], out: &Path) -> Result<Outcome> {
    let mut records = inputs
        .iter()
        .map(|p| read_json::<SolveRecord>(p).map_err(|e| config_error(format!("{}: {e}", p.display()))))
        .collect::<Result<Vec<_>>>()?;
    records.sort_by(|a, b| (&a.config_hash, a.config.seed).cmp(&(&b.config_hash, b.config.seed)));

    fs::create_dir_all(out)?;
    let csv_path = out.join(REPORT_CSV);
    let mut writer = csv::Writer::from_path(&csv_path).map_err(|e| Error::Io(e.into()))?;
    let csv_err = |e: csv::Error| Error::Io(e.into());
    writer.write_record(REPORT_COLUMNS).map_err(csv_err)?;
    let mut summary = String::from("config_hash       seed  d N     L  status  residual   data_poo   kappa      S\n");
    for r in &records {
        let st = status(r.pass);
        for (k, v) in r.solve.on_orbit.per_degree.iter().enumerate() {
            writer
                .write_record([
                    r.config_hash.clone(),
                    r.config.seed.to_string(),
                    st.into(),
                    "residual".into(),
                    (k + 1).to_string(),
                    String::new(),
                    String::new(),
                    format!("{v:e}"),
                    format!("{:e}", r.config.solve_tol),
                    (*v <= r.config.solve_tol).to_string(),
                ])
                .map_err(csv_err)?;
        }
        for row in &r.domination.rows {
            writer
                .write_record([
                    r.config_hash.clone(),
                    r.config.seed.to_string(),
                    st.into(),
                    "domination".into(),
                    row.degree.to_string(),
                    row.component.to_string(),
                    row.index.to_string(),
                    format!("{:e}", row.seminorm),
                    format!("{:e}", row.majorant),
                    row.pass.to_string(),
                ])
                .map_err(csv_err)?;
        }
        summary.push_str(&format!(
            "{} {:>5} {} {} {:>5}  {:<6}  {:.3e}  {:.3e}  {:.3e}  {:.3e}\n",
            r.config_hash,
            r.config.seed,
            r.config.dims,
            r.config.max_degree,
            r.config.orbit_length,
            st,
            r.solve.on_orbit.residual,
            r.solve.data_poo_residual,
            r.bounds.kappa,
            r.scale.s
        ));
    }
    writer.flush()?;
    let summary_path = out.join(SUMMARY_FILE);
    fs::write(&summary_path, &summary)?;
    Ok(Outcome {
        pass: records.iter().all(|r| r.pass),
        summary,
        files: vec![csv_path, summary_path],
    })
}

/// Process exit code for an error: 3 for unsupported cases, 2 for failed
/// mathematical checks, 4 for I/O and configuration problems.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Unsupported(_) => 3,
        Error::PooFailure(_) | Error::OrbitNotDense { .. } | Error::Precondition(_) => 2,
        Error::SingularLinearPart { .. } => 2,
        Error::Io(_) | Error::Json(_) | Error::Config(_) => 4,
        Error::InvalidParameter(_) | Error::DimensionMismatch { .. } | Error::DegreeMismatch { .. } => 4,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cocycle::CylinderField;

    fn small(seed: u64) -> ExperimentConfig {
        let text = "dims = 1\nmax_degree = 3\norbit_length = 600\nkmax = 4\nseminorm_points = 200\nsamples = 20\n";
        ExperimentConfig::from_toml(
            text,
            &Overrides {
                seed: Some(seed),
                ..Default::default()
            },
        )
        .unwrap()
    }

    #[test]
    fn config_defaults_and_validation() {
        let cfg = ExperimentConfig::with_seed(1);
        assert_eq!(cfg.max_degree, 6);
        assert_eq!(cfg.scale, ScalePolicy::Auto);
        assert!(matches!(
            ExperimentConfig::from_toml("", &Overrides::default()),
            Err(Error::Config(_))
        ));
        assert!(ExperimentConfig::from_toml("seed = 1\nrho = 1.5", &Overrides::default()).is_err());
        assert!(ExperimentConfig::from_toml("seed = 1\nunknown = 2", &Overrides::default()).is_err());
        assert!(ExperimentConfig::from_toml("seed = 1\nscale = \"big\"", &Overrides::default()).is_err());
        let c = ExperimentConfig::from_toml(
            "seed = 1\nscale = 12.5\nsystem = \"torus\"",
            &Overrides {
                kmax: Some(3),
                tol: Some(1e-6),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(
            (c.scale, c.kmax, c.poo_tol, c.solve_tol),
            (ScalePolicy::Explicit(12.5), 3, 1e-6, 1e-6)
        );
        assert_ne!(c.hash(), ExperimentConfig::with_seed(1).hash());
        assert_eq!(
            ExperimentConfig::with_seed(1).hash(),
            ExperimentConfig::with_seed(1).hash()
        );
    }

    #[test]
    fn generate_is_deterministic_and_zero_rho_is_identity() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = small(1);
        run_generate(&cfg, &dir.path().join("a")).unwrap();
        run_generate(&cfg, &dir.path().join("b")).unwrap();
        for name in [H_TRUE_FILE, COCYCLE_FILE] {
            assert_eq!(
                fs::read(dir.path().join("a").join(name)).unwrap(),
                fs::read(dir.path().join("b").join(name)).unwrap()
            );
        }
        let mut zero = small(1);
        zero.rho = 0.0;
        let out = dir.path().join("zero");
        run_generate(&zero, &out).unwrap();
        let file: CocycleFile<CylinderField> = read_json(&out.join(COCYCLE_FILE)).unwrap();
        let sys = zero.shift().unwrap();
        let x = sys.random_point(&mut ChaCha8Rng::seed_from_u64(3));
        assert_eq!(file.cocycle.bind(&sys).evaluate(&x).unwrap(), Germ::identity(1, 3));
        assert!(
            run_poo(&cfg, Some(&dir.path().join("a").join(COCYCLE_FILE)), &out)
                .unwrap()
                .pass
        );
    }

    #[test]
    fn solve_pipeline_and_exit_codes() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = small(2);
        let outcome = run_solve(&cfg, None, dir.path()).unwrap();
        assert!(outcome.pass, "{}", outcome.summary);
        let verified = run_verify(&cfg, None, &dir.path().join(SOLUTION_FILE), dir.path()).unwrap();
        assert!(verified.pass, "{}", verified.summary);

        let mut bad = small(2);
        bad.perturbation = 1e-3;
        let outcome = run_solve(&bad, None, &dir.path().join("bad")).unwrap();
        assert!(!outcome.pass);
        assert!(dir.path().join("bad").join(POO_FILE).exists());

        let mut torus = small(2);
        torus.system = SystemKind::Torus;
        let err = run_solve(&torus, None, dir.path()).unwrap_err();
        assert_eq!(exit_code(&err), 3);
        assert!(run_poo(&torus, None, &dir.path().join("torus")).unwrap().pass);
        assert_eq!(
            exit_code(&run_report(&[dir.path().join("missing.json")], dir.path()).unwrap_err()),
            4
        );
    }

    #[test]
    fn report_ordering_and_empty_csv() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("empty");
        run_report(&[], &out).unwrap();
        let text = fs::read_to_string(out.join(REPORT_CSV)).unwrap();
        assert_eq!(text.trim_end(), REPORT_COLUMNS.join(","));

        let mut paths = Vec::new();
        for seed in [5, 3] {
            let run = dir.path().join(format!("run{seed}"));
            run_solve(&small(seed), None, &run).unwrap();
            paths.push(run.join(SOLVE_REPORT_FILE));
        }
        let outcome = run_report(&paths, dir.path()).unwrap();
        assert!(outcome.pass);
        let csv = fs::read_to_string(dir.path().join(REPORT_CSV)).unwrap();
        let hashes: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
        let mut sorted = hashes.clone();
        sorted.sort();
        assert_eq!(hashes, sorted);
        assert!(csv.lines().skip(1).all(|l| l.contains(",PASS,")));
    }

    #[test]
    fn solve_is_deterministic() {
        let cfg = small(4);
        let a = solve_experiment(&cfg, None).unwrap().1.unwrap().0;
        let b = solve_experiment(&cfg, None).unwrap().1.unwrap().0;
        assert_eq!(a.deterministic_json(), b.deterministic_json());
    }
}
