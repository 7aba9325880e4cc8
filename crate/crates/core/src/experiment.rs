//! Configuration-driven experiment runs and their CSV outputs.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::tables::enumerate_code_states;
use crate::analysis::thermo::{log_grid, ThermoCurves};
use crate::analysis::{classify_hamming_energy, count_ties, two_qubit_spectrum, HammingHistogram};
use crate::encoding::{build_encoded_graph, CodeKind};
use crate::error::{QacError, Result};
use crate::harness::{
    aggregate, argmax_first, equalized_alpha, place_disjoint_chains, place_instances, run_classical, run_unprotected,
    uniform_grid, ChainInstance, EncodedChain, SamplerConfig, Strategy, StrategyReport,
};
use crate::rng::{derive_seed, stream_rng};
use crate::sampling::metropolis_anneal;
use crate::topology::{ChimeraSpec, HardwareGraph};

/// Inverse temperature of the thermal-model curves.
pub const THERMO_BETA: f64 = 2.0;
/// `beta h` grid of the thermal-model curves.
pub const THERMO_POINTS: (f64, f64, usize) = (0.01, 10.0, 50);
/// Problem scale of the spectrum-versus-penalty curves.
pub const SPECTRUM_ALPHA: f64 = 0.3;

pub const FIGURES: [&str; 10] =
    ["fig6", "fig7", "sweep", "fig9", "fig12a", "fig12b", "fig13", "fig14a", "fig16", "tables"];

fn default_gamma_grid() -> Vec<f64> {
    uniform_grid(1.0, 0.1)
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("results")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub topology: ChimeraSpec,
    pub code: CodeKind,
    pub strategies: Vec<Strategy>,
    pub alphas: Vec<f64>,
    #[serde(default = "default_gamma_grid")]
    pub gamma_grid: Vec<f64>,
    pub chain_lengths: Vec<usize>,
    pub instances: usize,
    pub seed: u64,
    #[serde(default)]
    pub sampler: SamplerConfig,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Runs Square414 at `1.5 * alpha` so both codes share an effective
    /// scale.
    #[serde(default)]
    pub equalize_effective_scale: bool,
}

impl ExperimentConfig {
    /// Parses and validates a JSON document. Errors carry the offending
    /// field path.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let mut path = e.path().to_string();
            let message = e.inner().to_string();
            if let Some(field) = message.strip_prefix("missing field `").and_then(|m| m.split('`').next()) {
                path = if path == "." { field.to_string() } else { format!("{path}.{field}") };
            }
            QacError::validation(path, message)
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |path: String, msg: String| Err(QacError::validation(path, msg));
        HardwareGraph::from_spec(&self.topology).map_err(|e| QacError::validation("topology", e.to_string()))?;
        if self.strategies.is_empty() {
            return fail("strategies".into(), "at least one strategy is required".into());
        }
        for (i, s) in self.strategies.iter().enumerate() {
            if let Err(e) = s.check(self.code) {
                return fail(format!("strategies[{i}]"), e.to_string());
            }
        }
        if self.alphas.is_empty() {
            return fail("alphas".into(), "at least one alpha is required".into());
        }
        for (i, &a) in self.alphas.iter().enumerate() {
            if !(a > 0.0 && a <= 1.0) {
                return fail(format!("alphas[{i}]"), format!("{a} outside (0, 1]"));
            }
            if self.equalize_effective_scale {
                if let Err(e) = equalized_alpha(self.code, a) {
                    return fail(format!("alphas[{i}]"), e.to_string());
                }
            }
        }
        if self.gamma_grid.is_empty() {
            return fail("gamma_grid".into(), "grid is empty".into());
        }
        for (i, &g) in self.gamma_grid.iter().enumerate() {
            if !(0.0..=1.0).contains(&g) {
                return fail(format!("gamma_grid[{i}]"), format!("{g} outside [0, 1]"));
            }
        }
        if self.chain_lengths.is_empty() {
            return fail("chain_lengths".into(), "at least one length is required".into());
        }
        for (i, &l) in self.chain_lengths.iter().enumerate() {
            if l < 2 {
                return fail(format!("chain_lengths[{i}]"), format!("{l} is below 2"));
            }
        }
        if self.instances == 0 {
            return fail("instances".into(), "at least one instance is required".into());
        }
        self.sampler.validate().map_err(|e| QacError::validation("sampler", e.to_string()))?;
        Ok(())
    }

    /// Scale at which the encoded strategies run.
    pub fn encoded_alpha(&self, alpha: f64) -> Result<f64> {
        if self.equalize_effective_scale {
            equalized_alpha(self.code, alpha)
        } else {
            Ok(alpha)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuccessRecord {
    pub chain_length: usize,
    pub alpha: f64,
    pub gamma: Option<f64>,
    pub strategy: Strategy,
    pub mean: f64,
    pub sem: Option<f64>,
    pub per_instance: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceRecord {
    pub chain_length: usize,
    pub alpha: f64,
    pub strategy: Strategy,
    pub grid: Vec<f64>,
    /// `surface[g][i]`.
    pub surface: Vec<Vec<f64>>,
    pub gamma_opt: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TieRecord {
    pub chain_length: usize,
    pub alpha: f64,
    pub gamma: f64,
    pub tie_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultBundle {
    pub config: ExperimentConfig,
    pub version: String,
    pub records: Vec<SuccessRecord>,
    pub surfaces: Vec<SurfaceRecord>,
    pub hamming: Option<HammingHistogram>,
    pub ties: Vec<TieRecord>,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    name: &'static str,
    version: &'static str,
    config: &'a ExperimentConfig,
    thermo_beta: f64,
    thermo_gamma_range: (f64, f64),
    files: Vec<String>,
}

struct LengthPlacements {
    encoded: Vec<ChainInstance>,
    unprotected: Vec<ChainInstance>,
    classical: Vec<Vec<ChainInstance>>,
}

fn place_all(
    cfg: &ExperimentConfig,
    hw: &HardwareGraph,
    eg: &crate::EncodedGraph,
    length: usize,
) -> Result<LengthPlacements> {
    let want = |s: Strategy| cfg.strategies.contains(&s);
    let encoded = if cfg.strategies.iter().any(|s| s.is_encoded()) {
        place_instances(eg, length, cfg.instances, derive_seed(cfg.seed, &[1]))?
    } else {
        Vec::new()
    };
    let unprotected = if want(Strategy::U) {
        place_instances(hw, length, cfg.instances, derive_seed(cfg.seed, &[2]))?
    } else {
        Vec::new()
    };
    let classical = if want(Strategy::C) {
        (0..cfg.instances)
            .map(|i| place_disjoint_chains(hw, length, 4, derive_seed(cfg.seed, &[3, length as u64, i as u64])))
            .collect::<Result<Vec<_>>>()?
    } else {
        Vec::new()
    };
    Ok(LengthPlacements { encoded, unprotected, classical })
}

fn record(length: usize, r: StrategyReport) -> SuccessRecord {
    SuccessRecord {
        chain_length: length,
        alpha: r.alpha,
        gamma: r.gamma,
        strategy: r.strategy,
        mean: r.mean,
        sem: r.sem,
        per_instance: r.per_instance,
    }
}

/// Runs every (chain length, alpha) cell of the configuration and writes
/// the bundle, manifest and figure CSVs to `out` (or the configured
/// output directory).
pub fn run_experiment(cfg: &ExperimentConfig, out: Option<&Path>) -> Result<ResultBundle> {
    cfg.validate()?;
    let hw = HardwareGraph::from_spec(&cfg.topology)?;
    let (eg, map) = build_encoded_graph(cfg.code, &hw)?;
    let encoded: Vec<Strategy> = cfg.strategies.iter().copied().filter(|s| s.is_encoded()).collect();
    let mut grid = cfg.gamma_grid.clone();
    grid.sort_by(f64::total_cmp);
    let (mut records, mut surfaces, mut ties) = (Vec::new(), Vec::new(), Vec::new());
    let mut hamming: Option<HammingHistogram> = None;
    let longest = *cfg.chain_lengths.iter().max().unwrap();
    let top_alpha = cfg.alphas.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    for &length in &cfg.chain_lengths {
        let placed = place_all(cfg, &hw, &eg, length)?;
        for (ai, &alpha) in cfg.alphas.iter().enumerate() {
            let cell_seed = derive_seed(cfg.seed, &[10, length as u64, ai as u64]);
            if cfg.strategies.contains(&Strategy::U) {
                let r = run_unprotected(&placed.unprotected, alpha, &cfg.sampler, derive_seed(cell_seed, &[0]))?;
                records.push(record(length, r));
            }
            if cfg.strategies.contains(&Strategy::C) {
                let r = run_classical(&placed.classical, alpha, &cfg.sampler, derive_seed(cell_seed, &[1]))?;
                records.push(record(length, r));
            }
            if encoded.is_empty() {
                continue;
            }
            let ea = cfg.encoded_alpha(alpha)?;
            let n = placed.encoded.len();
            let inst_seed = |i: usize| derive_seed(cell_seed, &[2, i as u64]);
            // values[g * n + i][k]: strategy k at grid[g] on instance i.
            let values = (0..grid.len() * n)
                .into_par_iter()
                .map(|k| {
                    let (g, i) = (k / n, k % n);
                    EncodedChain::new(&placed.encoded[i], &map, ea, grid[g])?.successes(
                        &cfg.sampler,
                        &encoded,
                        inst_seed(i),
                    )
                })
                .collect::<Result<Vec<_>>>()?;
            for (k, &s) in encoded.iter().enumerate() {
                let surface: Vec<Vec<f64>> =
                    (0..grid.len()).map(|g| (0..n).map(|i| values[g * n + i][k]).collect()).collect();
                let means: Vec<f64> = surface.iter().map(|r| r.iter().sum::<f64>() / n as f64).collect();
                let opt = argmax_first(&means);
                let r = StrategyReport::new(s, alpha, Some(grid[opt]), surface[opt].clone())?;
                records.push(record(length, r));
                surfaces.push(SurfaceRecord {
                    chain_length: length,
                    alpha,
                    strategy: s,
                    grid: grid.clone(),
                    surface,
                    gamma_opt: grid[opt],
                });
            }
            let SamplerConfig::Metropolis(mcfg) = &cfg.sampler else { continue };
            // Re-drawing with the sweep's seeds reproduces its sample sets.
            let decoded = encoded.iter().copied().find(|s| s.decoder_scheme().is_some());
            let Some(strategy) = decoded else { continue };
            let gamma = surfaces
                .iter()
                .rev()
                .find(|r| r.strategy == strategy && r.chain_length == length && r.alpha == alpha)
                .map(|r| r.gamma_opt)
                .expect("surface recorded above");
            let want_hamming = length == longest && alpha == top_alpha;
            let want_ties = cfg.code == CodeKind::Square414;
            if !(want_hamming || want_ties) {
                continue;
            }
            let per_instance = (0..n)
                .into_par_iter()
                .map(|i| {
                    let chain = EncodedChain::new(&placed.encoded[i], &map, ea, gamma)?;
                    let set = metropolis_anneal(chain.physical(), &mcfg.schedule()?, mcfg.reads, inst_seed(i))?;
                    let decoder = chain.decoder(strategy.decoder_scheme().unwrap())?;
                    let rate = count_ties(&set, cfg.code, &decoder)?.rate;
                    let hist = if want_hamming {
                        let mut rng = stream_rng(derive_seed(inst_seed(i), &[9]), 0);
                        Some(classify_hamming_energy(&set, &chain, &decoder, &mut rng)?)
                    } else {
                        None
                    };
                    Ok((rate, hist))
                })
                .collect::<Result<Vec<_>>>()?;
            if want_ties {
                ties.push(TieRecord {
                    chain_length: length,
                    alpha,
                    gamma,
                    tie_rate: per_instance.iter().map(|p| p.0).sum::<f64>() / n as f64,
                });
            }
            if want_hamming {
                let mut h = HammingHistogram::default();
                for (_, part) in &per_instance {
                    h.merge(part.as_ref().unwrap());
                }
                hamming = Some(h);
            }
        }
    }
    let bundle = ResultBundle {
        config: cfg.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        records,
        surfaces,
        hamming,
        ties,
    };
    let dir = out.map(Path::to_path_buf).unwrap_or_else(|| cfg.output_dir.clone());
    write_bundle(&bundle, &dir)?;
    Ok(bundle)
}

/// Writes `bundle.json`, every figure the bundle supports and
/// `manifest.json`.
pub fn write_bundle(bundle: &ResultBundle, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("bundle.json"), serde_json::to_string_pretty(bundle)? + "\n")?;
    let mut files = Vec::new();
    for id in FIGURES {
        match emit_figure_data(bundle, id, dir) {
            Ok(paths) => files.extend(paths),
            Err(QacError::Reporting(_)) => {}
            Err(e) => return Err(e),
        }
    }
    let manifest = Manifest {
        name: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        config: &bundle.config,
        thermo_beta: THERMO_BETA,
        thermo_gamma_range: crate::analysis::thermo::GAMMA_RANGE,
        files: files.iter().map(|p| p.file_name().unwrap().to_string_lossy().into_owned()).collect(),
    };
    fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(files)
}

pub fn read_bundle(dir: &Path) -> Result<ResultBundle> {
    let path = dir.join("bundle.json");
    let text =
        fs::read_to_string(&path).map_err(|e| QacError::Reporting(format!("cannot read {}: {e}", path.display())))?;
    Ok(serde_json::from_str(&text)?)
}

fn write_csv<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<PathBuf> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(path.to_path_buf())
}

#[derive(Serialize)]
struct SuccessRow {
    chain_length: usize,
    alpha: f64,
    gamma: Option<f64>,
    strategy: &'static str,
    mean: f64,
    sem: Option<f64>,
}

fn alphas_of(bundle: &ResultBundle) -> Vec<f64> {
    let mut a: Vec<f64> = bundle.records.iter().map(|r| r.alpha).collect();
    a.sort_by(f64::total_cmp);
    a.dedup();
    a
}

/// Writes the CSV(s) of one figure into `dir`.
pub fn emit_figure_data(bundle: &ResultBundle, figure: &str, dir: &Path) -> Result<Vec<PathBuf>> {
    let missing = |what: &str| QacError::Reporting(format!("{figure} needs {what}"));
    match figure {
        "fig7" => {
            if bundle.records.is_empty() {
                return Err(missing("strategy results"));
            }
            alphas_of(bundle)
                .into_iter()
                .map(|a| {
                    let rows = bundle.records.iter().filter(|r| r.alpha == a).map(|r| SuccessRow {
                        chain_length: r.chain_length,
                        alpha: r.alpha,
                        gamma: r.gamma,
                        strategy: r.strategy.name(),
                        mean: r.mean,
                        sem: r.sem,
                    });
                    write_csv(&dir.join(format!("fig7_alpha{a}.csv")), rows)
                })
                .collect()
        }
        "sweep" => {
            if bundle.surfaces.is_empty() {
                return Err(missing("encoded strategy sweeps"));
            }
            alphas_of(bundle)
                .into_iter()
                .filter(|a| bundle.surfaces.iter().any(|s| s.alpha == *a))
                .map(|a| {
                    let mut rows = Vec::new();
                    for s in bundle.surfaces.iter().filter(|s| s.alpha == a) {
                        for (g, vals) in s.grid.iter().zip(&s.surface) {
                            let (mean, sem) = match aggregate(vals) {
                                Ok((m, e)) => (m, Some(e)),
                                Err(_) => (vals[0], None),
                            };
                            rows.push(SuccessRow {
                                chain_length: s.chain_length,
                                alpha: a,
                                gamma: Some(*g),
                                strategy: s.strategy.name(),
                                mean,
                                sem,
                            });
                        }
                    }
                    write_csv(&dir.join(format!("sweep_alpha{a}.csv")), rows)
                })
                .collect()
        }
        "fig6" => {
            #[derive(Serialize)]
            struct Row {
                chain_length: usize,
                alpha: f64,
                c_mean: f64,
                c_sem: Option<f64>,
                predicted_mean: f64,
                predicted_sem: Option<f64>,
            }
            let mut rows = Vec::new();
            for c in bundle.records.iter().filter(|r| r.strategy == Strategy::C) {
                let Some(u) = bundle
                    .records
                    .iter()
                    .find(|r| r.strategy == Strategy::U && r.chain_length == c.chain_length && r.alpha == c.alpha)
                else {
                    continue;
                };
                let pred: Vec<f64> = u.per_instance.iter().map(|p| 1.0 - (1.0 - p).powi(4)).collect();
                let (pm, ps) = match aggregate(&pred) {
                    Ok((m, s)) => (m, Some(s)),
                    Err(_) => (pred[0], None),
                };
                rows.push(Row {
                    chain_length: c.chain_length,
                    alpha: c.alpha,
                    c_mean: c.mean,
                    c_sem: c.sem,
                    predicted_mean: pm,
                    predicted_sem: ps,
                });
            }
            if rows.is_empty() {
                return Err(missing("U and C results"));
            }
            Ok(vec![write_csv(&dir.join("fig6.csv"), rows)?])
        }
        "fig9" => {
            #[derive(Serialize)]
            struct Row {
                hamming: usize,
                energy_gap: f64,
                decodable_fraction: f64,
                count: u64,
            }
            let h = bundle.hamming.as_ref().ok_or_else(|| missing("a Hamming histogram"))?;
            let rows = h.bins().map(|b| Row {
                hamming: b.hamming,
                energy_gap: b.energy_gap,
                decodable_fraction: b.decodable_fraction(),
                count: b.count,
            });
            Ok(vec![write_csv(&dir.join("fig9.csv"), rows)?])
        }
        "fig16" => {
            if bundle.ties.is_empty() {
                return Err(missing("square414 tie statistics"));
            }
            Ok(vec![write_csv(&dir.join("fig16.csv"), &bundle.ties)?])
        }
        "fig12a" | "fig12b" | "fig13" | "fig14a" | "tables" => Ok(vec![write_analysis(figure, dir)?]),
        other => Err(QacError::Reporting(format!("unknown figure {other:?}; expected one of {}", FIGURES.join(", ")))),
    }
}

/// Figures that depend only on the analytical models.
pub fn write_analysis(figure: &str, dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(format!("{figure}.csv"));
    match figure {
        "fig12a" | "fig12b" => {
            #[derive(Serialize)]
            struct Row {
                beta_h: f64,
                p_err_313: f64,
                p_err_414: f64,
            }
            let (lo, hi, n) = THERMO_POINTS;
            let c = ThermoCurves::compute(THERMO_BETA, &log_grid(lo, hi, n))?;
            let p313 = if figure == "fig12a" { &c.equal_p313 } else { &c.scaled_p313 };
            let rows = (0..n).map(|k| Row { beta_h: c.beta_h[k], p_err_313: p313[k], p_err_414: c.equal_p414[k] });
            write_csv(&path, rows)
        }
        "fig13" => {
            #[derive(Serialize)]
            struct Row {
                coupled_flips: usize,
                uncoupled_flips: usize,
                multiplicity: u32,
                alpha_coeff: f64,
                gamma_coeff: f64,
                gap: String,
                decodable: bool,
            }
            let rows = two_qubit_spectrum(SPECTRUM_ALPHA, 0.0)?.into_iter().map(|l| Row {
                coupled_flips: l.coupled_flips,
                uncoupled_flips: l.uncoupled_flips,
                multiplicity: l.multiplicity,
                alpha_coeff: l.alpha_coeff,
                gamma_coeff: l.gamma_coeff,
                gap: l.formula(),
                decodable: l.decodable,
            });
            write_csv(&path, rows)
        }
        "fig14a" => {
            #[derive(Serialize)]
            struct Row {
                alpha: f64,
                gamma: f64,
                level: String,
                gap: f64,
                decodable: bool,
            }
            let mut rows = Vec::new();
            for g in uniform_grid(1.0, 0.01) {
                for l in two_qubit_spectrum(SPECTRUM_ALPHA, g)? {
                    rows.push(Row {
                        alpha: SPECTRUM_ALPHA,
                        gamma: g,
                        level: format!("c{}u{}", l.coupled_flips, l.uncoupled_flips),
                        gap: l.gap,
                        decodable: l.decodable,
                    });
                }
            }
            write_csv(&path, rows)
        }
        "tables" => {
            #[derive(Serialize)]
            struct Row {
                code: &'static str,
                bits: String,
                two_v: u32,
                m: i32,
                multiplicity: u32,
                decodable: char,
            }
            let rows = [CodeKind::Pudenz313, CodeKind::Square414].into_iter().flat_map(|code| {
                enumerate_code_states(code).into_iter().map(move |r| Row {
                    code: code.name(),
                    bits: r.bits,
                    two_v: r.two_v,
                    m: r.magnetization,
                    multiplicity: r.multiplicity,
                    decodable: r.decodability.symbol(),
                })
            });
            write_csv(&path, rows)
        }
        other => Err(QacError::Reporting(format!("{other:?} is not an analytical figure"))),
    }
}
