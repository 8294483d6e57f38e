//! Synthetic learning problems with exactly computable ground truth.
//!
//! A scenario couples a data law, a finite hypothesis class with a
//! nonnegative loss, a training-set size, and the algorithm that maps a
//! realized training set to a posterior over the class. Two representations
//! are supported:
//!
//! - **table**: a discrete data law over named atoms and an explicit loss
//!   table, so population risks, moments, and mutual information are exact
//!   finite sums;
//! - **quantile**: instances are uniforms in `(0, 1]` and hypothesis `w`
//!   scores `ℓ(w, u) = Q_w(u)`, the quantile of an analytic loss model, so
//!   population quantities come from the models' closed forms and draws are
//!   coupled comonotonically through the shared uniform stream.
//!
//! Scenario definition files are TOML; see [`Scenario::from_toml`] for the
//! schema.

use crate::dist::DiscreteDistribution;
use crate::gibbs::{gibbs_posterior, GibbsSpec};
use crate::loss::LossModel;
use crate::rng::SplitMix64;
use crate::truncation::{per_hypothesis_risks, LossTransform};
use crate::{Error, Result};
use serde::Deserialize;

/// The algorithm mapping a realized training set to a hypothesis
/// distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Algorithm {
    /// Posterior ∝ prior · exp(−temperature · empirical risk).
    Gibbs { temperature: f64 },
    /// Point mass on the empirical risk minimizer (ties go to the lowest
    /// index).
    Erm,
    /// Returns the average of the training instances; only meaningful for
    /// table scenarios whose atoms carry numeric values. Produces no
    /// posterior over the finite class.
    MeanEstimator,
}

/// A realized training set.
#[derive(Debug, Clone, PartialEq)]
pub enum Dataset {
    /// Atom indices into a table scenario's support.
    Atoms(Vec<usize>),
    /// Uniform draws in `(0, 1]` for a quantile scenario.
    Uniforms(Vec<f64>),
}

impl Dataset {
    pub fn len(&self) -> usize {
        match self {
            Dataset::Atoms(v) => v.len(),
            Dataset::Uniforms(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone)]
pub struct TableScenario {
    pub name: String,
    /// Numeric value carried by each atom (used by the mean estimator and
    /// the squared-loss construction).
    atom_values: Vec<f64>,
    data_weights: Vec<f64>,
    cum_weights: Vec<f64>,
    loss_table: Vec<Vec<f64>>, // [hypothesis][atom]
    pub n: usize,
    pub algorithm: Algorithm,
    prior: DiscreteDistribution,
}

#[derive(Debug, Clone)]
pub struct QuantileScenario {
    pub name: String,
    models: Vec<LossModel>,
    pub n: usize,
    pub algorithm: Algorithm,
    prior: DiscreteDistribution,
}

/// A finite learning problem with exactly computable population quantities.
#[derive(Debug, Clone)]
pub enum Scenario {
    Table(TableScenario),
    Quantile(QuantileScenario),
}

impl Scenario {
    pub fn table(
        name: impl Into<String>,
        atom_values: Vec<f64>,
        data_weights: Vec<f64>,
        loss_table: Vec<Vec<f64>>,
        n: usize,
        algorithm: Algorithm,
        prior: Option<DiscreteDistribution>,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("training-set size n must be >= 1".into()));
        }
        if atom_values.len() != data_weights.len() || atom_values.is_empty() {
            return Err(Error::InvalidInput("atom values and weights must match and be nonempty".into()));
        }
        // Data law validity (sum to one, nonnegative) rides on the
        // distribution constructor.
        let _law = DiscreteDistribution::from_weights(data_weights.clone())?;
        if loss_table.is_empty() {
            return Err(Error::InvalidInput("at least one hypothesis required".into()));
        }
        for (w, row) in loss_table.iter().enumerate() {
            if row.len() != atom_values.len() {
                return Err(Error::InvalidInput(format!(
                    "loss row {w} has {} entries for {} atoms",
                    row.len(),
                    atom_values.len()
                )));
            }
            for &v in row {
                if !(v >= 0.0) || !v.is_finite() {
                    return Err(Error::InvalidInput(format!("loss value {v} must be finite and >= 0")));
                }
            }
        }
        let prior = match prior {
            Some(p) => {
                if p.len() != loss_table.len() {
                    return Err(Error::InvalidInput("prior size does not match hypothesis count".into()));
                }
                p
            }
            None => DiscreteDistribution::uniform(loss_table.len()),
        };
        let mut cum_weights = Vec::with_capacity(data_weights.len());
        let mut acc = 0.0;
        for &w in &data_weights {
            acc += w;
            cum_weights.push(acc);
        }
        if let Some(last) = cum_weights.last_mut() {
            *last = 1.0;
        }
        Ok(Self::Table(TableScenario {
            name: name.into(),
            atom_values,
            data_weights,
            cum_weights,
            loss_table,
            n,
            algorithm,
            prior,
        }))
    }

    pub fn quantile(
        name: impl Into<String>,
        models: Vec<LossModel>,
        n: usize,
        algorithm: Algorithm,
        prior: Option<DiscreteDistribution>,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("training-set size n must be >= 1".into()));
        }
        if models.is_empty() {
            return Err(Error::InvalidInput("at least one hypothesis required".into()));
        }
        for m in &models {
            m.validate()?;
            if !m.moment(1.0)?.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "{} hypothesis has an infinite mean; population risk would not be computable",
                    m.name()
                )));
            }
        }
        if matches!(algorithm, Algorithm::MeanEstimator) {
            return Err(Error::InvalidInput(
                "the mean estimator needs a table scenario with numeric atoms".into(),
            ));
        }
        let prior = match prior {
            Some(p) => {
                if p.len() != models.len() {
                    return Err(Error::InvalidInput("prior size does not match hypothesis count".into()));
                }
                p
            }
            None => DiscreteDistribution::uniform(models.len()),
        };
        Ok(Self::Quantile(QuantileScenario { name: name.into(), models, n, algorithm, prior }))
    }

    pub fn with_algorithm(mut self, algorithm: Algorithm) -> Self {
        match &mut self {
            Scenario::Table(s) => s.algorithm = algorithm,
            Scenario::Quantile(s) => s.algorithm = algorithm,
        }
        self
    }

    pub fn with_n(mut self, n: usize) -> Self {
        match &mut self {
            Scenario::Table(s) => s.n = n,
            Scenario::Quantile(s) => s.n = n,
        }
        self
    }

    pub fn name(&self) -> &str {
        match self {
            Scenario::Table(s) => &s.name,
            Scenario::Quantile(s) => &s.name,
        }
    }

    pub fn n(&self) -> usize {
        match self {
            Scenario::Table(s) => s.n,
            Scenario::Quantile(s) => s.n,
        }
    }

    pub fn algorithm(&self) -> Algorithm {
        match self {
            Scenario::Table(s) => s.algorithm,
            Scenario::Quantile(s) => s.algorithm,
        }
    }

    pub fn hypothesis_count(&self) -> usize {
        match self {
            Scenario::Table(s) => s.loss_table.len(),
            Scenario::Quantile(s) => s.models.len(),
        }
    }

    pub fn prior(&self) -> &DiscreteDistribution {
        match self {
            Scenario::Table(s) => &s.prior,
            Scenario::Quantile(s) => &s.prior,
        }
    }

    /// Number of data atoms for table scenarios; `None` for continuous
    /// generators.
    pub fn atom_count(&self) -> Option<usize> {
        match self {
            Scenario::Table(s) => Some(s.atom_values.len()),
            Scenario::Quantile(_) => None,
        }
    }

    pub fn atom_values(&self) -> Option<&[f64]> {
        match self {
            Scenario::Table(s) => Some(&s.atom_values),
            Scenario::Quantile(_) => None,
        }
    }

    pub fn data_weights(&self) -> Option<&[f64]> {
        match self {
            Scenario::Table(s) => Some(&s.data_weights),
            Scenario::Quantile(_) => None,
        }
    }

    /// Draw a training set of size `n` from an explicit stream.
    pub fn draw(&self, rng: &mut SplitMix64) -> Dataset {
        match self {
            Scenario::Table(s) => {
                let mut atoms = Vec::with_capacity(s.n);
                for _ in 0..s.n {
                    atoms.push(sample_atom(&s.cum_weights, rng.next_uniform()));
                }
                Dataset::Atoms(atoms)
            }
            Scenario::Quantile(s) => {
                Dataset::Uniforms((0..s.n).map(|_| rng.next_uniform()).collect())
            }
        }
    }

    /// Loss of hypothesis `w` on instance `i` of the dataset.
    pub fn loss_at(&self, w: usize, dataset: &Dataset, i: usize) -> Result<f64> {
        match (self, dataset) {
            (Scenario::Table(s), Dataset::Atoms(atoms)) => Ok(s.loss_table[w][atoms[i]]),
            (Scenario::Quantile(s), Dataset::Uniforms(us)) => {
                Ok(s.models[w].quantile_from_tail(us[i]))
            }
            _ => Err(Error::Contract("dataset kind does not match scenario kind".into())),
        }
    }

    /// Exact population risk `E ℓ(w, Z)`.
    pub fn population_risk(&self, w: usize) -> f64 {
        match self {
            Scenario::Table(s) => s
                .data_weights
                .iter()
                .zip(&s.loss_table[w])
                .map(|(&pw, &l)| pw * l)
                .sum(),
            Scenario::Quantile(s) => s.models[w].moment(1.0).expect("validated at construction"),
        }
    }

    /// Posterior-averaged exact population risk.
    pub fn posterior_risk(&self, posterior: &DiscreteDistribution) -> f64 {
        posterior.expectation(|w| self.population_risk(w))
    }

    /// Exact `E[(ℓ(w, Z) − threshold)₊]`, the tail integral of the loss of
    /// hypothesis `w` above `threshold`.
    pub fn tail_excess_mean(&self, w: usize, threshold: f64) -> Result<f64> {
        match self {
            Scenario::Table(s) => Ok(s
                .data_weights
                .iter()
                .zip(&s.loss_table[w])
                .map(|(&pw, &l)| pw * (l - threshold).max(0.0))
                .sum()),
            Scenario::Quantile(s) => s.models[w].tail_integral(threshold),
        }
    }

    /// Exact raw moment `E ℓ(w, Z)^p`.
    pub fn hypothesis_moment(&self, w: usize, p: f64) -> Result<f64> {
        match self {
            Scenario::Table(s) => Ok(s
                .data_weights
                .iter()
                .zip(&s.loss_table[w])
                .map(|(&pw, &l)| pw * l.powf(p))
                .sum()),
            Scenario::Quantile(s) => s.models[w].moment(p),
        }
    }

    /// `sup_w E ℓ(w, Z)^p` — the exact moment bound the theorems assume.
    pub fn moment_bound(&self, p: f64) -> Result<f64> {
        let mut sup: f64 = 0.0;
        for w in 0..self.hypothesis_count() {
            sup = sup.max(self.hypothesis_moment(w, p)?);
        }
        Ok(sup)
    }

    /// `sup_w Var(ℓ(w, Z))` — the exact variance bound the theorems assume.
    pub fn variance_bound(&self) -> Result<f64> {
        let mut sup: f64 = 0.0;
        for w in 0..self.hypothesis_count() {
            let m2 = self.hypothesis_moment(w, 2.0)?;
            let m1 = self.hypothesis_moment(w, 1.0)?;
            let v = if m2.is_finite() { (m2 - m1 * m1).max(0.0) } else { f64::INFINITY };
            sup = sup.max(v);
        }
        Ok(sup)
    }

    /// Diagnostic variance of the loss under `(W, Z) ~ posterior ⊗ data law`,
    /// the algorithm-dependent quantity some baselines are stated with.
    pub fn posterior_loss_variance(&self, posterior: &DiscreteDistribution) -> Result<f64> {
        let mut m1 = 0.0;
        let mut m2 = 0.0;
        for w in 0..self.hypothesis_count() {
            let pw = posterior.weight(w);
            if pw == 0.0 {
                continue;
            }
            let h2 = self.hypothesis_moment(w, 2.0)?;
            if !h2.is_finite() {
                return Ok(f64::INFINITY);
            }
            m1 += pw * self.hypothesis_moment(w, 1.0)?;
            m2 += pw * h2;
        }
        Ok((m2 - m1 * m1).max(0.0))
    }

    /// `sup_{w,z} ℓ(w, z)`; +∞ when any hypothesis has unbounded loss.
    pub fn max_loss(&self) -> f64 {
        match self {
            Scenario::Table(s) => s
                .loss_table
                .iter()
                .flatten()
                .cloned()
                .fold(0.0f64, f64::max),
            Scenario::Quantile(s) => s
                .models
                .iter()
                .map(|m| m.essential_sup())
                .fold(0.0f64, f64::max),
        }
    }

    /// The posterior the scenario's algorithm produces on this dataset.
    pub fn posterior(&self, dataset: &Dataset) -> Result<DiscreteDistribution> {
        match self.algorithm() {
            Algorithm::Gibbs { temperature } => {
                let risks = per_hypothesis_risks(self, dataset, &LossTransform::Identity)?;
                gibbs_posterior(&GibbsSpec {
                    prior: self.prior(),
                    risks: &risks,
                    temperature,
                })
            }
            Algorithm::Erm => {
                let risks = per_hypothesis_risks(self, dataset, &LossTransform::Identity)?;
                let mut best = 0;
                for (w, &r) in risks.iter().enumerate() {
                    if r < risks[best] {
                        best = w;
                    }
                }
                let mut weights = vec![0.0; risks.len()];
                weights[best] = 1.0;
                self.prior().with_weights(weights)
            }
            Algorithm::MeanEstimator => Err(Error::InvalidInput(
                "the mean estimator returns a point in hypothesis space, not a posterior over the finite class".into(),
            )),
        }
    }

    /// The mean-estimator output: the average of the drawn instance values.
    pub fn mean_estimate(&self, dataset: &Dataset) -> Result<f64> {
        match (self, dataset) {
            (Scenario::Table(s), Dataset::Atoms(atoms)) => {
                if atoms.is_empty() {
                    return Err(Error::InvalidInput("empty dataset".into()));
                }
                Ok(atoms.iter().map(|&z| s.atom_values[z]).sum::<f64>() / atoms.len() as f64)
            }
            _ => Err(Error::InvalidInput("mean estimate needs a table scenario and atom dataset".into())),
        }
    }

    /// Exact population mean of the data law (table scenarios).
    pub fn population_mean(&self) -> Result<f64> {
        match self {
            Scenario::Table(s) => Ok(s
                .atom_values
                .iter()
                .zip(&s.data_weights)
                .map(|(&v, &w)| v * w)
                .sum()),
            Scenario::Quantile(_) => {
                Err(Error::InvalidInput("population mean of the data law needs a table scenario".into()))
            }
        }
    }

    /// Probability of atom `z` under the data law (table scenarios).
    pub fn atom_prob(&self, z: usize) -> Result<f64> {
        match self {
            Scenario::Table(s) => Ok(s.data_weights[z]),
            Scenario::Quantile(_) => {
                Err(Error::InvalidInput("atom probabilities need a table scenario".into()))
            }
        }
    }

    /// Parse a scenario definition file. Schema:
    ///
    /// ```toml
    /// name = "demo"
    /// n = 100
    ///
    /// [algorithm]
    /// kind = "gibbs"          # "gibbs" | "erm" | "mean-estimator"
    /// temperature = 2.0       # gibbs only
    ///
    /// [data]                  # exactly one of:
    /// atoms = [0.0, 0.5, 1.0]        # discrete law with numeric atom values
    /// weights = [0.25, 0.5, 0.25]
    /// # generator = "uniform01"      # or a continuous uniform generator
    ///
    /// [[hypotheses]]          # one block per hypothesis; exactly one of:
    /// losses = [0.0, 0.2, 1.0]                          # row of a loss table
    /// # model = { kind = "pareto", scale = 1.0, shape = 3.0 }  # quantile loss
    ///
    /// [prior]                 # optional, defaults to uniform
    /// weights = [0.4, 0.3, 0.3]
    /// ```
    pub fn from_toml(text: &str) -> Result<Self> {
        let file: ScenarioFile =
            toml::from_str(text).map_err(|e| Error::Config(format!("scenario file: {e}")))?;
        file.build()
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    /// Built-in scenarios used by the validation experiments: `pareto-p2`,
    /// `pareto-p3`, `lognormal`, `interval`.
    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "pareto-p2" => {
                let base = LossModel::pareto(1.0, 3.0)?;
                let models = vec![base.scaled(0.8)?, base.clone(), base.scaled(1.25)?];
                Scenario::quantile("pareto-p2", models, 1000, Algorithm::Gibbs { temperature: 1.0 }, None)
            }
            "pareto-p3" => {
                let base = LossModel::pareto(1.0, 5.0)?;
                let models = vec![base.scaled(0.8)?, base.clone(), base.scaled(1.25)?];
                Scenario::quantile("pareto-p3", models, 1000, Algorithm::Gibbs { temperature: 1.0 }, None)
            }
            "lognormal" => {
                let base = LossModel::log_normal(0.0, 1.0)?;
                let models = vec![base.scaled(0.9)?, base.clone(), base.scaled(1.1)?];
                Scenario::quantile("lognormal", models, 2000, Algorithm::Gibbs { temperature: 1.0 }, None)
            }
            "interval" => Ok(make_interval_scenario(0.0, 100, 5)?
                .with_algorithm(Algorithm::Gibbs { temperature: 5.0 })),
            other => Err(Error::Config(format!("unknown scenario preset `{other}`"))),
        }
    }
}

fn sample_atom(cum_weights: &[f64], u: f64) -> usize {
    let mut i = match cum_weights.binary_search_by(|c| c.partial_cmp(&u).unwrap()) {
        Ok(i) | Err(i) => i.min(cum_weights.len() - 1),
    };
    // Duplicate cumulative values mark zero-weight atoms; take the first
    // index whose cumulative mass reaches u.
    while i > 0 && cum_weights[i - 1] >= u {
        i -= 1;
    }
    i
}

/// Squared loss `(w − z)²` of a real-valued estimate against an instance.
pub fn squared_loss(w: f64, z: f64) -> f64 {
    (w - z) * (w - z)
}

/// The averaging-algorithm scenario: instances live on a uniform grid of
/// `grid` points spanning `[a_offset, a_offset + 1]` with a uniform data
/// law, the loss is `(w − z)²`, the hypothesis candidates are the grid
/// points themselves, and the algorithm returns the average of the training
/// instances. The loss realized by the averaging algorithm stays below 1
/// (the interval width, squared) no matter how large `a_offset` is, even
/// though the class-wide worst-case loss against a fixed faraway candidate
/// grows without bound.
pub fn make_interval_scenario(a_offset: f64, n: usize, grid: usize) -> Result<Scenario> {
    if grid < 2 {
        return Err(Error::InvalidInput(format!("grid must have at least 2 points, got {grid}")));
    }
    let atoms: Vec<f64> =
        (0..grid).map(|j| a_offset + j as f64 / (grid - 1) as f64).collect();
    let weights = vec![1.0 / grid as f64; grid];
    let table: Vec<Vec<f64>> = atoms
        .iter()
        .map(|&w| atoms.iter().map(|&z| squared_loss(w, z)).collect())
        .collect();
    Scenario::table(
        format!("interval[a={a_offset},grid={grid}]"),
        atoms,
        weights,
        table,
        n,
        Algorithm::MeanEstimator,
        None,
    )
}

// ---------------------------------------------------------------------------
// Scenario definition file schema
// ---------------------------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    name: String,
    n: usize,
    algorithm: AlgorithmSpec,
    data: DataSpec,
    hypotheses: Vec<HypothesisSpec>,
    prior: Option<PriorSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
enum AlgorithmSpec {
    Gibbs { temperature: f64 },
    Erm,
    MeanEstimator,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DataSpec {
    atoms: Option<Vec<f64>>,
    weights: Option<Vec<f64>>,
    generator: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct HypothesisSpec {
    label: Option<String>,
    losses: Option<Vec<f64>>,
    model: Option<LossModel>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PriorSpec {
    weights: Vec<f64>,
}

impl ScenarioFile {
    fn build(self) -> Result<Scenario> {
        let algorithm = match self.algorithm {
            AlgorithmSpec::Gibbs { temperature } => Algorithm::Gibbs { temperature },
            AlgorithmSpec::Erm => Algorithm::Erm,
            AlgorithmSpec::MeanEstimator => Algorithm::MeanEstimator,
        };
        let prior = self
            .prior
            .map(|p| DiscreteDistribution::from_weights(p.weights))
            .transpose()?;

        match (&self.data.atoms, &self.data.generator) {
            (Some(atoms), None) => {
                let weights = self.data.weights.clone().ok_or_else(|| {
                    Error::Config("discrete data law needs `weights` alongside `atoms`".into())
                })?;
                let mut table = Vec::with_capacity(self.hypotheses.len());
                for (i, h) in self.hypotheses.iter().enumerate() {
                    let row = h.losses.clone().ok_or_else(|| {
                        Error::Config(format!(
                            "hypothesis {} needs `losses` when the data law is discrete",
                            h.label.clone().unwrap_or_else(|| i.to_string())
                        ))
                    })?;
                    if h.model.is_some() {
                        return Err(Error::Config(
                            "hypothesis cannot have both `losses` and `model`".into(),
                        ));
                    }
                    table.push(row);
                }
                Scenario::table(self.name, atoms.clone(), weights, table, self.n, algorithm, prior)
            }
            (None, Some(generator)) => {
                if generator != "uniform01" {
                    return Err(Error::Config(format!("unknown data generator `{generator}`")));
                }
                if self.data.weights.is_some() {
                    return Err(Error::Config("`weights` is only valid with `atoms`".into()));
                }
                let mut models = Vec::with_capacity(self.hypotheses.len());
                for (i, h) in self.hypotheses.iter().enumerate() {
                    let model = h.model.clone().ok_or_else(|| {
                        Error::Config(format!(
                            "hypothesis {} needs `model` when the data generator is continuous",
                            h.label.clone().unwrap_or_else(|| i.to_string())
                        ))
                    })?;
                    if h.losses.is_some() {
                        return Err(Error::Config(
                            "hypothesis cannot have both `losses` and `model`".into(),
                        ));
                    }
                    models.push(model);
                }
                Scenario::quantile(self.name, models, self.n, algorithm, prior)
            }
            (Some(_), Some(_)) => {
                Err(Error::Config("data law cannot have both `atoms` and `generator`".into()))
            }
            (None, None) => Err(Error::Config("data law needs `atoms` or `generator`".into())),
        }
    }
}
