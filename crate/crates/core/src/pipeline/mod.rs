//! End-to-end search for rainbow directed Hamilton cycles: flexible sets, a
//! `T`-absorber, a greedy path forest on the rest, and linking.

mod flexible;
mod forest;
mod link;
mod planted;

pub use flexible::{choose_flexible_sets, count_connectors, FlexConfig, FlexibleSets, Probe};
pub use forest::{
    grow_path_forest, reachable_forests, ArcChoice, ForestConfig, ForestRun, ForestStall, PathForest,
};
pub use link::{link_and_absorb, CycleAudit, HamiltonCycle, LinkConfig, LinkOutcome};
pub use planted::{planted_instance, PlantSpec, PlantedInstance, PlantedResources};

use crate::absorber::{
    build_rmbg, embed_t_absorber, AbsorberError, EmbedOptions, GadgetSupply, RMBGTemplate, TAbsorber,
    TemplateMode, CERTIFY_FLEX_LIMIT,
};
use crate::digraph::ColouredDigraph;
use crate::gadgets::{lower_quasirandom_check, CheckMode, LowerQuasirandomReport};
use crate::sampler::task_rng;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PipelineError {
    #[error("config: {0}")]
    Config(String),
    #[error("{0}")]
    Invalid(String),
    #[error("colour {colour} has {loops} loops, more than half the order")]
    LoopCondition { colour: usize, loops: usize },
    #[error("no certified flexible sets after {attempts} attempts (threshold {threshold}, worst probe {worst_probe:?})")]
    Flexible {
        attempts: usize,
        threshold: f64,
        worst_probe: Option<Probe>,
    },
    #[error(transparent)]
    Absorber(#[from] AbsorberError),
    #[error("forest stalled at step {} with {} components", .0.step, .0.components)]
    Forest(ForestStall),
    #[error("expected {expected} leftover colours, found {found}")]
    Leftover { expected: usize, found: usize },
    #[error("no connectors beyond component {component} after {lookups} lookups")]
    Link { component: usize, lookups: usize },
    #[error("connector search hit its limit of {lookups} lookups")]
    SearchLimit { lookups: usize },
    #[error("validation: {0}")]
    Validation(String),
    #[error("could not complete the planted square in {attempts} attempts")]
    Completion { attempts: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum TemplateChoice {
    Complete { parts: usize, flexible: usize },
    /// `7m` parts with `2m` flexible, certified.
    Rmbg { m: usize, mode: TemplateMode },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub seed: u64,
    pub template: TemplateChoice,
    pub embed: EmbedOptions,
    pub flexible: FlexConfig,
    /// Component budget is `max(1, floor(budget_scale * n^budget_exponent))`.
    pub budget_scale: f64,
    pub budget_exponent: f64,
    pub arc_choice: ArcChoice,
    pub connector_lengths: Vec<usize>,
    /// Fresh forests tried before the linking stage gives up.
    pub forest_retries: usize,
    pub link_search_limit: usize,
    /// Sampled triples for the lower-quasirandom pre-check; 0 skips it.
    pub quasirandom_samples: usize,
    pub certify_attempts: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            seed: 0,
            template: TemplateChoice::Complete {
                parts: 2,
                flexible: 2,
            },
            embed: EmbedOptions::default(),
            flexible: FlexConfig::default(),
            budget_scale: 1.0,
            budget_exponent: 0.25,
            arc_choice: ArcChoice::Random,
            connector_lengths: vec![1, 2, 3, 4],
            forest_retries: 200,
            link_search_limit: 100_000,
            quasirandom_samples: 200,
            certify_attempts: 50,
        }
    }
}

impl PipelineConfig {
    /// Values as stated in the construction: budget `n^{9/10}`, connectors
    /// of length four, three-arc absorber paths.
    pub fn paper() -> Self {
        PipelineConfig {
            budget_exponent: 0.9,
            connector_lengths: vec![4],
            ..Self::default()
        }
    }

    /// Settings for planted instances: a single spanning path and many
    /// forest retries.
    pub fn planted() -> Self {
        PipelineConfig {
            budget_scale: 1.0,
            budget_exponent: 0.0,
            forest_retries: 20_000,
            quasirandom_samples: 0,
            ..Self::default()
        }
    }

    pub fn budget(&self, n: usize) -> usize {
        let b = (self.budget_scale * (n as f64).powf(self.budget_exponent)).floor();
        (b.max(1.0) as usize).min(n.max(1))
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        if !(self.budget_scale > 0.0) || !self.budget_exponent.is_finite() || self.budget_exponent < 0.0 {
            return Err(PipelineError::Config("budget scale must be positive and exponent non-negative".into()));
        }
        if self.connector_lengths.is_empty() || self.connector_lengths.contains(&0) {
            return Err(PipelineError::Config("connector lengths must be positive".into()));
        }
        if self.embed.path_len == 0 || self.embed.link_len == 0 {
            return Err(PipelineError::Config("absorber path lengths must be positive".into()));
        }
        if self.forest_retries == 0 {
            return Err(PipelineError::Config("forest_retries must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: String,
    pub ok: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageFailure {
    pub stage: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub n: usize,
    pub config: PipelineConfig,
    pub budget: usize,
    pub stages: Vec<StageRecord>,
    pub quasirandom: Option<LowerQuasirandomReport>,
    pub flexible: Option<FlexibleSets>,
    pub t_absorber: Option<TAbsorber>,
    pub forest: Option<PathForest>,
    pub forest_attempts: usize,
    /// Valid-arc counts of the forest that was linked (or the last one tried).
    pub choice_counts: Vec<usize>,
    /// Natural log of the product of `choice_counts`.
    pub log_choice_product: f64,
    /// Natural log of the product of `(n'' - j + 1)^3 / n` over the same steps.
    pub log_reference_product: f64,
    pub outcome: Option<LinkOutcome>,
    pub failure: Option<StageFailure>,
}

impl PipelineReport {
    pub fn succeeded(&self) -> bool {
        self.outcome.is_some() && self.failure.is_none()
    }

    fn record(&mut self, stage: &str, ok: bool, detail: String) {
        self.stages.push(StageRecord {
            stage: stage.into(),
            ok,
            detail,
        });
    }

    fn fail(mut self, stage: &str, e: impl std::fmt::Display) -> Self {
        self.record(stage, false, e.to_string());
        self.failure = Some(StageFailure {
            stage: stage.into(),
            error: e.to_string(),
        });
        self
    }
}

/// Runs every stage in order and reports the first failure by stage name.
/// With `resources`, the flexible sets, template, roots and gadgets come from
/// a planted instance instead of being chosen and searched for.
pub fn run_pipeline(
    g: &ColouredDigraph,
    cfg: &PipelineConfig,
    resources: Option<&PlantedResources>,
) -> PipelineReport {
    let n = g.n();
    let budget = cfg.budget(n);
    let mut rep = PipelineReport {
        n,
        config: cfg.clone(),
        budget,
        stages: Vec::new(),
        quasirandom: None,
        flexible: None,
        t_absorber: None,
        forest: None,
        forest_attempts: 0,
        choice_counts: Vec::new(),
        log_choice_product: 0.0,
        log_reference_product: 0.0,
        outcome: None,
        failure: None,
    };
    if let Err(e) = cfg.validate() {
        return rep.fail("config", e);
    }
    if cfg.quasirandom_samples > 0 {
        match lower_quasirandom_check(
            g,
            CheckMode::Sampled {
                samples: cfg.quasirandom_samples,
                seed: cfg.seed,
            },
        ) {
            Ok(q) => {
                let detail = if q.holds {
                    "sampled triples satisfy the lower bound".to_string()
                } else {
                    format!("warning: lower bound fails on a sampled triple (deviation {})", q.min_deviation)
                };
                rep.record("quasirandom", true, detail);
                rep.quasirandom = Some(q);
            }
            Err(e) => rep.record("quasirandom", true, format!("warning: check skipped: {e}")),
        }
    }

    let (template, u, d, v_flex, c_flex, supply, embed) = match resources {
        Some(r) => {
            rep.record("flexible", true, "supplied by the planted instance".into());
            (
                r.template.clone(),
                r.roots_v.clone(),
                r.roots_c.clone(),
                r.flex_v.clone(),
                r.flex_c.clone(),
                r.supply.clone(),
                r.embed,
            )
        }
        None => {
            let mut rng = task_rng(cfg.seed, 1);
            let template = match &cfg.template {
                TemplateChoice::Complete { parts, flexible } => {
                    if flexible > parts || *parts == 0 {
                        return rep.fail("template", "flexible parts exceed parts");
                    }
                    RMBGTemplate::complete(*parts, *flexible)
                }
                TemplateChoice::Rmbg { m, mode } => {
                    match build_rmbg(*m, *mode, CERTIFY_FLEX_LIMIT, cfg.certify_attempts, &mut rng) {
                        Ok(t) => t,
                        Err(e) => return rep.fail("template", e),
                    }
                }
            };
            rep.record("template", true, format!("{} parts, {} edges", template.size, template.edges.len()));
            let fcfg = FlexConfig {
                size: template.flex_a.len().max(template.flex_b.len()),
                ..cfg.flexible.clone()
            };
            let flex = match choose_flexible_sets(g, &fcfg, cfg.seed) {
                Ok(f) => f,
                Err(e) => return rep.fail("flexible", e),
            };
            rep.record("flexible", true, format!("certified after {} attempts", flex.attempts));
            let v_flex: Vec<usize> = flex.vertices[..template.flex_a.len()].to_vec();
            let c_flex: Vec<usize> = flex.colours[..template.flex_b.len()].to_vec();
            let pad = |flex: &[usize], rng: &mut rand_chacha::ChaCha8Rng| {
                let mut rest: Vec<usize> = (1..=n).filter(|x| !flex.contains(x)).collect();
                rest.shuffle(rng);
                let mut out = flex.to_vec();
                out.extend(rest.into_iter().take(template.size - flex.len()));
                out
            };
            let u = pad(&v_flex, &mut rng);
            let d = pad(&c_flex, &mut rng);
            rep.flexible = Some(flex);
            (template, u, d, v_flex, c_flex, GadgetSupply::Search, cfg.embed)
        }
    };

    let t_abs = match embed_t_absorber(g, &template, &u, &d, &v_flex, &c_flex, &supply, &embed) {
        Ok(t) => t,
        Err(e) => return rep.fail("embed", e),
    };
    rep.record(
        "embed",
        true,
        format!("{} vertices, {} colours", t_abs.vertices().len(), t_abs.colours().len()),
    );
    let excluded: Vec<usize> = t_abs.vertices().into_iter().collect();
    let forbidden: Vec<usize> = t_abs.colours().into_iter().collect();
    rep.t_absorber = Some(t_abs.clone());

    let fcfg = ForestConfig {
        budget,
        choice: cfg.arc_choice,
    };
    let lcfg = LinkConfig {
        connector_lengths: cfg.connector_lengths.clone(),
        budget,
        search_limit: cfg.link_search_limit,
    };
    let mut last: Option<(&str, PipelineError)> = None;
    for attempt in 0..cfg.forest_retries {
        rep.forest_attempts = attempt + 1;
        let mut rng = task_rng(cfg.seed, 100 + attempt as u64);
        let run = match grow_path_forest(g, &excluded, &forbidden, &fcfg, &mut rng) {
            Ok(r) => r,
            Err(e) => return rep.fail("forest", e),
        };
        rep.choice_counts = run.choice_counts.clone();
        rep.log_choice_product = run.log_choice_product();
        rep.log_reference_product = run.log_reference_product();
        rep.forest = Some(run.forest.clone());
        if let Some(s) = run.stall {
            last = Some(("forest", PipelineError::Forest(s)));
            if cfg.arc_choice == ArcChoice::Lexicographic {
                break;
            }
            continue;
        }
        match link_and_absorb(g, &t_abs, &run.forest, &lcfg) {
            Ok(out) => {
                rep.record("forest", true, format!("{} components after {} attempts", run.forest.component_count(), attempt + 1));
                rep.record("link", true, format!("{} connectors, |X| = {}", out.connectors.len(), out.deleted_vertices.len()));
                rep.outcome = Some(out);
                return rep;
            }
            Err(e) => {
                let fatal = matches!(e, PipelineError::Validation(_) | PipelineError::Leftover { .. });
                last = Some(("link", e));
                if fatal || cfg.arc_choice == ArcChoice::Lexicographic {
                    break;
                }
            }
        }
    }
    match last {
        Some((stage, e)) => {
            let msg = format!("{e} (after {} forest attempts)", rep.forest_attempts);
            rep.fail(stage, msg)
        }
        None => rep.fail("forest", "no attempts made"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digraph::{digraph_to_latin, latin_to_digraph};
    use crate::positions::{classify_position_set, TransversalKind};
    use crate::sampler::{sample_latin_square, SamplerConfig};

    #[test]
    fn planted_instance_yields_validated_hamilton_transversal() {
        let inst = planted_instance(&PlantSpec::desk(4), 11).unwrap();
        let g = latin_to_digraph(&inst.square);
        let rep = run_pipeline(&g, &PipelineConfig::planted(), Some(&inst.resources));
        assert!(rep.succeeded(), "{:?}", rep.failure);
        let out = rep.outcome.unwrap();
        assert!(out.audit.ok());
        assert_eq!(rep.t_absorber.as_ref(), Some(&inst.planted));
        let sq = digraph_to_latin(&g).unwrap();
        let cls = classify_position_set(&sq, &out.cycle.positions()).unwrap();
        assert_eq!(cls.kind, TransversalKind::Hamilton);
    }

    #[test]
    fn small_random_square_fails_with_a_stage() {
        let g = latin_to_digraph(&sample_latin_square(&SamplerConfig::square(12, 1)));
        let rep = run_pipeline(&g, &PipelineConfig::default(), None);
        assert!(!rep.succeeded());
        let f = rep.failure.unwrap();
        assert!(["flexible", "embed", "forest", "link"].contains(&f.stage.as_str()), "{f:?}");
    }

    #[test]
    fn budget_follows_exponent() {
        let c = PipelineConfig::default();
        assert_eq!(c.budget(20), 2);
        assert_eq!(PipelineConfig::planted().budget(60), 1);
        assert_eq!(PipelineConfig::paper().budget(60), 39);
    }
}
