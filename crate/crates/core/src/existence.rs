//! Theorem-level existence checkers: do the sampled asymptotic limit sets
//! sit inside the sampled stationary-value set, and what does that say
//! about weak Pareto solutions?
//!
//! The sufficient conditions implemented here share one shape. Under the
//! boundedness hypothesis (the image section of the selected objectives is
//! bounded below — "weak section-boundedness"), each of three inclusions
//! implies that weak solutions exist: the limit values reachable along
//! escaping sequences with vanishing residual, vanishing norm-weighted
//! residual, or inside the tangency variety must all be attained at
//! stationary points of the sublevel set.
//!
//! Everything is grid- and probe-sampled, so the reports are three-valued
//! and deliberately one-sided:
//!
//! * an inclusion **holds** when every witness value matches a sampled
//!   stationary value (vacuously when no probe produces a witness);
//! * it **fails** when an exact witness matches nothing — which refutes
//!   this sufficient condition and nothing more: solutions may well exist
//!   anyway, and no function in this module ever claims nonexistence;
//! * everything else is **unknown**.

use crate::asymptotics::{
    classify, estimate_limit_set, stationary_values, AsymptoticsError, ConditionKind,
    ConditionReport, ConditionVerdict, LimitEstimate, LimitMode, LimitOptions, LimitWitness,
    ProbePath, StationaryValues,
};
use crate::dsl::VectorObjective;
use crate::feasible::{FeasibleSet, Region};
use crate::sections::{
    check_index_set, section_sample, GridSpec, SectionParams, SectionReport, SublevelSet,
};

/// Verdict on one sampled inclusion.
#[derive(Debug, Clone)]
pub enum InclusionVerdict {
    /// Every witness value matched a stationary value; the pairs are
    /// reported.
    Holds { matched: Vec<(Vec<f64>, Vec<f64>)> },
    /// No probe produced a witness, so the sampled limit set is empty.
    HoldsVacuously,
    /// At least one exact witness matched nothing. The nearest stationary
    /// value to the first unmatched witness is reported when one exists.
    Fails {
        unmatched: Vec<Vec<f64>>,
        nearest: Option<(f64, Vec<f64>)>,
    },
    /// Only inexact evidence is unmatched, or the comparison set itself
    /// lost flagged candidates.
    Unknown { reason: String },
}

impl InclusionVerdict {
    /// True for both flavors of holding.
    pub fn holds(&self) -> bool {
        matches!(
            self,
            InclusionVerdict::Holds { .. } | InclusionVerdict::HoldsVacuously
        )
    }
}

/// One inclusion: the mode that generated the witnesses and the verdict.
#[derive(Debug, Clone)]
pub struct InclusionReport {
    pub mode: LimitMode,
    pub verdict: InclusionVerdict,
    pub estimate: LimitEstimate,
}

/// What the checker concluded about weak Pareto solutions.
#[derive(Debug, Clone)]
pub enum Conclusion {
    /// The hypothesis was evidenced and an inclusion held.
    SolutionsExist { via: &'static str },
    /// Nothing was certified. This never asserts that solutions are
    /// absent.
    Inconclusive { reason: String },
}

/// Full record of one existence check.
#[derive(Debug, Clone)]
pub struct ExistenceReport {
    /// True when the check ran on the restricted data (selected objectives
    /// over the anchor's sublevel set) rather than the data as given.
    pub restricted: bool,
    /// Sampled evidence for the boundedness hypothesis.
    pub hypothesis: SectionReport,
    /// Whether that evidence supports the hypothesis.
    pub hypothesis_ok: bool,
    /// The three inclusions, in mode order: residual decay, scaled
    /// residual decay, tangency.
    pub inclusions: Vec<InclusionReport>,
    /// The sampled stationary-value set all witnesses were matched
    /// against.
    pub stationary: StationaryValues,
    pub conclusion: Conclusion,
    /// Ordering sanity: scaled-residual witnesses form a subset of
    /// residual witnesses, so the residual inclusion holding while the
    /// scaled one fails indicates a sampling artifact. False flags it.
    pub consistent: bool,
}

fn nearest_value(sv: &StationaryValues, value: &[f64]) -> Option<(f64, Vec<f64>)> {
    sv.values
        .iter()
        .map(|u| {
            let d = u
                .iter()
                .zip(value)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            (d, u.clone())
        })
        .min_by(|a, b| a.0.total_cmp(&b.0))
}

fn classify_inclusion(estimate: &LimitEstimate, sv: &StationaryValues) -> InclusionVerdict {
    let mut matched = Vec::new();
    let mut unmatched = Vec::new();
    let mut flagged_unmatched = false;
    for w in estimate.witnesses() {
        match nearest_value(sv, &w.value) {
            Some((d, u)) if d <= crate::INCLUSION_MATCH_TOL => {
                matched.push((w.value.clone(), u));
            }
            _ if w.flagged => flagged_unmatched = true,
            _ => unmatched.push(w.value.clone()),
        }
    }
    if !unmatched.is_empty() {
        if sv.flagged > 0 {
            return InclusionVerdict::Unknown {
                reason: format!(
                    "{} witness(es) unmatched, but {} stationary candidate(s) with inexact \
                     hulls were excluded from the comparison set",
                    unmatched.len(),
                    sv.flagged
                ),
            };
        }
        let nearest = nearest_value(sv, &unmatched[0]);
        return InclusionVerdict::Fails { unmatched, nearest };
    }
    if flagged_unmatched {
        return InclusionVerdict::Unknown {
            reason: "only witnesses resting on inexact subdifferential hulls are unmatched"
                .into(),
        };
    }
    if matched.is_empty() {
        InclusionVerdict::HoldsVacuously
    } else {
        InclusionVerdict::Holds { matched }
    }
}

/// The three inclusion checks over one data set.
fn inclusion_engine<R: Region + Sync>(
    f: &VectorObjective,
    index_set: &[usize],
    region: &R,
    y0: &[f64],
    probes: &[ProbePath],
    grid: &GridSpec,
    opts: &LimitOptions,
) -> Result<(Vec<InclusionReport>, StationaryValues), AsymptoticsError> {
    let sv = stationary_values(f, index_set, region, y0, grid, opts)?;
    let mut inclusions = Vec::with_capacity(3);
    for mode in [LimitMode::Nu, LimitMode::ScaledNu, LimitMode::Tangency] {
        let estimate = estimate_limit_set(f, index_set, region, y0, probes, mode, opts)?;
        let verdict = classify_inclusion(&estimate, &sv);
        inclusions.push(InclusionReport {
            mode,
            verdict,
            estimate,
        });
    }
    Ok((inclusions, sv))
}

fn conclude(hypothesis_ok: bool, inclusions: &[InclusionReport]) -> Conclusion {
    if !hypothesis_ok {
        return Conclusion::Inconclusive {
            reason: "the sampled image section is not evidenced bounded below (weak \
                     section-boundedness), so the sufficient conditions are not in force"
                .into(),
        };
    }
    if let Some(r) = inclusions.iter().find(|r| r.verdict.holds()) {
        return Conclusion::SolutionsExist {
            via: r.mode.name(),
        };
    }
    Conclusion::Inconclusive {
        reason: "no sampled inclusion held; failure of these sufficient conditions does not \
                 witness nonexistence — solutions may exist regardless"
            .into(),
    }
}

fn consistency(inclusions: &[InclusionReport]) -> bool {
    let nu_holds = inclusions
        .iter()
        .find(|r| r.mode == LimitMode::Nu)
        .map_or(false, |r| r.verdict.holds());
    let scaled_fails = inclusions
        .iter()
        .find(|r| r.mode == LimitMode::ScaledNu)
        .map_or(false, |r| matches!(r.verdict, InclusionVerdict::Fails { .. }));
    !(nu_holds && scaled_fails)
}

/// Existence check on the data as given: limit sets of `f` over `region`
/// with admission `f ≤ f(x0)`, witnesses tracked through the selected
/// objectives, matched against stationary values on the grid.
#[allow(clippy::too_many_arguments)]
pub fn inclusion_existence(
    f: &VectorObjective,
    index_set: &[usize],
    region: &FeasibleSet,
    x0: &[f64],
    probes: &[ProbePath],
    grid: &GridSpec,
    section_params: &SectionParams,
    opts: &LimitOptions,
) -> Result<ExistenceReport, AsymptoticsError> {
    check_index_set(index_set, f)?;
    let hypothesis = section_sample(f, index_set, region, x0, section_params)?;
    let hypothesis_ok = hypothesis.verdict.is_bounded_evidence();
    let y0 = f.eval(x0);
    let (inclusions, stationary) =
        inclusion_engine(f, index_set, region, &y0, probes, grid, opts)?;
    let conclusion = conclude(hypothesis_ok, &inclusions);
    let consistent = consistency(&inclusions);
    Ok(ExistenceReport {
        restricted: false,
        hypothesis,
        hypothesis_ok,
        inclusions,
        stationary,
        conclusion,
        consistent,
    })
}

/// Existence check on the restricted data: the selected objectives over
/// the anchor's sublevel set, with every component tracked.
#[allow(clippy::too_many_arguments)]
pub fn restricted_inclusion_existence(
    f: &VectorObjective,
    index_set: &[usize],
    region: &FeasibleSet,
    x0: &[f64],
    probes: &[ProbePath],
    grid: &GridSpec,
    section_params: &SectionParams,
    opts: &LimitOptions,
) -> Result<ExistenceReport, AsymptoticsError> {
    check_index_set(index_set, f)?;
    let hypothesis = section_sample(f, index_set, region, x0, section_params)?;
    let hypothesis_ok = hypothesis.verdict.is_bounded_evidence();
    let restricted = f.restrict(index_set);
    let sublevel = SublevelSet::at_point(f, region, x0, opts.membership_tol)?;
    let y0 = restricted.eval(x0);
    let all: Vec<usize> = (0..restricted.len()).collect();
    let (inclusions, stationary) =
        inclusion_engine(&restricted, &all, &sublevel, &y0, probes, grid, opts)?;
    let conclusion = conclude(hypothesis_ok, &inclusions);
    let consistent = consistency(&inclusions);
    Ok(ExistenceReport {
        restricted: true,
        hypothesis,
        hypothesis_ok,
        inclusions,
        stationary,
        conclusion,
        consistent,
    })
}

/// Result of running the four asymptotic conditions side by side.
#[derive(Debug, Clone)]
pub struct EquivalenceReport {
    pub hypothesis: SectionReport,
    /// When the boundedness hypothesis is not evidenced the comparison is
    /// refused (the four conditions are only equivalent under it) and the
    /// reason is recorded here.
    pub refused: Option<String>,
    /// The four condition reports, in [`ConditionKind::all`] order; empty
    /// when refused.
    pub conditions: Vec<ConditionReport>,
    /// `Some(true)` when all four verdicts are known and identical,
    /// `Some(false)` when known and split, `None` when any is unknown.
    pub agreement: Option<bool>,
    /// When all four fail with witness values that pairwise agree, the
    /// shared value.
    pub shared_witness: Option<Vec<f64>>,
}

/// Runs the four conditions of the restricted problem side by side under
/// the boundedness hypothesis, refusing (not failing) when the hypothesis
/// itself lacks sampled evidence.
pub fn equivalence_harness(
    f: &VectorObjective,
    index_set: &[usize],
    region: &FeasibleSet,
    x0: &[f64],
    probes: &[ProbePath],
    section_params: &SectionParams,
    opts: &LimitOptions,
) -> Result<EquivalenceReport, AsymptoticsError> {
    check_index_set(index_set, f)?;
    let hypothesis = section_sample(f, index_set, region, x0, section_params)?;
    if !hypothesis.verdict.is_bounded_evidence() {
        return Ok(EquivalenceReport {
            hypothesis,
            refused: Some(
                "the sampled image section is not evidenced bounded below (weak \
                 section-boundedness); the four conditions are only equivalent under that \
                 hypothesis, so the comparison is refused"
                    .into(),
            ),
            conditions: Vec::new(),
            agreement: None,
            shared_witness: None,
        });
    }

    let restricted = f.restrict(index_set);
    let sublevel = SublevelSet::at_point(f, region, x0, opts.membership_tol)?;
    let y0 = restricted.eval(x0);
    let all: Vec<usize> = (0..restricted.len()).collect();
    let mut conditions = Vec::with_capacity(4);
    for kind in ConditionKind::all() {
        let estimate = estimate_limit_set(
            &restricted,
            &all,
            &sublevel,
            &y0,
            probes,
            kind.mode(),
            opts,
        )?;
        let verdict = classify(kind, &hypothesis.verdict, &estimate);
        conditions.push(ConditionReport {
            kind,
            verdict,
            section: hypothesis.clone(),
            estimate,
        });
    }

    let states: Vec<Option<bool>> = conditions
        .iter()
        .map(|c| match &c.verdict {
            ConditionVerdict::Holds { .. } => Some(true),
            ConditionVerdict::Fails { .. } => Some(false),
            ConditionVerdict::Unknown { .. } => None,
        })
        .collect();
    let agreement = if states.iter().any(Option::is_none) {
        None
    } else {
        Some(states.windows(2).all(|w| w[0] == w[1]))
    };

    let witnesses: Vec<&LimitWitness> = conditions
        .iter()
        .filter_map(|c| match &c.verdict {
            ConditionVerdict::Fails { witness } => Some(witness),
            _ => None,
        })
        .collect();
    let shared_witness = if witnesses.len() == 4 {
        let first = &witnesses[0].value;
        let agree = witnesses.iter().all(|w| {
            w.value
                .iter()
                .zip(first)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
                <= crate::INCLUSION_MATCH_TOL
        });
        agree.then(|| first.clone())
    } else {
        None
    };

    Ok(EquivalenceReport {
        hypothesis,
        refused: None,
        conditions,
        agreement,
        shared_witness,
    })
}

/// The sufficiency direction alone: certified conditions imply solutions.
#[derive(Debug, Clone)]
pub struct SufficiencyReport {
    pub harness: EquivalenceReport,
    pub conclusion: Conclusion,
}

/// Checks whether any of the four conditions is certified and concludes
/// existence from it; anything short of a certificate is inconclusive.
pub fn condition_sufficiency(
    f: &VectorObjective,
    index_set: &[usize],
    region: &FeasibleSet,
    x0: &[f64],
    probes: &[ProbePath],
    section_params: &SectionParams,
    opts: &LimitOptions,
) -> Result<SufficiencyReport, AsymptoticsError> {
    let harness = equivalence_harness(f, index_set, region, x0, probes, section_params, opts)?;
    let conclusion = if let Some(reason) = &harness.refused {
        Conclusion::Inconclusive {
            reason: reason.clone(),
        }
    } else if let Some(c) = harness.conditions.iter().find(|c| {
        matches!(
            c.verdict,
            ConditionVerdict::Holds { .. }
        )
    }) {
        Conclusion::SolutionsExist {
            via: c.kind.name(),
        }
    } else {
        Conclusion::Inconclusive {
            reason: "no condition was certified; failing conditions do not witness \
                     nonexistence — solutions may exist regardless"
                .into(),
        }
    };
    Ok(SufficiencyReport {
        harness,
        conclusion,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asymptotics::{LimitWitness, PathOutcome, PathStatus};
    use crate::dsl::parse;
    use crate::feasible::Cell;

    fn obj(dim: usize, exprs: &[&str]) -> VectorObjective {
        VectorObjective::new(dim, exprs.iter().map(|s| parse(s).unwrap()).collect()).unwrap()
    }

    fn estimate_with(witness: Option<LimitWitness>) -> LimitEstimate {
        LimitEstimate {
            outcomes: vec![PathOutcome {
                index: 0,
                status: if witness.is_some() {
                    PathStatus::Accepted
                } else {
                    PathStatus::SoftRejected("test".into())
                },
                max_sublevel_norm: 100.0,
                witness,
            }],
        }
    }

    fn witness(value: Vec<f64>, flagged: bool) -> LimitWitness {
        LimitWitness {
            path: 0,
            value,
            final_point: vec![1e6],
            residuals: vec![0.0],
            norms: vec![1e6],
            flagged,
        }
    }

    fn stationary(values: Vec<Vec<f64>>, flagged: usize) -> StationaryValues {
        StationaryValues {
            points: values.iter().map(|_| vec![0.0]).collect(),
            raw_count: values.len(),
            values,
            flagged,
            skipped: 0,
        }
    }

    #[test]
    fn matched_witnesses_hold() {
        let est = estimate_with(Some(witness(vec![0.5], false)));
        let sv = stationary(vec![vec![0.50002]], 0);
        match classify_inclusion(&est, &sv) {
            InclusionVerdict::Holds { matched } => {
                assert_eq!(matched.len(), 1);
                assert_eq!(matched[0].1, vec![0.50002]);
            }
            other => panic!("expected holds, got {other:?}"),
        }
    }

    #[test]
    fn no_witnesses_hold_vacuously() {
        let est = estimate_with(None);
        let sv = stationary(vec![vec![-1.0]], 0);
        assert!(matches!(
            classify_inclusion(&est, &sv),
            InclusionVerdict::HoldsVacuously
        ));
    }

    #[test]
    fn unmatched_exact_witnesses_fail_with_nearest() {
        let est = estimate_with(Some(witness(vec![0.0], false)));
        let sv = stationary(vec![vec![-1.0]], 0);
        match classify_inclusion(&est, &sv) {
            InclusionVerdict::Fails { unmatched, nearest } => {
                assert_eq!(unmatched, vec![vec![0.0]]);
                let (d, v) = nearest.unwrap();
                assert!((d - 1.0).abs() < 1e-12);
                assert_eq!(v, vec![-1.0]);
            }
            other => panic!("expected fails, got {other:?}"),
        }
    }

    #[test]
    fn flagged_evidence_stays_unknown() {
        let est = estimate_with(Some(witness(vec![0.0], true)));
        let sv = stationary(vec![vec![-1.0]], 0);
        assert!(matches!(
            classify_inclusion(&est, &sv),
            InclusionVerdict::Unknown { .. }
        ));

        let est = estimate_with(Some(witness(vec![0.0], false)));
        let sv = stationary(vec![vec![-1.0]], 2);
        match classify_inclusion(&est, &sv) {
            InclusionVerdict::Unknown { reason } => {
                assert!(reason.contains("excluded"), "{reason}")
            }
            other => panic!("expected unknown, got {other:?}"),
        }
    }

    #[test]
    fn empty_stationary_set_fails_without_nearest() {
        let est = estimate_with(Some(witness(vec![0.0], false)));
        let sv = stationary(vec![], 0);
        match classify_inclusion(&est, &sv) {
            InclusionVerdict::Fails { nearest, .. } => assert!(nearest.is_none()),
            other => panic!("expected fails, got {other:?}"),
        }
    }

    #[test]
    fn coercive_problem_concludes_existence_vacuously() {
        let f = obj(2, &["x1^2 + x2^2"]);
        let region = FeasibleSet::whole_space(2);
        let grid = GridSpec::uniform(vec![(-4.0, 4.0), (-4.0, 4.0)], 33);
        let report = inclusion_existence(
            &f,
            &[0],
            &region,
            &[2.0, 0.0],
            &[],
            &grid,
            &SectionParams::default(),
            &LimitOptions::default(),
        )
        .unwrap();
        assert!(report.hypothesis_ok);
        assert!(!report.restricted);
        assert!(report.consistent);
        // The origin is a genuine stationary point on the grid.
        assert!(report
            .stationary
            .values
            .iter()
            .any(|v| v[0].abs() < 1e-12));
        for inc in &report.inclusions {
            assert!(
                matches!(inc.verdict, InclusionVerdict::HoldsVacuously),
                "{:?}: {:?}",
                inc.mode,
                inc.verdict
            );
        }
        assert!(matches!(
            report.conclusion,
            Conclusion::SolutionsExist { .. }
        ));
    }

    #[test]
    fn escaping_witness_matches_the_stationary_tail() {
        // One objective decays, the other is a kink pinned at x = 8; past
        // the kink the two subgradients straddle zero, so every far point
        // is stationary and the escaping witness value 0 is matched.
        let f = obj(1, &["exp(0 - x1)", "abs(x1 - 8)"]);
        let region =
            FeasibleSet::new(1, vec![Cell::from_box(vec![0.0], vec![f64::INFINITY])]).unwrap();
        let x0 = [2097152.0];
        let probes = [ProbePath::Explicit {
            points: (14..=20).map(|k| vec![f64::powi(2.0, k)]).collect(),
        }];
        let grid = GridSpec::uniform(vec![(0.0, 2097152.0)], 257);
        let report = inclusion_existence(
            &f,
            &[0],
            &region,
            &x0,
            &probes,
            &grid,
            &SectionParams::default(),
            &LimitOptions::default(),
        )
        .unwrap();
        assert!(report.hypothesis_ok);
        for inc in &report.inclusions {
            assert!(
                matches!(inc.verdict, InclusionVerdict::Holds { .. }),
                "{:?}: {:?}",
                inc.mode,
                inc.verdict
            );
        }
        assert!(matches!(
            report.conclusion,
            Conclusion::SolutionsExist { via } if via == "residual-decay"
        ));
        assert!(report.consistent);
    }

    #[test]
    fn restricted_check_rejects_the_unreachable_witness() {
        // Restricted to the first objective over the anchor's sublevel
        // set, the only vanishing residual sits at the corner (-1, 0) with
        // value -1, while probes approach value 0: every inclusion fails
        // and the conclusion degrades to inconclusive — never to a
        // nonexistence claim.
        let f = obj(2, &["0.5*x1^2*x2 + x1", "abs(x1)"]);
        let region = FeasibleSet::new(
            2,
            vec![Cell::from_box(
                vec![-1.0, 0.0],
                vec![f64::INFINITY, f64::INFINITY],
            )],
        )
        .unwrap();
        let probes = [ProbePath::Explicit {
            points: (4..=24)
                .map(|k| vec![-f64::powi(2.0, -k), f64::powi(2.0, k)])
                .collect(),
        }];
        let grid = GridSpec {
            window: vec![(-1.0, 0.0), (0.0, 4.0)],
            resolution: vec![33, 33],
        };
        let report = restricted_inclusion_existence(
            &f,
            &[0],
            &region,
            &[-1.0, 2.0],
            &probes,
            &grid,
            &SectionParams::default(),
            &LimitOptions::default(),
        )
        .unwrap();
        assert!(report.hypothesis_ok);
        assert!(report.restricted);
        assert_eq!(report.stationary.values, vec![vec![-1.0]]);
        for inc in &report.inclusions {
            match &inc.verdict {
                InclusionVerdict::Fails { unmatched, nearest } => {
                    assert!(unmatched[0][0].abs() < 1e-4, "{:?}", inc.mode);
                    let (d, v) = nearest.clone().unwrap();
                    assert!((d - 1.0).abs() < 1e-3);
                    assert_eq!(v, vec![-1.0]);
                }
                other => panic!("{:?}: expected fails, got {other:?}", inc.mode),
            }
        }
        match &report.conclusion {
            Conclusion::Inconclusive { reason } => {
                assert!(reason.contains("nonexistence"), "{reason}")
            }
            other => panic!("expected inconclusive, got {other:?}"),
        }
        assert!(report.consistent);
    }

    #[test]
    fn harness_refuses_without_the_hypothesis() {
        let f = obj(1, &["x1"]);
        let region = FeasibleSet::whole_space(1);
        let report = equivalence_harness(
            &f,
            &[0],
            &region,
            &[0.0],
            &[],
            &SectionParams::default(),
            &LimitOptions::default(),
        )
        .unwrap();
        let reason = report.refused.expect("must refuse");
        assert!(reason.contains("weak section-boundedness"), "{reason}");
        assert!(report.conditions.is_empty());
        assert_eq!(report.agreement, None);
    }

    #[test]
    fn harness_agreement_on_a_coercive_problem() {
        let f = obj(2, &["x1^2 + x2^2"]);
        let region = FeasibleSet::whole_space(2);
        let report = equivalence_harness(
            &f,
            &[0],
            &region,
            &[2.0, 0.0],
            &[],
            &SectionParams::default(),
            &LimitOptions::default(),
        )
        .unwrap();
        assert!(report.refused.is_none());
        assert_eq!(report.conditions.len(), 4);
        assert_eq!(report.agreement, Some(true));
        assert!(report.shared_witness.is_none());
        let s = condition_sufficiency(
            &f,
            &[0],
            &region,
            &[2.0, 0.0],
            &[],
            &SectionParams::default(),
            &LimitOptions::default(),
        )
        .unwrap();
        assert!(matches!(s.conclusion, Conclusion::SolutionsExist { .. }));
    }

    #[test]
    fn harness_reports_the_shared_failing_witness() {
        let f = obj(1, &["exp(0 - x1)"]);
        let region =
            FeasibleSet::new(1, vec![Cell::from_box(vec![0.0], vec![f64::INFINITY])]).unwrap();
        let probes = [ProbePath::Parametric {
            exprs: vec![parse("x1").unwrap()],
            schedule: crate::asymptotics::default_schedule(),
        }];
        let report = equivalence_harness(
            &f,
            &[0],
            &region,
            &[0.0],
            &probes,
            &SectionParams::default(),
            &LimitOptions::default(),
        )
        .unwrap();
        assert!(report.refused.is_none());
        assert_eq!(report.agreement, Some(true), "all four should fail");
        let shared = report.shared_witness.expect("shared witness");
        assert!(shared[0].abs() < 1e-9);
        let s = condition_sufficiency(
            &f,
            &[0],
            &region,
            &[0.0],
            &probes,
            &SectionParams::default(),
            &LimitOptions::default(),
        )
        .unwrap();
        match s.conclusion {
            Conclusion::Inconclusive { reason } => {
                assert!(reason.contains("nonexistence"), "{reason}")
            }
            other => panic!("expected inconclusive, got {other:?}"),
        }
    }
}
