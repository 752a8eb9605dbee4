//! Certificates: self-describing, replayable evidence records.
//!
//! A certificate stores the instance it was computed on (norm configuration,
//! direction of `Y`, sum exponent and a fingerprint of the three), the seed and
//! generator, the tolerance it was judged against and the measured values.
//! [`replay`] rebuilds the instance, recomputes every measured value and
//! compares them with the stored ones.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{certify_preservation, h_violation, CounterexampleInstance};
use crate::error::{Error, Result};
use crate::norms::{FiniteSupportElement, NormConfig, NormModel, Vector};
use crate::ortho::{complement_linearity_probe, ComplementProbe, ComplementWitness, SubspaceBasis};
use crate::sampling;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateKind {
    Complement,
    Preservation,
    Nonlinearity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub norm: NormConfig,
    pub direction: Vector,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    pub fingerprint: String,
}

fn fingerprint(norm: &NormConfig, direction: &Vector, p: Option<f64>) -> String {
    let json = serde_json::to_string(&(norm, direction, p)).expect("instance records serialize");
    hex::encode(Sha256::digest(json.as_bytes()))
}

impl InstanceRecord {
    pub fn new(x3: &NormModel, direction: &Vector, p: Option<f64>) -> Self {
        let norm = NormConfig::from(x3);
        Self {
            fingerprint: fingerprint(&norm, direction, p),
            norm,
            direction: direction.clone(),
            p,
        }
    }

    pub fn fingerprint_matches(&self) -> bool {
        fingerprint(&self.norm, &self.direction, self.p) == self.fingerprint
    }

    pub fn model(&self) -> Result<NormModel> {
        NormModel::try_from(self.norm.clone())
    }

    pub fn instance(&self) -> Result<CounterexampleInstance> {
        let p = self
            .p
            .ok_or_else(|| Error::InvalidArgument("instance record has no sum exponent".into()))?;
        CounterexampleInstance::new(self.model()?, self.direction.clone(), p)
    }
}

/// Measured values, tagged by certificate kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Evidence {
    /// `Y^⊥` is not closed under addition: `max_residual > tol`.
    Complement {
        n_pairs: usize,
        probe_seed: u64,
        max_residual: f64,
        witness: Option<ComplementWitness>,
    },
    /// `h` preserves the semi-inner product: every residual `≤ tol`.
    Preservation {
        n_pairs: usize,
        max_residual: f64,
        max_norm_residual: f64,
        max_sip4_residual: f64,
        worst_pair: Option<(FiniteSupportElement, FiniteSupportElement)>,
    },
    /// `h` is not linear: `violation_norm ≥ tol`.
    Nonlinearity {
        alpha: f64,
        beta: f64,
        z: FiniteSupportElement,
        a: FiniteSupportElement,
        violation_norm: f64,
    },
}

impl Evidence {
    pub fn kind(&self) -> CertificateKind {
        match self {
            Evidence::Complement { .. } => CertificateKind::Complement,
            Evidence::Preservation { .. } => CertificateKind::Preservation,
            Evidence::Nonlinearity { .. } => CertificateKind::Nonlinearity,
        }
    }

    /// Named measured values, in a fixed order.
    pub fn measured(&self) -> Vec<(&'static str, f64)> {
        match self {
            Evidence::Complement { max_residual, .. } => vec![("max_residual", *max_residual)],
            Evidence::Preservation {
                max_residual,
                max_norm_residual,
                max_sip4_residual,
                ..
            } => vec![
                ("max_residual", *max_residual),
                ("max_norm_residual", *max_norm_residual),
                ("max_sip4_residual", *max_sip4_residual),
            ],
            Evidence::Nonlinearity { violation_norm, .. } => vec![("violation_norm", *violation_norm)],
        }
    }

    /// Verdict of the measured values against `tol`.
    pub fn judge(&self, tol: f64) -> bool {
        match self {
            Evidence::Complement { max_residual, .. } => *max_residual > tol,
            Evidence::Preservation { .. } => self.measured().iter().all(|(_, v)| *v <= tol),
            Evidence::Nonlinearity { violation_norm, .. } => *violation_norm >= tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub schema: String,
    #[serde(flatten)]
    pub evidence: Evidence,
    pub seed: u64,
    pub rng: String,
    /// Upper bound for preservation residuals, lower bound otherwise.
    pub tol: f64,
    pub instance: InstanceRecord,
    pub passed: bool,
}

impl Certificate {
    fn build(instance: InstanceRecord, seed: u64, tol: f64, evidence: Evidence) -> Self {
        Self {
            schema: crate::SCHEMA.to_string(),
            passed: evidence.judge(tol),
            evidence,
            seed,
            rng: sampling::GENERATOR.to_string(),
            tol,
            instance,
        }
    }

    pub(crate) fn complement(instance: InstanceRecord, seed: u64, probe_seed: u64, probe: &ComplementProbe) -> Self {
        let evidence = Evidence::Complement {
            n_pairs: probe.n_pairs,
            probe_seed,
            max_residual: probe.max_residual,
            witness: probe.witness.clone(),
        };
        Self::build(instance, seed, probe.tol, evidence)
    }

    #[allow(clippy::too_many_arguments)]
    pub(crate) fn preservation(
        instance: InstanceRecord,
        seed: u64,
        tol: f64,
        n_pairs: usize,
        max_residual: f64,
        max_norm_residual: f64,
        max_sip4_residual: f64,
        worst_pair: Option<(FiniteSupportElement, FiniteSupportElement)>,
    ) -> Self {
        let evidence = Evidence::Preservation {
            n_pairs,
            max_residual,
            max_norm_residual,
            max_sip4_residual,
            worst_pair,
        };
        Self::build(instance, seed, tol, evidence)
    }

    #[allow(clippy::too_many_arguments)]
    pub(crate) fn nonlinearity(
        instance: InstanceRecord,
        seed: u64,
        threshold: f64,
        alpha: f64,
        beta: f64,
        z: FiniteSupportElement,
        a: FiniteSupportElement,
        violation_norm: f64,
    ) -> Self {
        let evidence = Evidence::Nonlinearity {
            alpha,
            beta,
            z,
            a,
            violation_norm,
        };
        Self::build(instance, seed, threshold, evidence)
    }

    pub fn kind(&self) -> CertificateKind {
        self.evidence.kind()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificates serialize")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::InvalidArgument(format!("malformed certificate: {e}")))
    }
}

/// How recomputed values are compared with stored ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReplayMode {
    /// Bit-for-bit; valid with this implementation and generator.
    #[default]
    Exact,
    /// Absolute difference `≤ 1e-6`, for replays across implementations.
    Portable,
}

pub const PORTABLE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldCheck {
    pub name: String,
    pub stored: f64,
    pub recomputed: f64,
    pub matches: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayOutcome {
    pub kind: CertificateKind,
    pub mode: ReplayMode,
    pub fingerprint_ok: bool,
    pub fields: Vec<FieldCheck>,
    /// Verdict of the recomputed values.
    pub passed: bool,
    pub stored_passed: bool,
}

impl ReplayOutcome {
    pub fn ok(&self) -> bool {
        self.fingerprint_ok && self.fields.iter().all(|f| f.matches) && self.passed && self.stored_passed == self.passed
    }
}

fn matches(stored: f64, recomputed: f64, mode: ReplayMode) -> bool {
    match mode {
        ReplayMode::Exact => stored.to_bits() == recomputed.to_bits(),
        ReplayMode::Portable => (stored - recomputed).abs() <= PORTABLE_TOL,
    }
}

/// Recomputes a certificate from its stored inputs.
pub fn replay(cert: &Certificate, mode: ReplayMode) -> Result<ReplayOutcome> {
    if cert.schema != crate::SCHEMA {
        return Err(Error::InvalidArgument(format!("unknown schema {:?}", cert.schema)));
    }
    let recomputed = match &cert.evidence {
        Evidence::Complement {
            n_pairs,
            probe_seed,
            witness,
            ..
        } => {
            let y = SubspaceBasis::span(cert.instance.direction.clone(), cert.instance.model()?)?;
            let probe = complement_linearity_probe(&y, *n_pairs, *probe_seed, cert.tol)?;
            Evidence::Complement {
                n_pairs: *n_pairs,
                probe_seed: *probe_seed,
                max_residual: probe.max_residual,
                witness: witness.clone(),
            }
        }
        Evidence::Preservation { n_pairs, .. } => {
            let inst = cert.instance.instance()?;
            certify_preservation(&inst, *n_pairs, cert.seed, cert.tol)?.evidence
        }
        Evidence::Nonlinearity { alpha, beta, z, a, .. } => {
            let inst = cert.instance.instance()?;
            Evidence::Nonlinearity {
                alpha: *alpha,
                beta: *beta,
                z: z.clone(),
                a: a.clone(),
                violation_norm: h_violation(&inst, *alpha, *beta, z, a)?,
            }
        }
    };
    let fields = cert
        .evidence
        .measured()
        .into_iter()
        .zip(recomputed.measured())
        .map(|((name, stored), (_, again))| FieldCheck {
            name: name.to_string(),
            stored,
            recomputed: again,
            matches: matches(stored, again, mode),
        })
        .collect();
    Ok(ReplayOutcome {
        kind: cert.kind(),
        mode,
        fingerprint_ok: cert.instance.fingerprint_matches(),
        fields,
        passed: recomputed.judge(cert.tol),
        stored_passed: cert.passed,
    })
}
