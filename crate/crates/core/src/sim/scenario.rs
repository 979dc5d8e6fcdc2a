//! Scenario files.
//!
//! A scenario is a flat TOML table. Every key has a default and unknown
//! keys are rejected. Example:
//!
//! ```toml
//! scheme = "crl"
//! population = 30000
//! revoked_fraction = 0.1
//! crl_period_hours = 24
//! validations_per_user_per_day = 5
//! cost_per_kb = 0.02
//! horizon_days = 2
//! ```

use serde::Deserialize;

use crate::error::Error;
use crate::primitives::HashMode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeKind {
    /// Full CRL, optionally over-issued.
    Crl,
    /// Over-issued full CRLs with deltas against the oldest unexpired one.
    DeltaCrl,
    /// Segmented CRL, optionally staggered.
    SegmentedCrl,
    Crs,
    Hcrs,
    Crt,
    /// 2-3 tree authenticated dictionary.
    Authdict,
    Ocsp,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 8] = [
        SchemeKind::Crl,
        SchemeKind::DeltaCrl,
        SchemeKind::SegmentedCrl,
        SchemeKind::Crs,
        SchemeKind::Hcrs,
        SchemeKind::Crt,
        SchemeKind::Authdict,
        SchemeKind::Ocsp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::Crl => "crl",
            SchemeKind::DeltaCrl => "delta-crl",
            SchemeKind::SegmentedCrl => "segmented-crl",
            SchemeKind::Crs => "crs",
            SchemeKind::Hcrs => "hcrs",
            SchemeKind::Crt => "crt",
            SchemeKind::Authdict => "authdict",
            SchemeKind::Ocsp => "ocsp",
        }
    }

    pub fn parse(s: &str) -> Result<Self, Error> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Scenario(format!("unknown scheme `{s}`")))
    }

    pub fn is_crl_family(self) -> bool {
        matches!(self, SchemeKind::Crl | SchemeKind::DeltaCrl | SchemeKind::SegmentedCrl)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerifierCache {
    /// Every validation fetches fresh status information.
    None,
    /// Fetched material is reused until its next update time.
    UntilNextUpdate,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub scheme: SchemeKind,
    pub population: u64,
    pub users_per_ca: u64,
    pub revoked_fraction: f64,
    pub crl_period_hours: u32,
    pub validations_per_user_per_day: f64,
    /// Currency per kilobyte; one kilobyte is 1024 octets.
    pub cost_per_kb: f64,
    pub horizon_days: u32,
    pub seed: u64,
    pub verifier_cache: VerifierCache,
    pub over_issue_factor: u32,
    pub segments: u32,
    pub stagger_intervals: u32,
    pub validity_days: u32,
    pub hash_mode: HashMode,
    pub serial_bits: u8,
    /// Fraction of the population newly revoked per day.
    pub daily_revocation_rate: f64,
    /// Size of a certificate without scheme extensions.
    pub certificate_bytes: u32,
    /// Responders between a client and the co-located responder, inclusive.
    pub ocsp_chain_length: u32,
    pub ocsp_max_age_hours: u32,
    pub ocsp_cache_ttl_hours: u32,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            scheme: SchemeKind::Crl,
            population: 1000,
            users_per_ca: 1000,
            revoked_fraction: 0.1,
            crl_period_hours: 24,
            validations_per_user_per_day: 5.0,
            cost_per_kb: 0.02,
            horizon_days: 3,
            seed: 1,
            verifier_cache: VerifierCache::None,
            over_issue_factor: 1,
            segments: 1,
            stagger_intervals: 1,
            validity_days: 365,
            hash_mode: HashMode::Modern,
            serial_bits: 20,
            daily_revocation_rate: 0.0,
            certificate_bytes: 1024,
            ocsp_chain_length: 2,
            ocsp_max_age_hours: 24,
            ocsp_cache_ttl_hours: 24,
        }
    }
}

fn line_of(src: &str, offset: usize) -> usize {
    src[..offset.min(src.len())].bytes().filter(|&b| b == b'\n').count() + 1
}

impl Scenario {
    /// Parses and validates; errors name the offending line when known.
    pub fn from_toml(src: &str) -> Result<Self, Error> {
        let sc: Scenario = toml::from_str(src).map_err(|e| {
            let msg = e.message().trim().to_string();
            match e.span() {
                Some(span) => Error::Scenario(format!("line {}: {msg}", line_of(src, span.start))),
                None => Error::Scenario(msg),
            }
        })?;
        sc.validate()?;
        Ok(sc)
    }

    pub fn ca_count(&self) -> u64 {
        self.population.div_ceil(self.users_per_ca)
    }

    /// Population of CA `ca`; the last CA takes the remainder.
    pub fn ca_population(&self, ca: u64) -> u64 {
        let start = ca * self.users_per_ca;
        self.users_per_ca.min(self.population - start)
    }

    pub fn validate(&self) -> Result<(), Error> {
        let bad = |m: &str| Err(Error::Scenario(m.to_string()));
        if self.population == 0 || self.users_per_ca == 0 {
            return bad("population and users_per_ca must be positive");
        }
        if !(0.0..=1.0).contains(&self.revoked_fraction) {
            return bad("revoked_fraction must lie in [0, 1]");
        }
        if !(0.0..=1.0).contains(&self.daily_revocation_rate) {
            return bad("daily_revocation_rate must lie in [0, 1]");
        }
        if self.crl_period_hours == 0 || self.horizon_days == 0 || self.validity_days == 0 {
            return bad("crl_period_hours, horizon_days and validity_days must be positive");
        }
        if !(self.validations_per_user_per_day >= 0.0) || !self.validations_per_user_per_day.is_finite() {
            return bad("validations_per_user_per_day must be a nonnegative number");
        }
        if !(self.cost_per_kb >= 0.0) || !self.cost_per_kb.is_finite() {
            return bad("cost_per_kb must be a nonnegative number");
        }
        if self.over_issue_factor == 0 || self.over_issue_factor > self.crl_period_hours {
            return bad("over_issue_factor must lie in 1..=crl_period_hours");
        }
        if self.segments == 0 || self.stagger_intervals == 0 || self.stagger_intervals > self.segments {
            return bad("segments must be positive and stagger_intervals in 1..=segments");
        }
        if self.serial_bits == 0 || self.serial_bits > 32 || self.users_per_ca > 1u64 << self.serial_bits {
            return bad("serial_bits must lie in 1..=32 and cover users_per_ca");
        }
        if self.ocsp_chain_length == 0 || self.ocsp_chain_length > 8 {
            return bad("ocsp_chain_length must lie in 1..=8");
        }
        if !self.scheme.is_crl_family() && (self.over_issue_factor > 1 || self.segments > 1) {
            return bad("over_issue_factor and segments apply only to CRL schemes");
        }
        if self.segments > 1 && self.scheme != SchemeKind::SegmentedCrl {
            return bad("segments > 1 requires scheme = \"segmented-crl\"");
        }
        if self.hash_mode == HashMode::Compact && self.scheme == SchemeKind::Crs && self.validity_days > 4096 {
            return bad("validity_days too large");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_and_defaults() {
        let sc = Scenario::from_toml("scheme = \"crs\"\npopulation = 50\nusers_per_ca = 50\n").unwrap();
        assert_eq!(sc.scheme, SchemeKind::Crs);
        assert_eq!(sc.population, 50);
        assert_eq!(sc.verifier_cache, VerifierCache::None);
        assert_eq!(sc.ca_count(), 1);
    }

    #[test]
    fn unknown_key_reports_line() {
        let err = Scenario::from_toml("scheme = \"crl\"\n\npopulaton = 3\n").unwrap_err();
        match err {
            Error::Scenario(m) => assert!(m.starts_with("line 3:"), "{m}"),
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn type_error_reports_line() {
        let err = Scenario::from_toml("scheme = \"crl\"\nhorizon_days = \"x\"\n").unwrap_err();
        assert!(matches!(err, Error::Scenario(ref m) if m.starts_with("line 2:")), "{err:?}");
    }

    #[test]
    fn validation() {
        assert!(Scenario::from_toml("revoked_fraction = 1.5").is_err());
        assert!(Scenario::from_toml("scheme = \"crs\"\nover_issue_factor = 2").is_err());
        assert!(Scenario::from_toml("scheme = \"crl\"\nsegments = 4").is_err());
        assert!(Scenario::from_toml("scheme = \"segmented-crl\"\nsegments = 4\nstagger_intervals = 2").is_ok());
        assert!(Scenario::from_toml("verifier_cache = \"until-next-update\"\nhash_mode = \"compact\"").is_ok());
        assert!(Scenario::from_toml("scheme = \"x509\"").is_err());
    }

    #[test]
    fn ca_split() {
        let sc = Scenario {
            population: 2500,
            users_per_ca: 1000,
            ..Default::default()
        };
        assert_eq!(sc.ca_count(), 3);
        assert_eq!(sc.ca_population(2), 500);
    }
}
