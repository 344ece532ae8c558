use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Status {
    Member,
    NonMember,
    Undetermined,
}

impl Status {
    pub fn from_bool(b: Option<bool>) -> Self {
        match b {
            Some(true) => Status::Member,
            Some(false) => Status::NonMember,
            None => Status::Undetermined,
        }
    }

    pub fn is_member(self) -> bool {
        self == Status::Member
    }

    pub fn is_non_member(self) -> bool {
        self == Status::NonMember
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Member => "Member",
            Status::NonMember => "NonMember",
            Status::Undetermined => "Undetermined",
        })
    }
}

/// The four domains, ordered by inclusion `D0 ⊂ D ⊂ Dc ⊂ De`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Class {
    D0,
    D,
    Dc,
    De,
}

impl Class {
    pub const ALL: [Class; 4] = [Class::D0, Class::D, Class::Dc, Class::De];
}

/// Three-valued outcome of a single condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Finiteness {
    Finite,
    Infinite,
    Undetermined,
}

impl Finiteness {
    pub fn from_bool(b: Option<bool>) -> Self {
        match b {
            Some(true) => Finiteness::Finite,
            Some(false) => Finiteness::Infinite,
            None => Finiteness::Undetermined,
        }
    }

    pub fn as_bool(self) -> Option<bool> {
        match self {
            Finiteness::Finite => Some(true),
            Finiteness::Infinite => Some(false),
            Finiteness::Undetermined => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Convergence {
    Convergent,
    Divergent,
    Undetermined,
}

impl Convergence {
    pub fn from_bool(b: Option<bool>) -> Self {
        match b {
            Some(true) => Convergence::Convergent,
            Some(false) => Convergence::Divergent,
            None => Convergence::Undetermined,
        }
    }

    pub fn as_bool(self) -> Option<bool> {
        match self {
            Convergence::Convergent => Some(true),
            Convergence::Divergent => Some(false),
            Convergence::Undetermined => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConditionId {
    /// `∫ f^2 ds · tr A < ∞`.
    Gaussian,
    /// `∫ ds ∫ (|f(s)x|^2 ∧ 1) ν(dx) < ∞`.
    Levy,
    /// `∫_a^t h(s) ds` converges.
    DriftConvergence,
    /// `∫ |h(s)| ds < ∞`.
    DriftAbsolute,
    CompensatorQ,
    AnalyticRule,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub condition: ConditionId,
    pub outcome: String,
    /// `(t, value)` pairs on the checkpoint grid.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub partials: Vec<(f64, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_bound: Option<f64>,
    pub rule: String,
}

impl Evidence {
    pub fn rule(condition: ConditionId, outcome: impl fmt::Display, rule: impl Into<String>) -> Self {
        Self { condition, outcome: outcome.to_string(), partials: Vec::new(), tail_bound: None, rule: rule.into() }
    }
}

/// Membership in the four domains; the inclusions are enforced on construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainVerdict {
    #[serde(rename = "D0")]
    pub d0: Status,
    #[serde(rename = "D")]
    pub d: Status,
    #[serde(rename = "Dc")]
    pub dc: Status,
    #[serde(rename = "De")]
    pub de: Status,
    /// Shift `q` making the drift convergent, when `Dc` is a member.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<f64>>,
    pub evidence: Vec<Evidence>,
}

impl DomainVerdict {
    pub fn new(d0: Status, d: Status, dc: Status, de: Status, evidence: Vec<Evidence>) -> Result<Self> {
        let v = Self { d0, d, dc, de, q: None, evidence };
        v.check_chain()?;
        Ok(v)
    }

    pub fn all(status: Status, evidence: Vec<Evidence>) -> Self {
        Self { d0: status, d: status, dc: status, de: status, q: None, evidence }
    }

    pub fn get(&self, c: Class) -> Status {
        match c {
            Class::D0 => self.d0,
            Class::D => self.d,
            Class::Dc => self.dc,
            Class::De => self.de,
        }
    }

    pub fn statuses(&self) -> [Status; 4] {
        [self.d0, self.d, self.dc, self.de]
    }

    pub fn any_undetermined(&self) -> bool {
        self.statuses().contains(&Status::Undetermined)
    }

    pub fn all_undetermined(&self) -> bool {
        self.statuses().iter().all(|s| *s == Status::Undetermined)
    }

    /// Member in a smaller class forces Member in every larger one;
    /// NonMember in a larger class forces NonMember in every smaller one.
    pub fn check_chain(&self) -> Result<()> {
        let s = self.statuses();
        for i in 0..4 {
            for j in i + 1..4 {
                if s[i] == Status::Member && s[j] != Status::Member {
                    return Err(Error::InconsistentVerdict(format!(
                        "{:?} is Member but {:?} is {}",
                        Class::ALL[i],
                        Class::ALL[j],
                        s[j]
                    )));
                }
                if s[j] == Status::NonMember && s[i] != Status::NonMember {
                    return Err(Error::InconsistentVerdict(format!(
                        "{:?} is NonMember but {:?} is {}",
                        Class::ALL[j],
                        Class::ALL[i],
                        s[i]
                    )));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain_is_enforced() {
        use Status::*;
        assert!(DomainVerdict::new(NonMember, Member, Member, Member, vec![]).is_ok());
        assert!(DomainVerdict::new(Member, NonMember, Member, Member, vec![]).is_err());
        assert!(DomainVerdict::new(Undetermined, Undetermined, NonMember, Member, vec![]).is_err());
        assert!(DomainVerdict::new(NonMember, NonMember, Undetermined, Member, vec![]).is_ok());
    }

    #[test]
    fn json_keys() {
        let v = DomainVerdict::all(Status::Member, vec![]);
        let s = serde_json::to_string(&v).unwrap();
        assert!(s.contains("\"D0\":\"Member\"") && s.contains("\"De\""), "{s}");
    }
}
