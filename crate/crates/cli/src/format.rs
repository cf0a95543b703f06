//! On-disk instance format.
//!
//! Instances are TOML documents with this shape:
//!
//! ```toml
//! priority_mode = "discrete"   # or "continuous"
//!
//! [weights]
//! c_priority = 1.0
//! c_affinity = 1.0
//!
//! [[assigned]]
//! job = "w1"
//! agent = "a1"
//! priority = 0.5
//!
//! [[vacants]]
//! job = "v1"
//! priority = 1.0
//!
//! [[affinity_counts]]
//! job = "v1"
//! agent = "a1"
//! count = 3
//! ```
//!
//! Parse failures carry the line and field reported by the TOML parser;
//! structural failures carry the offending job or agent id.

use std::fmt;

use jrp_core::model::{
    AffinityTable, AgentId, AssignedJob, JobId, JrpInstance, PriorityMode, VacantJob,
};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub priority_mode: PriorityMode,
    pub weights: Weights,
    #[serde(default)]
    pub assigned: Vec<AssignedEntry>,
    #[serde(default)]
    pub vacants: Vec<VacantEntry>,
    #[serde(default)]
    pub affinity_counts: Vec<CountEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Weights {
    pub c_priority: f64,
    pub c_affinity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssignedEntry {
    pub job: String,
    pub agent: String,
    pub priority: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VacantEntry {
    pub job: String,
    pub priority: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountEntry {
    pub job: String,
    pub agent: String,
    pub count: u64,
}

/// Why a document could not be turned into a valid instance.
#[derive(Debug)]
pub enum FormatError {
    /// Malformed TOML or a missing/mistyped field; includes line and column.
    Syntax(toml::de::Error),
    /// Well-formed document describing an invalid instance.
    Invalid(jrp_core::Error),
}

impl fmt::Display for FormatError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FormatError::Syntax(e) => write!(f, "{e}"),
            FormatError::Invalid(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for FormatError {}

impl From<jrp_core::Error> for FormatError {
    fn from(e: jrp_core::Error) -> Self {
        FormatError::Invalid(e)
    }
}

pub fn parse_instance(text: &str) -> Result<JrpInstance, FormatError> {
    let file: InstanceFile = toml::from_str(text).map_err(FormatError::Syntax)?;
    instance_from_file(&file).map_err(FormatError::from)
}

pub fn instance_from_file(file: &InstanceFile) -> jrp_core::Result<JrpInstance> {
    let mut table = AffinityTable::new();
    for entry in &file.affinity_counts {
        let job = JobId::new(&entry.job);
        let agent = AgentId::new(&entry.agent);
        if table.count(&job, &agent) != 0 {
            return Err(jrp_core::Error::Validation(format!(
                "duplicate affinity count for (`{}`, `{}`)",
                entry.job, entry.agent
            )));
        }
        table.set_count(job, agent, entry.count);
    }
    JrpInstance::new(
        file.assigned
            .iter()
            .map(|a| AssignedJob {
                job: JobId::new(&a.job),
                agent: AgentId::new(&a.agent),
                priority: a.priority,
            })
            .collect(),
        file.vacants
            .iter()
            .map(|v| VacantJob {
                job: JobId::new(&v.job),
                priority: v.priority,
            })
            .collect(),
        table,
        file.weights.c_priority,
        file.weights.c_affinity,
        file.priority_mode,
    )
}

pub fn file_from_instance(instance: &JrpInstance) -> InstanceFile {
    InstanceFile {
        priority_mode: instance.priority_mode(),
        weights: Weights {
            c_priority: instance.weight_priority(),
            c_affinity: instance.weight_affinity(),
        },
        assigned: instance
            .assigned()
            .iter()
            .map(|a| AssignedEntry {
                job: a.job.as_str().to_owned(),
                agent: a.agent.as_str().to_owned(),
                priority: a.priority,
            })
            .collect(),
        vacants: instance
            .vacants()
            .iter()
            .map(|v| VacantEntry {
                job: v.job.as_str().to_owned(),
                priority: v.priority,
            })
            .collect(),
        affinity_counts: instance
            .affinities()
            .iter()
            .map(|(job, agent, count)| CountEntry {
                job: job.as_str().to_owned(),
                agent: agent.as_str().to_owned(),
                count,
            })
            .collect(),
    }
}

/// Serializes an instance; affinity entries come out in (job, agent) order,
/// so equal instances render to identical documents.
pub fn render_instance(instance: &JrpInstance) -> String {
    toml::to_string_pretty(&file_from_instance(instance)).expect("instance serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
priority_mode = "continuous"

[weights]
c_priority = 1.0
c_affinity = 0.5

[[assigned]]
job = "w1"
agent = "a1"
priority = 0.5

[[vacants]]
job = "v1"
priority = 1.0

[[affinity_counts]]
job = "w1"
agent = "a1"
count = 2

[[affinity_counts]]
job = "v1"
agent = "a1"
count = 1
"#;

    #[test]
    fn parses_a_complete_document() {
        let inst = parse_instance(SAMPLE).unwrap();
        assert_eq!(inst.num_assigned(), 1);
        assert_eq!(inst.num_vacant(), 1);
        assert_eq!(inst.weight_affinity(), 0.5);
        assert_eq!(
            inst.affinities()
                .count(&JobId::from("w1"), &AgentId::from("a1")),
            2
        );
    }

    #[test]
    fn round_trip_preserves_the_instance() {
        let inst = parse_instance(SAMPLE).unwrap();
        let rendered = render_instance(&inst);
        let reparsed = parse_instance(&rendered).unwrap();
        assert_eq!(inst, reparsed);
    }

    #[test]
    fn syntax_errors_carry_a_location() {
        let err = parse_instance("priority_mode = \"continuous\"\nweights = 3\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 2"), "missing location in: {msg}");
    }

    #[test]
    fn missing_field_is_reported_by_name() {
        let broken = SAMPLE.replace("agent = \"a1\"\npriority = 0.5", "priority = 0.5");
        let err = parse_instance(&broken).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("agent"), "missing field name in: {msg}");
        assert!(matches!(err, FormatError::Syntax(_)));
    }

    #[test]
    fn invalid_instances_are_rejected_after_parsing() {
        let broken = SAMPLE.replace("count = 2", "count = 0");
        let err = parse_instance(&broken).unwrap_err();
        assert!(matches!(err, FormatError::Invalid(_)));
    }

    #[test]
    fn duplicate_count_entries_are_rejected() {
        let duplicated = format!(
            "{SAMPLE}\n[[affinity_counts]]\njob = \"v1\"\nagent = \"a1\"\ncount = 4\n"
        );
        let err = parse_instance(&duplicated).unwrap_err();
        assert!(err.to_string().contains("duplicate affinity count"));
    }
}
