//! Instance and schedule JSON documents, canonical encoding and hashing.
//!
//! Instance: `{"machines":[{"cost":a,"speed":s?}], "jobs":[{"profit":pi?}],
//! "p":[[..]], "c":[[..]]?, "r":[[..]]?}` with `null` marking a pair that
//! cannot run. Schedule: `{"active":[..], "assign":{"j":i}, "dropped":[..]}`.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use machact::{Instance, Schedule};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MachineDoc {
    pub cost: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub speed: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profit: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDoc {
    pub machines: Vec<MachineDoc>,
    pub jobs: Vec<JobDoc>,
    pub p: Vec<Vec<Option<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleDoc {
    pub active: BTreeSet<usize>,
    pub assign: BTreeMap<usize, usize>,
    #[serde(default)]
    pub dropped: BTreeSet<usize>,
}

/// All-or-nothing optional per-item field.
fn collect_optional(name: &str, values: Vec<Option<f64>>) -> CliResult<Option<Vec<f64>>> {
    let present = values.iter().filter(|v| v.is_some()).count();
    if present == 0 {
        Ok(None)
    } else if present == values.len() {
        Ok(Some(values.into_iter().flatten().collect()))
    } else {
        Err(CliError::Format(format!("{name} given for {present} of {} entries", values.len())))
    }
}

impl InstanceDoc {
    pub fn from_instance(inst: &Instance) -> Self {
        let speeds = inst.speeds();
        let machines = (0..inst.m())
            .map(|i| MachineDoc { cost: inst.cost(i), speed: speeds.map(|s| s[i]) })
            .collect();
        let profits = inst.profits();
        let jobs = (0..inst.n()).map(|j| JobDoc { profit: profits.map(|p| p[j]) }).collect();
        InstanceDoc {
            machines,
            jobs,
            p: inst.p_matrix().to_vec(),
            c: inst.assignment_costs().map(<[_]>::to_vec),
            r: inst.release_times().map(<[_]>::to_vec),
        }
    }

    pub fn to_instance(&self) -> CliResult<Instance> {
        let m = self.machines.len();
        if self.p.len() != m {
            return Err(CliError::Format(format!("p has {} rows for {m} machines", self.p.len())));
        }
        if let Some(row) = self.p.iter().position(|row| row.len() != self.jobs.len()) {
            return Err(CliError::Format(format!(
                "p row {row} has {} entries for {} jobs",
                self.p[row].len(),
                self.jobs.len()
            )));
        }
        if m == 0 && !self.jobs.is_empty() {
            return Err(CliError::Format("jobs given but no machines".into()));
        }
        let mut inst = Instance::new(self.machines.iter().map(|mc| mc.cost).collect(), self.p.clone())?;
        if let Some(c) = &self.c {
            inst = inst.with_assignment_costs(c.clone())?;
        }
        if let Some(profits) = collect_optional("profit", self.jobs.iter().map(|j| j.profit).collect())? {
            inst = inst.with_profits(profits)?;
        }
        if let Some(r) = &self.r {
            inst = inst.with_release_times(r.clone())?;
        }
        if let Some(speeds) = collect_optional("speed", self.machines.iter().map(|mc| mc.speed).collect())? {
            inst = inst.with_speeds(speeds)?;
        }
        Ok(inst)
    }
}

impl ScheduleDoc {
    pub fn from_schedule(s: &Schedule) -> Self {
        ScheduleDoc { active: s.active.clone(), assign: s.assign.clone(), dropped: s.dropped.clone() }
    }

    pub fn to_schedule(&self) -> Schedule {
        Schedule { active: self.active.clone(), assign: self.assign.clone(), dropped: self.dropped.clone() }
    }
}

/// Compact JSON with object keys in sorted order.
pub fn canonical_json<T: Serialize>(value: &T) -> CliResult<String> {
    let v = serde_json::to_value(value).map_err(|e| CliError::Json { what: "encode".into(), source: e })?;
    serde_json::to_string(&v).map_err(|e| CliError::Json { what: "encode".into(), source: e })
}

/// Indented JSON with sorted keys and a trailing newline.
pub fn pretty_json<T: Serialize>(value: &T) -> CliResult<String> {
    let v = serde_json::to_value(value).map_err(|e| CliError::Json { what: "encode".into(), source: e })?;
    let mut s = serde_json::to_string_pretty(&v).map_err(|e| CliError::Json { what: "encode".into(), source: e })?;
    s.push('\n');
    Ok(s)
}

/// Hex sha256 of the canonical instance document.
pub fn instance_hash(inst: &Instance) -> String {
    let json = canonical_json(&InstanceDoc::from_instance(inst)).expect("instance documents always encode");
    hex::encode(Sha256::digest(json.as_bytes()))
}

pub fn parse_instance(text: &str) -> CliResult<Instance> {
    let doc: InstanceDoc =
        serde_json::from_str(text).map_err(|e| CliError::Json { what: "instance".into(), source: e })?;
    doc.to_instance()
}

pub fn instance_to_string(inst: &Instance) -> CliResult<String> {
    pretty_json(&InstanceDoc::from_instance(inst))
}

pub fn parse_schedule(text: &str, inst: &Instance) -> CliResult<Schedule> {
    let doc: ScheduleDoc =
        serde_json::from_str(text).map_err(|e| CliError::Json { what: "schedule".into(), source: e })?;
    let s = doc.to_schedule();
    s.validate(inst)?;
    Ok(s)
}

pub fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn read_instance(path: &Path) -> CliResult<Instance> {
    parse_instance(&read_text(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use machact::model::{add_random_profits, add_random_release_times, gen_random_instance, Profile};

    #[test]
    fn round_trip_keeps_every_field() {
        let inst = gen_random_instance(3, 5, 3, Profile::Related).unwrap();
        let inst = add_random_profits(inst, 4, 9).unwrap();
        let inst = add_random_release_times(inst, 5, 4).unwrap();
        let back = parse_instance(&instance_to_string(&inst).unwrap()).unwrap();
        assert_eq!(back, inst);
    }

    #[test]
    fn null_marks_infeasible_pair() {
        let inst = parse_instance(r#"{"machines":[{"cost":1},{"cost":2}],"jobs":[{},{}],"p":[[1,null],[2,3]]}"#).unwrap();
        assert_eq!(inst.p(0, 1), None);
        assert_eq!(inst.p(1, 1), Some(3.0));
        assert!(inst.profits().is_none());
    }

    #[test]
    fn partial_profits_rejected() {
        let r = parse_instance(r#"{"machines":[{"cost":1}],"jobs":[{"profit":1},{}],"p":[[1,1]]}"#);
        assert!(matches!(r, Err(CliError::Format(_))));
    }

    #[test]
    fn speeds_validated_on_load() {
        let r = parse_instance(r#"{"machines":[{"cost":1,"speed":1},{"cost":1,"speed":2}],"jobs":[{}],"p":[[4],[3]]}"#);
        assert!(matches!(r, Err(CliError::Core(machact::Error::Parameter(_)))));
    }

    #[test]
    fn shape_errors() {
        assert!(parse_instance(r#"{"machines":[{"cost":1}],"jobs":[{}],"p":[[1,2]]}"#).is_err());
        assert!(parse_instance(r#"{"machines":[],"jobs":[{}],"p":[]}"#).is_err());
        assert!(parse_instance(r#"{"machines":[{"cost":1}],"jobs":[{}],"p":[[1]],"extra":0}"#).is_err());
    }

    #[test]
    fn hash_ignores_key_order() {
        let a = parse_instance(r#"{"machines":[{"cost":1}],"jobs":[{}],"p":[[2]]}"#).unwrap();
        let b = parse_instance(r#"{"p":[[2]],"jobs":[{}],"machines":[{"cost":1}]}"#).unwrap();
        assert_eq!(instance_hash(&a), instance_hash(&b));
        assert_eq!(instance_hash(&a).len(), 64);
        let c = parse_instance(r#"{"machines":[{"cost":1}],"jobs":[{}],"p":[[3]]}"#).unwrap();
        assert_ne!(instance_hash(&a), instance_hash(&c));
    }

    #[test]
    fn schedule_round_trip() {
        let inst = gen_random_instance(1, 3, 2, Profile::Unrelated).unwrap();
        let text = r#"{"active":[1],"assign":{"0":1,"2":1},"dropped":[1]}"#;
        let s = parse_schedule(text, &inst).unwrap();
        assert_eq!(s.assign.get(&2), Some(&1));
        assert_eq!(canonical_json(&ScheduleDoc::from_schedule(&s)).unwrap(), text);
        let bad = r#"{"active":[],"assign":{"0":1},"dropped":[1,2]}"#;
        assert!(parse_schedule(bad, &inst).is_err());
    }
}
