use serde::{Deserialize, Serialize};

use crate::data::SequenceRecord;
use crate::error::{Error, Result};

/// Declarative train/test partition over action labels and couple ids.
///
/// A sequence belongs to a side when its action matches the side's action
/// list (absent list = any) and its couple matches the side's couple list
/// (absent = any). The two membership predicates must be disjoint.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitConfig {
    #[serde(default)]
    pub train_actions: Option<Vec<String>>,
    #[serde(default)]
    pub test_actions: Option<Vec<String>>,
    #[serde(default)]
    pub train_couples: Option<Vec<u32>>,
    #[serde(default)]
    pub test_couples: Option<Vec<u32>>,
}

impl SplitConfig {
    pub fn by_actions(train: Vec<String>, test: Vec<String>) -> Self {
        SplitConfig {
            train_actions: Some(train),
            test_actions: Some(test),
            ..Default::default()
        }
    }

    pub fn by_couples(train: Vec<u32>, test: Vec<u32>) -> Self {
        SplitConfig {
            train_couples: Some(train),
            test_couples: Some(test),
            ..Default::default()
        }
    }

    fn couples_disjoint(&self) -> bool {
        match (&self.train_couples, &self.test_couples) {
            (Some(a), Some(b)) => a.iter().all(|c| !b.contains(c)),
            _ => false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let (Some(train), Some(test)) = (&self.train_actions, &self.test_actions) {
            let shared: Vec<&String> = train.iter().filter(|a| test.contains(a)).collect();
            if !shared.is_empty() && !self.couples_disjoint() {
                return Err(Error::Config {
                    message: format!(
                        "actions {shared:?} named in both lists without disjoint couple lists"
                    ),
                });
            }
        }
        if self.train_actions.is_none()
            && self.test_actions.is_none()
            && !self.couples_disjoint()
        {
            return Err(Error::Config {
                message: "split selects nothing: need action lists or disjoint couple lists"
                    .into(),
            });
        }
        Ok(())
    }

    fn matches(actions: &Option<Vec<String>>, couples: &Option<Vec<u32>>, seq: &SequenceRecord) -> bool {
        actions.as_ref().map_or(true, |a| a.contains(&seq.action))
            && couples.as_ref().map_or(true, |c| c.contains(&seq.couple))
    }

    pub fn is_train(&self, seq: &SequenceRecord) -> bool {
        Self::matches(&self.train_actions, &self.train_couples, seq)
    }

    pub fn is_test(&self, seq: &SequenceRecord) -> bool {
        Self::matches(&self.test_actions, &self.test_couples, seq)
    }
}

/// Partition sequences; a sequence matching both sides is a config error,
/// one matching neither is dropped.
pub fn split<'a>(
    seqs: &'a [SequenceRecord],
    cfg: &SplitConfig,
) -> Result<(Vec<&'a SequenceRecord>, Vec<&'a SequenceRecord>)> {
    cfg.validate()?;
    let mut train = Vec::new();
    let mut test = Vec::new();
    for seq in seqs {
        let (tr, te) = (cfg.is_train(seq), cfg.is_test(seq));
        if tr && te {
            return Err(Error::Config {
                message: format!(
                    "sequence {} (action {}, couple {}) matches both split sides",
                    seq.id, seq.action, seq.couple
                ),
            });
        }
        if tr {
            train.push(seq);
        } else if te {
            test.push(seq);
        }
    }
    Ok((train, test))
}
