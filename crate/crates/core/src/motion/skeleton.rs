use crate::error::{Error, Result};
use crate::motion::Vec3;

#[derive(Debug, Clone, PartialEq)]
pub struct Joint {
    pub name: String,
    pub parent: Option<usize>,
    /// Offset from the parent joint in the parent's frame, meters.
    pub offset: Vec3,
}

impl Joint {
    pub fn new(name: impl Into<String>, parent: Option<usize>, offset: Vec3) -> Self {
        Joint {
            name: name.into(),
            parent,
            offset,
        }
    }
}

/// Topologically ordered joint hierarchy with a designated set of salient
/// joints used for transition costs.
#[derive(Debug, Clone, PartialEq)]
pub struct Skeleton {
    joints: Vec<Joint>,
    salient: Vec<usize>,
}

/// Joint names (normalized: lowercase, separators removed) that make up the
/// default salient set, in addition to the root.
const DEFAULT_SALIENT: [&str; 5] = ["head", "lefthand", "righthand", "leftfoot", "rightfoot"];

fn normalize_name(name: &str) -> String {
    name.chars()
        .filter(|c| c.is_alphanumeric())
        .flat_map(char::to_lowercase)
        .collect()
}

impl Skeleton {
    /// Builds a skeleton. When `salient` is `None` the default salient set is
    /// used: the root plus head, hands and feet when joints with those names
    /// exist.
    pub fn new(joints: Vec<Joint>, salient: Option<Vec<String>>) -> Result<Self> {
        if joints.is_empty() {
            return Err(Error::Schema("skeleton has no joints".into()));
        }
        let mut roots = 0;
        for (i, j) in joints.iter().enumerate() {
            match j.parent {
                None => roots += 1,
                Some(p) if p >= i => {
                    return Err(Error::Schema(format!(
                        "joint {i} ({}) has parent {p}, joints must be topologically ordered",
                        j.name
                    )))
                }
                Some(_) => {}
            }
            if !j.offset.iter().all(|v| v.is_finite()) {
                return Err(Error::Value(format!("joint {} has a non-finite offset", j.name)));
            }
        }
        if roots != 1 || joints[0].parent.is_some() {
            return Err(Error::Schema(format!(
                "skeleton must have exactly one root at index 0, found {roots}"
            )));
        }
        for (i, a) in joints.iter().enumerate() {
            if joints[..i].iter().any(|b| b.name == a.name) {
                return Err(Error::Schema(format!("duplicate joint name {:?}", a.name)));
            }
        }

        let salient = match salient {
            Some(names) => names
                .iter()
                .map(|n| {
                    joints
                        .iter()
                        .position(|j| &j.name == n)
                        .ok_or_else(|| Error::Schema(format!("salient joint {n:?} not in skeleton")))
                })
                .collect::<Result<Vec<_>>>()?,
            None => {
                let mut idx = vec![0];
                for want in DEFAULT_SALIENT {
                    if let Some(i) = joints.iter().position(|j| normalize_name(&j.name) == want) {
                        if !idx.contains(&i) {
                            idx.push(i);
                        }
                    }
                }
                idx
            }
        };
        if salient.is_empty() {
            return Err(Error::Schema("salient joint set is empty".into()));
        }
        Ok(Skeleton { joints, salient })
    }

    pub fn joints(&self) -> &[Joint] {
        &self.joints
    }

    pub fn len(&self) -> usize {
        self.joints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.joints.is_empty()
    }

    /// Indices of the salient joints.
    pub fn salient(&self) -> &[usize] {
        &self.salient
    }

    pub fn salient_names(&self) -> Vec<&str> {
        self.salient.iter().map(|&i| self.joints[i].name.as_str()).collect()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.joints.iter().position(|j| j.name == name)
    }

    /// Default strength weights: 1.0 on salient joints, 0.25 elsewhere.
    pub fn default_strength_weights(&self) -> Vec<f64> {
        (0..self.joints.len())
            .map(|i| if self.salient.contains(&i) { 1.0 } else { 0.25 })
            .collect()
    }

    /// Returns a copy with a different salient set.
    pub fn with_salient(&self, names: &[&str]) -> Result<Self> {
        Skeleton::new(self.joints.clone(), Some(names.iter().map(|s| s.to_string()).collect()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain() -> Vec<Joint> {
        vec![
            Joint::new("Hips", None, Vec3::zeros()),
            Joint::new("Head", Some(0), Vec3::new(0.0, 0.6, 0.0)),
            Joint::new("Left_Hand", Some(0), Vec3::new(0.5, 0.3, 0.0)),
        ]
    }

    #[test]
    fn default_salient_picks_root_and_named_extremities() {
        let s = Skeleton::new(chain(), None).unwrap();
        assert_eq!(s.salient_names(), vec!["Hips", "Head", "Left_Hand"]);
        assert_eq!(s.default_strength_weights(), vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn rejects_bad_topology() {
        let mut j = chain();
        j[1].parent = Some(2);
        assert!(matches!(Skeleton::new(j, None), Err(Error::Schema(_))));

        let mut j = chain();
        j[2].parent = None;
        assert!(matches!(Skeleton::new(j, None), Err(Error::Schema(_))));
    }

    #[test]
    fn rejects_unknown_salient_name() {
        let r = Skeleton::new(chain(), Some(vec!["Tail".into()]));
        assert!(matches!(r, Err(Error::Schema(_))));
    }
}
