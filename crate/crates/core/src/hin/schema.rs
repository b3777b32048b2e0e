use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TypeId(pub u16);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RelationId(pub u16);

/// A relation traversed in a given direction. Self-inverse relations are
/// always stored with `inverse == false`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RelStep {
    pub relation: RelationId,
    pub inverse: bool,
}

impl RelStep {
    pub fn forward(relation: RelationId) -> Self {
        Self {
            relation,
            inverse: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelationType {
    pub name: String,
    pub src: TypeId,
    pub dst: TypeId,
    pub inverse_name: Option<String>,
}

impl RelationType {
    /// A relation whose inverse is itself (declared with
    /// `inverse_name == name`). Its edges are undirected.
    pub fn is_self_inverse(&self) -> bool {
        self.inverse_name.as_deref() == Some(self.name.as_str())
    }
}

/// On-disk `schema.json` layout.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemaFile {
    pub node_types: Vec<String>,
    pub relations: Vec<RelationDecl>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelationDecl {
    pub name: String,
    pub src: String,
    pub dst: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inverse_name: Option<String>,
}

impl RelationDecl {
    pub fn new(name: &str, src: &str, dst: &str) -> Self {
        Self {
            name: name.to_owned(),
            src: src.to_owned(),
            dst: dst.to_owned(),
            inverse_name: None,
        }
    }

    pub fn with_inverse(mut self, inverse_name: &str) -> Self {
        self.inverse_name = Some(inverse_name.to_owned());
        self
    }
}

/// Node types and relation types of a network.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Schema {
    node_types: Vec<String>,
    relations: Vec<RelationType>,
}

const INVERSE_SUFFIX: &str = "^-1";

impl Schema {
    pub fn new(node_types: &[&str], relations: Vec<RelationDecl>) -> Result<Self> {
        Self::from_file(SchemaFile {
            node_types: node_types.iter().map(|s| s.to_string()).collect(),
            relations,
        })
    }

    pub fn from_file(file: SchemaFile) -> Result<Self> {
        let mut node_types: Vec<String> = Vec::with_capacity(file.node_types.len());
        for name in file.node_types {
            if name.is_empty() || name.contains(['-', '[', ']', '>', ',', ' ', '\t']) {
                return Err(Error::InvalidSchema(format!("bad node type name `{name}`")));
            }
            if node_types.contains(&name) {
                return Err(Error::InvalidSchema(format!("duplicate node type `{name}`")));
            }
            node_types.push(name);
        }
        if node_types.len() > u16::MAX as usize {
            return Err(Error::InvalidSchema("too many node types".into()));
        }

        let lookup = |name: &str| -> Result<TypeId> {
            node_types
                .iter()
                .position(|t| t == name)
                .map(|i| TypeId(i as u16))
                .ok_or_else(|| Error::UnknownType {
                    name: name.to_owned(),
                    origin: None,
                })
        };

        let mut relations = Vec::with_capacity(file.relations.len());
        let mut seen_names: Vec<String> = Vec::new();
        for decl in file.relations {
            let src = lookup(&decl.src)?;
            let dst = lookup(&decl.dst)?;
            let mut names = vec![decl.name.clone()];
            if let Some(inv) = &decl.inverse_name {
                if inv != &decl.name {
                    names.push(inv.clone());
                } else if src != dst {
                    return Err(Error::InvalidSchema(format!(
                        "relation `{}` is declared self-inverse but joins different types",
                        decl.name
                    )));
                }
            }
            for name in names {
                if name.is_empty() || name.ends_with(INVERSE_SUFFIX) || name.contains(['[', ']', ',', ' ', '\t']) {
                    return Err(Error::InvalidSchema(format!("bad relation name `{name}`")));
                }
                if seen_names.contains(&name) {
                    return Err(Error::InvalidSchema(format!("duplicate relation name `{name}`")));
                }
                seen_names.push(name);
            }
            relations.push(RelationType {
                name: decl.name,
                src,
                dst,
                inverse_name: decl.inverse_name,
            });
        }
        if relations.len() > u16::MAX as usize {
            return Err(Error::InvalidSchema("too many relations".into()));
        }
        Ok(Self { node_types, relations })
    }

    pub fn to_file(&self) -> SchemaFile {
        SchemaFile {
            node_types: self.node_types.clone(),
            relations: self
                .relations
                .iter()
                .map(|r| RelationDecl {
                    name: r.name.clone(),
                    src: self.type_name(r.src).to_owned(),
                    dst: self.type_name(r.dst).to_owned(),
                    inverse_name: r.inverse_name.clone(),
                })
                .collect(),
        }
    }

    pub fn type_count(&self) -> usize {
        self.node_types.len()
    }

    pub fn relation_count(&self) -> usize {
        self.relations.len()
    }

    pub fn types(&self) -> impl Iterator<Item = TypeId> + '_ {
        (0..self.node_types.len()).map(|i| TypeId(i as u16))
    }

    pub fn relation_ids(&self) -> impl Iterator<Item = RelationId> + '_ {
        (0..self.relations.len()).map(|i| RelationId(i as u16))
    }

    pub fn type_name(&self, t: TypeId) -> &str {
        &self.node_types[t.0 as usize]
    }

    pub fn type_id(&self, name: &str) -> Result<TypeId> {
        self.node_types
            .iter()
            .position(|t| t == name)
            .map(|i| TypeId(i as u16))
            .ok_or_else(|| Error::UnknownType {
                name: name.to_owned(),
                origin: None,
            })
    }

    pub fn relation(&self, r: RelationId) -> &RelationType {
        &self.relations[r.0 as usize]
    }

    pub fn relation_id(&self, name: &str) -> Result<RelationId> {
        self.relations
            .iter()
            .position(|r| r.name == name)
            .map(|i| RelationId(i as u16))
            .ok_or_else(|| Error::unknown_relation(name))
    }

    /// Resolve a relation reference: the forward name, the declared inverse
    /// name, or `name^-1`.
    pub fn resolve_step(&self, name: &str) -> Result<RelStep> {
        for (i, rel) in self.relations.iter().enumerate() {
            let relation = RelationId(i as u16);
            if rel.name == name {
                return Ok(RelStep::forward(relation));
            }
            if rel.inverse_name.as_deref() == Some(name) {
                return Ok(self.normalize(RelStep {
                    relation,
                    inverse: true,
                }));
            }
        }
        if let Some(base) = name.strip_suffix(INVERSE_SUFFIX) {
            let relation = self.relation_id(base)?;
            return Ok(self.normalize(RelStep {
                relation,
                inverse: true,
            }));
        }
        Err(Error::unknown_relation(name))
    }

    fn normalize(&self, step: RelStep) -> RelStep {
        if self.relation(step.relation).is_self_inverse() {
            RelStep::forward(step.relation)
        } else {
            step
        }
    }

    pub fn step_name(&self, step: RelStep) -> String {
        let rel = self.relation(step.relation);
        if !step.inverse {
            rel.name.clone()
        } else {
            match &rel.inverse_name {
                Some(inv) => inv.clone(),
                None => format!("{}{INVERSE_SUFFIX}", rel.name),
            }
        }
    }

    pub fn inverse(&self, step: RelStep) -> RelStep {
        self.normalize(RelStep {
            relation: step.relation,
            inverse: !step.inverse,
        })
    }

    pub fn step_source(&self, step: RelStep) -> TypeId {
        let rel = self.relation(step.relation);
        if step.inverse {
            rel.dst
        } else {
            rel.src
        }
    }

    pub fn step_target(&self, step: RelStep) -> TypeId {
        let rel = self.relation(step.relation);
        if step.inverse {
            rel.src
        } else {
            rel.dst
        }
    }

    /// All directed steps leaving type `from`, ordered by relation id with
    /// the forward direction first.
    pub fn steps_from(&self, from: TypeId) -> Vec<RelStep> {
        let mut out = Vec::new();
        for relation in self.relation_ids() {
            let rel = self.relation(relation);
            if rel.src == from {
                out.push(RelStep::forward(relation));
            }
            if rel.dst == from && !rel.is_self_inverse() {
                out.push(RelStep {
                    relation,
                    inverse: true,
                });
            }
        }
        out
    }

    pub fn steps_between(&self, from: TypeId, to: TypeId) -> Vec<RelStep> {
        self.steps_from(from)
            .into_iter()
            .filter(|s| self.step_target(*s) == to)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn movie_schema() -> Schema {
        Schema::new(
            &["M", "A", "D"],
            vec![RelationDecl::new("MA", "M", "A"), RelationDecl::new("MD", "M", "D")],
        )
        .unwrap()
    }

    #[test]
    fn resolves_forward_and_inverse_names() {
        let s = movie_schema();
        let ma = s.relation_id("MA").unwrap();
        assert_eq!(s.resolve_step("MA").unwrap(), RelStep::forward(ma));
        let inv = s.resolve_step("MA^-1").unwrap();
        assert!(inv.inverse);
        assert_eq!(s.step_source(inv), s.type_id("A").unwrap());
        assert_eq!(s.step_name(inv), "MA^-1");
        assert!(matches!(s.resolve_step("XY"), Err(Error::UnknownRelation { .. })));
    }

    #[test]
    fn declared_inverse_name() {
        let s = Schema::new(
            &["A", "P"],
            vec![RelationDecl::new("writes", "A", "P").with_inverse("written_by")],
        )
        .unwrap();
        let step = s.resolve_step("written_by").unwrap();
        assert!(step.inverse);
        assert_eq!(s.step_name(step), "written_by");
        assert_eq!(s.resolve_step("writes^-1").unwrap(), step);
    }

    #[test]
    fn self_inverse_relation_has_one_direction() {
        let s = Schema::new(&["X"], vec![RelationDecl::new("knows", "X", "X").with_inverse("knows")]).unwrap();
        let x = s.type_id("X").unwrap();
        assert_eq!(s.steps_from(x).len(), 1);
        let step = s.resolve_step("knows^-1").unwrap();
        assert!(!step.inverse);
        assert_eq!(s.inverse(step), step);
    }

    #[test]
    fn rejects_bad_schemas() {
        assert!(matches!(Schema::new(&["A", "A"], vec![]), Err(Error::InvalidSchema(_))));
        assert!(matches!(
            Schema::new(&["A"], vec![RelationDecl::new("AB", "A", "B")]),
            Err(Error::UnknownType { .. })
        ));
        assert!(matches!(
            Schema::new(&["A", "B"], vec![RelationDecl::new("AB", "A", "B").with_inverse("AB")]),
            Err(Error::InvalidSchema(_))
        ));
        assert!(matches!(
            Schema::new(
                &["A", "B"],
                vec![RelationDecl::new("AB", "A", "B"), RelationDecl::new("AB", "B", "A")]
            ),
            Err(Error::InvalidSchema(_))
        ));
    }
}
