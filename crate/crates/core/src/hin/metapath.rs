use crate::error::{Error, Result};
use crate::hin::schema::{RelStep, Schema, TypeId};

/// A validated sequence of node types joined by relation steps.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MetaPath {
    types: Vec<TypeId>,
    steps: Vec<RelStep>,
    symmetric: bool,
}

impl MetaPath {
    /// Build from a start type and a list of steps, checking that each step
    /// leaves the type the previous one arrived at.
    pub fn from_steps(schema: &Schema, start: TypeId, steps: Vec<RelStep>) -> Result<Self> {
        if steps.is_empty() {
            return Err(Error::Parse {
                input: schema.type_name(start).to_owned(),
                reason: "a meta-path needs at least one relation".into(),
            });
        }
        let mut types = Vec::with_capacity(steps.len() + 1);
        types.push(start);
        for &step in &steps {
            let here = *types.last().unwrap();
            if schema.step_source(step) != here {
                return Err(Error::SchemaMismatch {
                    src: schema.type_name(here).to_owned(),
                    dst: schema.type_name(schema.step_target(step)).to_owned(),
                });
            }
            types.push(schema.step_target(step));
        }
        let symmetric = is_symmetric(schema, &types, &steps);
        Ok(Self {
            types,
            steps,
            symmetric,
        })
    }

    /// Parse either the short form (`MAM`, one character per node type) or
    /// the long form (`M-[MA]->A-[MA^-1]->M`).
    pub fn parse(input: &str, schema: &Schema) -> Result<Self> {
        let s = input.trim();
        if s.contains("-[") || s.contains("]->") {
            parse_long(s, schema)
        } else {
            parse_short(s, schema)
        }
    }

    pub fn types(&self) -> &[TypeId] {
        &self.types
    }

    pub fn steps(&self) -> &[RelStep] {
        &self.steps
    }

    /// Number of relations, `l`.
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn start(&self) -> TypeId {
        self.types[0]
    }

    pub fn end(&self) -> TypeId {
        *self.types.last().unwrap()
    }

    /// Steps of the first half; for a symmetric path of length `2h` these
    /// are the `h` steps from the endpoint to the meeting type.
    pub fn half(&self) -> &[RelStep] {
        &self.steps[..self.steps.len() / 2]
    }

    pub fn reversed(&self, schema: &Schema) -> MetaPath {
        let steps: Vec<RelStep> = self.steps.iter().rev().map(|&s| schema.inverse(s)).collect();
        let mut types = self.types.clone();
        types.reverse();
        MetaPath {
            symmetric: self.symmetric,
            types,
            steps,
        }
    }

    /// Canonical long form; parses back to an equal path.
    pub fn format(&self, schema: &Schema) -> String {
        let mut out = schema.type_name(self.types[0]).to_owned();
        for (step, t) in self.steps.iter().zip(&self.types[1..]) {
            out.push_str("-[");
            out.push_str(&schema.step_name(*step));
            out.push_str("]->");
            out.push_str(schema.type_name(*t));
        }
        out
    }

    /// Short form when it is unambiguous, the long form otherwise.
    pub fn label(&self, schema: &Schema) -> String {
        if self.types.iter().all(|&t| schema.type_name(t).chars().count() == 1) {
            let short: String = self.types.iter().map(|&t| schema.type_name(t)).collect();
            if MetaPath::parse(&short, schema).ok().as_ref() == Some(self) {
                return short;
            }
        }
        self.format(schema)
    }
}

fn is_symmetric(schema: &Schema, types: &[TypeId], steps: &[RelStep]) -> bool {
    let l = steps.len();
    types.iter().eq(types.iter().rev()) && (0..l).all(|i| steps[i] == schema.inverse(steps[l - 1 - i]))
}

fn short_type(schema: &Schema, c: char, input: &str) -> Result<TypeId> {
    let exact: Vec<TypeId> = schema
        .types()
        .filter(|&t| {
            let mut chars = schema.type_name(t).chars();
            chars.next() == Some(c) && chars.next().is_none()
        })
        .collect();
    if let [t] = exact[..] {
        return Ok(t);
    }
    let by_initial: Vec<TypeId> = schema.types().filter(|&t| schema.type_name(t).starts_with(c)).collect();
    match by_initial[..] {
        [t] => Ok(t),
        [] => Err(Error::Parse {
            input: input.to_owned(),
            reason: format!("no node type matches `{c}`"),
        }),
        _ => Err(Error::Parse {
            input: input.to_owned(),
            reason: format!("`{c}` matches several node types"),
        }),
    }
}

fn parse_short(s: &str, schema: &Schema) -> Result<MetaPath> {
    if s.chars().count() < 2 || s.chars().any(|c| !c.is_alphanumeric()) {
        return Err(Error::Parse {
            input: s.to_owned(),
            reason: "expected a node-type sequence such as `APA`".into(),
        });
    }
    let types = s
        .chars()
        .map(|c| short_type(schema, c, s))
        .collect::<Result<Vec<_>>>()?;
    let mut steps = Vec::with_capacity(types.len() - 1);
    for pair in types.windows(2) {
        let candidates = schema.steps_between(pair[0], pair[1]);
        match candidates[..] {
            [step] => steps.push(step),
            [] => {
                return Err(Error::SchemaMismatch {
                    src: schema.type_name(pair[0]).to_owned(),
                    dst: schema.type_name(pair[1]).to_owned(),
                })
            }
            _ => {
                return Err(Error::AmbiguousRelation {
                    src: schema.type_name(pair[0]).to_owned(),
                    dst: schema.type_name(pair[1]).to_owned(),
                })
            }
        }
    }
    MetaPath::from_steps(schema, types[0], steps)
}

fn parse_long(s: &str, schema: &Schema) -> Result<MetaPath> {
    let bad = |reason: &str| Error::Parse {
        input: s.to_owned(),
        reason: reason.to_owned(),
    };
    let (first, mut rest) = match s.find("-[") {
        Some(i) => (&s[..i], &s[i..]),
        None => return Err(bad("expected `-[`")),
    };
    let start = schema.type_id(first.trim())?;
    let mut steps = Vec::new();
    let mut here = start;
    while !rest.is_empty() {
        let body = rest.strip_prefix("-[").ok_or_else(|| bad("expected `-[`"))?;
        let close = body.find("]->").ok_or_else(|| bad("expected `]->`"))?;
        let rel_name = body[..close].trim();
        let after = &body[close + 3..];
        let next_end = after.find("-[").unwrap_or(after.len());
        let type_name = after[..next_end].trim();
        if rel_name.is_empty() || type_name.is_empty() {
            return Err(bad("empty relation or node type"));
        }
        let step = schema.resolve_step(rel_name)?;
        let target = schema.type_id(type_name)?;
        if schema.step_source(step) != here || schema.step_target(step) != target {
            return Err(Error::SchemaMismatch {
                src: schema.type_name(here).to_owned(),
                dst: type_name.to_owned(),
            });
        }
        steps.push(step);
        here = target;
        rest = &after[next_end..];
    }
    MetaPath::from_steps(schema, start, steps)
}

/// A non-empty, duplicate-free set of symmetric meta-paths sharing one
/// endpoint type. Enumeration may yield an empty set for a type with no
/// relations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MetaPathSet {
    endpoint: TypeId,
    paths: Vec<MetaPath>,
}

impl MetaPathSet {
    pub fn new(schema: &Schema, paths: Vec<MetaPath>) -> Result<Self> {
        let first = paths.first().ok_or(Error::EmptyMetaPathSet)?;
        let endpoint = first.start();
        let mut unique: Vec<MetaPath> = Vec::with_capacity(paths.len());
        for p in paths {
            if !p.is_symmetric() {
                return Err(Error::AsymmetricMetaPath(p.label(schema)));
            }
            if p.len() % 2 == 1 {
                return Err(Error::OddLengthMetaPath(p.label(schema)));
            }
            if p.start() != endpoint {
                return Err(Error::MixedEndpointTypes(
                    schema.type_name(endpoint).to_owned(),
                    schema.type_name(p.start()).to_owned(),
                ));
            }
            if !unique.contains(&p) {
                unique.push(p);
            }
        }
        Ok(Self {
            endpoint,
            paths: unique,
        })
    }

    pub fn single(schema: &Schema, path: MetaPath) -> Result<Self> {
        Self::new(schema, vec![path])
    }

    /// Parse a comma-separated list of meta-paths.
    pub fn parse(input: &str, schema: &Schema) -> Result<Self> {
        let paths = input
            .split(',')
            .filter(|p| !p.trim().is_empty())
            .map(|p| MetaPath::parse(p, schema))
            .collect::<Result<Vec<_>>>()?;
        Self::new(schema, paths)
    }

    pub fn endpoint(&self) -> TypeId {
        self.endpoint
    }

    pub fn paths(&self) -> &[MetaPath] {
        &self.paths
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn labels(&self, schema: &Schema) -> Vec<String> {
        self.paths.iter().map(|p| p.label(schema)).collect()
    }
}

/// Every symmetric meta-path of even length `<= max_len` whose endpoints
/// have type `endpoint`, shortest first, then by step sequence.
pub fn enumerate_symmetric_metapaths(schema: &Schema, endpoint: TypeId, max_len: usize) -> Result<MetaPathSet> {
    if max_len < 2 || max_len % 2 == 1 {
        return Err(Error::InvalidParameter(format!(
            "max_len must be even and at least 2, got {max_len}"
        )));
    }
    if endpoint.0 as usize >= schema.type_count() {
        return Err(Error::UnknownType {
            name: format!("#{}", endpoint.0),
            origin: None,
        });
    }
    let mut halves: Vec<Vec<RelStep>> = Vec::new();
    let mut frontier: Vec<(TypeId, Vec<RelStep>)> = vec![(endpoint, Vec::new())];
    for _ in 0..max_len / 2 {
        let mut next = Vec::new();
        for (here, prefix) in &frontier {
            for step in schema.steps_from(*here) {
                let mut steps = prefix.clone();
                steps.push(step);
                halves.push(steps.clone());
                next.push((schema.step_target(step), steps));
            }
        }
        frontier = next;
    }
    halves.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    let mut paths = Vec::with_capacity(halves.len());
    for half in halves {
        let mut steps = half.clone();
        steps.extend(half.iter().rev().map(|&s| schema.inverse(s)));
        let path = MetaPath::from_steps(schema, endpoint, steps)?;
        debug_assert!(path.is_symmetric());
        if !paths.contains(&path) {
            paths.push(path);
        }
    }
    Ok(MetaPathSet { endpoint, paths })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hin::schema::RelationDecl;

    fn movie() -> Schema {
        Schema::new(
            &["M", "A", "D"],
            vec![RelationDecl::new("MA", "M", "A"), RelationDecl::new("MD", "M", "D")],
        )
        .unwrap()
    }

    #[test]
    fn short_form_mam() {
        let s = movie();
        let p = MetaPath::parse("MAM", &s).unwrap();
        assert_eq!(p.len(), 2);
        assert!(p.is_symmetric());
        assert_eq!(p.format(&s), "M-[MA]->A-[MA^-1]->M");
        assert_eq!(p.label(&s), "MAM");
    }

    #[test]
    fn short_form_apa_on_dblp_schema() {
        let s = Schema::new(
            &["A", "P", "V"],
            vec![
                RelationDecl::new("writing", "A", "P").with_inverse("written-by"),
                RelationDecl::new("published", "P", "V"),
            ],
        )
        .unwrap();
        let p = MetaPath::parse("APA", &s).unwrap();
        assert!(p.is_symmetric());
        assert_eq!(p.len(), 2);
        assert_eq!(p.format(&s), "A-[writing]->P-[written-by]->A");
    }

    #[test]
    fn asymmetric_and_invalid() {
        let s = movie();
        // A and D are not connected
        assert!(matches!(MetaPath::parse("MAD", &s), Err(Error::SchemaMismatch { .. })));
        assert!(!MetaPath::parse("MA", &s).unwrap().is_symmetric());
        assert!(matches!(MetaPath::parse("M", &s), Err(Error::Parse { .. })));
        assert!(matches!(MetaPath::parse("M-A", &s), Err(Error::Parse { .. })));
        assert!(matches!(
            MetaPath::parse("M-[MD]->A", &s),
            Err(Error::SchemaMismatch { .. })
        ));
    }

    #[test]
    fn ambiguous_short_form_rejected() {
        let s = Schema::new(
            &["A", "P"],
            vec![
                RelationDecl::new("writes", "A", "P"),
                RelationDecl::new("reviews", "A", "P"),
            ],
        )
        .unwrap();
        assert!(matches!(
            MetaPath::parse("APA", &s),
            Err(Error::AmbiguousRelation { .. })
        ));
        let p = MetaPath::parse("A-[reviews]->P-[reviews^-1]->A", &s).unwrap();
        assert!(p.is_symmetric());
        assert_eq!(p.label(&s), "A-[reviews]->P-[reviews^-1]->A");
    }

    #[test]
    fn enumerate_fixture() {
        let s = movie();
        let m = s.type_id("M").unwrap();
        let set = enumerate_symmetric_metapaths(&s, m, 2).unwrap();
        assert_eq!(set.labels(&s), ["MAM", "MDM"]);
        let d = s.type_id("D").unwrap();
        let set = enumerate_symmetric_metapaths(&s, d, 2).unwrap();
        assert_eq!(set.labels(&s), ["DMD"]);
        let set = enumerate_symmetric_metapaths(&s, m, 4).unwrap();
        assert_eq!(set.labels(&s), ["MAM", "MDM", "MAMAM", "MDMDM"]);
        for p in set.paths() {
            assert!(p.is_symmetric());
            assert_eq!(&p.reversed(&s), p);
        }
    }

    #[test]
    fn enumerate_isolated_type_is_empty() {
        let s = Schema::new(&["M", "A", "X"], vec![RelationDecl::new("MA", "M", "A")]).unwrap();
        let x = s.type_id("X").unwrap();
        assert!(enumerate_symmetric_metapaths(&s, x, 2).unwrap().is_empty());
        assert!(enumerate_symmetric_metapaths(&s, x, 3).is_err());
        assert!(enumerate_symmetric_metapaths(&s, TypeId(9), 2).is_err());
    }

    #[test]
    fn set_validation() {
        let s = movie();
        assert!(matches!(MetaPathSet::parse("", &s), Err(Error::EmptyMetaPathSet)));
        assert!(matches!(
            MetaPathSet::parse("MA", &s),
            Err(Error::AsymmetricMetaPath(_))
        ));
        assert!(matches!(
            MetaPathSet::parse("MAM,DMD", &s),
            Err(Error::MixedEndpointTypes(..))
        ));
        let set = MetaPathSet::parse("MAM, MAM ,MDM", &s).unwrap();
        assert_eq!(set.len(), 2);
    }
}
