//! JSON documents for operations, relations, bundles and closure sets.
//!
//! Tables are stored in row-major order (first argument most significant),
//! bit-exact with [`Operation::to_table`].

use serde::{Deserialize, Serialize};

use crate::algebra::{Domain, Operation, RuleId, RuleParams, RuleSpec};
use crate::closure::ClosureSet;
use crate::constructions::{rule_operation, ConstructionBundle, ConstructionKind};
use crate::error::{Error, Result};
use crate::relations::Relation;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum OperationDoc {
    Table {
        domain_size: u32,
        arity: usize,
        table: Vec<u32>,
    },
    Rule {
        name: RuleId,
        params: RuleParams,
    },
}

impl OperationDoc {
    /// Rule operations stay rules; everything else is written as a table.
    pub fn from_operation(op: &Operation) -> Result<Self> {
        if let Some(spec) = op.rule_spec() {
            return Ok(OperationDoc::Rule {
                name: spec.name,
                params: spec.params.clone(),
            });
        }
        Ok(OperationDoc::Table {
            domain_size: op.domain().size(),
            arity: op.arity(),
            table: op.to_table()?,
        })
    }

    pub fn to_operation(&self) -> Result<Operation> {
        match self {
            OperationDoc::Table {
                domain_size,
                arity,
                table,
            } => Operation::from_table(Domain::new(*domain_size)?, *arity, table.clone()),
            OperationDoc::Rule { name, params } => rule_operation(&RuleSpec {
                name: *name,
                params: params.clone(),
            }),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationDoc {
    pub domain_size: u32,
    pub arity: usize,
    pub tuples: Vec<Vec<u32>>,
}

impl RelationDoc {
    pub fn from_relation(rel: &Relation) -> Self {
        Self {
            domain_size: rel.domain().size(),
            arity: rel.arity(),
            tuples: rel.to_vecs(),
        }
    }

    /// Deduplicates and sorts.
    pub fn to_relation(&self) -> Result<Relation> {
        Relation::new(Domain::new(self.domain_size)?, self.arity, &self.tuples)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BundleDoc {
    pub construction: ConstructionKind,
    pub n: u32,
    pub d: u32,
    pub k: usize,
    pub sigma: RelationDoc,
    pub rho: RelationDoc,
    pub f: OperationDoc,
    pub g: OperationDoc,
}

impl BundleDoc {
    pub fn from_bundle(b: &ConstructionBundle) -> Result<Self> {
        Ok(Self {
            construction: b.kind,
            n: b.n,
            d: b.d,
            k: b.k,
            sigma: RelationDoc::from_relation(&b.sigma),
            rho: RelationDoc::from_relation(&b.rho),
            f: OperationDoc::from_operation(&b.f)?,
            g: OperationDoc::from_operation(&b.g)?,
        })
    }

    pub fn to_bundle(&self) -> Result<ConstructionBundle> {
        let bundle = ConstructionBundle {
            kind: self.construction,
            n: self.n,
            d: self.d,
            k: self.k,
            sigma: self.sigma.to_relation()?,
            rho: self.rho.to_relation()?,
            f: self.f.to_operation()?,
            g: self.g.to_operation()?,
        };
        let domain = bundle.rho.domain();
        for other in [bundle.sigma.domain(), bundle.f.domain(), bundle.g.domain()] {
            domain.same_as(other)?;
        }
        if domain.size() != bundle.n {
            return Err(Error::InvalidParameter(format!(
                "bundle n = {} but rho lives on a domain of size {}",
                bundle.n,
                domain.size()
            )));
        }
        Ok(bundle)
    }
}

/// A closure set as a list of table documents.
pub fn closure_docs(set: &ClosureSet) -> Vec<OperationDoc> {
    set.tables()
        .map(|t| OperationDoc::Table {
            domain_size: set.domain.size(),
            arity: set.target_arity,
            table: t.to_vec(),
        })
        .collect()
}

pub fn parse_operation(json: &str) -> Result<Operation> {
    serde_json::from_str::<OperationDoc>(json)?.to_operation()
}

pub fn parse_relation(json: &str) -> Result<Relation> {
    serde_json::from_str::<RelationDoc>(json)?.to_relation()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::build_thm2;

    #[test]
    fn table_document_layout() {
        let d = Domain::new(2).unwrap();
        let p = Operation::projection(d, 2, 1).unwrap();
        let json = serde_json::to_value(OperationDoc::from_operation(&p).unwrap()).unwrap();
        assert_eq!(
            json,
            serde_json::json!({"kind": "table", "domain_size": 2, "arity": 2, "table": [0, 0, 1, 1]})
        );
    }

    #[test]
    fn rule_document_layout() {
        let b = build_thm2(5).unwrap();
        let json = serde_json::to_value(OperationDoc::from_operation(&b.f).unwrap()).unwrap();
        assert_eq!(
            json,
            serde_json::json!({"kind": "rule", "name": "thm2_f", "params": {"n": 5}})
        );
        let op = parse_operation(&json.to_string()).unwrap();
        assert_eq!(op, b.f);
        let g =
            parse_operation(r#"{"kind":"rule","name":"thm3_g","params":{"n":4,"d":3}}"#).unwrap();
        assert_eq!(g.arity(), 4);
        assert!(parse_operation(r#"{"kind":"rule","name":"thm3_g","params":{"n":4}}"#).is_err());
        assert!(parse_operation(r#"{"kind":"rule","name":"nope","params":{"n":4}}"#).is_err());
    }

    #[test]
    fn relation_documents_normalise() {
        let rel =
            parse_relation(r#"{"domain_size":3,"arity":2,"tuples":[[2,0],[0,1],[2,0]]}"#).unwrap();
        assert_eq!(rel.to_vecs(), vec![vec![0, 1], vec![2, 0]]);
        assert!(parse_relation(r#"{"domain_size":3,"arity":2,"tuples":[[3,0]]}"#).is_err());
    }

    #[test]
    fn bad_tables_rejected() {
        assert!(
            parse_operation(r#"{"kind":"table","domain_size":2,"arity":2,"table":[0,1,1]}"#)
                .is_err()
        );
        assert!(
            parse_operation(r#"{"kind":"table","domain_size":2,"arity":1,"table":[0,2]}"#).is_err()
        );
        assert!(
            parse_operation(r#"{"kind":"table","domain_size":1,"arity":1,"table":[0]}"#).is_err()
        );
    }

    #[test]
    fn bundle_round_trip() {
        let b = build_thm2(4).unwrap();
        let doc = BundleDoc::from_bundle(&b).unwrap();
        let json = serde_json::to_string(&doc).unwrap();
        let back: BundleDoc = serde_json::from_str(&json).unwrap();
        assert_eq!(back, doc);
        let b2 = back.to_bundle().unwrap();
        assert_eq!(b2.sigma, b.sigma);
        assert_eq!(b2.f, b.f);
        assert_eq!(b2.g, b.g);
    }
}
