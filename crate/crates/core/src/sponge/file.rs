//! JSON sponge files.
//!
//! ```json
//! {"type":"bedford-mcmullen","bases":[2,3,3],"digits":[[0,0,0],[0,1,1],[0,2,2],[1,0,1]]}
//! {"type":"lalley-gatzouras","dims":2,"nodes":[{"prefix":[0],"c":"1/2","t":"0"}, ...]}
//! ```
//!
//! Lalley–Gatzouras ratios are strings holding an exact literal: `"p/q"`,
//! an integer, a decimal such as `"0.25"`, or a power such as `"3^-2"`.

use super::{BmInput, LgInput, LgNode, LgSponge, SpongeSpec};
use crate::rational::{format_rational, parse_rational, ParseRationalError};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FileError {
    #[error("malformed sponge file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("node {prefix:?}: {source}")]
    Ratio {
        prefix: Vec<u32>,
        source: ParseRationalError,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LgNodeFile {
    pub prefix: Vec<u32>,
    pub c: String,
    pub t: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SpongeFile {
    BedfordMcmullen {
        bases: Vec<u32>,
        digits: Vec<Vec<u32>>,
    },
    LalleyGatzouras {
        dims: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        bases: Option<Vec<u32>>,
        nodes: Vec<LgNodeFile>,
    },
}

/// A parsed but not yet validated definition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SpongeInput {
    Bm(BmInput),
    Lg(LgInput),
}

impl SpongeFile {
    pub fn parse(text: &str) -> Result<Self, FileError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("sponge files always serialize")
    }

    pub fn into_input(self) -> Result<SpongeInput, FileError> {
        match self {
            SpongeFile::BedfordMcmullen { bases, digits } => {
                Ok(SpongeInput::Bm(BmInput { bases, digits }))
            }
            SpongeFile::LalleyGatzouras { dims, bases, nodes } => {
                let nodes = nodes
                    .into_iter()
                    .map(|node| {
                        let ratio = |text: &str| {
                            parse_rational(text).map_err(|source| FileError::Ratio {
                                prefix: node.prefix.clone(),
                                source,
                            })
                        };
                        Ok(LgNode {
                            contraction: ratio(&node.c)?,
                            translation: ratio(&node.t)?,
                            prefix: node.prefix,
                        })
                    })
                    .collect::<Result<_, FileError>>()?;
                Ok(SpongeInput::Lg(LgInput { dims, bases, nodes }))
            }
        }
    }

    pub fn from_bm(spec: &SpongeSpec) -> Self {
        let input = spec.to_input();
        SpongeFile::BedfordMcmullen {
            bases: input.bases,
            digits: input.digits,
        }
    }

    pub fn from_lg(sponge: &LgSponge) -> Self {
        let input = sponge.to_input();
        SpongeFile::LalleyGatzouras {
            dims: input.dims,
            bases: input.bases,
            nodes: input
                .nodes
                .into_iter()
                .map(|node| LgNodeFile {
                    c: format_rational(&node.contraction),
                    t: format_rational(&node.translation),
                    prefix: node.prefix,
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::diagonal;
    use crate::rational::ratio;
    use crate::sponge::{uniform_grid_encoding, SymbolicSponge};

    #[test]
    fn reads_bm_shape() {
        let text = r#"{"type":"bedford-mcmullen","bases":[2,3,3],"digits":[[0,0,0],[0,1,1],[0,2,2],[1,0,1]]}"#;
        let SpongeInput::Bm(input) = SpongeFile::parse(text).unwrap().into_input().unwrap() else {
            panic!("expected a Bedford-McMullen input");
        };
        assert_eq!(input.bases, vec![2, 3, 3]);
        assert_eq!(
            SpongeSpec::new(input).unwrap().digits(),
            diagonal().digits()
        );
    }

    #[test]
    fn reads_lg_shape_with_decimal_and_fraction_ratios() {
        let text = r#"{"type":"lalley-gatzouras","dims":1,"nodes":[
            {"prefix":[0],"c":"0.5","t":"0"},{"prefix":[1],"c":"1/4","t":"3/4"}]}"#;
        let SpongeInput::Lg(input) = SpongeFile::parse(text).unwrap().into_input().unwrap() else {
            panic!("expected a Lalley-Gatzouras input");
        };
        assert_eq!(input.nodes[0].contraction, ratio(1, 2));
        assert_eq!(input.nodes[1].translation, ratio(3, 4));
    }

    #[test]
    fn rejects_bad_ratio_and_bad_json() {
        let text =
            r#"{"type":"lalley-gatzouras","dims":1,"nodes":[{"prefix":[0],"c":"half","t":"0"}]}"#;
        assert!(matches!(
            SpongeFile::parse(text).unwrap().into_input(),
            Err(FileError::Ratio { .. })
        ));
        assert!(SpongeFile::parse("{not json").is_err());
        assert!(SpongeFile::parse(r#"{"type":"carpet"}"#).is_err());
    }

    #[test]
    fn lg_file_round_trips() {
        let file = SpongeFile::from_lg(&uniform_grid_encoding(&diagonal()));
        let reparsed = SpongeFile::parse(&file.to_json()).unwrap();
        assert_eq!(reparsed, file);
    }
}
