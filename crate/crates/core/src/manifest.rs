//! JSON Lines encodings of frame mappings and pair manifests.
//!
//! Frame mapping, one record per A frame:
//! `{"a":0,"b":4,"d":0.25,"switched":true}`
//!
//! Pair manifest, a header record followed by one record per pair:
//! `{"version":"posekit/1","params":{...},"max_distance":null}` then `{"a":0,"b":1,"d":0.1}`
//!
//! Distances use the shortest representation that parses back to the identical `f64`,
//! so reading a file reproduces the values written.

use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::annotation::SCHEMA_VERSION;
use crate::transfer::{CandidatePolicy, FrameMapping, MappingEntry, MatchParams, PairManifest, PairRecord};

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("pair manifest has no header record")]
    MissingHeader,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MappingLine {
    a: usize,
    b: usize,
    d: f64,
    switched: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PairLine {
    a: usize,
    b: usize,
    d: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HeaderParams {
    k: usize,
    #[serde(with = "lambda_repr")]
    lambda: f64,
    normalize: bool,
    candidate_policy: CandidatePolicy,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HeaderLine {
    version: String,
    params: HeaderParams,
    max_distance: Option<f64>,
}

// JSON has no infinity; an unbounded lambda is written as the string "inf".
mod lambda_repr {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if *v == f64::INFINITY {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Str(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Str(s) if s == "inf" => Ok(f64::INFINITY),
            Repr::Str(s) => Err(serde::de::Error::custom(format!("invalid lambda \"{s}\""))),
        }
    }
}

fn write_line<W: Write, T: Serialize>(sink: &mut W, record: &T) -> io::Result<()> {
    serde_json::to_writer(&mut *sink, record)?;
    sink.write_all(b"\n")
}

fn parse_line<T: for<'de> Deserialize<'de>>(line: &str, number: usize) -> Result<T, ManifestError> {
    serde_json::from_str(line).map_err(|e| ManifestError::Parse {
        line: number,
        message: e.to_string(),
    })
}

/// Non-blank lines with their 1-based line numbers.
fn records<R: BufRead>(source: R) -> impl Iterator<Item = Result<(usize, String), ManifestError>> {
    source
        .lines()
        .enumerate()
        .map(|(i, line)| line.map(|l| (i + 1, l)).map_err(ManifestError::from))
        .filter(|r| r.as_ref().map_or(true, |(_, l)| !l.trim().is_empty()))
}

pub fn write_frame_mapping<W: Write>(mapping: &FrameMapping, mut sink: W) -> io::Result<()> {
    for e in &mapping.entries {
        write_line(
            &mut sink,
            &MappingLine {
                a: e.a_index,
                b: e.b_index,
                d: e.distance,
                switched: e.switched,
            },
        )?;
    }
    sink.flush()
}

pub fn read_frame_mapping<R: BufRead>(source: R) -> Result<FrameMapping, ManifestError> {
    let entries = records(source)
        .map(|r| {
            let (number, line) = r?;
            let rec: MappingLine = parse_line(&line, number)?;
            Ok(MappingEntry {
                a_index: rec.a,
                b_index: rec.b,
                distance: rec.d,
                switched: rec.switched,
            })
        })
        .collect::<Result<_, ManifestError>>()?;
    Ok(FrameMapping { entries })
}

pub fn write_pair_manifest<W: Write>(manifest: &PairManifest, mut sink: W) -> io::Result<()> {
    let p = &manifest.params;
    write_line(
        &mut sink,
        &HeaderLine {
            version: SCHEMA_VERSION.to_string(),
            params: HeaderParams {
                k: p.k,
                lambda: p.lambda,
                normalize: p.normalize,
                candidate_policy: p.candidate_policy,
            },
            max_distance: manifest.max_distance,
        },
    )?;
    for pair in &manifest.pairs {
        write_line(
            &mut sink,
            &PairLine {
                a: pair.a_index,
                b: pair.b_index,
                d: pair.distance,
            },
        )?;
    }
    sink.flush()
}

pub fn read_pair_manifest<R: BufRead>(source: R) -> Result<PairManifest, ManifestError> {
    let mut lines = records(source);
    let (number, header) = lines.next().ok_or(ManifestError::MissingHeader)??;
    let header: HeaderLine = parse_line(&header, number)?;
    if header.version != SCHEMA_VERSION {
        return Err(ManifestError::Parse {
            line: number,
            message: format!("unsupported version \"{}\"", header.version),
        });
    }
    let pairs = lines
        .map(|r| {
            let (number, line) = r?;
            let rec: PairLine = parse_line(&line, number)?;
            Ok(PairRecord {
                a_index: rec.a,
                b_index: rec.b,
                distance: rec.d,
            })
        })
        .collect::<Result<_, ManifestError>>()?;
    let hp = header.params;
    Ok(PairManifest {
        pairs,
        params: MatchParams {
            k: hp.k,
            lambda: hp.lambda,
            normalize: hp.normalize,
            candidate_policy: hp.candidate_policy,
        },
        max_distance: header.max_distance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_mapping_writes_nothing() {
        let mut buf = Vec::new();
        write_frame_mapping(&FrameMapping::default(), &mut buf).unwrap();
        assert!(buf.is_empty());
        assert_eq!(read_frame_mapping(&buf[..]).unwrap(), FrameMapping::default());
    }

    #[test]
    fn single_entry_layout() {
        let mapping = FrameMapping {
            entries: vec![MappingEntry {
                a_index: 0,
                b_index: 4,
                distance: 0.25,
                switched: true,
            }],
        };
        let mut buf = Vec::new();
        write_frame_mapping(&mapping, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "{\"a\":0,\"b\":4,\"d\":0.25,\"switched\":true}\n"
        );
    }

    #[test]
    fn distances_keep_full_precision() {
        let d = 0.123_456_789_012_345_67_f64;
        let mapping = FrameMapping {
            entries: vec![MappingEntry {
                a_index: 1,
                b_index: 2,
                distance: d,
                switched: false,
            }],
        };
        let mut buf = Vec::new();
        write_frame_mapping(&mapping, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.contains("0.123456789012"), "{text}");
        assert_eq!(read_frame_mapping(&buf[..]).unwrap(), mapping);
    }

    #[test]
    fn empty_manifest_is_header_only() {
        let manifest = PairManifest {
            pairs: vec![],
            params: MatchParams::default(),
            max_distance: Some(0.5),
        };
        let mut buf = Vec::new();
        write_pair_manifest(&manifest, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(
            text,
            "{\"version\":\"posekit/1\",\"params\":{\"k\":1,\"lambda\":0.0,\"normalize\":true,\
             \"candidate_policy\":\"nearest_prev_index\"},\"max_distance\":0.5}\n"
        );
        assert_eq!(read_pair_manifest(&buf[..]).unwrap(), manifest);
    }

    #[test]
    fn infinite_lambda_survives() {
        let manifest = PairManifest {
            pairs: vec![PairRecord {
                a_index: 0,
                b_index: 0,
                distance: 0.0,
            }],
            params: MatchParams {
                lambda: f64::INFINITY,
                ..MatchParams::default()
            },
            max_distance: None,
        };
        let mut buf = Vec::new();
        write_pair_manifest(&manifest, &mut buf).unwrap();
        assert_eq!(read_pair_manifest(&buf[..]).unwrap(), manifest);
    }

    #[test]
    fn malformed_input() {
        assert!(matches!(
            read_pair_manifest(&b""[..]),
            Err(ManifestError::MissingHeader)
        ));
        let err = read_frame_mapping(&b"{\"a\":0,\"b\":1,\"d\":0.5,\"switched\":false}\n{\"a\":1}\n"[..]).unwrap_err();
        assert!(matches!(err, ManifestError::Parse { line: 2, .. }), "{err}");
        let err = read_frame_mapping(&b"{\"a\":0,\"b\":1,\"d\":0.5,\"switched\":false,\"x\":1}\n"[..]).unwrap_err();
        assert!(matches!(err, ManifestError::Parse { line: 1, .. }));
    }
}
