//! SVMlight/LETOR-style text format.
//!
//! One document per line:
//!
//! ```text
//! <label> qid:<query_id> <idx>:<value> ... #bucket=<b>
//! ```
//!
//! Feature indices are 1-based and strictly increasing; omitted indices
//! read as zero. The trailing comment is optional; a `bucket=<b>` comment
//! assigns the query's difficulty bucket, any other comment is ignored.
//! Labels above the maximum grade are clamped with a warning count rather
//! than rejected, since crawled judgment files commonly contain them.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::{Corpus, Document, Provenance, QueryGroup, DEFAULT_BUCKET, MAX_LABEL, NUM_BUCKETS};
use crate::{Error, Result};

/// Non-fatal observations made while parsing.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ParseStats {
    /// Number of labels above [`MAX_LABEL`] that were clamped down.
    pub clamped_labels: u64,
}

/// Parses LETOR text into a corpus. See [`parse_letor_with_stats`].
pub fn parse_letor(text: &str) -> Result<Corpus> {
    parse_letor_with_stats(text).map(|(corpus, _)| corpus)
}

/// Parses LETOR text, also reporting non-fatal warnings.
///
/// Queries keep first-appearance order; documents keep line order within
/// their query and get positional ids. Blank lines and lines that start
/// with `#` are skipped. Errors carry 1-based line numbers.
pub fn parse_letor_with_stats(text: &str) -> Result<(Corpus, ParseStats)> {
    let mut stats = ParseStats::default();
    let mut groups: Vec<QueryGroup> = Vec::new();
    let mut group_index: HashMap<u32, usize> = HashMap::new();
    // Buckets explicitly annotated so far; defaulted groups may be set later.
    let mut explicit_bucket: HashMap<u32, u8> = HashMap::new();
    let mut feature_dim: Option<usize> = None;

    for (line_no, raw) in text.lines().enumerate() {
        let line = line_no + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (data, comment) = match trimmed.split_once('#') {
            Some((d, c)) => (d, Some(c.trim())),
            None => (trimmed, None),
        };

        let mut tokens = data.split_whitespace();
        let label_tok = tokens
            .next()
            .ok_or_else(|| malformed(line, "missing label"))?;
        let label_raw: i64 = label_tok
            .parse()
            .map_err(|_| malformed(line, &format!("label `{label_tok}` is not an integer")))?;
        if label_raw < 0 {
            return Err(malformed(line, &format!("label {label_raw} is negative")));
        }
        let label = if label_raw > i64::from(MAX_LABEL) {
            stats.clamped_labels += 1;
            MAX_LABEL
        } else {
            label_raw as u8
        };

        let qid_tok = tokens
            .next()
            .ok_or_else(|| malformed(line, "missing qid field"))?;
        let qid: u32 = qid_tok
            .strip_prefix("qid:")
            .ok_or_else(|| malformed(line, &format!("expected qid:<id>, got `{qid_tok}`")))?
            .parse()
            .map_err(|_| malformed(line, &format!("qid in `{qid_tok}` is not an integer")))?;

        let mut features: Vec<f64> = Vec::new();
        let mut prev_idx = 0u32;
        for tok in tokens {
            let (idx_s, val_s) = tok
                .split_once(':')
                .ok_or_else(|| malformed(line, &format!("expected <idx>:<value>, got `{tok}`")))?;
            let idx: u32 = idx_s.parse().map_err(|_| {
                malformed(line, &format!("feature index `{idx_s}` is not an integer"))
            })?;
            if idx == 0 {
                return Err(malformed(line, "feature indices are 1-based"));
            }
            if idx <= prev_idx {
                return Err(malformed(
                    line,
                    &format!("feature index {idx} is not strictly increasing"),
                ));
            }
            let val: f64 = val_s.parse().map_err(|_| {
                malformed(line, &format!("feature value `{val_s}` is not a number"))
            })?;
            if !val.is_finite() {
                return Err(malformed(
                    line,
                    &format!("feature value `{val_s}` is not finite"),
                ));
            }
            features.resize(idx as usize, 0.0);
            features[idx as usize - 1] = val;
            prev_idx = idx;
        }
        if features.is_empty() {
            return Err(malformed(line, "document has no features"));
        }
        match feature_dim {
            None => feature_dim = Some(features.len()),
            Some(d) if d != features.len() => {
                return Err(Error::DimMismatch {
                    expected: d,
                    got: features.len(),
                });
            }
            Some(_) => {}
        }

        let bucket = match comment {
            Some(c) => match c.strip_prefix("bucket=") {
                Some(b_s) => {
                    let b: u8 = b_s.trim().parse().map_err(|_| {
                        malformed(line, &format!("bucket `{b_s}` is not an integer"))
                    })?;
                    if b as usize >= NUM_BUCKETS {
                        return Err(malformed(line, &format!("bucket {b} out of range 0..=9")));
                    }
                    Some(b)
                }
                None => None,
            },
            None => None,
        };

        let gi = match group_index.get(&qid) {
            Some(&gi) => gi,
            None => {
                groups.push(QueryGroup {
                    query_id: qid,
                    bucket: DEFAULT_BUCKET,
                    docs: Vec::new(),
                });
                group_index.insert(qid, groups.len() - 1);
                groups.len() - 1
            }
        };
        if let Some(b) = bucket {
            match explicit_bucket.get(&qid) {
                Some(&prev) if prev != b => {
                    return Err(malformed(
                        line,
                        &format!("query {qid} has conflicting buckets {prev} and {b}"),
                    ));
                }
                _ => {
                    explicit_bucket.insert(qid, b);
                    groups[gi].bucket = b;
                }
            }
        }
        let doc_id = groups[gi].docs.len() as u32;
        groups[gi].docs.push(Document {
            doc_id,
            label,
            features,
        });
    }

    let feature_dim = feature_dim.ok_or(Error::EmptyInput)?;
    let corpus = Corpus {
        feature_dim,
        queries: groups,
        provenance: Provenance::File,
    };
    Ok((corpus, stats))
}

/// Renders a corpus back to LETOR text.
///
/// Every feature index is written explicitly (including zeros) and every
/// line carries its query's bucket comment, so `parse(serialize(c))`
/// reproduces `c` exactly for corpora with positional doc ids. Floats use
/// Rust's shortest round-trip formatting.
pub fn serialize_letor(corpus: &Corpus) -> String {
    let mut out = String::new();
    for group in &corpus.queries {
        for doc in &group.docs {
            let _ = write!(out, "{} qid:{}", doc.label, group.query_id);
            for (i, v) in doc.features.iter().enumerate() {
                let _ = write!(out, " {}:{}", i + 1, v);
            }
            let _ = writeln!(out, " #bucket={}", group.bucket);
        }
    }
    out
}

fn malformed(line: usize, reason: &str) -> Error {
    Error::Malformed {
        line,
        reason: reason.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_basic_lines() {
        let text = "2 qid:1 1:0.5 2:1.0 #bucket=3\n\
                    0 qid:1 1:0.1 2:0.2 #bucket=3\n\
                    4 qid:2 1:1.5 2:-0.5\n";
        let corpus = parse_letor(text).unwrap();
        assert_eq!(corpus.feature_dim, 2);
        assert_eq!(corpus.queries.len(), 2);
        assert_eq!(corpus.queries[0].query_id, 1);
        assert_eq!(corpus.queries[0].bucket, 3);
        assert_eq!(corpus.queries[0].docs.len(), 2);
        assert_eq!(corpus.queries[0].docs[1].doc_id, 1);
        assert_eq!(corpus.queries[0].docs[1].label, 0);
        assert_eq!(corpus.queries[1].bucket, DEFAULT_BUCKET);
        assert_eq!(corpus.queries[1].docs[0].features, vec![1.5, -0.5]);
        corpus.validate().unwrap();
    }

    #[test]
    fn clamps_out_of_range_labels_with_warning() {
        let text = "7 qid:1 1:0.5\n3 qid:1 1:0.6\n";
        let (corpus, stats) = parse_letor_with_stats(text).unwrap();
        assert_eq!(corpus.queries[0].docs[0].label, MAX_LABEL);
        assert_eq!(corpus.queries[0].docs[1].label, 3);
        assert_eq!(stats.clamped_labels, 1);
    }

    #[test]
    fn rejects_negative_labels() {
        let err = parse_letor("-1 qid:1 1:0.5\n").unwrap_err();
        assert!(matches!(err, Error::Malformed { line: 1, .. }));
    }

    #[test]
    fn fills_gaps_with_zero() {
        let corpus = parse_letor("1 qid:9 1:2.0 3:4.0\n0 qid:9 1:0.0 2:1.0 3:0.5\n").unwrap();
        assert_eq!(corpus.queries[0].docs[0].features, vec![2.0, 0.0, 4.0]);
    }

    #[test]
    fn rejects_non_increasing_indices() {
        assert!(matches!(
            parse_letor("1 qid:1 2:0.5 2:0.6\n"),
            Err(Error::Malformed { line: 1, .. })
        ));
        assert!(matches!(
            parse_letor("1 qid:1 3:0.5 2:0.6\n"),
            Err(Error::Malformed { line: 1, .. })
        ));
        assert!(matches!(
            parse_letor("1 qid:1 0:0.5\n"),
            Err(Error::Malformed { line: 1, .. })
        ));
    }

    #[test]
    fn rejects_dimension_drift() {
        let err = parse_letor("1 qid:1 1:0.5 2:0.5\n1 qid:2 1:0.5\n").unwrap_err();
        assert!(matches!(
            err,
            Error::DimMismatch {
                expected: 2,
                got: 1
            }
        ));
    }

    #[test]
    fn rejects_conflicting_buckets() {
        let text = "1 qid:1 1:0.5 #bucket=2\n1 qid:1 1:0.6 #bucket=3\n";
        assert!(matches!(
            parse_letor(text),
            Err(Error::Malformed { line: 2, .. })
        ));
    }

    #[test]
    fn rejects_bad_tokens_with_line_numbers() {
        let err = parse_letor("1 qid:1 1:0.5\nx qid:2 1:0.5\n").unwrap_err();
        assert!(matches!(err, Error::Malformed { line: 2, .. }));
        assert!(matches!(
            parse_letor("1 quid:1 1:0.5\n"),
            Err(Error::Malformed { line: 1, .. })
        ));
        assert!(matches!(
            parse_letor("1 qid:1 1:abc\n"),
            Err(Error::Malformed { line: 1, .. })
        ));
        assert!(matches!(
            parse_letor("1 qid:1 1:inf\n"),
            Err(Error::Malformed { line: 1, .. })
        ));
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(matches!(parse_letor(""), Err(Error::EmptyInput)));
        assert!(matches!(
            parse_letor("# only a comment\n\n"),
            Err(Error::EmptyInput)
        ));
    }

    #[test]
    fn skips_blank_and_comment_lines() {
        let corpus = parse_letor("\n# header\n1 qid:1 1:0.5\n\n").unwrap();
        assert_eq!(corpus.num_docs(), 1);
    }

    #[test]
    fn handles_crlf_endings() {
        let corpus = parse_letor("1 qid:1 1:0.5\r\n2 qid:1 1:0.75\r\n").unwrap();
        assert_eq!(corpus.num_docs(), 2);
        assert_eq!(corpus.queries[0].docs[1].features, vec![0.75]);
    }

    #[test]
    fn serialize_then_parse_is_identity() {
        let text = "2 qid:1 1:0.5 2:1 #bucket=3\n0 qid:1 1:0.125 2:0 #bucket=3\n4 qid:7 1:1.5 2:-0.5 #bucket=9\n";
        let corpus = parse_letor(text).unwrap();
        let round = parse_letor(&serialize_letor(&corpus)).unwrap();
        assert_eq!(corpus, round);
    }

    #[test]
    fn interleaved_queries_group_by_first_appearance() {
        let text = "1 qid:5 1:0.1\n2 qid:8 1:0.2\n3 qid:5 1:0.3\n";
        let corpus = parse_letor(text).unwrap();
        assert_eq!(corpus.query_ids(), vec![5, 8]);
        assert_eq!(corpus.queries[0].docs.len(), 2);
        assert_eq!(corpus.queries[0].docs[1].doc_id, 1);
    }
}
