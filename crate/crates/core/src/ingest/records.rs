//! Line-delimited dataset files.
//!
//! Line 1 is a JSON header (format tag, name, split, vocabulary, question
//! types and, for generated data, the generating config). Every following
//! line is one JSON-encoded instance.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::dataset::Dataset;
use super::synthetic::SyntheticConfig;
use crate::domain::{AnswerVocabulary, Instance, QuestionTypeTable, SplitTag};
use crate::error::{Error, Result};

pub const DATASET_FORMAT: &str = "priorshift-dataset";
pub const DATASET_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Header {
    format: String,
    version: u32,
    name: String,
    split: SplitTag,
    vocabulary: AnswerVocabulary,
    question_types: QuestionTypeTable,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    synthetic: Option<SyntheticConfig>,
}

pub fn write_dataset<W: Write>(mut w: W, data: &Dataset, config: Option<&SyntheticConfig>) -> std::io::Result<()> {
    let header = Header {
        format: DATASET_FORMAT.into(),
        version: DATASET_VERSION,
        name: data.name.clone(),
        split: data.tag,
        vocabulary: data.vocabulary.clone(),
        question_types: data.type_table.clone(),
        synthetic: config.cloned(),
    };
    serde_json::to_writer(&mut w, &header)?;
    w.write_all(b"\n")?;
    for inst in &data.instances {
        serde_json::to_writer(&mut w, inst)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

pub fn save_dataset(path: &Path, data: &Dataset, config: Option<&SyntheticConfig>) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_dataset(BufWriter::new(file), data, config).map_err(|e| Error::io(path, e))
}

pub fn read_dataset<R: BufRead>(reader: R, path: &Path) -> Result<(Dataset, Option<SyntheticConfig>)> {
    let mut offset = 0u64;
    let mut header: Option<Header> = None;
    let mut instances = Vec::new();
    for line in reader.split(b'\n') {
        let line = line.map_err(|e| Error::io(path, e))?;
        let at = offset;
        offset += line.len() as u64 + 1;
        if line.iter().all(u8::is_ascii_whitespace) {
            continue;
        }
        let parse_err = |e: serde_json::Error| Error::Parse {
            path: path.to_path_buf(),
            offset: at,
            message: e.to_string(),
        };
        match header {
            None => {
                let h: Header = serde_json::from_slice(&line).map_err(parse_err)?;
                if h.format != DATASET_FORMAT || h.version != DATASET_VERSION {
                    return Err(Error::Parse {
                        path: path.to_path_buf(),
                        offset: 0,
                        message: format!("unsupported dataset format {:?} v{}", h.format, h.version),
                    });
                }
                header = Some(h);
            }
            Some(_) => instances.push(serde_json::from_slice::<Instance>(&line).map_err(parse_err)?),
        }
    }
    let h = header.ok_or_else(|| Error::Parse {
        path: path.to_path_buf(),
        offset: 0,
        message: "missing dataset header".into(),
    })?;
    let data = Dataset::new(h.name, h.split, h.vocabulary, h.question_types, instances)?;
    Ok((data, h.synthetic))
}

pub fn load_dataset(path: &Path) -> Result<(Dataset, Option<SyntheticConfig>)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_dataset(BufReader::new(file), path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::synthetic::{generate_synthetic, BiasProfile};

    #[test]
    fn synthetic_round_trip_is_exact() {
        let cfg = SyntheticConfig {
            n_types: 4,
            n_train: 50,
            n_test: 20,
            bias_profile: BiasProfile::Skewed { alpha: 0.7 },
            seed: 3,
            ..Default::default()
        };
        let (train, _) = generate_synthetic(&cfg).unwrap();
        let mut buf = Vec::new();
        write_dataset(&mut buf, &train, Some(&cfg)).unwrap();
        let (back, cfg_back) = read_dataset(buf.as_slice(), Path::new("mem")).unwrap();
        assert_eq!(back, train);
        assert_eq!(cfg_back, Some(cfg));
    }

    #[test]
    fn missing_header_and_bad_lines() {
        assert!(matches!(read_dataset(&b""[..], Path::new("x")), Err(Error::Parse { .. })));
        let (train, _) = generate_synthetic(&SyntheticConfig { n_train: 3, n_test: 1, ..Default::default() }).unwrap();
        let mut buf = Vec::new();
        write_dataset(&mut buf, &train, None).unwrap();
        let header_len = buf.iter().position(|&b| b == b'\n').unwrap() as u64 + 1;
        buf.extend_from_slice(b"{not json}\n");
        match read_dataset(buf.as_slice(), Path::new("x")) {
            Err(Error::Parse { offset, .. }) => assert!(offset > header_len),
            other => panic!("{other:?}"),
        }
    }
}
