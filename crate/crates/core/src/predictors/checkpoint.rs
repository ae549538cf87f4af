//! Model files: a text header followed by a little-endian f64 block
//! holding the weights (input-major) and then the biases.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::model::{Hyper, LinearModel};
use crate::error::{Error, Result};

const HEADER: &str = "# priorshift linear-model v1";

pub fn write_model<W: Write>(mut w: W, model: &LinearModel) -> std::io::Result<()> {
    let h = &model.hyper;
    writeln!(w, "{HEADER}")?;
    writeln!(w, "n_answers\t{}", model.n_answers)?;
    writeln!(w, "question_dim\t{}", model.question_dim)?;
    writeln!(w, "feature_dim\t{}", model.feature_dim)?;
    writeln!(w, "learning_rate\t{}", h.learning_rate)?;
    writeln!(w, "epochs\t{}", h.epochs)?;
    writeln!(w, "batch_size\t{}", h.batch_size)?;
    writeln!(w, "lambda\t{}", h.lambda)?;
    writeln!(w, "seed\t{}", h.seed)?;
    writeln!(w, "pretrain_epochs\t{}", h.pretrain_epochs)?;
    let trace: Vec<String> = model.loss_trace.iter().map(f64::to_string).collect();
    writeln!(w, "loss_trace\t{}", trace.join(","))?;
    writeln!(w, "weights")?;
    for x in model.weights.iter().chain(&model.bias) {
        w.write_all(&x.to_le_bytes())?;
    }
    w.flush()
}

pub fn save_model(path: &Path, model: &LinearModel) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_model(BufWriter::new(file), model).map_err(|e| Error::io(path, e))
}

fn parse_err(path: &Path, offset: u64, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        offset,
        message: message.into(),
    }
}

pub fn read_model<R: BufRead>(mut r: R, path: &Path) -> Result<LinearModel> {
    let mut offset = 0u64;
    let next_line = |r: &mut R, offset: &mut u64| -> Result<(u64, String)> {
        let mut line = String::new();
        let n = r.read_line(&mut line).map_err(|e| Error::io(path, e))?;
        if n == 0 {
            return Err(parse_err(path, *offset, "unexpected end of header"));
        }
        let at = *offset;
        *offset += n as u64;
        Ok((at, line.trim_end_matches('\n').to_string()))
    };
    let (at, first) = next_line(&mut r, &mut offset)?;
    if first != HEADER {
        return Err(parse_err(path, at, "not a priorshift model file"));
    }
    let mut field = |name: &str, r: &mut R| -> Result<(u64, String)> {
        let (at, line) = next_line(r, &mut offset)?;
        match line.split_once('\t') {
            Some((k, v)) if k == name => Ok((at, v.to_string())),
            _ => Err(parse_err(path, at, format!("expected field {name:?}"))),
        }
    };
    fn num<T: std::str::FromStr>(path: &Path, (at, v): (u64, String)) -> Result<T> {
        v.parse().map_err(|_| parse_err(path, at, format!("bad value {v:?}")))
    }
    let n_answers: usize = num(path, field("n_answers", &mut r)?)?;
    let question_dim: usize = num(path, field("question_dim", &mut r)?)?;
    let feature_dim: usize = num(path, field("feature_dim", &mut r)?)?;
    let hyper = Hyper {
        learning_rate: num(path, field("learning_rate", &mut r)?)?,
        epochs: num(path, field("epochs", &mut r)?)?,
        batch_size: num(path, field("batch_size", &mut r)?)?,
        lambda: num(path, field("lambda", &mut r)?)?,
        seed: num(path, field("seed", &mut r)?)?,
        pretrain_epochs: num(path, field("pretrain_epochs", &mut r)?)?,
        question_dim,
    };
    let (at, trace) = field("loss_trace", &mut r)?;
    let loss_trace = if trace.is_empty() {
        Vec::new()
    } else {
        trace
            .split(',')
            .map(|s| s.parse::<f64>().map_err(|_| parse_err(path, at, format!("bad loss value {s:?}"))))
            .collect::<Result<Vec<_>>>()?
    };
    let (at, marker) = next_line(&mut r, &mut offset)?;
    if marker != "weights" {
        return Err(parse_err(path, at, "expected the weights marker"));
    }
    let n_weights = (question_dim + feature_dim)
        .checked_mul(n_answers)
        .ok_or_else(|| parse_err(path, at, "dimensions overflow"))?;
    let mut values = Vec::with_capacity(n_weights + n_answers);
    let mut buf = [0u8; 8];
    for _ in 0..n_weights + n_answers {
        r.read_exact(&mut buf)
            .map_err(|_| parse_err(path, offset, "weight block is truncated"))?;
        offset += 8;
        values.push(f64::from_le_bytes(buf));
    }
    if r.read(&mut buf).map_err(|e| Error::io(path, e))? != 0 {
        return Err(parse_err(path, offset, "trailing bytes after the weight block"));
    }
    let bias = values.split_off(n_weights);
    Ok(LinearModel {
        n_answers,
        question_dim,
        feature_dim,
        weights: values,
        bias,
        hyper,
        loss_trace,
    })
}

pub fn load_model(path: &Path) -> Result<LinearModel> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_model(BufReader::new(file), path)
}
