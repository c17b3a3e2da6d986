//! JSON file format for operators:
//! `{"layout": [{"label": str, "dim": int}, ...], "entries": [[re, im], ...]}`
//! with entries in row-major order. Numbers are written with 17 significant
//! digits so that every `f64` round-trips bit-exactly.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

use super::layout::{Factor, TensorLayout};
use super::operator::{CMatrix, DensityOperator, Operator};
use crate::error::{layout_err, Error, Result};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorFile {
    pub layout: Vec<Factor>,
    pub entries: Vec<[f64; 2]>,
}

#[derive(Serialize)]
struct OperatorFileOut<'a> {
    layout: &'a [Factor],
    entries: Vec<[Box<RawValue>; 2]>,
}

pub(crate) fn sci17(x: f64) -> Result<Box<RawValue>> {
    if !x.is_finite() {
        return Err(Error::Numeric(format!("cannot serialize non-finite value {x}")));
    }
    RawValue::from_string(format!("{x:.16e}")).map_err(|e| Error::Numeric(e.to_string()))
}

pub fn operator_to_json(op: &Operator) -> Result<String> {
    let m = op.matrix();
    let n = m.nrows();
    let mut entries = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let z = m[(i, j)];
            entries.push([sci17(z.re)?, sci17(z.im)?]);
        }
    }
    let out = OperatorFileOut {
        layout: op.layout().factors(),
        entries,
    };
    serde_json::to_string(&out).map_err(|e| Error::Numeric(e.to_string()))
}

/// Converts serde_json's line/column into a byte offset into `text`.
pub(crate) fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    let mut offset = 0;
    for (i, l) in text.split_inclusive('\n').enumerate() {
        if i + 1 == line {
            return (offset + column.saturating_sub(1)).min(text.len());
        }
        offset += l.len();
    }
    text.len()
}

pub(crate) fn parse_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        offset: byte_offset(text, e.line(), e.column()),
        message: e.to_string(),
    })
}

pub fn operator_from_json(text: &str) -> Result<Operator> {
    let file: OperatorFile = parse_json(text)?;
    let layout = TensorLayout::new(file.layout)?;
    let d = layout.dim();
    if file.entries.len() != d * d {
        return Err(layout_err(format!(
            "{} entries for a layout of dimension {d} (expected {})",
            file.entries.len(),
            d * d
        )));
    }
    let m = CMatrix::from_fn(d, d, |i, j| {
        let [re, im] = file.entries[i * d + j];
        Complex64::new(re, im)
    });
    Operator::new(layout, m)
}

pub fn density_from_json(text: &str) -> Result<DensityOperator> {
    DensityOperator::from_operator(operator_from_json(text)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parse_error_reports_offset() {
        let text = "{\"layout\": [{\"label\": \"A\", \"dim\": 2}],\n \"entries\": [[1, 0], x]}";
        match operator_from_json(text) {
            Err(Error::Parse { offset, .. }) => assert_eq!(&text[offset..offset + 1], "x"),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_fields_and_wrong_sizes_rejected() {
        assert!(operator_from_json(r#"{"layout":[{"label":"A","dim":1}],"entries":[[1,0]],"x":1}"#).is_err());
        assert!(operator_from_json(r#"{"layout":[{"label":"A","dim":2}],"entries":[[1,0]]}"#).is_err());
    }

    #[test]
    fn non_finite_cannot_be_written() {
        let op = Operator::from_real_diagonal(TensorLayout::single("A", 1).unwrap(), &[f64::INFINITY]).unwrap();
        assert!(matches!(operator_to_json(&op), Err(Error::Numeric(_))));
    }

    proptest! {
        #[test]
        fn json_round_trip_is_bit_exact(
            bits in proptest::collection::vec((any::<u64>(), any::<u64>()), 6 * 6)
        ) {
            let vals: Vec<f64> = bits
                .iter()
                .flat_map(|&(a, b)| [f64::from_bits(a), f64::from_bits(b)])
                .map(|x| if x.is_finite() { x } else { 0.5 })
                .collect();
            let layout = TensorLayout::from_pairs(&[("A", 2), ("B", 3)]).unwrap();
            let m = CMatrix::from_fn(6, 6, |i, j| {
                let k = 2 * (i * 6 + j);
                Complex64::new(vals[k], vals[k + 1])
            });
            let op = Operator::new(layout, m).unwrap();
            let text = operator_to_json(&op).unwrap();
            let back = operator_from_json(&text).unwrap();
            prop_assert_eq!(back.layout(), op.layout());
            for (a, b) in back.matrix().iter().zip(op.matrix().iter()) {
                prop_assert_eq!(a.re.to_bits(), b.re.to_bits());
                prop_assert_eq!(a.im.to_bits(), b.im.to_bits());
            }
        }
    }
}
