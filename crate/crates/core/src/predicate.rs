//! Byte-level branch predicates for fixture programs. A branch outcome at
//! runtime is its predicate applied to the input bytes; bytes past the end
//! of the input read as 0.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Wire form: `{"byte": offset, "op": "eq|lt|ge|range", "val": ...}`.
/// `val` is a single byte for `lt`/`ge`, `[lo, hi]` (inclusive) for
/// `range`, and either a byte or an array of bytes (a multi-byte magic
/// value starting at `byte`) for `eq`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PredDoc {
    pub byte: usize,
    pub op: String,
    pub val: serde_json::Value,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PredError {
    #[error("unknown predicate op {0:?}")]
    UnknownOp(String),
    #[error("bad predicate value for op {0:?}")]
    BadValue(String),
}

/// A decoded branch predicate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BytePred {
    /// All of `bytes` must match starting at `offset`.
    Eq { offset: usize, bytes: Vec<u8> },
    /// `input[offset] < val`.
    Lt { offset: usize, val: u8 },
    /// `input[offset] >= val`.
    Ge { offset: usize, val: u8 },
    /// `lo <= input[offset] <= hi`.
    Range { offset: usize, lo: u8, hi: u8 },
}

fn byte_at(input: &[u8], offset: usize) -> u8 {
    input.get(offset).copied().unwrap_or(0)
}

fn val_as_u8(v: &serde_json::Value) -> Option<u8> {
    v.as_u64().and_then(|x| u8::try_from(x).ok())
}

impl BytePred {
    pub fn from_doc(doc: &PredDoc) -> Result<Self, PredError> {
        let bad = || PredError::BadValue(doc.op.clone());
        match doc.op.as_str() {
            "eq" => {
                if let Some(v) = val_as_u8(&doc.val) {
                    Ok(BytePred::Eq { offset: doc.byte, bytes: vec![v] })
                } else {
                    let arr = doc.val.as_array().ok_or_else(bad)?;
                    let bytes: Option<Vec<u8>> = arr.iter().map(val_as_u8).collect();
                    let bytes = bytes.ok_or_else(bad)?;
                    if bytes.is_empty() {
                        return Err(bad());
                    }
                    Ok(BytePred::Eq { offset: doc.byte, bytes })
                }
            }
            "lt" => Ok(BytePred::Lt { offset: doc.byte, val: val_as_u8(&doc.val).ok_or_else(bad)? }),
            "ge" => Ok(BytePred::Ge { offset: doc.byte, val: val_as_u8(&doc.val).ok_or_else(bad)? }),
            "range" => {
                let arr = doc.val.as_array().ok_or_else(bad)?;
                if arr.len() != 2 {
                    return Err(bad());
                }
                let lo = val_as_u8(&arr[0]).ok_or_else(bad)?;
                let hi = val_as_u8(&arr[1]).ok_or_else(bad)?;
                if lo > hi {
                    return Err(bad());
                }
                Ok(BytePred::Range { offset: doc.byte, lo, hi })
            }
            other => Err(PredError::UnknownOp(other.to_owned())),
        }
    }

    pub fn to_doc(&self) -> PredDoc {
        match self {
            BytePred::Eq { offset, bytes } => PredDoc {
                byte: *offset,
                op: "eq".into(),
                val: if bytes.len() == 1 {
                    serde_json::json!(bytes[0])
                } else {
                    serde_json::json!(bytes)
                },
            },
            BytePred::Lt { offset, val } => {
                PredDoc { byte: *offset, op: "lt".into(), val: serde_json::json!(val) }
            }
            BytePred::Ge { offset, val } => {
                PredDoc { byte: *offset, op: "ge".into(), val: serde_json::json!(val) }
            }
            BytePred::Range { offset, lo, hi } => {
                PredDoc { byte: *offset, op: "range".into(), val: serde_json::json!([lo, hi]) }
            }
        }
    }

    pub fn eval(&self, input: &[u8]) -> bool {
        match self {
            BytePred::Eq { offset, bytes } => bytes
                .iter()
                .enumerate()
                .all(|(i, &b)| byte_at(input, offset + i) == b),
            BytePred::Lt { offset, val } => byte_at(input, *offset) < *val,
            BytePred::Ge { offset, val } => byte_at(input, *offset) >= *val,
            BytePred::Range { offset, lo, hi } => {
                let b = byte_at(input, *offset);
                *lo <= b && b <= *hi
            }
        }
    }

    /// One past the highest byte offset this predicate reads.
    pub fn end_offset(&self) -> usize {
        match self {
            BytePred::Eq { offset, bytes } => offset + bytes.len(),
            BytePred::Lt { offset, .. }
            | BytePred::Ge { offset, .. }
            | BytePred::Range { offset, .. } => offset + 1,
        }
    }

    /// Patches `buf` so the predicate holds, keeping already-satisfying
    /// bytes. Returns false when no single-byte assignment can satisfy it.
    pub fn force_true(&self, buf: &mut Vec<u8>) -> bool {
        grow_to(buf, self.end_offset());
        match self {
            BytePred::Eq { offset, bytes } => {
                buf[*offset..offset + bytes.len()].copy_from_slice(bytes);
                true
            }
            BytePred::Lt { offset, val } => {
                if *val == 0 {
                    return false;
                }
                if buf[*offset] >= *val {
                    buf[*offset] = val - 1;
                }
                true
            }
            BytePred::Ge { offset, val } => {
                if buf[*offset] < *val {
                    buf[*offset] = *val;
                }
                true
            }
            BytePred::Range { offset, lo, hi } => {
                if buf[*offset] < *lo || buf[*offset] > *hi {
                    buf[*offset] = *lo;
                }
                true
            }
        }
    }

    /// Patches `buf` so the predicate fails. Returns false when the
    /// predicate is a tautology over single bytes.
    pub fn force_false(&self, buf: &mut Vec<u8>) -> bool {
        grow_to(buf, self.end_offset());
        if !self.eval(buf) {
            return true;
        }
        match self {
            BytePred::Eq { offset, bytes } => {
                buf[*offset] = bytes[0].wrapping_add(1);
                true
            }
            BytePred::Lt { offset, val } => {
                // val == 0 never evaluates true, unreachable here.
                buf[*offset] = *val;
                true
            }
            BytePred::Ge { offset, val } => {
                if *val == 0 {
                    return false;
                }
                buf[*offset] = val - 1;
                true
            }
            BytePred::Range { offset, lo, hi } => {
                if *hi < 255 {
                    buf[*offset] = hi + 1;
                } else if *lo > 0 {
                    buf[*offset] = lo - 1;
                } else {
                    return false;
                }
                true
            }
        }
    }
}

fn grow_to(buf: &mut Vec<u8>, len: usize) {
    if buf.len() < len {
        buf.resize(len, 0);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(byte: usize, op: &str, val: serde_json::Value) -> PredDoc {
        PredDoc { byte, op: op.into(), val }
    }

    #[test]
    fn parses_all_ops() {
        assert_eq!(
            BytePred::from_doc(&doc(0, "eq", serde_json::json!(7))).unwrap(),
            BytePred::Eq { offset: 0, bytes: vec![7] }
        );
        assert_eq!(
            BytePred::from_doc(&doc(1, "eq", serde_json::json!([1, 2, 3]))).unwrap(),
            BytePred::Eq { offset: 1, bytes: vec![1, 2, 3] }
        );
        assert_eq!(
            BytePred::from_doc(&doc(2, "range", serde_json::json!([16, 127]))).unwrap(),
            BytePred::Range { offset: 2, lo: 16, hi: 127 }
        );
        assert!(BytePred::from_doc(&doc(0, "gt", serde_json::json!(1))).is_err());
        assert!(BytePred::from_doc(&doc(0, "range", serde_json::json!([9, 3]))).is_err());
    }

    #[test]
    fn eval_reads_missing_bytes_as_zero() {
        let p = BytePred::Lt { offset: 9, val: 1 };
        assert!(p.eval(&[]));
        let q = BytePred::Ge { offset: 9, val: 1 };
        assert!(!q.eval(&[]));
    }

    #[test]
    fn multi_byte_eq() {
        let p = BytePred::Eq { offset: 1, bytes: vec![0xDE, 0xAD] };
        assert!(p.eval(&[0, 0xDE, 0xAD]));
        assert!(!p.eval(&[0, 0xDE, 0xAC]));
    }

    #[test]
    fn force_true_keeps_satisfying_bytes() {
        let p = BytePred::Range { offset: 0, lo: 16, hi: 127 };
        let mut buf = vec![40u8];
        assert!(p.force_true(&mut buf));
        assert_eq!(buf, vec![40]);
        let mut buf2 = vec![200u8];
        assert!(p.force_true(&mut buf2));
        assert_eq!(buf2, vec![16]);
    }

    #[test]
    fn force_false_flips_a_magic_byte() {
        let p = BytePred::Eq { offset: 0, bytes: vec![0xDE, 0xAD] };
        let mut buf = vec![0xDE, 0xAD];
        assert!(p.force_false(&mut buf));
        assert!(!p.eval(&buf));
    }

    #[test]
    fn impossible_patches_report_false() {
        let p = BytePred::Lt { offset: 0, val: 0 };
        assert!(!p.force_true(&mut vec![5]));
        let q = BytePred::Range { offset: 0, lo: 0, hi: 255 };
        assert!(!q.force_false(&mut vec![5]));
    }

    #[test]
    fn roundtrips_through_doc() {
        for p in [
            BytePred::Eq { offset: 3, bytes: vec![9] },
            BytePred::Eq { offset: 3, bytes: vec![1, 2] },
            BytePred::Lt { offset: 0, val: 128 },
            BytePred::Ge { offset: 7, val: 240 },
            BytePred::Range { offset: 2, lo: 16, hi: 127 },
        ] {
            assert_eq!(BytePred::from_doc(&p.to_doc()).unwrap(), p);
        }
    }
}
