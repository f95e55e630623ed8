//! Readers and writers for the JSON file formats.
//!
//! Forms are coefficient lists in descending powers of `u`. Scalars of a
//! prime field are integers; scalars of `F_{p^k}` are lists of `k` residues in
//! the power basis of the modulus.

use std::path::Path;

use serde_json::{json, Value};

use quadrifold::fibration::{FibrationSpec, UPPER};
use quadrifold::gfpoly::{BinaryForm, Extension, Fe, Field, FieldSpec, ProjPoint1};
use quadrifold::lines::LineInFiber;
use quadrifold::sections::{PointConstraint, Section};

use crate::error::CliError;

pub struct Source {
    name: String,
    value: Value,
}

impl Source {
    pub fn read(path: &Path) -> Result<Source, CliError> {
        let name = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|e| CliError::malformed(&name, "<file>", e.to_string()))?;
        Self::parse(&name, &text)
    }

    pub fn parse(name: &str, text: &str) -> Result<Source, CliError> {
        let value =
            serde_json::from_str(text).map_err(|e| CliError::malformed(name, format!("line {} column {}", e.line(), e.column()), e.to_string()))?;
        Ok(Source { name: name.to_string(), value })
    }

    fn err(&self, field: &str, message: impl Into<String>) -> CliError {
        CliError::malformed(&self.name, field, message)
    }

    fn get<'a>(&self, v: &'a Value, key: &str, path: &str) -> Result<&'a Value, CliError> {
        v.get(key).ok_or_else(|| self.err(path, "missing"))
    }

    fn int(&self, v: &Value, path: &str) -> Result<i64, CliError> {
        v.as_i64().ok_or_else(|| self.err(path, "expected an integer"))
    }

    fn array<'a>(&self, v: &'a Value, path: &str) -> Result<&'a Vec<Value>, CliError> {
        v.as_array().ok_or_else(|| self.err(path, "expected a list"))
    }

    fn scalar(&self, field: &Field, v: &Value, path: &str) -> Result<Fe, CliError> {
        match v {
            Value::Number(_) => Ok(field.from_i64(self.int(v, path)?)),
            Value::Array(items) => {
                let residues = items
                    .iter()
                    .enumerate()
                    .map(|(i, r)| {
                        let p = format!("{path}[{i}]");
                        r.as_u64().ok_or_else(|| self.err(&p, "expected a nonnegative residue"))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                field.from_residues(&residues).map_err(|e| self.err(path, e.to_string()))
            }
            _ => Err(self.err(path, "expected a scalar (integer or residue list)")),
        }
    }

    fn vector(&self, field: &Field, v: &Value, len: usize, path: &str) -> Result<Vec<Fe>, CliError> {
        let items = self.array(v, path)?;
        if items.len() != len {
            return Err(self.err(path, format!("expected {len} entries, got {}", items.len())));
        }
        items.iter().enumerate().map(|(i, x)| self.scalar(field, x, &format!("{path}[{i}]"))).collect()
    }

    /// `{"p", "k", "d", "e", "gram", "modulus"?}`.
    pub fn fibration(&self) -> Result<FibrationSpec, CliError> {
        let root = &self.value;
        if !root.is_object() {
            return Err(self.err("<root>", "expected an object"));
        }
        let p = self.int(self.get(root, "p", "p")?, "p")?;
        let k = match root.get("k") {
            Some(v) => self.int(v, "k")?,
            None => 1,
        };
        if p < 3 {
            return Err(self.err("p", "expected an odd prime"));
        }
        if !(1..=48).contains(&k) {
            return Err(self.err("k", "expected an extension degree between 1 and 48"));
        }
        let spec = match root.get("modulus") {
            Some(m) if k > 1 => {
                let coeffs = self
                    .array(m, "modulus")?
                    .iter()
                    .enumerate()
                    .map(|(i, c)| c.as_u64().ok_or_else(|| self.err(&format!("modulus[{i}]"), "expected a residue")))
                    .collect::<Result<Vec<_>, _>>()?;
                if coeffs.len() != k as usize {
                    return Err(self.err("modulus", format!("expected {k} coefficients c_0..c_{}", k - 1)));
                }
                FieldSpec::with_modulus(p as u64, coeffs)
            }
            Some(_) => return Err(self.err("modulus", "only allowed when k > 1")),
            None => FieldSpec::new(p as u64, k as u32),
        }
        .map_err(|e| self.err(if root.get("modulus").is_some() { "modulus" } else { "p" }, e.to_string()))?;
        let field = Field::from_spec(spec);

        let d_items = self.array(self.get(root, "d", "d")?, "d")?;
        if d_items.len() != 4 {
            return Err(self.err("d", "expected four twists"));
        }
        let mut d = [0i64; 4];
        for (i, x) in d_items.iter().enumerate() {
            d[i] = self.int(x, &format!("d[{i}]"))?;
        }
        let e = self.int(self.get(root, "e", "e")?, "e")?;
        if !(0..=1).contains(&e) {
            return Err(self.err("e", "expected 0 or 1"));
        }
        let gram = self.array(self.get(root, "gram", "gram")?, "gram")?;
        if gram.len() != UPPER.len() {
            return Err(self.err("gram", format!("expected {} upper-triangular entries, got {}", UPPER.len(), gram.len())));
        }
        let mut upper = Vec::with_capacity(UPPER.len());
        for (n, (&(i, j), entry)) in UPPER.iter().zip(gram).enumerate() {
            let path = format!("gram[{n}]");
            let deg = d[i] + d[j] + e;
            let coeffs = self.array(entry, &path)?;
            let values = coeffs.iter().enumerate().map(|(c, x)| self.scalar(&field, x, &format!("{path}[{c}]"))).collect::<Result<Vec<_>, _>>()?;
            let all_zero = values.iter().all(|c| c.is_zero());
            if !all_zero && values.len() as i64 != deg + 1 {
                return Err(self.err(
                    &path,
                    format!("entry ({}, {}) must have degree d_{} + d_{} + e = {deg}, i.e. {} coefficients", i + 1, j + 1, i + 1, j + 1, deg + 1),
                ));
            }
            upper.push(if all_zero { BinaryForm::zero(&field) } else { BinaryForm::new(&field, values) });
        }
        FibrationSpec::from_upper(&field, d, e, upper).map_err(|err| self.err("gram", err.to_string()))
    }

    /// A list of `{"b": [u, v], "x": [x1, x2, x3, x4], "ext"?: 1 | 2}`.
    pub fn constraints(&self, base: &Field) -> Result<Vec<PointConstraint>, CliError> {
        let items = self.array(&self.value, "<root>")?;
        items
            .iter()
            .enumerate()
            .map(|(n, item)| {
                let path = format!("[{n}]");
                let ext_degree = match item.get("ext") {
                    Some(v) => self.int(v, &format!("{path}.ext"))?,
                    None => 1,
                };
                if !(1..=2).contains(&ext_degree) {
                    return Err(self.err(&format!("{path}.ext"), "expected 1 or 2"));
                }
                let ext = Extension::new(base, ext_degree as u32).map_err(|e| self.err(&format!("{path}.ext"), e.to_string()))?;
                let field = ext.field();
                let b = self.vector(field, self.get(item, "b", &format!("{path}.b"))?, 2, &format!("{path}.b"))?;
                let b = ProjPoint1::new(field, b[0], b[1]).map_err(|e| self.err(&format!("{path}.b"), e.to_string()))?;
                let x = self.vector(field, self.get(item, "x", &format!("{path}.x"))?, 4, &format!("{path}.x"))?;
                Ok(PointConstraint { ext_degree: ext_degree as u32, b, x: [x[0], x[1], x[2], x[3]] })
            })
            .collect()
    }

    /// `{"basis": [[..4 scalars..], [..4 scalars..]]}`: a line in the fiber over `b`.
    pub fn line(&self, field: &Field, b: ProjPoint1) -> Result<LineInFiber, CliError> {
        let basis = self.array(self.get(&self.value, "basis", "basis")?, "basis")?;
        if basis.len() != 2 {
            return Err(self.err("basis", "expected two spanning vectors"));
        }
        let a = self.vector(field, &basis[0], 4, "basis[0]")?;
        let c = self.vector(field, &basis[1], 4, "basis[1]")?;
        LineInFiber::from_vectors(field, b, 1, &a, &c).ok_or_else(|| self.err("basis", "the two vectors are dependent"))
    }
}

/// `U:V` with integer (or residue-list) coordinates.
pub fn parse_point(field: &Field, text: &str) -> Result<ProjPoint1, CliError> {
    let bad = || CliError::Usage(format!("--p expects U:V, got {text:?}"));
    let (u, v) = text.split_once(':').ok_or_else(bad)?;
    let coord = |s: &str| -> Result<Fe, CliError> {
        let s = s.trim();
        if let Some(inner) = s.strip_prefix('(').and_then(|x| x.strip_suffix(')')) {
            let residues = inner.split(',').map(|r| r.trim().parse::<u64>().map_err(|_| bad())).collect::<Result<Vec<_>, _>>()?;
            field.from_residues(&residues).map_err(|e| CliError::Usage(e.to_string()))
        } else {
            s.parse::<i64>().map(|n| field.from_i64(n)).map_err(|_| bad())
        }
    };
    ProjPoint1::new(field, coord(u)?, coord(v)?).map_err(|e| CliError::Usage(e.to_string()))
}

pub fn scalar_json(field: &Field, a: Fe) -> Value {
    if field.degree() == 1 {
        json!(a.raw())
    } else {
        json!(field.residues(a))
    }
}

pub fn vector_json(field: &Field, x: &[Fe]) -> Value {
    Value::Array(x.iter().map(|&c| scalar_json(field, c)).collect())
}

pub fn form_json(form: &BinaryForm) -> Value {
    vector_json(form.field(), form.coeffs())
}

pub fn field_tag(field: &Field) -> String {
    format!("F{}", field.order())
}

/// A fibration in the input file format, so reports can be fed back in.
pub fn fibration_json(fib: &FibrationSpec) -> Value {
    let field = fib.field();
    let d = fib.d();
    let gram: Vec<Value> = UPPER
        .iter()
        .map(|&(i, j)| {
            let form = fib.entry(i, j);
            let deg = d[i] + d[j] + fib.e();
            if form.is_zero() {
                let zeros = vec![Fe::ZERO; usize::try_from(deg + 1).unwrap_or(0)];
                vector_json(field, &zeros)
            } else {
                form_json(form)
            }
        })
        .collect();
    let mut out = json!({ "p": field.characteristic(), "k": field.degree() });
    if field.degree() > 1 {
        out["modulus"] = json!(field.spec().modulus());
    }
    out["d"] = json!(d);
    out["e"] = json!(fib.e());
    out["gram"] = Value::Array(gram);
    out
}

pub fn section_json(sec: &Section) -> Value {
    json!({
        "f": sec.f(),
        "h": sec.height(),
        "s": sec.coefficient_lists().iter().map(|c| vector_json(sec.field(), c)).collect::<Vec<_>>(),
        "zero_component": sec.has_zero_component(),
    })
}

pub fn line_json(field: &Field, line: &LineInFiber) -> Value {
    json!({
        "field": field_tag(field),
        "degree": line.degree(),
        "basis": line.basis().iter().map(|r| vector_json(field, r)).collect::<Vec<_>>(),
    })
}
