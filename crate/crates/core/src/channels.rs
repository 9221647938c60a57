//! Channels in Kraus form, their duals and tensor products, restrictions to
//! subspaces, a catalog of named channels and a JSON loader.

use std::collections::BTreeMap;
use std::path::Path;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::qcore::{
    kron, max_abs, weyl, ComplexMatrix, ComplexVector, DensityMatrix, HermitianOperator, Projector, PureState, C64,
};
use crate::random::{random_isometry, rng_for};

const COMPLETENESS_TOL: f64 = 1e-10;
const BISTOCHASTIC_TOL: f64 = 1e-8;

/// Completely positive trace-preserving map `ρ ↦ Σ K_i ρ K_i†`.
#[derive(Clone, Debug)]
pub struct Channel {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<ComplexMatrix>,
}

impl Channel {
    /// Validates shapes, finiteness and `Σ K_i†K_i = I`.
    pub fn new(dim_in: usize, dim_out: usize, kraus: Vec<ComplexMatrix>) -> Result<Self> {
        if dim_in == 0 || dim_out == 0 {
            return Err(Error::InvalidChannel("dimensions must be positive".into()));
        }
        if kraus.is_empty() {
            return Err(Error::InvalidChannel("at least one Kraus operator is required".into()));
        }
        let mut sum = ComplexMatrix::zeros(dim_in, dim_in);
        for (i, k) in kraus.iter().enumerate() {
            if k.nrows() != dim_out || k.ncols() != dim_in {
                return Err(Error::InvalidChannel(format!(
                    "kraus[{i}] has shape {}x{}, expected {dim_out}x{dim_in}",
                    k.nrows(),
                    k.ncols()
                )));
            }
            if k.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::InvalidChannel(format!("kraus[{i}] has non-finite entries")));
            }
            sum += k.adjoint() * k;
        }
        let residual = max_abs(&(sum - ComplexMatrix::identity(dim_in, dim_in)));
        if residual > COMPLETENESS_TOL {
            return Err(Error::InvalidChannel(format!(
                "Kraus operators are not trace preserving (residual {residual:.3e})"
            )));
        }
        Ok(Self { dim_in, dim_out, kraus })
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim() != self.dim_in {
            return Err(Error::DimensionMismatch {
                expected: self.dim_in,
                got: rho.dim(),
            });
        }
        Ok(DensityMatrix::from_computed(&self.apply_matrix(rho.matrix())))
    }

    /// `Φ(|ψ⟩⟨ψ|)`.
    pub fn apply_pure(&self, psi: &PureState) -> Result<DensityMatrix> {
        if psi.dim() != self.dim_in {
            return Err(Error::DimensionMismatch {
                expected: self.dim_in,
                got: psi.dim(),
            });
        }
        Ok(DensityMatrix::from_computed(&self.apply_vector(psi.amplitudes())))
    }

    /// `Σ (K_i v)(K_i v)†` for an arbitrary vector.
    pub(crate) fn apply_vector(&self, v: &ComplexVector) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.dim_out, self.dim_out);
        for k in &self.kraus {
            let w = k * v;
            out += &w * w.adjoint();
        }
        out
    }

    pub(crate) fn apply_matrix(&self, m: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.dim_out, self.dim_out);
        for k in &self.kraus {
            out += k * m * k.adjoint();
        }
        out
    }

    /// Dual map `A ↦ Σ K_i† A K_i`.
    pub fn dual_apply(&self, a: &HermitianOperator) -> Result<HermitianOperator> {
        if a.dim() != self.dim_out {
            return Err(Error::DimensionMismatch {
                expected: self.dim_out,
                got: a.dim(),
            });
        }
        Ok(HermitianOperator::from_hermitian_part(&self.dual_matrix(a.matrix())))
    }

    pub(crate) fn dual_matrix(&self, a: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.dim_in, self.dim_in);
        for k in &self.kraus {
            out += k.adjoint() * a * k;
        }
        out
    }

    /// Choi matrix `Σ_ij |i⟩⟨j| ⊗ Φ(|i⟩⟨j|)`.
    pub fn choi(&self) -> ComplexMatrix {
        let (d, e) = (self.dim_in, self.dim_out);
        let mut out = ComplexMatrix::zeros(d * e, d * e);
        for i in 0..d {
            for j in 0..d {
                let mut unit = ComplexMatrix::zeros(d, d);
                unit[(i, j)] = C64::new(1.0, 0.0);
                let img = self.apply_matrix(&unit);
                out.view_mut((i * e, j * e), (e, e)).copy_from(&img);
            }
        }
        out
    }

    /// Extensional equality: agreement on all matrix units `|i⟩⟨j|`.
    pub fn equivalent(&self, other: &Channel, tol: f64) -> bool {
        self.dim_in == other.dim_in
            && self.dim_out == other.dim_out
            && max_abs(&(self.choi() - other.choi())) <= tol
    }

    /// `ρ ↦ Φ(V ρ V†)` for an isometry `V: C^r → C^{dim_in}`.
    pub fn precompose_isometry(&self, v: &ComplexMatrix) -> Result<Channel> {
        if v.nrows() != self.dim_in {
            return Err(Error::DimensionMismatch {
                expected: self.dim_in,
                got: v.nrows(),
            });
        }
        let kraus = self.kraus.iter().map(|k| k * v).collect();
        Channel::new(v.ncols(), self.dim_out, kraus)
    }

    /// Subchannel on the range of `subspace`, parameterized by the
    /// projector's orthonormal eigenbasis.
    pub fn restrict(&self, subspace: &Projector) -> Result<Channel> {
        if subspace.dim() != self.dim_in {
            return Err(Error::DimensionMismatch {
                expected: self.dim_in,
                got: subspace.dim(),
            });
        }
        if subspace.rank() == 0 {
            return Err(Error::InvalidInput("cannot restrict to a rank-0 subspace".into()));
        }
        self.precompose_isometry(&subspace.isometry())
    }

    pub fn is_bistochastic(&self) -> bool {
        let mixed = DensityMatrix::maximally_mixed(self.dim_in);
        let img = self.apply_matrix(mixed.matrix());
        let target = DensityMatrix::maximally_mixed(self.dim_out);
        max_abs(&(img - target.matrix())) <= BISTOCHASTIC_TOL
    }

    pub fn to_json(&self) -> Value {
        let ops: Vec<Value> = self
            .kraus
            .iter()
            .map(|k| {
                Value::Array(
                    (0..k.nrows())
                        .map(|i| Value::Array((0..k.ncols()).map(|j| json!([k[(i, j)].re, k[(i, j)].im])).collect()))
                        .collect(),
                )
            })
            .collect();
        json!({ "dim_in": self.dim_in, "dim_out": self.dim_out, "kraus": ops })
    }
}

/// `Φ ⊗ Ψ` together with its factors.
#[derive(Clone, Debug)]
pub struct ProductChannel {
    pub left: Channel,
    pub right: Channel,
    pub combined: Channel,
}

impl ProductChannel {
    pub fn dims_in(&self) -> (usize, usize) {
        (self.left.dim_in, self.right.dim_in)
    }

    pub fn dims_out(&self) -> (usize, usize) {
        (self.left.dim_out, self.right.dim_out)
    }
}

pub fn tensor_channels(phi: &Channel, psi: &Channel) -> ProductChannel {
    let mut kraus = Vec::with_capacity(phi.kraus.len() * psi.kraus.len());
    for k in &phi.kraus {
        for l in &psi.kraus {
            kraus.push(kron(k, l));
        }
    }
    let combined = Channel {
        dim_in: phi.dim_in * psi.dim_in,
        dim_out: phi.dim_out * psi.dim_out,
        kraus,
    };
    ProductChannel {
        left: phi.clone(),
        right: psi.clone(),
        combined,
    }
}

fn real(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn unit(rows: usize, cols: usize, i: usize, j: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(rows, cols);
    m[(i, j)] = real(1.0);
    m
}

fn check_probability(name: &str, value: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&value) || !value.is_finite() {
        return Err(Error::ParameterOutOfRange {
            name: name.into(),
            value,
        });
    }
    Ok(())
}

fn check_dim(name: &str, d: usize, min: usize) -> Result<()> {
    if d < min {
        return Err(Error::ParameterOutOfRange {
            name: name.into(),
            value: d as f64,
        });
    }
    Ok(())
}

pub fn identity(d: usize) -> Result<Channel> {
    check_dim("d", d, 1)?;
    Channel::new(d, d, vec![ComplexMatrix::identity(d, d)])
}

/// `ρ ↦ (1−p)ρ + p·I/d`, `p ∈ [0, 1]`, with Kraus operators proportional
/// to the Weyl operators.
pub fn depolarizing(d: usize, p: f64) -> Result<Channel> {
    check_dim("d", d, 1)?;
    check_probability("p", p)?;
    let d2 = (d * d) as f64;
    let mut kraus = vec![ComplexMatrix::identity(d, d) * real((1.0 - p + p / d2).sqrt())];
    if p > 0.0 {
        let c = real((p / d2).sqrt());
        for a in 0..d {
            for b in 0..d {
                if a == 0 && b == 0 {
                    continue;
                }
                kraus.push(weyl(d, a, b) * c);
            }
        }
    }
    Channel::new(d, d, kraus)
}

/// Constant channel `ρ ↦ I/d′`.
pub fn completely_depolarizing(d: usize, d_out: usize) -> Result<Channel> {
    check_dim("d", d, 1)?;
    check_dim("d_out", d_out, 1)?;
    let c = real(1.0 / (d_out as f64).sqrt());
    let mut kraus = Vec::with_capacity(d * d_out);
    for i in 0..d_out {
        for j in 0..d {
            kraus.push(unit(d_out, d, i, j) * c);
        }
    }
    Channel::new(d, d_out, kraus)
}

/// Qubit phase flip `ρ ↦ (1−p)ρ + p·ZρZ`.
pub fn dephasing(p: f64) -> Result<Channel> {
    check_probability("p", p)?;
    let z = ComplexMatrix::from_diagonal(&ComplexVector::from_vec(vec![real(1.0), real(-1.0)]));
    Channel::new(
        2,
        2,
        vec![ComplexMatrix::identity(2, 2) * real((1.0 - p).sqrt()), z * real(p.sqrt())],
    )
}

/// Qubit amplitude damping with decay probability `γ`.
pub fn amplitude_damping(gamma: f64) -> Result<Channel> {
    check_probability("gamma", gamma)?;
    let k0 = ComplexMatrix::from_row_slice(2, 2, &[real(1.0), real(0.0), real(0.0), real((1.0 - gamma).sqrt())]);
    let k1 = ComplexMatrix::from_row_slice(2, 2, &[real(0.0), real(gamma.sqrt()), real(0.0), real(0.0)]);
    Channel::new(2, 2, vec![k0, k1])
}

/// Erasure: with probability `p` the input is replaced by the flag state
/// `|d⟩` of a `(d+1)`-dimensional output.
pub fn erasure(d: usize, p: f64) -> Result<Channel> {
    check_dim("d", d, 1)?;
    check_probability("p", p)?;
    let mut keep = ComplexMatrix::zeros(d + 1, d);
    for i in 0..d {
        keep[(i, i)] = real((1.0 - p).sqrt());
    }
    let mut kraus = vec![keep];
    for j in 0..d {
        kraus.push(unit(d + 1, d, d, j) * real(p.sqrt()));
    }
    Channel::new(d, d + 1, kraus)
}

/// `ρ ↦ (1−p)ρᵀ + p·I/d`. Complete positivity restricts
/// `p ∈ [d/(d+1), d/(d−1)]`.
pub fn transpose_depolarizing(d: usize, p: f64) -> Result<Channel> {
    check_dim("d", d, 2)?;
    let df = d as f64;
    let t = 1.0 - p;
    if !p.is_finite() || t > 1.0 / (df + 1.0) + 1e-12 || t < -1.0 / (df - 1.0) - 1e-12 {
        return Err(Error::ParameterOutOfRange {
            name: "p".into(),
            value: p,
        });
    }
    // Mixture a·(I + ρᵀ)/(d+1) + b·(I − ρᵀ)/(d−1) of the two Werner-Holevo maps.
    let a = ((df + 1.0) * (t * (df - 1.0) + 1.0) / (2.0 * df)).clamp(0.0, 1.0);
    let b = 1.0 - a;
    let cs = real((2.0 * a / (df + 1.0)).sqrt());
    let ca = real((2.0 * b / (df - 1.0)).sqrt());
    let h = real(std::f64::consts::FRAC_1_SQRT_2);
    let mut kraus = Vec::new();
    for i in 0..d {
        for j in i..d {
            let sym = if i == j {
                unit(d, d, i, i)
            } else {
                (unit(d, d, i, j) + unit(d, d, j, i)) * h
            };
            if a > 0.0 {
                kraus.push(sym * cs);
            }
            if i != j && b > 0.0 {
                kraus.push((unit(d, d, i, j) - unit(d, d, j, i)) * h * ca);
            }
        }
    }
    Channel::new(d, d, kraus)
}

/// Channel from a Haar-random Stinespring isometry `C^{d_in} → C^{d_out} ⊗ C^k`.
pub fn random_channel(d_in: usize, d_out: usize, kraus_count: usize, seed: u64) -> Result<Channel> {
    if d_in == 0 || d_out == 0 || kraus_count == 0 {
        return Err(Error::InvalidInput("random channel needs positive dimensions and Kraus count".into()));
    }
    if d_out * kraus_count < d_in {
        return Err(Error::InvalidInput(format!(
            "d_out·kraus_count = {} is smaller than d_in = {d_in}",
            d_out * kraus_count
        )));
    }
    let mut rng = rng_for(seed, "random-channel");
    let v = random_isometry(d_out * kraus_count, d_in, &mut rng);
    let kraus = (0..kraus_count)
        .map(|i| v.rows(i * d_out, d_out).clone_owned())
        .collect();
    Channel::new(d_in, d_out, kraus)
}

pub const CATALOG_NAMES: [&str; 7] = [
    "identity",
    "depolarizing",
    "completely_depolarizing",
    "dephasing",
    "amplitude_damping",
    "erasure",
    "transpose_depolarizing",
];

/// Builds a catalog channel from named numeric parameters (`d`, `d_out`, `p`, `gamma`).
pub fn catalog(name: &str, params: &BTreeMap<String, f64>) -> Result<Channel> {
    let get = |key: &str| params.get(key).copied();
    let require = |key: &str| {
        get(key).ok_or_else(|| Error::InvalidInput(format!("catalog channel `{name}` requires parameter `{key}`")))
    };
    let dim = |key: &str, default: Option<usize>| -> Result<usize> {
        match get(key) {
            Some(v) if v >= 1.0 && v.fract() == 0.0 && v <= 64.0 => Ok(v as usize),
            Some(v) => Err(Error::ParameterOutOfRange {
                name: key.into(),
                value: v,
            }),
            None => default.ok_or_else(|| Error::InvalidInput(format!("catalog channel `{name}` requires `{key}`"))),
        }
    };
    for key in params.keys() {
        if !["d", "d_out", "p", "gamma"].contains(&key.as_str()) {
            return Err(Error::InvalidInput(format!("unknown catalog parameter `{key}`")));
        }
    }
    match name {
        "identity" => identity(dim("d", Some(2))?),
        "depolarizing" => depolarizing(dim("d", Some(2))?, require("p")?),
        "completely_depolarizing" => {
            let d = dim("d", Some(2))?;
            completely_depolarizing(d, dim("d_out", Some(d))?)
        }
        "dephasing" => dephasing(require("p")?),
        "amplitude_damping" => amplitude_damping(require("gamma")?),
        "erasure" => erasure(dim("d", Some(2))?, require("p")?),
        "transpose_depolarizing" => transpose_depolarizing(dim("d", Some(3))?, require("p")?),
        other => Err(Error::UnknownChannel(other.into())),
    }
}

fn format_error(path: &str, field: &str, message: impl Into<String>) -> Error {
    let location = if field.is_empty() {
        path.to_string()
    } else {
        format!("{path}: field `{field}`")
    };
    Error::Format {
        path: location,
        message: message.into(),
    }
}

/// Parses `[re, im]` into a complex number.
pub(crate) fn parse_complex(v: &Value, path: &str, field: &str) -> Result<C64> {
    let pair = v
        .as_array()
        .filter(|a| a.len() == 2)
        .ok_or_else(|| format_error(path, field, "expected a [re, im] pair"))?;
    let re = pair[0]
        .as_f64()
        .ok_or_else(|| format_error(path, &format!("{field}[0]"), "expected a number"))?;
    let im = pair[1]
        .as_f64()
        .ok_or_else(|| format_error(path, &format!("{field}[1]"), "expected a number"))?;
    Ok(C64::new(re, im))
}

/// Parses a matrix given as rows of `[re, im]` pairs.
pub(crate) fn parse_matrix(v: &Value, path: &str, field: &str) -> Result<ComplexMatrix> {
    let rows = v
        .as_array()
        .ok_or_else(|| format_error(path, field, "expected an array of rows"))?;
    if rows.is_empty() {
        return Err(format_error(path, field, "matrix has no rows"));
    }
    let mut entries = Vec::new();
    let mut ncols = None;
    for (i, row) in rows.iter().enumerate() {
        let row_field = format!("{field}[{i}]");
        let cells = row
            .as_array()
            .ok_or_else(|| format_error(path, &row_field, "expected an array of [re, im] pairs"))?;
        match ncols {
            None => ncols = Some(cells.len()),
            Some(n) if n != cells.len() => {
                return Err(format_error(path, &row_field, format!("row has {} entries, expected {n}", cells.len())))
            }
            _ => {}
        }
        for (j, cell) in cells.iter().enumerate() {
            entries.push(parse_complex(cell, path, &format!("{row_field}[{j}]"))?);
        }
    }
    let ncols = ncols.unwrap_or(0);
    if ncols == 0 {
        return Err(format_error(path, field, "matrix has no columns"));
    }
    Ok(ComplexMatrix::from_row_slice(rows.len(), ncols, &entries))
}

/// Parses JSON text as a value, reporting syntax errors with line and column.
pub(crate) fn parse_json_text(text: &str, path: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| Error::Format {
        path: format!("{path}:{}:{}", e.line(), e.column()),
        message: e.to_string(),
    })
}

fn field_usize(obj: &serde_json::Map<String, Value>, key: &str, path: &str) -> Result<usize> {
    let v = obj
        .get(key)
        .ok_or_else(|| format_error(path, key, "missing required field"))?;
    v.as_u64()
        .filter(|&n| n >= 1)
        .map(|n| n as usize)
        .ok_or_else(|| format_error(path, key, "expected a positive integer"))
}

/// Channel from a parsed JSON document (explicit Kraus list or catalog entry).
pub fn channel_from_json(doc: &Value, path: &str) -> Result<Channel> {
    let obj = doc
        .as_object()
        .ok_or_else(|| format_error(path, "", "expected a JSON object"))?;
    if let Some(name) = obj.get("catalog") {
        let name = name
            .as_str()
            .ok_or_else(|| format_error(path, "catalog", "expected a string"))?;
        let mut params = BTreeMap::new();
        if let Some(p) = obj.get("params") {
            let p = p
                .as_object()
                .ok_or_else(|| format_error(path, "params", "expected an object"))?;
            for (k, v) in p {
                let x = v
                    .as_f64()
                    .ok_or_else(|| format_error(path, &format!("params.{k}"), "expected a number"))?;
                params.insert(k.clone(), x);
            }
        }
        return catalog(name, &params).map_err(|e| format_error(path, "catalog", e.to_string()));
    }
    let dim_in = field_usize(obj, "dim_in", path)?;
    let dim_out = field_usize(obj, "dim_out", path)?;
    let ops = obj
        .get("kraus")
        .ok_or_else(|| format_error(path, "kraus", "missing required field"))?
        .as_array()
        .ok_or_else(|| format_error(path, "kraus", "expected an array of matrices"))?;
    let mut kraus = Vec::with_capacity(ops.len());
    for (i, op) in ops.iter().enumerate() {
        let field = format!("kraus[{i}]");
        let m = parse_matrix(op, path, &field)?;
        if m.nrows() != dim_out || m.ncols() != dim_in {
            return Err(format_error(
                path,
                &field,
                format!("shape {}x{} does not match dim_out x dim_in = {dim_out}x{dim_in}", m.nrows(), m.ncols()),
            ));
        }
        kraus.push(m);
    }
    Channel::new(dim_in, dim_out, kraus).map_err(|e| format_error(path, "kraus", e.to_string()))
}

pub fn channel_from_json_str(text: &str, path: &str) -> Result<Channel> {
    channel_from_json(&parse_json_text(text, path)?, path)
}

pub fn load_channel(path: &Path) -> Result<Channel> {
    let label = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Format {
        path: label.clone(),
        message: e.to_string(),
    })?;
    channel_from_json_str(&text, &label)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_density, random_hermitian, random_pure_state};
    use approx::assert_abs_diff_eq;

    fn params(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    fn all_catalog() -> Vec<Channel> {
        vec![
            identity(3).unwrap(),
            depolarizing(2, 0.3).unwrap(),
            depolarizing(3, 0.7).unwrap(),
            completely_depolarizing(2, 3).unwrap(),
            dephasing(0.2).unwrap(),
            amplitude_damping(0.4).unwrap(),
            erasure(2, 0.25).unwrap(),
            transpose_depolarizing(3, 0.8).unwrap(),
            transpose_depolarizing(2, 1.5).unwrap(),
        ]
    }

    #[test]
    fn identity_channel_examples() {
        let id = identity(2).unwrap();
        assert_eq!(id.kraus().len(), 1);
        let mut rng = rng_for(1, "id");
        let rho = random_density(2, &mut rng);
        assert!(id.apply(&rho).unwrap().distance(&rho) < 1e-15);
        let a = random_hermitian(2, &mut rng);
        assert!(max_abs(&(id.dual_apply(&a).unwrap().matrix() - a.matrix())) < 1e-15);
        assert!(id.is_bistochastic());
    }

    #[test]
    fn depolarizing_matches_affine_formula() {
        let ch = depolarizing(2, 0.5).unwrap();
        let out = ch.apply(&PureState::basis(2, 0).density()).unwrap();
        assert!(out.distance(&DensityMatrix::from_diagonal(&[0.75, 0.25]).unwrap()) < 1e-14);
        assert!(depolarizing(2, 0.0).unwrap().equivalent(&identity(2).unwrap(), 1e-14));
        assert!(depolarizing(2, 0.3).unwrap().is_bistochastic());

        let mut rng = rng_for(2, "dep-dual");
        for p in [0.1, 0.5, 0.9] {
            let ch = depolarizing(2, p).unwrap();
            let a = random_hermitian(2, &mut rng);
            let expected = a.scaled(1.0 - p).add(&HermitianOperator::identity(2).scaled(p / 2.0 * a.trace()));
            assert!(max_abs(&(ch.dual_apply(&a).unwrap().matrix() - expected.matrix())) < 1e-14);
        }
    }

    #[test]
    fn completely_depolarizing_is_constant() {
        let ch = completely_depolarizing(3, 2).unwrap();
        let mut rng = rng_for(3, "cd");
        let rho = random_density(3, &mut rng);
        assert!(ch.apply(&rho).unwrap().distance(&DensityMatrix::maximally_mixed(2)) < 1e-14);
    }

    #[test]
    fn amplitude_damping_is_not_bistochastic() {
        assert!(!amplitude_damping(0.5).unwrap().is_bistochastic());
        assert!(transpose_depolarizing(3, 0.8).unwrap().is_bistochastic());
    }

    #[test]
    fn transpose_depolarizing_matches_definition() {
        let mut rng = rng_for(4, "td");
        for (d, p) in [(2, 0.7), (2, 2.0), (3, 0.75), (3, 1.5)] {
            let ch = transpose_depolarizing(d, p).unwrap();
            let rho = random_density(d, &mut rng);
            let expected = rho.matrix().transpose() * C64::new(1.0 - p, 0.0)
                + ComplexMatrix::identity(d, d) * C64::new(p / d as f64, 0.0);
            assert!(max_abs(&(ch.apply(&rho).unwrap().matrix() - expected)) < 1e-13);
        }
        assert!(transpose_depolarizing(2, 0.5).is_err());
    }

    #[test]
    fn duality_pairing_on_catalog_and_random() {
        let mut rng = rng_for(5, "pairing");
        let mut channels = all_catalog();
        for s in 0..10 {
            channels.push(random_channel(2, 3, 2, s).unwrap());
        }
        for ch in &channels {
            let a = random_hermitian(ch.dim_out(), &mut rng);
            let rho = random_density(ch.dim_in(), &mut rng);
            let lhs = a.trace_product(ch.apply(&rho).unwrap().matrix());
            let rhs = ch.dual_apply(&a).unwrap().trace_product(rho.matrix());
            assert!((lhs - rhs).abs() < 1e-10);
            let unital = ch.dual_apply(&HermitianOperator::identity(ch.dim_out())).unwrap();
            assert!(max_abs(&(unital.matrix() - ComplexMatrix::identity(ch.dim_in(), ch.dim_in()))) < 1e-10);
            let out = ch.apply(&rho).unwrap();
            assert!(DensityMatrix::new(out.matrix().clone()).is_ok());
        }
    }

    #[test]
    fn product_channel_factorizes() {
        let phi = amplitude_damping(0.3).unwrap();
        let psi = random_channel(3, 2, 2, 9).unwrap();
        let prod = tensor_channels(&phi, &psi);
        assert_eq!(prod.combined.kraus().len(), phi.kraus().len() * psi.kraus().len());
        let mut rng = rng_for(6, "product");
        let rho = random_density(2, &mut rng);
        let sigma = random_density(3, &mut rng);
        let lhs = prod.combined.apply(&rho.tensor(&sigma)).unwrap();
        let rhs = phi.apply(&rho).unwrap().tensor(&psi.apply(&sigma).unwrap());
        assert!(lhs.distance(&rhs) < 1e-10);
        let id = tensor_channels(&identity(2).unwrap(), &identity(2).unwrap());
        assert!(id.combined.equivalent(&identity(4).unwrap(), 1e-15));
    }

    #[test]
    fn restriction_agrees_with_parent_on_subspace() {
        let parent = depolarizing(3, 0.4).unwrap();
        let p = Projector::new(HermitianOperator::diagonal(&[1.0, 0.0, 1.0]).into_matrix()).unwrap();
        let sub = parent.restrict(&p).unwrap();
        assert_eq!(sub.dim_in(), 2);
        let v = p.isometry();
        let mut rng = rng_for(7, "restrict");
        for _ in 0..5 {
            let psi = random_pure_state(2, &mut rng);
            let embedded = PureState::normalized(&v * psi.amplitudes()).unwrap();
            let lhs = sub.apply_pure(&psi).unwrap();
            let rhs = parent.apply_pure(&embedded).unwrap();
            assert!(lhs.distance(&rhs) < 1e-10);
        }
        let rank1 = Projector::new(HermitianOperator::diagonal(&[0.0, 1.0, 0.0]).into_matrix()).unwrap();
        let constant = parent.restrict(&rank1).unwrap();
        assert_eq!(constant.dim_in(), 1);
        let full = parent.restrict(&Projector::identity(3)).unwrap();
        let u = Projector::identity(3).isometry();
        assert!(full.equivalent(&parent.precompose_isometry(&u).unwrap(), 1e-12));
    }

    #[test]
    fn random_channel_properties() {
        let a = random_channel(2, 2, 3, 42).unwrap();
        let b = random_channel(2, 2, 3, 42).unwrap();
        assert_eq!(a.kraus(), b.kraus());
        let iso = random_channel(2, 3, 1, 1).unwrap();
        let out = iso.apply_pure(&PureState::basis(2, 1)).unwrap();
        assert_abs_diff_eq!(out.spectrum()[0], 1.0, epsilon = 1e-12);
        assert!(random_channel(4, 1, 2, 0).is_err());
    }

    #[test]
    fn catalog_lookup_and_errors() {
        let ch = catalog("depolarizing", &params(&[("d", 2.0), ("p", 0.5)])).unwrap();
        assert!(ch.equivalent(&depolarizing(2, 0.5).unwrap(), 1e-15));
        assert!(matches!(catalog("teleporter", &params(&[])), Err(Error::UnknownChannel(_))));
        assert!(matches!(
            catalog("depolarizing", &params(&[("p", 1.5)])),
            Err(Error::ParameterOutOfRange { .. })
        ));
        assert!(catalog("amplitude_damping", &params(&[])).is_err());
    }

    #[test]
    fn json_round_trip_and_diagnostics() {
        let ch = amplitude_damping(0.3).unwrap();
        let text = ch.to_json().to_string();
        let back = channel_from_json_str(&text, "mem").unwrap();
        assert!(back.equivalent(&ch, 1e-15));

        let cat = channel_from_json_str(r#"{"catalog": "dephasing", "params": {"p": 0.1}}"#, "mem").unwrap();
        assert!(cat.equivalent(&dephasing(0.1).unwrap(), 1e-15));

        let err = channel_from_json_str("{\n  \"dim_in\": 2,\n  \"dim_out\": }", "bad.json").unwrap_err();
        assert!(err.to_string().starts_with("bad.json:3:"), "{err}");

        let bad_entry = r#"{"dim_in": 1, "dim_out": 1, "kraus": [[[[1.0, "x"]]]]}"#;
        let err = channel_from_json_str(bad_entry, "bad.json").unwrap_err();
        assert!(err.to_string().contains("kraus[0][0][0][1]"), "{err}");

        let not_tp = r#"{"dim_in": 1, "dim_out": 1, "kraus": [[[[0.5, 0.0]]]]}"#;
        let err = channel_from_json_str(not_tp, "bad.json").unwrap_err();
        assert!(err.to_string().contains("trace preserving"), "{err}");
    }
}
