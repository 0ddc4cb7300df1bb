use std::collections::BTreeMap;
use std::fs::File;
use std::io::Write;
use std::path::Path;

use super::{Ensemble, InterpolationMethod, InterpolatorConfig, UncertaintyField};
use crate::block_model::{load_block_model, save_block_model, BlockIndex, BlockModel};
use crate::csvio::{self, Table};
use crate::error::{Error, Result};

fn member_file(m: usize) -> String {
    format!("member_{m:02}.csv")
}

/// Writes `member_NN.csv`, `aggregate.csv` and `ensemble.meta` into `dir`.
pub fn save_ensemble(ensemble: &Ensemble, aggregate: &BlockModel, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (m, member) in ensemble.members.iter().enumerate() {
        save_block_model(member, &dir.join(member_file(m)))?;
    }
    save_block_model(aggregate, &dir.join("aggregate.csv"))?;

    let path = dir.join("ensemble.meta");
    let c = &ensemble.config;
    let seeds: Vec<String> = ensemble.member_seeds.iter().map(u64::to_string).collect();
    let layers: Vec<String> = c.net_hidden_layers.iter().map(usize::to_string).collect();
    let mut out = csvio::create(&path)?;
    let text = format!(
        "members = {}\nmember_seeds = {}\nmethod = {}\nidw_power = {}\nidw_max_neighbors = {}\n\
         idw_power_jitter = {}\nbootstrap_fraction = {}\nnet_hidden_layers = {}\n\
         net_fit_tolerance = {}\nnet_max_epochs = {}\nlearning_rate = {}\n",
        ensemble.len(),
        seeds.join(" "),
        c.method.name(),
        c.idw_power,
        c.idw_max_neighbors,
        c.idw_power_jitter,
        c.bootstrap_fraction,
        layers.join(" "),
        c.net_fit_tolerance,
        c.net_max_epochs,
        c.learning_rate,
    );
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| Error::io(&path, e))
}

/// Reads an ensemble directory, returning the members and the aggregate.
pub fn load_ensemble(dir: &Path) -> Result<(Ensemble, BlockModel)> {
    let meta_path = dir.join("ensemble.meta");
    let file = File::open(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
    let entries = csvio::read_key_values(&meta_path, file)?;
    let meta: BTreeMap<String, (usize, String)> = entries.into_iter().map(|(l, k, v)| (k, (l, v))).collect();
    let get = |key: &str| -> Result<&(usize, String)> {
        meta.get(key)
            .ok_or_else(|| Error::parse(&meta_path, 0, format!("missing key `{key}`")))
    };
    fn parse<T: std::str::FromStr>(path: &Path, key: &str, entry: &(usize, String)) -> Result<T> {
        entry
            .1
            .parse()
            .map_err(|_| Error::parse(path, entry.0, format!("bad value for `{key}`: `{}`", entry.1)))
    }
    fn parse_list<T: std::str::FromStr>(path: &Path, key: &str, entry: &(usize, String)) -> Result<Vec<T>> {
        entry
            .1
            .split_whitespace()
            .map(|v| v.parse().map_err(|_| Error::parse(path, entry.0, format!("bad value in `{key}`: `{v}`"))))
            .collect()
    }
    let p = meta_path.as_path();
    let n: usize = parse(p, "members", get("members")?)?;
    let member_seeds: Vec<u64> = parse_list(p, "member_seeds", get("member_seeds")?)?;
    let config = InterpolatorConfig {
        method: get("method")?.1.parse::<InterpolationMethod>()?,
        idw_power: parse(p, "idw_power", get("idw_power")?)?,
        idw_max_neighbors: parse(p, "idw_max_neighbors", get("idw_max_neighbors")?)?,
        idw_power_jitter: parse(p, "idw_power_jitter", get("idw_power_jitter")?)?,
        bootstrap_fraction: parse(p, "bootstrap_fraction", get("bootstrap_fraction")?)?,
        net_hidden_layers: parse_list(p, "net_hidden_layers", get("net_hidden_layers")?)?,
        net_fit_tolerance: parse(p, "net_fit_tolerance", get("net_fit_tolerance")?)?,
        net_max_epochs: parse(p, "net_max_epochs", get("net_max_epochs")?)?,
        learning_rate: parse(p, "learning_rate", get("learning_rate")?)?,
    };
    let members = (0..n)
        .map(|m| load_block_model(&dir.join(member_file(m))))
        .collect::<Result<Vec<_>>>()?;
    let aggregate = load_block_model(&dir.join("aggregate.csv"))?;
    let ensemble = Ensemble::new(members, member_seeds, config)?;
    if !aggregate.same_geometry(&ensemble.members[0]) {
        return Err(Error::Geometry("aggregate.csv differs in geometry from the members".to_string()));
    }
    Ok((ensemble, aggregate))
}

pub fn save_uncertainty(field: &UncertaintyField, model: &BlockModel, path: &Path) -> Result<()> {
    let mut out = csvio::create(path)?;
    let mut write = || -> std::io::Result<()> {
        writeln!(out, "i,j,k,grade_std,domain_disagreement")?;
        for (id, b) in model.blocks.iter().enumerate() {
            writeln!(
                out,
                "{},{},{},{},{}",
                b.index.i, b.index.j, b.index.k, field.grade_std[id], field.domain_disagreement[id]
            )?;
        }
        out.flush()
    };
    write().map_err(|e| Error::io(path, e))
}

pub fn load_uncertainty(path: &Path, model: &BlockModel) -> Result<UncertaintyField> {
    let table = Table::read_path(path)?;
    let cols: Vec<usize> = ["i", "j", "k", "grade_std", "domain_disagreement"]
        .iter()
        .map(|c| table.column(c))
        .collect::<Result<_>>()?;
    let n = model.len();
    let mut grade_std = vec![f64::NAN; n];
    let mut domain_disagreement = vec![f64::NAN; n];
    for row in &table.rows {
        let index = BlockIndex::new(table.usize(row, cols[0])?, table.usize(row, cols[1])?, table.usize(row, cols[2])?);
        if !model.dims.contains(index) {
            return Err(table.error(row, format!("block {index} outside model {}", model.dims)));
        }
        let id = model.dims.linear(index);
        if !grade_std[id].is_nan() {
            return Err(table.error(row, format!("duplicate block {index}")));
        }
        let std = table.f64(row, cols[3])?;
        let dis = table.f64(row, cols[4])?;
        if std < 0.0 || !(0.0..=1.0).contains(&dis) {
            return Err(table.error(row, "grade_std must be >= 0 and disagreement within [0, 1]"));
        }
        grade_std[id] = std;
        domain_disagreement[id] = dis;
    }
    if let Some(id) = grade_std.iter().position(|v| v.is_nan()) {
        return Err(Error::parse(path, 0, format!("block {} missing", model.dims.index_of(id))));
    }
    Ok(UncertaintyField {
        grade_std,
        domain_disagreement,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::block_model::{generate_synthetic_deposit, Dims, SyntheticConfig};
    use crate::grade_ensemble::{aggregate, build_ensemble, uncertainty_field};

    #[test]
    fn ensemble_directory_round_trip() {
        let d = generate_synthetic_deposit(&SyntheticConfig::new(4, Dims::new(6, 5, 4), 6)).unwrap();
        let e = build_ensemble(&d.samples, &InterpolatorConfig::default(), 3, 40, &d.truth).unwrap();
        let agg = aggregate(&e);
        let dir = tempfile::tempdir().unwrap();
        save_ensemble(&e, &agg, dir.path()).unwrap();
        assert!(dir.path().join("member_02.csv").exists());
        let (back, back_agg) = load_ensemble(dir.path()).unwrap();
        assert_eq!(back, e);
        assert_eq!(back_agg, agg);

        let u = uncertainty_field(&e, &agg);
        let path = dir.path().join("uncertainty.csv");
        save_uncertainty(&u, &agg, &path).unwrap();
        assert_eq!(load_uncertainty(&path, &agg).unwrap(), u);
    }
}
