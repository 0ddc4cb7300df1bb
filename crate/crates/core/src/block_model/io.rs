use std::collections::BTreeMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use super::{Block, BlockIndex, BlockModel, Calendar, Dims, DrillSample, EconomicModel, PeriodCapacity};
use crate::csvio::{self, Table};
use crate::error::{Error, Result};

fn write_err(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |e| Error::io(path, e)
}

pub fn write_block_model(model: &BlockModel, out: &mut impl Write) -> std::io::Result<()> {
    writeln!(out, "# element = {}", model.element_name)?;
    let [sx, sy, sz] = model.block_size;
    writeln!(out, "# block_size = {sx} {sy} {sz}")?;
    let [ox, oy, oz] = model.origin;
    writeln!(out, "# origin = {ox} {oy} {oz}")?;
    writeln!(out, "i,j,k,tonnage,grade,domain")?;
    for b in &model.blocks {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            b.index.i, b.index.j, b.index.k, b.tonnage, b.grade, b.domain
        )?;
    }
    Ok(())
}

pub fn save_block_model(model: &BlockModel, path: &Path) -> Result<()> {
    let mut out = csvio::create(path)?;
    write_block_model(model, &mut out).map_err(write_err(path))?;
    out.flush().map_err(write_err(path))
}

/// Reads the block-model CSV. Every cell of the `nx × ny × nz` grid spanned
/// by the indices must appear exactly once. A trailing `stage` column is
/// accepted and ignored.
pub fn read_block_model(path: &Path, source: impl Read) -> Result<BlockModel> {
    let table = Table::read(path, source)?;
    let [ci, cj, ck, ct, cg, cd] =
        ["i", "j", "k", "tonnage", "grade", "domain"].map(|c| table.column(c));
    let (ci, cj, ck, ct, cg, cd) = (ci?, cj?, ck?, ct?, cg?, cd?);
    if table.rows.is_empty() {
        return Err(Error::parse(path, 1, "block model has no rows"));
    }

    let mut parsed = Vec::with_capacity(table.rows.len());
    let mut dims = Dims::new(0, 0, 0);
    for row in &table.rows {
        let index = BlockIndex::new(table.usize(row, ci)?, table.usize(row, cj)?, table.usize(row, ck)?);
        let block = Block {
            index,
            tonnage: table.f64(row, ct)?,
            grade: table.f64(row, cg)?,
            domain: table.u32(row, cd)?,
        };
        block.check().map_err(|m| table.error(row, m))?;
        dims.nx = dims.nx.max(index.i + 1);
        dims.ny = dims.ny.max(index.j + 1);
        dims.nz = dims.nz.max(index.k + 1);
        parsed.push((row.line, block));
    }

    let mut slots: Vec<Option<Block>> = vec![None; dims.len()];
    for (line, block) in parsed {
        let slot = &mut slots[dims.linear(block.index)];
        if slot.is_some() {
            return Err(Error::parse(path, line, format!("duplicate block {}", block.index)));
        }
        *slot = Some(block);
    }
    let mut blocks = Vec::with_capacity(dims.len());
    for (id, slot) in slots.into_iter().enumerate() {
        match slot {
            Some(b) => blocks.push(b),
            None => {
                return Err(Error::parse(
                    path,
                    0,
                    format!("block {} missing from {} grid", dims.index_of(id), dims),
                ))
            }
        }
    }

    let block_size = table.meta_f64s::<3>("block_size")?.unwrap_or([1.0; 3]);
    let origin = table.meta_f64s::<3>("origin")?.unwrap_or([0.0; 3]);
    let model = BlockModel {
        dims,
        block_size,
        origin,
        blocks,
        element_name: table.metadata.get("element").cloned().unwrap_or_else(|| "Cu".to_string()),
    };
    model.validate().map_err(|e| Error::parse(path, 1, e.to_string()))?;
    Ok(model)
}

pub fn load_block_model(path: &Path) -> Result<BlockModel> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_block_model(path, file)
}

pub fn save_samples(samples: &[DrillSample], path: &Path) -> Result<()> {
    let mut out = csvio::create(path)?;
    let mut write = || -> std::io::Result<()> {
        writeln!(out, "x,y,z,grade,domain")?;
        for s in samples {
            writeln!(out, "{},{},{},{},{}", s.x, s.y, s.z, s.grade, s.domain)?;
        }
        out.flush()
    };
    write().map_err(write_err(path))
}

pub fn load_samples(path: &Path) -> Result<Vec<DrillSample>> {
    let table = Table::read_path(path)?;
    let cols: Vec<usize> = ["x", "y", "z", "grade", "domain"]
        .iter()
        .map(|c| table.column(c))
        .collect::<Result<_>>()?;
    table
        .rows
        .iter()
        .map(|row| {
            let s = DrillSample {
                x: table.f64(row, cols[0])?,
                y: table.f64(row, cols[1])?,
                z: table.f64(row, cols[2])?,
                grade: table.f64(row, cols[3])?,
                domain: table.u32(row, cols[4])?,
            };
            s.check().map_err(|m| table.error(row, m))?;
            Ok(s)
        })
        .collect()
}

pub fn save_calendar(calendar: &Calendar, path: &Path) -> Result<()> {
    let mut out = csvio::create(path)?;
    let mut write = || -> std::io::Result<()> {
        writeln!(out, "period,mining_capacity,plant_capacity")?;
        for (t, p) in calendar.periods.iter().enumerate() {
            writeln!(out, "{},{},{}", t + 1, p.mining_capacity, p.plant_capacity)?;
        }
        out.flush()
    };
    write().map_err(write_err(path))
}

pub fn load_calendar(path: &Path) -> Result<Calendar> {
    let table = Table::read_path(path)?;
    let (cp, cm, cpl) = (
        table.column("period")?,
        table.column("mining_capacity")?,
        table.column("plant_capacity")?,
    );
    let mut by_period: BTreeMap<usize, PeriodCapacity> = BTreeMap::new();
    for row in &table.rows {
        let period = table.usize(row, cp)?;
        let cap = PeriodCapacity {
            mining_capacity: table.f64(row, cm)?,
            plant_capacity: table.f64(row, cpl)?,
        };
        if period == 0 {
            return Err(table.error(row, "periods are numbered from 1"));
        }
        if cap.mining_capacity < 0.0 || cap.plant_capacity < 0.0 {
            return Err(table.error(row, "capacities must be >= 0"));
        }
        if by_period.insert(period, cap).is_some() {
            return Err(table.error(row, format!("duplicate period {period}")));
        }
    }
    if by_period.is_empty() {
        return Err(Error::parse(path, 1, "calendar has no periods"));
    }
    if let Some((expected, found)) = by_period.keys().enumerate().find(|(n, t)| n + 1 != **t) {
        return Err(Error::parse(
            path,
            0,
            format!("periods must run 1..t_max without gaps; period {} missing (found {found})", expected + 1),
        ));
    }
    Calendar::new(by_period.into_values().collect())
}

pub fn save_economics(econ: &EconomicModel, path: &Path) -> Result<()> {
    let mut out = csvio::create(path)?;
    let mut write = || -> std::io::Result<()> {
        writeln!(out, "price_per_tonne_metal = {}", econ.price_per_tonne_metal)?;
        writeln!(out, "mining_cost = {}", econ.mining_cost)?;
        writeln!(out, "processing_cost = {}", econ.processing_cost)?;
        writeln!(out, "selling_cost = {}", econ.selling_cost)?;
        writeln!(out, "rehab_cost = {}", econ.rehab_cost)?;
        writeln!(out, "cutoff_grade = {}", econ.cutoff_grade)?;
        writeln!(out, "discount_rate = {}", econ.discount_rate)?;
        for (domain, rec) in &econ.recovery_by_domain {
            writeln!(out, "recovery_domain_{domain} = {rec}")?;
        }
        out.flush()
    };
    write().map_err(write_err(path))
}

pub fn load_economics(path: &Path) -> Result<EconomicModel> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let entries = csvio::read_key_values(path, file)?;
    let mut scalars: BTreeMap<&str, f64> = BTreeMap::new();
    let mut recovery_by_domain = BTreeMap::new();
    const KEYS: [&str; 7] = [
        "price_per_tonne_metal",
        "mining_cost",
        "processing_cost",
        "selling_cost",
        "rehab_cost",
        "cutoff_grade",
        "discount_rate",
    ];
    for (line, key, raw) in &entries {
        let value: f64 = raw
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| Error::parse(path, *line, format!("`{key}` is not a finite number: `{raw}`")))?;
        if let Some(domain) = key.strip_prefix("recovery_domain_") {
            let domain: u32 = domain
                .parse()
                .map_err(|_| Error::parse(path, *line, format!("bad domain id in `{key}`")))?;
            if !(value > 0.0 && value <= 1.0) {
                return Err(Error::parse(path, *line, format!("recovery {value} outside (0, 1]")));
            }
            if recovery_by_domain.insert(domain, value).is_some() {
                return Err(Error::parse(path, *line, format!("duplicate key `{key}`")));
            }
        } else if let Some(&name) = KEYS.iter().find(|k| **k == key) {
            if scalars.insert(name, value).is_some() {
                return Err(Error::parse(path, *line, format!("duplicate key `{key}`")));
            }
        } else {
            return Err(Error::parse(path, *line, format!("unknown key `{key}`")));
        }
    }
    let get = |k: &str| {
        scalars
            .get(k)
            .copied()
            .ok_or_else(|| Error::parse(path, 0, format!("missing key `{k}`")))
    };
    let econ = EconomicModel {
        price_per_tonne_metal: get("price_per_tonne_metal")?,
        mining_cost: get("mining_cost")?,
        processing_cost: get("processing_cost")?,
        selling_cost: get("selling_cost")?,
        rehab_cost: get("rehab_cost")?,
        cutoff_grade: get("cutoff_grade")?,
        discount_rate: get("discount_rate")?,
        recovery_by_domain,
    };
    econ.validate().map_err(|e| Error::parse(path, 0, e.to_string()))?;
    Ok(econ)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::block_model::{generate_synthetic_deposit, SyntheticConfig};
    use proptest::prelude::*;

    fn read_str(text: &str) -> Result<BlockModel> {
        read_block_model(Path::new("mem.csv"), text.as_bytes())
    }

    #[test]
    fn model_round_trip_is_exact() {
        let d = generate_synthetic_deposit(&SyntheticConfig::new(3, Dims::new(5, 4, 3), 2)).unwrap();
        let mut buf = Vec::new();
        write_block_model(&d.truth, &mut buf).unwrap();
        let back = read_block_model(Path::new("mem.csv"), buf.as_slice()).unwrap();
        assert_eq!(back, d.truth);
    }

    #[test]
    fn negative_tonnage_names_row() {
        let text = "i,j,k,tonnage,grade,domain\n0,0,0,5,0.1,0\n1,0,0,-1,0.1,0\n";
        let err = read_str(text).unwrap_err().to_string();
        assert!(err.contains(":3:") && err.contains("tonnage"), "{err}");
    }

    #[test]
    fn duplicate_and_missing_blocks_rejected() {
        let dup = "i,j,k,tonnage,grade,domain\n0,0,0,5,0.1,0\n0,0,0,5,0.1,0\n";
        assert!(read_str(dup).unwrap_err().to_string().contains("duplicate"));
        let missing = "i,j,k,tonnage,grade,domain\n0,0,0,5,0.1,0\n1,1,0,5,0.1,0\n";
        assert!(read_str(missing).unwrap_err().to_string().contains("missing"));
        let no_col = "i,j,k,tonnage,grade\n0,0,0,5,0.1\n";
        assert!(read_str(no_col).unwrap_err().to_string().contains("domain"));
        let nan = "i,j,k,tonnage,grade,domain\n0,0,0,NaN,0.1,0\n";
        assert!(read_str(nan).is_err());
    }

    #[test]
    fn stage_column_is_tolerated() {
        let text = "i,j,k,tonnage,grade,domain,stage\n0,0,0,5,0.1,0,1\n";
        assert_eq!(read_str(text).unwrap().len(), 1);
    }

    #[test]
    fn calendar_like_the_reported_setup() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("calendar.csv");
        let mut text = String::from("period,mining_capacity,plant_capacity\n");
        for t in 1..=20 {
            let plant = if t < 9 { 5e6 } else { 9e6 };
            text.push_str(&format!("{t},25000000,{plant}\n"));
        }
        std::fs::write(&path, text).unwrap();
        let cal = load_calendar(&path).unwrap();
        assert_eq!(cal.t_max(), 20);
        assert!(cal.periods.iter().all(|p| p.mining_capacity == 25e6));
        assert_eq!(cal.period(8).plant_capacity, 5e6);
        assert_eq!(cal.period(9).plant_capacity, 9e6);
        assert_eq!(cal, Calendar::stepped(20, 25e6, 5e6, 9e6, 9).unwrap());

        save_calendar(&cal, &path).unwrap();
        assert_eq!(load_calendar(&path).unwrap(), cal);
    }

    #[test]
    fn calendar_gap_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("calendar.csv");
        std::fs::write(&path, "period,mining_capacity,plant_capacity\n1,5,5\n3,5,5\n").unwrap();
        assert!(load_calendar(&path).is_err());
    }

    #[test]
    fn economics_round_trip_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("econ.txt");
        let econ = EconomicModel::copper(BTreeMap::from([(0, 0.92), (1, 0.835), (2, 0.75)]), 0.1);
        save_economics(&econ, &path).unwrap();
        assert_eq!(load_economics(&path).unwrap(), econ);

        let text = std::fs::read_to_string(&path).unwrap();
        std::fs::write(&path, text.replace("mining_cost = 4.2\n", "")).unwrap();
        assert!(load_economics(&path).unwrap_err().to_string().contains("mining_cost"));
        std::fs::write(&path, format!("{text}bogus = 1\n")).unwrap();
        assert!(load_economics(&path).unwrap_err().to_string().contains("bogus"));
    }

    #[test]
    fn samples_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        let d = generate_synthetic_deposit(&SyntheticConfig::new(5, Dims::new(4, 4, 3), 3)).unwrap();
        save_samples(&d.samples, &path).unwrap();
        assert_eq!(load_samples(&path).unwrap(), d.samples);
    }

    proptest! {
        // Corrupting one numeric field of a valid file must never yield a
        // model that differs from the original without an error.
        #[test]
        fn corrupted_fields_error_or_parse_faithfully(
            row in 0usize..12, col in 0usize..6,
            junk in prop_oneof![
                Just("-1".to_string()), Just("NaN".to_string()), Just("inf".to_string()),
                Just("".to_string()), Just("abc".to_string()), Just("1.5".to_string()),
                Just("2".to_string()), Just("0".to_string()),
            ]
        ) {
            let model = BlockModel::uniform(Dims::new(3, 2, 2), [1.0; 3], [0.0; 3], 4.0).unwrap();
            let mut buf = Vec::new();
            write_block_model(&model, &mut buf).unwrap();
            let text = String::from_utf8(buf).unwrap();
            let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
            let target = 4 + row;
            let mut fields: Vec<String> = lines[target].split(',').map(str::to_string).collect();
            fields[col] = junk;
            lines[target] = fields.join(",");
            match read_str(&lines.join("\n")) {
                Err(_) => {}
                Ok(parsed) => {
                    parsed.validate().unwrap();
                    let b = parsed.blocks.iter().find(|b| b.index == model.blocks[row].index);
                    // Anything accepted must be a valid, faithfully parsed record.
                    prop_assert!(b.is_some());
                    let b = b.unwrap();
                    prop_assert!(b.tonnage > 0.0 && (0.0..=1.0).contains(&b.grade));
                }
            }
        }
    }
}
