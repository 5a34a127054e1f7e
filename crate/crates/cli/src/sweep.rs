//! Grid evaluation with CSV output.

use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context};
use brfactor::{evaluate, FactorKind, FactorResult, Method, RegionPair};
use clap::Args;
use rayon::prelude::*;

use crate::parse::Axis;
use crate::{sci, KindArg, MethodArg, QuadOpts, SeriesOpts};

#[derive(Args)]
pub struct SweepArgs {
    /// Factor kinds, comma separated.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "axx")]
    kind: Vec<KindArg>,
    #[arg(long, value_enum, default_value = "closed")]
    method: MethodArg,
    /// Each axis is VALUE or START:STOP:COUNT.
    #[arg(long)]
    r1: String,
    #[arg(long)]
    r2: String,
    #[arg(long, default_value = "0")]
    r: String,
    /// Angles also accept multiples of pi, e.g. `0:1pi:13`.
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    theta: String,
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    phi: String,
    #[arg(long)]
    dt1: String,
    #[arg(long)]
    dt2: String,
    #[arg(long = "t", allow_hyphen_values = true)]
    t_offset: String,
    /// Refuse grids with more points than this.
    #[arg(long, default_value_t = 1_000_000)]
    max_points: usize,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    series: SeriesOpts,
    #[command(flatten)]
    quad: QuadOpts,
}

struct Grid {
    kinds: Vec<FactorKind>,
    axes: [Vec<f64>; 8],
}

impl Grid {
    fn len(&self) -> Option<usize> {
        self.axes.iter().try_fold(self.kinds.len(), |acc, a| acc.checked_mul(a.len()))
    }

    /// Point `index` in lexicographic order, the last axis varying fastest.
    fn point(&self, mut index: usize) -> (FactorKind, RegionPair) {
        let mut v = [0.0; 8];
        for (slot, axis) in v.iter_mut().zip(&self.axes).rev() {
            *slot = axis[index % axis.len()];
            index /= axis.len();
        }
        let p = RegionPair { r1: v[0], r2: v[1], r: v[2], theta: v[3], phi: v[4], dt1: v[5], dt2: v[6], t_offset: v[7] };
        (self.kinds[index], p)
    }
}

fn grid(a: &SweepArgs) -> Result<Grid, String> {
    let axis = |s: &str, angle| Axis::parse(s, angle).map(|a| a.0);
    let mut kinds: Vec<FactorKind> = a.kind.iter().map(|&k| k.into()).collect();
    kinds.dedup();
    Ok(Grid {
        kinds,
        axes: [
            axis(&a.r1, false)?,
            axis(&a.r2, false)?,
            axis(&a.r, false)?,
            axis(&a.theta, true)?,
            axis(&a.phi, true)?,
            axis(&a.dt1, false)?,
            axis(&a.dt2, false)?,
            axis(&a.t_offset, false)?,
        ],
    })
}

pub fn run(a: SweepArgs) -> anyhow::Result<u8> {
    let g = match grid(&a) {
        Ok(g) => g,
        Err(msg) => {
            eprintln!("error: {msg}");
            return Ok(crate::EXIT_USAGE);
        }
    };
    let n = match g.len() {
        Some(n) if n <= a.max_points => n,
        other => {
            let size = other.map_or_else(|| "overflowing".to_string(), |n| n.to_string());
            eprintln!("error: grid has {size} points, above the cap of {} (raise --max-points)", a.max_points);
            return Ok(crate::EXIT_USAGE);
        }
    };
    let method: Method = a.method.into();
    let (series, quad) = (a.series.config(), a.quad.config());
    // indexed collect keeps grid order whatever the completion order
    let results: Vec<brfactor::Result<FactorResult>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let (kind, p) = g.point(i);
            evaluate(kind, &p, method, &series, &quad)
        })
        .collect();

    let sink: Box<dyn Write> = match &a.out {
        Some(path) => Box::new(std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?),
        None => Box::new(std::io::stdout().lock()),
    };
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["kind", "r1", "r2", "r", "theta", "phi", "dt1", "dt2", "t_offset", "method", "value", "terms_used", "converged"])?;
    for (i, res) in results.into_iter().enumerate() {
        let (kind, p) = g.point(i);
        let res = match res {
            Ok(r) => r,
            Err(e) => bail!(anyhow::Error::new(e).context(format!("grid point {i}"))),
        };
        let mut rec = vec![kind.to_string()];
        rec.extend([p.r1, p.r2, p.r, p.theta, p.phi, p.dt1, p.dt2, p.t_offset].map(sci));
        rec.extend([method.to_string(), sci(res.value), res.terms_used.to_string(), res.converged.to_string()]);
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(0)
}
