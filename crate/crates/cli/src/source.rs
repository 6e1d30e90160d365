//! Channel sources shared by the subcommands: a JSON file or a built-in family.

use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use fsc_bounds::channel::{make_rll_dmc, parse_channel, Dmc, Fsc, RllSpec, RunLimit};
use fsc_bounds::closed_form::{bec_bound, bsc_bound, BoundResult};
use fsc_bounds::vgraph::{parse_vgraph, VGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Bsc,
    Bec,
}

impl Family {
    pub fn tag(self) -> &'static str {
        match self {
            Family::Bsc => "bsc",
            Family::Bec => "bec",
        }
    }

    pub fn dmc(self, param: f64) -> Dmc {
        match self {
            Family::Bsc => Dmc::Bsc(param),
            Family::Bec => Dmc::Bec(param),
        }
    }

    pub fn closed_form(self, spec: RllSpec, param: f64) -> fsc_bounds::Result<BoundResult> {
        match self {
            Family::Bsc => bsc_bound(spec, param),
            Family::Bec => bec_bound(spec, param),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct ChannelArgs {
    /// JSON channel file.
    #[arg(long, conflicts_with_all = ["family", "d", "k", "p", "eps"])]
    pub channel: Option<PathBuf>,
    /// Built-in (d,k)-RLL input-constrained channel.
    #[arg(long, value_enum)]
    pub family: Option<Family>,
    #[arg(long)]
    pub d: Option<usize>,
    /// Maximum run of zeros, or `inf`.
    #[arg(long, default_value = "inf")]
    pub k: RunLimit,
    /// BSC crossover probability.
    #[arg(long)]
    pub p: Option<f64>,
    /// BEC erasure probability.
    #[arg(long)]
    pub eps: Option<f64>,
}

/// A resolved channel, with its family and parameter when built in.
pub struct Source {
    pub fsc: Fsc,
    pub builtin: Option<(Family, RllSpec, f64)>,
}

impl ChannelArgs {
    pub fn load(&self) -> Result<Source> {
        if let Some(path) = &self.channel {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let fsc = parse_channel(&text).with_context(|| format!("invalid channel file {}", path.display()))?;
            return Ok(Source { fsc, builtin: None });
        }
        let Some(family) = self.family else {
            bail!("give either --channel FILE or --family bsc|bec");
        };
        let d = self.d.context("--family needs --d")?;
        let param = match (family, self.p, self.eps) {
            (Family::Bsc, Some(p), None) => p,
            (Family::Bec, None, Some(e)) => e,
            (Family::Bsc, _, _) => bail!("--family bsc needs --p (and not --eps)"),
            (Family::Bec, _, _) => bail!("--family bec needs --eps (and not --p)"),
        };
        let spec = RllSpec::new(d, self.k)?;
        let fsc = make_rll_dmc(spec, family.dmc(param))?;
        Ok(Source { fsc, builtin: Some((family, spec, param)) })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VGraphFamily {
    /// One vertex.
    Trivial,
    /// Last input.
    Memory1,
    /// Last two inputs.
    Memory2,
    /// Copy of the channel state graph.
    Constraint,
}

impl VGraphFamily {
    pub fn build(self, fsc: &Fsc) -> fsc_bounds::Result<VGraph> {
        match self {
            VGraphFamily::Trivial => Ok(VGraph::trivial(fsc.num_inputs())),
            VGraphFamily::Memory1 => Ok(VGraph::input_memory(fsc.num_inputs(), 1)),
            VGraphFamily::Memory2 => Ok(VGraph::input_memory(fsc.num_inputs(), 2)),
            VGraphFamily::Constraint => VGraph::from_state_graph(fsc),
        }
    }
}

pub fn load_vgraph(path: Option<&PathBuf>, family: VGraphFamily, fsc: &Fsc) -> Result<VGraph> {
    match path {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            parse_vgraph(&text, fsc).with_context(|| format!("invalid V-graph file {}", path.display()))
        }
        None => Ok(family.build(fsc)?),
    }
}
