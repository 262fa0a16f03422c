//! Channel-based forward and reverse passes.
//!
//! A probe propagates up to three kinds of channels through the layers: the
//! primal value `z`, first-order tangent channels `dz` (directional
//! derivatives with respect to the input), and second-order channels `d2z`
//! (unmixed second derivatives along a tangent direction). Reverse mode runs
//! over the whole structure, so parameter gradients of losses built on
//! values, normal derivatives and Laplacians come out exact, including the
//! mixed parameter/input derivatives.
//!
//! Hidden activations are tanh; all derivatives are evaluated from the
//! stored activation `z = tanh(s)`:
//!   sigma'   = 1 - z^2
//!   sigma''  = -2 z (1 - z^2)
//!   sigma''' = (1 - z^2)(6 z^2 - 2)

use super::loss::{HeadSeeds, HeadValues, ProbeKind};
use super::MlpParams;

#[inline]
fn matvec(
    w: &[f64],
    out_dim: usize,
    in_dim: usize,
    x: &[f64],
    bias: Option<&[f64]>,
    out: &mut [f64],
) {
    for r in 0..out_dim {
        let row = &w[r * in_dim..(r + 1) * in_dim];
        let mut acc = bias.map_or(0.0, |b| b[r]);
        for (wc, xc) in row.iter().zip(x) {
            acc += wc * xc;
        }
        out[r] = acc;
    }
}

/// `out = W^T g`, streamed over the row-major weight matrix.
#[inline]
fn matvec_t(w: &[f64], out_dim: usize, in_dim: usize, g: &[f64], out: &mut [f64]) {
    out[..in_dim].fill(0.0);
    for r in 0..out_dim {
        let gr = g[r];
        if gr == 0.0 {
            continue;
        }
        let row = &w[r * in_dim..(r + 1) * in_dim];
        for (oc, wc) in out[..in_dim].iter_mut().zip(row) {
            *oc += wc * gr;
        }
    }
}

/// `gw += a x^T`.
#[inline]
fn rank1_acc(gw: &mut [f64], out_dim: usize, in_dim: usize, a: &[f64], x: &[f64]) {
    for r in 0..out_dim {
        let ar = a[r];
        if ar == 0.0 {
            continue;
        }
        let row = &mut gw[r * in_dim..(r + 1) * in_dim];
        for (wc, xc) in row.iter_mut().zip(x) {
            *wc += ar * xc;
        }
    }
}

/// Stored intermediate state of one probe, reused across iterations.
#[derive(Default)]
struct Trace {
    /// Primal activations per level; `post[0]` is the input.
    post: Vec<Vec<f64>>,
    /// First-order channels: pre-activations per layer, values per level.
    tan_pre: Vec<Vec<Vec<f64>>>,
    tan_post: Vec<Vec<Vec<f64>>>,
    /// Second-order channels (Laplacian probes only).
    sec_pre: Vec<Vec<Vec<f64>>>,
    sec_post: Vec<Vec<Vec<f64>>>,
}

fn shaped(levels: &mut Vec<Vec<f64>>, sizes: &[usize], skip_first: bool) {
    let want = if skip_first { sizes.len() - 1 } else { sizes.len() };
    levels.resize_with(want, Vec::new);
    for (k, v) in levels.iter_mut().enumerate() {
        let dim = if skip_first { sizes[k + 1] } else { sizes[k] };
        v.resize(dim, 0.0);
    }
}

impl Trace {
    fn prepare(&mut self, sizes: &[usize], channels: usize, second_order: bool) {
        shaped(&mut self.post, sizes, false);
        self.tan_pre.resize_with(channels, Vec::new);
        self.tan_post.resize_with(channels, Vec::new);
        for k in 0..channels {
            shaped(&mut self.tan_pre[k], sizes, true);
            shaped(&mut self.tan_post[k], sizes, false);
        }
        let nsec = if second_order { channels } else { 0 };
        self.sec_pre.resize_with(nsec, Vec::new);
        self.sec_post.resize_with(nsec, Vec::new);
        for k in 0..nsec {
            shaped(&mut self.sec_pre[k], sizes, true);
            shaped(&mut self.sec_post[k], sizes, false);
        }
    }
}

/// Reusable buffers for probe forward/backward passes. One workspace serves
/// one sequential training loop; independent loops own independent
/// workspaces.
#[derive(Default)]
pub struct Workspace {
    traces: Vec<Trace>,
    // backward scratch, sized to the widest layer
    sbar: Vec<f64>,
    tbar: Vec<Vec<f64>>,
    ubar: Vec<Vec<f64>>,
    gz: Vec<f64>,
    gdz: Vec<Vec<f64>>,
    gd2z: Vec<Vec<f64>>,
}

impl Workspace {
    pub fn new() -> Self {
        Self::default()
    }

    fn prepare(&mut self, params: &MlpParams, max_channels: usize) {
        let width = *params.layer_sizes().iter().max().unwrap();
        self.sbar.resize(width, 0.0);
        self.gz.resize(width, 0.0);
        for buf in [&mut self.tbar, &mut self.ubar, &mut self.gdz, &mut self.gd2z] {
            buf.resize_with(max_channels, Vec::new);
            for v in buf.iter_mut() {
                v.resize(width, 0.0);
            }
        }
    }
}

fn channel_count(kind: &ProbeKind, input_dim: usize) -> (usize, bool) {
    match kind {
        ProbeKind::Value => (0, false),
        ProbeKind::Directional(_) => (1, false),
        ProbeKind::Laplacian => (input_dim, true),
    }
}

/// Forward pass for probe `idx`, storing the trace and returning the heads.
pub(super) fn probe_forward(
    params: &MlpParams,
    ws: &mut Workspace,
    idx: usize,
    x: &[f64],
    kind: &ProbeKind,
) -> HeadValues {
    let sizes = params.layer_sizes();
    let depth = params.depth();
    let d = sizes[0];
    let (nch, second) = channel_count(kind, d);
    if ws.traces.len() <= idx {
        ws.traces.resize_with(idx + 1, Trace::default);
    }
    ws.prepare(params, d);
    let trace = &mut ws.traces[idx];
    trace.prepare(sizes, nch, second);

    trace.post[0].copy_from_slice(x);
    for k in 0..nch {
        match kind {
            ProbeKind::Directional(dir) => trace.tan_post[k][0].copy_from_slice(dir),
            ProbeKind::Laplacian => {
                trace.tan_post[k][0].fill(0.0);
                trace.tan_post[k][0][k] = 1.0;
                trace.sec_post[k][0].fill(0.0);
            }
            ProbeKind::Value => unreachable!(),
        }
    }

    for l in 0..depth {
        let (in_dim, out_dim) = (sizes[l], sizes[l + 1]);
        let w = params.weights(l);
        let hidden = l + 1 < depth;

        let (lo, hi) = trace.post.split_at_mut(l + 1);
        matvec(w, out_dim, in_dim, &lo[l], Some(params.biases(l)), &mut hi[0]);
        if hidden {
            for v in hi[0].iter_mut() {
                *v = v.tanh();
            }
        }
        let z_out = &hi[0];

        for k in 0..nch {
            let (tlo, thi) = trace.tan_post[k].split_at_mut(l + 1);
            matvec(w, out_dim, in_dim, &tlo[l], None, &mut trace.tan_pre[k][l]);
            if second {
                let (slo, shi) = trace.sec_post[k].split_at_mut(l + 1);
                matvec(w, out_dim, in_dim, &slo[l], None, &mut trace.sec_pre[k][l]);
                for r in 0..out_dim {
                    let ts = trace.tan_pre[k][l][r];
                    let ss = trace.sec_pre[k][l][r];
                    if hidden {
                        let z = z_out[r];
                        let sp = 1.0 - z * z;
                        let spp = -2.0 * z * sp;
                        thi[0][r] = sp * ts;
                        shi[0][r] = spp * ts * ts + sp * ss;
                    } else {
                        thi[0][r] = ts;
                        shi[0][r] = ss;
                    }
                }
            } else {
                for r in 0..out_dim {
                    let ts = trace.tan_pre[k][l][r];
                    thi[0][r] = if hidden {
                        let z = z_out[r];
                        (1.0 - z * z) * ts
                    } else {
                        ts
                    };
                }
            }
        }
    }

    let value = trace.post[depth][0];
    let directional = match kind {
        ProbeKind::Directional(_) => trace.tan_post[0][depth][0],
        _ => 0.0,
    };
    let laplacian = if second {
        (0..nch).map(|k| trace.sec_post[k][depth][0]).sum()
    } else {
        0.0
    };
    HeadValues {
        value,
        directional,
        laplacian,
    }
}

/// Reverse pass for probe `idx`, accumulating `d(seeds . heads)/d(params)`
/// into the flat gradient buffer.
pub(super) fn probe_backward(
    params: &MlpParams,
    ws: &mut Workspace,
    idx: usize,
    kind: &ProbeKind,
    seeds: &HeadSeeds,
    grad: &mut [f64],
) {
    let sizes = params.layer_sizes();
    let depth = params.depth();
    let (nch, second) = channel_count(kind, sizes[0]);
    let trace = &ws.traces[idx];

    // Adjoints at the output level (width 1). A Laplacian seed applies to
    // every second-order channel because the Laplacian sums them.
    ws.gz[0] = seeds.value;
    for k in 0..nch {
        ws.gdz[k][0] = match kind {
            ProbeKind::Directional(_) => seeds.directional,
            _ => 0.0,
        };
        if second {
            ws.gd2z[k][0] = seeds.laplacian;
        }
    }

    for l in (0..depth).rev() {
        let (in_dim, out_dim) = (sizes[l], sizes[l + 1]);
        let w = params.weights(l);
        let hidden = l + 1 < depth;

        // Pre-activation adjoints.
        for r in 0..out_dim {
            let (sp, spp, sppp) = if hidden {
                let z = trace.post[l + 1][r];
                let sp = 1.0 - z * z;
                (sp, -2.0 * z * sp, sp * (6.0 * z * z - 2.0))
            } else {
                (1.0, 0.0, 0.0)
            };
            let mut sbar = ws.gz[r] * sp;
            for k in 0..nch {
                let gdz = ws.gdz[k][r];
                let ts = trace.tan_pre[k][l][r];
                sbar += gdz * spp * ts;
                ws.tbar[k][r] = gdz * sp;
                if second {
                    let gd2 = ws.gd2z[k][r];
                    let ss = trace.sec_pre[k][l][r];
                    sbar += gd2 * (sppp * ts * ts + spp * ss);
                    ws.tbar[k][r] += gd2 * 2.0 * spp * ts;
                    ws.ubar[k][r] = gd2 * sp;
                }
            }
            ws.sbar[r] = sbar;
        }

        // Parameter gradients for this layer.
        let (head, tail) = grad.split_at_mut(params.b_off[l]);
        let w_grad = &mut head[params.w_off[l]..];
        let b_grad = &mut tail[..out_dim];
        for (gb, sb) in b_grad.iter_mut().zip(&ws.sbar[..out_dim]) {
            *gb += sb;
        }
        rank1_acc(w_grad, out_dim, in_dim, &ws.sbar[..out_dim], &trace.post[l]);
        for k in 0..nch {
            rank1_acc(w_grad, out_dim, in_dim, &ws.tbar[k][..out_dim], &trace.tan_post[k][l]);
            if second {
                rank1_acc(w_grad, out_dim, in_dim, &ws.ubar[k][..out_dim], &trace.sec_post[k][l]);
            }
        }

        // Downstream adjoints. The inputs (sbar/tbar/ubar) live in separate
        // buffers, so the level buffers can be overwritten in place.
        if l > 0 {
            matvec_t(w, out_dim, in_dim, &ws.sbar, &mut ws.gz);
            for k in 0..nch {
                matvec_t(w, out_dim, in_dim, &ws.tbar[k], &mut ws.gdz[k]);
                if second {
                    matvec_t(w, out_dim, in_dim, &ws.ubar[k], &mut ws.gd2z[k]);
                }
            }
        }
    }
}

/// Plain forward evaluation.
pub(super) fn forward_value(params: &MlpParams, x: &[f64]) -> f64 {
    let sizes = params.layer_sizes();
    let depth = params.depth();
    let mut cur = x.to_vec();
    let mut next = Vec::new();
    for l in 0..depth {
        next.resize(sizes[l + 1], 0.0);
        matvec(
            params.weights(l),
            sizes[l + 1],
            sizes[l],
            &cur,
            Some(params.biases(l)),
            &mut next,
        );
        if l + 1 < depth {
            for v in next.iter_mut() {
                *v = v.tanh();
            }
        }
        std::mem::swap(&mut cur, &mut next);
    }
    cur[0]
}

/// Exact input gradient via one reverse sweep over stored activations.
pub(super) fn input_gradient(params: &MlpParams, x: &[f64]) -> Vec<f64> {
    let sizes = params.layer_sizes();
    let depth = params.depth();
    let mut post: Vec<Vec<f64>> = Vec::with_capacity(depth + 1);
    post.push(x.to_vec());
    for l in 0..depth {
        let mut next = vec![0.0; sizes[l + 1]];
        matvec(
            params.weights(l),
            sizes[l + 1],
            sizes[l],
            &post[l],
            Some(params.biases(l)),
            &mut next,
        );
        if l + 1 < depth {
            for v in next.iter_mut() {
                *v = v.tanh();
            }
        }
        post.push(next);
    }
    let mut g = vec![1.0];
    for l in (0..depth).rev() {
        let hidden = l + 1 < depth;
        let sbar: Vec<f64> = if hidden {
            g.iter()
                .zip(&post[l + 1])
                .map(|(gv, z)| gv * (1.0 - z * z))
                .collect()
        } else {
            g.clone()
        };
        let mut down = vec![0.0; sizes[l]];
        matvec_t(params.weights(l), sizes[l + 1], sizes[l], &sbar, &mut down);
        g = down;
    }
    g
}

/// Value plus directional derivative along `dir` in a single streamed pass.
pub(super) fn value_and_directional(params: &MlpParams, x: &[f64], dir: &[f64]) -> (f64, f64) {
    let sizes = params.layer_sizes();
    let depth = params.depth();
    let mut z = x.to_vec();
    let mut dz = dir.to_vec();
    let mut z_next = Vec::new();
    let mut dz_next = Vec::new();
    for l in 0..depth {
        let (in_dim, out_dim) = (sizes[l], sizes[l + 1]);
        z_next.resize(out_dim, 0.0);
        dz_next.resize(out_dim, 0.0);
        matvec(params.weights(l), out_dim, in_dim, &z, Some(params.biases(l)), &mut z_next);
        matvec(params.weights(l), out_dim, in_dim, &dz, None, &mut dz_next);
        if l + 1 < depth {
            for r in 0..out_dim {
                let t = z_next[r].tanh();
                z_next[r] = t;
                dz_next[r] *= 1.0 - t * t;
            }
        }
        std::mem::swap(&mut z, &mut z_next);
        std::mem::swap(&mut dz, &mut dz_next);
    }
    (z[0], dz[0])
}

/// Sum of unmixed second derivatives via `d` second-order channels.
pub(super) fn input_laplacian(params: &MlpParams, x: &[f64]) -> f64 {
    let sizes = params.layer_sizes();
    let depth = params.depth();
    let d = sizes[0];
    let mut z = x.to_vec();
    let mut dz: Vec<Vec<f64>> = (0..d)
        .map(|k| {
            let mut e = vec![0.0; d];
            e[k] = 1.0;
            e
        })
        .collect();
    let mut d2z: Vec<Vec<f64>> = (0..d).map(|_| vec![0.0; d]).collect();

    for l in 0..depth {
        let (in_dim, out_dim) = (sizes[l], sizes[l + 1]);
        let w = params.weights(l);
        let hidden = l + 1 < depth;
        let mut z_next = vec![0.0; out_dim];
        matvec(w, out_dim, in_dim, &z, Some(params.biases(l)), &mut z_next);
        if hidden {
            for v in z_next.iter_mut() {
                *v = v.tanh();
            }
        }
        for k in 0..d {
            let mut ts = vec![0.0; out_dim];
            let mut ss = vec![0.0; out_dim];
            matvec(w, out_dim, in_dim, &dz[k], None, &mut ts);
            matvec(w, out_dim, in_dim, &d2z[k], None, &mut ss);
            if hidden {
                for r in 0..out_dim {
                    let zo = z_next[r];
                    let sp = 1.0 - zo * zo;
                    let spp = -2.0 * zo * sp;
                    let t = ts[r];
                    ts[r] = sp * t;
                    ss[r] = spp * t * t + sp * ss[r];
                }
            }
            dz[k] = ts;
            d2z[k] = ss;
        }
        z = z_next;
    }
    (0..d).map(|k| d2z[k][0]).sum()
}
