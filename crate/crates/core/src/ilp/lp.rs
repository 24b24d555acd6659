//! CPLEX LP text export of the full integer model, for cross-checking with an
//! external MILP solver.

use std::fmt::Write as _;
use std::path::Path;

use crate::embedding::EmbeddingState;
use crate::ilp::SolveConfig;
use crate::topology::PhysicalNetwork;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LpOptions {
    /// Emit the one-host and linking rows for every (node, type) pair, not
    /// only for pairs that host at least one VNF.
    pub literal_eq2: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum LpError {
    #[error("big-M {big_m} must be at least {needed} for this instance")]
    BigMTooSmall { big_m: u32, needed: u64 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

const TERMS_PER_LINE: usize = 8;

fn push_sum(out: &mut String, terms: impl IntoIterator<Item = String>) {
    for (k, term) in terms.into_iter().enumerate() {
        if k > 0 {
            if k % TERMS_PER_LINE == 0 {
                out.push_str("\n   ");
            }
            out.push_str(" + ");
        }
        out.push_str(&term);
    }
}

/// Renders the model. Rows, per covered pair `(i, j)` and host `n`:
///
/// ```text
/// selfhost_i_j:   y_i_j_i = 0
/// onehost_i_j:    sum_n y_i_j_n = 1
/// pool_i_j_n:     x_n_j - M y_i_j_n >= m_ij - M          (m_ij <= x_nj + M(1 - y_ijn))
/// hops_i_j_n:     M y_i_j_n <= M + d_max - d_in          (d_in <= d_max + M(1 - y_ijn))
/// cap_n:          sum_j x_n_j <= c_n - sum_j m_nj
/// ```
///
/// Unreachable `(i, n)` pairs get `y_i_j_n <= 0` in place of the hop row.
pub fn write_lp(
    net: &PhysicalNetwork,
    state: &EmbeddingState,
    cfg: &SolveConfig,
    opts: LpOptions,
) -> Result<String, LpError> {
    let nodes = net.node_count();
    let types = state.type_count();
    let big_m = cfg.big_m;

    let max_m = (0..nodes)
        .flat_map(|i| (0..types).map(move |j| (i, j)))
        .map(|(i, j)| u64::from(state.m(i, j)))
        .max()
        .unwrap_or(0);
    let max_excess = (0..nodes)
        .flat_map(|i| (0..nodes).filter_map(move |n| net.hop(i, n)))
        .map(|d| u64::from(d.saturating_sub(cfg.d_max)))
        .max()
        .unwrap_or(0);
    let needed = max_m.max(max_excess);
    if u64::from(big_m) < needed {
        return Err(LpError::BigMTooSmall { big_m, needed });
    }

    let pairs: Vec<(usize, usize)> = if opts.literal_eq2 {
        (0..nodes)
            .flat_map(|i| (0..types).map(move |j| (i, j)))
            .collect()
    } else {
        state.active_pairs().collect()
    };

    let mut out = String::new();
    let w = &mut out;
    // writing to a String cannot fail
    let _ = writeln!(w, "\\ Shared backup provisioning model");
    let _ = writeln!(w, "\\ x_n_j   integer: type-j backup VNFs provisioned on node n");
    let _ = writeln!(
        w,
        "\\ y_i_j_n binary:  1 if the type-j VNFs of node i are backed up on node n"
    );
    let _ = writeln!(
        w,
        "\\ nodes {nodes}, types {types}, d_max {}, big-M {big_m}, pairs {} ({})",
        cfg.d_max,
        pairs.len(),
        if opts.literal_eq2 { "all" } else { "active" }
    );

    w.push_str("Minimize\n obj: ");
    push_sum(
        w,
        (0..nodes).flat_map(|n| (0..types).map(move |j| format!("x_{n}_{j}"))),
    );
    w.push_str("\nSubject To\n");

    for &(i, j) in &pairs {
        let _ = writeln!(w, " selfhost_{i}_{j}: y_{i}_{j}_{i} = 0");
        let _ = write!(w, " onehost_{i}_{j}: ");
        push_sum(w, (0..nodes).map(|n| format!("y_{i}_{j}_{n}")));
        w.push_str(" = 1\n");
        let m = i64::from(state.m(i, j));
        for n in 0..nodes {
            let _ = writeln!(
                w,
                " pool_{i}_{j}_{n}: x_{n}_{j} - {big_m} y_{i}_{j}_{n} >= {}",
                m - i64::from(big_m)
            );
        }
        for n in 0..nodes {
            match net.hop(i, n) {
                Some(d) => {
                    let rhs = i64::from(big_m) + i64::from(cfg.d_max) - i64::from(d);
                    let _ = writeln!(w, " hops_{i}_{j}_{n}: {big_m} y_{i}_{j}_{n} <= {rhs}");
                }
                None => {
                    let _ = writeln!(w, " hops_{i}_{j}_{n}: y_{i}_{j}_{n} <= 0");
                }
            }
        }
    }
    for n in 0..nodes {
        if types == 0 {
            break;
        }
        let _ = write!(w, " cap_{n}: ");
        push_sum(w, (0..types).map(|j| format!("x_{n}_{j}")));
        let spare = i64::from(net.capacity(n)) - i64::from(state.load(n));
        let _ = writeln!(w, " <= {spare}");
    }

    if types > 0 {
        w.push_str("General\n ");
        push_sum_plain(
            w,
            (0..nodes).flat_map(|n| (0..types).map(move |j| format!("x_{n}_{j}"))),
        );
        w.push('\n');
    }
    if !pairs.is_empty() {
        w.push_str("Binary\n ");
        push_sum_plain(
            w,
            pairs
                .iter()
                .flat_map(|&(i, j)| (0..nodes).map(move |n| format!("y_{i}_{j}_{n}"))),
        );
        w.push('\n');
    }
    w.push_str("End\n");
    Ok(out)
}

/// Space-separated variable list, wrapped.
fn push_sum_plain(out: &mut String, names: impl IntoIterator<Item = String>) {
    for (k, name) in names.into_iter().enumerate() {
        if k > 0 {
            out.push_str(if k % TERMS_PER_LINE == 0 { "\n " } else { " " });
        }
        out.push_str(&name);
    }
}

pub fn export_lp(
    net: &PhysicalNetwork,
    state: &EmbeddingState,
    cfg: &SolveConfig,
    opts: LpOptions,
    path: &Path,
) -> Result<(), LpError> {
    let text = write_lp(net, state, cfg, opts)?;
    std::fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn path_instance_rows() {
        let (net, state) = fixtures::path3();
        let lp = write_lp(&net, &state, &SolveConfig::with_d_max(1), LpOptions::default()).unwrap();
        assert!(lp.contains(" pool_0_0_1: x_1_0 - 10000 y_0_0_1 >= -9999\n"), "{lp}");
        assert!(lp.contains(" selfhost_0_0: y_0_0_0 = 0\n"));
        assert!(lp.contains(" onehost_2_0: y_2_0_0 + y_2_0_1 + y_2_0_2 = 1\n"));
        // two hops away with d_max = 1: 10000 y <= 9999 forces y = 0
        assert!(lp.contains(" hops_0_0_2: 10000 y_0_0_2 <= 9999\n"));
        assert!(lp.contains(" hops_0_0_1: 10000 y_0_0_1 <= 10000\n"));
        assert!(lp.contains(" cap_0: x_0_0 <= 1\n"));
        assert!(lp.contains("Minimize\n obj: x_0_0 + x_1_0 + x_2_0\n"));
        assert!(lp.contains("General\n x_0_0 x_1_0 x_2_0\n"));
        assert!(lp.ends_with("End\n"));
        assert!(!lp.contains("y_1_0_"), "inactive pair must not appear");
    }

    #[test]
    fn nothing_embedded_keeps_objective_only() {
        let net = PhysicalNetwork::new(2, &[(0, 1)], vec![1, 1]).unwrap();
        let state = EmbeddingState::empty(2, 1);
        let lp = write_lp(&net, &state, &SolveConfig::default(), LpOptions::default()).unwrap();
        assert!(lp.contains("obj: x_0_0 + x_1_0"));
        assert!(!lp.contains("onehost"));
        assert!(!lp.contains("Binary"));
        // literal form emits rows for inactive pairs too
        let lit = write_lp(
            &net,
            &state,
            &SolveConfig::default(),
            LpOptions { literal_eq2: true },
        )
        .unwrap();
        assert!(lit.contains(" onehost_0_0: y_0_0_0 + y_0_0_1 = 1\n"));
        assert!(lit.contains(" pool_0_0_1: x_1_0 - 10000 y_0_0_1 >= -10000\n"));
    }

    #[test]
    fn zero_hop_bound_contradicts_self_hosting_ban() {
        let (net, state) = fixtures::path3();
        let lp = write_lp(&net, &state, &SolveConfig::with_d_max(0), LpOptions::default()).unwrap();
        // only the node itself is within 0 hops, and it is banned
        assert!(lp.contains(" hops_0_0_1: 10000 y_0_0_1 <= 9999\n"));
        assert!(lp.contains(" hops_0_0_0: 10000 y_0_0_0 <= 10000\n"));
        assert!(lp.contains(" selfhost_0_0: y_0_0_0 = 0\n"));
    }

    #[test]
    fn unreachable_and_big_m_checks() {
        let net = PhysicalNetwork::new(2, &[], vec![9, 9]).unwrap();
        let state = EmbeddingState::from_counts(&net, &[vec![5], vec![0]]).unwrap();
        let lp = write_lp(&net, &state, &SolveConfig::default(), LpOptions::default()).unwrap();
        assert!(lp.contains(" hops_0_0_1: y_0_0_1 <= 0\n"));
        let cfg = SolveConfig {
            big_m: 4,
            ..SolveConfig::default()
        };
        assert!(matches!(
            write_lp(&net, &state, &cfg, LpOptions::default()),
            Err(LpError::BigMTooSmall { needed: 5, .. })
        ));
    }

    #[test]
    fn export_writes_file() {
        let (net, state) = fixtures::path3();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.lp");
        export_lp(&net, &state, &SolveConfig::default(), LpOptions::default(), &path).unwrap();
        assert!(std::fs::read_to_string(&path).unwrap().starts_with("\\ Shared backup"));
        assert!(matches!(
            export_lp(
                &net,
                &state,
                &SolveConfig::default(),
                LpOptions::default(),
                &dir.path().join("missing/model.lp")
            ),
            Err(LpError::Io(_))
        ));
    }
}
